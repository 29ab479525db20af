#pragma once

#include <stdexcept>
#include <string>

namespace nearcloak {

/// Input violates a physical admissibility requirement (symmetry, support, convexity).
class AdmissibilityError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Point or parameter outside the domain of a map.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Jacobian with non-positive determinant.
class OrientationError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

class MeshError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// The factorized system is numerically singular: -kappa^2 sits (nearly) on the
/// discrete Neumann spectrum of the medium.
class ResonanceSuspected : public std::runtime_error {
public:
    ResonanceSuspected(const std::string &what, double indicator)
        : std::runtime_error(what), m_indicator(indicator) {}

    /// Estimated reciprocal condition number (or pivot ratio) at failure.
    double indicator() const { return m_indicator; }

private:
    double m_indicator;
};

} // namespace nearcloak
