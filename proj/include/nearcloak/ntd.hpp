////////////////////////////////////////////////////////////////////////////////
// ntd.hpp
////////////////////////////////////////////////////////////////////////////////
/*! @file
//  Discrete Neumann-to-Dirichlet maps on the circle |x| = 2, the near-cloak
//  media, and the experiments built on them.
//
//  Traction basis: for n = 0 the fields e_r, e_theta; for n >= 1 the fields
//  cos(n th) e_r, sin(n th) e_r, cos(n th) e_theta, sin(n th) e_theta.  Each
//  field has unit L2 norm on the continuous circle.
//
//  With F the matrix of basis load vectors, the boundary trace of column j is
//  projected back by the same edge quadrature:
//      Lambda = diag(1/G) F^T K^{-1} F,
//  G being the discrete Gram diagonal.  On a ring of equispaced vertices G is
//  exactly diagonal and constant, so Lambda inherits the symmetry of K.
//
//  Sobolev norms use the Fourier-weight model on the circle:
//  |phi|_{H^s}^2 = sum (1 + n^2)^s |c|^2.
*/
////////////////////////////////////////////////////////////////////////////////
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nearcloak/fem.hpp"
#include "nearcloak/residual.hpp"
#include "nearcloak/tensor.hpp"

namespace nearcloak {

class TractionBasis {
public:
    explicit TractionBasis(int n_max, double radius = 2.0);

    int n_max() const { return m_n_max; }
    double radius() const { return m_radius; }
    int size() const { return 4 * m_n_max + 2; }
    /// Angular mode n of basis field j.
    int mode(int j) const;
    /// Value of field j at angle theta, Cartesian components.
    Eigen::Vector2d eval(int j, double theta) const;
    /// Traction function of field j for apply_traction.
    TractionFn traction(int j) const;
    /// Angular modes of all fields.
    std::vector<int> modes() const;

private:
    int m_n_max;
    double m_radius;
};

struct NtDMatrix {
    Eigen::MatrixXcd entries;
    std::vector<int> modes;
    double kappa = 0.0;
    double indicator = 0.0; ///< resonance indicator of the factorization
    std::string mesh_descriptor;
    std::string medium_descriptor;
};

/// Throws ResonanceSuspected when the factorization is numerically singular.
NtDMatrix ntd_matrix(const MediumSpec &medium, const TractionBasis &basis, const FeSpace &space, double kappa);

/// Homogeneous medium {C0 = iso + T, rho = 1} on every region of the mesh.
MediumSpec homogeneous_medium(const IsotropicModuli &moduli, const ResidualStressField &t);
NtDMatrix reference_ntd(const TractionBasis &basis, const FeSpace &space, const IsotropicModuli &moduli,
                        const ResidualStressField &t, double kappa);

/// Discrete Gram matrix of the basis under the edge quadrature of `space`.
Eigen::MatrixXd gram_matrix(const TractionBasis &basis, const FeSpace &space);

/// sigma_max(W A W), W = diag((1 + n^2)^{1/4}).
double sobolev_operator_norm(const Eigen::MatrixXcd &a, const std::vector<int> &modes);
double sobolev_operator_norm(const NtDMatrix &a);
/// Plain spectral norm, for comparison.
double plain_operator_norm(const Eigen::MatrixXcd &a);

/// Core medium {C^(a), rho^(a)}: isotropic (lambda_scale lambda0, mu_scale mu0)
/// plus the ambient residual stress, density `density`.
struct TargetSpec {
    double lambda_scale = 2.0;
    double mu_scale = 3.0;
    double density = 2.0;

    /// Seed 0 keeps the defaults; any other seed varies each value by up to +-50%.
    static TargetSpec seeded(std::uint64_t seed);
};

struct CloakConfig {
    double h = 0.2;
    double alpha = 1.0, beta = 1.0, gamma = 1.0, delta = 1.0;
    IsotropicModuli moduli;
    ResidualStressField t;
    TargetSpec target;
    double kappa = 1.0;

    /// Throws ConfigError on h outside (0, 0.5], non-positive lossy constants,
    /// or a target / background that is not strongly convex.
    void validate() const;
};

enum class CloakSpace { Physical, Virtual };

/// Interface radii of the three-layer geometry: (h/2, h) virtual, (1/2, 1) physical.
std::vector<double> cloak_radii(double h, CloakSpace space);

MediumSpec build_cloaked_medium(const CloakConfig &config, CloakSpace space);

struct MeshOptions {
    double h_mesh = 0.08;
    ElementOrder order = ElementOrder::Quadratic;
    std::optional<double> grade_inner;
    int max_dofs = 2'000'000;
};

/// Mesh of B_2 fitted to the cloak interfaces; MeshError past the dof budget.
FeSpace cloak_space(double h, CloakSpace space, const MeshOptions &opts);

struct InvarianceResult {
    double relative_difference = 0.0; ///< Sobolev norm
    double relative_difference_plain = 0.0;
    double norm_virtual = 0.0;
};

InvarianceResult invariance_check(const CloakConfig &config, const FeSpace &physical, const FeSpace &virtual_space,
                                  const TractionBasis &basis);

struct StudyRow {
    double h = 0.0;
    int n_max = 0;
    double h_mesh = 0.0;
    double norm_diff = 0.0;
    double norm_diff_plain = 0.0;
    double slope_running = 0.0; ///< NaN for the first row
    double wall_time_s = 0.0;
    double kappa = 0.0; ///< frequency used, shifted by 3% after a reference resonance
};

struct StudyResult {
    std::vector<StudyRow> rows;
    std::optional<double> slope; ///< least-squares slope of log e vs log h
    bool strictly_decreasing = false;
};

/// Least-squares slope of log y against log x (nullopt for fewer than 2 points).
std::optional<double> loglog_slope(const std::vector<double> &x, const std::vector<double> &y);

/// e(h) = |Lambda_h - Lambda_0| for each h, both maps on the same virtual-space
/// mesh.  Runs use up to `workers` threads.
StudyResult convergence_study(const CloakConfig &base, const std::vector<double> &h_list, const TractionBasis &basis,
                              const MeshOptions &opts, int workers = 1);

void write_study_csv(std::ostream &out, const StudyResult &study);

struct ScanCell {
    double rho0 = 0.0, rho1 = 0.0;
    double indicator = 0.0;
    bool with_lossy = false;
};

struct ScanOptions {
    double r0 = 0.5, r1 = 1.0;
    double kappa = 1.0;
    double beta = 1.0; ///< added as +i beta to rho1 when with_lossy
    MeshOptions mesh{0.08, ElementOrder::Quadratic, std::nullopt, 2'000'000};
};

/// Two-region transmission problem on B_{r1} with zero traction on |x| = r1.
/// Indicator: smallest singular value of the mass-scaled system matrix.
std::vector<ScanCell> resonance_scan(const std::vector<double> &rho0_grid, const std::vector<double> &rho1_grid,
                                     const IsotropicModuli &moduli, const ResidualStressField &t, bool with_lossy,
                                     const ScanOptions &opts);

/// Smallest nonzero unit-density Neumann eigenvalue omega of S v = omega M v
/// on the homogeneous disc, by shifted inverse iteration.
double first_neumann_eigenvalue(const IsotropicModuli &moduli, const ResidualStressField &t, const ScanOptions &opts);

/// Grid rho* (k + 1) / (n / 2), k = 0..n-1, so the middle cell carries rho* exactly.
std::vector<double> anchored_density_grid(double rho_star, int n);

void write_scan_csv(std::ostream &out, const std::vector<ScanCell> &cells);

struct EnergyRow {
    int basis_index = 0;
    int mode = 0;
    double lhs = 0.0;        ///< beta kappa^2 |u~|^2 over the shell
    double phi_norm = 0.0;   ///< H^{-1/2}
    double diff_norm = 0.0;  ///< H^{1/2} of the trace difference
    double ratio = 0.0;      ///< lhs / (phi_norm diff_norm), 0 when both vanish
};

struct EnergyReport {
    std::vector<EnergyRow> rows;
    double max_ratio = 0.0;
};

/// phi_list holds basis indices; virtual-space medium against the homogeneous reference.
EnergyReport energy_inequality_check(const CloakConfig &config, const std::vector<int> &phi_list,
                                     const TractionBasis &basis, const FeSpace &virtual_space);

} // namespace nearcloak
