////////////////////////////////////////////////////////////////////////////////
// config.hpp
////////////////////////////////////////////////////////////////////////////////
/*! @file
//  Flat key = value experiment configuration.
//
//  One key per line, '#' starts a comment.  Lists are comma separated; the
//  bump list separates bumps with ';' and gives each as cx,cy,radius,amplitude
//  ("none" for no residual stress); bump amplitudes are in units of mu0.
//  Unknown keys are an error.
*/
////////////////////////////////////////////////////////////////////////////////
#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "nearcloak/ntd.hpp"
#include "nearcloak/residual.hpp"
#include "nearcloak/tensor.hpp"

namespace nearcloak {

struct ExperimentConfig {
    IsotropicModuli moduli;
    std::vector<AiryBump> bumps{AiryBump{}};
    double alpha = 1.0, beta = 1.0, gamma = 1.0, delta = 1.0;
    std::vector<double> h_list{0.4, 0.2, 0.1};
    double kappa = 1.0;
    int n_max = 8;
    double h_mesh = 0.08;
    int order = 2;
    std::string out_dir = "out";
    std::uint64_t seed = 0;
    int workers = 1;
    int max_dofs = 2'000'000;

    double invariance_h = 0.4;
    std::vector<double> invariance_h_mesh{0.1, 0.05, 0.025};

    double scan_r0 = 0.5, scan_r1 = 1.0;
    int scan_n = 20;
    double scan_beta = 1.0;

    double green_eta = 1.0;
    int green_points = 20;

    /// Throws ConfigError.  Residual-stress convexity is not checked here.
    void validate() const;

    /// Assign one key from its text form; throws ConfigError.
    void set(const std::string &key, const std::string &value);

    ResidualStressField residual_field() const;
    CloakConfig cloak_config() const;
    MeshOptions mesh_options() const;

    /// Every key with its resolved value, readable by parse_config.
    void write(std::ostream &out) const;
};

ExperimentConfig parse_config(std::istream &in, ExperimentConfig base = {});
ExperimentConfig load_config(const std::string &path);

std::vector<double> parse_double_list(const std::string &text);

} // namespace nearcloak
