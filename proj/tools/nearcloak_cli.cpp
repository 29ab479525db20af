// Command-line driver: nearcloak <subcommand> [flags]
//
// Exit codes: 0 pass, 1 invariant failure, 2 configuration error, 3 solver error.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "nearcloak/config.hpp"
#include "nearcloak/errors.hpp"
#include "nearcloak/ntd.hpp"
#include "nearcloak/potentials.hpp"
#include "nearcloak/residual.hpp"
#include "nearcloak/tensor.hpp"

using namespace nearcloak;
using json = nlohmann::json;

namespace {

constexpr int kPass = 0;
constexpr int kInvariantFailure = 1;
constexpr int kConfigError = 2;
constexpr int kSolverError = 3;

struct Overrides {
    std::string config_path;
    std::vector<std::string> sets;
    std::map<std::string, std::string> flags; ///< config key -> text
};

ExperimentConfig resolve(const Overrides &o) {
    ExperimentConfig c = o.config_path.empty() ? ExperimentConfig{} : load_config(o.config_path);
    for (const std::string &kv : o.sets) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
        c.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    for (const auto &[key, value] : o.flags) c.set(key, value);
    c.validate();
    return c;
}

std::filesystem::path prepare_out(const ExperimentConfig &c) {
    const std::filesystem::path dir(c.out_dir);
    std::filesystem::create_directories(dir);
    std::ofstream out(dir / "resolved_config.txt");
    c.write(out);
    return dir;
}

void write_json(const std::filesystem::path &path, const json &j) {
    std::ofstream out(path);
    out << j.dump(2) << '\n';
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// ---------------------------------------------------------------- tensor-check

int cmd_tensor_check(const ExperimentConfig &c) {
    const auto dir = prepare_out(c);
    const ResidualStressField t = c.residual_field();
    const AdmissibilityReport adm = verify_admissible(t, c.moduli, 2.0, 50);

    // Symmetry flags over the same sample grid as the admissibility sweep.
    bool major = true, minor = true;
    double voigt_roundtrip = 0.0;
    const int n = 50;
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            const Point2 x(-2.0 + 4.0 * a / (n - 1), -2.0 + 4.0 * b / (n - 1));
            if (x.norm() > 2.0) continue;
            const ElasticTensor4 ct = make_isotropic_residual(c.moduli, t.t(x).matrix(), 2);
            const SymmetryFlags f = check_symmetries(ct);
            major = major && f.major;
            minor = minor && f.minor;
            const ElasticTensor4 back = from_voigt(to_voigt(ct));
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j)
                    for (int k = 0; k < 2; ++k)
                        for (int l = 0; l < 2; ++l)
                            voigt_roundtrip = std::max(voigt_roundtrip, std::abs(back(i, j, k, l) - ct(i, j, k, l)));
        }

    json failures = json::array();
    if (!major) failures.push_back("major symmetry violated");
    if (!adm.symmetry_ok) failures.push_back("residual stress not symmetric");
    if (adm.divfree_max_residual > 1e-8) failures.push_back("residual stress not divergence free");
    if (adm.boundary_traction_max != 0.0) failures.push_back("nonzero boundary traction");
    if (!(adm.min_convexity_over_samples > 0.0)) failures.push_back("convexity violation: min convexity constant <= 0");
    if (voigt_roundtrip > 1e-14) failures.push_back("Voigt round trip error");

    json r;
    r["major_symmetric"] = major;
    r["minor_symmetric"] = minor;
    r["residual_stress_zero"] = t.is_zero();
    r["convexity_constant_isotropic"] = convexity_constant(make_isotropic(c.moduli, 2));
    r["min_convexity_over_samples"] = adm.min_convexity_over_samples;
    r["min_ellipticity_over_samples"] = adm.min_ellipticity_over_samples;
    r["divfree_max_residual"] = adm.divfree_max_residual;
    r["boundary_traction_max"] = adm.boundary_traction_max;
    r["voigt_roundtrip_max_error"] = voigt_roundtrip;
    r["samples"] = adm.samples;
    r["failures"] = failures;
    r["pass"] = failures.empty();
    write_json(dir / "tensor_check.json", r);
    std::cout << r.dump(2) << '\n';
    if (!(adm.min_ellipticity_over_samples > 0.0))
        std::cerr << "warning: residual stress exceeds the rank-one ellipticity margin; FEM runs may not converge\n";
    return failures.empty() ? kPass : kInvariantFailure;
}

// -------------------------------------------------------------- cloak-converge

int cmd_cloak_converge(const ExperimentConfig &c) {
    const auto dir = prepare_out(c);
    const CloakConfig base = c.cloak_config();
    const TractionBasis basis(c.n_max);
    const StudyResult study = convergence_study(base, c.h_list, basis, c.mesh_options(), c.workers);
    {
        std::ofstream out(dir / "study.csv");
        write_study_csv(out, study);
    }
    json s;
    s["slope"] = study.slope ? json(*study.slope) : json(nullptr);
    s["strictly_decreasing"] = study.strictly_decreasing;
    s["rows"] = json::array();
    for (const StudyRow &row : study.rows)
        s["rows"].push_back({{"h", row.h}, {"norm_diff", row.norm_diff}, {"norm_diff_plain", row.norm_diff_plain},
                             {"kappa", row.kappa}, {"wall_time_s", row.wall_time_s}});
    const bool pass = !study.slope || (*study.slope >= 0.7 && study.strictly_decreasing);
    s["pass"] = pass;
    write_json(dir / "summary.json", s);

    std::cout << "h        e(h)            e_plain(h)      wall[s]\n";
    for (const StudyRow &row : study.rows)
        std::cout << row.h << "  " << row.norm_diff << "  " << row.norm_diff_plain << "  " << row.wall_time_s << '\n';
    if (study.slope)
        std::cout << "slope " << *study.slope << (study.strictly_decreasing ? ", decreasing\n" : ", NOT decreasing\n");
    else
        std::cout << "slope undefined (fewer than two h values)\n";
    return pass ? kPass : kInvariantFailure;
}

// -------------------------------------------------------------- resonance-scan

int cmd_resonance_scan(const ExperimentConfig &c) {
    const auto dir = prepare_out(c);
    ScanOptions opts;
    opts.r0 = c.scan_r0;
    opts.r1 = c.scan_r1;
    opts.kappa = c.kappa;
    opts.beta = c.scan_beta;
    opts.mesh = c.mesh_options();
    const ResidualStressField t = c.residual_field();
    const double rho_star = first_neumann_eigenvalue(c.moduli, t, opts) / (c.kappa * c.kappa);
    const std::vector<double> grid = anchored_density_grid(rho_star, c.scan_n);

    std::vector<ScanCell> cells = resonance_scan(grid, grid, c.moduli, t, false, opts);
    const std::vector<ScanCell> lossy = resonance_scan(grid, grid, c.moduli, t, true, opts);
    auto stats = [](const std::vector<ScanCell> &v) {
        std::vector<double> ind;
        for (const ScanCell &cell : v) ind.push_back(cell.indicator);
        return std::make_pair(median(ind), *std::min_element(ind.begin(), ind.end()));
    };
    const auto [med0, min0] = stats(cells);
    const auto [med1, min1] = stats(lossy);
    int dips = 0;
    for (const ScanCell &cell : cells) dips += cell.indicator <= 1e-2 * med0;
    cells.insert(cells.end(), lossy.begin(), lossy.end());
    {
        std::ofstream out(dir / "scan.csv");
        write_scan_csv(out, cells);
    }
    const bool pass = dips > 0 && min1 >= 0.1 * med1;
    json s = {{"rho_star", rho_star},       {"lossless_median", med0}, {"lossless_min", min0},
              {"dip_cells", dips},          {"lossy_median", med1},    {"lossy_min", min1},
              {"lossy_min_over_median", min1 / med1}, {"pass", pass}};
    write_json(dir / "summary.json", s);
    std::cout << s.dump(2) << '\n';
    return pass ? kPass : kInvariantFailure;
}

// ------------------------------------------------------------------ invariance

int cmd_invariance(const ExperimentConfig &c) {
    const auto dir = prepare_out(c);
    CloakConfig cfg = c.cloak_config();
    cfg.h = c.invariance_h;
    const TractionBasis basis(c.n_max);
    json rows = json::array();
    std::ofstream csv(dir / "invariance.csv");
    csv << "h_mesh,relative_difference,relative_difference_plain,norm_virtual\n";
    csv.precision(12);
    double last = 0.0;
    for (double hm : c.invariance_h_mesh) {
        MeshOptions mo = c.mesh_options();
        mo.h_mesh = hm;
        const InvarianceResult r = invariance_check(cfg, cloak_space(cfg.h, CloakSpace::Physical, mo),
                                                    cloak_space(cfg.h, CloakSpace::Virtual, mo), basis);
        csv << hm << ',' << r.relative_difference << ',' << r.relative_difference_plain << ',' << r.norm_virtual << '\n';
        rows.push_back({{"h_mesh", hm}, {"relative_difference", r.relative_difference},
                        {"relative_difference_plain", r.relative_difference_plain}});
        std::cout << "h_mesh " << hm << "  relative difference " << r.relative_difference << '\n';
        last = r.relative_difference;
    }
    const bool pass = !rows.empty() && last <= 0.05;
    write_json(dir / "summary.json", {{"h", cfg.h}, {"rows", rows}, {"pass", pass}});
    return pass ? kPass : kInvariantFailure;
}

// ---------------------------------------------------------------- green-verify

int cmd_green_verify(const ExperimentConfig &c) {
    const auto dir = prepare_out(c);
    LameKernelParams p{c.moduli.lambda, c.moduli.mu, c.green_eta};
    p.validate();
    const CircleLayer layer{Eigen::Vector2d::Zero(), 1.0};
    const LayerDensity psi = [](double th) {
        return Eigen::Vector2cd(Complex(std::cos(th), 0.3 * std::sin(2 * th)), Complex(0.5 + std::sin(th), 0.0));
    };
    std::mt19937_64 rng(c.seed);
    std::uniform_real_distribution<double> dist(0.5, 2.0), ang(-M_PI, M_PI);
    std::uniform_int_distribution<int> side(0, 1);

    double worst_kernel = 0.0, worst_single = 0.0, worst_double = 0.0;
    std::ofstream csv(dir / "green.csv");
    csv << "x,y,kupradze_residual,single_layer_residual,double_layer_residual\n";
    csv.precision(12);
    for (int k = 0; k < c.green_points; ++k) {
        // Distance in [0.5, 2] from the layer, inside (|x| <= 0.5) or outside.
        const double d = dist(rng), th = ang(rng);
        const double r = side(rng) == 0 && d < 1.0 ? 1.0 - d : 1.0 + d;
        SmallVector x(2);
        x << r * std::cos(th), r * std::sin(th);
        // Kupradze columns at separation d from a source at the origin.
        SmallVector xk(2), src = SmallVector::Zero(2);
        xk << d * std::cos(th), d * std::sin(th);
        double rk = 0.0;
        for (int col = 0; col < 2; ++col)
            rk = std::max(rk, navier_residual([&](const SmallVector &z) { return ComplexVector(kupradze_tensor(z, src, p).col(col)); },
                                              xk, p));
        auto as_field = [&](auto eval) {
            return [=](const SmallVector &z) { return ComplexVector(eval(Eigen::Vector2d(z[0], z[1]))); };
        };
        const double rs = navier_residual(as_field([&](const Eigen::Vector2d &z) { return single_layer_eval(layer, psi, z, p, 256); }), x, p);
        const double rd = navier_residual(as_field([&](const Eigen::Vector2d &z) { return double_layer_eval(layer, psi, z, p, 256); }), x, p);
        csv << x[0] << ',' << x[1] << ',' << rk << ',' << rs << ',' << rd << '\n';
        worst_kernel = std::max(worst_kernel, rk);
        worst_single = std::max(worst_single, rs);
        worst_double = std::max(worst_double, rd);
    }
    const double worst = std::max({worst_kernel, worst_single, worst_double});
    const bool pass = worst <= 1e-4;
    json s = {{"max_navier_residual", worst},
              {"kupradze", worst_kernel},
              {"single_layer", worst_single},
              {"double_layer", worst_double},
              {"points", c.green_points},
              {"pass", pass}};
    write_json(dir / "summary.json", s);
    std::cout << s.dump(2) << '\n';
    return pass ? kPass : kInvariantFailure;
}

std::string fmt(double v) {
    std::ostringstream s;
    s.precision(17);
    s << v;
    return s.str();
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Near-cloaking experiments for elastic media with residual stress"};
    app.require_subcommand(1);
    app.fallthrough();

    Overrides o;
    app.add_option("--config", o.config_path, "key = value configuration file");
    app.add_option("--set", o.sets, "override any configuration key (key=value), repeatable");

    auto text_flag = [&](const std::string &name, const std::string &key, const std::string &help) {
        app.add_option_function<std::string>(name, [&o, key](const std::string &v) { o.flags[key] = v; }, help);
    };
    text_flag("--h-list", "h_list", "comma-separated decreasing list of h");
    text_flag("--kappa", "kappa", "frequency");
    text_flag("--alpha", "alpha", "shell density real part");
    text_flag("--beta", "beta", "shell damping (must be > 0)");
    text_flag("--gamma", "gamma", "shell stiffness factor");
    text_flag("--delta", "delta", "shell stiffness exponent");
    text_flag("--n-max", "n_max", "highest traction mode");
    text_flag("--h-mesh", "h_mesh", "target mesh size");
    text_flag("--order", "order", "element order, 1 or 2");
    text_flag("--seed", "seed", "target-medium seed (0 keeps the default target)");
    text_flag("--out", "out_dir", "output directory");
    text_flag("--workers", "workers", "threads for the convergence study");
    text_flag("--bumps", "bumps", "Airy bumps cx,cy,radius,amplitude;... or none");

    struct Cmd {
        const char *name, *help;
        int (*run)(const ExperimentConfig &);
    };
    const Cmd cmds[] = {
        {"tensor-check", "symmetry, convexity and residual-stress admissibility", cmd_tensor_check},
        {"cloak-converge", "NtD convergence study over h_list", cmd_cloak_converge},
        {"resonance-scan", "density scan of the two-region transmission problem", cmd_resonance_scan},
        {"invariance", "physical against virtual NtD maps under mesh refinement", cmd_invariance},
        {"green-verify", "Navier residuals of the Kupradze tensor and layer potentials", cmd_green_verify},
    };
    for (const Cmd &c : cmds) app.add_subcommand(c.name, c.help);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? kPass : kConfigError;
    }

    ExperimentConfig config;
    try {
        config = resolve(o);
    } catch (const ConfigError &e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return kConfigError;
    }

    for (const Cmd &c : cmds) {
        if (!app.got_subcommand(c.name)) continue;
        try {
            return c.run(config);
        } catch (const ConfigError &e) {
            std::cerr << "configuration error: " << e.what() << '\n';
            return kConfigError;
        } catch (const MeshError &e) {
            std::cerr << "mesh error: " << e.what() << '\n';
            return kConfigError;
        } catch (const ResonanceSuspected &e) {
            std::cerr << "solver error: " << e.what() << " (indicator " << fmt(e.indicator()) << ")\n";
            return kSolverError;
        } catch (const std::exception &e) {
            std::cerr << "error: " << e.what() << '\n';
            return kSolverError;
        }
    }
    return kConfigError;
}
