#include "nearcloak/ntd.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <mutex>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

#include "nearcloak/errors.hpp"
#include "nearcloak/transform.hpp"

namespace nearcloak {

namespace {

double angle_of(const Point2 &x) {
    const double th = std::atan2(x.y(), x.x());
    return th <= -M_PI ? th + 2.0 * M_PI : th;
}

Eigen::VectorXd mode_weights(const std::vector<int> &modes, double power) {
    Eigen::VectorXd w(static_cast<Eigen::Index>(modes.size()));
    for (std::size_t k = 0; k < modes.size(); ++k) w[static_cast<Eigen::Index>(k)] = std::pow(1.0 + modes[k] * modes[k], power);
    return w;
}

std::string describe(const FeSpace &space) {
    std::ostringstream s;
    s << "h_mesh=" << space.mesh().h_mesh << " order=P" << static_cast<int>(space.order())
      << " nodes=" << space.n_nodes() << " triangles=" << space.mesh().n_triangles();
    return s.str();
}

ElasticTensor4 background_tensor(const IsotropicModuli &moduli, const ResidualStressField &t, const Point2 &x) {
    if (t.is_zero() || x.norm() >= t.support_radius()) return make_isotropic(moduli, 2);
    return make_isotropic_residual(moduli, t.t(x).matrix(), 2);
}

IsotropicModuli target_moduli(const CloakConfig &c) {
    return {c.target.lambda_scale * c.moduli.lambda, c.target.mu_scale * c.moduli.mu};
}

} // namespace

TractionBasis::TractionBasis(int n_max, double radius) : m_n_max(n_max), m_radius(radius) {
    if (n_max < 0) throw ConfigError("n_max must be non-negative");
    if (!(radius > 0.0)) throw ConfigError("basis radius must be positive");
}

int TractionBasis::mode(int j) const {
    if (j < 0 || j >= size()) throw std::out_of_range("basis index out of range");
    return j < 2 ? 0 : (j - 2) / 4 + 1;
}

std::vector<int> TractionBasis::modes() const {
    std::vector<int> m(static_cast<std::size_t>(size()));
    for (int j = 0; j < size(); ++j) m[static_cast<std::size_t>(j)] = mode(j);
    return m;
}

Eigen::Vector2d TractionBasis::eval(int j, double theta) const {
    const int n = mode(j);
    const Eigen::Vector2d er(std::cos(theta), std::sin(theta)), et(-std::sin(theta), std::cos(theta));
    if (n == 0) return (j == 0 ? er : et) / std::sqrt(2.0 * M_PI * m_radius);
    const double scale = 1.0 / std::sqrt(M_PI * m_radius);
    switch ((j - 2) % 4) {
    case 0: return scale * std::cos(n * theta) * er;
    case 1: return scale * std::sin(n * theta) * er;
    case 2: return scale * std::cos(n * theta) * et;
    default: return scale * std::sin(n * theta) * et;
    }
}

TractionFn TractionBasis::traction(int j) const {
    return [this, j](const Point2 &x, const Point2 &) { return eval(j, angle_of(x)).cast<Complex>().eval(); };
}

namespace {

Eigen::MatrixXcd basis_loads(const TractionBasis &basis, const FeSpace &space) {
    Eigen::MatrixXcd f(space.n_dofs(), basis.size());
    for (int j = 0; j < basis.size(); ++j) f.col(j) = traction_load(space, basis.traction(j));
    return f;
}

} // namespace

Eigen::MatrixXd gram_matrix(const TractionBasis &basis, const FeSpace &space) {
    // Same edge rule as traction_load, applied to the exact basis fields.
    static constexpr std::array<double, 5> t = {0.5 - 0.5 * 0.9061798459386640, 0.5 - 0.5 * 0.5384693101056831, 0.5,
                                                0.5 + 0.5 * 0.5384693101056831, 0.5 + 0.5 * 0.9061798459386640};
    static constexpr std::array<double, 5> w = {0.5 * 0.2369268850561891, 0.5 * 0.4786286704993665,
                                                0.5 * 0.5688888888888889, 0.5 * 0.4786286704993665,
                                                0.5 * 0.2369268850561891};
    const int m = basis.size();
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(m, m);
    Eigen::MatrixXd vals(2, m);
    for (const auto &e : space.boundary_edges()) {
        if (e.marker != marker::kOuterBoundary) continue;
        const Point2 pa = space.node(e.a), d = space.node(e.b) - pa;
        for (std::size_t q = 0; q < t.size(); ++q) {
            const double th = angle_of(pa + t[q] * d);
            for (int j = 0; j < m; ++j) vals.col(j) = basis.eval(j, th);
            g.noalias() += (w[q] * d.norm()) * vals.transpose() * vals;
        }
    }
    return g;
}

NtDMatrix ntd_matrix(const MediumSpec &medium, const TractionBasis &basis, const FeSpace &space, double kappa) {
    const DiscreteSystem sys = assemble(space, medium, kappa);
    const Eigen::MatrixXcd f = basis_loads(basis, space);
    const SparseLu lu(sys.K);
    if (lu.singular()) throw ResonanceSuspected("NtD factorization hit a zero pivot", 0.0);
    const Eigen::MatrixXcd u = lu.solve(f);

    double indicator = std::numeric_limits<double>::infinity();
    for (int j = 0; j < basis.size(); ++j)
        indicator = std::min(indicator, resonance_indicator(lu, sys.K, f.col(j), u.col(j)));
    if (indicator < kResonanceThreshold)
        throw ResonanceSuspected("NtD system is numerically singular at kappa = " + std::to_string(kappa), indicator);

    const Eigen::VectorXd gdiag = gram_matrix(basis, space).diagonal();
    NtDMatrix out;
    out.entries = gdiag.cwiseInverse().cast<Complex>().asDiagonal() * (f.transpose() * u);
    out.modes = basis.modes();
    out.kappa = kappa;
    out.indicator = indicator;
    out.mesh_descriptor = describe(space);
    out.medium_descriptor = medium.description;
    return out;
}

MediumSpec homogeneous_medium(const IsotropicModuli &moduli, const ResidualStressField &t) {
    if (!moduli.strongly_convex(2)) throw AdmissibilityError("background moduli are not strongly convex");
    Phase p{[moduli, t](const Point2 &x) { return background_tensor(moduli, t, x); },
            [](const Point2 &) { return Complex(1.0, 0.0); }};
    MediumSpec m;
    for (int tag = 0; tag < 8; ++tag) m.regions[tag] = p;
    m.description = "homogeneous lambda=" + std::to_string(moduli.lambda) + " mu=" + std::to_string(moduli.mu)
                  + (t.is_zero() ? " T=0" : " T=airy");
    return m;
}

NtDMatrix reference_ntd(const TractionBasis &basis, const FeSpace &space, const IsotropicModuli &moduli,
                        const ResidualStressField &t, double kappa) {
    return ntd_matrix(homogeneous_medium(moduli, t), basis, space, kappa);
}

double sobolev_operator_norm(const Eigen::MatrixXcd &a, const std::vector<int> &modes) {
    if (a.rows() != a.cols() || a.rows() != static_cast<Eigen::Index>(modes.size()))
        throw std::invalid_argument("matrix and mode list sizes differ");
    if (a.size() == 0) return 0.0;
    const Eigen::VectorXcd w = mode_weights(modes, 0.25).cast<Complex>();
    return plain_operator_norm(w.asDiagonal() * a * w.asDiagonal());
}

double sobolev_operator_norm(const NtDMatrix &a) { return sobolev_operator_norm(a.entries, a.modes); }

double plain_operator_norm(const Eigen::MatrixXcd &a) {
    if (a.size() == 0) return 0.0;
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(a);
    return svd.singularValues()[0];
}

TargetSpec TargetSpec::seeded(std::uint64_t seed) {
    TargetSpec t;
    if (seed == 0) return t;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    t.lambda_scale *= 1.0 + u(rng);
    t.mu_scale *= 1.0 + u(rng);
    t.density *= 1.0 + u(rng);
    return t;
}

void CloakConfig::validate() const {
    if (!(h > 0.0 && h <= 0.5)) throw ConfigError("h must lie in (0, 0.5]");
    if (!(alpha > 0.0)) throw ConfigError("alpha must be positive");
    if (!(beta > 0.0)) throw ConfigError("beta must be positive: a lossless shell may resonate");
    if (!(gamma > 0.0)) throw ConfigError("gamma must be positive");
    if (!(delta > 0.0)) throw ConfigError("delta must be positive");
    if (!(kappa >= 0.0)) throw ConfigError("kappa must be non-negative");
    if (!moduli.strongly_convex(2)) throw ConfigError("background moduli are not strongly convex");
    if (!target_moduli(*this).strongly_convex(2)) throw ConfigError("target moduli are not strongly convex");
    if (!(target.density > 0.0)) throw ConfigError("target density must be positive");
}

std::vector<double> cloak_radii(double h, CloakSpace space) {
    if (space == CloakSpace::Virtual) return {0.5 * h, h};
    return {0.5, 1.0};
}

MediumSpec build_cloaked_medium(const CloakConfig &config, CloakSpace space) {
    config.validate();
    const double h = config.h;
    const double shell_scale = config.gamma * std::pow(h, 2.0 + config.delta);
    const Complex shell_rho(config.alpha, config.beta);
    const IsotropicModuli base = config.moduli;
    const IsotropicModuli tgt = target_moduli(config);
    const ResidualStressField t = config.t;
    const double rho_a = config.target.density;
    const RadialMap map = RadialMap::regularized(h);

    MediumSpec m;
    std::ostringstream desc;
    desc << (space == CloakSpace::Virtual ? "virtual" : "physical") << " cloak h=" << h << " alpha=" << config.alpha
         << " beta=" << config.beta << " gamma=" << config.gamma << " delta=" << config.delta
         << " target=(" << tgt.lambda << "," << tgt.mu << "," << rho_a << ")";
    m.description = desc.str();

    if (space == CloakSpace::Virtual) {
        m.regions[region::kOuter] = {[base, t](const Point2 &x) { return background_tensor(base, t, x); },
                                     [](const Point2 &) { return Complex(1.0, 0.0); }};
        m.regions[region::kShell] = {[base, t, shell_scale](const Point2 &x) { return shell_scale * background_tensor(base, t, x); },
                                     [shell_rho](const Point2 &) { return shell_rho; }};
        // Target pulled back by y -> h y.
        const JacobianSample pull(SmallMatrix::Identity(2, 2) * h);
        m.regions[region::kCore] = {[tgt, t, pull](const Point2 &x) { return push_forward_tensor(background_tensor(tgt, t, x), pull); },
                                    [rho_a, pull](const Point2 &) { return push_forward_density(rho_a, pull); }};
        return m;
    }

    m.regions[region::kOuter] = {
        [base, t, map](const Point2 &y) {
            const SmallVector x = map.inverse(y, RadialMap::Branch::Outer);
            return push_forward_tensor(background_tensor(base, t, x), map.jacobian(x, RadialMap::Branch::Outer));
        },
        [map](const Point2 &y) {
            const SmallVector x = map.inverse(y, RadialMap::Branch::Outer);
            return push_forward_density(1.0, map.jacobian(x, RadialMap::Branch::Outer));
        }};
    const JacobianSample blow(SmallMatrix::Identity(2, 2) / h);
    m.regions[region::kShell] = {
        [base, t, shell_scale, blow, h](const Point2 &y) {
            return push_forward_tensor(shell_scale * background_tensor(base, t, h * y), blow);
        },
        [shell_rho, blow](const Point2 &) { return push_forward_density(shell_rho, blow); }};
    m.regions[region::kCore] = {[tgt, t, h](const Point2 &y) { return background_tensor(tgt, t, h * y); },
                                [rho_a](const Point2 &) { return Complex(rho_a, 0.0); }};
    return m;
}

FeSpace cloak_space(double h, CloakSpace space, const MeshOptions &opts) {
    TriMesh mesh = concentric_disc_mesh(cloak_radii(h, space), 2.0, opts.h_mesh, opts.grade_inner);
    FeSpace fe(std::move(mesh), opts.order);
    if (fe.n_dofs() > opts.max_dofs)
        throw MeshError("mesh budget exceeded: " + std::to_string(fe.n_dofs()) + " dofs > " + std::to_string(opts.max_dofs));
    return fe;
}

InvarianceResult invariance_check(const CloakConfig &config, const FeSpace &physical, const FeSpace &virtual_space,
                                  const TractionBasis &basis) {
    const NtDMatrix lp = ntd_matrix(build_cloaked_medium(config, CloakSpace::Physical), basis, physical, config.kappa);
    const NtDMatrix lv = ntd_matrix(build_cloaked_medium(config, CloakSpace::Virtual), basis, virtual_space, config.kappa);
    InvarianceResult r;
    r.norm_virtual = sobolev_operator_norm(lv);
    r.relative_difference = sobolev_operator_norm(lp.entries - lv.entries, lv.modes) / r.norm_virtual;
    r.relative_difference_plain = plain_operator_norm(lp.entries - lv.entries) / plain_operator_norm(lv.entries);
    return r;
}

std::optional<double> loglog_slope(const std::vector<double> &x, const std::vector<double> &y) {
    if (x.size() != y.size()) throw std::invalid_argument("slope fit needs equal-length inputs");
    if (x.size() < 2) return std::nullopt;
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    const double n = static_cast<double>(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double lx = std::log(x[k]), ly = std::log(y[k]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double den = n * sxx - sx * sx;
    if (den == 0.0) return std::nullopt;
    return (n * sxy - sx * sy) / den;
}

StudyResult convergence_study(const CloakConfig &base, const std::vector<double> &h_list, const TractionBasis &basis,
                              const MeshOptions &opts, int workers) {
    for (std::size_t k = 1; k < h_list.size(); ++k)
        if (!(h_list[k] < h_list[k - 1])) throw ConfigError("h_list must be strictly decreasing");
    base.validate();

    StudyResult out;
    out.rows.resize(h_list.size());
    std::vector<std::exception_ptr> errors(h_list.size());
    std::atomic<std::size_t> next{0};

    auto run = [&]() {
        for (std::size_t k = next++; k < h_list.size(); k = next++) {
            try {
                const auto start = std::chrono::steady_clock::now();
                CloakConfig cfg = base;
                cfg.h = h_list[k];
                const FeSpace space = cloak_space(cfg.h, CloakSpace::Virtual, opts);
                NtDMatrix l0;
                try {
                    l0 = reference_ntd(basis, space, cfg.moduli, cfg.t, cfg.kappa);
                } catch (const ResonanceSuspected &) {
                    cfg.kappa *= 1.03;
                    l0 = reference_ntd(basis, space, cfg.moduli, cfg.t, cfg.kappa);
                }
                const NtDMatrix lh = ntd_matrix(build_cloaked_medium(cfg, CloakSpace::Virtual), basis, space, cfg.kappa);
                StudyRow &row = out.rows[k];
                row.h = cfg.h;
                row.n_max = basis.n_max();
                row.h_mesh = opts.h_mesh;
                row.kappa = cfg.kappa;
                row.norm_diff = sobolev_operator_norm(lh.entries - l0.entries, l0.modes);
                row.norm_diff_plain = plain_operator_norm(lh.entries - l0.entries);
                row.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            } catch (...) {
                errors[k] = std::current_exception();
            }
        }
    };
    const int n_threads = std::max(1, std::min<int>(workers, static_cast<int>(h_list.size())));
    std::vector<std::thread> pool;
    for (int w = 1; w < n_threads; ++w) pool.emplace_back(run);
    run();
    for (auto &th : pool) th.join();
    for (const auto &e : errors)
        if (e) std::rethrow_exception(e);

    std::vector<double> hs, es;
    for (StudyRow &row : out.rows) {
        hs.push_back(row.h);
        es.push_back(row.norm_diff);
        row.slope_running = loglog_slope(hs, es).value_or(std::numeric_limits<double>::quiet_NaN());
    }
    out.slope = loglog_slope(hs, es);
    out.strictly_decreasing = true;
    for (std::size_t k = 1; k < es.size(); ++k)
        if (!(es[k] < es[k - 1])) out.strictly_decreasing = false;
    return out;
}

void write_study_csv(std::ostream &out, const StudyResult &study) {
    out << "h,n_max,h_mesh,norm_diff,slope_running,wall_time_s,norm_diff_plain,kappa\n";
    out.precision(12);
    for (const StudyRow &r : study.rows) {
        out << r.h << ',' << r.n_max << ',' << r.h_mesh << ',' << r.norm_diff << ',';
        if (std::isnan(r.slope_running)) {
            out << "nan";
        } else {
            out << r.slope_running;
        }
        out << ',' << r.wall_time_s << ',' << r.norm_diff_plain << ',' << r.kappa << '\n';
    }
}

namespace {

struct ScanMatrices {
    SparseMatrixC s, m_core, m_shell;
    Eigen::VectorXd d;
};

ScanMatrices scan_matrices(const IsotropicModuli &moduli, const ResidualStressField &t, const ScanOptions &opts) {
    if (!(opts.r0 > 0.0 && opts.r0 < opts.r1)) throw ConfigError("resonance scan needs 0 < r0 < r1");
    const FeSpace space(concentric_disc_mesh({opts.r0}, opts.r1, opts.mesh.h_mesh, opts.mesh.grade_inner), opts.mesh.order);
    ScanMatrices m;
    m.s = stiffness_matrix(space, homogeneous_medium(moduli, t));
    m.m_core = mass_matrix(space, 1);
    m.m_shell = mass_matrix(space, 0);
    const SparseMatrixC total = m.m_core + m.m_shell;
    m.d = total.diagonal().real();
    return m;
}

} // namespace

std::vector<ScanCell> resonance_scan(const std::vector<double> &rho0_grid, const std::vector<double> &rho1_grid,
                                     const IsotropicModuli &moduli, const ResidualStressField &t, bool with_lossy,
                                     const ScanOptions &opts) {
    const ScanMatrices mats = scan_matrices(moduli, t, opts);
    const double k2 = opts.kappa * opts.kappa;
    std::vector<ScanCell> cells;
    cells.reserve(rho0_grid.size() * rho1_grid.size());
    for (double r0 : rho0_grid)
        for (double r1 : rho1_grid) {
            const Complex rho1(r1, with_lossy ? opts.beta : 0.0);
            const SparseMatrixC k = mats.s - Complex(k2 * r0) * mats.m_core - (k2 * rho1) * mats.m_shell;
            const SparseLu lu(k);
            cells.push_back({r0, r1, smallest_singular_value(lu, mats.d), with_lossy});
        }
    return cells;
}

double first_neumann_eigenvalue(const IsotropicModuli &moduli, const ResidualStressField &t, const ScanOptions &opts) {
    const FeSpace space(concentric_disc_mesh({opts.r0}, opts.r1, opts.mesh.h_mesh, opts.mesh.grade_inner), opts.mesh.order);
    const Eigen::SparseMatrix<double> s = stiffness_matrix(space, homogeneous_medium(moduli, t)).real();
    const Eigen::SparseMatrix<double> m = mass_matrix(space).real();
    const Eigen::Index n = s.rows();

    // Rigid motions span the kernel; project them out M-orthogonally.
    Eigen::MatrixXd rigid(n, 3);
    for (int node = 0; node < space.n_nodes(); ++node) {
        const Point2 &x = space.node(node);
        rigid.row(FeSpace::dof(node, 0)) << 1.0, 0.0, -x.y();
        rigid.row(FeSpace::dof(node, 1)) << 0.0, 1.0, x.x();
    }
    const Eigen::MatrixXd mr = m * rigid;
    const Eigen::LLT<Eigen::MatrixXd> rr(rigid.transpose() * mr);
    auto project = [&](Eigen::MatrixXd &x) { x -= rigid * rr.solve(mr.transpose() * x); };

    // Block inverse iteration on (S + M)^{-1} M with Rayleigh-Ritz.
    const SparseLu lu((s + m).cast<Complex>());
    constexpr int kBlock = 6;
    Eigen::MatrixXd x(n, kBlock);
    for (Eigen::Index r = 0; r < n; ++r)
        for (int c = 0; c < kBlock; ++c) x(r, c) = std::sin(0.37 * static_cast<double>(r + 1) * (c + 1) + 0.1 * c);
    project(x);
    double omega = std::numeric_limits<double>::quiet_NaN();
    for (int it = 0; it < 200; ++it) {
        Eigen::MatrixXd y = lu.solve(Eigen::MatrixXcd((m * x).cast<Complex>())).real();
        project(y);
        const Eigen::MatrixXd a = y.transpose() * (s * y), b = y.transpose() * (m * y);
        Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ritz(0.5 * (a + a.transpose()), 0.5 * (b + b.transpose()));
        x = y * ritz.eigenvectors();
        project(x);
        const double next = ritz.eigenvalues()[0];
        if (std::abs(next - omega) <= 1e-13 * next) {
            omega = next;
            break;
        }
        omega = next;
    }
    return omega;
}

std::vector<double> anchored_density_grid(double rho_star, int n) {
    if (n < 2) throw ConfigError("density grid needs at least 2 points");
    std::vector<double> g(static_cast<std::size_t>(n));
    const int half = n / 2;
    for (int k = 0; k < n; ++k) g[static_cast<std::size_t>(k)] = k + 1 == half ? rho_star : rho_star * (k + 1) / half;
    return g;
}

void write_scan_csv(std::ostream &out, const std::vector<ScanCell> &cells) {
    out << "rho0,rho1,indicator,with_lossy\n";
    out.precision(12);
    for (const ScanCell &c : cells)
        out << c.rho0 << ',' << c.rho1 << ',' << c.indicator << ',' << (c.with_lossy ? 1 : 0) << '\n';
}

EnergyReport energy_inequality_check(const CloakConfig &config, const std::vector<int> &phi_list,
                                     const TractionBasis &basis, const FeSpace &virtual_space) {
    config.validate();
    const DiscreteSystem sys = assemble(virtual_space, build_cloaked_medium(config, CloakSpace::Virtual), config.kappa);
    const DiscreteSystem ref = assemble(virtual_space, homogeneous_medium(config.moduli, config.t), config.kappa);
    const SparseLu lu(sys.K), lu0(ref.K);
    if (lu.singular()) throw ResonanceSuspected("cloaked system hit a zero pivot", 0.0);
    if (lu0.singular()) throw ResonanceSuspected("reference system hit a zero pivot", 0.0);

    const Eigen::MatrixXcd f = basis_loads(basis, virtual_space);
    const Eigen::VectorXd ginv = gram_matrix(basis, virtual_space).diagonal().cwiseInverse();
    const Eigen::VectorXd w_plus = mode_weights(basis.modes(), 0.25);

    EnergyReport rep;
    for (int j : phi_list) {
        if (j < 0 || j >= basis.size()) throw std::out_of_range("phi index outside the basis");
        const Eigen::VectorXcd u = lu.solve(Eigen::VectorXcd(f.col(j)));
        const Eigen::VectorXcd u0 = lu0.solve(Eigen::VectorXcd(f.col(j)));
        EnergyRow row;
        row.basis_index = j;
        row.mode = basis.mode(j);
        const double shell = l2_norm(virtual_space, u, region::kShell);
        row.lhs = config.beta * config.kappa * config.kappa * shell * shell;
        row.phi_norm = std::pow(1.0 + row.mode * row.mode, -0.25);
        const Eigen::VectorXcd coeff = ginv.cast<Complex>().asDiagonal() * (f.transpose() * (u - u0));
        row.diff_norm = w_plus.cast<Complex>().cwiseProduct(coeff).norm();
        const double rhs = row.phi_norm * row.diff_norm;
        row.ratio = rhs > 0.0 ? row.lhs / rhs : 0.0;
        rep.max_ratio = std::max(rep.max_ratio, row.ratio);
        rep.rows.push_back(row);
    }
    return rep;
}

} // namespace nearcloak
