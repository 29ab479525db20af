#include "nearcloak/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <ostream>
#include <sstream>

#include "nearcloak/errors.hpp"

namespace nearcloak {

namespace {

std::string trim(const std::string &s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string &key, const std::string &v) {
    try {
        std::size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (trim(v.substr(pos)).empty()) return d;
    } catch (const std::exception &) {
    }
    throw ConfigError("key '" + key + "': expected a number, got '" + v + "'");
}

long long to_int(const std::string &key, const std::string &v) {
    try {
        std::size_t pos = 0;
        const long long i = std::stoll(v, &pos);
        if (trim(v.substr(pos)).empty()) return i;
    } catch (const std::exception &) {
    }
    throw ConfigError("key '" + key + "': expected an integer, got '" + v + "'");
}

std::vector<std::string> split(const std::string &s, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, sep)) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::string join(const std::vector<double> &v) {
    std::ostringstream s;
    s.precision(17);
    for (std::size_t k = 0; k < v.size(); ++k) s << (k ? "," : "") << v[k];
    return s.str();
}

} // namespace

std::vector<double> parse_double_list(const std::string &text) {
    std::vector<double> out;
    for (const std::string &item : split(text, ',')) out.push_back(to_double("list", item));
    return out;
}

void ExperimentConfig::set(const std::string &key, const std::string &raw) {
    const std::string v = trim(raw);
    if (key == "lambda0") moduli.lambda = to_double(key, v);
    else if (key == "mu0") moduli.mu = to_double(key, v);
    else if (key == "bumps") {
        bumps.clear();
        if (v == "none" || v.empty()) return;
        for (const std::string &b : split(v, ';')) {
            const auto p = parse_double_list(b);
            if (p.size() != 4) throw ConfigError("each bump needs cx,cy,radius,amplitude");
            bumps.push_back({Point2(p[0], p[1]), p[2], p[3]});
        }
    }
    else if (key == "alpha") alpha = to_double(key, v);
    else if (key == "beta") beta = to_double(key, v);
    else if (key == "gamma") gamma = to_double(key, v);
    else if (key == "delta") delta = to_double(key, v);
    else if (key == "h_list") h_list = parse_double_list(v);
    else if (key == "kappa") kappa = to_double(key, v);
    else if (key == "n_max") n_max = static_cast<int>(to_int(key, v));
    else if (key == "h_mesh") h_mesh = to_double(key, v);
    else if (key == "order") order = static_cast<int>(to_int(key, v));
    else if (key == "out_dir") out_dir = v;
    else if (key == "seed") {
        const long long s = to_int(key, v);
        if (s < 0) throw ConfigError("seed must be non-negative");
        seed = static_cast<std::uint64_t>(s);
    }
    else if (key == "workers") workers = static_cast<int>(to_int(key, v));
    else if (key == "max_dofs") max_dofs = static_cast<int>(to_int(key, v));
    else if (key == "invariance_h") invariance_h = to_double(key, v);
    else if (key == "invariance_h_mesh") invariance_h_mesh = parse_double_list(v);
    else if (key == "scan_r0") scan_r0 = to_double(key, v);
    else if (key == "scan_r1") scan_r1 = to_double(key, v);
    else if (key == "scan_n") scan_n = static_cast<int>(to_int(key, v));
    else if (key == "scan_beta") scan_beta = to_double(key, v);
    else if (key == "green_eta") green_eta = to_double(key, v);
    else if (key == "green_points") green_points = static_cast<int>(to_int(key, v));
    else throw ConfigError("unknown configuration key '" + key + "'");
}

void ExperimentConfig::validate() const {
    if (!moduli.strongly_convex(2)) throw ConfigError("lambda0, mu0 must satisfy mu0 > 0 and 2 lambda0 + 2 mu0 > 0");
    if (!(alpha > 0.0 && gamma > 0.0 && delta > 0.0)) throw ConfigError("alpha, gamma and delta must be positive");
    if (!(beta > 0.0)) throw ConfigError("beta must be positive: a lossless shell may resonate");
    if (h_list.empty()) throw ConfigError("h_list is empty");
    for (std::size_t k = 0; k < h_list.size(); ++k) {
        if (!(h_list[k] > 0.0 && h_list[k] <= 0.5)) throw ConfigError("every h must lie in (0, 0.5]");
        if (k > 0 && !(h_list[k] < h_list[k - 1])) throw ConfigError("h_list must be strictly decreasing");
    }
    if (!(kappa > 0.0)) throw ConfigError("kappa must be positive");
    if (n_max < 0) throw ConfigError("n_max must be non-negative");
    if (!(h_mesh > 0.0)) throw ConfigError("h_mesh must be positive");
    if (order != 1 && order != 2) throw ConfigError("order must be 1 or 2");
    if (workers < 1) throw ConfigError("workers must be at least 1");
    if (max_dofs < 1) throw ConfigError("max_dofs must be positive");
    if (!(invariance_h > 0.0 && invariance_h <= 0.5)) throw ConfigError("invariance_h must lie in (0, 0.5]");
    for (double hm : invariance_h_mesh)
        if (!(hm > 0.0)) throw ConfigError("invariance_h_mesh entries must be positive");
    if (!(scan_r0 > 0.0 && scan_r0 < scan_r1)) throw ConfigError("scan radii need 0 < scan_r0 < scan_r1");
    if (scan_n < 2) throw ConfigError("scan_n must be at least 2");
    if (!(scan_beta > 0.0)) throw ConfigError("scan_beta must be positive");
    if (!(green_eta > 0.0)) throw ConfigError("green_eta must be positive");
    if (green_points < 1) throw ConfigError("green_points must be positive");
    for (const AiryBump &b : bumps)
        if (!(b.radius > 0.0) || b.center.norm() + b.radius >= 2.0)
            throw ConfigError("every bump ball must lie strictly inside |x| < 2");
}

ResidualStressField ExperimentConfig::residual_field() const {
    AiryPotential phi;
    phi.bumps = bumps;
    for (AiryBump &b : phi.bumps) b.amplitude *= moduli.mu;
    try {
        return airy_to_stress(phi, 2.0);
    } catch (const AdmissibilityError &e) {
        throw ConfigError(e.what());
    }
}

CloakConfig ExperimentConfig::cloak_config() const {
    CloakConfig c;
    c.h = h_list.front();
    c.alpha = alpha;
    c.beta = beta;
    c.gamma = gamma;
    c.delta = delta;
    c.moduli = moduli;
    c.t = residual_field();
    c.target = TargetSpec::seeded(seed);
    c.kappa = kappa;
    return c;
}

MeshOptions ExperimentConfig::mesh_options() const {
    MeshOptions m;
    m.h_mesh = h_mesh;
    m.order = order == 1 ? ElementOrder::Linear : ElementOrder::Quadratic;
    m.max_dofs = max_dofs;
    return m;
}

void ExperimentConfig::write(std::ostream &out) const {
    out.precision(17);
    out << "lambda0 = " << moduli.lambda << '\n' << "mu0 = " << moduli.mu << '\n' << "bumps = ";
    if (bumps.empty()) out << "none";
    for (std::size_t k = 0; k < bumps.size(); ++k)
        out << (k ? "; " : "") << bumps[k].center.x() << ',' << bumps[k].center.y() << ',' << bumps[k].radius << ','
            << bumps[k].amplitude;
    out << '\n'
        << "alpha = " << alpha << '\n'
        << "beta = " << beta << '\n'
        << "gamma = " << gamma << '\n'
        << "delta = " << delta << '\n'
        << "h_list = " << join(h_list) << '\n'
        << "kappa = " << kappa << '\n'
        << "n_max = " << n_max << '\n'
        << "h_mesh = " << h_mesh << '\n'
        << "order = " << order << '\n'
        << "out_dir = " << out_dir << '\n'
        << "seed = " << seed << '\n'
        << "workers = " << workers << '\n'
        << "max_dofs = " << max_dofs << '\n'
        << "invariance_h = " << invariance_h << '\n'
        << "invariance_h_mesh = " << join(invariance_h_mesh) << '\n'
        << "scan_r0 = " << scan_r0 << '\n'
        << "scan_r1 = " << scan_r1 << '\n'
        << "scan_n = " << scan_n << '\n'
        << "scan_beta = " << scan_beta << '\n'
        << "green_eta = " << green_eta << '\n'
        << "green_points = " << green_points << '\n';
}

ExperimentConfig parse_config(std::istream &in, ExperimentConfig base) {
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        base.set(trim(line.substr(0, eq)), line.substr(eq + 1));
    }
    return base;
}

ExperimentConfig load_config(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    return parse_config(in);
}

} // namespace nearcloak
