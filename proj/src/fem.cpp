#include "nearcloak/fem.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <utility>

#include "nearcloak/errors.hpp"

namespace nearcloak {

namespace {

// Degree-4 rule on the reference triangle, weights summing to 1.
struct TriRule {
    std::array<double, 6> xi, eta, w;
};

const TriRule &tri_rule() {
    static const TriRule rule = [] {
        const double a = 0.445948490915965, wa = 0.223381589678011;
        const double b = 0.091576213509771, wb = 0.109951743655322;
        return TriRule{{a, 1.0 - 2.0 * a, a, b, 1.0 - 2.0 * b, b},
                       {a, a, 1.0 - 2.0 * a, b, b, 1.0 - 2.0 * b},
                       {wa, wa, wa, wb, wb, wb}};
    }();
    return rule;
}

// 5-point Gauss-Legendre on [0, 1].
constexpr std::array<double, 5> kEdgeT = {0.5 - 0.5 * 0.9061798459386640, 0.5 - 0.5 * 0.5384693101056831, 0.5,
                                          0.5 + 0.5 * 0.5384693101056831, 0.5 + 0.5 * 0.9061798459386640};
constexpr std::array<double, 5> kEdgeW = {0.5 * 0.2369268850561891, 0.5 * 0.4786286704993665,
                                          0.5 * 0.5688888888888889, 0.5 * 0.4786286704993665,
                                          0.5 * 0.2369268850561891};

struct ShapeValues {
    std::array<double, 6> n{};
    std::array<Eigen::Vector2d, 6> dref; // d/dxi, d/deta
};

ShapeValues shape(ElementOrder order, double xi, double eta) {
    ShapeValues s;
    const double l0 = 1.0 - xi - eta, l1 = xi, l2 = eta;
    const Eigen::Vector2d d0(-1.0, -1.0), d1(1.0, 0.0), d2(0.0, 1.0);
    if (order == ElementOrder::Linear) {
        s.n = {l0, l1, l2, 0.0, 0.0, 0.0};
        s.dref = {d0, d1, d2, Eigen::Vector2d::Zero(), Eigen::Vector2d::Zero(), Eigen::Vector2d::Zero()};
        return s;
    }
    s.n = {l0 * (2.0 * l0 - 1.0), l1 * (2.0 * l1 - 1.0), l2 * (2.0 * l2 - 1.0), 4.0 * l0 * l1, 4.0 * l1 * l2, 4.0 * l2 * l0};
    s.dref = {(4.0 * l0 - 1.0) * d0,
              (4.0 * l1 - 1.0) * d1,
              (4.0 * l2 - 1.0) * d2,
              4.0 * (l1 * d0 + l0 * d1),
              4.0 * (l2 * d1 + l1 * d2),
              4.0 * (l0 * d2 + l2 * d0)};
    return s;
}

const std::vector<ShapeValues> &rule_shapes(ElementOrder order) {
    static const auto make = [](ElementOrder o) {
        std::vector<ShapeValues> v;
        const TriRule &r = tri_rule();
        for (int q = 0; q < 6; ++q) v.push_back(shape(o, r.xi[q], r.eta[q]));
        return v;
    };
    static const std::vector<ShapeValues> p1 = make(ElementOrder::Linear);
    static const std::vector<ShapeValues> p2 = make(ElementOrder::Quadratic);
    return order == ElementOrder::Linear ? p1 : p2;
}

struct Geometry {
    Point2 origin;
    Eigen::Matrix2d jac;     // columns p1 - p0, p2 - p0
    Eigen::Matrix2d inv_t;   // jac^{-T}
    double area = 0.0;

    Point2 map(double xi, double eta) const { return origin + jac * Eigen::Vector2d(xi, eta); }
};

Geometry geometry(const TriMesh &mesh, int t) {
    const auto &tri = mesh.triangles[static_cast<std::size_t>(t)];
    Geometry g;
    g.origin = mesh.vertices[tri[0]];
    g.jac.col(0) = mesh.vertices[tri[1]] - g.origin;
    g.jac.col(1) = mesh.vertices[tri[2]] - g.origin;
    const double det = g.jac.determinant();
    if (!(det > 0.0)) throw MeshError("triangle " + std::to_string(t) + " has non-positive area");
    g.inv_t = g.jac.inverse().transpose();
    g.area = 0.5 * det;
    return g;
}

std::array<double, 3> edge_shape(ElementOrder order, double t) {
    if (order == ElementOrder::Linear) return {1.0 - t, t, 0.0};
    return {(1.0 - t) * (1.0 - 2.0 * t), t * (2.0 * t - 1.0), 4.0 * t * (1.0 - t)};
}

double angle_of(const Point2 &x) {
    const double th = std::atan2(x.y(), x.x());
    return th <= -M_PI ? th + 2.0 * M_PI : th;
}

struct AssemblyParts {
    bool stiffness = true;
    bool mass = true;
    int mass_region = -1;
};

DiscreteSystem assemble_parts(const FeSpace &space, const MediumSpec *medium, double kappa, AssemblyParts parts) {
    const TriMesh &mesh = space.mesh();
    const int ne = space.nodes_per_element();
    const int nd = 2 * ne;
    const TriRule &rule = tri_rule();
    const auto &shapes = rule_shapes(space.order());
    const double k2 = kappa * kappa;

    // Evenly spaced elements per region get a convexity spot check.
    std::map<int, int> region_count, region_seen;
    for (int tag : mesh.region_tag) ++region_count[tag];

    DiscreteSystem sys;
    sys.kappa = kappa;
    std::vector<Eigen::Triplet<Complex>> trip;
    trip.reserve(static_cast<std::size_t>(mesh.n_triangles()) * static_cast<std::size_t>(nd * nd));

    Eigen::Matrix<Complex, 12, 12> ke;
    for (int t = 0; t < mesh.n_triangles(); ++t) {
        const int tag = mesh.region_tag[static_cast<std::size_t>(t)];
        if (!parts.stiffness && parts.mass_region >= 0 && tag != parts.mass_region) continue;
        const Phase *phase = medium ? &medium->phase(tag) : nullptr;
        const Geometry g = geometry(mesh, t);
        ke.setZero();

        bool spot = false;
        if (phase && parts.stiffness && medium->convexity_samples > 0) {
            const int n = region_count[tag];
            const int stride = std::max(1, n / medium->convexity_samples);
            spot = region_seen[tag] % stride == 0;
            ++region_seen[tag];
        }

        for (int q = 0; q < 6; ++q) {
            const ShapeValues &s = shapes[static_cast<std::size_t>(q)];
            const Point2 x = g.map(rule.xi[q], rule.eta[q]);
            const double w = rule.w[q] * g.area;
            std::array<Eigen::Vector2d, 6> grad;
            for (int a = 0; a < ne; ++a) grad[a] = g.inv_t * s.dref[a];

            if (parts.stiffness) {
                const ElasticTensor4 c = phase->tensor(x);
                if (c.dim() != 2) throw AdmissibilityError("medium tensor must be two-dimensional");
                if (!check_symmetries(c).major)
                    throw AdmissibilityError("medium tensor is not major-symmetric in region " + std::to_string(tag));
                if (spot && q == 0 && convexity_constant(c) <= 0.0) ++sys.nonconvex_samples;
                for (int a = 0; a < ne; ++a)
                    for (int i = 0; i < 2; ++i) {
                        const int r = 2 * a + i;
                        for (int b = 0; b < ne; ++b)
                            for (int k = 0; k < 2; ++k) {
                                const int col = 2 * b + k;
                                if (col < r) continue;
                                double v = 0.0;
                                for (int j = 0; j < 2; ++j)
                                    for (int l = 0; l < 2; ++l) v += c(i, j, k, l) * grad[a][j] * grad[b][l];
                                ke(r, col) += w * v;
                            }
                    }
            }
            if (parts.mass && (parts.mass_region < 0 || parts.mass_region == tag)) {
                const Complex rho = (phase && parts.stiffness) ? phase->density(x) : Complex(1.0, 0.0);
                const Complex scale = parts.stiffness ? -k2 * rho : Complex(1.0, 0.0);
                for (int a = 0; a < ne; ++a)
                    for (int b = a; b < ne; ++b) {
                        const Complex m = w * scale * s.n[a] * s.n[b];
                        ke(2 * a, 2 * b) += m;
                        ke(2 * a + 1, 2 * b + 1) += m;
                    }
            }
        }
        // Mirror the upper triangle so the global matrix is exactly symmetric.
        const auto &en = space.element_nodes(t);
        for (int r = 0; r < nd; ++r)
            for (int col = r; col < nd; ++col) {
                const Complex v = ke(r, col);
                if (v == Complex()) continue;
                const int gr = FeSpace::dof(en[r / 2], r % 2), gc = FeSpace::dof(en[col / 2], col % 2);
                trip.emplace_back(gr, gc, v);
                if (col != r) trip.emplace_back(gc, gr, v);
            }
    }
    sys.K.resize(space.n_dofs(), space.n_dofs());
    sys.K.setFromTriplets(trip.begin(), trip.end());
    sys.K.makeCompressed();
    sys.f = Eigen::VectorXcd::Zero(space.n_dofs());
    return sys;
}

} // namespace

FeSpace::FeSpace(TriMesh mesh, ElementOrder order) : m_mesh(std::move(mesh)), m_order(order) {
    m_nodes = m_mesh.vertices;
    m_elements.resize(m_mesh.triangles.size());
    std::map<std::pair<int, int>, int> edge_node;
    for (std::size_t t = 0; t < m_mesh.triangles.size(); ++t) {
        const auto &tri = m_mesh.triangles[t];
        auto &en = m_elements[t];
        en = {tri[0], tri[1], tri[2], -1, -1, -1};
        if (order == ElementOrder::Linear) continue;
        for (int e = 0; e < 3; ++e) {
            const int p = tri[e], q = tri[(e + 1) % 3];
            const auto key = std::make_pair(std::min(p, q), std::max(p, q));
            auto it = edge_node.find(key);
            if (it == edge_node.end()) {
                it = edge_node.emplace(key, static_cast<int>(m_nodes.size())).first;
                m_nodes.push_back(0.5 * (m_mesh.vertices[p] + m_mesh.vertices[q]));
            }
            en[3 + e] = it->second;
        }
    }
    for (const BoundaryEdge &be : m_mesh.boundary_edges) {
        EdgeNodes e{be.a, be.b, -1, be.marker};
        if (order == ElementOrder::Quadratic) {
            const auto it = edge_node.find({std::min(be.a, be.b), std::max(be.a, be.b)});
            if (it == edge_node.end()) throw MeshError("boundary edge is not an edge of any triangle");
            e.mid = it->second;
        }
        m_boundary.push_back(e);
    }
}

std::vector<int> FeSpace::marker_nodes(int marker) const {
    std::vector<int> nodes;
    for (const EdgeNodes &e : m_boundary) {
        if (e.marker != marker) continue;
        nodes.push_back(e.a);
        nodes.push_back(e.b);
        if (e.mid >= 0) nodes.push_back(e.mid);
    }
    if (nodes.empty()) throw MeshError("boundary marker " + std::to_string(marker) + " not found");
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
    std::sort(nodes.begin(), nodes.end(), [this](int p, int q) { return angle_of(node(p)) < angle_of(node(q)); });
    return nodes;
}

Phase constant_phase(const ElasticTensor4 &c, Complex rho) {
    return {[c](const Point2 &) { return c; }, [rho](const Point2 &) { return rho; }};
}

const Phase &MediumSpec::phase(int tag) const {
    const auto it = regions.find(tag);
    if (it == regions.end()) throw ConfigError("medium has no phase for region " + std::to_string(tag));
    return it->second;
}

DiscreteSystem assemble(const FeSpace &space, const MediumSpec &medium, double kappa) {
    if (!(kappa >= 0.0)) throw DomainError("kappa must be non-negative");
    return assemble_parts(space, &medium, kappa, {true, true, -1});
}

SparseMatrixC stiffness_matrix(const FeSpace &space, const MediumSpec &medium) {
    return assemble_parts(space, &medium, 0.0, {true, false, -1}).K;
}

SparseMatrixC mass_matrix(const FeSpace &space, int region_tag) {
    return assemble_parts(space, nullptr, 0.0, {false, true, region_tag}).K;
}

Eigen::VectorXcd traction_load(const FeSpace &space, const TractionFn &phi, int marker) {
    Eigen::VectorXcd f = Eigen::VectorXcd::Zero(space.n_dofs());
    bool found = false;
    for (const auto &e : space.boundary_edges()) {
        if (e.marker != marker) continue;
        found = true;
        const Point2 &pa = space.node(e.a), &pb = space.node(e.b);
        const Point2 d = pb - pa;
        const double len = d.norm();
        const Point2 normal(d.y() / len, -d.x() / len);
        const std::array<int, 3> nodes = {e.a, e.b, e.mid};
        for (std::size_t q = 0; q < kEdgeT.size(); ++q) {
            const Point2 x = pa + kEdgeT[q] * d;
            const Vector2c val = phi(x, normal);
            const auto n = edge_shape(space.order(), kEdgeT[q]);
            for (int a = 0; a < 3; ++a) {
                if (nodes[a] < 0) continue;
                const double w = kEdgeW[q] * len * n[a];
                f[FeSpace::dof(nodes[a], 0)] += w * val[0];
                f[FeSpace::dof(nodes[a], 1)] += w * val[1];
            }
        }
    }
    if (!found) throw MeshError("boundary marker " + std::to_string(marker) + " not found");
    return f;
}

DiscreteSystem &apply_traction(DiscreteSystem &system, const FeSpace &space, const TractionFn &phi, int marker) {
    system.f += traction_load(space, phi, marker);
    return system;
}

DiscreteSystem &apply_traction_nodal(DiscreteSystem &system, const FeSpace &space, const std::vector<Vector2c> &values,
                                     int marker) {
    if (static_cast<int>(values.size()) != space.n_nodes()) throw std::invalid_argument("one traction value per node expected");
    bool found = false;
    for (const auto &e : space.boundary_edges()) {
        if (e.marker != marker) continue;
        found = true;
        const double len = (space.node(e.b) - space.node(e.a)).norm();
        const std::array<int, 3> nodes = {e.a, e.b, e.mid};
        for (std::size_t q = 0; q < kEdgeT.size(); ++q) {
            const auto n = edge_shape(space.order(), kEdgeT[q]);
            Vector2c val = Vector2c::Zero();
            for (int a = 0; a < 3; ++a)
                if (nodes[a] >= 0) val += n[a] * values[static_cast<std::size_t>(nodes[a])];
            for (int a = 0; a < 3; ++a) {
                if (nodes[a] < 0) continue;
                const double w = kEdgeW[q] * len * n[a];
                system.f[FeSpace::dof(nodes[a], 0)] += w * val[0];
                system.f[FeSpace::dof(nodes[a], 1)] += w * val[1];
            }
        }
    }
    if (!found) throw MeshError("boundary marker " + std::to_string(marker) + " not found");
    return system;
}

DiscreteSystem &add_body_force(DiscreteSystem &system, const FeSpace &space, const BodyForceFn &g) {
    const TriRule &rule = tri_rule();
    const auto &shapes = rule_shapes(space.order());
    for (int t = 0; t < space.mesh().n_triangles(); ++t) {
        const Geometry geo = geometry(space.mesh(), t);
        const auto &en = space.element_nodes(t);
        for (int q = 0; q < 6; ++q) {
            const Vector2c val = g(geo.map(rule.xi[q], rule.eta[q]));
            const double w = rule.w[q] * geo.area;
            for (int a = 0; a < space.nodes_per_element(); ++a) {
                const double wn = w * shapes[static_cast<std::size_t>(q)].n[a];
                system.f[FeSpace::dof(en[a], 0)] += wn * val[0];
                system.f[FeSpace::dof(en[a], 1)] += wn * val[1];
            }
        }
    }
    return system;
}

double resonance_indicator(const SparseLu &lu, const SparseMatrixC &k, const Eigen::VectorXcd &f,
                           const Eigen::VectorXcd &u) {
    if (lu.singular() || !u.allFinite()) return 0.0;
    double indicator = std::isnan(lu.rcond()) ? 1.0 : lu.rcond();
    const double fn = f.lpNorm<1>();
    if (fn > 0.0) {
        double knorm = 0.0;
        for (int c = 0; c < k.outerSize(); ++c) {
            double s = 0.0;
            for (SparseMatrixC::InnerIterator it(k, c); it; ++it) s += std::abs(it.value());
            knorm = std::max(knorm, s);
        }
        const double amp = knorm * u.lpNorm<1>() / fn;
        if (amp > 0.0) indicator = std::min(indicator, 1.0 / amp);
    }
    return indicator;
}

Solution solve(const DiscreteSystem &system) {
    Solution sol;
    sol.kappa = system.kappa;
    SparseLu lu(system.K);
    sol.rcond = lu.rcond();
    if (lu.singular()) throw ResonanceSuspected("factorization hit a zero pivot", 0.0);
    sol.u = lu.solve(system.f);
    const double fn = system.f.norm();
    if (fn == 0.0) {
        sol.u.setZero();
        return sol;
    }
    const double indicator = resonance_indicator(lu, system.K, system.f, sol.u);
    if (indicator < kResonanceThreshold)
        throw ResonanceSuspected("system is numerically singular (indicator " + std::to_string(indicator) + ")", indicator);
    sol.amplification = 1.0 / indicator;
    sol.residual = (system.K * sol.u - system.f).norm() / fn;
    return sol;
}

std::vector<TracePoint> trace(const Solution &sol, const FeSpace &space, int marker) {
    std::vector<TracePoint> out;
    for (int n : space.marker_nodes(marker)) out.push_back({n, angle_of(space.node(n)), sol.at(n)});
    return out;
}

Vector2c evaluate(const FeSpace &space, const Eigen::VectorXcd &u, int t, const Point2 &x) {
    const Geometry g = geometry(space.mesh(), t);
    const Eigen::Vector2d ref = g.jac.inverse() * (x - g.origin);
    const ShapeValues s = shape(space.order(), ref[0], ref[1]);
    const auto &en = space.element_nodes(t);
    Vector2c v = Vector2c::Zero();
    for (int a = 0; a < space.nodes_per_element(); ++a)
        v += s.n[a] * Vector2c(u[FeSpace::dof(en[a], 0)], u[FeSpace::dof(en[a], 1)]);
    return v;
}

namespace {

template <class F>
double integrate_sq(const FeSpace &space, const Eigen::VectorXcd &u, int region_tag, F &&exact) {
    const TriRule &rule = tri_rule();
    const auto &shapes = rule_shapes(space.order());
    double sum = 0.0;
    for (int t = 0; t < space.mesh().n_triangles(); ++t) {
        if (region_tag >= 0 && space.mesh().region_tag[static_cast<std::size_t>(t)] != region_tag) continue;
        const Geometry g = geometry(space.mesh(), t);
        const auto &en = space.element_nodes(t);
        for (int q = 0; q < 6; ++q) {
            Vector2c v = Vector2c::Zero();
            for (int a = 0; a < space.nodes_per_element(); ++a)
                v += shapes[static_cast<std::size_t>(q)].n[a] * Vector2c(u[FeSpace::dof(en[a], 0)], u[FeSpace::dof(en[a], 1)]);
            v -= exact(g.map(rule.xi[q], rule.eta[q]));
            sum += rule.w[q] * g.area * v.squaredNorm();
        }
    }
    return std::sqrt(sum);
}

} // namespace

double l2_error(const FeSpace &space, const Eigen::VectorXcd &u, const ExactFn &exact) {
    return integrate_sq(space, u, -1, exact);
}

double l2_norm(const FeSpace &space, const Eigen::VectorXcd &u, int region_tag) {
    return integrate_sq(space, u, region_tag, [](const Point2 &) { return Vector2c::Zero().eval(); });
}

void write_solution_csv(std::ostream &out, const FeSpace &space, const Solution &sol) {
    out << "x,y,re_u1,im_u1,re_u2,im_u2\n";
    out.precision(15);
    for (int n = 0; n < space.n_nodes(); ++n) {
        const Vector2c v = sol.at(n);
        out << space.node(n).x() << ',' << space.node(n).y() << ',' << v[0].real() << ',' << v[0].imag() << ','
            << v[1].real() << ',' << v[1].imag() << '\n';
    }
}

} // namespace nearcloak
