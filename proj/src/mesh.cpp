#include "nearcloak/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <string>
#include <utility>

#include "nearcloak/errors.hpp"

namespace nearcloak {

namespace {

constexpr double kGrowth = 0.3;
constexpr int kMinInnerSegments = 16;

struct SizeField {
    double h_max, s_inner, r_inner;

    double operator()(double r) const { return std::min(h_max, s_inner + kGrowth * std::abs(r - r_inner)); }
};

/// Radii of the rings strictly inside (a, b], equidistributed in the metric dr / s(r).
std::vector<double> ring_radii(double a, double b, const SizeField &size) {
    constexpr int kFine = 4000;
    std::vector<double> cum(kFine + 1, 0.0);
    const double dr = (b - a) / kFine;
    for (int k = 0; k < kFine; ++k) {
        const double r0 = a + k * dr, r1 = r0 + dr;
        cum[k + 1] = cum[k] + 0.5 * dr * (1.0 / size(r0) + 1.0 / size(r1));
    }
    const int layers = std::max(1, static_cast<int>(std::lround(cum.back())));
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(layers));
    int k = 0;
    for (int m = 1; m < layers; ++m) {
        const double target = cum.back() * m / layers;
        while (cum[k + 1] < target) ++k;
        const double frac = (target - cum[k]) / (cum[k + 1] - cum[k]);
        out.push_back(a + (k + frac) * dr);
    }
    out.push_back(b);
    return out;
}

int ring_count(double r, const SizeField &size) {
    const int n = static_cast<int>(std::ceil(2.0 * M_PI * r / size(r) - 1e-9));
    return std::max(8, 4 * ((n + 3) / 4));
}

} // namespace

double TriMesh::signed_area(int t) const {
    const auto &tri = triangles[static_cast<std::size_t>(t)];
    const Point2 e1 = vertices[tri[1]] - vertices[tri[0]];
    const Point2 e2 = vertices[tri[2]] - vertices[tri[0]];
    return 0.5 * (e1.x() * e2.y() - e1.y() * e2.x());
}

double TriMesh::total_area() const {
    double a = 0.0;
    for (int t = 0; t < n_triangles(); ++t) a += signed_area(t);
    return a;
}

double TriMesh::region_area(int tag) const {
    double a = 0.0;
    for (int t = 0; t < n_triangles(); ++t)
        if (region_tag[static_cast<std::size_t>(t)] == tag) a += signed_area(t);
    return a;
}

int TriMesh::count_marker(int m) const {
    return static_cast<int>(std::count_if(boundary_edges.begin(), boundary_edges.end(),
                                          [m](const BoundaryEdge &e) { return e.marker == m; }));
}

TriMesh concentric_disc_mesh(const std::vector<double> &radii, double outer_radius, double h_mesh,
                             std::optional<double> grade_inner) {
    if (!(h_mesh > 0.0)) throw MeshError("h_mesh must be positive");
    if (!(outer_radius > 0.0)) throw MeshError("outer radius must be positive");
    for (std::size_t k = 0; k < radii.size(); ++k) {
        if (!(radii[k] > 0.0)) throw MeshError("interface radii must be positive");
        if (k > 0 && !(radii[k] > radii[k - 1])) throw MeshError("interface radii must be strictly increasing");
    }
    if (!radii.empty() && !(radii.back() < outer_radius)) throw MeshError("interface radii must be below the outer radius");

    const double r_in = radii.empty() ? outer_radius : radii.front();
    const double grade = grade_inner.value_or(std::min(1.0, r_in / 0.5));
    if (!(grade > 0.0 && grade <= 1.0)) throw MeshError("grade_inner must lie in (0, 1]");
    const SizeField size{h_mesh, h_mesh * grade, r_in};
    if (static_cast<int>(std::floor(2.0 * M_PI * r_in / size(r_in) + 1e-9)) < kMinInnerSegments)
        throw MeshError("h_mesh too coarse: innermost circle of radius " + std::to_string(r_in)
                        + " would carry fewer than 16 segments");

    // Ring list from the centre out; interfaces and the outer circle are rings.
    std::vector<double> rings;
    std::vector<int> ring_marker; // -1 for plain rings
    std::vector<double> stops = radii;
    stops.push_back(outer_radius);
    double a = 0.0;
    for (std::size_t k = 0; k < stops.size(); ++k) {
        const auto part = ring_radii(a, stops[k], size);
        for (std::size_t m = 0; m < part.size(); ++m) {
            rings.push_back(part[m]);
            ring_marker.push_back(m + 1 == part.size() ? static_cast<int>(stops.size() - 1 - k) : -1);
        }
        a = stops[k];
    }

    TriMesh mesh;
    mesh.radii = radii;
    mesh.outer_radius = outer_radius;
    mesh.h_mesh = h_mesh;
    mesh.vertices.emplace_back(0.0, 0.0);

    std::vector<int> first(rings.size()), count(rings.size());
    for (std::size_t k = 0; k < rings.size(); ++k) {
        first[k] = mesh.n_vertices();
        count[k] = ring_count(rings[k], size);
        for (int i = 0; i < count[k]; ++i) {
            const double th = 2.0 * M_PI * i / count[k];
            mesh.vertices.emplace_back(rings[k] * std::cos(th), rings[k] * std::sin(th));
        }
    }

    // Band of the annulus whose outer ring is rings[k]: interfaces at or beyond it.
    auto band = [&](double r_outer) {
        int n = 0;
        for (double r : radii)
            if (r >= r_outer * (1.0 - 1e-12)) ++n;
        return n;
    };

    auto add = [&](int p, int q, int r, int tag) {
        mesh.triangles.push_back({p, q, r});
        mesh.region_tag.push_back(tag);
    };

    const int core_tag = band(rings.front());
    for (int i = 0; i < count[0]; ++i) add(0, first[0] + i, first[0] + (i + 1) % count[0], core_tag);

    for (std::size_t k = 0; k + 1 < rings.size(); ++k) {
        const int na = count[k], nb = count[k + 1];
        const int tag = band(rings[k + 1]);
        auto A = [&](int i) { return first[k] + i % na; };
        auto B = [&](int j) { return first[k + 1] + j % nb; };
        int i = 0, j = 0;
        while (i < na || j < nb) {
            const bool advance_a = j == nb || (i < na && static_cast<double>(i + 1) / na <= static_cast<double>(j + 1) / nb);
            if (advance_a) {
                add(A(i), B(j), A(i + 1), tag);
                ++i;
            } else {
                add(A(i), B(j), B(j + 1), tag);
                ++j;
            }
        }
    }

    for (std::size_t k = 0; k < rings.size(); ++k) {
        if (ring_marker[k] < 0) continue;
        for (int i = 0; i < count[k]; ++i)
            mesh.boundary_edges.push_back({first[k] + i, first[k] + (i + 1) % count[k], ring_marker[k]});
    }
    return mesh;
}

MeshReport validate_mesh(const TriMesh &mesh) {
    MeshReport rep;
    rep.positive_areas = true;
    for (int t = 0; t < mesh.n_triangles(); ++t)
        if (!(mesh.signed_area(t) > 0.0)) rep.positive_areas = false;

    std::map<std::pair<int, int>, int> use;
    for (const auto &tri : mesh.triangles)
        for (int e = 0; e < 3; ++e) {
            const int p = tri[e], q = tri[(e + 1) % 3];
            ++use[{std::min(p, q), std::max(p, q)}];
        }
    rep.n_edges = static_cast<int>(use.size());
    rep.euler_characteristic = mesh.n_vertices() - rep.n_edges + mesh.n_triangles();

    int on_boundary = 0;
    rep.conforming = true;
    for (const auto &[edge, n] : use) {
        if (n == 1) ++on_boundary;
        if (n > 2) rep.conforming = false;
    }
    // Edges used once must be exactly the outer-boundary edges.
    if (on_boundary != mesh.count_marker(marker::kOuterBoundary)) rep.conforming = false;

    std::vector<double> bands = mesh.radii;
    bands.insert(bands.begin(), 0.0);
    bands.push_back(mesh.outer_radius);
    rep.interfaces_resolved = true;
    for (int t = 0; t < mesh.n_triangles(); ++t) {
        const int tag = mesh.region_tag[static_cast<std::size_t>(t)];
        const int band_index = static_cast<int>(mesh.radii.size()) - tag; // 0 is the core
        const double lo = bands[static_cast<std::size_t>(band_index)];
        const double hi = bands[static_cast<std::size_t>(band_index) + 1];
        for (int v : mesh.triangles[static_cast<std::size_t>(t)]) {
            const double r = mesh.vertices[v].norm();
            if (r < lo * (1.0 - 1e-12) || r > hi * (1.0 + 1e-12)) rep.interfaces_resolved = false;
        }
    }
    return rep;
}

void write_mesh(const TriMesh &mesh, std::ostream &out) {
    out << "VERTICES " << mesh.n_vertices() << " / TRIANGLES " << mesh.n_triangles() << '\n';
    out.precision(17);
    for (const Point2 &v : mesh.vertices) out << v.x() << ' ' << v.y() << '\n';
    for (int t = 0; t < mesh.n_triangles(); ++t) {
        const auto &tri = mesh.triangles[static_cast<std::size_t>(t)];
        out << tri[0] << ' ' << tri[1] << ' ' << tri[2] << ' ' << mesh.region_tag[static_cast<std::size_t>(t)] << '\n';
    }
}

} // namespace nearcloak
