#include "doctest.h"

#include <set>
#include <sstream>

#include "nearcloak/errors.hpp"
#include "nearcloak/mesh.hpp"

using namespace nearcloak;

TEST_CASE("unsorted or out-of-range radii are rejected") {
    CHECK_THROWS_AS(concentric_disc_mesh({1.0, 0.5}, 2.0, 0.1), MeshError);
    CHECK_THROWS_AS(concentric_disc_mesh({0.5, 2.5}, 2.0, 0.1), MeshError);
    CHECK_THROWS_AS(concentric_disc_mesh({0.5}, 2.0, -0.1), MeshError);
    CHECK_THROWS_AS(concentric_disc_mesh({0.5}, 2.0, 0.1, 1.5), MeshError);
}

TEST_CASE("too coarse a mesh for the innermost circle is rejected") {
    // 2 pi 0.05 / 0.1 is about 3 segments.
    CHECK_THROWS_AS(concentric_disc_mesh({0.05, 1.0}, 2.0, 0.1, 1.0), MeshError);
}

TEST_CASE("three-layer mesh structure") {
    const TriMesh m = concentric_disc_mesh({0.5, 1.0}, 2.0, 0.1);
    std::set<int> tags(m.region_tag.begin(), m.region_tag.end());
    CHECK(tags == std::set<int>{region::kOuter, region::kShell, region::kCore});
    CHECK(m.count_marker(marker::kOuterBoundary) > 0);
    CHECK(m.count_marker(marker::kInterface1) > 0);
    CHECK(m.count_marker(marker::kInterface2) > 0);
    CHECK(m.count_marker(3) == 0);

    const MeshReport r = validate_mesh(m);
    CHECK(r.positive_areas);
    CHECK(r.conforming);
    CHECK(r.interfaces_resolved);
    CHECK(r.euler_characteristic == 1);
    // Independent Euler count: E from a set of sorted vertex pairs.
    std::set<std::pair<int, int>> edges;
    for (const auto &t : m.triangles)
        for (int k = 0; k < 3; ++k) edges.insert(std::minmax(t[k], t[(k + 1) % 3]));
    CHECK(static_cast<int>(edges.size()) == r.n_edges);
    CHECK(m.n_vertices() - static_cast<int>(edges.size()) + m.n_triangles() == 1);
}

TEST_CASE("interface and boundary vertices lie on their circles") {
    const TriMesh m = concentric_disc_mesh({0.5, 1.0}, 2.0, 0.1);
    const double r_of[] = {2.0, 1.0, 0.5};
    for (const BoundaryEdge &e : m.boundary_edges) {
        CHECK(m.vertices[e.a].norm() == doctest::Approx(r_of[e.marker]).epsilon(1e-14));
        CHECK(m.vertices[e.b].norm() == doctest::Approx(r_of[e.marker]).epsilon(1e-14));
        // counter-clockwise orientation
        CHECK(m.vertices[e.a].x() * m.vertices[e.b].y() - m.vertices[e.a].y() * m.vertices[e.b].x() > 0.0);
    }
}

TEST_CASE("no triangle straddles an interface") {
    const TriMesh m = concentric_disc_mesh({0.2, 0.4}, 2.0, 0.1);
    const double lo[] = {0.4, 0.2, 0.0}, hi[] = {2.0, 0.4, 0.2};
    for (int t = 0; t < m.n_triangles(); ++t) {
        const int tag = m.region_tag[t];
        const Point2 c = (m.vertices[m.triangles[t][0]] + m.vertices[m.triangles[t][1]] + m.vertices[m.triangles[t][2]]) / 3.0;
        CHECK(c.norm() > lo[tag] - 1e-12);
        CHECK(c.norm() < hi[tag] + 1e-12);
        for (int k = 0; k < 3; ++k) {
            const double r = m.vertices[m.triangles[t][k]].norm();
            CHECK(r >= lo[tag] * (1.0 - 1e-12));
            CHECK(r <= hi[tag] * (1.0 + 1e-12));
        }
    }
}

TEST_CASE("area converges to the disc area at second order") {
    double prev_total = 0.0, prev_shell = 0.0;
    for (double hm : {0.16, 0.08, 0.04}) {
        const TriMesh m = concentric_disc_mesh({0.5, 1.0}, 2.0, hm);
        const double e_total = std::abs(m.total_area() - 4.0 * M_PI) / (4.0 * M_PI);
        const double e_shell = std::abs(m.region_area(region::kShell) - M_PI * 0.75) / (M_PI * 0.75);
        if (hm == 0.08) CHECK(e_total <= 5e-3);
        if (prev_total > 0.0) {
            CHECK(prev_total / e_total > 3.5);
            CHECK(prev_shell / e_shell > 3.0);
        }
        prev_total = e_total;
        prev_shell = e_shell;
        CHECK(m.total_area() == doctest::Approx(m.region_area(0) + m.region_area(1) + m.region_area(2)).epsilon(1e-13));
    }
}

TEST_CASE("grading refines the innermost circle") {
    const TriMesh coarse = concentric_disc_mesh({0.2, 0.4}, 2.0, 0.06, 1.0);
    const TriMesh graded = concentric_disc_mesh({0.2, 0.4}, 2.0, 0.06, 0.25);
    CHECK(graded.count_marker(marker::kInterface2) > 3 * coarse.count_marker(marker::kInterface2));
    CHECK(graded.count_marker(marker::kInterface2) >= 16);
    CHECK(validate_mesh(graded).positive_areas);
    CHECK(validate_mesh(graded).conforming);
}

TEST_CASE("plain disc") {
    const TriMesh m = concentric_disc_mesh({}, 2.0, 0.3);
    CHECK(m.n_regions() == 1);
    const MeshReport r = validate_mesh(m);
    CHECK(r.positive_areas);
    CHECK(r.conforming);
    CHECK(r.euler_characteristic == 1);
}

TEST_CASE("meshes are deterministic and export as text") {
    const TriMesh a = concentric_disc_mesh({0.5, 1.0}, 2.0, 0.15), b = concentric_disc_mesh({0.5, 1.0}, 2.0, 0.15);
    std::ostringstream sa, sb;
    write_mesh(a, sa);
    write_mesh(b, sb);
    CHECK(sa.str() == sb.str());
    std::istringstream in(sa.str());
    std::string w1, slash, w2;
    int nv = 0, nt = 0;
    in >> w1 >> nv >> slash >> w2 >> nt;
    CHECK(w1 == "VERTICES");
    CHECK(w2 == "TRIANGLES");
    CHECK(nv == a.n_vertices());
    std::string line;
    int lines = 0;
    std::getline(in, line);
    while (std::getline(in, line)) ++lines;
    CHECK(lines == nv + nt);
    CHECK(nt == a.n_triangles());
}
