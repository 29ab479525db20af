////////////////////////////////////////////////////////////////////////////////
// mesh.hpp
////////////////////////////////////////////////////////////////////////////////
/*! @file
//  Structured triangulations of a disc split by concentric interface circles.
//
//  Every interface circle and the outer boundary is an exact ring of mesh
//  vertices, so no triangle crosses an interface.  Neighbouring rings are
//  stitched by a zipper sweep in angle; the core disc closes with a fan
//  around the centre vertex.
//
//  Region tags count bands from the outside in: 0 is the annulus touching the
//  outer boundary, the core disc gets tag radii.size().  Boundary markers:
//  0 for the outer circle, m for the m-th interface counted from outside.
*/
////////////////////////////////////////////////////////////////////////////////
#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace nearcloak {

using Point2 = Eigen::Vector2d;

namespace region {
constexpr int kOuter = 0;
constexpr int kShell = 1;
constexpr int kCore = 2;
} // namespace region

namespace marker {
constexpr int kOuterBoundary = 0;
constexpr int kInterface1 = 1;
constexpr int kInterface2 = 2;
} // namespace marker

/// Edge on the outer circle or on an interface, oriented counter-clockwise.
struct BoundaryEdge {
    int a = 0, b = 0;
    int marker = 0;
};

struct TriMesh {
    std::vector<Point2> vertices;
    std::vector<std::array<int, 3>> triangles; ///< counter-clockwise
    std::vector<int> region_tag;               ///< one per triangle
    std::vector<BoundaryEdge> boundary_edges;
    std::vector<double> radii; ///< interface radii, increasing
    double outer_radius = 0.0;
    double h_mesh = 0.0;

    int n_vertices() const { return static_cast<int>(vertices.size()); }
    int n_triangles() const { return static_cast<int>(triangles.size()); }
    int n_regions() const { return static_cast<int>(radii.size()) + 1; }

    double signed_area(int t) const;
    double total_area() const;
    double region_area(int tag) const;
    /// Number of boundary edges carrying `m`.
    int count_marker(int m) const;
};

/// `grade_inner` scales the vertex spacing on the innermost interface to
/// h_mesh * grade_inner; spacing then grows with slope 0.3 away from it, capped
/// at h_mesh.  Default: min(1, r_inner / 0.5).  An empty `radii` gives a plain
/// disc.  Throws MeshError for unsorted radii, bad sizes, or an innermost
/// circle carrying fewer than 16 segments.
TriMesh concentric_disc_mesh(const std::vector<double> &radii, double outer_radius, double h_mesh,
                             std::optional<double> grade_inner = std::nullopt);

struct MeshReport {
    bool positive_areas = false;
    bool conforming = false;           ///< interior edges shared by exactly 2 triangles
    bool interfaces_resolved = false;  ///< every triangle inside one radial band
    int n_edges = 0;
    int euler_characteristic = 0;      ///< V - E + F, 1 for a disc
};

MeshReport validate_mesh(const TriMesh &mesh);

/// Plain-text export: "VERTICES n / TRIANGLES m", then n lines "x y", then
/// m lines "a b c tag" (0-based vertex indices).
void write_mesh(const TriMesh &mesh, std::ostream &out);

} // namespace nearcloak
