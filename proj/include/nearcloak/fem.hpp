////////////////////////////////////////////////////////////////////////////////
// fem.hpp
////////////////////////////////////////////////////////////////////////////////
/*! @file
//  Complex 2D finite elements for  d_j (C_ijkl d_l u_k) + kappa^2 rho u_i = 0
//  with traction data on the outer circle.
//
//  The bilinear form pairs the FULL displacement gradient d_l u_k with d_j v_i
//  through C_ijkl.  Residual-stress tensors are not minor-symmetric, so a
//  strain-based (symmetrized) element would silently drop the t_jl d_ik part.
//  The form is bilinear (no conjugation), so K = S - kappa^2 M is complex
//  symmetric whenever C is major-symmetric.
//
//  Elements are straight-sided P1 or P2 triangles; curved interfaces are
//  represented by their polygonal mesh approximation.
*/
////////////////////////////////////////////////////////////////////////////////
#pragma once

#include <array>
#include <complex>
#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "nearcloak/mesh.hpp"
#include "nearcloak/sparse_lu.hpp"
#include "nearcloak/tensor.hpp"

namespace nearcloak {

using Complex = std::complex<double>;
using Vector2c = Eigen::Vector2cd;

enum class ElementOrder { Linear = 1, Quadratic = 2 };

/// Nodes and dof numbering for a mesh.  P2 adds one node per mesh edge,
/// numbered after the vertices.  Dof of (node, component) is 2 node + component.
class FeSpace {
public:
    struct EdgeNodes {
        int a = 0, b = 0;
        int mid = -1; ///< -1 for P1
        int marker = 0;
    };

    FeSpace(TriMesh mesh, ElementOrder order = ElementOrder::Quadratic);

    const TriMesh &mesh() const { return m_mesh; }
    ElementOrder order() const { return m_order; }
    int nodes_per_element() const { return m_order == ElementOrder::Quadratic ? 6 : 3; }
    int n_nodes() const { return static_cast<int>(m_nodes.size()); }
    int n_dofs() const { return 2 * n_nodes(); }
    static int dof(int node, int comp) { return 2 * node + comp; }

    const Point2 &node(int i) const { return m_nodes[static_cast<std::size_t>(i)]; }
    /// Local order: 3 vertices, then midpoints of edges (0,1), (1,2), (2,0).
    const std::array<int, 6> &element_nodes(int t) const { return m_elements[static_cast<std::size_t>(t)]; }
    const std::vector<EdgeNodes> &boundary_edges() const { return m_boundary; }

    /// Nodes lying on edges with `marker`, sorted by angle in (-pi, pi].
    /// Throws MeshError if the marker does not occur.
    std::vector<int> marker_nodes(int marker) const;

private:
    TriMesh m_mesh;
    ElementOrder m_order;
    std::vector<Point2> m_nodes;
    std::vector<std::array<int, 6>> m_elements;
    std::vector<EdgeNodes> m_boundary;
};

using TensorFn = std::function<ElasticTensor4(const Point2 &)>;
using DensityFn = std::function<Complex(const Point2 &)>;

/// Material of one region.
struct Phase {
    TensorFn tensor;
    DensityFn density;
};

Phase constant_phase(const ElasticTensor4 &c, Complex rho);

struct MediumSpec {
    std::map<int, Phase> regions; ///< keyed by region tag
    std::string description;
    /// Convexity spot checks per region during assembly (0 disables).
    int convexity_samples = 8;

    /// Throws ConfigError when the tag has no phase.
    const Phase &phase(int tag) const;
};

struct DiscreteSystem {
    SparseMatrixC K;
    Eigen::VectorXcd f;
    double kappa = 0.0;
    /// Spot-checked quadrature points with convexity_constant <= 0.
    int nonconvex_samples = 0;
};

/// Throws AdmissibilityError if a tensor is not major-symmetric at a quadrature point.
DiscreteSystem assemble(const FeSpace &space, const MediumSpec &medium, double kappa);

/// Stiffness part only (kappa = 0).
SparseMatrixC stiffness_matrix(const FeSpace &space, const MediumSpec &medium);
/// Unit-density mass matrix over one region (tag < 0: whole mesh).
SparseMatrixC mass_matrix(const FeSpace &space, int region_tag = -1);

/// Traction as a function of the boundary point and the outward polygon-edge normal.
using TractionFn = std::function<Vector2c(const Point2 &x, const Point2 &normal)>;

/// Load vector of  integral over marker edges of phi . v  (edge Gauss rule, 5 points).
Eigen::VectorXcd traction_load(const FeSpace &space, const TractionFn &phi, int marker = marker::kOuterBoundary);
DiscreteSystem &apply_traction(DiscreteSystem &system, const FeSpace &space, const TractionFn &phi,
                               int marker = marker::kOuterBoundary);
/// Nodal form: `values[node]` is interpolated along each marker edge.
DiscreteSystem &apply_traction_nodal(DiscreteSystem &system, const FeSpace &space,
                                     const std::vector<Vector2c> &values, int marker = marker::kOuterBoundary);

using BodyForceFn = std::function<Vector2c(const Point2 &)>;
DiscreteSystem &add_body_force(DiscreteSystem &system, const FeSpace &space, const BodyForceFn &g);

struct Solution {
    Eigen::VectorXcd u;
    double kappa = 0.0;
    double rcond = 0.0;        ///< factorization pivot ratio
    double amplification = 0.0; ///< |K|_1 |u|_1 / |f|_1, 0 when f = 0
    double residual = 0.0;     ///< |Ku - f| / |f|

    Vector2c at(int node) const { return {u[FeSpace::dof(node, 0)], u[FeSpace::dof(node, 1)]}; }
};

/// Systems whose pivot ratio or inverse amplification drops below this are
/// reported as resonant.
constexpr double kResonanceThreshold = 1e-11;

/// Direct solve.  Throws ResonanceSuspected on a singular or nearly singular factorization.
Solution solve(const DiscreteSystem &system);
/// Resonance indicator of a factorization with right-hand side f and solution u.
double resonance_indicator(const SparseLu &lu, const SparseMatrixC &k, const Eigen::VectorXcd &f,
                           const Eigen::VectorXcd &u);

struct TracePoint {
    int node = 0;
    double theta = 0.0;
    Vector2c u;
};

std::vector<TracePoint> trace(const Solution &sol, const FeSpace &space, int marker = marker::kOuterBoundary);

/// Finite-element field value at a point of element t.
Vector2c evaluate(const FeSpace &space, const Eigen::VectorXcd &u, int t, const Point2 &x);

using ExactFn = std::function<Vector2c(const Point2 &)>;
double l2_error(const FeSpace &space, const Eigen::VectorXcd &u, const ExactFn &exact);
/// L2 norm over one region (tag < 0: whole mesh).
double l2_norm(const FeSpace &space, const Eigen::VectorXcd &u, int region_tag = -1);

/// CSV with columns x,y,re_u1,im_u1,re_u2,im_u2, one row per node.
void write_solution_csv(std::ostream &out, const FeSpace &space, const Solution &sol);

} // namespace nearcloak
