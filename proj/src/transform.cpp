#include "nearcloak/transform.hpp"

#include <cmath>
#include <string>

#include "nearcloak/errors.hpp"

namespace nearcloak {

RadialMap RadialMap::singular() { return RadialMap(Kind::Singular, 0.0); }

RadialMap RadialMap::regularized(double h) {
    if (!(h > 0.0 && h < 1.0)) throw DomainError("regularization parameter h must lie in (0, 1), got " + std::to_string(h));
    return RadialMap(Kind::Regularized, h);
}

bool RadialMap::inner(double s, Branch branch) const {
    if (m_kind == Kind::Singular) return false;
    switch (branch) {
    case Branch::Outer: return false;
    case Branch::Inner: return true;
    default: return s < m_h;
    }
}

double RadialMap::radius(double s, Branch branch) const {
    if (m_kind == Kind::Singular) return 1.0 + 0.5 * s;
    if (inner(s, branch)) return s / m_h;
    return (2.0 - 2.0 * m_h) / (2.0 - m_h) + s / (2.0 - m_h);
}

double RadialMap::radius_derivative(double s, Branch branch) const {
    if (m_kind == Kind::Singular) return 0.5;
    if (inner(s, branch)) return 1.0 / m_h;
    return 1.0 / (2.0 - m_h);
}

SmallVector RadialMap::apply(const SmallVector &x, Branch branch) const {
    const double s = x.norm();
    if (s > outer_radius * (1.0 + 1e-12)) throw DomainError("point outside B_2");
    if (m_kind == Kind::Singular) {
        if (s == 0.0) throw DomainError("singular blow-up map is undefined at the origin");
    } else if (s == 0.0) {
        return x;
    }
    return (radius(s, branch) / s) * x;
}

SmallVector RadialMap::inverse(const SmallVector &y, Branch branch) const {
    const double rho = y.norm();
    if (rho > outer_radius * (1.0 + 1e-12)) throw DomainError("point outside B_2");
    double s;
    if (m_kind == Kind::Singular) {
        if (rho <= 1.0) throw DomainError("singular map image is 1 < |y| <= 2");
        s = 2.0 * (rho - 1.0);
    } else {
        const bool use_inner = branch == Branch::Inner || (branch == Branch::Auto && rho < 1.0);
        if (use_inner) return m_h * y;
        s = (rho - (2.0 - 2.0 * m_h) / (2.0 - m_h)) * (2.0 - m_h);
    }
    return (s / rho) * y;
}

JacobianSample RadialMap::jacobian(const SmallVector &x, Branch branch) const {
    const int dim = static_cast<int>(x.size());
    const double s = x.norm();
    if (s == 0.0) {
        if (m_kind == Kind::Singular) throw DomainError("singular blow-up map has no Jacobian at the origin");
        return JacobianSample(SmallMatrix::Identity(dim, dim) / m_h);
    }
    const SmallVector e = x / s;
    const SmallMatrix radial = e * e.transpose();
    const SmallMatrix tangential = SmallMatrix::Identity(dim, dim) - radial;
    return JacobianSample(radius_derivative(s, branch) * radial + (radius(s, branch) / s) * tangential);
}

SmallVector f0(const SmallVector &x) { return RadialMap::singular().apply(x); }

SmallVector fh(const SmallVector &x, double h) { return RadialMap::regularized(h).apply(x); }

SmallVector fh_inverse(const SmallVector &y, double h) { return RadialMap::regularized(h).inverse(y); }

ElasticTensor4 push_forward_tensor(const ElasticTensor4 &c, const JacobianSample &jac) {
    const int dim = c.dim();
    if (jac.m.rows() != dim || jac.m.cols() != dim) throw DomainError("Jacobian size does not match tensor dimension");
    if (!(jac.det > 0.0)) throw OrientationError("push-forward requires det M > 0");
    const SmallMatrix &m = jac.m;

    // Transform the derivative slots j -> q and l -> p one at a time.
    ElasticTensor4 half(dim), out(dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j)
            for (int k = 0; k < dim; ++k)
                for (int p = 0; p < dim; ++p) {
                    double s = 0.0;
                    for (int l = 0; l < dim; ++l) s += c(i, j, k, l) * m(p, l);
                    half(i, j, k, p) = s;
                }
    const double inv_det = 1.0 / jac.det;
    for (int i = 0; i < dim; ++i)
        for (int q = 0; q < dim; ++q)
            for (int k = 0; k < dim; ++k)
                for (int p = 0; p < dim; ++p) {
                    double s = 0.0;
                    for (int j = 0; j < dim; ++j) s += half(i, j, k, p) * m(q, j);
                    out(i, q, k, p) = s * inv_det;
                }
    return out;
}

Complex push_forward_density(Complex rho, const JacobianSample &jac) {
    if (!(jac.det > 0.0)) throw OrientationError("push-forward requires det M > 0");
    return rho / jac.det;
}

PolarCloakEntries polar_cloak_entries(double r, double lambda0, double mu0, const SmallMatrix &t_polar) {
    if (!(r > 1.0 && r < 2.0)) throw DomainError("polar cloak entries are defined for 1 < r < 2");
    if (t_polar.rows() != 2 || t_polar.cols() != 2) throw DomainError("polar residual stress must be 2x2");
    const double t11 = t_polar(0, 0), t22 = t_polar(1, 1), t12 = t_polar(0, 1);
    const double shrink = (r - 1.0) / r; // radial over tangential stretch
    const double grow = r / (r - 1.0);

    PolarCloakEntries e{};
    e.rrrr = (lambda0 + 2.0 * mu0 + t11) * shrink;
    e.tttt = (lambda0 + 2.0 * mu0 + t22) * grow;
    e.rtrt = (mu0 + t22) * grow;
    e.trtr = (mu0 + t11) * shrink;
    e.rrtt = e.ttrr = lambda0;
    e.rttr = e.trrt = mu0;
    e.rrrt = e.rtrr = t12;
    e.trtt = e.tttr = t12;
    return e;
}

SmallMatrix polar_frame(double theta) {
    SmallMatrix q(2, 2);
    q << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
    return q;
}

} // namespace nearcloak
