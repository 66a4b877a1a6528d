#pragma once

// Rational (NURBS) scalar fields and vector-valued geometry maps with
// parametric and physical derivatives up to second order.

#include <array>
#include <cmath>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "igc/linalg.hpp"
#include "igc/spline_core.hpp"

namespace igc {

class singular_geometry_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Value, gradient and Hessian of a scalar quantity with respect to the
/// parametric coordinates.
struct ParametricDerivs {
    double value = 0.0;
    std::array<double, 3> grad{};
    std::array<std::array<double, 3>, 3> hess{};
};

/// Value and derivatives with respect to physical coordinates.
struct PhysicalDerivatives {
    double value = 0.0;
    std::array<double, 3> grad{};
    std::array<std::array<double, 3>, 3> hess{};
    double laplacian = 0.0;
};

namespace detail {

/// Per-direction basis data at one parametric point.
struct TensorBasis {
    int dim = 0;
    int order = 0;
    std::array<BasisSpan, 3> spans;
    std::array<int, 3> counts{};  // degree+1 per direction

    long local_size() const {
        long s = 1;
        for (int a = 0; a < dim; ++a) s *= counts[static_cast<std::size_t>(a)];
        return s;
    }
};

inline TensorBasis tensor_basis(const TensorKnotGrid& grid, const Point& eta, int order) {
    TensorBasis tb;
    tb.dim = grid.dim();
    tb.order = order;
    for (int a = 0; a < tb.dim; ++a) {
        tb.spans[static_cast<std::size_t>(a)] = eval_basis(grid.direction(a), eta[static_cast<std::size_t>(a)], order);
        tb.counts[static_cast<std::size_t>(a)] = grid.direction(a).degree() + 1;
    }
    return tb;
}

/// Flat index of the local multi-index `loc` in the global control lattice.
inline long global_index(const TensorKnotGrid& grid, const TensorBasis& tb, const std::array<int, 3>& loc) {
    std::array<int, 3> mi{0, 0, 0};
    for (int a = 0; a < tb.dim; ++a)
        mi[static_cast<std::size_t>(a)] = tb.spans[static_cast<std::size_t>(a)].first_index() + loc[static_cast<std::size_t>(a)];
    return grid.flat_index(mi);
}

/// Value/gradient/Hessian products of the local tensor basis function `loc`.
/// Writes 1 + dim + dim*(dim+1)/2 numbers: value, d/da, then upper-triangular
/// second partials in row order (aa, ab, ac, bb, bc, cc for dim 3).
inline void basis_products(const TensorBasis& tb, const std::array<int, 3>& loc, int order, double* out) {
    double v[3], d1[3], d2[3];
    for (int a = 0; a < tb.dim; ++a) {
        const auto& sp = tb.spans[static_cast<std::size_t>(a)];
        v[a] = sp.value(loc[static_cast<std::size_t>(a)]);
        d1[a] = order >= 1 ? sp.deriv(1, loc[static_cast<std::size_t>(a)]) : 0.0;
        d2[a] = order >= 2 ? sp.deriv(2, loc[static_cast<std::size_t>(a)]) : 0.0;
    }
    int k = 0;
    switch (tb.dim) {
        case 1:
            out[k++] = v[0];
            if (order >= 1) out[k++] = d1[0];
            if (order >= 2) out[k++] = d2[0];
            break;
        case 2:
            out[k++] = v[0] * v[1];
            if (order >= 1) {
                out[k++] = d1[0] * v[1];
                out[k++] = v[0] * d1[1];
            }
            if (order >= 2) {
                out[k++] = d2[0] * v[1];
                out[k++] = d1[0] * d1[1];
                out[k++] = v[0] * d2[1];
            }
            break;
        default:
            out[k++] = v[0] * v[1] * v[2];
            if (order >= 1) {
                out[k++] = d1[0] * v[1] * v[2];
                out[k++] = v[0] * d1[1] * v[2];
                out[k++] = v[0] * v[1] * d1[2];
            }
            if (order >= 2) {
                out[k++] = d2[0] * v[1] * v[2];
                out[k++] = d1[0] * d1[1] * v[2];
                out[k++] = d1[0] * v[1] * d1[2];
                out[k++] = v[0] * d2[1] * v[2];
                out[k++] = v[0] * d1[1] * d1[2];
                out[k++] = v[0] * v[1] * d2[2];
            }
            break;
    }
}

inline int n_products(int dim, int order) {
    int n = 1;
    if (order >= 1) n += dim;
    if (order >= 2) n += dim * (dim + 1) / 2;
    return n;
}

/// Accumulated value/partial sums of one coefficient array over the local span.
struct DerivSums {
    double value = 0.0;
    std::array<double, 3> grad{};
    std::array<double, 6> hess{};  // upper triangle, row order
};

inline void scatter_products(int dim, int order, const double* prod, double c, DerivSums& s) {
    int k = 0;
    s.value += c * prod[k++];
    if (order >= 1)
        for (int a = 0; a < dim; ++a) s.grad[static_cast<std::size_t>(a)] += c * prod[k++];
    if (order >= 2) {
        const int nh = dim * (dim + 1) / 2;
        for (int h = 0; h < nh; ++h) s.hess[static_cast<std::size_t>(h)] += c * prod[k++];
    }
}

/// Iterates the local multi-indices of a tensor basis.
template <typename Fn>
inline void for_each_local(const TensorBasis& tb, Fn&& fn) {
    std::array<int, 3> loc{0, 0, 0};
    if (tb.dim == 1) {
        for (loc[0] = 0; loc[0] < tb.counts[0]; ++loc[0]) fn(loc);
    } else if (tb.dim == 2) {
        for (loc[0] = 0; loc[0] < tb.counts[0]; ++loc[0])
            for (loc[1] = 0; loc[1] < tb.counts[1]; ++loc[1]) fn(loc);
    } else {
        for (loc[0] = 0; loc[0] < tb.counts[0]; ++loc[0])
            for (loc[1] = 0; loc[1] < tb.counts[1]; ++loc[1])
                for (loc[2] = 0; loc[2] < tb.counts[2]; ++loc[2]) fn(loc);
    }
}

inline int hess_flat(int dim, int a, int b) {
    if (a > b) std::swap(a, b);
    if (dim == 1) return 0;
    if (dim == 2) return a == 0 ? (b == 0 ? 0 : 1) : 2;
    static constexpr int idx3[3][3] = {{0, 1, 2}, {1, 3, 4}, {2, 4, 5}};
    return idx3[a][b];
}

/// Quotient rule for T = P/W given parametric sums of P and W.
inline ParametricDerivs rational_derivs(int dim, int order, const DerivSums& P, const DerivSums& W) {
    ParametricDerivs r;
    const double invW = 1.0 / W.value;
    r.value = P.value * invW;
    if (order >= 1) {
        for (int a = 0; a < dim; ++a)
            r.grad[static_cast<std::size_t>(a)] =
                (P.grad[static_cast<std::size_t>(a)] - r.value * W.grad[static_cast<std::size_t>(a)]) * invW;
    }
    if (order >= 2) {
        for (int a = 0; a < dim; ++a)
            for (int b = a; b < dim; ++b) {
                const int h = hess_flat(dim, a, b);
                const double t =
                    (P.hess[static_cast<std::size_t>(h)] -
                     r.grad[static_cast<std::size_t>(a)] * W.grad[static_cast<std::size_t>(b)] -
                     r.grad[static_cast<std::size_t>(b)] * W.grad[static_cast<std::size_t>(a)] -
                     r.value * W.hess[static_cast<std::size_t>(h)]) *
                    invW;
                r.hess[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] = t;
                r.hess[static_cast<std::size_t>(b)][static_cast<std::size_t>(a)] = t;
            }
    }
    return r;
}

}  // namespace detail

/// Scalar NURBS field T(eta) = sum_i p_i w_i B_i(eta) / W(eta) on a tensor
/// knot grid. Immutable after construction; concurrent evaluation is safe.
class NurbsField {
public:
    NurbsField(TensorKnotGrid grid, std::vector<double> weights, std::vector<double> coeffs)
        : grid_(std::move(grid)), weights_(std::move(weights)), coeffs_(std::move(coeffs)) {
        const auto n = static_cast<std::size_t>(grid_.basis_count());
        if (weights_.size() != n || coeffs_.size() != n)
            throw std::invalid_argument("NurbsField: weight/coefficient count must match basis count");
        for (double w : weights_)
            if (!(w > 0.0)) throw std::invalid_argument("NurbsField: weights must be positive");
        pw_.resize(n);
        for (std::size_t i = 0; i < n; ++i) pw_[i] = coeffs_[i] * weights_[i];
    }

    const TensorKnotGrid& grid() const { return grid_; }
    const std::vector<double>& weights() const { return weights_; }
    const std::vector<double>& coeffs() const { return coeffs_; }
    int dim() const { return grid_.dim(); }

    double eval(const Point& eta) const { return eval_derivs(eta, 0).value; }

    /// Parametric value/gradient/Hessian via the quotient rule.
    ParametricDerivs eval_derivs(const Point& eta, int order) const {
        check_order(order);
        const auto tb = detail::tensor_basis(grid_, eta, order);
        detail::DerivSums P, W;
        double prod[10];
        detail::for_each_local(tb, [&](const std::array<int, 3>& loc) {
            detail::basis_products(tb, loc, order, prod);
            const auto g = static_cast<std::size_t>(detail::global_index(grid_, tb, loc));
            detail::scatter_products(tb.dim, order, prod, pw_[g], P);
            detail::scatter_products(tb.dim, order, prod, weights_[g], W);
        });
        return detail::rational_derivs(tb.dim, order, P, W);
    }

private:
    void check_order(int order) const {
        if (order < 0 || order > 2)
            throw std::invalid_argument("NurbsField: derivative order must be 0, 1 or 2");
        for (int a = 0; a < grid_.dim(); ++a)
            if (order > grid_.direction(a).degree())
                throw std::invalid_argument("NurbsField: derivative order exceeds degree");
    }

    TensorKnotGrid grid_;
    std::vector<double> weights_;
    std::vector<double> coeffs_;
    std::vector<double> pw_;  // coeffs .* weights
};

/// NURBS geometry map F: parameter box -> physical domain; d components
/// sharing one grid and weight set.
class GeometryMap {
public:
    GeometryMap(TensorKnotGrid grid, std::vector<double> weights,
                std::vector<std::vector<double>> components)
        : grid_(std::move(grid)), weights_(std::move(weights)), comps_(std::move(components)) {
        const auto n = static_cast<std::size_t>(grid_.basis_count());
        if (static_cast<int>(comps_.size()) != grid_.dim())
            throw std::invalid_argument("GeometryMap: codomain dimension must equal grid dimension");
        if (weights_.size() != n)
            throw std::invalid_argument("GeometryMap: weight count must match basis count");
        for (double w : weights_)
            if (!(w > 0.0)) throw std::invalid_argument("GeometryMap: weights must be positive");
        for (const auto& c : comps_)
            if (c.size() != n)
                throw std::invalid_argument("GeometryMap: component size must match basis count");
        cw_.resize(comps_.size());
        for (std::size_t c = 0; c < comps_.size(); ++c) {
            cw_[c].resize(n);
            for (std::size_t i = 0; i < n; ++i) cw_[c][i] = comps_[c][i] * weights_[i];
        }
    }

    static GeometryMap identity_box(const TensorKnotGrid& grid) {
        const int d = grid.dim();
        std::vector<std::vector<double>> comps(static_cast<std::size_t>(d));
        std::array<std::vector<double>, 3> grev;
        for (int a = 0; a < d; ++a) grev[static_cast<std::size_t>(a)] = greville_abscissae(grid.direction(a));
        const auto counts = grid.basis_counts();
        for (int c = 0; c < d; ++c) comps[static_cast<std::size_t>(c)].resize(static_cast<std::size_t>(grid.basis_count()));
        std::array<int, 3> mi{0, 0, 0};
        for (mi[0] = 0; mi[0] < counts[0]; ++mi[0])
            for (mi[1] = 0; mi[1] < counts[1]; ++mi[1])
                for (mi[2] = 0; mi[2] < counts[2]; ++mi[2]) {
                    const auto f = static_cast<std::size_t>(grid.flat_index(mi));
                    for (int c = 0; c < d; ++c)
                        comps[static_cast<std::size_t>(c)][f] = grev[static_cast<std::size_t>(c)][static_cast<std::size_t>(mi[static_cast<std::size_t>(c)])];
                }
        return GeometryMap(grid, std::vector<double>(static_cast<std::size_t>(grid.basis_count()), 1.0), std::move(comps));
    }

    const TensorKnotGrid& grid() const { return grid_; }
    const std::vector<double>& weights() const { return weights_; }
    const std::vector<std::vector<double>>& components() const { return comps_; }
    int dim() const { return grid_.dim(); }

    NurbsField component(int c) const {
        return NurbsField(grid_, weights_, comps_.at(static_cast<std::size_t>(c)));
    }

    Point eval(const Point& eta) const {
        Point x{0, 0, 0};
        const auto gd = eval_derivs(eta, 0);
        for (int c = 0; c < dim(); ++c) x[static_cast<std::size_t>(c)] = gd.value[static_cast<std::size_t>(c)];
        return x;
    }

    struct Derivs {
        std::array<double, 3> value{};
        std::array<std::array<double, 3>, 3> jac{};   // jac[c][a] = dF_c / d eta_a
        std::array<std::array<std::array<double, 3>, 3>, 3> hess{};  // hess[c][a][b]
    };

    Derivs eval_derivs(const Point& eta, int order) const {
        const int d = dim();
        const auto tb = detail::tensor_basis(grid_, eta, order);
        detail::DerivSums W;
        std::array<detail::DerivSums, 3> C;
        double prod[10];
        detail::for_each_local(tb, [&](const std::array<int, 3>& loc) {
            detail::basis_products(tb, loc, order, prod);
            const auto g = static_cast<std::size_t>(detail::global_index(grid_, tb, loc));
            detail::scatter_products(d, order, prod, weights_[g], W);
            for (int c = 0; c < d; ++c)
                detail::scatter_products(d, order, prod, cw_[static_cast<std::size_t>(c)][g], C[static_cast<std::size_t>(c)]);
        });
        Derivs out;
        for (int c = 0; c < d; ++c) {
            const auto pd = detail::rational_derivs(d, order, C[static_cast<std::size_t>(c)], W);
            out.value[static_cast<std::size_t>(c)] = pd.value;
            for (int a = 0; a < d; ++a) out.jac[static_cast<std::size_t>(c)][static_cast<std::size_t>(a)] = pd.grad[static_cast<std::size_t>(a)];
            if (order >= 2) out.hess[static_cast<std::size_t>(c)] = pd.hess;
        }
        return out;
    }

private:
    TensorKnotGrid grid_;
    std::vector<double> weights_;
    std::vector<std::vector<double>> comps_;
    std::vector<std::vector<double>> cw_;  // comps .* weights
};

namespace detail {

/// Shared implementation of knot-insertion refinement: inserts k uniform
/// simple knots per nonempty interval in every direction, transforming the
/// homogeneous coefficient arrays.
inline void refine_lattice(std::vector<KnotVector>& kvs, std::array<int, 3>& counts,
                           std::vector<std::vector<double>>& homog, int k) {
    if (k < 0) throw std::invalid_argument("refine: negative refinement count");
    if (k == 0) return;
    const int dim = static_cast<int>(kvs.size());
    for (int a = 0; a < dim; ++a) {
        const auto bp = kvs[static_cast<std::size_t>(a)].breakpoints();
        for (std::size_t i = 0; i + 1 < bp.size(); ++i) {
            for (int j = 1; j <= k; ++j) {
                const double u = bp[i] + (bp[i + 1] - bp[i]) * static_cast<double>(j) / (k + 1);
                insert_knot_lattice(kvs[static_cast<std::size_t>(a)], dim, a, counts, u, homog);
            }
        }
    }
}

}  // namespace detail

/// Knot-insertion refinement carrying coefficients and weights through, so
/// the refined field evaluates identically.
inline NurbsField refine_uniform(const NurbsField& f, int k) {
    auto kvs = f.grid().directions();
    auto counts = f.grid().basis_counts();
    const auto n = static_cast<std::size_t>(f.grid().basis_count());
    std::vector<std::vector<double>> homog(2);
    homog[0].resize(n);
    for (std::size_t i = 0; i < n; ++i) homog[0][i] = f.coeffs()[i] * f.weights()[i];
    homog[1] = f.weights();
    detail::refine_lattice(kvs, counts, homog, k);
    std::vector<double> coeffs(homog[0].size());
    for (std::size_t i = 0; i < coeffs.size(); ++i) coeffs[i] = homog[0][i] / homog[1][i];
    return NurbsField(TensorKnotGrid(std::move(kvs)), std::move(homog[1]), std::move(coeffs));
}

inline GeometryMap refine_uniform(const GeometryMap& g, int k) {
    auto kvs = g.grid().directions();
    auto counts = g.grid().basis_counts();
    const auto n = static_cast<std::size_t>(g.grid().basis_count());
    const int d = g.dim();
    std::vector<std::vector<double>> homog(static_cast<std::size_t>(d) + 1);
    for (int c = 0; c < d; ++c) {
        homog[static_cast<std::size_t>(c)].resize(n);
        for (std::size_t i = 0; i < n; ++i)
            homog[static_cast<std::size_t>(c)][i] = g.components()[static_cast<std::size_t>(c)][i] * g.weights()[i];
    }
    homog[static_cast<std::size_t>(d)] = g.weights();
    detail::refine_lattice(kvs, counts, homog, k);
    std::vector<std::vector<double>> comps(static_cast<std::size_t>(d));
    for (int c = 0; c < d; ++c) {
        comps[static_cast<std::size_t>(c)].resize(homog[static_cast<std::size_t>(d)].size());
        for (std::size_t i = 0; i < comps[static_cast<std::size_t>(c)].size(); ++i)
            comps[static_cast<std::size_t>(c)][i] = homog[static_cast<std::size_t>(c)][i] / homog[static_cast<std::size_t>(d)][i];
    }
    return GeometryMap(TensorKnotGrid(std::move(kvs)), std::move(homog[static_cast<std::size_t>(d)]), std::move(comps));
}

namespace detail {

/// Physical derivatives of a scalar with known parametric derivatives,
/// given geometry derivatives at the same point.
inline PhysicalDerivatives chain_rule(const ParametricDerivs& pd, const GeometryMap::Derivs& gd,
                                      int d, int order, const Point& eta) {
    PhysicalDerivatives out;
    out.value = pd.value;
    if (order == 0) return out;

    double JT[9];
    for (int a = 0; a < d; ++a)
        for (int c = 0; c < d; ++c)
            JT[a * 3 + c] = gd.jac[static_cast<std::size_t>(c)][static_cast<std::size_t>(a)];
    {
        double m[9];
        for (int i = 0; i < 9; ++i) m[i] = JT[i];
        double g[3];
        for (int a = 0; a < d; ++a) g[a] = pd.grad[static_cast<std::size_t>(a)];
        const double det = solve_small(d, m, g, 1);
        if (!(std::abs(det) > 1e-12)) {
            std::ostringstream os;
            os << "singular geometry: |det J| = " << std::abs(det) << " at eta = (";
            for (int a = 0; a < d; ++a) os << (a ? ", " : "") << eta[static_cast<std::size_t>(a)];
            os << ")";
            throw singular_geometry_error(os.str());
        }
        for (int a = 0; a < d; ++a) out.grad[static_cast<std::size_t>(a)] = g[a];
    }
    if (order < 2) return out;

    // M = parametric Hessian minus curvature of the map:
    // M_ab = T_,ab - sum_c (dT/dx_c) F_c,ab ; then H = J^{-T} M J^{-1}.
    double M[9] = {};
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) {
            double m = pd.hess[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
            for (int c = 0; c < d; ++c)
                m -= out.grad[static_cast<std::size_t>(c)] *
                     gd.hess[static_cast<std::size_t>(c)][static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
            M[a * 3 + b] = m;
        }
    // X = J^{-T} M  (solve J^T X = M column-wise)
    double m1[9], X[9];
    for (int i = 0; i < 9; ++i) m1[i] = JT[i];
    double rhs[9];
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) rhs[a * d + b] = M[a * 3 + b];
    solve_small(d, m1, rhs, d);
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) X[a * 3 + b] = rhs[a * d + b];
    // H = X J^{-1}: solve J^T H^T = X^T
    double m2[9];
    for (int i = 0; i < 9; ++i) m2[i] = JT[i];
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) rhs[a * d + b] = X[b * 3 + a];
    solve_small(d, m2, rhs, d);
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) {
            // rhs holds H^T
            out.hess[static_cast<std::size_t>(b)][static_cast<std::size_t>(a)] = rhs[a * d + b];
        }
    // symmetrize and take the trace
    for (int a = 0; a < d; ++a)
        for (int b = a + 1; b < d; ++b) {
            const double s = 0.5 * (out.hess[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] +
                                    out.hess[static_cast<std::size_t>(b)][static_cast<std::size_t>(a)]);
            out.hess[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] = s;
            out.hess[static_cast<std::size_t>(b)][static_cast<std::size_t>(a)] = s;
        }
    for (int a = 0; a < d; ++a) out.laplacian += out.hess[static_cast<std::size_t>(a)][static_cast<std::size_t>(a)];
    return out;
}

}  // namespace detail

/// Physical value/gradient/Hessian/Laplacian of a field through a geometry map.
inline PhysicalDerivatives physical_derivs(const NurbsField& field, const GeometryMap& geom,
                                           const Point& eta, int order) {
    if (order < 0 || order > 2)
        throw std::invalid_argument("physical_derivs: order must be 0, 1 or 2");
    const auto pd = field.eval_derivs(eta, order);
    if (order == 0) {
        PhysicalDerivatives out;
        out.value = pd.value;
        return out;
    }
    const auto gd = geom.eval_derivs(eta, order);
    return detail::chain_rule(pd, gd, geom.dim(), order, eta);
}

}  // namespace igc
