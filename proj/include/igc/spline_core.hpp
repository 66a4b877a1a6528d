#pragma once

// Univariate and tensor-product B-spline machinery: clamped knot vectors,
// basis evaluation with derivatives, Greville abscissae, uniform refinement,
// knot insertion and knot-grid-size computation.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace igc {

/// Parametric or physical point; the active dimension is implied by context,
/// unused coordinates stay zero.
using Point = std::array<double, 3>;

inline Point make_point(double x, double y = 0.0, double z = 0.0) {
    return {x, y, z};
}

/// Clamped (open) knot vector of a fixed degree.
///
/// Invariants enforced at construction: knots non-decreasing, end knots
/// repeated exactly degree+1 times, interior multiplicities <= degree,
/// and at least degree+1 basis functions.
class KnotVector {
public:
    KnotVector(int degree, std::vector<double> knots)
        : degree_(degree), knots_(std::move(knots)) {
        validate();
    }

    /// Clamped knot vector with `intervals` uniform spans on [a, b].
    static KnotVector clamped_uniform(int degree, int intervals, double a = 0.0, double b = 1.0) {
        if (intervals < 1) throw std::invalid_argument("KnotVector: need at least one interval");
        if (!(a < b)) throw std::invalid_argument("KnotVector: empty domain");
        std::vector<double> t;
        t.reserve(static_cast<std::size_t>(intervals + 1 + 2 * degree));
        for (int i = 0; i <= degree; ++i) t.push_back(a);
        for (int i = 1; i < intervals; ++i)
            t.push_back(a + (b - a) * static_cast<double>(i) / intervals);
        for (int i = 0; i <= degree; ++i) t.push_back(b);
        return KnotVector(degree, std::move(t));
    }

    int degree() const { return degree_; }
    const std::vector<double>& knots() const { return knots_; }
    int basis_count() const { return static_cast<int>(knots_.size()) - degree_ - 1; }
    double domain_min() const { return knots_.front(); }
    double domain_max() const { return knots_.back(); }

    /// Span index i with knots[i] <= u < knots[i+1]; the right domain
    /// endpoint resolves to the last nonempty span (left-limit convention).
    int find_span(double u) const {
        const int n = basis_count();
        if (u < domain_min() || u > domain_max())
            throw std::domain_error("KnotVector: parameter " + std::to_string(u) + " outside domain");
        auto it = std::upper_bound(knots_.begin(), knots_.end(), u);
        int span = static_cast<int>(it - knots_.begin()) - 1;
        return std::clamp(span, degree_, n - 1);
    }

    /// Distinct knot values spanning the domain (domain endpoints included).
    std::vector<double> breakpoints() const {
        std::vector<double> b;
        for (double t : knots_)
            if (b.empty() || t > b.back()) b.push_back(t);
        return b;
    }

    /// Width of the largest knot interval.
    double max_interval() const {
        double w = 0.0;
        for (std::size_t i = 0; i + 1 < knots_.size(); ++i)
            w = std::max(w, knots_[i + 1] - knots_[i]);
        return w;
    }

    /// Inserts k uniformly spaced simple knots into every nonempty interval,
    /// so each interval of width w splits into k+1 spans of width w/(k+1).
    KnotVector refined_uniform(int k) const {
        if (k < 0) throw std::invalid_argument("KnotVector: negative refinement count");
        if (k == 0) return *this;
        std::vector<double> t;
        t.reserve(knots_.size() + static_cast<std::size_t>(k) * breakpoints().size());
        for (std::size_t i = 0; i < knots_.size(); ++i) {
            t.push_back(knots_[i]);
            if (i + 1 < knots_.size() && knots_[i + 1] > knots_[i]) {
                const double a = knots_[i], b = knots_[i + 1];
                for (int j = 1; j <= k; ++j)
                    t.push_back(a + (b - a) * static_cast<double>(j) / (k + 1));
            }
        }
        return KnotVector(degree_, std::move(t));
    }

    bool operator==(const KnotVector& o) const {
        return degree_ == o.degree_ && knots_ == o.knots_;
    }

private:
    void validate() const {
        const int p = degree_;
        if (p < 0) throw std::invalid_argument("KnotVector: negative degree");
        const int m = static_cast<int>(knots_.size());
        if (m < 2 * (p + 1))
            throw std::invalid_argument("KnotVector: too few knots for clamped form");
        for (int i = 0; i + 1 < m; ++i)
            if (knots_[i + 1] < knots_[i])
                throw std::invalid_argument("KnotVector: knots must be non-decreasing");
        if (!(knots_.front() < knots_.back()))
            throw std::invalid_argument("KnotVector: empty domain");
        for (int i = 0; i <= p; ++i) {
            if (knots_[i] != knots_.front() || knots_[m - 1 - i] != knots_.back())
                throw std::invalid_argument("KnotVector: ends must have multiplicity degree+1");
        }
        if (m > 2 * (p + 1)) {
            if (knots_[p + 1] == knots_.front() || knots_[m - p - 2] == knots_.back())
                throw std::invalid_argument("KnotVector: end multiplicity exceeds degree+1");
        }
        // interior multiplicities
        int run = 1;
        for (int i = p + 1; i < m - p - 1; ++i) {
            run = (knots_[i] == knots_[i - 1]) ? run + 1 : 1;
            if (knots_[i] > knots_.front() && knots_[i] < knots_.back() && run > p)
                throw std::invalid_argument("KnotVector: interior multiplicity exceeds degree");
        }
        if (basis_count() < p + 1)
            throw std::invalid_argument("KnotVector: fewer basis functions than degree+1");
    }

    int degree_;
    std::vector<double> knots_;
};

/// Nonzero basis functions (and derivatives) at one parameter value.
/// Row j of the table holds the j-th derivatives of the degree+1 functions
/// whose indices start at first_index().
struct BasisSpan {
    int span = 0;
    int degree = 0;
    int nders = 0;
    std::vector<double> table;  // (nders+1) x (degree+1), row-major

    int first_index() const { return span - degree; }
    double value(int r) const { return table[static_cast<std::size_t>(r)]; }
    double deriv(int order, int r) const {
        return table[static_cast<std::size_t>(order) * (degree + 1) + r];
    }
};

/// Cox-de Boor evaluation of the degree+1 nonzero basis functions at u,
/// with derivatives up to deriv_order.
inline BasisSpan eval_basis(const KnotVector& kv, double u, int deriv_order = 0) {
    const int p = kv.degree();
    if (deriv_order < 0 || deriv_order > p)
        throw std::invalid_argument("eval_basis: derivative order must lie in [0, degree]");
    const auto& U = kv.knots();
    const int span = kv.find_span(u);

    BasisSpan out;
    out.span = span;
    out.degree = p;
    out.nders = deriv_order;
    out.table.assign(static_cast<std::size_t>(deriv_order + 1) * (p + 1), 0.0);

    // triangular table of basis values and knot differences
    std::vector<double> ndu(static_cast<std::size_t>(p + 1) * (p + 1));
    auto NDU = [&](int j, int r) -> double& { return ndu[static_cast<std::size_t>(j) * (p + 1) + r]; };
    std::vector<double> left(p + 1), right(p + 1);
    NDU(0, 0) = 1.0;
    for (int j = 1; j <= p; ++j) {
        left[j] = u - U[static_cast<std::size_t>(span + 1 - j)];
        right[j] = U[static_cast<std::size_t>(span + j)] - u;
        double saved = 0.0;
        for (int r = 0; r < j; ++r) {
            NDU(j, r) = right[r + 1] + left[j - r];
            const double temp = NDU(r, j - 1) / NDU(j, r);
            NDU(r, j) = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        NDU(j, j) = saved;
    }
    for (int r = 0; r <= p; ++r) out.table[static_cast<std::size_t>(r)] = NDU(r, p);

    if (deriv_order > 0) {
        std::vector<double> a(2 * static_cast<std::size_t>(p + 1));
        auto A = [&](int s, int j) -> double& { return a[static_cast<std::size_t>(s) * (p + 1) + j]; };
        for (int r = 0; r <= p; ++r) {
            int s1 = 0, s2 = 1;
            A(0, 0) = 1.0;
            for (int k = 1; k <= deriv_order; ++k) {
                double d = 0.0;
                const int rk = r - k, pk = p - k;
                if (r >= k) {
                    A(s2, 0) = A(s1, 0) / NDU(pk + 1, rk);
                    d = A(s2, 0) * NDU(rk, pk);
                }
                const int j1 = (rk >= -1) ? 1 : -rk;
                const int j2 = (r - 1 <= pk) ? k - 1 : p - r;
                for (int j = j1; j <= j2; ++j) {
                    A(s2, j) = (A(s1, j) - A(s1, j - 1)) / NDU(pk + 1, rk + j);
                    d += A(s2, j) * NDU(rk + j, pk);
                }
                if (r <= pk) {
                    A(s2, k) = -A(s1, k - 1) / NDU(pk + 1, r);
                    d += A(s2, k) * NDU(r, pk);
                }
                out.table[static_cast<std::size_t>(k) * (p + 1) + r] = d;
                std::swap(s1, s2);
            }
        }
        double f = p;
        for (int k = 1; k <= deriv_order; ++k) {
            for (int j = 0; j <= p; ++j)
                out.table[static_cast<std::size_t>(k) * (p + 1) + j] *= f;
            f *= (p - k);
        }
    }
    return out;
}

/// Greville abscissae: per-basis averages of degree consecutive knots.
/// One abscissa per basis function; endpoints coincide with the domain ends.
inline std::vector<double> greville_abscissae(const KnotVector& kv) {
    const int p = kv.degree();
    if (p < 1) throw std::invalid_argument("greville_abscissae: degree must be at least 1");
    const auto& U = kv.knots();
    std::vector<double> xi(static_cast<std::size_t>(kv.basis_count()));
    for (std::size_t i = 0; i < xi.size(); ++i) {
        double s = 0.0;
        for (int j = 1; j <= p; ++j) s += U[i + static_cast<std::size_t>(j)];
        xi[i] = s / p;
    }
    // end abscissae are exact domain endpoints; remove rounding residue
    xi.front() = kv.domain_min();
    xi.back() = kv.domain_max();
    return xi;
}

/// Tensor-product knot grid in 1, 2 or 3 parametric directions.
class TensorKnotGrid {
public:
    explicit TensorKnotGrid(std::vector<KnotVector> directions)
        : dirs_(std::move(directions)) {
        if (dirs_.empty() || dirs_.size() > 3)
            throw std::invalid_argument("TensorKnotGrid: dimension must be 1, 2 or 3");
    }

    int dim() const { return static_cast<int>(dirs_.size()); }
    const KnotVector& direction(int a) const { return dirs_.at(static_cast<std::size_t>(a)); }
    const std::vector<KnotVector>& directions() const { return dirs_; }

    long basis_count() const {
        long n = 1;
        for (const auto& kv : dirs_) n *= kv.basis_count();
        return n;
    }

    std::array<int, 3> basis_counts() const {
        std::array<int, 3> c{1, 1, 1};
        for (int a = 0; a < dim(); ++a) c[static_cast<std::size_t>(a)] = dirs_[static_cast<std::size_t>(a)].basis_count();
        return c;
    }

    /// Row-major flattening of a per-direction multi-index.
    long flat_index(const std::array<int, 3>& mi) const {
        const auto c = basis_counts();
        long idx = mi[0];
        for (int a = 1; a < dim(); ++a) idx = idx * c[static_cast<std::size_t>(a)] + mi[static_cast<std::size_t>(a)];
        return idx;
    }

    TensorKnotGrid refined_uniform(int k) const {
        std::vector<KnotVector> r;
        r.reserve(dirs_.size());
        for (const auto& kv : dirs_) r.push_back(kv.refined_uniform(k));
        return TensorKnotGrid(std::move(r));
    }

    bool operator==(const TensorKnotGrid& o) const { return dirs_ == o.dirs_; }

private:
    std::vector<KnotVector> dirs_;
};

/// Knot grid size: the largest Euclidean diameter over all nonempty knot
/// intervals (interval length in 1D, rectangle/box diagonal in 2D/3D).
inline double knot_grid_size(const TensorKnotGrid& grid) {
    double s = 0.0;
    for (int a = 0; a < grid.dim(); ++a) {
        const double w = grid.direction(a).max_interval();
        s += w * w;
    }
    return std::sqrt(s);
}

inline TensorKnotGrid refine_uniform(const TensorKnotGrid& grid, int k) {
    return grid.refined_uniform(k);
}

namespace detail {

/// Single-knot insertion (Boehm) along one direction of a control lattice.
/// Every flat row-major component array in `comps` is rewritten in place;
/// `counts` carries the per-direction control counts and is updated.
inline void insert_knot_lattice(KnotVector& kv, int dim, int dir,
                                std::array<int, 3>& counts, double u,
                                std::vector<std::vector<double>>& comps) {
    const int p = kv.degree();
    const auto& U = kv.knots();
    if (u <= kv.domain_min() || u >= kv.domain_max())
        throw std::domain_error("insert_knot: new knot must be strictly interior");
    const int span = kv.find_span(u);
    const int n_old = kv.basis_count();

    std::vector<double> alpha(static_cast<std::size_t>(n_old + 1), 0.0);
    for (int i = 0; i <= n_old; ++i) {
        if (i <= span - p) alpha[static_cast<std::size_t>(i)] = 1.0;
        else if (i > span) alpha[static_cast<std::size_t>(i)] = 0.0;
        else
            alpha[static_cast<std::size_t>(i)] =
                (u - U[static_cast<std::size_t>(i)]) /
                (U[static_cast<std::size_t>(i + p)] - U[static_cast<std::size_t>(i)]);
    }

    // strides of the old lattice
    long stride = 1;
    for (int a = dim - 1; a > dir; --a) stride *= counts[static_cast<std::size_t>(a)];
    long n_lines = 1;
    for (int a = 0; a < dim; ++a)
        if (a != dir) n_lines *= counts[static_cast<std::size_t>(a)];

    const int n_new = n_old + 1;
    for (auto& c : comps) {
        std::vector<double> out(static_cast<std::size_t>(n_lines) * n_new);
        // enumerate lines by (outer, inner) split around `dir`
        long outer = 1;
        for (int a = 0; a < dir; ++a) outer *= counts[static_cast<std::size_t>(a)];
        const long inner = stride;
        for (long o = 0; o < outer; ++o) {
            for (long in = 0; in < inner; ++in) {
                const double* src = c.data() + (o * counts[static_cast<std::size_t>(dir)]) * inner + in;
                double* dst = out.data() + (o * n_new) * inner + in;
                for (int i = 0; i < n_new; ++i) {
                    const double a1 = alpha[static_cast<std::size_t>(i)];
                    double v = 0.0;
                    if (a1 > 0.0) v += a1 * src[static_cast<std::size_t>(i) * inner];
                    if (a1 < 1.0) v += (1.0 - a1) * src[static_cast<std::size_t>(i - 1) * inner];
                    dst[static_cast<std::size_t>(i) * inner] = v;
                }
            }
        }
        c = std::move(out);
    }

    std::vector<double> nk = U;
    nk.insert(nk.begin() + span + 1, u);
    kv = KnotVector(p, std::move(nk));
    counts[static_cast<std::size_t>(dir)] = n_new;
}

}  // namespace detail

}  // namespace igc
