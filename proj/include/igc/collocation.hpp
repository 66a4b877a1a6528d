#pragma once

// Collocation system assembly and dense solve: interior rows impose the
// differential operator at Greville points, boundary rows impose the
// Dirichlet trace; one unknown per basis function.

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "igc/bvp.hpp"
#include "igc/linalg.hpp"
#include "igc/nurbs.hpp"
#include "igc/spline_core.hpp"

namespace igc {

class solve_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct CollocationPoints {
    std::vector<Point> interior;  // strictly inside the parameter box
    std::vector<Point> boundary;  // on the parametric boundary faces

    long total() const { return static_cast<long>(interior.size() + boundary.size()); }
};

/// Tensor-product Greville abscissae of the grid; points with any coordinate
/// on a domain endpoint are classified as boundary points.
inline CollocationPoints generate_collocation_points(const TensorKnotGrid& grid) {
    const int d = grid.dim();
    std::array<std::vector<double>, 3> xi;
    for (int a = 0; a < d; ++a) xi[static_cast<std::size_t>(a)] = greville_abscissae(grid.direction(a));

    CollocationPoints pts;
    std::array<std::size_t, 3> idx{0, 0, 0};
    std::array<std::size_t, 3> count{1, 1, 1};
    for (int a = 0; a < d; ++a) count[static_cast<std::size_t>(a)] = xi[static_cast<std::size_t>(a)].size();

    for (idx[0] = 0; idx[0] < count[0]; ++idx[0])
        for (idx[1] = 0; idx[1] < count[1]; ++idx[1])
            for (idx[2] = 0; idx[2] < count[2]; ++idx[2]) {
                Point eta{0, 0, 0};
                bool on_boundary = false;
                for (int a = 0; a < d; ++a) {
                    const double v = xi[static_cast<std::size_t>(a)][idx[static_cast<std::size_t>(a)]];
                    eta[static_cast<std::size_t>(a)] = v;
                    const auto& kv = grid.direction(a);
                    if (v == kv.domain_min() || v == kv.domain_max()) on_boundary = true;
                }
                (on_boundary ? pts.boundary : pts.interior).push_back(eta);
            }
    return pts;
}

struct CollocationSystem {
    Matrix matrix;             // interior rows first, then boundary rows
    std::vector<double> rhs;
    CollocationPoints points;
    long n = 0;
    long n_interior = 0;
};

struct NumericalSolution {
    NurbsField field;
    double rho = 0.0;        // knot grid size of the trial space
    long n = 0;              // system size
    double cond_estimate = 0.0;
    double residual = 0.0;   // max-norm residual of the solved system
};

namespace detail {

/// Entries of one collocation row: the operator (or trace) applied to each
/// rational basis function with support at eta. Returns the global column
/// indices alongside the values.
inline void collocation_row(const BvpProblem& problem, const Point& eta, bool boundary_row,
                            std::vector<long>& cols, std::vector<double>& vals) {
    const auto& geom = problem.geometry;
    const auto& grid = geom.grid();
    const int d = grid.dim();
    const int m = boundary_row ? 0 : problem.op.order();

    const auto tb = tensor_basis(grid, eta, m);
    double prod[10];

    DerivSums W;
    for_each_local(tb, [&](const std::array<int, 3>& loc) {
        basis_products(tb, loc, m, prod);
        const auto g = static_cast<std::size_t>(global_index(grid, tb, loc));
        scatter_products(d, m, prod, geom.weights()[g], W);
    });

    GeometryMap::Derivs gd;
    if (!boundary_row) {
        try {
            gd = geom.eval_derivs(eta, m);
        } catch (const singular_geometry_error&) {
            throw;
        }
    }

    cols.clear();
    vals.clear();
    for_each_local(tb, [&](const std::array<int, 3>& loc) {
        basis_products(tb, loc, m, prod);
        const long g = global_index(grid, tb, loc);
        DerivSums Ni;
        scatter_products(d, m, prod, geom.weights()[static_cast<std::size_t>(g)], Ni);
        const auto pd = rational_derivs(d, m, Ni, W);
        double entry;
        if (boundary_row) {
            entry = pd.value;
        } else if (problem.op.kind == OperatorKind::FirstDerivative) {
            const auto ph = chain_rule(pd, gd, d, 1, eta);
            entry = ph.grad[0];
        } else {
            const auto ph = chain_rule(pd, gd, d, 2, eta);
            entry = -ph.laplacian + ph.value;
        }
        cols.push_back(g);
        vals.push_back(entry);
    });
}

}  // namespace detail

/// Assembles the square collocation system for the problem's refined
/// geometry: row k imposes the operator at interior point k against source
/// f(F(eta)); boundary rows impose the trace against g(F(eta)).
inline CollocationSystem assemble(const BvpProblem& problem, const CollocationPoints& pts) {
    const auto& grid = problem.geometry.grid();
    const long n = grid.basis_count();
    if (pts.total() != n)
        throw std::invalid_argument("assemble: point count must equal basis count");

    CollocationSystem sys;
    sys.n = n;
    sys.n_interior = static_cast<long>(pts.interior.size());
    sys.points = pts;
    sys.matrix = Matrix(n, n, 0.0);
    sys.rhs.assign(static_cast<std::size_t>(n), 0.0);

    std::vector<long> cols;
    std::vector<double> vals;
    long row = 0;
    for (const auto& eta : pts.interior) {
        try {
            detail::collocation_row(problem, eta, false, cols, vals);
        } catch (const singular_geometry_error& e) {
            throw singular_geometry_error(std::string(e.what()) + " while assembling an interior collocation row");
        }
        for (std::size_t j = 0; j < cols.size(); ++j) sys.matrix(row, cols[j]) = vals[j];
        sys.rhs[static_cast<std::size_t>(row)] = problem.source(problem.geometry.eval(eta));
        ++row;
    }
    for (const auto& eta : pts.boundary) {
        detail::collocation_row(problem, eta, true, cols, vals);
        for (std::size_t j = 0; j < cols.size(); ++j) sys.matrix(row, cols[j]) = vals[j];
        sys.rhs[static_cast<std::size_t>(row)] = problem.boundary_data(problem.geometry.eval(eta));
        ++row;
    }
    return sys;
}

namespace detail {

inline NumericalSolution finish_solve(const CollocationSystem& sys, const LuFactor& lu,
                                      const TensorKnotGrid& grid, const std::vector<double>& weights,
                                      const std::vector<double>& rhs) {
    auto coeffs = lu.solve(rhs);
    const auto ax = sys.matrix.multiply(coeffs);
    double res = 0.0;
    for (std::size_t i = 0; i < ax.size(); ++i) res = std::max(res, std::abs(ax[i] - rhs[i]));
    const double tol = 1e-9 * (1.0 + max_abs(rhs));
    if (!(res <= tol))
        throw solve_error("collocation solve: residual " + std::to_string(res) +
                          " exceeds tolerance " + std::to_string(tol));
    NumericalSolution sol{NurbsField(grid, weights, std::move(coeffs)), knot_grid_size(grid), sys.n,
                          sys.matrix.norm1() * lu.estimate_inverse_norm1(), res};
    return sol;
}

}  // namespace detail

/// Dense LU solve of an assembled system; verifies the residual invariant
/// and records a condition estimate.
inline NumericalSolution solve(const CollocationSystem& sys, const BvpProblem& problem) {
    LuFactor lu{sys.matrix};
    return detail::finish_solve(sys, lu, problem.geometry.grid(), problem.geometry.weights(), sys.rhs);
}

/// Assembled-and-factored collocation operator for one refinement level.
/// The matrix depends only on the operator and the trial space, so one
/// factorization serves many right-hand sides.
class CollocationOperator {
public:
    CollocationOperator(BvpProblem problem, int refine_level)
        : problem_(problem.refined(refine_level)),
          points_(generate_collocation_points(problem_.geometry.grid())),
          system_(assemble(problem_, points_)),
          lu_(system_.matrix) {}

    const BvpProblem& problem() const { return problem_; }
    const CollocationPoints& points() const { return points_; }
    const CollocationSystem& system() const { return system_; }
    double rho() const { return knot_grid_size(problem_.geometry.grid()); }
    long size() const { return system_.n; }

    /// Solves with the problem's own source and boundary data.
    NumericalSolution solve() const {
        return detail::finish_solve(system_, lu_, problem_.geometry.grid(),
                                    problem_.geometry.weights(), system_.rhs);
    }

    /// Solves with parametric right-hand sides: interior rows take
    /// f_eta(eta_k), boundary rows take g_eta(eta_l).
    NumericalSolution solve_parametric(const std::function<double(const Point&)>& f_eta,
                                       const std::function<double(const Point&)>& g_eta) const {
        std::vector<double> rhs(static_cast<std::size_t>(system_.n));
        long row = 0;
        for (const auto& eta : points_.interior) rhs[static_cast<std::size_t>(row++)] = f_eta(eta);
        for (const auto& eta : points_.boundary) rhs[static_cast<std::size_t>(row++)] = g_eta(eta);
        return detail::finish_solve(system_, lu_, problem_.geometry.grid(),
                                    problem_.geometry.weights(), rhs);
    }

private:
    BvpProblem problem_;
    CollocationPoints points_;
    CollocationSystem system_;
    LuFactor lu_;
};

}  // namespace igc
