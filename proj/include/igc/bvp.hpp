#pragma once

// Declarative boundary-value problems: differential operator, Dirichlet
// boundary operator, source and boundary data, exact solution, plus the
// built-in study problems.

#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "igc/nurbs.hpp"
#include "igc/spline_core.hpp"

namespace igc {

enum class OperatorKind {
    FirstDerivative,              // d/dx, one-dimensional
    MinusLaplacianPlusIdentity,   // -lap(T) + T
};

struct OperatorSpec {
    OperatorKind kind = OperatorKind::MinusLaplacianPlusIdentity;

    /// Highest derivative order the operator uses.
    int order() const { return kind == OperatorKind::FirstDerivative ? 1 : 2; }

    const char* name() const {
        return kind == OperatorKind::FirstDerivative ? "first-derivative"
                                                     : "minus-laplacian-plus-identity";
    }
};

/// Scalar callable on physical coordinates.
using ScalarFn = std::function<double(const Point&)>;
/// Vector callable on physical coordinates (gradient of the exact solution).
using VectorFn = std::function<Point(const Point&)>;

/// Boundary-value problem with Dirichlet boundary operator. Sources and
/// boundary data are functions of physical coordinates and are evaluated
/// through the geometry map; callables must be pure.
struct BvpProblem {
    std::string name;
    GeometryMap geometry;
    OperatorSpec op;
    ScalarFn source;           // f on the physical domain
    ScalarFn boundary_data;    // g on the physical boundary
    ScalarFn exact;            // exact solution T (if known)
    VectorFn exact_grad;       // physical gradient of T
    ScalarFn exact_laplacian;  // physical Laplacian of T (self-check use)

    int dim() const { return geometry.dim(); }

    /// Problem with the same data on a refined geometry (knot insertion, so
    /// the map itself is unchanged).
    BvpProblem refined(int k) const {
        BvpProblem p = *this;
        p.geometry = refine_uniform(geometry, k);
        return p;
    }

    /// Exact solution's operator image at a physical point.
    double exact_operator_value(const Point& x) const {
        if (op.kind == OperatorKind::FirstDerivative) return exact_grad(x)[0];
        return -exact_laplacian(x) + exact(x);
    }

    /// Checks that the stated exact solution satisfies the equation and the
    /// boundary data on random parametric samples. Throws on mismatch.
    void self_check(int interior_samples = 100, int boundary_samples = 40,
                    unsigned long long seed = 20240901ULL) const;
};

/// Applies the problem's differential operator to a NURBS field at a
/// parametric point, through the geometry map.
inline double apply_operator(const BvpProblem& problem, const NurbsField& field, const Point& eta) {
    if (problem.op.kind == OperatorKind::FirstDerivative) {
        const auto d = physical_derivs(field, problem.geometry, eta, 1);
        return d.grad[0];
    }
    const auto d = physical_derivs(field, problem.geometry, eta, 2);
    return -d.laplacian + d.value;
}

namespace detail {

inline bool on_parametric_boundary(const TensorKnotGrid& grid, const Point& eta, double tol = 0.0) {
    for (int a = 0; a < grid.dim(); ++a) {
        const auto& kv = grid.direction(a);
        if (std::abs(eta[static_cast<std::size_t>(a)] - kv.domain_min()) <= tol ||
            std::abs(eta[static_cast<std::size_t>(a)] - kv.domain_max()) <= tol)
            return true;
    }
    return false;
}

/// Deterministic uniform variate in [0,1); independent of library
/// distribution implementations.
template <typename Rng>
inline double uniform01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace detail

/// Dirichlet trace of the field at a parametric boundary point.
inline double apply_boundary(const BvpProblem& problem, const NurbsField& field, const Point& eta) {
    if (!detail::on_parametric_boundary(problem.geometry.grid(), eta))
        throw std::invalid_argument("apply_boundary: point is not on the parametric boundary");
    return field.eval(eta);
}

// ---------------------------------------------------------------------------
// built-in problems

namespace detail {

inline GeometryMap line_geometry(double a, double b) {
    TensorKnotGrid grid({KnotVector::clamped_uniform(3, 1)});
    const auto xi = greville_abscissae(grid.direction(0));
    std::vector<double> comp(xi.size());
    for (std::size_t i = 0; i < xi.size(); ++i) comp[i] = a + (b - a) * xi[i];
    return GeometryMap(grid, std::vector<double>(xi.size(), 1.0), {comp});
}

/// Quarter annulus (radii 1..4) as a bicubic NURBS patch: the angular
/// direction carries the degree-elevated exact circular arc, the radial
/// direction is linear.
inline GeometryMap quarter_annulus_geometry() {
    const double s2 = std::sqrt(2.0);
    TensorKnotGrid grid({KnotVector::clamped_uniform(3, 1), KnotVector::clamped_uniform(3, 1)});
    // unit quarter arc, u-direction: (1,0) -> (0,1)
    const double arc_x[4] = {1.0, 1.0, 2.0 - s2, 0.0};
    const double arc_y[4] = {0.0, 2.0 - s2, 1.0, 1.0};
    const double arc_w[4] = {1.0, (1.0 + s2) / 3.0, (1.0 + s2) / 3.0, 1.0};
    const double radius[4] = {1.0, 2.0, 3.0, 4.0};
    std::vector<double> w(16), x(16), y(16);
    for (int i = 0; i < 4; ++i) {        // angular index (u)
        for (int j = 0; j < 4; ++j) {    // radial index (v)
            const auto f = static_cast<std::size_t>(i * 4 + j);
            w[f] = arc_w[i];
            x[f] = radius[j] * arc_x[i];
            y[f] = radius[j] * arc_y[i];
        }
    }
    return GeometryMap(grid, std::move(w), {std::move(x), std::move(y)});
}

inline GeometryMap unit_cube_geometry() {
    std::vector<KnotVector> kvs(3, KnotVector::clamped_uniform(3, 1));
    return GeometryMap::identity_box(TensorKnotGrid(std::move(kvs)));
}

}  // namespace detail

/// Built-in problems: intro-1d, source-1d, annulus-2d, cube-3d.
inline BvpProblem builtin_problem(const std::string& name) {
    using std::numbers::pi;
    if (name == "intro-1d") {
        BvpProblem p{
            name,
            detail::line_geometry(0.0, 1.0),
            OperatorSpec{OperatorKind::FirstDerivative},
            [](const Point&) { return 1.0; },                     // f = 1
            [](const Point& x) { return x[0]; },                  // g = T on both ends
            [](const Point& x) { return x[0]; },                  // T = x
            [](const Point&) { return Point{1.0, 0.0, 0.0}; },
            [](const Point&) { return 0.0; },
        };
        return p;
    }
    if (name == "source-1d") {
        BvpProblem p{
            name,
            detail::line_geometry(0.0, 1.0),
            OperatorSpec{OperatorKind::MinusLaplacianPlusIdentity},
            [](const Point& x) { return (1.0 + 4.0 * pi * pi) * std::sin(2.0 * pi * x[0]); },
            [](const Point&) { return 0.0; },
            [](const Point& x) { return std::sin(2.0 * pi * x[0]); },
            [](const Point& x) { return Point{2.0 * pi * std::cos(2.0 * pi * x[0]), 0.0, 0.0}; },
            [](const Point& x) { return -4.0 * pi * pi * std::sin(2.0 * pi * x[0]); },
        };
        return p;
    }
    if (name == "annulus-2d") {
        auto T = [](const Point& q) {
            const double r2 = q[0] * q[0] + q[1] * q[1];
            return (r2 - 1.0) * (r2 - 16.0) * std::sin(q[0]) * std::sin(q[1]);
        };
        auto gradT = [](const Point& q) {
            const double x = q[0], y = q[1];
            const double r2 = x * x + y * y;
            const double g = (r2 - 1.0) * (r2 - 16.0);
            const double gp = 2.0 * r2 - 17.0;  // d g / d r2
            const double sx = std::sin(x), cx = std::cos(x);
            const double sy = std::sin(y), cy = std::cos(y);
            return Point{(gp * 2.0 * x * sx + g * cx) * sy, (gp * 2.0 * y * sy + g * cy) * sx, 0.0};
        };
        auto lapT = [](const Point& q) {
            const double x = q[0], y = q[1];
            const double r2 = x * x + y * y;
            const double g = (r2 - 1.0) * (r2 - 16.0);
            const double gp = 2.0 * r2 - 17.0;
            const double sx = std::sin(x), cx = std::cos(x);
            const double sy = std::sin(y), cy = std::cos(y);
            // d2/dx2 [g sx sy] = (gxx - g) sx sy + 2 gx cx sy, with
            // gx = 2x gp, gxx = 2 gp + 8 x^2 (since g'' = 2)
            const double txx = (2.0 * gp + 8.0 * x * x - g) * sx * sy + 4.0 * x * gp * cx * sy;
            const double tyy = (2.0 * gp + 8.0 * y * y - g) * sy * sx + 4.0 * y * gp * cy * sx;
            return txx + tyy;
        };
        BvpProblem p{
            name,
            detail::quarter_annulus_geometry(),
            OperatorSpec{OperatorKind::MinusLaplacianPlusIdentity},
            [](const Point& q) {
                const double x = q[0], y = q[1];
                const double x2 = x * x, y2 = y * y;
                return (3.0 * x2 * x2 - 67.0 * x2 - 67.0 * y2 + 3.0 * y2 * y2 + 6.0 * x2 * y2 + 116.0) *
                           std::sin(x) * std::sin(y) +
                       (68.0 * x - 8.0 * x2 * x - 8.0 * x * y2) * std::cos(x) * std::sin(y) +
                       (68.0 * y - 8.0 * y2 * y - 8.0 * y * x2) * std::cos(y) * std::sin(x);
            },
            [](const Point&) { return 0.0; },
            T,
            gradT,
            lapT,
        };
        return p;
    }
    if (name == "cube-3d") {
        auto sines = [](const Point& q) {
            return std::sin(2.0 * pi * q[0]) * std::sin(2.0 * pi * q[1]) * std::sin(2.0 * pi * q[2]);
        };
        BvpProblem p{
            name,
            detail::unit_cube_geometry(),
            OperatorSpec{OperatorKind::MinusLaplacianPlusIdentity},
            [sines](const Point& q) { return (1.0 + 12.0 * pi * pi) * sines(q); },
            [](const Point&) { return 0.0; },
            sines,
            [](const Point& q) {
                const double c0 = std::cos(2.0 * pi * q[0]), s0 = std::sin(2.0 * pi * q[0]);
                const double c1 = std::cos(2.0 * pi * q[1]), s1 = std::sin(2.0 * pi * q[1]);
                const double c2 = std::cos(2.0 * pi * q[2]), s2 = std::sin(2.0 * pi * q[2]);
                return Point{2.0 * pi * c0 * s1 * s2, 2.0 * pi * s0 * c1 * s2, 2.0 * pi * s0 * s1 * c2};
            },
            [sines](const Point& q) { return -12.0 * pi * pi * sines(q); },
        };
        return p;
    }
    throw std::invalid_argument("builtin_problem: unknown name '" + name +
                                "' (expected intro-1d, source-1d, annulus-2d or cube-3d)");
}

inline std::vector<std::string> builtin_problem_names() {
    return {"intro-1d", "source-1d", "annulus-2d", "cube-3d"};
}

inline void BvpProblem::self_check(int interior_samples, int boundary_samples,
                                   unsigned long long seed) const {
    std::mt19937_64 rng(seed);
    const int d = dim();
    for (int s = 0; s < interior_samples; ++s) {
        Point eta{0, 0, 0};
        for (int a = 0; a < d; ++a) {
            const auto& kv = geometry.grid().direction(a);
            eta[static_cast<std::size_t>(a)] =
                kv.domain_min() + (kv.domain_max() - kv.domain_min()) * (0.05 + 0.9 * detail::uniform01(rng));
        }
        const Point x = geometry.eval(eta);
        const double lhs = exact_operator_value(x);
        const double rhs = source(x);
        if (!(std::abs(lhs - rhs) <= 1e-8 * (1.0 + std::abs(rhs))))
            throw std::logic_error("BvpProblem self-check: exact solution does not satisfy the equation for '" +
                                   name + "'");
    }
    for (int s = 0; s < boundary_samples; ++s) {
        Point eta{0, 0, 0};
        for (int a = 0; a < d; ++a) {
            const auto& kv = geometry.grid().direction(a);
            eta[static_cast<std::size_t>(a)] =
                kv.domain_min() + (kv.domain_max() - kv.domain_min()) * detail::uniform01(rng);
        }
        const int face_dir = s % d;
        const auto& kv = geometry.grid().direction(face_dir);
        eta[static_cast<std::size_t>(face_dir)] = (s % 2 == 0) ? kv.domain_min() : kv.domain_max();
        const Point x = geometry.eval(eta);
        if (!(std::abs(boundary_data(x) - exact(x)) <= 1e-10))
            throw std::logic_error("BvpProblem self-check: boundary data does not match the exact trace for '" +
                                   name + "'");
    }
}

}  // namespace igc
