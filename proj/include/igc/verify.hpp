#pragma once

// Invariant suite behind the `verify` subcommand: property checks on tiny
// instances of the spline, geometry and solver machinery.

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "igc/bvp.hpp"
#include "igc/collocation.hpp"
#include "igc/nurbs.hpp"
#include "igc/spline_core.hpp"

namespace igc {

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

namespace detail {

inline std::vector<KnotVector> verify_knot_vectors() {
    std::vector<KnotVector> kvs;
    kvs.push_back(KnotVector::clamped_uniform(3, 1));
    kvs.push_back(KnotVector::clamped_uniform(3, 5));
    kvs.push_back(KnotVector::clamped_uniform(2, 4));
    kvs.push_back(KnotVector(3, {0, 0, 0, 0, 0.25, 0.5, 0.5, 0.75, 1, 1, 1, 1}));  // double interior knot
    kvs.push_back(KnotVector(1, {0, 0, 0.5, 1, 1}));
    return kvs;
}

template <typename Fn>
inline CheckResult run_check(const std::string& name, Fn&& fn) {
    CheckResult r;
    r.name = name;
    try {
        std::ostringstream detail;
        r.pass = fn(detail);
        r.detail = detail.str();
    } catch (const std::exception& e) {
        r.pass = false;
        r.detail = e.what();
    }
    return r;
}

}  // namespace detail

inline CheckResult verify_partition_of_unity(std::uint64_t seed = 1) {
    return detail::run_check("basis partition of unity", [&](std::ostringstream& os) {
        std::mt19937_64 rng(seed);
        double worst = 0.0;
        for (const auto& kv : detail::verify_knot_vectors()) {
            for (int t = 0; t < 1000; ++t) {
                const double u = kv.domain_min() +
                                 (kv.domain_max() - kv.domain_min()) * detail::uniform01(rng);
                const auto bs = eval_basis(kv, u, kv.degree() >= 1 ? 1 : 0);
                double sum = 0.0, dsum = 0.0;
                for (int r = 0; r <= kv.degree(); ++r) {
                    if (bs.value(r) < 0.0) {
                        os << "negative basis value at u = " << u;
                        return false;
                    }
                    sum += bs.value(r);
                    if (kv.degree() >= 1) dsum += bs.deriv(1, r);
                }
                worst = std::max({worst, std::abs(sum - 1.0), std::abs(dsum)});
            }
        }
        os << "max |sum-1| and |sum of derivatives| = " << worst;
        return worst <= 1e-12;
    });
}

inline CheckResult verify_derivatives_vs_fd(std::uint64_t seed = 2) {
    return detail::run_check("basis derivatives vs central differences", [&](std::ostringstream& os) {
        std::mt19937_64 rng(seed);
        const double h = 1e-5;
        double worst = 0.0;
        for (const auto& kv : detail::verify_knot_vectors()) {
            if (kv.degree() < 1) continue;
            const auto bp = kv.breakpoints();
            for (int t = 0; t < 100; ++t) {
                double u;
                // keep the stencil inside one interval and away from knots
                for (;;) {
                    u = detail::uniform01(rng);
                    bool clear = u > 4 * h && u < 1 - 4 * h;
                    for (double b : bp) clear = clear && std::abs(u - b) > 4 * h;
                    if (clear) break;
                }
                const auto c = eval_basis(kv, u, 1);
                const auto lo = eval_basis(kv, u - h, 0);
                const auto hi = eval_basis(kv, u + h, 0);
                if (lo.span != c.span || hi.span != c.span) continue;
                for (int r = 0; r <= kv.degree(); ++r) {
                    const double fd = (hi.value(r) - lo.value(r)) / (2 * h);
                    const double an = c.deriv(1, r);
                    const double rel = std::abs(fd - an) / std::max(1.0, std::abs(an));
                    worst = std::max(worst, rel);
                }
            }
        }
        os << "max relative first-derivative error = " << worst;
        return worst <= 1e-6;
    });
}

inline CheckResult verify_knot_insertion_invariance(std::uint64_t seed = 3) {
    return detail::run_check("knot-insertion geometry invariance", [&](std::ostringstream& os) {
        std::mt19937_64 rng(seed);
        const auto geom = builtin_problem("annulus-2d").geometry;
        double worst = 0.0;
        for (int k : {1, 3}) {
            const auto fine = refine_uniform(geom, k);
            for (int t = 0; t < 200; ++t) {
                const Point eta{detail::uniform01(rng), detail::uniform01(rng), 0.0};
                const Point a = geom.eval(eta);
                const Point b = fine.eval(eta);
                worst = std::max({worst, std::abs(a[0] - b[0]), std::abs(a[1] - b[1])});
            }
        }
        os << "max coordinate drift after insertion = " << worst;
        return worst <= 1e-12;
    });
}

inline CheckResult verify_greville_linear_reproduction() {
    return detail::run_check("Greville linear reproduction", [&](std::ostringstream& os) {
        double worst = 0.0;
        for (const auto& kv : detail::verify_knot_vectors()) {
            if (kv.degree() < 1) continue;
            const auto xi = greville_abscissae(kv);
            for (int i = 0; i <= 400; ++i) {
                const double u = kv.domain_min() + (kv.domain_max() - kv.domain_min()) * i / 400.0;
                const auto bs = eval_basis(kv, u, 0);
                double s = 0.0;
                for (int r = 0; r <= kv.degree(); ++r)
                    s += xi[static_cast<std::size_t>(bs.first_index() + r)] * bs.value(r);
                worst = std::max(worst, std::abs(s - u));
            }
        }
        os << "max |sum xi_i B_i(u) - u| = " << worst;
        return worst <= 1e-12;
    });
}

inline CheckResult verify_solver_residuals() {
    return detail::run_check("solver residual invariant on tiny studies", [&](std::ostringstream& os) {
        struct Tiny {
            const char* name;
            int k_max;
        };
        double worst_rel = 0.0;
        for (const Tiny t : {Tiny{"intro-1d", 4}, Tiny{"source-1d", 4}, Tiny{"annulus-2d", 3}, Tiny{"cube-3d", 2}}) {
            const auto base = builtin_problem(t.name);
            for (int k = 0; k <= t.k_max; ++k) {
                CollocationOperator op(base, k);
                const auto sol = op.solve();
                const double tol = 1e-9 * (1.0 + max_abs(op.system().rhs));
                worst_rel = std::max(worst_rel, sol.residual / tol);
            }
        }
        os << "worst residual / tolerance = " << worst_rel;
        return worst_rel <= 1.0;
    });
}

inline CheckResult verify_problem_self_checks() {
    return detail::run_check("built-in problem self-checks", [&](std::ostringstream& os) {
        for (const auto& name : builtin_problem_names()) builtin_problem(name).self_check();
        os << "all built-in problems satisfy their equations and boundary data";
        return true;
    });
}

/// The full invariant suite on tiny instances.
inline std::vector<CheckResult> run_verify() {
    return {
        verify_partition_of_unity(),
        verify_derivatives_vs_fd(),
        verify_knot_insertion_invariance(),
        verify_greville_linear_reproduction(),
        verify_solver_residuals(),
        verify_problem_self_checks(),
    };
}

}  // namespace igc
