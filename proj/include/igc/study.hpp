#pragma once

// Refinement-study driver: runs a built-in problem over the knot-grid-size
// schedule rho_k = 1/(k+1), records the norm/error sequences, optionally
// instruments the consistency bounds, and serializes the results.

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <system_error>
#include <vector>

#include "igc/bvp.hpp"
#include "igc/collocation.hpp"
#include "igc/consistency.hpp"
#include "igc/spline_core.hpp"

namespace igc {

struct StudyConfig {
    std::string problem;
    int k_max = 7;
    int samples = 0;  // per knot interval per direction; 0 picks 32/16/8 by dimension
    std::uint64_t seed = 0;
    std::string out_dir;    // empty: no files written
    bool bounds = false;    // instrument the consistency bounds per level
    bool norms = false;     // estimate operator norms per level
    bool timing = false;    // record wall time per level (breaks byte-determinism)

    void validate() const {
        if (k_max < 3)
            throw std::invalid_argument("StudyConfig: k_max must be at least 3 (the boundedness verdict needs 4 levels)");
        if (samples != 0 && samples < 4)
            throw std::invalid_argument("StudyConfig: samples per interval must be at least 4");
    }

    static int default_samples(int dim) { return dim == 1 ? 32 : dim == 2 ? 16 : 8; }
};

/// One refinement level of a study.
struct ConvergenceRecord {
    int k = 0;
    double rho = 0.0;
    double ln_rho = 0.0;
    double norm_Tr = 0.0;
    double norm_DTr = 0.0;
    double ratio = 0.0;
    double err_Tr = 0.0;    // ||T_r - T||_inf
    double err_DTr = 0.0;   // ||D T_r - f||_inf
    double observed_order = 0.0;  // ln(err_DTr ratio) / ln(rho ratio) of consecutive levels
    double cond_est = 0.0;
    double wall_ms = 0.0;
    double norm_D_est = 0.0;  // filled when norm estimation is on
    double norm_I_est = 0.0;
};

struct StudyResult {
    StudyConfig config;
    std::vector<ConvergenceRecord> records;
    std::vector<BoundReport> bound_reports;
    BoundednessReport verdict;
};

inline BoundednessReport boundedness_verdict(const std::vector<ConvergenceRecord>& records) {
    std::vector<double> norms, ratios;
    norms.reserve(records.size());
    ratios.reserve(records.size());
    for (const auto& r : records) {
        norms.push_back(r.norm_DTr);
        ratios.push_back(r.ratio);
    }
    return boundedness_verdict(norms, ratios);
}

inline StudyResult run_study(const StudyConfig& config) {
    config.validate();
    const BvpProblem base = builtin_problem(config.problem);
    const int samples = config.samples > 0 ? config.samples : StudyConfig::default_samples(base.dim());

    StudyResult result;
    result.config = config;

    for (int k = 0; k <= config.k_max; ++k) {
        const auto t0 = std::chrono::steady_clock::now();
        CollocationOperator op(base, k);
        const auto& level = op.problem();
        const auto sol = op.solve();
        const Lattice lat(level.geometry.grid(), samples);

        ConvergenceRecord rec;
        rec.k = k;
        rec.rho = sol.rho;
        rec.ln_rho = std::log(sol.rho);
        rec.cond_est = sol.cond_estimate;

        double nT = 0.0, nD = 0.0, eT = 0.0, eD = 0.0;
        lat.for_each([&](const Point& eta, long) {
            const Point x = level.geometry.eval(eta);
            const double tr = sol.field.eval(eta);
            const double dtr = apply_operator(level, sol.field, eta);
            nT = std::max(nT, std::abs(tr));
            nD = std::max(nD, std::abs(dtr));
            eT = std::max(eT, std::abs(tr - level.exact(x)));
            eD = std::max(eD, std::abs(dtr - level.source(x)));
        });
        rec.norm_Tr = nT;
        rec.norm_DTr = nD;
        rec.ratio = nT > 0.0 ? nD / nT : 0.0;
        rec.err_Tr = eT;
        rec.err_DTr = eD;
        if (!result.records.empty()) {
            const auto& prev = result.records.back();
            const double num = std::log(prev.err_DTr / rec.err_DTr);
            const double den = std::log(prev.rho / rec.rho);
            const double order = num / den;
            rec.observed_order = std::isfinite(order) ? order : 0.0;
        }
        if (config.norms) {
            rec.norm_D_est = estimate_norm_D(level, lat, 16, config.seed + 11 * static_cast<std::uint64_t>(k));
            rec.norm_I_est = estimate_norm_I(op, lat, 16, config.seed + 13 * static_cast<std::uint64_t>(k));
        }
        if (config.timing) {
            const auto t1 = std::chrono::steady_clock::now();
            rec.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
        }
        result.records.push_back(rec);
    }

    if (config.bounds) {
        std::vector<int> levels(static_cast<std::size_t>(config.k_max) + 1);
        for (int k = 0; k <= config.k_max; ++k) levels[static_cast<std::size_t>(k)] = k;
        SamplingSpec spec{samples, config.seed};
        result.bound_reports = check_bounds(base, levels, spec);
    }

    result.verdict = boundedness_verdict(result.records);
    return result;
}

namespace detail {

inline std::string format_g15(double v) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 15);
    return std::string(buf, res.ptr);
}

}  // namespace detail

/// CSV serialization of the study records: a header row and one row per
/// level, 15 significant digits, newline-terminated.
inline std::string csv_string(const std::vector<ConvergenceRecord>& records) {
    if (records.empty()) throw std::invalid_argument("emit_csv: no records");
    std::string out = "k,rho,ln_rho,norm_Tr,norm_DTr,ratio,err_Tr,err_DTr,observed_order,cond_est,wall_ms\n";
    for (const auto& r : records) {
        out += std::to_string(r.k);
        for (double v : {r.rho, r.ln_rho, r.norm_Tr, r.norm_DTr, r.ratio, r.err_Tr, r.err_DTr,
                         r.observed_order, r.cond_est, r.wall_ms}) {
            out += ',';
            out += detail::format_g15(v);
        }
        out += '\n';
    }
    return out;
}

namespace detail {

inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp + " for writing");
        out << content;
        if (!out) throw std::runtime_error("write failed for " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace detail

/// Writes the CSV atomically (temp file + rename).
inline void emit_csv(const std::vector<ConvergenceRecord>& records, const std::filesystem::path& path) {
    detail::write_atomic(path, csv_string(records));
}

inline std::string bounds_text(const std::vector<BoundReport>& reports) {
    std::string out;
    for (const auto& r : reports) {
        out += to_text(r);
        out += "\n";
    }
    return out;
}

inline std::string verdict_text(const StudyResult& result) {
    std::ostringstream os;
    os.precision(15);
    os << "problem: " << result.config.problem << "\n";
    os << "k_max: " << result.config.k_max << "\n";
    os << "verdict: " << to_string(result.verdict.verdict) << "\n";
    os << "rel_variation_norm_DTr: " << result.verdict.rel_variation_norm << "\n";
    os << "rel_variation_ratio: " << result.verdict.rel_variation_ratio << "\n";
    os << "note: " << result.verdict.note << "\n";
    return os.str();
}

/// Writes study.csv, verdict.txt and (when bounds ran) bounds.txt.
inline void write_study_outputs(const StudyResult& result) {
    if (result.config.out_dir.empty()) return;
    const std::filesystem::path dir(result.config.out_dir);
    std::filesystem::create_directories(dir);
    emit_csv(result.records, dir / "study.csv");
    detail::write_atomic(dir / "verdict.txt", verdict_text(result));
    if (!result.bound_reports.empty())
        detail::write_atomic(dir / "bounds.txt", bounds_text(result.bound_reports));
}

}  // namespace igc
