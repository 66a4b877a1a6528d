// Command-line driver: refinement studies over the built-in problems,
// invariant verification, and problem listing.
//
// Exit codes: 0 success, 1 usage error, 2 numerical failure.

#include <cstdio>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "igc/bvp.hpp"
#include "igc/study.hpp"
#include "igc/verify.hpp"

namespace {

void print_records(const igc::StudyResult& result) {
    std::printf("%3s %12s %12s %12s %12s %11s %11s %8s %10s\n", "k", "rho", "norm_Tr", "norm_DTr",
                "ratio", "err_Tr", "err_DTr", "order", "cond_est");
    for (const auto& r : result.records) {
        std::printf("%3d %12.6g %12.8g %12.8g %12.8g %11.4g %11.4g %8.3f %10.3g\n", r.k, r.rho,
                    r.norm_Tr, r.norm_DTr, r.ratio, r.err_Tr, r.err_DTr, r.observed_order, r.cond_est);
    }
    if (result.config.norms) {
        std::printf("\n%3s %14s %14s\n", "k", "norm_D_est", "norm_I_est");
        for (const auto& r : result.records)
            std::printf("%3d %14.8g %14.8g\n", r.k, r.norm_D_est, r.norm_I_est);
    }
    if (result.config.timing) {
        std::printf("\n%3s %12s\n", "k", "wall_ms");
        for (const auto& r : result.records) std::printf("%3d %12.3f\n", r.k, r.wall_ms);
    }
    std::printf("\nverdict: %s\n", igc::to_string(result.verdict.verdict));
    std::printf("  rel variation (norm_DTr, last 3 levels): %.4g\n", result.verdict.rel_variation_norm);
    std::printf("  rel variation (ratio,    last 3 levels): %.4g\n", result.verdict.rel_variation_ratio);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"isogeometric collocation studies and consistency instrumentation"};
    app.require_subcommand(1);

    igc::StudyConfig config;
    auto* study = app.add_subcommand("study", "run a refinement study on a built-in problem");
    study->add_option("--problem", config.problem, "problem name (see `list`)")->required();
    study->add_option("--kmax", config.k_max, "largest refinement index (>= 3)")->required();
    study->add_option("--samples", config.samples, "lattice samples per knot interval (default 32/16/8 by dimension)");
    study->add_option("--seed", config.seed, "seed for the stochastic estimators");
    study->add_option("--out", config.out_dir, "output directory for study.csv / verdict.txt / bounds.txt");
    study->add_flag("--bounds", config.bounds, "instrument the consistency bounds per level");
    study->add_flag("--norms", config.norms, "estimate operator norms per level");
    study->add_flag("--timing", config.timing, "record wall time per level (CSV is no longer byte-reproducible)");
    study->set_config("--config", "", "key=value file; command-line flags win on conflict");

    auto* verify = app.add_subcommand("verify", "run the invariant suite on tiny instances");
    auto* list = app.add_subcommand("list", "list the built-in problems");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (list->parsed()) {
            for (const auto& name : igc::builtin_problem_names()) std::printf("%s\n", name.c_str());
            return 0;
        }
        if (verify->parsed()) {
            const auto results = igc::run_verify();
            bool all = true;
            for (const auto& r : results) {
                std::printf("[%s] %s: %s\n", r.pass ? "PASS" : "FAIL", r.name.c_str(), r.detail.c_str());
                all = all && r.pass;
            }
            return all ? 0 : 2;
        }
        // study
        try {
            config.validate();
            (void)igc::builtin_problem(config.problem);  // reject unknown names as usage errors
        } catch (const std::invalid_argument& e) {
            std::fprintf(stderr, "usage error: %s\n", e.what());
            return 1;
        }
        const auto result = igc::run_study(config);
        print_records(result);
        igc::write_study_outputs(result);
        if (!config.out_dir.empty())
            std::printf("wrote %s/study.csv and verdict.txt\n", config.out_dir.c_str());
        return 0;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}
