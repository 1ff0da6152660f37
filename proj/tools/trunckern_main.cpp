// trunckern: batch driver for truncated-kernel nonlocal equations.
//
// Subcommands:
//   run <config>        parse a config, execute the pipeline, emit reports
//   validate <config>   parse a config and check the kernel class conditions
//   oracle <suite>      run the independent verification suites
//   sweep <config> --rho a,b,...   truncation sweep with an explicit rho list
//
// Exit codes: 0 success, 2 config error, 3 numerical failure.

#include <cmath>
#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "trunckern/bump.hpp"
#include "trunckern/config.hpp"
#include "trunckern/errors.hpp"
#include "trunckern/experiment.hpp"
#include "trunckern/io.hpp"
#include "trunckern/kernel.hpp"
#include "trunckern/oracles.hpp"

namespace {

using namespace trunckern;

int cmd_run(const std::string& config_path) {
    ExperimentConfig cfg = parse_config(config_path);
    RunRecord record = run_experiment(cfg);
    emit_report(record, cfg.out_dir);
    std::printf("run '%s': %zu metric rows, %zu snapshot file(s) -> %s (%.2fs)\n",
                cfg.name.c_str(), record.rows.size(), record.snapshot_files.size(),
                cfg.out_dir.c_str(), record.wall_seconds);
    return 0;
}

int cmd_validate(const std::string& config_path) {
    ExperimentConfig cfg = parse_config(config_path);
    KernelFn kernel = build_kernel(cfg);
    const double h = 2.0 * cfg.grid_L / (cfg.grid_n - 1);
    std::vector<double> radii = geometric_radii(h, cfg.grid_L);
    ValidationReport rep = validate_ellipticity(kernel, radii, 64);
    std::printf("config '%s': parsed ok (digest %s)\n", cfg.name.c_str(), cfg.digest.c_str());
    std::printf("  kernel family            %s\n", cfg.kernel_family.c_str());
    std::printf("  lower bound              %s (worst ratio %.6g)\n",
                rep.lower_bound_ok ? "ok" : "VIOLATED", rep.worst_lower_ratio);
    std::printf("  annulus bound            %s (max ratio %.6g over %zu radii)\n",
                rep.annulus_bound_ok ? "ok" : "VIOLATED", rep.max_annulus_ratio,
                rep.sampled_radii.size());
    if (rep.symmetry_checked)
        std::printf("  s = 1/2 cancellation     %s (max ratio %.3g)\n",
                    rep.symmetry_ok ? "ok" : "VIOLATED", rep.max_symmetry_ratio);
    std::printf("  class nonempty (advisory) %s\n", rep.class_nonempty_ok ? "yes" : "no");
    if (!rep.ok()) {
        std::fprintf(stderr, "kernel fails the ellipticity class conditions\n");
        return 3;
    }
    return 0;
}

int oracle_half_laplacian() {
    std::puts("half-Laplacian example (d=1, s=1/2, rho=0, scale=lambda=Lambda=1):");
    KernelParams p{1, 0.5, 1.0, 1.0, 0.0};
    KernelFn kernel = make_truncated_fractional_kernel(p, 1.0);
    BumpProfile eta{2.0};
    auto u = [&eta](std::span<const double> y) {
        return 0.5 * y[0] * std::abs(y[0]) * eta.eta(y);
    };
    bool ok = true;
    for (double x : {-0.5, -0.25, -0.1, 0.1, 0.25, 0.5}) {
        const double closed = half_laplacian_example(x, eta);
        const double point[1] = {x};
        const double brute = -brute_force_operator(u, kernel, std::span<const double>(point, 1));
        const double rel = std::abs(brute - closed) / std::abs(closed);
        std::printf("  x = %+5.2f   formula % .12f   quadrature % .12f   rel %.2e\n", x, closed,
                    brute, rel);
        ok = ok && rel < 1e-6;
    }
    std::puts(ok ? "  agreement within 1e-6: ok" : "  agreement within 1e-6: FAILED");
    return ok ? 0 : 3;
}

int oracle_lemma_a1() {
    std::puts("Lemma-style kernel integral ratios (built-in family, Lambda = 2):");
    bool ok = true;
    const std::vector<double> radii = {0.1, 1.0, 10.0};
    for (double s : {0.25, 0.5, 0.75}) {
        for (double rho : {0.0, 0.25}) {
            KernelParams p{1, s, 1.0, 2.0, rho};
            KernelFn kernel = make_truncated_fractional_kernel(p, 1.0);
            LemmaA1Report rep = lemma_a1_check(kernel, radii);
            for (const auto& row : rep.rows) {
                std::printf("  s=%.2f rho=%.2f R=%-5g tail %.6g<=%.6g mid %.6g<=%.6g second %.6g<=%.6g %s\n",
                            s, rho, row.R, row.ratio_a, row.bound_a, row.ratio_b_mid,
                            row.bound_b_mid, row.ratio_e, row.bound_e, row.ok ? "ok" : "FAIL");
            }
            ok = ok && rep.all_ok;
        }
    }
    return ok ? 0 : 3;
}

int oracle_bump_bounds() {
    std::puts("extremal-operator bump scaling ||M eta_R|| R^{2s} (rho = 0, h = 1/256):");
    const std::vector<double> R_list = {1.0, 2.0, 4.0, 8.0};
    bool ok = true;
    for (double s : {0.25, 0.5, 0.75}) {
        KernelParams p{1, s, 1.0, 2.0, 0.0};
        BumpBoundReport rep = bump_bound_check(p, R_list, 1.0 / 256.0);
        for (const auto& row : rep.rows) {
            std::printf("  s=%.2f R=%-3g  minus %.6f  plus %.6f  boundary %.6f (mu %.6f) %s\n", s,
                        row.R, row.sup_minus_scaled, row.sup_plus_scaled, row.boundary_min_scaled,
                        row.mu, row.boundary_ok ? "ok" : "FAIL");
        }
        std::printf("  s=%.2f scaled sup spread: minus %.4f, plus %.4f\n", s,
                    rep.sup_ratio_minus, rep.sup_ratio_plus);
        ok = ok && rep.ok && rep.sup_ratio_minus <= 1.25 && rep.sup_ratio_plus <= 1.25;
    }
    return ok ? 0 : 3;
}

int oracle_pucci_quotient() {
    std::puts("extremal-operator Hoelder quotient (gamma switch and scaling):");
    bool ok = true;
    for (double s : {0.25, 0.5, 0.75}) {
        KernelParams p{1, s, 1.0, 2.0, 0.0};
        double qmin = 1e300, qmax = 0.0;
        double gamma = 0.0;
        for (double R : {1.0, 2.0, 4.0}) {
            GridSpec grid;
            grid.L = 2.0 * R;
            grid.n = static_cast<int>(std::lround(2.0 * grid.L * 64.0)) + 1;
            BumpProfile profile{R};
            GridFunction phi =
                sample_profile(grid, [&](std::span<const double> x) { return profile.eta(x); });
            PucciQuotientReport rep = pucci_holder_quotient(phi, p);
            gamma = rep.gamma;
            const double q = std::max(rep.quotient_minus, rep.quotient_plus);
            qmin = std::min(qmin, q);
            qmax = std::max(qmax, q);
            std::printf("  s=%.2f R=%g gamma=%.2f quotient=%.6g\n", s, R, rep.gamma, q);
        }
        const double expect = (s < 0.5) ? 1.0 - 2.0 * s : (s > 0.5 ? 2.0 - 2.0 * s : 0.5);
        ok = ok && gamma == expect && qmax / qmin <= 1.5;
        std::printf("  s=%.2f spread %.4f\n", s, qmax / qmin);
    }
    return ok ? 0 : 3;
}

int cmd_oracle(const std::string& suite) {
    if (suite == "half_laplacian") return oracle_half_laplacian();
    if (suite == "lemma_a1") return oracle_lemma_a1();
    if (suite == "bump_bounds") return oracle_bump_bounds();
    if (suite == "pucci_quotient") return oracle_pucci_quotient();
    if (suite == "all") {
        int rc = 0;
        rc = std::max(rc, oracle_half_laplacian());
        rc = std::max(rc, oracle_lemma_a1());
        rc = std::max(rc, oracle_bump_bounds());
        rc = std::max(rc, oracle_pucci_quotient());
        return rc;
    }
    throw config_error("unknown oracle suite '" + suite +
                       "' (half_laplacian | lemma_a1 | bump_bounds | pucci_quotient | all)");
}

int cmd_sweep(const std::string& config_path, const std::string& rho_csv) {
    ExperimentConfig cfg = parse_config(config_path);
    cfg.problem_kind = "truncation_sweep";
    if (!rho_csv.empty()) {
        cfg.problem_rho_list.clear();
        std::istringstream ss(rho_csv);
        std::string item;
        while (std::getline(ss, item, ',')) cfg.problem_rho_list.push_back(std::stod(item));
        for (std::size_t i = 1; i < cfg.problem_rho_list.size(); ++i)
            if (!(cfg.problem_rho_list[i] < cfg.problem_rho_list[i - 1]))
                throw config_error("--rho: list must be strictly decreasing");
    }
    if (cfg.problem_rho_list.empty())
        throw config_error("sweep: no rho list (use --rho or problem.rho_list)");
    RunRecord record = run_experiment(cfg);
    emit_report(record, cfg.out_dir);
    for (const MetricRow& row : record.rows) {
        if (row.metric == "sweep_sup_error")
            std::printf("  rho %-10g sup error %s\n", row.rho, format_g17(row.value).c_str());
    }
    std::printf("sweep '%s': %zu metric rows -> %s\n", cfg.name.c_str(), record.rows.size(),
                cfg.out_dir.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"trunckern: truncated-kernel nonlocal equation experiments"};
    app.require_subcommand(1);

    std::string config_path;
    std::string suite;
    std::string rho_csv;

    CLI::App* run = app.add_subcommand("run", "execute an experiment config");
    run->add_option("config", config_path, "config file")->required();

    CLI::App* validate = app.add_subcommand("validate", "parse a config and check the kernel");
    validate->add_option("config", config_path, "config file")->required();

    CLI::App* oracle = app.add_subcommand("oracle", "run a verification suite");
    oracle->add_option("suite", suite, "suite name or 'all'")->required();

    CLI::App* sweep = app.add_subcommand("sweep", "truncation sweep over a rho list");
    sweep->add_option("config", config_path, "config file")->required();
    sweep->add_option("--rho", rho_csv, "comma-separated decreasing rho list");

    try {
        app.parse(argc, argv);
        if (run->parsed()) return cmd_run(config_path);
        if (validate->parsed()) return cmd_validate(config_path);
        if (oracle->parsed()) return cmd_oracle(suite);
        if (sweep->parsed()) return cmd_sweep(config_path, rho_csv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const config_error& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const numerical_error& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
    return 0;
}
