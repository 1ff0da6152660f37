#pragma once

#include <limits>
#include <span>
#include <string>
#include <vector>

#include "trunckern/config.hpp"
#include "trunckern/evolve.hpp"
#include "trunckern/metrics.hpp"

namespace trunckern {

/// One CSV row; NaN entries render as empty cells.
struct MetricRow {
    std::string experiment;
    double rho = nan_cell();
    double s = nan_cell();
    double R = nan_cell();
    double alpha = nan_cell();
    double seminorm = nan_cell();
    double harnack_c = nan_cell();
    double osc_k = nan_cell();
    double alpha_hat = nan_cell();
    std::string metric;
    double value = nan_cell();

    static double nan_cell() { return std::numeric_limits<double>::quiet_NaN(); }
};

struct RunRecord {
    ExperimentConfig config;
    std::vector<MetricRow> rows;
    std::vector<std::string> snapshot_files;  // relative names, filled by emit_report
    double wall_seconds = 0.0;
    std::vector<SpaceTimeField> fields;  // one per sub-run (kept for emit_report)
    std::vector<std::string> field_labels;
};

/// Builds a named initial profile on the grid. rough_seeded(k) is a fixed-seed
/// piecewise-constant randomization on cells of absolute width 1/8.
GridFunction build_initial_profile(const GridSpec& grid, const std::string& profile,
                                   double value, std::uint64_t seed);

Forcing build_forcing_profile(const std::string& profile, double value);

/// Materializes the kernel described by the config's kernel block.
KernelFn build_kernel(const ExperimentConfig& cfg);

/// Parses the Isaac family table: one member per line,
/// `<group> <scale> [b_1 .. b_d]`, built-in kernels sharing the config params.
std::vector<std::vector<IsaacMember>> parse_isaac_family(const std::string& path,
                                                         const KernelParams& params, int d);

/// Executes the configured pipeline (cauchy / truncation_sweep / elliptic) and
/// collects metric rows. Deterministic given the config.
RunRecord run_experiment(const ExperimentConfig& cfg);

/// Writes metrics.csv, the run manifest and the snapshot dumps into out_dir.
void emit_report(RunRecord& record, const std::string& out_dir);

/// Deterministic CSV rendering (17 significant digits, empty cells for NaN).
std::string render_csv(std::span<const MetricRow> rows);

}  // namespace trunckern
