#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "trunckern/kernel.hpp"

namespace trunckern {

/// Parsed experiment description (key = value lines with dotted sections).
/// Unknown keys are hard errors; every constraint violation is reported with
/// the offending key.
struct ExperimentConfig {
    std::string name;

    // kernel block
    std::string kernel_family = "truncated_fractional";  // or "user"
    std::string kernel_user_profile = "asymmetric_tilt";
    double kernel_s = 0.5;
    double kernel_rho = 0.0;
    double kernel_lambda = 1.0;
    double kernel_Lambda = 2.0;
    double kernel_scale = 1.0;

    // grid block
    int grid_d = 1;
    double grid_L = 2.0;
    int grid_n = 256;
    std::string grid_extension = "constant";  // or "periodic"
    double grid_extension_value = 0.0;

    // operator block
    std::string op_kind = "linear";  // linear | pucci_minus | pucci_plus | isaac
    double op_drift_Lambda = 0.0;    // 0 = no drift
    std::string op_isaac_family;     // path to the member table
    std::string op_near_field = "second_difference";  // or "drop"

    // time block
    double time_T = 1.0;
    double time_dt = 0.0;  // 0 = auto from the CFL fraction
    double time_cfl_fraction = 0.9;
    int time_snapshot_stride = 1;

    // problem block
    std::string problem_kind = "cauchy";  // cauchy | truncation_sweep | elliptic
    std::string problem_initial = "constant";  // constant | box | cosine | rough_seeded
    double problem_initial_value = 1.0;
    std::string problem_forcing = "zero";  // zero | constant
    double problem_forcing_value = 0.0;
    std::vector<double> problem_rho_list;

    // metrics block (enabled once metrics.R is set)
    bool metrics_enabled = false;
    double metrics_R = 0.25;
    double metrics_alpha = 0.0;  // 0 = fit alpha_hat first
    int metrics_levels = 4;
    double metrics_harnack_a = 0.0;

    // output block
    std::string out_dir = "out";
    std::string out_format = "csv";

    std::uint64_t seed = 0;

    /// FNV-1a hash of the raw config text (plus any referenced family file).
    std::string digest;

    KernelParams kernel_params() const;
};

ExperimentConfig parse_config(const std::string& path);
ExperimentConfig parse_config_text(const std::string& text, const std::string& origin);

/// Stable content hash used for the run manifest.
std::string content_digest(const std::string& bytes);

}  // namespace trunckern
