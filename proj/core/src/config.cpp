#include "trunckern/config.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "trunckern/errors.hpp"

namespace trunckern {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

double parse_double(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        double out = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument("trailing characters");
        if (!std::isfinite(out)) throw std::invalid_argument("non-finite");
        return out;
    } catch (const std::exception&) {
        throw config_error("config key '" + key + "': expected a number, got '" + v + "'");
    }
}

int parse_int(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        long out = std::stol(v, &used);
        if (used != v.size()) throw std::invalid_argument("trailing characters");
        return static_cast<int>(out);
    } catch (const std::exception&) {
        throw config_error("config key '" + key + "': expected an integer, got '" + v + "'");
    }
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        unsigned long long out = std::stoull(v, &used);
        if (used != v.size()) throw std::invalid_argument("trailing characters");
        return out;
    } catch (const std::exception&) {
        throw config_error("config key '" + key + "': expected an unsigned integer, got '" + v + "'");
    }
}

std::vector<double> parse_list(const std::string& key, const std::string& v) {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) throw config_error("config key '" + key + "': empty list entry");
        out.push_back(parse_double(key, item));
    }
    if (out.empty()) throw config_error("config key '" + key + "': empty list");
    return out;
}

}  // namespace

std::string content_digest(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ull;  // FNV-1a
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    std::ostringstream os;
    os << std::hex << h;
    return os.str();
}

KernelParams ExperimentConfig::kernel_params() const {
    KernelParams p;
    p.d = grid_d;
    p.s = kernel_s;
    p.lambda = kernel_lambda;
    p.Lambda = kernel_Lambda;
    p.rho = kernel_rho;
    return p;
}

ExperimentConfig parse_config_text(const std::string& text, const std::string& origin) {
    ExperimentConfig cfg;
    bool has_name = false;

    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw config_error(origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw config_error(origin + ":" + std::to_string(lineno) + ": empty key or value");

        if (key == "name") {
            cfg.name = value;
            has_name = true;
        } else if (key == "seed") {
            cfg.seed = parse_u64(key, value);
        } else if (key == "kernel.family") {
            if (value != "truncated_fractional" && value != "user")
                throw config_error("kernel.family must be 'truncated_fractional' or 'user'");
            cfg.kernel_family = value;
        } else if (key == "kernel.user_profile") {
            cfg.kernel_user_profile = value;
        } else if (key == "kernel.s") {
            cfg.kernel_s = parse_double(key, value);
        } else if (key == "kernel.rho") {
            cfg.kernel_rho = parse_double(key, value);
        } else if (key == "kernel.lambda") {
            cfg.kernel_lambda = parse_double(key, value);
        } else if (key == "kernel.Lambda") {
            cfg.kernel_Lambda = parse_double(key, value);
        } else if (key == "kernel.scale") {
            cfg.kernel_scale = parse_double(key, value);
        } else if (key == "grid.d") {
            cfg.grid_d = parse_int(key, value);
        } else if (key == "grid.L") {
            cfg.grid_L = parse_double(key, value);
        } else if (key == "grid.n") {
            cfg.grid_n = parse_int(key, value);
        } else if (key == "grid.extension") {
            if (value != "constant" && value != "periodic")
                throw config_error("grid.extension must be 'constant' or 'periodic'");
            cfg.grid_extension = value;
        } else if (key == "grid.extension_value") {
            cfg.grid_extension_value = parse_double(key, value);
        } else if (key == "op.kind") {
            if (value != "linear" && value != "pucci_minus" && value != "pucci_plus" &&
                value != "isaac")
                throw config_error("op.kind must be linear | pucci_minus | pucci_plus | isaac");
            cfg.op_kind = value;
        } else if (key == "op.drift_Lambda") {
            cfg.op_drift_Lambda = parse_double(key, value);
        } else if (key == "op.isaac_family") {
            cfg.op_isaac_family = value;
        } else if (key == "op.near_field") {
            if (value != "second_difference" && value != "drop")
                throw config_error("op.near_field must be 'second_difference' or 'drop'");
            cfg.op_near_field = value;
        } else if (key == "time.T") {
            cfg.time_T = parse_double(key, value);
        } else if (key == "time.dt") {
            cfg.time_dt = parse_double(key, value);
        } else if (key == "time.cfl_fraction") {
            cfg.time_cfl_fraction = parse_double(key, value);
        } else if (key == "time.snapshot_stride") {
            cfg.time_snapshot_stride = parse_int(key, value);
        } else if (key == "problem.kind") {
            if (value != "cauchy" && value != "truncation_sweep" && value != "elliptic")
                throw config_error("problem.kind must be cauchy | truncation_sweep | elliptic");
            cfg.problem_kind = value;
        } else if (key == "problem.initial") {
            cfg.problem_initial = value;
        } else if (key == "problem.initial_value") {
            cfg.problem_initial_value = parse_double(key, value);
        } else if (key == "problem.forcing") {
            if (value != "zero" && value != "constant")
                throw config_error("problem.forcing must be 'zero' or 'constant'");
            cfg.problem_forcing = value;
        } else if (key == "problem.forcing_value") {
            cfg.problem_forcing_value = parse_double(key, value);
        } else if (key == "problem.rho_list") {
            cfg.problem_rho_list = parse_list(key, value);
        } else if (key == "metrics.R") {
            cfg.metrics_R = parse_double(key, value);
            cfg.metrics_enabled = true;
        } else if (key == "metrics.alpha") {
            cfg.metrics_alpha = parse_double(key, value);
        } else if (key == "metrics.levels") {
            cfg.metrics_levels = parse_int(key, value);
        } else if (key == "metrics.harnack_a") {
            cfg.metrics_harnack_a = parse_double(key, value);
        } else if (key == "out.dir") {
            cfg.out_dir = value;
        } else if (key == "out.format") {
            if (value != "csv") throw config_error("out.format: only 'csv' is supported");
            cfg.out_format = value;
        } else {
            throw config_error(origin + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
        }
    }

    if (!has_name) throw config_error(origin + ": missing required key 'name'");

    // Structural validation, each constraint named after its key.
    cfg.kernel_params().validate();
    if (cfg.kernel_scale < cfg.kernel_lambda)
        throw config_error("kernel.scale: must be >= kernel.lambda (pointwise lower bound)");
    if (cfg.grid_n < 8) throw config_error("grid.n: must be >= 8");
    if (!(cfg.grid_L > 0.0)) throw config_error("grid.L: must be positive");
    if (cfg.grid_d < 1 || cfg.grid_d > 3) throw config_error("grid.d: must be 1, 2 or 3");
    if (cfg.op_drift_Lambda != 0.0) {
        if (cfg.kernel_s < 0.5) throw config_error("op.drift_Lambda: drift requires s >= 1/2");
        if (cfg.op_drift_Lambda < 0.0 || cfg.op_drift_Lambda > cfg.kernel_Lambda)
            throw config_error("op.drift_Lambda: must lie in [0, kernel.Lambda]");
        if (cfg.op_kind != "linear")
            throw config_error("op.drift_Lambda: explicit drift applies to op.kind = linear only");
    }
    if (cfg.op_kind == "isaac" && cfg.op_isaac_family.empty())
        throw config_error("op.isaac_family: required for op.kind = isaac");
    if (!(cfg.time_T > 0.0)) throw config_error("time.T: must be positive");
    if (cfg.time_dt < 0.0) throw config_error("time.dt: must be >= 0 (0 = auto)");
    if (!(cfg.time_cfl_fraction > 0.0 && cfg.time_cfl_fraction <= 1.0))
        throw config_error("time.cfl_fraction: must lie in (0, 1]");
    if (cfg.time_snapshot_stride < 1) throw config_error("time.snapshot_stride: must be >= 1");
    if (cfg.problem_kind == "truncation_sweep") {
        if (cfg.problem_rho_list.empty())
            throw config_error("problem.rho_list: required for truncation_sweep");
        for (std::size_t i = 0; i < cfg.problem_rho_list.size(); ++i) {
            if (cfg.problem_rho_list[i] < 0.0)
                throw config_error("problem.rho_list: entries must be >= 0");
            if (i > 0 && !(cfg.problem_rho_list[i] < cfg.problem_rho_list[i - 1]))
                throw config_error("problem.rho_list: must be strictly decreasing");
        }
    }
    {
        const std::string& ini = cfg.problem_initial;
        const bool rough = ini.rfind("rough_seeded", 0) == 0;
        if (ini != "constant" && ini != "box" && ini != "cosine" && !rough)
            throw config_error("problem.initial: unknown profile '" + ini + "'");
        if (rough && ini != "rough_seeded") {
            // accept rough_seeded(<seed>)
            if (ini.size() < 14 || ini[12] != '(' || ini.back() != ')')
                throw config_error("problem.initial: expected rough_seeded or rough_seeded(<seed>)");
            parse_u64("problem.initial", ini.substr(13, ini.size() - 14));
        }
    }
    if (cfg.kernel_family == "user" && cfg.kernel_user_profile != "asymmetric_tilt")
        throw config_error("kernel.user_profile: unknown profile '" + cfg.kernel_user_profile + "'");
    if (cfg.metrics_enabled) {
        if (!(cfg.metrics_R > 0.0)) throw config_error("metrics.R: must be positive");
        if (cfg.metrics_R > cfg.grid_L)
            throw config_error("metrics.R: cylinder must fit inside the grid box");
        if (cfg.metrics_alpha < 0.0 || cfg.metrics_alpha >= 2.0 * cfg.kernel_s)
            throw config_error("metrics.alpha: must lie in [0, 2s) (0 = fit)");
        if (cfg.metrics_levels < 1) throw config_error("metrics.levels: must be >= 1");
        if (cfg.metrics_harnack_a < 0.0) throw config_error("metrics.harnack_a: must be >= 0");
    }
    return cfg;
}

ExperimentConfig parse_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw config_error("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    std::string text = buf.str();
    ExperimentConfig cfg = parse_config_text(text, path);
    std::string hashed = text;
    if (!cfg.op_isaac_family.empty()) {
        std::ifstream fam(cfg.op_isaac_family, std::ios::binary);
        if (!fam)
            throw config_error("op.isaac_family: cannot open '" + cfg.op_isaac_family + "'");
        std::ostringstream fbuf;
        fbuf << fam.rdbuf();
        hashed += fbuf.str();
    }
    cfg.digest = content_digest(hashed);
    return cfg;
}

}  // namespace trunckern
