#include "trunckern/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "trunckern/errors.hpp"
#include "trunckern/io.hpp"

namespace trunckern {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    x ^= x >> 31;
    return x;
}

/// Deterministic cell-hash uniform in [0, 1): value depends on the absolute
/// cell index only, so refining the grid does not change the profile.
double rough_cell_value(std::uint64_t seed, std::span<const double> x) {
    constexpr double cell_width = 0.125;
    std::uint64_t h = splitmix64(seed ^ 0x5bf03635ull);
    for (double xk : x) {
        const auto c = static_cast<std::int64_t>(std::floor(xk / cell_width));
        h = splitmix64(h ^ static_cast<std::uint64_t>(c + 0x4000000000000000ll));
    }
    return static_cast<double>(h >> 11) * 0x1.0p-53;
}

double box_profile(std::span<const double> x) {
    double v = 1.0;
    for (double xk : x) {
        const double a = std::abs(xk);
        if (a >= 1.0) return 0.0;
        if (a > 0.75) v *= (1.0 - a) / 0.25;
    }
    return v;
}

}  // namespace

GridFunction build_initial_profile(const GridSpec& grid, const std::string& profile,
                                   double value, std::uint64_t seed) {
    if (profile == "constant") {
        return sample_profile(grid, [value](std::span<const double>) { return value; });
    }
    if (profile == "box") {
        return sample_profile(grid, [](std::span<const double> x) { return box_profile(x); });
    }
    if (profile == "cosine") {
        const double half_period = grid.periodic() ? grid.L : 2.0 * grid.L;
        return sample_profile(grid, [half_period](std::span<const double> x) {
            double v = 1.0;
            for (double xk : x) v *= std::cos(std::numbers::pi * xk / half_period);
            return v;
        });
    }
    if (profile.rfind("rough_seeded", 0) == 0) {
        std::uint64_t s = seed;
        if (profile != "rough_seeded") s = std::stoull(profile.substr(13, profile.size() - 14));
        return sample_profile(grid, [s](std::span<const double> x) { return rough_cell_value(s, x); });
    }
    throw config_error("unknown initial profile '" + profile + "'");
}

Forcing build_forcing_profile(const std::string& profile, double value) {
    Forcing f;
    if (profile == "zero") return f;
    if (profile == "constant") {
        f.f = [value](std::span<const double>, double) { return value; };
        f.sup_bound = std::abs(value);
        return f;
    }
    throw config_error("unknown forcing profile '" + profile + "'");
}

KernelFn build_kernel(const ExperimentConfig& cfg) {
    const KernelParams p = cfg.kernel_params();
    if (cfg.kernel_family == "truncated_fractional")
        return make_truncated_fractional_kernel(p, cfg.kernel_scale);
    // user: asymmetric tilt of the lower envelope, in the class when Lambda
    // leaves room for the extra 50% mass on the positive-x_1 side
    KernelParams pc = p;
    auto eval = [pc](std::span<const double> y) {
        double r2 = 0.0;
        for (double v : y) r2 += v * v;
        const double base = lower_envelope(pc, std::sqrt(r2));
        return (y[0] > 0.0) ? 1.5 * base : base;
    };
    return make_user_kernel(eval, p, /*symmetric=*/false, /*integrable=*/p.truncated());
}

std::vector<std::vector<IsaacMember>> parse_isaac_family(const std::string& path,
                                                         const KernelParams& params, int d) {
    std::ifstream in(path);
    if (!in) throw config_error("isaac family: cannot open '" + path + "'");
    std::vector<int> group_ids;
    std::vector<std::vector<IsaacMember>> family;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        std::istringstream ss(line);
        int group;
        double scale;
        if (!(ss >> group >> scale)) {
            std::string probe;
            std::istringstream retry(line);
            if (!(retry >> probe)) continue;  // blank line
            throw config_error("isaac family " + path + ":" + std::to_string(lineno) +
                               ": expected '<group> <scale> [b_1 .. b_d]'");
        }
        IsaacMember member;
        member.kernel = make_truncated_fractional_kernel(params, scale);
        double b;
        while (ss >> b) member.drift.push_back(b);
        if (!member.drift.empty() && static_cast<int>(member.drift.size()) != d)
            throw config_error("isaac family " + path + ":" + std::to_string(lineno) +
                               ": drift must have " + std::to_string(d) + " components");
        auto it = std::find(group_ids.begin(), group_ids.end(), group);
        if (it == group_ids.end()) {
            group_ids.push_back(group);
            family.emplace_back();
            family.back().push_back(std::move(member));
        } else {
            family[static_cast<std::size_t>(it - group_ids.begin())].push_back(std::move(member));
        }
    }
    if (family.empty()) throw config_error("isaac family '" + path + "' defines no members");
    return family;
}

namespace {

GridSpec make_grid(const ExperimentConfig& cfg) {
    GridSpec g;
    g.d = cfg.grid_d;
    g.L = cfg.grid_L;
    g.n = cfg.grid_n;
    g.extension = (cfg.grid_extension == "periodic")
                      ? Extension::periodic()
                      : Extension::constant(cfg.grid_extension_value);
    g.validate();
    return g;
}

OperatorConfig make_operator(const ExperimentConfig& cfg) {
    OperatorConfig op;
    op.params = cfg.kernel_params();
    op.near_field = (cfg.op_near_field == "drop") ? NearFieldMode::Drop
                                                  : NearFieldMode::SecondDifference;
    if (cfg.op_kind == "linear") {
        op.kind = OperatorKind::Linear;
        op.kernel = build_kernel(cfg);
        if (cfg.op_drift_Lambda != 0.0) {
            op.drift.assign(static_cast<std::size_t>(cfg.grid_d), 0.0);
            op.drift[0] = cfg.op_drift_Lambda;
        }
    } else if (cfg.op_kind == "pucci_minus") {
        op.kind = OperatorKind::PucciMinus;
    } else if (cfg.op_kind == "pucci_plus") {
        op.kind = OperatorKind::PucciPlus;
    } else {
        op.kind = OperatorKind::Isaac;
        op.isaac_family = parse_isaac_family(cfg.op_isaac_family, op.params, cfg.grid_d);
    }
    return op;
}

DtPolicy make_dt_policy(const ExperimentConfig& cfg) {
    return (cfg.time_dt > 0.0) ? DtPolicy::fixed(cfg.time_dt)
                               : DtPolicy::auto_cfl(cfg.time_cfl_fraction);
}

double clamp_alpha(double alpha_hat, double s) {
    const double lo = 0.05 * 2.0 * s;
    const double hi = 0.95 * 2.0 * s;
    return std::min(hi, std::max(lo, alpha_hat));
}

/// Appends the metric rows for one solved field.
void append_metrics(std::vector<MetricRow>& rows, const ExperimentConfig& cfg,
                    const SpaceTimeField& field, double rho, double alpha_override) {
    Cylinder Q;
    Q.center.assign(static_cast<std::size_t>(cfg.grid_d), 0.0);
    Q.t0 = 0.0;
    Q.R = cfg.metrics_R;
    Q.s = cfg.kernel_s;

    MetricRow base;
    base.experiment = cfg.name;
    base.rho = rho;
    base.s = cfg.kernel_s;

    // oscillation decay and the fitted exponent; shallow cylinders (too few
    // dyadic levels above max(rho, 2h)) simply skip the fit
    AlphaEstimate est;
    bool have_fit = false;
    try {
        est = estimate_alpha(field, Q, rho);
        have_fit = !est.degenerate;
    } catch (const numerical_error&) {
        have_fit = false;
    }
    {
        OscillationDecay dec = oscillation_decay(field, Q.R, cfg.metrics_levels, Q.s);
        for (std::size_t k = 0; k < dec.osc.size(); ++k) {
            MetricRow row = base;
            row.metric = "osc_decay";
            row.R = Q.R * std::pow(4.0, -static_cast<double>(k));
            row.osc_k = dec.osc[k];
            row.value = static_cast<double>(k);
            rows.push_back(row);
        }
    }
    if (have_fit) {
        MetricRow row = base;
        row.metric = "alpha_hat";
        row.R = Q.R;
        row.alpha_hat = est.alpha_hat;
        row.value = est.alpha_hat;
        rows.push_back(row);
    }

    double alpha_used = alpha_override;
    if (alpha_used <= 0.0) alpha_used = cfg.metrics_alpha;
    if (alpha_used <= 0.0) alpha_used = have_fit ? clamp_alpha(est.alpha_hat, Q.s) : Q.s;
    {
        RegularityReport rep = partial_holder_seminorm(field, Q, rho, alpha_used, cfg.seed);
        MetricRow row = base;
        row.metric = rep.degenerate ? "holder_seminorm_degenerate" : "holder_seminorm";
        row.R = Q.R;
        row.alpha = alpha_used;
        row.seminorm = rep.seminorm;
        row.value = rep.seminorm;
        rows.push_back(row);
    }
    if (!field.grid.periodic()) {
        try {
            HarnackReport rep = weak_harnack_ratio(field, Q, cfg.metrics_harnack_a);
            MetricRow row = base;
            row.metric = rep.degenerate ? "harnack_degenerate" : "harnack";
            row.R = Q.R;
            row.harnack_c = rep.empirical_c;
            row.value = rep.empirical_c;
            rows.push_back(row);
            MetricRow avg = base;
            avg.metric = "harnack_plain_average_c";
            avg.R = Q.R;
            avg.harnack_c = rep.empirical_c_plain;
            avg.value = rep.empirical_c_plain;
            rows.push_back(avg);
        } catch (const numerical_error&) {
            // the nonnegativity hypothesis failed; record it loudly instead of
            // a constant
            MetricRow row = base;
            row.metric = "harnack_hypothesis_violated";
            row.R = Q.R;
            double mn = std::numeric_limits<double>::infinity();
            for (const auto& snap : field.snapshots)
                for (double v : snap) mn = std::min(mn, v);
            row.value = mn;
            rows.push_back(row);
        }
    }
}

double fit_alpha_for_sweep(const ExperimentConfig& cfg, const SpaceTimeField& ref_field,
                           double ref_rho) {
    if (cfg.metrics_alpha > 0.0) return cfg.metrics_alpha;
    Cylinder Q;
    Q.center.assign(static_cast<std::size_t>(cfg.grid_d), 0.0);
    Q.R = cfg.metrics_R;
    Q.s = cfg.kernel_s;
    try {
        AlphaEstimate est = estimate_alpha(ref_field, Q, ref_rho);
        if (!est.degenerate) return clamp_alpha(est.alpha_hat, Q.s);
    } catch (const numerical_error&) {
        // not enough levels; fall through to the midpoint default
    }
    return Q.s;
}

}  // namespace

RunRecord run_experiment(const ExperimentConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    RunRecord record;
    record.config = cfg;

    const GridSpec grid = make_grid(cfg);
    const OperatorConfig op = make_operator(cfg);

    if (cfg.problem_kind == "cauchy") {
        EvolutionConfig ecfg;
        ecfg.grid = grid;
        ecfg.op = op;
        ecfg.forcing = build_forcing_profile(cfg.problem_forcing, cfg.problem_forcing_value);
        ecfg.initial = build_initial_profile(grid, cfg.problem_initial, cfg.problem_initial_value,
                                             cfg.seed);
        ecfg.horizon = cfg.time_T;
        ecfg.dt_policy = make_dt_policy(cfg);
        ecfg.snapshot_stride = cfg.time_snapshot_stride;

        SpaceTimeField field = solve_cauchy(ecfg);
        if (cfg.metrics_enabled) append_metrics(record.rows, cfg, field, cfg.kernel_rho, 0.0);
        record.fields.push_back(std::move(field));
        record.field_labels.push_back("run");
    } else if (cfg.problem_kind == "truncation_sweep") {
        EvolutionConfig base;
        base.grid = grid;
        base.op = op;
        base.forcing = build_forcing_profile(cfg.problem_forcing, cfg.problem_forcing_value);
        base.initial = build_initial_profile(grid, cfg.problem_initial, cfg.problem_initial_value,
                                             cfg.seed);
        base.horizon = cfg.time_T;
        base.dt_policy = make_dt_policy(cfg);
        base.snapshot_stride = cfg.time_snapshot_stride;

        auto with_rho = [&](double rho) {
            EvolutionConfig c = base;
            c.op.params.rho = rho;
            if (c.op.kind == OperatorKind::Linear) {
                ExperimentConfig kc = cfg;
                kc.kernel_rho = rho;
                c.op.kernel = build_kernel(kc);
            }
            return c;
        };

        // common dt from the most restrictive entry
        double worst_mass = 0.0;
        for (double rho : cfg.problem_rho_list) {
            EvolutionConfig c = with_rho(rho);
            worst_mass = std::max(worst_mass, NonlocalOperator(c.grid, c.op).node_mass());
        }
        const double theta = (cfg.time_dt > 0.0) ? 1.0 : cfg.time_cfl_fraction;
        double dt = (worst_mass > 0.0) ? theta / worst_mass : cfg.time_T;
        if (cfg.time_dt > 0.0) dt = std::min(dt, cfg.time_dt);

        for (double rho : cfg.problem_rho_list) {
            EvolutionConfig c = with_rho(rho);
            c.dt_policy = DtPolicy::fixed(dt);
            record.fields.push_back(solve_cauchy(c));
            std::ostringstream label;
            label << "rho_" << rho;
            record.field_labels.push_back(label.str());
        }

        const std::size_t ref = record.fields.size() - 1;
        const double ref_rho = cfg.problem_rho_list.back();
        for (std::size_t i = 0; i < record.fields.size(); ++i) {
            double err = 0.0;
            for (std::size_t ti = 0; ti < record.fields[i].snapshots.size(); ++ti)
                for (std::size_t f = 0; f < record.fields[i].snapshots[ti].size(); ++f)
                    err = std::max(err, std::abs(record.fields[i].snapshots[ti][f] -
                                                 record.fields[ref].snapshots[ti][f]));
            MetricRow row;
            row.experiment = cfg.name;
            row.rho = cfg.problem_rho_list[i];
            row.s = cfg.kernel_s;
            row.metric = "sweep_sup_error";
            row.value = err;
            record.rows.push_back(row);
        }
        if (cfg.metrics_enabled) {
            const double alpha = fit_alpha_for_sweep(cfg, record.fields[ref], ref_rho);
            for (std::size_t i = 0; i < record.fields.size(); ++i)
                append_metrics(record.rows, cfg, record.fields[i], cfg.problem_rho_list[i], alpha);
        }
    } else {  // elliptic
        GridFunction f = sample_profile(grid, [&](std::span<const double> x) {
            Forcing fo = build_forcing_profile(cfg.problem_forcing, cfg.problem_forcing_value);
            return fo(x, 0.0);
        });
        GridFunction exterior(grid, cfg.grid_extension_value);
        exterior.spec.extension = Extension::constant(cfg.grid_extension_value);

        GridFunction u = solve_elliptic(grid, op, f, exterior);

        NonlocalOperator engine(u.spec, op);
        GridFunction fu = engine.apply(u);
        double residual = 0.0;
        for (std::size_t i = 0; i < u.values.size(); ++i)
            residual = std::max(residual, std::abs(fu.values[i] - f.values[i]));
        MetricRow row;
        row.experiment = cfg.name;
        row.rho = cfg.kernel_rho;
        row.s = cfg.kernel_s;
        row.metric = "elliptic_residual";
        row.value = residual;
        record.rows.push_back(row);

        SpaceTimeField field;
        field.grid = u.spec;
        field.dt = 1.0;
        field.times = {0.0};
        field.snapshots = {u.values};
        if (cfg.metrics_enabled) append_metrics(record.rows, cfg, field, cfg.kernel_rho, 0.0);
        record.fields.push_back(std::move(field));
        record.field_labels.push_back("elliptic");
    }

    record.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return record;
}

std::string render_csv(std::span<const MetricRow> rows) {
    std::ostringstream out;
    out << "experiment,rho,s,R,alpha,seminorm,harnack_c,osc_k,alpha_hat,metric,value\n";
    auto cell = [](double v) { return std::isnan(v) ? std::string() : format_g17(v); };
    for (const MetricRow& r : rows) {
        out << r.experiment << ',' << cell(r.rho) << ',' << cell(r.s) << ',' << cell(r.R) << ','
            << cell(r.alpha) << ',' << cell(r.seminorm) << ',' << cell(r.harnack_c) << ','
            << cell(r.osc_k) << ',' << cell(r.alpha_hat) << ',' << r.metric << ','
            << cell(r.value) << '\n';
    }
    return out.str();
}

void emit_report(RunRecord& record, const std::string& out_dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw config_error("emit_report: cannot create output directory '" + out_dir + "'");

    const fs::path dir(out_dir);
    {
        std::ofstream csv(dir / "metrics.csv", std::ios::binary);
        if (!csv) throw config_error("emit_report: cannot write metrics.csv in '" + out_dir + "'");
        csv << render_csv(record.rows);
    }
    record.snapshot_files.clear();
    for (std::size_t i = 0; i < record.fields.size(); ++i) {
        const std::string fname = "snapshots_" + record.field_labels[i] + ".txt";
        write_snapshots(record.fields[i], (dir / fname).string());
        record.snapshot_files.push_back(fname);
    }
    {
        std::ofstream man(dir / "run.manifest", std::ios::binary);
        if (!man) throw config_error("emit_report: cannot write run.manifest in '" + out_dir + "'");
        man << "name = " << record.config.name << "\n";
        man << "digest = " << record.config.digest << "\n";
        man << "problem = " << record.config.problem_kind << "\n";
        man << "rows = " << record.rows.size() << "\n";
        for (const auto& f : record.snapshot_files) man << "snapshot = " << f << "\n";
        man << "wall_ms = " << static_cast<long>(record.wall_seconds * 1000.0) << "\n";
    }
}

}  // namespace trunckern
