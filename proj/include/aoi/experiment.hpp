// Scenario configuration, parameter sweeps and the analytic-vs-simulation
// validation report behind the CLI subcommands.
//
// Configuration precedence is flags > file > defaults; the defaults alone
// reproduce the reference setup (N = 150 bits, T_u = 0.006, 4.5 dB).
// Sweep tables are emitted in a fixed order (scheme, then lambda, then m,
// ascending) so output files are reproducible byte for byte.

#pragma once

#include <algorithm>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "aoi/analytics.hpp"
#include "aoi/channel.hpp"
#include "aoi/csv.hpp"
#include "aoi/optimizer.hpp"
#include "aoi/simulator.hpp"

namespace aoi {

/// Configuration or input validation problem; the CLI maps this to exit
/// code 2 (as opposed to exit 1, scientific validation failure).
class config_error : public std::runtime_error {
  public:
    explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

struct MRange {
    int lo = 110;
    int hi = 1000;
    int step = 10;

    std::vector<int> values() const {
        std::vector<int> v;
        for (int m = lo; m <= hi; m += step) v.push_back(m);
        return v;
    }
};

struct ScenarioConfig {
    int payload_bits = 150;
    double symbol_time = 0.006;
    double snr_db = 4.5;

    // per-command defaults apply when a field was never configured
    std::optional<std::vector<double>> gen_rates;
    std::optional<MRange> m_range;
    std::optional<std::vector<SchemeKind>> schemes;

    SimSettings sim;

    // optimize settings
    double lambda_lo = 0.05;
    double lambda_hi = 1.2;
    int lambda_points = 20;
    double search_lo = 110;
    double search_hi = 5000;
    bool exhaustive_check = true;
    int fcfs_step = 10;
    long fcfs_target_deliveries = 20000;
    int fcfs_replications = 10;

    std::string output_path;  // empty: CLI picks aoi_<command>.csv

    ChannelConfig channel() const { return ChannelConfig::from_db(payload_bits, snr_db); }
    LinkTiming timing(double lambda) const { return LinkTiming{symbol_time, lambda}; }

    std::vector<double> resolved_gen_rates() const {
        return gen_rates ? *gen_rates : std::vector<double>{0.1, 0.33, 1.0};
    }
    /// Log-spaced lambda sweep for optimization unless rates were configured.
    std::vector<double> resolved_lambda_sweep() const {
        if (gen_rates) return *gen_rates;
        std::vector<double> v;
        for (int i = 0; i < lambda_points; ++i) {
            const double t = lambda_points == 1 ? 0.0
                                                : static_cast<double>(i) /
                                                      static_cast<double>(lambda_points - 1);
            v.push_back(lambda_lo * std::pow(lambda_hi / lambda_lo, t));
        }
        return v;
    }
    std::vector<int> resolved_analyze_ms() const {
        return m_range ? m_range->values() : MRange{110, 1000, 10}.values();
    }
    /// Validation-grade grids default to the three reference blocklengths.
    std::vector<int> resolved_sim_ms() const {
        return m_range ? m_range->values() : std::vector<int>{150, 200, 300};
    }
    std::vector<SchemeKind> resolved_schemes(bool with_fcfs_default) const {
        if (schemes) return *schemes;
        if (with_fcfs_default)
            return {SchemeKind::NP, SchemeKind::PR, SchemeKind::RT, SchemeKind::FCFS};
        return {SchemeKind::NP, SchemeKind::PR, SchemeKind::RT};
    }
};

namespace detail {

template <typename T>
T get_field(const nlohmann::json& j, const std::string& section, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw config_error("config field '" + section + key + "': " + e.what());
    }
}

inline void reject_unknown_keys(const nlohmann::json& j, const std::string& section,
                                std::initializer_list<const char*> allowed) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = false;
        for (const char* k : allowed)
            if (it.key() == k) known = true;
        if (!known) throw config_error("unknown config key '" + section + it.key() + "'");
    }
}

}  // namespace detail

inline ScenarioConfig parse_config_json(const nlohmann::json& j) {
    using detail::get_field;
    ScenarioConfig cfg;
    detail::reject_unknown_keys(
        j, "", {"payload_bits", "symbol_time", "snr_db", "gen_rates", "m_range", "schemes", "sim",
                "optimize", "output_path"});
    cfg.payload_bits = get_field(j, "", "payload_bits", cfg.payload_bits);
    cfg.symbol_time = get_field(j, "", "symbol_time", cfg.symbol_time);
    cfg.snr_db = get_field(j, "", "snr_db", cfg.snr_db);
    cfg.output_path = get_field(j, "", "output_path", cfg.output_path);
    if (j.contains("gen_rates"))
        cfg.gen_rates = get_field(j, "", "gen_rates", std::vector<double>{});
    if (j.contains("m_range")) {
        const auto& r = j.at("m_range");
        detail::reject_unknown_keys(r, "m_range.", {"lo", "hi", "step"});
        MRange mr;
        mr.lo = get_field(r, "m_range.", "lo", mr.lo);
        mr.hi = get_field(r, "m_range.", "hi", mr.hi);
        mr.step = get_field(r, "m_range.", "step", mr.step);
        cfg.m_range = mr;
    }
    if (j.contains("schemes")) {
        std::vector<SchemeKind> out;
        for (const std::string& name : get_field(j, "", "schemes", std::vector<std::string>{})) {
            try {
                out.push_back(scheme_from_string(name));
            } catch (const std::invalid_argument& e) {
                throw config_error(std::string("config field 'schemes': ") + e.what());
            }
        }
        cfg.schemes = out;
    }
    if (j.contains("sim")) {
        const auto& s = j.at("sim");
        detail::reject_unknown_keys(
            s, "sim.", {"target_deliveries", "replications", "warmup_fraction", "base_seed"});
        cfg.sim.target_deliveries =
            get_field(s, "sim.", "target_deliveries", cfg.sim.target_deliveries);
        cfg.sim.replications = get_field(s, "sim.", "replications", cfg.sim.replications);
        cfg.sim.warmup_fraction = get_field(s, "sim.", "warmup_fraction", cfg.sim.warmup_fraction);
        cfg.sim.base_seed = get_field(s, "sim.", "base_seed", cfg.sim.base_seed);
    }
    if (j.contains("optimize")) {
        const auto& o = j.at("optimize");
        detail::reject_unknown_keys(o, "optimize.",
                                    {"lambda_lo", "lambda_hi", "lambda_points", "search_lo",
                                     "search_hi", "exhaustive_check", "fcfs_step",
                                     "fcfs_target_deliveries", "fcfs_replications"});
        cfg.lambda_lo = get_field(o, "optimize.", "lambda_lo", cfg.lambda_lo);
        cfg.lambda_hi = get_field(o, "optimize.", "lambda_hi", cfg.lambda_hi);
        cfg.lambda_points = get_field(o, "optimize.", "lambda_points", cfg.lambda_points);
        cfg.search_lo = get_field(o, "optimize.", "search_lo", cfg.search_lo);
        cfg.search_hi = get_field(o, "optimize.", "search_hi", cfg.search_hi);
        cfg.exhaustive_check = get_field(o, "optimize.", "exhaustive_check", cfg.exhaustive_check);
        cfg.fcfs_step = get_field(o, "optimize.", "fcfs_step", cfg.fcfs_step);
        cfg.fcfs_target_deliveries =
            get_field(o, "optimize.", "fcfs_target_deliveries", cfg.fcfs_target_deliveries);
        cfg.fcfs_replications =
            get_field(o, "optimize.", "fcfs_replications", cfg.fcfs_replications);
    }
    return cfg;
}

inline ScenarioConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file '" + path + "'");
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw config_error("config file '" + path + "': " + e.what());
    }
    return parse_config_json(j);
}

/// Field-level validation shared by all commands; analyze/validate
/// additionally restrict schemes to the ones with closed forms.
inline void validate_config(const ScenarioConfig& cfg, bool closed_form_only) {
    if (cfg.payload_bits < 1) throw config_error("payload_bits must be >= 1");
    if (!(cfg.symbol_time > 0)) throw config_error("symbol_time must be positive");
    if (!std::isfinite(cfg.snr_db)) throw config_error("snr_db must be finite");
    if (cfg.gen_rates) {
        if (cfg.gen_rates->empty()) throw config_error("gen_rates must not be empty");
        for (double l : *cfg.gen_rates)
            if (!(l > 0) || !std::isfinite(l)) throw config_error("gen_rates entries must be positive");
    }
    if (cfg.m_range) {
        if (cfg.m_range->lo < 1 || cfg.m_range->hi < cfg.m_range->lo || cfg.m_range->step < 1)
            throw config_error("m_range requires 1 <= lo <= hi and step >= 1");
    }
    if (cfg.schemes) {
        if (cfg.schemes->empty()) throw config_error("schemes must not be empty");
        if (closed_form_only)
            for (SchemeKind s : *cfg.schemes)
                if (s == SchemeKind::FCFS)
                    throw config_error("schemes: FCFS has no closed form; it is valid only for "
                                       "simulate/optimize");
    }
    try {
        cfg.sim.validate();
    } catch (const std::domain_error& e) {
        throw config_error(std::string("sim: ") + e.what());
    }
    if (!(cfg.lambda_lo > 0) || !(cfg.lambda_hi >= cfg.lambda_lo) || cfg.lambda_points < 1)
        throw config_error("optimize lambda sweep requires 0 < lambda_lo <= lambda_hi, points >= 1");
    if (!(cfg.search_lo >= 1) || !(cfg.search_hi > cfg.search_lo))
        throw config_error("optimize search range requires 1 <= search_lo < search_hi");
    if (cfg.fcfs_step < 1 || cfg.fcfs_target_deliveries < 1 || cfg.fcfs_replications < 1)
        throw config_error("optimize FCFS settings must be positive");
}

// ---------------------------------------------------------------------------
// sweep tables

struct SweepRow {
    SchemeKind scheme = SchemeKind::NP;
    double lambda = 0.0;
    int m = 0;
    double M = 0.0;
    double epsilon = 0.0;
    std::optional<double> analytic_aoi;
    std::optional<double> analytic_peak_aoi;
    std::optional<double> simulated_aoi;
    std::optional<double> ci95;
    std::vector<std::string> flags;
};

inline std::string join_flags(const std::vector<std::string>& flags) {
    std::string out;
    for (const std::string& f : flags) {
        if (!out.empty()) out += ';';
        out += f;
    }
    return out;
}

inline void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
    os << "scheme,lambda,m,M,epsilon,analytic_aoi,analytic_peak_aoi,simulated_aoi,ci95,flags\n";
    for (const SweepRow& r : rows) {
        os << to_string(r.scheme) << ',' << format_csv_double(r.lambda) << ',' << r.m << ','
           << format_csv_double(r.M) << ',' << format_csv_double(r.epsilon) << ','
           << format_csv_double(r.analytic_aoi) << ',' << format_csv_double(r.analytic_peak_aoi)
           << ',' << format_csv_double(r.simulated_aoi) << ',' << format_csv_double(r.ci95) << ','
           << csv_escape(join_flags(r.flags)) << '\n';
    }
}

namespace detail {

inline std::vector<SchemeKind> sorted_schemes(std::vector<SchemeKind> v) {
    std::sort(v.begin(), v.end(),
              [](SchemeKind a, SchemeKind b) { return static_cast<int>(a) < static_cast<int>(b); });
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

inline std::vector<double> sorted_values(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

inline SweepRow make_base_row(SchemeKind scheme, double lambda, int m, const ScenarioConfig& cfg,
                              const ChannelConfig& ch) {
    SweepRow row;
    row.scheme = scheme;
    row.lambda = lambda;
    row.m = m;
    row.M = cfg.symbol_time * m;
    row.epsilon = bler(Blocklength{m}, ch);
    if (Blocklength{m}.loose_approximation()) row.flags.push_back("loose_approx");
    return row;
}

}  // namespace detail

/// Closed-form sweep over (scheme, lambda, m); schemes must have closed
/// forms. Rows where eps(m) ~ 1 keep their channel columns but carry no
/// age value and are flagged.
inline std::vector<SweepRow> run_analyze(const ScenarioConfig& cfg) {
    validate_config(cfg, /*closed_form_only=*/true);
    const ChannelConfig ch = cfg.channel();
    std::vector<SweepRow> rows;
    for (SchemeKind scheme : detail::sorted_schemes(cfg.resolved_schemes(false)))
        for (double lambda : detail::sorted_values(cfg.resolved_gen_rates()))
            for (int m : cfg.resolved_analyze_ms()) {
                SweepRow row = detail::make_base_row(scheme, lambda, m, cfg, ch);
                if (row.epsilon >= 1.0 - 1e-12) {
                    row.flags.push_back("undefined");
                } else {
                    const AoiMoments mo = scheme_aoi(scheme, Blocklength{m}, ch, cfg.timing(lambda));
                    row.analytic_aoi = mo.avg_aoi;
                    row.analytic_peak_aoi = mo.peak_aoi;
                }
                rows.push_back(std::move(row));
            }
    return rows;
}

/// Simulation sweep; FCFS rows are allowed, with the analytic columns
/// blank and unstable points flagged instead of simulated.
inline std::vector<SweepRow> run_simulate(const ScenarioConfig& cfg) {
    validate_config(cfg, /*closed_form_only=*/false);
    const ChannelConfig ch = cfg.channel();
    std::vector<SweepRow> rows;
    for (SchemeKind scheme : detail::sorted_schemes(cfg.resolved_schemes(false)))
        for (double lambda : detail::sorted_values(cfg.resolved_gen_rates()))
            for (int m : cfg.resolved_sim_ms()) {
                SweepRow row = detail::make_base_row(scheme, lambda, m, cfg, ch);
                const LinkTiming timing = cfg.timing(lambda);
                if (row.epsilon >= 1.0 - 1e-12) {
                    row.flags.push_back(scheme == SchemeKind::FCFS ? "unstable" : "undefined");
                    rows.push_back(std::move(row));
                    continue;
                }
                if (scheme != SchemeKind::FCFS) {
                    const AoiMoments mo = scheme_aoi(scheme, Blocklength{m}, ch, timing);
                    row.analytic_aoi = mo.avg_aoi;
                    row.analytic_peak_aoi = mo.peak_aoi;
                }
                const SimResult sim = simulate(scheme, Blocklength{m}, ch, timing, cfg.sim);
                if (!sim.stable) {
                    row.flags.push_back("unstable");
                } else {
                    row.simulated_aoi = sim.mean_aoi;
                    row.ci95 = sim.ci_halfwidth_95;
                }
                rows.push_back(std::move(row));
            }
    return rows;
}

// ---------------------------------------------------------------------------
// optimization sweep

struct OptimizeRow {
    SchemeKind scheme = SchemeKind::NP;
    double lambda = 0.0;
    std::optional<int> m_opt;
    std::optional<double> m_continuous;
    std::optional<double> aoi_at_optimum;
    std::string method;
    bool converged = false;
    std::optional<int> m_exhaustive;
    std::optional<double> aoi_exhaustive;
    std::vector<std::string> flags;
};

inline void write_optimize_csv(std::ostream& os, const std::vector<OptimizeRow>& rows) {
    os << "scheme,lambda,m_opt,m_continuous,aoi_at_optimum,method,converged,"
          "m_exhaustive,aoi_exhaustive,flags\n";
    for (const OptimizeRow& r : rows) {
        os << to_string(r.scheme) << ',' << format_csv_double(r.lambda) << ','
           << (r.m_opt ? std::to_string(*r.m_opt) : std::string{}) << ','
           << format_csv_double(r.m_continuous) << ',' << format_csv_double(r.aoi_at_optimum) << ','
           << r.method << ',' << (r.converged ? "true" : "false") << ','
           << (r.m_exhaustive ? std::to_string(*r.m_exhaustive) : std::string{}) << ','
           << format_csv_double(r.aoi_exhaustive) << ',' << csv_escape(join_flags(r.flags)) << '\n';
    }
}

/// Optimal blocklength per (scheme, lambda): stationarity root-finding
/// with a recorded exhaustive cross-check for the closed-form schemes,
/// simulation grid search for FCFS.
inline std::vector<OptimizeRow> run_optimize(const ScenarioConfig& cfg) {
    validate_config(cfg, /*closed_form_only=*/false);
    const ChannelConfig ch = cfg.channel();
    std::vector<OptimizeRow> rows;
    const MRange fcfs_range = cfg.m_range ? *cfg.m_range : MRange{110, 1000, cfg.fcfs_step};
    for (SchemeKind scheme : detail::sorted_schemes(cfg.resolved_schemes(true)))
        for (double lambda : detail::sorted_values(cfg.resolved_lambda_sweep())) {
            OptimizeRow row;
            row.scheme = scheme;
            row.lambda = lambda;
            const LinkTiming timing = cfg.timing(lambda);
            if (scheme == SchemeKind::FCFS) {
                SimSettings fcfs_sim = cfg.sim;
                fcfs_sim.target_deliveries = cfg.fcfs_target_deliveries;
                fcfs_sim.replications = cfg.fcfs_replications;
                fcfs_sim.scheme = SchemeKind::FCFS;
                try {
                    const OptimizationResult r =
                        fcfs_grid_optimize(ch, timing, fcfs_range.lo, fcfs_range.hi,
                                           fcfs_range.step, fcfs_sim);
                    row.m_opt = r.m_integer;
                    row.m_continuous = r.m_continuous;
                    row.aoi_at_optimum = r.aoi_at_optimum;
                    row.method = to_string(r.method);
                    row.converged = r.converged;
                    if (!r.unstable_points.empty()) row.flags.push_back("partially_unstable");
                } catch (const std::domain_error&) {
                    row.method = to_string(OptimizeMethod::simulation_grid);
                    row.flags.push_back("unstable");
                }
            } else {
                try {
                    const OptimizationResult r =
                        solve_blocklength(scheme, ch, timing, cfg.search_lo, cfg.search_hi);
                    row.m_opt = r.m_integer;
                    row.m_continuous = r.m_continuous;
                    row.aoi_at_optimum = r.aoi_at_optimum;
                    row.method = to_string(r.method);
                    row.converged = r.converged;
                    if (cfg.exhaustive_check) {
                        const OptimizationResult ex =
                            exhaustive_search(scheme, ch, timing, cfg.search_lo, cfg.search_hi);
                        row.m_exhaustive = ex.m_integer;
                        row.aoi_exhaustive = ex.aoi_at_optimum;
                    }
                } catch (const std::domain_error&) {
                    row.method = "none";
                    row.flags.push_back("undefined");
                }
            }
            rows.push_back(std::move(row));
        }
    return rows;
}

// ---------------------------------------------------------------------------
// validation

/// Test fixture: scales the analytic value of one scheme to prove the
/// validation gate trips (negative control).
struct ValidationFixture {
    SchemeKind scheme = SchemeKind::PR;
    double analytic_scale = 1.0;
};

struct ValidationRow {
    SchemeKind scheme = SchemeKind::NP;
    double lambda = 0.0;
    int m = 0;
    double analytic_aoi = 0.0;
    double simulated_aoi = 0.0;
    double ci95 = 0.0;
    double rel_err = 0.0;
    double es_rel_err = 0.0;
    double ey_rel_err = 0.0;
    double ey2_rel_err = 0.0;
    long long pooled_deliveries = 0;
    bool within_tolerance = false;  ///< |sim-analytic|/analytic <= 1%
    bool ci_contains = false;       ///< analytic inside the 95% CI
    bool pass = false;
};

struct ValidationReport {
    std::vector<ValidationRow> rows;
    bool all_pass = false;
    double tolerance = 0.01;
};

inline void write_validation_csv(std::ostream& os, const ValidationReport& rep) {
    os << "scheme,lambda,m,analytic_aoi,simulated_aoi,ci95,rel_err,es_rel_err,ey_rel_err,"
          "ey2_rel_err,pooled_deliveries,pass\n";
    for (const ValidationRow& r : rep.rows) {
        os << to_string(r.scheme) << ',' << format_csv_double(r.lambda) << ',' << r.m << ','
           << format_csv_double(r.analytic_aoi) << ',' << format_csv_double(r.simulated_aoi) << ','
           << format_csv_double(r.ci95) << ',' << format_csv_double(r.rel_err) << ','
           << format_csv_double(r.es_rel_err) << ',' << format_csv_double(r.ey_rel_err) << ','
           << format_csv_double(r.ey2_rel_err) << ',' << r.pooled_deliveries << ','
           << (r.pass ? "true" : "false") << '\n';
    }
}

/// Cross-validates every closed form against the simulator on the
/// (scheme, lambda, m) grid. A point passes when the simulated mean is
/// within 1% of the analytic value and the analytic value lies inside
/// the 95% CI. Empirical interval moments are reported alongside.
inline ValidationReport run_validate(const ScenarioConfig& cfg,
                                     const ValidationFixture* fixture = nullptr) {
    validate_config(cfg, /*closed_form_only=*/true);
    const ChannelConfig ch = cfg.channel();
    ValidationReport rep;
    rep.all_pass = true;
    for (SchemeKind scheme : detail::sorted_schemes(cfg.resolved_schemes(false)))
        for (double lambda : detail::sorted_values(cfg.resolved_gen_rates()))
            for (int m : cfg.resolved_sim_ms()) {
                const LinkTiming timing = cfg.timing(lambda);
                const AoiMoments mo = scheme_aoi(scheme, Blocklength{m}, ch, timing);
                ValidationRow row;
                row.scheme = scheme;
                row.lambda = lambda;
                row.m = m;
                row.analytic_aoi = mo.avg_aoi;
                if (fixture && fixture->scheme == scheme) row.analytic_aoi *= fixture->analytic_scale;
                const SimResult sim = simulate(scheme, Blocklength{m}, ch, timing, cfg.sim);
                row.simulated_aoi = sim.mean_aoi;
                row.ci95 = sim.ci_halfwidth_95;
                row.pooled_deliveries = sim.delivered_count;
                row.rel_err = std::fabs(sim.mean_aoi - row.analytic_aoi) / row.analytic_aoi;
                row.es_rel_err =
                    std::fabs(sim.empirical.mean_service - mo.mean_service) / mo.mean_service;
                row.ey_rel_err = std::fabs(sim.empirical.mean_interdeparture -
                                           mo.mean_interdeparture) /
                                 mo.mean_interdeparture;
                row.ey2_rel_err = std::fabs(sim.empirical.second_moment_interdeparture -
                                            mo.second_moment_interdeparture) /
                                  mo.second_moment_interdeparture;
                row.within_tolerance = row.rel_err <= rep.tolerance;
                row.ci_contains = std::fabs(sim.mean_aoi - row.analytic_aoi) <= sim.ci_halfwidth_95;
                row.pass = row.within_tolerance && row.ci_contains;
                rep.all_pass = rep.all_pass && row.pass;
                rep.rows.push_back(row);
            }
    return rep;
}

}  // namespace aoi
