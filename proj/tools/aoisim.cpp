// aoisim: closed-form analysis, Monte Carlo simulation, blocklength
// optimization and analytic-vs-simulation validation of AoI under the
// NP / PR / RT packet-management schemes (plus the FCFS baseline) on a
// finite-blocklength AWGN link.
//
// Exit codes: 0 success, 1 scientific validation failure, 2 bad
// configuration or usage.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "aoi/aoi.hpp"

namespace {

struct Overrides {
    std::string config_path;
    std::string out_path;
    std::optional<std::string> schemes_csv;
    std::optional<std::string> lambda_csv;
    std::optional<std::string> m_range_str;
    std::optional<std::string> corrupt_str;
    std::optional<std::uint64_t> seed;
    std::optional<long> deliveries;
    std::optional<int> replications;
};

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) out.push_back(item);
    return out;
}

std::vector<aoi::SchemeKind> parse_schemes(const std::string& csv) {
    std::vector<aoi::SchemeKind> out;
    for (const std::string& tok : split(csv, ',')) {
        if (tok.empty()) continue;
        try {
            out.push_back(aoi::scheme_from_string(tok));
        } catch (const std::invalid_argument& e) {
            throw aoi::config_error(std::string("--schemes: ") + e.what());
        }
    }
    return out;
}

std::vector<double> parse_lambdas(const std::string& csv) {
    std::vector<double> out;
    for (const std::string& tok : split(csv, ',')) {
        if (tok.empty()) continue;
        try {
            std::size_t pos = 0;
            const double v = std::stod(tok, &pos);
            if (pos != tok.size()) throw std::invalid_argument(tok);
            out.push_back(v);
        } catch (const std::exception&) {
            throw aoi::config_error("--lambda: cannot parse '" + tok + "' as a number");
        }
    }
    return out;
}

aoi::MRange parse_m_range(const std::string& s) {
    const auto parts = split(s, ':');
    if (parts.size() != 2 && parts.size() != 3)
        throw aoi::config_error("--m-range: expected lo:hi or lo:hi:step, got '" + s + "'");
    aoi::MRange r;
    try {
        r.lo = std::stoi(parts[0]);
        r.hi = std::stoi(parts[1]);
        r.step = parts.size() == 3 ? std::stoi(parts[2]) : 1;
    } catch (const std::exception&) {
        throw aoi::config_error("--m-range: cannot parse '" + s + "'");
    }
    return r;
}

aoi::ValidationFixture parse_corrupt(const std::string& s) {
    const auto parts = split(s, ':');
    if (parts.size() != 2)
        throw aoi::config_error("--corrupt: expected SCHEME:FACTOR, got '" + s + "'");
    aoi::ValidationFixture fx;
    try {
        fx.scheme = aoi::scheme_from_string(parts[0]);
        fx.analytic_scale = std::stod(parts[1]);
    } catch (const std::exception&) {
        throw aoi::config_error("--corrupt: cannot parse '" + s + "'");
    }
    return fx;
}

aoi::ScenarioConfig build_config(const Overrides& ov) {
    aoi::ScenarioConfig cfg;
    if (!ov.config_path.empty()) cfg = aoi::load_config_file(ov.config_path);
    if (ov.seed) cfg.sim.base_seed = *ov.seed;
    if (ov.deliveries) cfg.sim.target_deliveries = *ov.deliveries;
    if (ov.replications) cfg.sim.replications = *ov.replications;
    if (ov.schemes_csv) cfg.schemes = parse_schemes(*ov.schemes_csv);
    if (ov.lambda_csv) cfg.gen_rates = parse_lambdas(*ov.lambda_csv);
    if (ov.m_range_str) cfg.m_range = parse_m_range(*ov.m_range_str);
    if (!ov.out_path.empty()) cfg.output_path = ov.out_path;
    return cfg;
}

std::string resolve_out_path(const aoi::ScenarioConfig& cfg, const char* command) {
    if (!cfg.output_path.empty()) return cfg.output_path;
    return std::string("aoi_") + command + ".csv";
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);  // '\n' line endings everywhere
    if (!out) throw aoi::config_error("cannot open output file '" + path + "'");
    return out;
}

void add_common_options(CLI::App* cmd, Overrides& ov) {
    cmd->add_option("--config", ov.config_path, "JSON scenario config file")
        ->envname("AOISIM_CONFIG");
    cmd->add_option("--out", ov.out_path, "output CSV path");
    cmd->add_option("--seed", ov.seed, "base RNG seed");
    cmd->add_option("--schemes", ov.schemes_csv, "comma list: NP,PR,RT,FCFS");
    cmd->add_option("--lambda", ov.lambda_csv, "comma list of generation rates");
    cmd->add_option("--m-range", ov.m_range_str, "blocklength grid lo:hi:step");
    cmd->add_option("--deliveries", ov.deliveries, "target deliveries per replication");
    cmd->add_option("--replications", ov.replications, "independent replications");
}

int cmd_analyze(const Overrides& ov) {
    const aoi::ScenarioConfig cfg = build_config(ov);
    const auto rows = aoi::run_analyze(cfg);
    const std::string path = resolve_out_path(cfg, "analyze");
    auto out = open_out(path);
    aoi::write_sweep_csv(out, rows);
    std::printf("analyze: %zu rows -> %s\n", rows.size(), path.c_str());
    return 0;
}

int cmd_simulate(const Overrides& ov) {
    const aoi::ScenarioConfig cfg = build_config(ov);
    const auto rows = aoi::run_simulate(cfg);
    const std::string path = resolve_out_path(cfg, "simulate");
    auto out = open_out(path);
    aoi::write_sweep_csv(out, rows);
    std::size_t unstable = 0;
    for (const auto& r : rows)
        for (const auto& f : r.flags)
            if (f == "unstable") ++unstable;
    std::printf("simulate: %zu rows (%zu unstable) -> %s\n", rows.size(), unstable, path.c_str());
    return 0;
}

int cmd_optimize(const Overrides& ov) {
    const aoi::ScenarioConfig cfg = build_config(ov);
    const auto rows = aoi::run_optimize(cfg);
    const std::string path = resolve_out_path(cfg, "optimize");
    auto out = open_out(path);
    aoi::write_optimize_csv(out, rows);
    for (const auto& r : rows) {
        if (r.m_opt)
            std::printf("  %-4s lambda=%-10.6g m*=%-5d aoi*=%.6g (%s)\n", aoi::to_string(r.scheme),
                        r.lambda, *r.m_opt, *r.aoi_at_optimum, r.method.c_str());
        else
            std::printf("  %-4s lambda=%-10.6g unstable over the whole grid\n",
                        aoi::to_string(r.scheme), r.lambda);
    }
    std::printf("optimize: %zu rows -> %s\n", rows.size(), path.c_str());
    return 0;
}

int cmd_validate(const Overrides& ov) {
    const aoi::ScenarioConfig cfg = build_config(ov);
    std::optional<aoi::ValidationFixture> fixture;
    if (ov.corrupt_str) fixture = parse_corrupt(*ov.corrupt_str);
    const aoi::ValidationReport rep = aoi::run_validate(cfg, fixture ? &*fixture : nullptr);
    const std::string path = resolve_out_path(cfg, "validate");
    auto out = open_out(path);
    aoi::write_validation_csv(out, rep);
    for (const auto& r : rep.rows)
        std::printf("  %-4s lambda=%-6g m=%-4d analytic=%-10.6g sim=%-10.6g rel=%.3f%% ci=%.3g %s\n",
                    aoi::to_string(r.scheme), r.lambda, r.m, r.analytic_aoi, r.simulated_aoi,
                    100.0 * r.rel_err, r.ci95, r.pass ? "[PASS]" : "[FAIL]");
    std::printf("validate: %s (%zu points, tolerance %.0f%%) -> %s\n",
                rep.all_pass ? "PASSED" : "FAILED", rep.rows.size(), 100.0 * rep.tolerance,
                path.c_str());
    return rep.all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"age-of-information analysis for short-packet links with packet management"};
    app.require_subcommand(1);

    Overrides ov;
    CLI::App* analyze = app.add_subcommand("analyze", "closed-form AoI sweep over (scheme, lambda, m)");
    CLI::App* simulate = app.add_subcommand("simulate", "Monte Carlo AoI sweep with confidence intervals");
    CLI::App* optimize = app.add_subcommand("optimize", "optimal blocklength per (scheme, lambda)");
    CLI::App* validate = app.add_subcommand("validate", "analytic-vs-simulation cross validation");
    for (CLI::App* cmd : {analyze, simulate, optimize, validate}) add_common_options(cmd, ov);
    validate->add_option("--corrupt", ov.corrupt_str, "test fixture: scale a scheme's analytic value")
        ->group("");  // hidden

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (analyze->parsed()) return cmd_analyze(ov);
        if (simulate->parsed()) return cmd_simulate(ov);
        if (optimize->parsed()) return cmd_optimize(ov);
        if (validate->parsed()) return cmd_validate(ov);
    } catch (const aoi::config_error& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 2;
}
