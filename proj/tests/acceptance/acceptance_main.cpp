// Acceptance suite: every release-gating criterion as one pass/fail line.
//
//   1  analytic vs simulated average AoI, 1% and CI, 3x3x3 grid, 1e6 pooled
//   2  empirical E{S}, E{Y}, E{Y^2} within 2% on the same grid
//   3  RT = PR * (1 - eps*exp(-lambda*M)) identity to 1e-14
//   4  age recombination from stored moments to 1e-12
//   5  BLER derivative vs finite differences to 1e-3
//   6  root-found optima equal exhaustive search (+/-1), interior minima
//   7  crossover, FCFS-baseline dominance and FCFS instability
//   8  RT success statistics: closed forms vs truncated series to 1e-10
//   9  byte-identical CSV reruns for simulate and validate

#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "aoi/aoi.hpp"

namespace fs = std::filesystem;
using namespace aoi;

namespace {

int g_failures = 0;

void report(int id, const char* name, bool pass, const std::string& detail) {
    std::printf("%s  criterion %d: %s%s%s\n", pass ? "PASS" : "FAIL", id, name,
                detail.empty() ? "" : " -- ", detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

const std::vector<double> kEpsGrid = {0.0, 1e-4, 1e-2, 0.1, 0.5};
const std::vector<double> kLambdaGrid = {0.05, 0.33, 1.0, 3.0};
const std::vector<double> kServiceGrid = {0.3, 1.2, 6.0};

AoiMoments moments_for(SchemeKind s, double eps, double lambda, double M) {
    switch (s) {
        case SchemeKind::NP: return np_moments(eps, lambda, M);
        case SchemeKind::PR: return pr_moments(eps, lambda, M);
        default: return rt_moments(eps, lambda, M);
    }
}

// criteria 1 and 2 share one validation run over the reference grid
void criteria_1_2() {
    ScenarioConfig cfg;  // defaults: lambda {0.1,0.33,1.0}, m {150,200,300}, 50000 x 20
    const ValidationReport rep = run_validate(cfg);

    bool aoi_ok = true, ci_ok = true;
    double worst_rel = 0.0;
    long long min_pooled = rep.rows.empty() ? 0 : rep.rows.front().pooled_deliveries;
    for (const ValidationRow& r : rep.rows) {
        aoi_ok = aoi_ok && r.within_tolerance;
        ci_ok = ci_ok && r.ci_contains;
        worst_rel = std::max(worst_rel, r.rel_err);
        min_pooled = std::min(min_pooled, r.pooled_deliveries);
    }
    report(1, "analytic/simulation agreement (1%, CI, >=1e6 pooled)",
           aoi_ok && ci_ok && min_pooled >= 1000000,
           "worst rel err " + fmt(worst_rel) + ", min pooled " + std::to_string(min_pooled));

    bool moments_ok = true;
    double worst_moment = 0.0;
    for (const ValidationRow& r : rep.rows) {
        const double w = std::max(r.es_rel_err, std::max(r.ey_rel_err, r.ey2_rel_err));
        worst_moment = std::max(worst_moment, w);
        moments_ok = moments_ok && w <= 0.02;
    }
    report(2, "moment-level agreement (E{S}, E{Y}, E{Y^2} within 2%)", moments_ok,
           "worst rel err " + fmt(worst_moment));
}

void criterion_3() {
    double worst = 0.0;
    for (double eps : kEpsGrid)
        for (double lambda : kLambdaGrid)
            for (double M : kServiceGrid) {
                const double pr = pr_moments(eps, lambda, M).avg_aoi;
                const double rt = rt_moments(eps, lambda, M).avg_aoi;
                const double want = pr * (1.0 - eps * std::exp(-lambda * M));
                worst = std::max(worst, std::fabs(rt - want) / want);
                if (rt > pr * (1.0 + 1e-15)) worst = 1.0;
                if (eps == 0.0 && std::fabs(rt - pr) / pr > 1e-14) worst = 1.0;
            }
    report(3, "identity RT = PR * (1 - eps*exp(-lambda*M)) to 1e-14", worst <= 1e-14,
           "worst rel dev " + fmt(worst));
}

void criterion_4() {
    double worst = 0.0;
    for (SchemeKind s : {SchemeKind::NP, SchemeKind::PR, SchemeKind::RT})
        for (double eps : kEpsGrid)
            for (double lambda : kLambdaGrid)
                for (double M : kServiceGrid) {
                    const AoiMoments mo = moments_for(s, eps, lambda, M);
                    const double recombined =
                        mo.second_moment_interdeparture / (2.0 * mo.mean_interdeparture) +
                        mo.mean_service;
                    worst = std::max(worst, std::fabs(recombined - mo.avg_aoi) / mo.avg_aoi);
                }
    report(4, "age recombines from stored moments to 1e-12", worst <= 1e-12,
           "worst rel dev " + fmt(worst));
}

void criterion_5() {
    const ChannelConfig ch = ChannelConfig::from_db(150, 4.5);
    double worst = 0.0;
    for (int m : {120, 150, 200, 300, 500, 1000}) {
        const double h = 1e-3;
        const double fd = (bler(m + h, ch) - bler(m - h, ch)) / (2.0 * h);
        const double an = bler_derivative(static_cast<double>(m), ch);
        worst = std::max(worst, std::fabs(fd - an) / std::fabs(an));
    }
    report(5, "BLER derivative vs finite differences to 1e-3", worst <= 1e-3,
           "worst rel err " + fmt(worst));
}

void criterion_6() {
    const ChannelConfig ch = ChannelConfig::from_db(150, 4.5);
    bool ok = true;
    std::string detail;
    for (double lambda : {0.1, 0.33, 1.0})
        for (SchemeKind s : {SchemeKind::NP, SchemeKind::PR, SchemeKind::RT}) {
            const LinkTiming t{0.006, lambda};
            const OptimizationResult root = solve_blocklength(s, ch, t, 110, 2000);
            const OptimizationResult exh = exhaustive_search(s, ch, t, 110, 2000);
            const bool match = std::abs(root.m_integer - exh.m_integer) <= 1 &&
                               std::fabs(root.aoi_at_optimum - exh.aoi_at_optimum) <=
                                   1e-9 * exh.aoi_at_optimum;
            const bool interior = exh.m_integer > 110 && exh.m_integer < 2000;
            if (!(match && interior && root.converged)) {
                ok = false;
                detail += std::string(to_string(s)) + "@" + fmt(lambda) + " ";
            }
        }
    report(6, "root-found optimum = exhaustive (+/-1), interior minimum", ok,
           ok ? "9/9 (scheme, lambda) pairs" : detail);
}

void criterion_7() {
    const ChannelConfig ch = ChannelConfig::from_db(150, 4.5);
    ScenarioConfig cfg;
    const std::vector<double> sweep = cfg.resolved_lambda_sweep();
    const int m_lo = 110, m_hi = 1000;

    auto fcfs_stable_somewhere = [&](double lambda) {
        for (int m = m_lo; m <= m_hi; ++m) {
            const double eps = bler(static_cast<double>(m), ch);
            if (eps < 1.0 - 1e-12 && lambda * 0.006 * m / (1.0 - eps) < 1.0) return true;
        }
        return false;
    };

    // (a) ordering crossover between NP and RT along the sweep
    bool rt_beats_np_low = false, np_beats_rt_high = false;
    for (double lambda : sweep) {
        const LinkTiming t{0.006, lambda};
        const double np = solve_blocklength(SchemeKind::NP, ch, t, 110, 5000).aoi_at_optimum;
        const double rt = solve_blocklength(SchemeKind::RT, ch, t, 110, 5000).aoi_at_optimum;
        if (rt < np) rt_beats_np_low = true;
        if (np < rt && rt_beats_np_low) np_beats_rt_high = true;
    }
    report(7, "(a) NP/RT ordering crossover along the lambda sweep",
           rt_beats_np_low && np_beats_rt_high, "");

    // (b) all three schemes beat the FCFS baseline at the largest stable rate
    double lambda_star = -1.0;
    for (double lambda : sweep)
        if (fcfs_stable_somewhere(lambda)) lambda_star = std::max(lambda_star, lambda);
    bool b_ok = lambda_star > 0.0;
    std::string b_detail = "no stable lambda";
    if (b_ok) {
        const LinkTiming t{0.006, lambda_star};
        SimSettings fcfs_sim;
        fcfs_sim.target_deliveries = 20000;
        fcfs_sim.replications = 10;
        fcfs_sim.base_seed = 1;
        const OptimizationResult fcfs = fcfs_grid_optimize(ch, t, m_lo, m_hi, 10, fcfs_sim);
        b_detail = "lambda*=" + fmt(lambda_star) + " fcfs=" + fmt(fcfs.aoi_at_optimum) + " vs";
        for (SchemeKind s : {SchemeKind::NP, SchemeKind::PR, SchemeKind::RT}) {
            const double own = solve_blocklength(s, ch, t, 110, 5000).aoi_at_optimum;
            b_detail += std::string(" ") + to_string(s) + "=" + fmt(own);
            b_ok = b_ok && own < fcfs.aoi_at_optimum;
        }
    }
    report(7, "(b) NP/PR/RT all beat the FCFS baseline at the largest stable rate", b_ok,
           b_detail);

    // (c) FCFS saturates for large enough rates
    bool unstable_exists = false;
    for (double lambda : sweep) unstable_exists = unstable_exists || !fcfs_stable_somewhere(lambda);
    report(7, "(c) FCFS unstable at every blocklength for large rates", unstable_exists, "");
}

void criterion_8() {
    bool ok = true;
    double worst = 0.0;
    for (double eps : {0.01, 0.1, 0.5, 0.9})
        for (double p : {0.01, 0.1, 0.5, 0.9}) {
            const double M = 1.2;
            const RtSuccessStats st = rt_success_stats(eps, p, M);
            double es = 0.0, ps = 0.0, w = (1.0 - eps) * (1.0 - p);
            for (int k = 0; k <= 10000; ++k) {
                es += w * (k + 1) * M;
                ps += w;
                w *= eps * (1.0 - p);
            }
            worst = std::max(worst, std::fabs(st.expected_service - es) / es);
            worst = std::max(worst, std::fabs(st.success_prob - ps) / ps);
        }
    ok = worst <= 1e-10;
    report(8, "RT success statistics equal the truncated series to 1e-10", ok,
           "worst rel dev " + fmt(worst));
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void criterion_9() {
    const fs::path dir =
        fs::temp_directory_path() / ("aoisim_acceptance_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    auto run_cli = [&](const std::string& args) {
        const std::string cmd = "cd " + dir.string() + " && " + AOISIM_BIN + " " + args +
                                " > /dev/null 2>&1";
        return WEXITSTATUS(std::system(cmd.c_str()));
    };

    const std::string sim_args =
        "simulate --schemes NP,PR,RT --lambda 0.33 --m-range 200:200:1 --deliveries 5000 "
        "--replications 20 --seed 11 --out ";
    const int s1 = run_cli(sim_args + "sim_a.csv");
    const int s2 = run_cli(sim_args + "sim_b.csv");
    const bool sim_ok = s1 == 0 && s2 == 0 && !slurp(dir / "sim_a.csv").empty() &&
                        slurp(dir / "sim_a.csv") == slurp(dir / "sim_b.csv");

    const std::string val_args =
        "validate --lambda 0.33 --m-range 200:200:1 --deliveries 5000 --replications 20 "
        "--seed 11 --out ";
    const int v1 = run_cli(val_args + "val_a.csv");
    const int v2 = run_cli(val_args + "val_b.csv");
    const bool val_ok = v1 == 0 && v2 == 0 && !slurp(dir / "val_a.csv").empty() &&
                        slurp(dir / "val_a.csv") == slurp(dir / "val_b.csv");

    report(9, "byte-identical CSV reruns (simulate and validate)", sim_ok && val_ok,
           "exits sim " + std::to_string(s1) + "/" + std::to_string(s2) + " validate " +
               std::to_string(v1) + "/" + std::to_string(v2));
    fs::remove_all(dir);
}

}  // namespace

int main() {
    const auto t0 = std::chrono::steady_clock::now();
    criteria_1_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s (%d failure%s, %.1f s)\n", g_failures == 0 ? "ACCEPTANCE PASSED" : "ACCEPTANCE FAILED",
                g_failures, g_failures == 1 ? "" : "s", secs);
    return g_failures == 0 ? 0 : 1;
}
