// Blocklength optimization per scheme.
//
// Each scheme's average AoI is stationary where its residual vanishes:
//
//   NP:  T_u((1-eps^2)/(2(1-eps)^2) + 1) + (T_u m + 1/lambda)/(1-eps)^2 * deps/dm
//          - T_u / (2 lambda^2 (T_u m + 1/lambda)^2)
//   PR:  lambda T_u (1-eps) + deps/dm
//   RT:  lambda T_u (1-eps) + deps/dm * (1 - exp(-lambda T_u m))
//
// The NP residual is d(avg)/dm itself; the PR and RT residuals equal
// d(avg)/dm divided by the positive factor e^{lambda M}/(lambda(1-eps)^2),
// so every residual carries the sign of the age slope.
//
// Newton or secant steps are unreliable here: deep in the small-m
// saturation region (eps ~ 1) both residual terms collapse to ~1e-38 and
// open methods happily "converge" far from the optimum. The solver
// therefore brackets sign changes on the integer grid first and bisects
// inside a bracket only; exhaustive integer search is the oracle and the
// fallback.

#pragma once

#include <cmath>
#include <cstdlib>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "aoi/analytics.hpp"
#include "aoi/channel.hpp"
#include "aoi/simulator.hpp"

namespace aoi {

struct StationarityResidual {
    SchemeKind scheme = SchemeKind::NP;
    double m = 0.0;
    double residual = 0.0;
};

enum class OptimizeMethod { root_find, exhaustive, simulation_grid };

inline const char* to_string(OptimizeMethod m) {
    switch (m) {
        case OptimizeMethod::root_find: return "root_find";
        case OptimizeMethod::exhaustive: return "exhaustive";
        case OptimizeMethod::simulation_grid: return "simulation_grid";
    }
    return "?";
}

struct OptimizationResult {
    SchemeKind scheme = SchemeKind::NP;
    double m_continuous = 0.0;
    int m_integer = 0;
    double aoi_at_optimum = 0.0;  ///< analytic for NP/PR/RT, simulated mean for FCFS
    OptimizeMethod method = OptimizeMethod::exhaustive;
    double bracket_lo = 0.0, bracket_hi = 0.0;
    bool converged = false;
    std::vector<int> unstable_points;  ///< FCFS grid points excluded by the stability check
};

namespace detail {

constexpr double kEpsUsable = 1.0 - 1e-12;  // residual and age undefined beyond this

inline double checked_bler(double m, const ChannelConfig& ch) {
    const double eps = bler(m, ch);
    if (eps >= kEpsUsable)
        throw std::domain_error("stationarity residual undefined: eps(m) ~ 1 at m = " +
                                std::to_string(m));
    return eps;
}

}  // namespace detail

inline double np_residual(double m, const ChannelConfig& ch, const LinkTiming& timing) {
    timing.validate();
    const double eps = detail::checked_bler(m, ch);
    const double de = bler_derivative(m, ch);
    const double tu = timing.symbol_time;
    const double lambda = timing.gen_rate;
    const double b = tu * m + 1.0 / lambda;
    const double q = 1.0 - eps;
    return tu * ((1.0 - eps * eps) / (2.0 * q * q) + 1.0) + b / (q * q) * de -
           tu / (2.0 * lambda * lambda * b * b);
}

inline double pr_residual(double m, const ChannelConfig& ch, const LinkTiming& timing) {
    timing.validate();
    const double eps = detail::checked_bler(m, ch);
    return timing.gen_rate * timing.symbol_time * (1.0 - eps) + bler_derivative(m, ch);
}

inline double rt_residual(double m, const ChannelConfig& ch, const LinkTiming& timing) {
    timing.validate();
    const double eps = detail::checked_bler(m, ch);
    const double u = timing.gen_rate * timing.symbol_time * m;
    return timing.gen_rate * timing.symbol_time * (1.0 - eps) +
           bler_derivative(m, ch) * (-std::expm1(-u));
}

inline double scheme_residual(SchemeKind scheme, double m, const ChannelConfig& ch,
                              const LinkTiming& timing) {
    switch (scheme) {
        case SchemeKind::NP: return np_residual(m, ch, timing);
        case SchemeKind::PR: return pr_residual(m, ch, timing);
        case SchemeKind::RT: return rt_residual(m, ch, timing);
        case SchemeKind::FCFS: break;
    }
    throw std::invalid_argument("no stationarity residual for FCFS");
}

namespace detail {

/// Closed-form average AoI at continuous m; +inf where eps(m) ~ 1.
inline double delta_at(SchemeKind scheme, double m, const ChannelConfig& ch,
                       const LinkTiming& timing) {
    const double eps = bler(m, ch);
    if (eps >= kEpsUsable) return std::numeric_limits<double>::infinity();
    const double M = timing.service_duration(m);
    switch (scheme) {
        case SchemeKind::NP: return np_moments(eps, timing.gen_rate, M).avg_aoi;
        case SchemeKind::PR: return pr_moments(eps, timing.gen_rate, M).avg_aoi;
        case SchemeKind::RT: return rt_moments(eps, timing.gen_rate, M).avg_aoi;
        case SchemeKind::FCFS: break;
    }
    throw std::invalid_argument("no closed form for FCFS");
}

inline std::optional<double> residual_if_defined(SchemeKind scheme, double m,
                                                 const ChannelConfig& ch, const LinkTiming& timing) {
    if (bler(m, ch) >= kEpsUsable) return std::nullopt;
    return scheme_residual(scheme, m, ch, timing);
}

inline void check_range(double m_lo, double m_hi) {
    if (!(m_lo >= 1.0) || !(m_lo < m_hi))
        throw std::domain_error("blocklength search range must satisfy 1 <= m_lo < m_hi");
}

}  // namespace detail

/// Closed-form argmin over every integer blocklength in [m_lo, m_hi],
/// ties broken toward smaller m. The oracle for solve_blocklength and its
/// fallback when no stationary point is bracketed.
inline OptimizationResult exhaustive_search(SchemeKind scheme, const ChannelConfig& ch,
                                            const LinkTiming& timing, double m_lo, double m_hi) {
    detail::check_range(m_lo, m_hi);
    timing.validate();
    const int lo = static_cast<int>(std::ceil(m_lo));
    const int hi = static_cast<int>(std::floor(m_hi));
    OptimizationResult best;
    best.scheme = scheme;
    best.method = OptimizeMethod::exhaustive;
    best.bracket_lo = m_lo;
    best.bracket_hi = m_hi;
    best.aoi_at_optimum = std::numeric_limits<double>::infinity();
    for (int m = lo; m <= hi; ++m) {
        const double d = detail::delta_at(scheme, m, ch, timing);
        if (d < best.aoi_at_optimum) {
            best.aoi_at_optimum = d;
            best.m_integer = m;
        }
    }
    if (!std::isfinite(best.aoi_at_optimum))
        throw std::domain_error("average AoI undefined over the whole range (eps ~ 1 throughout)");
    best.m_continuous = static_cast<double>(best.m_integer);
    best.converged = true;
    return best;
}

/// Root-finds the scheme's stationarity equation: integer-grid sign scan
/// to bracket, then bisection to width 1e-4, then the better adjacent
/// integer. Multiple sign changes are all resolved and the lowest-AoI
/// root wins. Without any bracket the exhaustive answer is returned with
/// converged = false.
inline OptimizationResult solve_blocklength(SchemeKind scheme, const ChannelConfig& ch,
                                            const LinkTiming& timing, double m_lo, double m_hi) {
    detail::check_range(m_lo, m_hi);
    timing.validate();
    if (scheme == SchemeKind::FCFS)
        throw std::invalid_argument("solve_blocklength: FCFS is optimized by simulation grid search");

    const int lo = static_cast<int>(std::ceil(m_lo));
    const int hi = static_cast<int>(std::floor(m_hi));

    struct Bracket {
        double lo, hi, f_lo;
    };
    std::vector<Bracket> brackets;
    std::optional<double> prev;
    double prev_m = 0.0;
    bool any_defined = false;
    for (int m = lo; m <= hi; ++m) {
        const auto cur = detail::residual_if_defined(scheme, m, ch, timing);
        if (cur) any_defined = true;
        if (prev && cur && ((*prev < 0.0 && *cur >= 0.0) || (*prev > 0.0 && *cur <= 0.0)))
            brackets.push_back(Bracket{prev_m, static_cast<double>(m), *prev});
        if (cur) {
            prev = cur;
            prev_m = static_cast<double>(m);
        }
    }
    if (!any_defined)
        throw std::domain_error("average AoI undefined over the whole range (eps ~ 1 throughout)");

    if (brackets.empty()) {
        OptimizationResult fallback = exhaustive_search(scheme, ch, timing, m_lo, m_hi);
        fallback.converged = false;
        return fallback;
    }

    OptimizationResult best;
    best.scheme = scheme;
    best.method = OptimizeMethod::root_find;
    best.converged = true;
    best.aoi_at_optimum = std::numeric_limits<double>::infinity();
    for (const auto& br : brackets) {
        double a = br.lo, b = br.hi;
        const bool lo_negative = br.f_lo < 0.0;
        while (b - a > 1e-4) {
            const double mid = 0.5 * (a + b);
            const double f = scheme_residual(scheme, mid, ch, timing);
            if ((f < 0.0) == lo_negative)
                a = mid;
            else
                b = mid;
        }
        const double root = 0.5 * (a + b);
        const int m_floor = static_cast<int>(std::floor(root));
        const int m_ceil = static_cast<int>(std::ceil(root));
        const double d_floor = m_floor >= lo ? detail::delta_at(scheme, m_floor, ch, timing)
                                             : std::numeric_limits<double>::infinity();
        const double d_ceil = m_ceil <= hi ? detail::delta_at(scheme, m_ceil, ch, timing)
                                           : std::numeric_limits<double>::infinity();
        const int m_int = d_floor <= d_ceil ? m_floor : m_ceil;
        const double d_int = d_floor <= d_ceil ? d_floor : d_ceil;
        if (d_int < best.aoi_at_optimum) {
            best.aoi_at_optimum = d_int;
            best.m_integer = m_int;
            best.m_continuous = root;
            best.bracket_lo = br.lo;
            best.bracket_hi = br.hi;
        }
    }
    return best;
}

/// FCFS baseline: simulated mean AoI minimized over the integer grid
/// m_lo..m_hi with the given step, identical seed policy at every point
/// (common random numbers across the grid). Points failing the analytic
/// stability check lambda*M/(1-eps) < 1 are excluded and recorded.
inline OptimizationResult fcfs_grid_optimize(const ChannelConfig& ch, const LinkTiming& timing,
                                             double m_lo, double m_hi, int step,
                                             const SimSettings& sim_settings) {
    detail::check_range(m_lo, m_hi);
    timing.validate();
    if (step < 1) throw std::domain_error("fcfs_grid_optimize: step must be >= 1");
    OptimizationResult best;
    best.scheme = SchemeKind::FCFS;
    best.method = OptimizeMethod::simulation_grid;
    best.bracket_lo = m_lo;
    best.bracket_hi = m_hi;
    best.aoi_at_optimum = std::numeric_limits<double>::infinity();
    bool found = false;
    for (int m = static_cast<int>(std::ceil(m_lo)); m <= static_cast<int>(std::floor(m_hi));
         m += step) {
        const double eps = bler(m, ch);
        const double M = timing.service_duration(m);
        if (eps >= detail::kEpsUsable || timing.gen_rate * M / (1.0 - eps) >= 1.0) {
            best.unstable_points.push_back(m);
            continue;
        }
        const SimResult sim = simulate(SchemeKind::FCFS, Blocklength{m}, ch, timing, sim_settings);
        if (sim.mean_aoi < best.aoi_at_optimum) {
            best.aoi_at_optimum = sim.mean_aoi;
            best.m_integer = m;
            found = true;
        }
    }
    if (!found)
        throw std::domain_error("fcfs_grid_optimize: no stable blocklength in range "
                                "(lambda*M/(1-eps) >= 1 everywhere)");
    best.m_continuous = static_cast<double>(best.m_integer);
    best.converged = true;
    return best;
}

}  // namespace aoi
