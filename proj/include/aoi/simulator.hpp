// Event-driven Monte Carlo simulation of the NP, PR, RT and FCFS packet
// management disciplines, the independent check for every closed form.
//
// One replication draws exponential(lambda) generation times and i.i.d.
// Bernoulli(eps) decode outcomes per M-long attempt, applies the scheme
// rules, and records every counted delivery (duplicate RT decodes are
// ignored by the destination). The age sawtooth is integrated exactly:
// between consecutive deliveries the area is a0*Y + Y^2/2 with a0 the age
// right after the previous delivery, so no internal event ever touches
// the accumulator and there is no time-step error. The first
// warmup_fraction of each replication's simulated time is cut from both
// area and duration to remove the age-0 start transient.
//
// Replications own split RNG streams (pure functions of base_seed and the
// replication index) and may run in parallel; pooling happens in index
// order, so results are bit-identical regardless of thread schedule.

#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <deque>
#include <exception>
#include <limits>
#include <mutex>
#include <ostream>
#include <stdexcept>
#include <thread>
#include <vector>

#include "aoi/analytics.hpp"
#include "aoi/channel.hpp"
#include "aoi/rng.hpp"
#include "aoi/stats.hpp"

namespace aoi {

struct SimSettings {
    long target_deliveries = 50000;  ///< counted receptions per replication
    int replications = 20;
    double warmup_fraction = 0.02;  ///< in [0, 0.5)
    std::uint64_t base_seed = 1;
    SchemeKind scheme = SchemeKind::NP;  ///< record only; the op argument wins

    void validate() const {
        if (target_deliveries < 1)
            throw std::domain_error("SimSettings: target_deliveries must be >= 1");
        if (replications < 1) throw std::domain_error("SimSettings: replications must be >= 1");
        if (!(warmup_fraction >= 0.0) || !(warmup_fraction < 0.5))
            throw std::domain_error("SimSettings: warmup_fraction must lie in [0, 0.5)");
    }
};

/// Per-delivery interval statistics measured by the simulator after
/// warmup (W and K only for the single-buffer schemes).
struct EmpiricalMoments {
    double mean_service = std::numeric_limits<double>::quiet_NaN();
    double mean_interdeparture = std::numeric_limits<double>::quiet_NaN();
    double second_moment_interdeparture = std::numeric_limits<double>::quiet_NaN();
    double mean_wait = std::numeric_limits<double>::quiet_NaN();
    double mean_k = std::numeric_limits<double>::quiet_NaN();
    long long samples = 0;
};

struct SimResult {
    double mean_aoi = std::numeric_limits<double>::quiet_NaN();
    double ci_halfwidth_95 = std::numeric_limits<double>::quiet_NaN();
    long long delivered_count = 0;
    double sim_duration = 0.0;  ///< pooled post-warmup time
    std::vector<double> per_replication_means;
    bool stable = true;  ///< false only for FCFS at offered load >= 1
    std::uint64_t seed = 0;
    SchemeKind scheme = SchemeKind::NP;
    EmpiricalMoments empirical;
    // whole-run event counters, pooled
    unsigned long long service_starts = 0;
    unsigned long long preemptions = 0;
    unsigned long long attempts = 0;
    unsigned long long attempt_failures = 0;
};

enum class EventKind {
    generation,
    service_start,
    attempt_success,
    attempt_failure,
    preemption,
    discard,
    delivery
};

inline const char* to_string(EventKind k) {
    switch (k) {
        case EventKind::generation: return "generation";
        case EventKind::service_start: return "service_start";
        case EventKind::attempt_success: return "attempt_success";
        case EventKind::attempt_failure: return "attempt_failure";
        case EventKind::preemption: return "preemption";
        case EventKind::discard: return "discard";
        case EventKind::delivery: return "delivery";
    }
    return "?";
}

struct TraceEvent {
    double time = 0.0;
    EventKind kind = EventKind::generation;
    double update_gen_time = 0.0;  ///< generation stamp of the update involved
    double detail = 0.0;  ///< attempt index, preempting stamp, or age after delivery
};

namespace detail {

/// Exact area under the age sawtooth over one linear segment that starts
/// at age a0 and runs for len time units.
inline double segment_area(double a0, double len) { return a0 * len + 0.5 * len * len; }

struct DeliveryRecord {
    double delivery = 0.0;
    double gen = 0.0;          ///< generation stamp of the delivered update
    double first_gen = 0.0;    ///< first generation after the previous delivery (NaN for FCFS)
    double service_start = 0.0;
};

struct RunCounters {
    unsigned long long generations = 0;
    unsigned long long service_starts = 0;
    unsigned long long preemptions = 0;
    unsigned long long discards = 0;
    unsigned long long attempts = 0;
    unsigned long long attempt_failures = 0;
};

class TraceSink {
  public:
    TraceSink(std::vector<TraceEvent>& out, std::size_t cap) : out_(out), cap_(cap) {}
    bool full() const { return out_.size() >= cap_; }
    void emit(double t, EventKind k, double gen, double detail = 0.0) {
        if (!full()) out_.push_back(TraceEvent{t, k, gen, detail});
    }

  private:
    std::vector<TraceEvent>& out_;
    std::size_t cap_;
};

inline void check_sim_domain(double eps, double M, double lambda) {
    if (!(eps >= 0.0) || !(eps < 1.0 - 1e-12))
        throw std::domain_error("simulate: error probability must lie in [0, 1-1e-12)");
    if (!(M > 0.0) || !std::isfinite(M))
        throw std::domain_error("simulate: service duration M must be positive");
    if (!(lambda > 0.0) || !std::isfinite(lambda))
        throw std::domain_error("simulate: lambda must be positive");
}

/// One replication of one scheme. Appends counted deliveries to records;
/// with a sink attached, also emits the event stream and additionally
/// stops once the sink is full.
inline void run_replication(SchemeKind scheme, double eps, double M, double lambda,
                            long target_deliveries, RandomStreams& rng,
                            std::vector<DeliveryRecord>& records, RunCounters& c,
                            TraceSink* sink = nullptr) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    double t_arr = draw_exponential(rng.arrivals, lambda);
    double first_gen = nan;  // first generation since the last delivery
    bool want_first_gen = true;

    auto note_gen = [&](double g) {
        if (want_first_gen) {
            first_gen = g;
            want_first_gen = false;
        }
    };
    auto stop = [&] {
        return static_cast<long>(records.size()) >= target_deliveries || (sink && sink->full());
    };
    auto emit = [&](double t, EventKind k, double gen, double detail = 0.0) {
        if (sink) sink->emit(t, k, gen, detail);
    };
    auto deliver = [&](double t, double gen, double svc_start, double g_stamp) {
        emit(t, EventKind::attempt_success, gen, 0.0);
        emit(t, EventKind::delivery, gen, t - gen);
        records.push_back(DeliveryRecord{t, gen, g_stamp, svc_start});
        want_first_gen = true;
    };

    switch (scheme) {
        case SchemeKind::NP: {
            while (!stop()) {
                const double g = t_arr;
                t_arr += draw_exponential(rng.arrivals, lambda);
                ++c.generations;
                emit(g, EventKind::generation, g);
                note_gen(g);
                const double gen = g;
                const double end = g + M;
                ++c.service_starts;
                emit(g, EventKind::service_start, gen);
                while (t_arr < end) {  // fresh updates during service are discarded
                    ++c.generations;
                    ++c.discards;
                    emit(t_arr, EventKind::generation, t_arr);
                    note_gen(t_arr);
                    emit(t_arr, EventKind::discard, t_arr);
                    t_arr += draw_exponential(rng.arrivals, lambda);
                }
                ++c.attempts;
                if (draw_bernoulli(rng.decode, eps)) {
                    ++c.attempt_failures;
                    emit(end, EventKind::attempt_failure, gen);
                } else {
                    deliver(end, gen, gen, first_gen);
                }
            }
            break;
        }
        case SchemeKind::PR: {
            while (!stop()) {
                double gen = t_arr;
                t_arr += draw_exponential(rng.arrivals, lambda);
                ++c.generations;
                emit(gen, EventKind::generation, gen);
                note_gen(gen);
                ++c.service_starts;
                emit(gen, EventKind::service_start, gen);
                double end = gen + M;
                while (t_arr < end) {  // a fresh update replaces the one in service
                    const double g2 = t_arr;
                    t_arr += draw_exponential(rng.arrivals, lambda);
                    ++c.generations;
                    emit(g2, EventKind::generation, g2);
                    note_gen(g2);
                    ++c.preemptions;
                    emit(g2, EventKind::preemption, gen, g2);
                    gen = g2;
                    end = g2 + M;
                    ++c.service_starts;
                    emit(g2, EventKind::service_start, gen);
                }
                ++c.attempts;
                if (draw_bernoulli(rng.decode, eps)) {
                    ++c.attempt_failures;
                    emit(end, EventKind::attempt_failure, gen);
                } else {
                    deliver(end, gen, gen, first_gen);
                }
            }
            break;
        }
        case SchemeKind::RT: {
            double gen = t_arr;
            t_arr += draw_exponential(rng.arrivals, lambda);
            ++c.generations;
            emit(gen, EventKind::generation, gen);
            note_gen(gen);
            ++c.service_starts;
            emit(gen, EventKind::service_start, gen);
            double end = gen + M;
            bool delivered_cur = false;
            double attempt_idx = 1.0;
            while (!stop()) {
                if (t_arr < end) {  // preemption also aborts retransmission
                    const double g2 = t_arr;
                    t_arr += draw_exponential(rng.arrivals, lambda);
                    ++c.generations;
                    emit(g2, EventKind::generation, g2);
                    note_gen(g2);
                    ++c.preemptions;
                    emit(g2, EventKind::preemption, gen, g2);
                    gen = g2;
                    end = g2 + M;
                    delivered_cur = false;
                    attempt_idx = 1.0;
                    ++c.service_starts;
                    emit(g2, EventKind::service_start, gen);
                    continue;
                }
                ++c.attempts;
                if (draw_bernoulli(rng.decode, eps)) {
                    ++c.attempt_failures;
                    emit(end, EventKind::attempt_failure, gen, attempt_idx);
                } else if (!delivered_cur) {
                    deliver(end, gen, gen, first_gen);
                    delivered_cur = true;
                } else {
                    // duplicate decode, discarded by the destination
                    emit(end, EventKind::attempt_success, gen, attempt_idx);
                }
                end += M;  // no feedback: keep retransmitting until preempted
                attempt_idx += 1.0;
            }
            break;
        }
        case SchemeKind::FCFS: {
            std::deque<double> queue;
            double now = 0.0;
            while (!stop()) {
                if (queue.empty()) {  // server idles until the next arrival
                    const double g = t_arr;
                    t_arr += draw_exponential(rng.arrivals, lambda);
                    ++c.generations;
                    emit(g, EventKind::generation, g);
                    queue.push_back(g);
                    if (g > now) now = g;
                }
                const double gen = queue.front();
                queue.pop_front();
                const double svc_start = now;
                ++c.service_starts;
                emit(now, EventKind::service_start, gen);
                bool decoded = false;
                while (!decoded) {  // retransmit this update until it is received
                    const double end = now + M;
                    while (t_arr < end) {
                        ++c.generations;
                        emit(t_arr, EventKind::generation, t_arr);
                        queue.push_back(t_arr);
                        t_arr += draw_exponential(rng.arrivals, lambda);
                    }
                    now = end;
                    ++c.attempts;
                    if (!draw_bernoulli(rng.decode, eps)) {
                        decoded = true;
                    } else {
                        ++c.attempt_failures;
                        emit(now, EventKind::attempt_failure, gen);
                        if (sink && sink->full()) break;  // trace capped mid-service
                    }
                }
                if (!decoded) break;
                emit(now, EventKind::attempt_success, gen);
                emit(now, EventKind::delivery, gen, now - gen);
                records.push_back(DeliveryRecord{now, gen, nan, svc_start});
            }
            break;
        }
    }
}

struct ReplicationSummary {
    double area = 0.0, duration = 0.0;  // post-warmup
    double peak_sum = 0.0;
    long long peak_count = 0;
    double y_sum = 0.0, y2_sum = 0.0, s_sum = 0.0, w_sum = 0.0, k_sum = 0.0;
    long long interval_count = 0, wk_count = 0;
    long long deliveries = 0;
};

/// Exact warmup-truncated integration of one replication's sawtooth plus
/// per-interval statistics (intervals fully inside the kept window).
inline ReplicationSummary summarize_replication(const std::vector<DeliveryRecord>& records,
                                                double warmup_fraction) {
    ReplicationSummary s;
    s.deliveries = static_cast<long long>(records.size());
    if (records.empty()) return s;
    const double total_time = records.back().delivery;
    const double t0 = warmup_fraction * total_time;
    double prev_d = 0.0, prev_gen = 0.0;  // age 0 at t = 0
    bool have_prev_delivery = false;
    for (const DeliveryRecord& r : records) {
        const double a0 = prev_d - prev_gen;  // age right after the previous delivery
        if (r.delivery > t0) {
            const double from = prev_d > t0 ? prev_d : t0;
            const double len = r.delivery - from;
            s.area += segment_area(a0 + (from - prev_d), len);
            s.duration += len;
        }
        if (have_prev_delivery && prev_d >= t0) {
            const double y = r.delivery - prev_d;
            s.y_sum += y;
            s.y2_sum += y * y;
            s.s_sum += r.delivery - r.service_start;
            s.peak_sum += a0 + y;
            ++s.peak_count;
            ++s.interval_count;
            if (!std::isnan(r.first_gen)) {
                s.w_sum += r.first_gen - prev_d;
                s.k_sum += r.delivery - r.first_gen;
                ++s.wk_count;
            }
        }
        prev_d = r.delivery;
        prev_gen = r.gen;
        have_prev_delivery = true;
    }
    return s;
}

enum class SimMetric { time_average, peak };

inline SimResult run_simulation(SchemeKind scheme, double eps, double M, double lambda,
                                SimSettings settings, SimMetric metric) {
    settings.validate();
    check_sim_domain(eps, M, lambda);
    settings.scheme = scheme;

    SimResult result;
    result.scheme = scheme;
    result.seed = settings.base_seed;

    if (scheme == SchemeKind::FCFS) {
        const double load = lambda * M / (1.0 - eps);
        if (load >= 1.0) {
            result.stable = false;  // no mean reported
            return result;
        }
    }

    const int reps = settings.replications;
    std::vector<ReplicationSummary> sums(static_cast<std::size_t>(reps));
    std::vector<RunCounters> counters(static_cast<std::size_t>(reps));

    std::atomic<int> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            const int r = next.fetch_add(1);
            if (r >= reps) return;
            try {
                RandomStreams rng =
                    RandomStreams::for_replication(settings.base_seed, static_cast<std::uint64_t>(r));
                std::vector<DeliveryRecord> records;
                records.reserve(static_cast<std::size_t>(
                    std::min<long>(settings.target_deliveries, 10000000L)));
                run_replication(scheme, eps, M, lambda, settings.target_deliveries, rng, records,
                                counters[static_cast<std::size_t>(r)]);
                sums[static_cast<std::size_t>(r)] =
                    summarize_replication(records, settings.warmup_fraction);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };

    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    const unsigned nthreads = std::min<unsigned>(hw, static_cast<unsigned>(reps));
    if (nthreads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(nthreads);
        for (unsigned i = 0; i < nthreads; ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (first_error) std::rethrow_exception(first_error);

    // pooling in replication order keeps results independent of thread schedule
    double area = 0.0, duration = 0.0, peak_sum = 0.0;
    double y_sum = 0.0, y2_sum = 0.0, s_sum = 0.0, w_sum = 0.0, k_sum = 0.0;
    long long peak_count = 0, interval_count = 0, wk_count = 0;
    result.per_replication_means.reserve(static_cast<std::size_t>(reps));
    for (const ReplicationSummary& s : sums) {
        area += s.area;
        duration += s.duration;
        peak_sum += s.peak_sum;
        peak_count += s.peak_count;
        y_sum += s.y_sum;
        y2_sum += s.y2_sum;
        s_sum += s.s_sum;
        w_sum += s.w_sum;
        k_sum += s.k_sum;
        interval_count += s.interval_count;
        wk_count += s.wk_count;
        result.delivered_count += s.deliveries;
        result.per_replication_means.push_back(metric == SimMetric::time_average
                                                   ? s.area / s.duration
                                                   : s.peak_sum / static_cast<double>(s.peak_count));
    }
    for (const RunCounters& c : counters) {
        result.service_starts += c.service_starts;
        result.preemptions += c.preemptions;
        result.attempts += c.attempts;
        result.attempt_failures += c.attempt_failures;
    }
    result.sim_duration = duration;
    result.mean_aoi = metric == SimMetric::time_average ? area / duration
                                                        : peak_sum / static_cast<double>(peak_count);
    result.ci_halfwidth_95 = mean_ci_95(result.per_replication_means).halfwidth;
    if (interval_count > 0) {
        const auto n = static_cast<double>(interval_count);
        result.empirical.samples = interval_count;
        result.empirical.mean_interdeparture = y_sum / n;
        result.empirical.second_moment_interdeparture = y2_sum / n;
        result.empirical.mean_service = s_sum / n;
        if (wk_count > 0) {
            result.empirical.mean_wait = w_sum / static_cast<double>(wk_count);
            result.empirical.mean_k = k_sum / static_cast<double>(wk_count);
        }
    }
    return result;
}

}  // namespace detail

/// Simulated time-average AoI at an explicit (eps, M) point. Exposed so
/// tests can force error probabilities (e.g. exactly zero).
inline SimResult simulate_at(SchemeKind scheme, double eps, double M, double lambda,
                             const SimSettings& settings) {
    return detail::run_simulation(scheme, eps, M, lambda, settings, detail::SimMetric::time_average);
}

/// Simulated time-average AoI for a scheme at blocklength m.
inline SimResult simulate(SchemeKind scheme, Blocklength m, const ChannelConfig& ch,
                          const LinkTiming& timing, const SimSettings& settings) {
    m.validate();
    timing.validate();
    return simulate_at(scheme, bler(m, ch), timing.service_duration(m.value), timing.gen_rate,
                       settings);
}

/// Peak-AoI variant: averages the age attained immediately before each
/// counted delivery instead of the time integral. mean_aoi and the CI
/// refer to that peak average.
inline SimResult simulate_peak_aoi_at(SchemeKind scheme, double eps, double M, double lambda,
                                      const SimSettings& settings) {
    return detail::run_simulation(scheme, eps, M, lambda, settings, detail::SimMetric::peak);
}

inline SimResult simulate_peak_aoi(SchemeKind scheme, Blocklength m, const ChannelConfig& ch,
                                   const LinkTiming& timing, const SimSettings& settings) {
    m.validate();
    timing.validate();
    return simulate_peak_aoi_at(scheme, bler(m, ch), timing.service_duration(m.value),
                                timing.gen_rate, settings);
}

constexpr std::size_t kMaxTraceEvents = 100000;

/// Ordered event stream of a single replication, capped at max_events.
inline std::vector<TraceEvent> event_trace_at(SchemeKind scheme, double eps, double M, double lambda,
                                              std::uint64_t seed, std::size_t max_events) {
    detail::check_sim_domain(eps, M, lambda);
    if (max_events == 0 || max_events > kMaxTraceEvents)
        throw std::domain_error("event_trace: max_events must lie in [1, 100000]");
    std::vector<TraceEvent> events;
    events.reserve(max_events);
    detail::TraceSink sink(events, max_events);
    RandomStreams rng = RandomStreams::for_replication(seed, 0);
    std::vector<detail::DeliveryRecord> records;
    detail::RunCounters counters;
    detail::run_replication(scheme, eps, M, lambda, std::numeric_limits<long>::max() / 2, rng,
                            records, counters, &sink);
    return events;
}

inline std::vector<TraceEvent> event_trace(SchemeKind scheme, Blocklength m, const ChannelConfig& ch,
                                           const LinkTiming& timing, std::uint64_t seed,
                                           std::size_t max_events) {
    m.validate();
    timing.validate();
    return event_trace_at(scheme, bler(m, ch), timing.service_duration(m.value), timing.gen_rate,
                          seed, max_events);
}

/// CSV export, header `time,event,update_gen_time,detail`.
inline void write_trace_csv(std::ostream& os, const std::vector<TraceEvent>& trace) {
    os << "time,event,update_gen_time,detail\n";
    char buf[96];
    for (const TraceEvent& e : trace) {
        std::snprintf(buf, sizeof buf, "%.17g,%s,%.17g,%.17g\n", e.time, to_string(e.kind),
                      e.update_gen_time, e.detail);
        os << buf;
    }
}

/// Intervals reconstructed from a trace, one entry per counted delivery
/// starting from the second. y is w + k by construction; the separate
/// interdeparture field carries d_i - d_{i-1} for cross-checking.
struct TraceIntervals {
    std::vector<double> w;               ///< wait for the first post-delivery generation
    std::vector<double> k;               ///< that generation to the next delivery
    std::vector<double> y;               ///< w + k
    std::vector<double> s;               ///< delivery minus service start of the delivered update
    std::vector<double> interdeparture;  ///< raw d_i - d_{i-1}
};

inline TraceIntervals reconstruct_intervals(const std::vector<TraceEvent>& trace) {
    std::vector<double> gens;
    struct Del {
        double time, gen;
    };
    std::vector<Del> dels;
    std::vector<double> svc_of_del;
    double last_service_start_gen = std::numeric_limits<double>::quiet_NaN();
    double last_service_start_time = std::numeric_limits<double>::quiet_NaN();
    for (const TraceEvent& e : trace) {
        if (e.kind == EventKind::generation) gens.push_back(e.time);
        if (e.kind == EventKind::service_start) {
            last_service_start_gen = e.update_gen_time;
            last_service_start_time = e.time;
        }
        if (e.kind == EventKind::delivery) {
            dels.push_back(Del{e.time, e.update_gen_time});
            // service start of the delivered update (equals its generation
            // stamp for the single-buffer schemes, queue-head start for FCFS)
            svc_of_del.push_back(e.update_gen_time == last_service_start_gen
                                     ? last_service_start_time
                                     : e.update_gen_time);
        }
    }
    TraceIntervals out;
    std::size_t gi = 0;
    for (std::size_t i = 1; i < dels.size(); ++i) {
        const double prev_d = dels[i - 1].time;
        while (gi < gens.size() && gens[gi] <= prev_d) ++gi;
        if (gi >= gens.size()) break;  // trace truncated before the next generation
        const double w = gens[gi] - prev_d;
        const double k = dels[i].time - gens[gi];
        out.w.push_back(w);
        out.k.push_back(k);
        out.y.push_back(w + k);
        out.interdeparture.push_back(dels[i].time - prev_d);
        out.s.push_back(dels[i].time - svc_of_del[i]);
    }
    return out;
}

}  // namespace aoi
