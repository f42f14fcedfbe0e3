#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "twrc/regions.hpp"
#include "twrc/rng.hpp"

namespace twrc {

struct QueueState {
    long q_a = 0;
    long q_b = 0;
    double t = 0.0;
};

// Poisson packet arrivals at the two sources. Bit-arrival rates are
// rate * packet_len.
struct ArrivalSpec {
    double rate_a = 0.0;      // packets per unit time at node A
    double rate_b = 0.0;      // packets per unit time at node B
    double packet_len = 1.0;  // bits per packet

    void validate() const {
        if (rate_a < 0.0 || rate_b < 0.0)
            throw std::invalid_argument("arrivals: rates must be >= 0");
        if (!(packet_len > 0.0))
            throw std::invalid_argument("arrivals: packet length must be > 0");
    }
};

enum class SchedulerProtocol { omlnc, oplnc };

enum class Action { mlnc_pair, tdmh_fwd, tdmh_bwd, plnc_batch, plnc_residual, idle };

struct Step {
    Action action = Action::idle;
    QueueState next;
    long dep_a = 0;
    long dep_b = 0;
    double duration = 0.0;
};

// Quadratic Lyapunov function whose drift certifies stability of the
// opportunistic MLNC scheduler.
inline double lyapunov_v(const QueueState& state, const SigmaSet& sigma) {
    const double qa = static_cast<double>(state.q_a);
    const double qb = static_cast<double>(state.q_b);
    const double ca = sigma.min_sym / (sigma.ab - sigma.min_sym);
    const double cb = sigma.min_sym / (sigma.ba - sigma.min_sym);
    return ca * qa * qa + cb * qb * qb + 2.0 * qa * qb;
}

namespace detail {

// Advance to the next arrival when both queues are empty. Returns false when
// no arrival can ever happen.
inline bool idle_until_arrival(QueueState& state, const ArrivalSpec& arrivals, Rng& rng,
                               double& duration) {
    const double total = arrivals.rate_a + arrivals.rate_b;
    if (total <= 0.0) return false;
    duration = rng.exponential(1.0 / total);
    state.t += duration;
    if (rng.uniform() * total < arrivals.rate_a)
        state.q_a += 1;
    else
        state.q_b += 1;
    return true;
}

inline void add_arrivals(QueueState& state, const ArrivalSpec& arrivals, double duration,
                         Rng& rng) {
    state.q_a += rng.poisson(arrivals.rate_a * duration);
    state.q_b += rng.poisson(arrivals.rate_b * duration);
    state.t += duration;
}

}  // namespace detail

// One decision of the opportunistic MLNC scheduler: pair the queues through
// the relay when both are backlogged, fall back to TDMH one-way otherwise.
inline Step step_omlnc(QueueState state, const SigmaSet& sigma, const ArrivalSpec& arrivals,
                       Rng& rng) {
    Step step;
    const double len = arrivals.packet_len;
    if (state.q_a > 0 && state.q_b > 0) {
        step.action = Action::mlnc_pair;
        step.duration = len / sigma.min_sym;
        state.q_a -= 1;
        state.q_b -= 1;
        step.dep_a = step.dep_b = 1;
        detail::add_arrivals(state, arrivals, step.duration, rng);
    } else if (state.q_a > 0) {
        step.action = Action::tdmh_fwd;
        step.duration = len / sigma.ab;
        state.q_a -= 1;
        step.dep_a = 1;
        detail::add_arrivals(state, arrivals, step.duration, rng);
    } else if (state.q_b > 0) {
        step.action = Action::tdmh_bwd;
        step.duration = len / sigma.ba;
        state.q_b -= 1;
        step.dep_b = 1;
        detail::add_arrivals(state, arrivals, step.duration, rng);
    } else {
        step.action = Action::idle;
        if (!detail::idle_until_arrival(state, arrivals, rng, step.duration)) {
            step.next = state;
            return step;  // duration 0: nothing will ever arrive
        }
    }
    step.next = state;
    return step;
}

struct InfeasibleBatchError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct RateInfeasibleError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Batch sizes and the TDMH drain cap for the opportunistic PLNC scheduler.
struct OplncParams {
    long q_a_batch = 1;  // Q_A: forward packets per PLNC batch
    long q_b_batch = 1;  // Q_B: backward packets per PLNC batch
    long q_star = 2;     // Q*: cap on one-way TDMH drains
    double lambda1 = 0.5;
    double lambda2 = 0.5;
};

inline double plnc_batch_duration(long n_a, long n_b, const CapacitySet& caps,
                                  double packet_len) {
    const double na = static_cast<double>(n_a);
    const double nb = static_cast<double>(n_b);
    return packet_len *
           (na / caps.c_ad + nb / caps.c_bd + std::max(na / caps.c_db, nb / caps.c_da));
}

// Pick (Q_A, Q_B) as the largest pair under the lambda-weighted rate caps
// whose ratio best matches the PLNC corner traffic pattern, then the
// smallest Q* with strictly negative drift margins for the target rates.
inline OplncParams choose_oplnc_params(const SigmaSet& sigma, const ArrivalSpec& arrivals,
                                       double lambda1 = 0.5, double lambda2 = 0.5,
                                       long batch_cap = 64) {
    arrivals.validate();
    const double len = arrivals.packet_len;
    const long max_qa = std::min<long>(batch_cap, static_cast<long>(lambda1 * sigma.ab / len));
    const long max_qb = std::min<long>(batch_cap, static_cast<long>(lambda2 * sigma.ba / len));
    if (max_qa < 1 || max_qb < 1)
        throw InfeasibleBatchError("choose_oplnc_params: no feasible batch pair >= (1,1)");

    // Ratio constraint: Q_B * lambda1 * sigma_aba ~= Q_A * lambda2 * sigma_bab.
    const double target_ratio = (lambda2 * sigma.bab) / (lambda1 * sigma.aba);
    OplncParams params;
    params.lambda1 = lambda1;
    params.lambda2 = lambda2;
    double best_mismatch = std::numeric_limits<double>::infinity();
    long best_size = -1;
    for (long qa = 1; qa <= max_qa; ++qa) {
        const double ideal_qb = static_cast<double>(qa) * target_ratio;
        // Clamp so extreme corner ratios still yield a best-effort pair.
        const long lo = std::clamp(static_cast<long>(std::floor(ideal_qb)), 1L, max_qb);
        const long hi = std::clamp(static_cast<long>(std::ceil(ideal_qb)), 1L, max_qb);
        for (long qb : {lo, hi}) {
            const double mismatch =
                std::abs(static_cast<double>(qb) - ideal_qb) / std::max(ideal_qb, 1.0);
            const long size = qa + qb;
            if (mismatch < best_mismatch - 1e-15 ||
                (mismatch <= best_mismatch + 1e-15 && size > best_size)) {
                best_mismatch = mismatch;
                best_size = size;
                params.q_a_batch = qa;
                params.q_b_batch = qb;
            }
        }
    }
    if (best_size < 0)
        throw InfeasibleBatchError("choose_oplnc_params: ratio constraint infeasible");

    // (sigma_aba~, sigma_bab~): boundary point on the ray the batch pair
    // actually schedules.
    const RateRegion plnc = make_region({{sigma.ab, 0.0}, {sigma.aba, sigma.bab}, {0.0, sigma.ba}});
    const double mu_batch = (static_cast<double>(params.q_b_batch) * lambda1) /
                            (static_cast<double>(params.q_a_batch) * lambda2);
    const RatePair corner = boundary_on_ray(plnc, mu_batch);

    const double rate_ab = arrivals.rate_a * len;
    const double rate_ba = arrivals.rate_b * len;
    const double margin_a = corner.r_ab / (sigma.ba - corner.r_ba) * (rate_ba / sigma.ba - 1.0) +
                            rate_ab / sigma.ba;
    const double margin_b = corner.r_ba / (sigma.ab - corner.r_ab) * (rate_ab / sigma.ab - 1.0) +
                            rate_ba / sigma.ab;
    if (!(margin_a < 0.0) || !(margin_b < 0.0))
        throw RateInfeasibleError("choose_oplnc_params: rate pair on or outside the stabilizable region");
    const double qs_a = static_cast<double>(params.q_a_batch) / (-margin_a);
    const double qs_b = static_cast<double>(params.q_b_batch) / (-margin_b);
    params.q_star = std::max<long>(static_cast<long>(std::floor(std::max(qs_a, qs_b))) + 1,
                                   std::max(params.q_a_batch, params.q_b_batch) + 1);
    return params;
}

// One decision of the opportunistic PLNC scheduler.
inline Step step_oplnc(QueueState state, const OplncParams& params, const CapacitySet& caps,
                       const SigmaSet& sigma, const ArrivalSpec& arrivals, Rng& rng) {
    Step step;
    const double len = arrivals.packet_len;
    const long qa_b = params.q_a_batch;
    const long qb_b = params.q_b_batch;
    if (state.q_a >= qa_b && state.q_b >= qb_b) {
        step.action = Action::plnc_batch;
        step.duration = plnc_batch_duration(qa_b, qb_b, caps, len);
        state.q_a -= qa_b;
        state.q_b -= qb_b;
        step.dep_a = qa_b;
        step.dep_b = qb_b;
        detail::add_arrivals(state, arrivals, step.duration, rng);
    } else if (state.q_a < qa_b && state.q_b > qb_b) {
        step.action = Action::tdmh_bwd;
        const long count = std::min(state.q_b, params.q_star);
        step.duration = static_cast<double>(count) * len / sigma.ba;
        state.q_b -= count;
        step.dep_b = count;
        detail::add_arrivals(state, arrivals, step.duration, rng);
    } else if (state.q_b < qb_b && state.q_a > qa_b) {
        step.action = Action::tdmh_fwd;
        const long count = std::min(state.q_a, params.q_star);
        step.duration = static_cast<double>(count) * len / sigma.ab;
        state.q_a -= count;
        step.dep_a = count;
        detail::add_arrivals(state, arrivals, step.duration, rng);
    } else if (state.q_a > 0 || state.q_b > 0) {
        step.action = Action::plnc_residual;
        step.duration = plnc_batch_duration(state.q_a, state.q_b, caps, len);
        step.dep_a = state.q_a;
        step.dep_b = state.q_b;
        state.q_a = 0;
        state.q_b = 0;
        detail::add_arrivals(state, arrivals, step.duration, rng);
    } else {
        step.action = Action::idle;
        if (!detail::idle_until_arrival(state, arrivals, rng, step.duration)) {
            step.next = state;
            return step;
        }
    }
    step.next = state;
    return step;
}

struct TraceSample {
    double t = 0.0;
    long q_a = 0;
    long q_b = 0;
    Action action = Action::idle;
};

struct SimTrace {
    std::vector<TraceSample> samples;
    std::array<long, 6> action_counts{};
    long dep_a = 0;
    long dep_b = 0;
    double elapsed = 0.0;
    long events = 0;
};

struct SimulateOptions {
    double horizon = 0.0;     // stop at this simulated time (0 = unlimited)
    long max_events = 0;      // stop after this many decisions (0 = unlimited)
    long sample_every = 1;    // record every n-th decision
    QueueState initial{};
    OplncParams oplnc{};      // used for SchedulerProtocol::oplnc
};

inline SimTrace simulate(SchedulerProtocol protocol, const CapacitySet& caps,
                         const ArrivalSpec& arrivals, const SimulateOptions& opts,
                         std::uint64_t seed) {
    if (opts.horizon <= 0.0 && opts.max_events <= 0)
        throw std::invalid_argument("simulate: need a positive horizon or event budget");
    arrivals.validate();
    const SigmaSet sigma = sigma_set(caps);
    Rng rng(seed, /*stream=*/0x5c4ed01eULL);
    SimTrace trace;
    QueueState state = opts.initial;
    trace.samples.push_back({state.t, state.q_a, state.q_b, Action::idle});
    while ((opts.horizon <= 0.0 || state.t < opts.horizon) &&
           (opts.max_events <= 0 || trace.events < opts.max_events)) {
        const Step step = protocol == SchedulerProtocol::omlnc
                              ? step_omlnc(state, sigma, arrivals, rng)
                              : step_oplnc(state, opts.oplnc, caps, sigma, arrivals, rng);
        if (step.action == Action::idle && step.duration == 0.0) break;  // drained, no arrivals
        state = step.next;
        trace.dep_a += step.dep_a;
        trace.dep_b += step.dep_b;
        trace.action_counts[static_cast<std::size_t>(step.action)] += 1;
        trace.events += 1;
        if (trace.events % std::max<long>(opts.sample_every, 1) == 0)
            trace.samples.push_back({state.t, state.q_a, state.q_b, step.action});
    }
    trace.elapsed = state.t;
    return trace;
}

// Convenience wrapper matching the common (horizon, seed) call shape.
inline SimTrace simulate(SchedulerProtocol protocol, const CapacitySet& caps,
                         const ArrivalSpec& arrivals, double horizon, std::uint64_t seed) {
    SimulateOptions opts;
    opts.horizon = horizon;
    if (protocol == SchedulerProtocol::oplnc)
        opts.oplnc = choose_oplnc_params(sigma_set(caps), arrivals);
    return simulate(protocol, caps, arrivals, opts, seed);
}

// Long-run throughput pair (bits per unit time) with both queues always
// backlogged.
inline RatePair saturated_throughput(SchedulerProtocol protocol, const CapacitySet& caps,
                                     double packet_len, long n_events,
                                     const OplncParams& params = {}) {
    const SigmaSet sigma = sigma_set(caps);
    double elapsed = 0.0;
    double bits_a = 0.0;
    double bits_b = 0.0;
    for (long i = 0; i < n_events; ++i) {
        if (protocol == SchedulerProtocol::omlnc) {
            elapsed += packet_len / sigma.min_sym;
            bits_a += packet_len;
            bits_b += packet_len;
        } else {
            elapsed += plnc_batch_duration(params.q_a_batch, params.q_b_batch, caps, packet_len);
            bits_a += static_cast<double>(params.q_a_batch) * packet_len;
            bits_b += static_cast<double>(params.q_b_batch) * packet_len;
        }
    }
    return {bits_a / elapsed, bits_b / elapsed};
}

// Empirical Foster-Lyapunov drift: mean V(n+1) - V(n) over steps whose V(n)
// is above the trace median. Negative for stable configurations.
inline double drift_estimate(const SimTrace& trace, const SigmaSet& sigma) {
    if (trace.samples.size() < 1000)
        throw std::invalid_argument("drift_estimate: trace too short (need >= 1000 samples)");
    std::vector<double> v(trace.samples.size());
    for (std::size_t i = 0; i < trace.samples.size(); ++i)
        v[i] = lyapunov_v({trace.samples[i].q_a, trace.samples[i].q_b, 0.0}, sigma);
    std::vector<double> sorted = v;
    std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
    const double median = sorted[sorted.size() / 2];
    double sum = 0.0;
    long count = 0;
    for (std::size_t i = 0; i + 1 < v.size(); ++i) {
        if (v[i] >= median) {
            sum += v[i + 1] - v[i];
            ++count;
        }
    }
    if (count == 0) throw std::invalid_argument("drift_estimate: no samples above median");
    return sum / static_cast<double>(count);
}

}  // namespace twrc
