#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <thread>
#include <vector>

#include "twrc/channel.hpp"
#include "twrc/regions.hpp"
#include "twrc/rng.hpp"
#include "twrc/stats.hpp"

namespace twrc {

enum class Cooperation { collab_all, collab_select_broadcast, select_single_relay };

struct DmtScenario {
    Protocol protocol = Protocol::tdmh;
    Cooperation cooperation = Cooperation::collab_all;

    void validate() const {
        if (protocol == Protocol::tdmh && cooperation == Cooperation::collab_select_broadcast)
            throw std::invalid_argument(
                "scenario: selected-broadcast cooperation applies to MLNC/PLNC only");
    }
};

struct DmtConfig {
    double m = 0.25;        // multiplexing gain
    double mu = 1.0;        // traffic ratio, r_ba = mu * r_ab
    double lambda_f = 0.5;  // forward time allocation
    double lambda_b = 0.5;  // backward time allocation
    std::size_t n_relays = 1;

    // min{(1+mu)*lambda_f, (1+1/mu)*lambda_b}, the common denominator of the
    // DMT formulas.
    double m_cap() const {
        return std::min((1.0 + mu) * lambda_f, (1.0 + 1.0 / mu) * lambda_b);
    }

    void validate(const DmtScenario& scenario) const {
        scenario.validate();
        if (!(mu > 0.0)) throw std::invalid_argument("dmt config: mu must be > 0");
        if (!(lambda_f > 0.0) || !(lambda_b > 0.0) ||
            std::abs(lambda_f + lambda_b - 1.0) > 1e-12)
            throw std::invalid_argument("dmt config: lambda_f + lambda_b must equal 1");
        if (n_relays == 0) throw std::invalid_argument("dmt config: need at least one relay");
        const double cap =
            scenario.protocol == Protocol::tdmh ? m_cap() / 2.0 : 2.0 * m_cap() / 3.0;
        if (!(m > 0.0) || !(m < cap))
            throw std::domain_error("dmt config: m outside the validity interval");
    }
};

struct MutualInfo {
    double i_f = 0.0;
    double i_b = 0.0;
};

enum class SelectionCriterion {
    tdmh_sigma_ab,      // max harmonic mean of the two hop capacities
    mlnc_broadcast,     // max min{C_DA, C_DB}
    plnc_broadcast,     // max C_DA + C_DB
    mlnc_end_to_end,    // max sigma_abb
    plnc_end_to_end,    // max sigma_aba + sigma_bab
};

inline std::size_t select_relay(const FadingDraw& fading, double snr,
                                SelectionCriterion criterion) {
    const std::size_t n = fading.num_relays();
    if (n == 0) throw std::invalid_argument("select_relay: empty relay set");
    std::size_t best = 0;
    double best_val = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double ga = std::norm(fading.h_da[i]);
        const double gb = std::norm(fading.h_db[i]);
        const double c_a = capacity(snr, ga);
        const double c_b = capacity(snr, gb);
        double val = 0.0;
        switch (criterion) {
            case SelectionCriterion::tdmh_sigma_ab:
                val = (c_a > 0.0 && c_b > 0.0) ? 1.0 / (1.0 / c_a + 1.0 / c_b) : 0.0;
                break;
            case SelectionCriterion::mlnc_broadcast:
                val = std::min(c_a, c_b);
                break;
            case SelectionCriterion::plnc_broadcast:
                val = c_a + c_b;
                break;
            case SelectionCriterion::mlnc_end_to_end:
            case SelectionCriterion::plnc_end_to_end: {
                if (!(c_a > 0.0) || !(c_b > 0.0)) {
                    val = 0.0;
                    break;
                }
                CapacitySet caps;
                caps.c_ad = caps.c_da = c_a;
                caps.c_bd = caps.c_db = c_b;
                const SigmaSet s = sigma_set(caps);
                val = criterion == SelectionCriterion::mlnc_end_to_end ? s.abb
                                                                       : s.aba + s.bab;
                break;
            }
        }
        if (val > best_val) {
            best_val = val;
            best = i;
        }
    }
    return best;
}

// Forward/backward mutual information per channel use, time-slot prefactor
// included. Broadcast under full collaboration is the coherent sum |sum h|^2,
// receive under collaboration is the MRC sum of |h|^2.
inline MutualInfo mutual_info(const DmtScenario& scenario, const FadingDraw& fading,
                              double snr) {
    const std::size_t n = fading.num_relays();
    if (n == 0) throw std::invalid_argument("mutual_info: empty relay set");
    scenario.validate();

    double sum_ga = 0.0, sum_gb = 0.0;
    std::complex<double> coh_a{0.0, 0.0}, coh_b{0.0, 0.0};
    for (std::size_t i = 0; i < n; ++i) {
        sum_ga += std::norm(fading.h_da[i]);
        sum_gb += std::norm(fading.h_db[i]);
        coh_a += fading.h_da[i];
        coh_b += fading.h_db[i];
    }
    const double i1 = std::log2(1.0 + snr * sum_ga);
    const double i2 = std::log2(1.0 + snr * sum_gb);

    MutualInfo mi;
    if (scenario.protocol == Protocol::tdmh) {
        if (scenario.cooperation == Cooperation::collab_all) {
            mi.i_f = mi.i_b = 0.5 * std::min(i1, i2);
        } else {
            const std::size_t k = select_relay(fading, snr, SelectionCriterion::tdmh_sigma_ab);
            const double a = std::log2(1.0 + snr * std::norm(fading.h_da[k]));
            const double b = std::log2(1.0 + snr * std::norm(fading.h_db[k]));
            mi.i_f = mi.i_b = 0.5 * std::min(a, b);
        }
        return mi;
    }

    const bool mlnc = scenario.protocol == Protocol::mlnc;
    switch (scenario.cooperation) {
        case Cooperation::collab_all: {
            const double t1 = std::log2(1.0 + snr * std::norm(coh_a));
            const double t2 = std::log2(1.0 + snr * std::norm(coh_b));
            if (mlnc) {
                const double bc = std::min(t1, t2);
                mi.i_f = (2.0 / 3.0) * std::min(i1, bc);
                mi.i_b = (2.0 / 3.0) * std::min(i2, bc);
            } else {
                mi.i_f = (2.0 / 3.0) * std::min(i1, t2);
                mi.i_b = (2.0 / 3.0) * std::min(t1, i2);
            }
            return mi;
        }
        case Cooperation::collab_select_broadcast: {
            const std::size_t k =
                select_relay(fading, snr,
                             mlnc ? SelectionCriterion::mlnc_broadcast
                                  : SelectionCriterion::plnc_broadcast);
            const double t1 = std::log2(1.0 + snr * std::norm(fading.h_da[k]));
            const double t2 = std::log2(1.0 + snr * std::norm(fading.h_db[k]));
            if (mlnc) {
                mi.i_f = mi.i_b = (2.0 / 3.0) * std::min(t1, t2);
            } else {
                mi.i_f = (2.0 / 3.0) * std::min(i1, t2);
                mi.i_b = (2.0 / 3.0) * std::min(t1, i2);
            }
            return mi;
        }
        case Cooperation::select_single_relay: {
            const std::size_t k =
                select_relay(fading, snr,
                             mlnc ? SelectionCriterion::mlnc_end_to_end
                                  : SelectionCriterion::plnc_end_to_end);
            const double a = std::log2(1.0 + snr * std::norm(fading.h_da[k]));
            const double b = std::log2(1.0 + snr * std::norm(fading.h_db[k]));
            mi.i_f = mi.i_b = (2.0 / 3.0) * std::min(a, b);
            return mi;
        }
    }
    throw std::logic_error("mutual_info: unknown cooperation mode");
}

// Target rate pair scaling with SNR: r_ab + r_ba = m * log2(snr).
inline RatePair target_rates(const DmtConfig& config, double snr) {
    if (!(snr > 1.0)) throw std::domain_error("target_rates: snr must be > 1");
    const double total = config.m * std::log2(snr);
    return {total / (1.0 + config.mu), total * config.mu / (1.0 + config.mu)};
}

namespace detail {

// Trials are split into fixed blocks seeded independently, so the outcome
// does not depend on how blocks are assigned to workers.
inline constexpr long kOutageBlock = 1L << 14;

inline long outage_block(const DmtScenario& scenario, const DmtConfig& config, double snr,
                         const RatePair& target, long trials, std::uint64_t seed,
                         std::uint64_t block_index) {
    Rng rng(seed, /*stream=*/0x0d310c4eULL, /*substream=*/block_index);
    FadingDraw fading;
    fading.h_da.resize(config.n_relays);
    fading.h_db.resize(config.n_relays);
    long outages = 0;
    for (long t = 0; t < trials; ++t) {
        for (std::size_t i = 0; i < config.n_relays; ++i) {
            fading.h_da[i] = rng.complex_gaussian(1.0);
            fading.h_db[i] = rng.complex_gaussian(1.0);
        }
        const MutualInfo mi = mutual_info(scenario, fading, snr);
        if (config.lambda_f * mi.i_f < target.r_ab || config.lambda_b * mi.i_b < target.r_ba)
            ++outages;
    }
    return outages;
}

}  // namespace detail

inline BinomialEstimate outage_prob(const DmtScenario& scenario, const DmtConfig& config,
                                    double snr, long n_trials, std::uint64_t seed,
                                    unsigned threads = 1) {
    if (n_trials < 1) throw std::invalid_argument("outage_prob: need at least one trial");
    config.validate(scenario);
    const RatePair target = target_rates(config, snr);
    const long n_blocks = (n_trials + detail::kOutageBlock - 1) / detail::kOutageBlock;
    std::vector<long> counts(static_cast<std::size_t>(n_blocks), 0);
    auto run_blocks = [&](long first, long past) {
        for (long b = first; b < past; ++b) {
            const long lo = b * detail::kOutageBlock;
            const long len = std::min<long>(detail::kOutageBlock, n_trials - lo);
            counts[static_cast<std::size_t>(b)] = detail::outage_block(
                scenario, config, snr, target, len, seed, static_cast<std::uint64_t>(b));
        }
    };
    const unsigned workers = std::max(1u, std::min<unsigned>(threads, n_blocks));
    if (workers == 1) {
        run_blocks(0, n_blocks);
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) {
            const long first = static_cast<long>(w) * n_blocks / workers;
            const long past = static_cast<long>(w + 1) * n_blocks / workers;
            pool.emplace_back(run_blocks, first, past);
        }
        for (auto& th : pool) th.join();
    }
    long outages = 0;
    for (long c : counts) outages += c;
    return wilson_interval(outages, n_trials);
}

struct OutageCurve {
    std::vector<double> snr_db_grid;
    std::vector<BinomialEstimate> outage_estimates;
    DmtScenario scenario;
    DmtConfig config;
};

inline OutageCurve outage_curve(const DmtScenario& scenario, const DmtConfig& config,
                                const std::vector<double>& snr_db_grid, long trials_per_point,
                                std::uint64_t seed, unsigned threads = 1) {
    for (std::size_t i = 0; i + 1 < snr_db_grid.size(); ++i)
        if (!(snr_db_grid[i] < snr_db_grid[i + 1]))
            throw std::invalid_argument("outage_curve: SNR grid must be strictly increasing");
    OutageCurve curve;
    curve.snr_db_grid = snr_db_grid;
    curve.scenario = scenario;
    curve.config = config;
    for (std::size_t i = 0; i < snr_db_grid.size(); ++i)
        curve.outage_estimates.push_back(
            outage_prob(scenario, config, db_to_linear(snr_db_grid[i]), trials_per_point,
                        splitmix64(seed + i), threads));
    return curve;
}

// Theoretical diversity gain for the scenario.
inline double dmt_theoretical(const DmtScenario& scenario, const DmtConfig& config) {
    config.validate(scenario);
    const double cap = config.m_cap();
    const double n = static_cast<double>(config.n_relays);
    if (scenario.protocol == Protocol::tdmh) return n * (1.0 - 2.0 * config.m / cap);
    if (scenario.cooperation == Cooperation::collab_all)
        return 1.0 - 3.0 * config.m / (2.0 * cap);
    return n * (1.0 - 3.0 * config.m / (2.0 * cap));
}

struct SlopeEstimate {
    double d_hat = 0.0;
    double d_stderr = 0.0;
    std::vector<std::size_t> window;  // indices into the curve grid
};

struct InsufficientTrialsError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Default regression window: top third of the grid restricted to points with
// outage below 0.1 and at least 100 observed events.
inline std::vector<std::size_t> default_slope_window(const OutageCurve& curve,
                                                     double max_outage = 0.1,
                                                     long min_events = 100) {
    std::vector<std::size_t> window;
    const std::size_t n = curve.snr_db_grid.size();
    const std::size_t first = n - std::max<std::size_t>(n / 3, 3);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& e = curve.outage_estimates[i];
        if (i >= first && e.p_hat < max_outage && e.successes >= min_events)
            window.push_back(i);
    }
    if (window.size() < 3) {
        // Fall back to every qualifying point when the top third is too thin.
        window.clear();
        for (std::size_t i = 0; i < n; ++i) {
            const auto& e = curve.outage_estimates[i];
            if (e.p_hat < max_outage && e.successes >= min_events) window.push_back(i);
        }
    }
    return window;
}

// Least-squares slope of -log10(outage) against log10(snr).
inline SlopeEstimate estimate_slope(const OutageCurve& curve,
                                    const std::vector<std::size_t>& window) {
    if (window.size() < 3)
        throw std::invalid_argument("estimate_slope: need at least 3 window points");
    std::vector<double> x, y;
    for (std::size_t i : window) {
        if (i >= curve.snr_db_grid.size())
            throw std::invalid_argument("estimate_slope: window index out of range");
        const auto& e = curve.outage_estimates[i];
        if (e.successes <= 0)
            throw InsufficientTrialsError("estimate_slope: zero outage count in window");
        x.push_back(curve.snr_db_grid[i] / 10.0);  // log10 of linear SNR
        y.push_back(-std::log10(e.p_hat));
    }
    const LineFit fit = least_squares(x, y);
    SlopeEstimate est;
    est.d_hat = fit.slope;
    est.d_stderr = fit.slope_stderr;
    est.window = window;
    return est;
}

inline SlopeEstimate estimate_slope(const OutageCurve& curve) {
    return estimate_slope(curve, default_slope_window(curve));
}

struct Lemma2Result {
    double empirical = 0.0;
    double bound = 0.0;
    long trials = 0;
    long hits = 0;
};

// Tail of a sum of independent exponentials with rates sigma_k versus the
// analytic bound theta^K * prod(sigma_k) / K!.
inline Lemma2Result lemma2_tail(const std::vector<double>& sigmas, double theta,
                                long n_trials, std::uint64_t seed) {
    if (!(theta > 0.0)) throw std::invalid_argument("lemma2_tail: theta must be > 0");
    if (sigmas.empty()) throw std::invalid_argument("lemma2_tail: need at least one rate");
    for (double s : sigmas)
        if (!(s > 0.0)) throw std::invalid_argument("lemma2_tail: rates must be > 0");
    if (n_trials < 1) throw std::invalid_argument("lemma2_tail: need at least one trial");
    Rng rng(seed, /*stream=*/0x1e33a2ULL);
    long hits = 0;
    for (long t = 0; t < n_trials; ++t) {
        double sum = 0.0;
        for (double s : sigmas) sum += rng.exponential(1.0 / s);
        if (sum < theta) ++hits;
    }
    Lemma2Result res;
    res.trials = n_trials;
    res.hits = hits;
    res.empirical = static_cast<double>(hits) / static_cast<double>(n_trials);
    double bound = 1.0;
    for (std::size_t k = 0; k < sigmas.size(); ++k)
        bound *= theta * sigmas[k] / static_cast<double>(k + 1);
    res.bound = bound;
    return res;
}

struct Lemma3Config {
    std::size_t t_size = 1;        // |T|: number of independent candidate vectors
    double theta_exponent = 0.5;   // theta(gamma) = gamma^(-theta_exponent)
    double snr_lo = 1e3;
    double snr_hi = 1e5;
};

struct Lemma3Result {
    double empirical_lo = 0.0;
    double empirical_hi = 0.0;
    double fitted_exponent = 0.0;
    double predicted_exponent = 0.0;
};

// Tail of the maximized selection functional f(V) = V1*V2/(V1+V2) over |T|
// independent exponential pairs; the predicted decay exponent is |T| times
// the threshold exponent.
inline Lemma3Result lemma3_tail_check(const Lemma3Config& config, long n_trials,
                                      std::uint64_t seed) {
    if (config.t_size == 0) throw std::invalid_argument("lemma3_tail_check: |T| must be >= 1");
    if (!(config.theta_exponent > 0.0) || !(config.snr_hi > config.snr_lo) ||
        !(config.snr_lo > 1.0))
        throw std::invalid_argument("lemma3_tail_check: bad threshold configuration");
    if (n_trials < 1) throw std::invalid_argument("lemma3_tail_check: need >= 1 trial");
    Rng rng(seed, /*stream=*/0x1e33a3ULL);
    const double theta_lo = std::pow(config.snr_lo, -config.theta_exponent);
    const double theta_hi = std::pow(config.snr_hi, -config.theta_exponent);
    long hits_lo = 0, hits_hi = 0;
    for (long t = 0; t < n_trials; ++t) {
        double best = 0.0;
        for (std::size_t i = 0; i < config.t_size; ++i) {
            const double v1 = rng.exponential(1.0);
            const double v2 = rng.exponential(1.0);
            best = std::max(best, v1 * v2 / (v1 + v2));
        }
        if (best < theta_lo) ++hits_lo;
        if (best < theta_hi) ++hits_hi;
    }
    Lemma3Result res;
    res.empirical_lo = static_cast<double>(hits_lo) / static_cast<double>(n_trials);
    res.empirical_hi = static_cast<double>(hits_hi) / static_cast<double>(n_trials);
    res.predicted_exponent = static_cast<double>(config.t_size) * config.theta_exponent;
    if (hits_lo > 0 && hits_hi > 0) {
        res.fitted_exponent = -(std::log10(res.empirical_hi) - std::log10(res.empirical_lo)) /
                              (std::log10(config.snr_hi) - std::log10(config.snr_lo));
    }
    return res;
}

}  // namespace twrc
