#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "twrc/regions.hpp"

namespace twrc {

// Maximum sum rate r_ab + r_ba over the protocol's rate region, attained at
// a region corner.
inline double max_sum_rate(const CapacitySet& caps, Protocol protocol) {
    const SigmaSet s = sigma_set(caps);
    switch (protocol) {
        case Protocol::tdmh:
            return std::max(s.ab, s.ba);
        case Protocol::mlnc:
            if (caps.c_db <= caps.c_da) return std::max({s.ab, s.bb, 2.0 * s.abb});
            return std::max({s.ba, s.aa, 2.0 * s.min_sym});
        case Protocol::plnc:
            return std::max({s.ab, s.ba, s.aba + s.bab});
    }
    throw std::logic_error("max_sum_rate: unknown protocol");
}

// Maximum sum rate under the traffic pattern constraint r_ba = mu * r_ab.
inline double max_sum_rate_mu(const CapacitySet& caps, Protocol protocol, double mu) {
    if (!(mu > 0.0)) throw std::domain_error("max_sum_rate_mu: mu must be > 0");
    const SigmaSet s = sigma_set(caps);
    switch (protocol) {
        case Protocol::tdmh:
            return (1.0 + mu) / (1.0 / s.ab + mu / s.ba);
        case Protocol::mlnc:
            return (1.0 + mu) /
                   (1.0 / caps.c_ad + mu / caps.c_bd + std::max(1.0, mu) / caps.c_min());
        case Protocol::plnc:
            return (1.0 + mu) / (1.0 / caps.c_ad + mu / caps.c_bd +
                                 std::max(mu / caps.c_da, 1.0 / caps.c_db));
    }
    throw std::logic_error("max_sum_rate_mu: unknown protocol");
}

// Throughput gain of one protocol over another, in dB.
inline double nc_gain(double r_num, double r_den) {
    if (!(r_num > 0.0) || !(r_den > 0.0))
        throw std::domain_error("nc_gain: rates must be > 0");
    return 10.0 * std::log10(r_num / r_den);
}

// Gains over TDMH as a function of the traffic pattern parameter mu:
// rho_mt (MLNC), rho_pt (PLNC), rho_omt (TDMH/MLNC time-sharing hull).
struct GainCurve {
    std::vector<double> mu_grid;
    std::vector<double> rho_mt;
    std::vector<double> rho_pt;
    std::vector<double> rho_omt;
};

// Sum rate of the time-sharing hull along the ray r_ba = mu * r_ab.
inline double hull_sum_rate_mu(const CapacitySet& caps, double mu) {
    const SigmaSet s = sigma_set(caps);
    const RateRegion hull = hull_tdmh_mlnc(region_tdmh(s), region_mlnc(caps));
    const RatePair p = boundary_on_ray(hull, mu);
    return p.r_ab + p.r_ba;
}

inline GainCurve gain_curve(const CapacitySet& caps, const std::vector<double>& mu_grid) {
    GainCurve curve;
    curve.mu_grid = mu_grid;
    for (std::size_t i = 0; i + 1 < mu_grid.size(); ++i)
        if (!(mu_grid[i] < mu_grid[i + 1]))
            throw std::invalid_argument("gain_curve: mu grid must be strictly increasing");
    for (double mu : mu_grid) {
        if (!(mu > 0.0)) throw std::domain_error("gain_curve: mu grid must be positive");
        const double tdmh = max_sum_rate_mu(caps, Protocol::tdmh, mu);
        curve.rho_mt.push_back(nc_gain(max_sum_rate_mu(caps, Protocol::mlnc, mu), tdmh));
        curve.rho_pt.push_back(nc_gain(max_sum_rate_mu(caps, Protocol::plnc, mu), tdmh));
        curve.rho_omt.push_back(nc_gain(hull_sum_rate_mu(caps, mu), tdmh));
    }
    return curve;
}

// Log-spaced grid; odd default count so that mu = 1 lands exactly on the
// grid of the default [0.05, 20] range.
inline std::vector<double> log_mu_grid(double mu_min = 0.05, double mu_max = 20.0,
                                       std::size_t points = 61) {
    if (!(mu_min > 0.0) || !(mu_max > mu_min) || points < 2)
        throw std::invalid_argument("log_mu_grid: bad range");
    std::vector<double> grid(points);
    const double l0 = std::log(mu_min);
    const double l1 = std::log(mu_max);
    for (std::size_t i = 0; i < points; ++i)
        grid[i] = std::exp(l0 + (l1 - l0) * static_cast<double>(i) /
                                    static_cast<double>(points - 1));
    return grid;
}

// Fading-averaged gain curves: per-draw dB gains averaged across draws.
inline GainCurve gain_curve_fading(const RelayTopology& topo, std::size_t relay_index,
                                   double snr_mid_linear, long trials, std::uint64_t seed,
                                   const std::vector<double>& mu_grid) {
    if (trials < 1) throw std::invalid_argument("gain_curve_fading: trials must be >= 1");
    const double snr_tx = tx_snr_for_midpoint(topo, snr_mid_linear);
    GainCurve avg;
    avg.mu_grid = mu_grid;
    avg.rho_mt.assign(mu_grid.size(), 0.0);
    avg.rho_pt.assign(mu_grid.size(), 0.0);
    avg.rho_omt.assign(mu_grid.size(), 0.0);
    for (long t = 0; t < trials; ++t) {
        const FadingDraw fading = draw_fading(topo, splitmix64(seed) + static_cast<std::uint64_t>(t));
        const CapacitySet caps = capacities_for_relay(fading, relay_index, snr_tx);
        const GainCurve one = gain_curve(caps, mu_grid);
        for (std::size_t i = 0; i < mu_grid.size(); ++i) {
            avg.rho_mt[i] += one.rho_mt[i];
            avg.rho_pt[i] += one.rho_pt[i];
            avg.rho_omt[i] += one.rho_omt[i];
        }
    }
    for (std::size_t i = 0; i < mu_grid.size(); ++i) {
        avg.rho_mt[i] /= static_cast<double>(trials);
        avg.rho_pt[i] /= static_cast<double>(trials);
        avg.rho_omt[i] /= static_cast<double>(trials);
    }
    return avg;
}

}  // namespace twrc
