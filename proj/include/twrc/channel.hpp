#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "twrc/rng.hpp"

namespace twrc {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

inline double distance(const Vec2& a, const Vec2& b) {
    return std::hypot(a.x - b.x, a.y - b.y);
}

// Node geometry and radio parameters for a two-way relay system: sources A
// and B plus one or more candidate relays between them.
struct RelayTopology {
    Vec2 pos_a;
    Vec2 pos_b;
    std::vector<Vec2> relay_positions;
    double path_loss_exponent = 3.5;
    double tx_power_dbm = 18.0;
    double noise_power_dbm = -70.0;

    void validate() const {
        if (relay_positions.empty())
            throw std::invalid_argument("topology: no relay positions");
        if (path_loss_exponent <= 0.0)
            throw std::invalid_argument("topology: path loss exponent must be > 0");
        if (distance(pos_a, pos_b) == 0.0)
            throw std::invalid_argument("topology: A and B coincide");
    }

    std::size_t num_relays() const { return relay_positions.size(); }
};

// Relays dropped uniformly on a vertical segment of length `relay_spread`
// centered between A and B. spread 0 puts every relay at the midpoint.
inline RelayTopology make_line_topology(double ab_distance, double relay_spread,
                                        std::size_t num_relays, std::uint64_t seed) {
    if (ab_distance <= 0.0) throw std::invalid_argument("ab_distance must be > 0");
    if (num_relays == 0) throw std::invalid_argument("need at least one relay");
    RelayTopology topo;
    topo.pos_a = {0.0, 0.0};
    topo.pos_b = {ab_distance, 0.0};
    Rng rng(seed, /*stream=*/0x70706f6cULL);
    const double mid = ab_distance / 2.0;
    for (std::size_t i = 0; i < num_relays; ++i) {
        double y = 0.0;
        if (relay_spread > 0.0) y = (rng.uniform() - 0.5) * relay_spread;
        topo.relay_positions.push_back({mid, y});
    }
    return topo;
}

// Mean of |h|^2 under the pure power-law path loss model.
inline double gain_variance(double dist, double exponent) {
    if (dist <= 0.0) throw std::domain_error("gain_variance: distance must be > 0");
    return std::pow(dist, -exponent);
}

// One fading realization: a single reciprocal gain per undirected link.
struct FadingDraw {
    std::vector<std::complex<double>> h_da;
    std::vector<std::complex<double>> h_db;

    std::size_t num_relays() const { return h_da.size(); }
};

inline FadingDraw draw_fading(const RelayTopology& topo, std::uint64_t seed) {
    topo.validate();
    FadingDraw draw;
    Rng rng(seed, /*stream=*/0xfad1fad1ULL);
    draw.h_da.reserve(topo.num_relays());
    draw.h_db.reserve(topo.num_relays());
    for (const auto& pos : topo.relay_positions) {
        const double var_a = gain_variance(distance(pos, topo.pos_a), topo.path_loss_exponent);
        const double var_b = gain_variance(distance(pos, topo.pos_b), topo.path_loss_exponent);
        draw.h_da.push_back(rng.complex_gaussian(var_a));
        draw.h_db.push_back(rng.complex_gaussian(var_b));
    }
    return draw;
}

// Unit-variance fading on every link, used where absolute path loss is
// irrelevant (outage-slope estimation).
inline FadingDraw draw_fading_unit(std::size_t num_relays, Rng& rng) {
    FadingDraw draw;
    draw.h_da.reserve(num_relays);
    draw.h_db.reserve(num_relays);
    for (std::size_t i = 0; i < num_relays; ++i) {
        draw.h_da.push_back(rng.complex_gaussian(1.0));
        draw.h_db.push_back(rng.complex_gaussian(1.0));
    }
    return draw;
}

// Shannon capacity in bits per unit time.
inline double capacity(double snr_linear, double gain_sq) {
    return std::log2(1.0 + snr_linear * gain_sq);
}

// The four directed link capacities of one relay.
struct CapacitySet {
    double c_ad = 0.0;
    double c_db = 0.0;
    double c_bd = 0.0;
    double c_da = 0.0;

    double c_min() const { return std::min(c_da, c_db); }
};

// Equal-power case: reciprocity makes each undirected link a single capacity.
inline CapacitySet capacities_for_relay(const FadingDraw& fading, std::size_t relay_index,
                                        double snr_linear) {
    if (relay_index >= fading.num_relays())
        throw std::out_of_range("capacities_for_relay: relay index out of range");
    const double ga = std::norm(fading.h_da[relay_index]);
    const double gb = std::norm(fading.h_db[relay_index]);
    CapacitySet caps;
    caps.c_ad = caps.c_da = capacity(snr_linear, ga);
    caps.c_bd = caps.c_db = capacity(snr_linear, gb);
    return caps;
}

// Power-asymmetric variant: distinct SNRs for the source-to-relay and
// relay-to-source directions.
inline CapacitySet capacities_for_relay(const FadingDraw& fading, std::size_t relay_index,
                                        double snr_to_relay, double snr_from_relay) {
    if (relay_index >= fading.num_relays())
        throw std::out_of_range("capacities_for_relay: relay index out of range");
    const double ga = std::norm(fading.h_da[relay_index]);
    const double gb = std::norm(fading.h_db[relay_index]);
    CapacitySet caps;
    caps.c_ad = capacity(snr_to_relay, ga);
    caps.c_da = capacity(snr_from_relay, ga);
    caps.c_bd = capacity(snr_to_relay, gb);
    caps.c_db = capacity(snr_from_relay, gb);
    return caps;
}

// Transmit SNR such that the mean received SNR at the A-B midpoint distance
// equals snr_mid_linear. The topology then only scales per-link SNR.
inline double tx_snr_for_midpoint(const RelayTopology& topo, double snr_mid_linear) {
    const double d_mid = distance(topo.pos_a, topo.pos_b) / 2.0;
    return snr_mid_linear / gain_variance(d_mid, topo.path_loss_exponent);
}

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

}  // namespace twrc
