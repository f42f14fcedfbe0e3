#pragma once

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "twrc/channel.hpp"
#include "twrc/dmt.hpp"
#include "twrc/regions.hpp"
#include "twrc/scheduler.hpp"
#include "twrc/sumrate.hpp"

namespace twrc {

inline constexpr const char* kVersion = "1.0.0";

struct ConfigValidationError : std::runtime_error {
    std::vector<std::string> fields;

    explicit ConfigValidationError(std::vector<std::string> bad_fields)
        : std::runtime_error("invalid config fields: " + join(bad_fields)),
          fields(std::move(bad_fields)) {}

    static std::string join(const std::vector<std::string>& fs) {
        std::string out;
        for (std::size_t i = 0; i < fs.size(); ++i) {
            if (i) out += ", ";
            out += fs[i];
        }
        return out;
    }
};

// Flat key=value configuration. '#' starts a comment; blank lines ignored.
inline std::map<std::string, std::string> parse_keyvalues(std::istream& in) {
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t\r");
            const auto b = s.find_last_not_of(" \t\r");
            return a == std::string::npos ? std::string{} : s.substr(a, b - a + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        if (!key.empty()) kv[key] = trim(line.substr(eq + 1));
    }
    return kv;
}

inline std::map<std::string, std::string> parse_keyvalue_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    return parse_keyvalues(in);
}

struct ExperimentConfig {
    std::string kind;  // region | gain | schedule | dmt | lemma-check
    std::uint64_t seed = 1;
    std::string out_dir = ".";
    unsigned threads = 1;
    std::map<std::string, std::string> params;

    bool has(const std::string& key) const { return params.count(key) != 0; }

    std::string get(const std::string& key, const std::string& fallback = "") const {
        auto it = params.find(key);
        return it == params.end() ? fallback : it->second;
    }

    double get_double(const std::string& key, double fallback) const {
        auto it = params.find(key);
        if (it == params.end()) return fallback;
        std::size_t pos = 0;
        const double v = std::stod(it->second, &pos);
        if (pos != it->second.size())
            throw ConfigValidationError({key});
        return v;
    }

    long get_long(const std::string& key, long fallback) const {
        auto it = params.find(key);
        if (it == params.end()) return fallback;
        std::size_t pos = 0;
        const long v = std::stol(it->second, &pos);
        if (pos != it->second.size())
            throw ConfigValidationError({key});
        return v;
    }
};

namespace detail {

inline std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << content;
    }
    std::filesystem::rename(tmp, path);
}

inline std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

}  // namespace detail

inline CapacitySet parse_caps(const std::string& spec) {
    const auto parts = detail::split_list(spec);
    if (parts.size() != 4) throw ConfigValidationError({"caps"});
    try {
        return {std::stod(parts[0]), std::stod(parts[1]), std::stod(parts[2]),
                std::stod(parts[3])};
    } catch (const std::exception&) {
        throw ConfigValidationError({"caps"});
    }
}

inline const char* action_name(Action a) {
    switch (a) {
        case Action::mlnc_pair: return "mlnc_pair";
        case Action::tdmh_fwd: return "tdmh_fwd";
        case Action::tdmh_bwd: return "tdmh_bwd";
        case Action::plnc_batch: return "plnc_batch";
        case Action::plnc_residual: return "plnc_residual";
        case Action::idle: return "idle";
    }
    return "unknown";
}

struct RunManifest {
    std::vector<std::string> config_echo;  // sorted key=value lines
    std::string version = kVersion;
    double wall_seconds = 0.0;
    std::vector<std::pair<std::string, std::uint64_t>> output_checksums;
    std::vector<std::string> warnings;

    std::string render() const {
        std::ostringstream out;
        out << "version=" << version << "\n";
        for (const auto& line : config_echo) out << line << "\n";
        for (const auto& w : warnings) out << "warning=" << w << "\n";
        for (const auto& [file, sum] : output_checksums) {
            char hex[20];
            std::snprintf(hex, sizeof hex, "%016llx",
                          static_cast<unsigned long long>(sum));
            out << "output=" << file << " fnv1a=" << hex << "\n";
        }
        out << "wall_seconds=" << detail::fmt(wall_seconds) << "\n";
        return out.str();
    }
};

namespace detail {

struct ExperimentOutputs {
    // (file name, content) pairs, in emission order.
    std::vector<std::pair<std::string, std::string>> files;
    std::vector<std::string> warnings;
};

inline std::string region_csv(const RateRegion& region) {
    std::ostringstream out;
    out << "kind,r_ab,r_ba\n";
    for (const auto& v : region.vertices)
        out << "vertex," << fmt(v.r_ab) << "," << fmt(v.r_ba) << "\n";
    // Boundary polyline: each edge subdivided for plotting.
    const int segs = 16;
    const std::size_t n = region.vertices.size();
    for (std::size_t i = 0; i < n; ++i) {
        const auto& a = region.vertices[i];
        const auto& b = region.vertices[(i + 1) % n];
        for (int s = 0; s < segs; ++s) {
            const double u = static_cast<double>(s) / segs;
            out << "boundary," << fmt(a.r_ab + u * (b.r_ab - a.r_ab)) << ","
                << fmt(a.r_ba + u * (b.r_ba - a.r_ba)) << "\n";
        }
    }
    return out.str();
}

inline ExperimentOutputs run_region(const ExperimentConfig& cfg) {
    if (!cfg.has("caps")) throw ConfigValidationError({"caps"});
    const CapacitySet caps = parse_caps(cfg.get("caps"));
    const SigmaSet s = sigma_set(caps);
    const std::string which = cfg.get("protocol", "all");
    ExperimentOutputs out;
    auto emit = [&](const std::string& name, const RateRegion& region) {
        out.files.emplace_back("region_" + name + ".csv", region_csv(region));
    };
    const RateRegion tdmh = region_tdmh(s);
    const RateRegion mlnc = region_mlnc(caps);
    if (which == "all" || which == "tdmh") emit("tdmh", tdmh);
    if (which == "all" || which == "mlnc") emit("mlnc", mlnc);
    if (which == "all" || which == "plnc") emit("plnc", region_plnc(caps));
    if (which == "all" || which == "hull") emit("hull", hull_tdmh_mlnc(tdmh, mlnc));
    if (out.files.empty()) throw ConfigValidationError({"protocol"});
    return out;
}

inline std::string gain_csv(const GainCurve& curve) {
    std::ostringstream out;
    out << "mu,rho_mt,rho_pt,rho_omt\n";
    for (std::size_t i = 0; i < curve.mu_grid.size(); ++i)
        out << fmt(curve.mu_grid[i]) << "," << fmt(curve.rho_mt[i]) << ","
            << fmt(curve.rho_pt[i]) << "," << fmt(curve.rho_omt[i]) << "\n";
    return out.str();
}

inline ExperimentOutputs run_gain(const ExperimentConfig& cfg) {
    const auto grid =
        log_mu_grid(cfg.get_double("mu_min", 0.05), cfg.get_double("mu_max", 20.0),
                    static_cast<std::size_t>(cfg.get_long("points", 61)));
    ExperimentOutputs out;
    if (cfg.has("caps")) {
        out.files.emplace_back("gain.csv", gain_csv(gain_curve(parse_caps(cfg.get("caps")), grid)));
        return out;
    }
    // Fading-averaged mode over a generated line topology.
    RelayTopology topo = make_line_topology(cfg.get_double("ab_distance", 50.0),
                                            cfg.get_double("relay_spread", 0.0),
                                            static_cast<std::size_t>(cfg.get_long("num_relays", 1)),
                                            cfg.seed);
    topo.path_loss_exponent = cfg.get_double("path_loss_exponent", 3.5);
    topo.tx_power_dbm = cfg.get_double("tx_power_dbm", 18.0);
    topo.noise_power_dbm = cfg.get_double("noise_power_dbm", -70.0);
    const long trials = cfg.get_long("trials", 1000);
    if (trials < 1) throw ConfigValidationError({"trials"});
    const double snr_tx = db_to_linear(topo.tx_power_dbm - topo.noise_power_dbm);
    const double d_mid = distance(topo.pos_a, topo.pos_b) / 2.0;
    const double snr_mid = snr_tx * gain_variance(d_mid, topo.path_loss_exponent);
    const GainCurve curve = gain_curve_fading(
        topo, static_cast<std::size_t>(cfg.get_long("relay_index", 0)), snr_mid, trials,
        cfg.seed, grid);
    out.files.emplace_back("gain.csv", gain_csv(curve));
    return out;
}

inline ExperimentOutputs run_schedule(const ExperimentConfig& cfg) {
    std::vector<std::string> bad;
    if (!cfg.has("caps")) bad.push_back("caps");
    const std::string proto_str = cfg.get("protocol", "omlnc");
    if (proto_str != "omlnc" && proto_str != "oplnc") bad.push_back("protocol");
    if (!bad.empty()) throw ConfigValidationError(bad);
    const CapacitySet caps = parse_caps(cfg.get("caps"));
    ArrivalSpec arrivals;
    arrivals.rate_a = cfg.get_double("rate_a", 0.1);
    arrivals.rate_b = cfg.get_double("rate_b", 0.1);
    arrivals.packet_len = cfg.get_double("packet_bits", 1.0);
    arrivals.validate();
    SimulateOptions opts;
    opts.horizon = cfg.get_double("horizon", 0.0);
    opts.max_events = cfg.get_long("max_events", 0);
    if (opts.horizon <= 0.0 && opts.max_events <= 0) opts.horizon = 1e4;
    opts.sample_every = cfg.get_long("sample_every", 1);
    const SchedulerProtocol protocol =
        proto_str == "omlnc" ? SchedulerProtocol::omlnc : SchedulerProtocol::oplnc;
    const SigmaSet sigma = sigma_set(caps);
    if (protocol == SchedulerProtocol::oplnc)
        opts.oplnc = choose_oplnc_params(sigma, arrivals);
    const SimTrace trace = simulate(protocol, caps, arrivals, opts, cfg.seed);
    std::ostringstream csv;
    csv << "t,q_a,q_b,action,V\n";
    for (const auto& s : trace.samples)
        csv << fmt(s.t) << "," << s.q_a << "," << s.q_b << "," << action_name(s.action)
            << "," << fmt(lyapunov_v({s.q_a, s.q_b, 0.0}, sigma)) << "\n";
    ExperimentOutputs out;
    out.files.emplace_back("schedule.csv", csv.str());
    return out;
}

inline Cooperation parse_coop(const std::string& s) {
    if (s == "all") return Cooperation::collab_all;
    if (s == "select-bc") return Cooperation::collab_select_broadcast;
    if (s == "select-relay") return Cooperation::select_single_relay;
    throw ConfigValidationError({"coop"});
}

inline Protocol parse_protocol(const std::string& s) {
    if (s == "tdmh") return Protocol::tdmh;
    if (s == "mlnc") return Protocol::mlnc;
    if (s == "plnc") return Protocol::plnc;
    throw ConfigValidationError({"protocol"});
}

// "lo:hi:step" in dB.
inline std::vector<double> parse_snr_grid(const std::string& spec) {
    double lo = 0.0, hi = 0.0, step = 0.0;
    if (std::sscanf(spec.c_str(), "%lf:%lf:%lf", &lo, &hi, &step) != 3 || step <= 0.0 ||
        hi < lo)
        throw ConfigValidationError({"snr_db"});
    std::vector<double> grid;
    for (double v = lo; v <= hi + 1e-9; v += step) grid.push_back(v);
    return grid;
}

inline ExperimentOutputs run_dmt(const ExperimentConfig& cfg) {
    const auto grid = parse_snr_grid(cfg.get("snr_db", "10:50:5"));
    const long trials = cfg.get_long("trials", 100000);
    if (trials < 1) throw ConfigValidationError({"trials"});
    DmtConfig dc;
    dc.m = cfg.get_double("m", 0.25);
    dc.mu = cfg.get_double("mu", 1.0);
    dc.lambda_f = cfg.get_double("lf", 0.5);
    dc.lambda_b = cfg.get_double("lb", 0.5);
    const Cooperation coop = parse_coop(cfg.get("coop", "all"));
    ExperimentOutputs out;
    if (trials < 100000000)
        out.warnings.push_back(
            "desk-scale trial count; increase trials for smoother high-SNR tails");
    for (const std::string& proto_str : split_list(cfg.get("protocol", "tdmh"))) {
        for (const std::string& relays_str : split_list(cfg.get("relays", "1"))) {
            DmtScenario scenario;
            scenario.protocol = parse_protocol(proto_str);
            scenario.cooperation = coop;
            DmtConfig local = dc;
            try {
                local.n_relays = static_cast<std::size_t>(std::stoul(relays_str));
            } catch (const std::exception&) {
                throw ConfigValidationError({"relays"});
            }
            local.validate(scenario);
            const OutageCurve curve =
                outage_curve(scenario, local, grid, trials, cfg.seed, cfg.threads);
            std::ostringstream csv;
            csv << "snr_db,outage,ci_lo,ci_hi\n";
            for (std::size_t i = 0; i < grid.size(); ++i) {
                const auto& e = curve.outage_estimates[i];
                csv << fmt(grid[i]) << "," << fmt(e.p_hat) << "," << fmt(e.ci_lo) << ","
                    << fmt(e.ci_hi) << "\n";
            }
            std::string summary = "# d_hat=nan stderr=nan";
            try {
                const SlopeEstimate est = estimate_slope(curve);
                summary = "# d_hat=" + fmt(est.d_hat) + " stderr=" + fmt(est.d_stderr);
            } catch (const std::exception&) {
                // too few usable points; keep the nan summary
            }
            summary += " d_theory=" + fmt(dmt_theoretical(scenario, local)) + "\n";
            csv << summary;
            out.files.emplace_back("dmt_" + proto_str + "_" + cfg.get("coop", "all") + "_" +
                                       relays_str + ".csv",
                                   csv.str());
        }
    }
    return out;
}

inline ExperimentOutputs run_lemma_check(const ExperimentConfig& cfg) {
    const long trials = cfg.get_long("trials", 100000);
    if (trials < 1) throw ConfigValidationError({"trials"});
    std::ostringstream l2;
    l2 << "k,theta,empirical,bound\n";
    int idx = 0;
    for (int k = 1; k <= 3; ++k) {
        for (double theta : {0.01, 0.05, 0.1}) {
            const std::vector<double> sigmas(static_cast<std::size_t>(k), 1.0);
            const Lemma2Result res =
                lemma2_tail(sigmas, theta, trials, splitmix64(cfg.seed + idx++));
            l2 << k << "," << fmt(theta) << "," << fmt(res.empirical) << ","
               << fmt(res.bound) << "\n";
        }
    }
    std::ostringstream l3;
    l3 << "t_size,theta_exponent,empirical_lo,empirical_hi,fitted_exponent,predicted_exponent\n";
    for (std::size_t t_size : {std::size_t{1}, std::size_t{2}}) {
        Lemma3Config lc;
        lc.t_size = t_size;
        const Lemma3Result res = lemma3_tail_check(lc, trials, splitmix64(cfg.seed + idx++));
        l3 << t_size << "," << fmt(lc.theta_exponent) << "," << fmt(res.empirical_lo) << ","
           << fmt(res.empirical_hi) << "," << fmt(res.fitted_exponent) << ","
           << fmt(res.predicted_exponent) << "\n";
    }
    ExperimentOutputs out;
    out.files.emplace_back("lemma2.csv", l2.str());
    out.files.emplace_back("lemma3.csv", l3.str());
    return out;
}

}  // namespace detail

inline RunManifest run(const ExperimentConfig& cfg) {
    const auto start = std::chrono::steady_clock::now();
    detail::ExperimentOutputs outputs;
    if (cfg.kind == "region")
        outputs = detail::run_region(cfg);
    else if (cfg.kind == "gain")
        outputs = detail::run_gain(cfg);
    else if (cfg.kind == "schedule")
        outputs = detail::run_schedule(cfg);
    else if (cfg.kind == "dmt")
        outputs = detail::run_dmt(cfg);
    else if (cfg.kind == "lemma-check")
        outputs = detail::run_lemma_check(cfg);
    else
        throw ConfigValidationError({"kind"});

    RunManifest manifest;
    manifest.config_echo.push_back("kind=" + cfg.kind);
    manifest.config_echo.push_back("seed=" + std::to_string(cfg.seed));
    manifest.config_echo.push_back("threads=" + std::to_string(cfg.threads));
    for (const auto& [k, v] : cfg.params) manifest.config_echo.push_back(k + "=" + v);
    manifest.warnings = outputs.warnings;

    std::filesystem::create_directories(cfg.out_dir);
    for (const auto& [name, content] : outputs.files) {
        detail::write_file_atomic(std::filesystem::path(cfg.out_dir) / name, content);
        manifest.output_checksums.emplace_back(name, detail::fnv1a64(content));
    }
    manifest.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    detail::write_file_atomic(std::filesystem::path(cfg.out_dir) / "manifest.txt",
                              manifest.render());
    return manifest;
}

inline std::vector<std::string> preset_names() {
    return {"fig5", "fig6", "fig7-mlnc-2relays"};
}

// Named desk-scale experiment recipes matching the reference geometry:
// 18 dBm nodes, path loss exponent 3.5, 50 m between the sources.
inline ExperimentConfig preset(const std::string& name) {
    ExperimentConfig cfg;
    cfg.seed = 20260823;
    if (name == "fig5") {
        cfg.kind = "gain";
        cfg.params = {{"ab_distance", "50"},        {"relay_spread", "0"},
                      {"num_relays", "1"},          {"path_loss_exponent", "3.5"},
                      {"tx_power_dbm", "18"},       {"noise_power_dbm", "-70"},
                      {"trials", "1000"},           {"mu_min", "0.05"},
                      {"mu_max", "20"},             {"points", "61"}};
        return cfg;
    }
    if (name == "fig6") {
        cfg.kind = "dmt";
        cfg.params = {{"protocol", "tdmh,mlnc,plnc"}, {"coop", "all"},
                      {"relays", "1,2,3"},            {"m", "0.25"},
                      {"mu", "1"},                    {"lf", "0.5"},
                      {"lb", "0.5"},                  {"snr_db", "10:45:5"},
                      {"trials", "20000"}};
        return cfg;
    }
    if (name == "fig7-mlnc-2relays") {
        cfg.kind = "dmt";
        cfg.params = {{"protocol", "mlnc"}, {"coop", "select-relay"}, {"relays", "2"},
                      {"m", "0.25"},        {"mu", "1"},              {"lf", "0.5"},
                      {"lb", "0.5"},        {"snr_db", "10:40:5"},    {"trials", "400000"}};
        return cfg;
    }
    throw std::invalid_argument("unknown preset: " + name);
}

}  // namespace twrc
