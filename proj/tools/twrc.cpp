// Command-line front end: each subcommand maps its flags onto an
// ExperimentConfig and hands off to twrc::run(). Exit codes: 0 success,
// 2 invalid usage or configuration, 3 runtime failure.

#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "twrc/harness.hpp"

namespace {

struct Common {
    std::string out = ".";
    std::uint64_t seed = 1;
    unsigned threads = 1;
};

void add_common(CLI::App* cmd, Common& common) {
    cmd->add_option("--out", common.out, "Output directory")->capture_default_str();
    cmd->add_option("--seed", common.seed, "RNG seed")->capture_default_str();
    cmd->add_option("--threads", common.threads, "Worker threads")->capture_default_str();
}

twrc::ExperimentConfig make_config(const std::string& kind, const Common& common) {
    twrc::ExperimentConfig cfg;
    cfg.kind = kind;
    cfg.out_dir = common.out;
    cfg.seed = common.seed;
    cfg.threads = common.threads;
    return cfg;
}

void set_if(twrc::ExperimentConfig& cfg, const CLI::Option* opt, const std::string& key,
            const std::string& value) {
    if (opt->count() > 0) cfg.params[key] = value;
}

void print_manifest(const twrc::RunManifest& manifest) {
    for (const auto& w : manifest.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
    for (const auto& [file, sum] : manifest.output_checksums)
        std::printf("wrote %s\n", file.c_str());
    std::printf("done in %.2f s\n", manifest.wall_seconds);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Two-way relay channel experiments"};
    app.require_subcommand(1);

    // --- region ---
    Common region_common;
    std::string region_caps, region_protocol = "all";
    CLI::App* region = app.add_subcommand("region", "Emit achievable rate region CSVs");
    add_common(region, region_common);
    region->add_option("--caps", region_caps, "Link capacities C_AD,C_DB,C_BD,C_DA")
        ->required();
    region->add_option("--protocol", region_protocol, "tdmh|mlnc|plnc|hull|all")
        ->capture_default_str();

    // --- gain ---
    Common gain_common;
    std::string gain_caps;
    double mu_min = 0.05, mu_max = 20.0;
    long points = 61, gain_trials = 1000, num_relays = 1, relay_index = 0;
    double ab_distance = 50.0, relay_spread = 0.0, path_loss = 3.5, tx_dbm = 18.0,
           noise_dbm = -70.0;
    CLI::App* gain = app.add_subcommand("gain", "Network-coding gain versus traffic ratio");
    add_common(gain, gain_common);
    const CLI::Option* gain_caps_opt =
        gain->add_option("--caps", gain_caps, "Fixed capacities C_AD,C_DB,C_BD,C_DA");
    gain->add_option("--mu-min", mu_min)->capture_default_str();
    gain->add_option("--mu-max", mu_max)->capture_default_str();
    gain->add_option("--points", points, "Grid points")->capture_default_str();
    gain->add_option("--trials", gain_trials, "Fading draws (topology mode)")
        ->capture_default_str();
    gain->add_option("--ab-distance", ab_distance, "Source separation, m")
        ->capture_default_str();
    gain->add_option("--relay-spread", relay_spread)->capture_default_str();
    gain->add_option("--num-relays", num_relays)->capture_default_str();
    gain->add_option("--relay-index", relay_index)->capture_default_str();
    gain->add_option("--path-loss-exponent", path_loss)->capture_default_str();
    gain->add_option("--tx-power-dbm", tx_dbm)->capture_default_str();
    gain->add_option("--noise-power-dbm", noise_dbm)->capture_default_str();

    // --- schedule ---
    Common sched_common;
    std::string sched_caps, sched_protocol = "omlnc";
    double rate_a = 0.1, rate_b = 0.1, packet_bits = 1.0, horizon = 0.0;
    long max_events = 0, sample_every = 1;
    CLI::App* schedule = app.add_subcommand("schedule", "Queue scheduler trace");
    add_common(schedule, sched_common);
    schedule->add_option("--caps", sched_caps, "Link capacities C_AD,C_DB,C_BD,C_DA")
        ->required();
    schedule->add_option("--protocol", sched_protocol, "omlnc|oplnc")->capture_default_str();
    schedule->add_option("--rate-a", rate_a, "Packet arrival rate at A")
        ->capture_default_str();
    schedule->add_option("--rate-b", rate_b, "Packet arrival rate at B")
        ->capture_default_str();
    schedule->add_option("--packet-bits", packet_bits)->capture_default_str();
    const CLI::Option* horizon_opt =
        schedule->add_option("--horizon", horizon, "Simulated time budget");
    const CLI::Option* events_opt =
        schedule->add_option("--max-events", max_events, "Event budget");
    schedule->add_option("--sample-every", sample_every)->capture_default_str();

    // --- dmt ---
    Common dmt_common;
    std::string dmt_protocol = "tdmh", coop = "all", relays = "1", snr_db = "10:50:5";
    double m = 0.25, mu = 1.0, lf = 0.5, lb = 0.5;
    long dmt_trials = 100000;
    CLI::App* dmt = app.add_subcommand("dmt", "Outage curves and diversity slopes");
    add_common(dmt, dmt_common);
    dmt->add_option("--protocol", dmt_protocol, "Comma list of tdmh|mlnc|plnc")
        ->capture_default_str();
    dmt->add_option("--coop", coop, "all|select-bc|select-relay")->capture_default_str();
    dmt->add_option("--relays", relays, "Comma list of relay counts")->capture_default_str();
    dmt->add_option("--m", m, "Multiplexing gain")->capture_default_str();
    dmt->add_option("--mu", mu, "Traffic ratio")->capture_default_str();
    dmt->add_option("--lf", lf, "Forward time share")->capture_default_str();
    dmt->add_option("--lb", lb, "Backward time share")->capture_default_str();
    dmt->add_option("--snr-db", snr_db, "Grid lo:hi:step in dB")->capture_default_str();
    dmt->add_option("--trials", dmt_trials, "Trials per grid point")->capture_default_str();

    // --- lemma-check ---
    Common lemma_common;
    long lemma_trials = 100000;
    CLI::App* lemma = app.add_subcommand("lemma-check", "Tail-bound sanity tables");
    add_common(lemma, lemma_common);
    lemma->add_option("--trials", lemma_trials)->capture_default_str();

    // --- preset-list ---
    Common preset_common;
    std::string preset_run;
    long preset_trials = 0;
    CLI::App* presets = app.add_subcommand("preset-list", "List or run named presets");
    add_common(presets, preset_common);
    presets->add_option("--run", preset_run, "Execute the named preset");
    presets->add_option("--trials", preset_trials, "Override the preset trial count");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        twrc::ExperimentConfig cfg;
        if (region->parsed()) {
            cfg = make_config("region", region_common);
            cfg.params["caps"] = region_caps;
            cfg.params["protocol"] = region_protocol;
        } else if (gain->parsed()) {
            cfg = make_config("gain", gain_common);
            if (gain_caps_opt->count() > 0) {
                cfg.params["caps"] = gain_caps;
            } else {
                cfg.params["ab_distance"] = std::to_string(ab_distance);
                cfg.params["relay_spread"] = std::to_string(relay_spread);
                cfg.params["num_relays"] = std::to_string(num_relays);
                cfg.params["relay_index"] = std::to_string(relay_index);
                cfg.params["path_loss_exponent"] = std::to_string(path_loss);
                cfg.params["tx_power_dbm"] = std::to_string(tx_dbm);
                cfg.params["noise_power_dbm"] = std::to_string(noise_dbm);
                cfg.params["trials"] = std::to_string(gain_trials);
            }
            cfg.params["mu_min"] = std::to_string(mu_min);
            cfg.params["mu_max"] = std::to_string(mu_max);
            cfg.params["points"] = std::to_string(points);
        } else if (schedule->parsed()) {
            cfg = make_config("schedule", sched_common);
            cfg.params["caps"] = sched_caps;
            cfg.params["protocol"] = sched_protocol;
            cfg.params["rate_a"] = std::to_string(rate_a);
            cfg.params["rate_b"] = std::to_string(rate_b);
            cfg.params["packet_bits"] = std::to_string(packet_bits);
            cfg.params["sample_every"] = std::to_string(sample_every);
            set_if(cfg, horizon_opt, "horizon", std::to_string(horizon));
            set_if(cfg, events_opt, "max_events", std::to_string(max_events));
        } else if (dmt->parsed()) {
            cfg = make_config("dmt", dmt_common);
            cfg.params = {{"protocol", dmt_protocol},
                          {"coop", coop},
                          {"relays", relays},
                          {"snr_db", snr_db},
                          {"m", std::to_string(m)},
                          {"mu", std::to_string(mu)},
                          {"lf", std::to_string(lf)},
                          {"lb", std::to_string(lb)},
                          {"trials", std::to_string(dmt_trials)}};
        } else if (lemma->parsed()) {
            cfg = make_config("lemma-check", lemma_common);
            cfg.params["trials"] = std::to_string(lemma_trials);
        } else if (presets->parsed()) {
            if (preset_run.empty()) {
                for (const auto& name : twrc::preset_names()) std::printf("%s\n", name.c_str());
                return 0;
            }
            try {
                cfg = twrc::preset(preset_run);
            } catch (const std::invalid_argument&) {
                std::fprintf(stderr, "error: unknown preset '%s'\n", preset_run.c_str());
                return 2;
            }
            cfg.out_dir = preset_common.out;
            cfg.threads = preset_common.threads;
            if (preset_trials > 0) cfg.params["trials"] = std::to_string(preset_trials);
        }
        print_manifest(twrc::run(cfg));
        return 0;
    } catch (const twrc::ConfigValidationError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::domain_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "runtime error: %s\n", e.what());
        return 3;
    }
}
