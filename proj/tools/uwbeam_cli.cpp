#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "uwbeam/angle_estimator.hpp"
#include "uwbeam/beamformer.hpp"
#include "uwbeam/error.hpp"
#include "uwbeam/harness/config.hpp"
#include "uwbeam/harness/experiment.hpp"
#include "uwbeam/version.hpp"

namespace {

using namespace uwbeam;

constexpr double kDeg = kPi / 180.0;

struct CommonOptions {
    std::string config;
    std::string profile;
    std::optional<std::uint64_t> seed;
    std::optional<int> realizations;
    std::optional<int> threads;
    std::string out = "out";
};

void add_common(CLI::App* sub, CommonOptions& o) {
    sub->add_option("--config", o.config, "JSON experiment config")->check(CLI::ExistingFile);
    sub->add_option("--profile", o.profile, "space, mace or custom (ignored when --config sets one)")
        ->check(CLI::IsMember({"space", "mace", "custom"}));
    sub->add_option("--seed", o.seed, "master seed (overrides protocol.seed)");
    sub->add_option("--out", o.out, "output directory")->capture_default_str();
    sub->add_option("--realizations", o.realizations, "Monte Carlo realizations K")->check(CLI::PositiveNumber);
    sub->add_option("--threads", o.threads, "worker threads (0: all cores)")->check(CLI::NonNegativeNumber);
}

ExperimentConfig resolve(const CommonOptions& o, Profile fallback) {
    ExperimentConfig cfg = o.config.empty()
                               ? default_config(o.profile.empty() ? fallback : profile_from_string(o.profile))
                               : load_config(o.config);
    if (!o.config.empty() && !o.profile.empty() && profile_from_string(o.profile) != cfg.profile)
        throw InvalidArgument("--profile " + o.profile + " contradicts the config file's profile " +
                              to_string(cfg.profile));
    if (o.seed) cfg.protocol.seed = *o.seed;
    if (o.realizations) cfg.protocol.realizations = *o.realizations;
    if (o.threads) cfg.protocol.threads = *o.threads;
    cfg.validate();
    return cfg;
}

std::string command_line(int argc, char** argv) {
    std::string s;
    for (int i = 0; i < argc; ++i) s += (i ? " " : "") + std::string(argv[i]);
    return s;
}

std::filesystem::path make_out(const std::string& out) {
    std::error_code ec;
    std::filesystem::create_directories(out, ec);
    if (ec) throw IoError("cannot create output directory " + out + ": " + ec.message());
    return out;
}

BeamWeights design(const ExperimentConfig& cfg, std::optional<double> angle_deg, const std::vector<double>& nulls_deg) {
    const double target =
        angle_deg ? *angle_deg * kDeg : build_channel(cfg, cfg.protocol.seed, false).paths.front().theta;
    if (nulls_deg.empty()) return design_single_beam(cfg.array, target, bin_grid(cfg));
    std::vector<double> nulls;
    for (double d : nulls_deg) nulls.push_back(d * kDeg);
    return design_null_steering(cfg.array, target, nulls, bin_grid(cfg));
}

void print_frame(const char* label, const FrameMetrics& m) {
    std::printf("%s mse %.2f dB, bit errors %zu / %zu\n", label, m.mse_db, m.bit_errors, m.bits);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Angle-based transmit beamforming simulator for underwater acoustic downlinks"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);

    CommonOptions common;
    std::optional<double> angle;
    std::vector<double> nulls;
    std::vector<double> freqs;
    double amin = -90.0, amax = 90.0, astep = 0.25;
    bool randomize = false;
    bool no_null = false;

    auto* dw = app.add_subcommand("design-weights", "write per-bin weights and per-element time filters");
    add_common(dw, common);
    dw->add_option("--angle", angle, "beam angle in degrees (default: principal path of the config channel)");
    dw->add_option("--null", nulls, "null angle in degrees, repeatable");

    auto* bp = app.add_subcommand("beampattern", "write |response| over an angle sweep");
    add_common(bp, common);
    bp->add_option("--angle", angle, "beam angle in degrees (default: principal path of the config channel)");
    bp->add_option("--null", nulls, "null angle in degrees, repeatable");
    bp->add_option("--freq", freqs, "passband frequency in Hz, repeatable (default: fc)");
    bp->add_option("--min", amin, "sweep start, degrees")->capture_default_str();
    bp->add_option("--max", amax, "sweep end, degrees")->capture_default_str();
    bp->add_option("--step", astep, "sweep step, degrees")->capture_default_str()->check(CLI::PositiveNumber);

    auto* sim = app.add_subcommand("sim", "single link: probe, beam, frames, receiver");
    add_common(sim, common);
    sim->add_flag("--randomize", randomize, "perturb the channel as a Monte Carlo realization would");

    auto* mc = app.add_subcommand("mc", "Monte Carlo over K realizations with the MSE CDF");
    add_common(mc, common);

    auto* tu = app.add_subcommand("two-user", "two simultaneous beams with asynchronous users (default profile mace)");
    add_common(tu, common);
    tu->add_flag("--no-null", no_null, "plain beams instead of null steering");

    auto* am = app.add_subcommand("angle-map", "delay-angle map from a simulated probe");
    add_common(am, common);
    am->add_flag("--randomize", randomize, "perturb the channel as a Monte Carlo realization would");

    CLI11_PARSE(app, argc, argv);

    const EmitOptions emit{kVersion, command_line(argc, argv)};
    try {
        if (dw->parsed()) {
            const auto cfg = resolve(common, Profile::Space);
            const auto w = design(cfg, angle, nulls);
            const auto dir = make_out(common.out);
            write_weights_csv((dir / "weights.csv").string(), w);
            write_filters_csv((dir / "filters.csv").string(), synthesize_time_filters(w));
            std::printf("%zu occupied bins x %d elements -> %s\n", w.band_bins().size(), w.elements(),
                        dir.string().c_str());
        } else if (bp->parsed()) {
            const auto cfg = resolve(common, Profile::Space);
            const auto w = design(cfg, angle, nulls);
            if (freqs.empty()) freqs.push_back(cfg.fc);
            const RVec grid = angle_grid(amin * kDeg, amax * kDeg + 1e-12, astep * kDeg);
            const auto dir = make_out(common.out);
            write_beampattern_csv((dir / "beampattern.csv").string(), w, cfg.array, grid, freqs);
            std::printf("%zu angles x %zu frequencies -> %s\n", grid.size(), freqs.size(),
                        (dir / "beampattern.csv").string().c_str());
        } else if (sim->parsed()) {
            const auto cfg = resolve(common, Profile::Space);
            const auto r = run_single_link(cfg, cfg.protocol.seed, randomize);
            std::printf("beam angle %.2f deg\n", r.theta_hat / kDeg);
            for (std::size_t i = 0; i < r.frames.size(); ++i)
                print_frame(("frame " + std::to_string(i) + ":").c_str(), r.frames[i]);
            emit_link(r, cfg, cfg.protocol.seed, common.out, emit);
        } else if (mc->parsed()) {
            const auto cfg = resolve(common, Profile::Space);
            const auto t0 = std::chrono::steady_clock::now();
            const auto r = run_monte_carlo(cfg);
            const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            double mean = 0.0;
            for (const auto& c : r.cdf) mean += c.mse_db;
            mean /= static_cast<double>(r.cdf.size());
            std::printf("K = %zu: mean mse %.2f dB, median %.2f dB, BER %.3g, failures %zu, %.1f s\n",
                        r.realizations.size(), mean, r.cdf[r.cdf.size() / 2].mse_db, r.ber, r.failures, secs);
            emit_results(r, cfg, common.out, emit);
        } else if (tu->parsed()) {
            auto cfg = resolve(common, Profile::Mace);
            if (no_null) cfg.two_user.null_steering = false;
            const auto r = run_two_user(cfg, cfg.protocol.seed);
            for (int u = 0; u < 2; ++u) {
                print_frame(("user " + std::to_string(u + 1) + ":").c_str(), r.users[u].metrics);
                std::printf("        PLL slope %.3f rad/s\n", r.users[u].phi_slope);
            }
            emit_link(r, cfg, cfg.protocol.seed, common.out, emit);
        } else if (am->parsed()) {
            const auto cfg = resolve(common, Profile::Space);
            const auto spec = build_channel(cfg, cfg.protocol.seed, randomize);
            const auto map = probe_angle_map(cfg, spec);
            const auto dir = make_out(common.out);
            write_map_csv((dir / "angle_map.csv").string(), map);
            std::printf("principal angle %.2f deg (channel: %.2f deg)\n", principal_angle(map) / kDeg,
                        spec.paths.front().theta / kDeg);
        }
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
