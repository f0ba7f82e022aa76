#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "uwbeam/angle_estimator.hpp"
#include "uwbeam/beamformer.hpp"
#include "uwbeam/harness/config.hpp"
#include "uwbeam/receiver.hpp"
#include "uwbeam/version.hpp"

namespace uwbeam {

inline constexpr double kMseFloorDb = -60.0;

struct FrameMetrics {
    double mse_db = 0.0;
    std::size_t bit_errors = 0;
    std::size_t bits = 0;     // payload bits after training
    std::size_t symbols = 0;  // payload symbols including training
    bool converged = true;
    std::string failure;      // stage-annotated error when not converged
};

/// (1 / (N - Nt)) sum_{n >= Nt} |d[n] - d_hat[n]|^2 in dB, floored at kMseFloorDb.
/// Throws InvalidArgument on a length mismatch or N <= Nt.
double compute_frame_mse(std::span<const cplx> d, std::span<const cplx> d_hat, std::size_t Nt);

/// Gray-mapped bit errors over symbols n >= Nt.
std::size_t count_bit_errors(std::span<const cplx> d, std::span<const cplx> d_tilde, std::size_t Nt, Constellation c);

/// Everything a receiver produced for one frame.
struct FrameTrace {
    CVec payload;  // transmitted payload symbols
    SyncResult sync;
    double t_first = 0.0;
    DfeResult dfe;
};

struct LinkResult {
    double theta_hat = 0.0;  // rad, angle the beam was steered to
    std::vector<FrameMetrics> frames;
    std::vector<FrameTrace> traces;
};

/// Nominal channel of a config, optionally perturbed per the randomization ranges
/// with a stream derived from seed. Noise seed and SNR are set from the config.
ChannelSpec build_channel(const ExperimentConfig& cfg, std::uint64_t seed, bool randomize);

/// Preamble (alternate-polynomial m-sequence) and payload of frame `frame`.
CVec frame_preamble(const ExperimentConfig& cfg);
CVec frame_payload(const ExperimentConfig& cfg, std::uint64_t seed, int frame);

/// Beamformer frequency grid of a config.
BinGrid bin_grid(const ExperimentConfig& cfg);

/// Delay-angle map from a simulated uplink probe through `spec` at time t.
DelayAngleMap probe_angle_map(const ExperimentConfig& cfg, const ChannelSpec& spec, double t = 0.0);

/// Principal-path angle seen at time t, from the channel (oracle) or a simulated probe.
double acquire_angle(const ExperimentConfig& cfg, const ChannelSpec& spec, double t = 0.0);

/// Probe -> angle at t = 0 -> single beam -> frames sent from t = feedback_delay_s
/// through the drifting channel -> sync -> Doppler compensation -> DFE -> metrics.
/// Submodule failures are rethrown as StageError naming the stage.
LinkResult run_single_link(const ExperimentConfig& cfg, std::uint64_t seed, bool randomize = false);
inline LinkResult run_single_link(const ExperimentConfig& cfg) { return run_single_link(cfg, cfg.protocol.seed); }

struct CdfPoint {
    double mse_db;
    double cdf;
};

struct MonteCarloResult {
    std::uint64_t master_seed = 0;
    std::vector<std::vector<FrameMetrics>> realizations;  // [realization][frame]
    std::vector<CdfPoint> cdf;                            // over every frame, sorted
    double ber = 0.0;
    std::size_t failures = 0;
};

/// Empirical CDF: sorted values with cdf = i / n, i = 1..n.
std::vector<CdfPoint> empirical_cdf(std::vector<double> values);

/// K = protocol.realizations independent realizations seeded from protocol.seed,
/// run on protocol.threads workers. A failing realization is recorded as
/// unconverged (0 dB MSE, all bits wrong) instead of aborting the run.
MonteCarloResult run_monte_carlo(const ExperimentConfig& cfg);

struct UserResult {
    FrameMetrics metrics;
    FrameTrace trace;
    double phi_slope = 0.0;  // rad/s, least-squares slope of the PLL output
};

struct TwoUserResult {
    UserResult users[2];
};

/// Channel of user k (0 or 1): the configured geometry rotated so path 0 arrives
/// from the user's angle, with every path drifting at the user's slope.
ChannelSpec two_user_channel(const ExperimentConfig& cfg, int user, std::uint64_t seed);

/// Two simultaneous beams (null-steered unless disabled) carrying a BPSK frame to
/// user 1 and an asynchronous QPSK frame to user 2; each receiver runs on its own.
TwoUserResult run_two_user(const ExperimentConfig& cfg, std::uint64_t seed);

/// Files written by emit_results.
struct EmitOptions {
    std::string artifact_version = kVersion;
    std::string command = "mc";
};

/// mse_cdf.csv, metrics.csv and manifest.json for a Monte Carlo run.
void emit_results(const MonteCarloResult& r, const ExperimentConfig& cfg, const std::string& out_dir,
                  const EmitOptions& opt = {});

/// One received frame of one stream, as written by emit_link.
struct LinkRecord {
    int stream = 0;
    int frame = 0;
    const FrameMetrics* metrics = nullptr;
    const FrameTrace* trace = nullptr;
};

/// metrics.csv, constellation.csv, pll_trace.csv and manifest.json, one row group per record.
void emit_link(const std::vector<LinkRecord>& records, const ExperimentConfig& cfg, std::uint64_t seed,
               const std::string& out_dir, const EmitOptions& opt = {});
/// Stream 0, one record per frame.
void emit_link(const LinkResult& r, const ExperimentConfig& cfg, std::uint64_t seed, const std::string& out_dir,
               const EmitOptions& opt = {});
/// Streams 0 and 1, one frame each.
void emit_link(const TwoUserResult& r, const ExperimentConfig& cfg, std::uint64_t seed, const std::string& out_dir,
               const EmitOptions& opt = {});

/// weights.csv rows: bin, freq_hz, element, re, im (occupied bins only).
void write_weights_csv(const std::string& path, const BeamWeights& w);
/// filters.csv rows: element, n, re, im for the centered FIR taps.
void write_filters_csv(const std::string& path, const TimeFilters& f);
/// beampattern.csv rows: freq_hz, angle_deg, gain_db (|response| in dB, so sqrt(M) reads 10 log10 M).
void write_beampattern_csv(const std::string& path, const BeamWeights& w, const ArrayGeometry& geom,
                           std::span<const double> angles_rad, std::span<const double> freqs_hz);

/// Reads the config and seed back from a manifest written above.
ExperimentConfig config_from_manifest(const std::string& path);

}  // namespace uwbeam
