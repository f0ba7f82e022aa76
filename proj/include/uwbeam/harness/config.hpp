#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "uwbeam/channel.hpp"
#include "uwbeam/pulse.hpp"
#include "uwbeam/receiver.hpp"

namespace uwbeam {

enum class Profile { Space, Mace, Custom };

/// Signal and array parameters of a named experiment profile.
struct ProfileParams {
    double fc;
    double fs;
    int samples_per_symbol;
    int M;
    double delta;
    int mseq_degree;
    int Nf;
    int Nb;
    double Kf1;

    double symbol_rate() const { return fs / samples_per_symbol; }
};

ProfileParams profile_params(Profile p);
std::string to_string(Profile p);
Profile profile_from_string(const std::string& s);

/// Per-realization perturbations of the nominal channel ("random starting time").
struct Randomization {
    double gain_jitter_db = 0.0;    // uniform +- on every path gain
    double tau_jitter_s = 0.0;      // uniform +- on every path delay
    double theta_jitter_deg = 0.0;  // uniform +- on every path angle
    double slope_jitter = 0.0;      // uniform +- on every drift slope
    bool random_drift_phase = false;
};

/// Path as written in config files: angles in degrees, converted once when a channel is built.
struct PathConfig {
    double gain = 1.0;
    double tau0 = 0.0;
    double theta_deg = 0.0;
    double angle_rate_deg_s = 0.0;
    DriftLaw drift;
    GainFluctuation fluctuation;

    PathSpec to_spec() const;
};

struct ChannelConfig {
    std::vector<PathConfig> paths;  // path 0 is the principal path
    double snr_db = 10.0;
    SnrReference snr_reference = SnrReference::Transmit;
    Randomization randomization;
};

enum class AngleSource { Oracle, Estimated };

struct BeamConfig {
    std::size_t L = 4096;
    AngleSource angle_source = AngleSource::Oracle;
    double angle_min_deg = -60.0;
    double angle_max_deg = 60.0;
    double angle_step_deg = 0.25;
    int probe_degree = 9;
    int probe_periods = 4;
};

enum class SyncMode { Search, Oracle };
enum class DopplerMode { Resample, PllInit };

struct SyncSettings {
    SyncMode mode = SyncMode::Search;
    DopplerMode doppler = DopplerMode::Resample;
    int preamble_degree = 0;  // 0: the profile's m-sequence degree
    double a_max = 1.5e-3;
    double min_peak_quality_db = 3.0;
    double search_window_s = 0.2;  // frame start search span past the preamble length
};

enum class Payload { MSequence, Random };

struct ProtocolConfig {
    int frames = 1;
    int Nd = 0;  // 0: 10 (2^degree - 1)
    double feedback_delay_s = 3.0;
    int realizations = 1000;
    std::uint64_t seed = 1;
    Payload payload = Payload::MSequence;
    int threads = 0;  // 0: hardware concurrency
};

struct TwoUserConfig {
    double theta1_deg = -8.7;
    double theta2_deg = 8.0;
    double sir_db = 0.0;
    double slope1 = 6.7e-4;   // user 1 receding (+), user 2 approaching (-)
    double slope2 = -6.7e-4;
    bool null_steering = true;
};

struct ExperimentConfig {
    Profile profile = Profile::Space;
    double fc = 12500.0;
    double fs = 1e7 / 256.0;  // canonical; pulse.symbol_period = samples_per_symbol / fs
    ArrayGeometry array{24, 0.05, 1500.0};
    PulseSpec pulse;
    int mseq_degree = 12;
    ChannelConfig channel;
    EqualizerConfig equalizer;
    BeamConfig beam;
    SyncSettings sync;
    ProtocolConfig protocol;
    TwoUserConfig two_user;

    int Nd() const { return protocol.Nd > 0 ? protocol.Nd : 10 * ((1 << mseq_degree) - 1); }
    int preamble_degree() const { return sync.preamble_degree > 0 ? sync.preamble_degree : mseq_degree; }
    double symbol_period() const { return pulse.symbol_period; }
    double sample_rate() const { return fs; }

    /// Throws InvalidArgument on inconsistent settings, including a named profile whose
    /// signal parameters were overridden.
    void validate() const;
};

/// Profile defaults: signal, array and equalizer parameters, plus a nominal 3-path channel.
ExperimentConfig default_config(Profile p);

/// Parses the JSON config. Fields absent from the document keep the profile's defaults;
/// unknown keys are rejected with InvalidArgument naming the key.
ExperimentConfig config_from_json_text(const std::string& text);
ExperimentConfig load_config(const std::string& path);

/// Full resolved config in the same schema (angles in degrees).
std::string config_to_json_text(const ExperimentConfig& cfg, int indent = 2);

}  // namespace uwbeam
