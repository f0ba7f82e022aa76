#include <cmath>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "uwbeam/error.hpp"
#include "uwbeam/harness/config.hpp"

namespace uwbeam {

using json = nlohmann::json;

namespace {

constexpr double kDeg = kPi / 180.0;

PathConfig make_path(double gain, double tau0, double theta_deg, double slope = 0.0) {
    PathConfig p;
    p.gain = gain;
    p.tau0 = tau0;
    p.theta_deg = theta_deg;
    p.drift.slope = slope;
    return p;
}

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
    if (!j.is_object()) throw InvalidArgument("config: '" + where + "' must be an object");
    for (const auto& [key, value] : j.items()) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || key == a;
        if (!ok) throw InvalidArgument("config: unknown key '" + key + "' in " + where);
    }
}

template <typename T>
void read(const json& j, const char* key, T& out, const std::string& where) {
    auto it = j.find(key);
    if (it == j.end()) return;
    try {
        out = it->template get<T>();
    } catch (const json::exception& e) {
        throw InvalidArgument("config: bad value for " + where + "." + key + ": " + e.what());
    }
}

template <typename E>
E enum_from(const std::string& s, std::initializer_list<std::pair<const char*, E>> table, const std::string& what) {
    for (const auto& [name, v] : table)
        if (s == name) return v;
    throw InvalidArgument("config: unknown " + what + " '" + s + "'");
}

template <typename E>
std::string enum_name(E v, std::initializer_list<std::pair<const char*, E>> table) {
    for (const auto& [name, x] : table)
        if (x == v) return name;
    return "?";
}

const std::initializer_list<std::pair<const char*, SnrReference>> kSnrRef{{"received", SnrReference::Received},
                                                                          {"transmit", SnrReference::Transmit}};
const std::initializer_list<std::pair<const char*, Algorithm>> kAlg{{"rls", Algorithm::RLS}, {"lms", Algorithm::LMS}};
const std::initializer_list<std::pair<const char*, Constellation>> kConst{{"bpsk", Constellation::BPSK},
                                                                          {"qpsk", Constellation::QPSK}};
const std::initializer_list<std::pair<const char*, AngleSource>> kAngle{{"oracle", AngleSource::Oracle},
                                                                        {"estimated", AngleSource::Estimated}};
const std::initializer_list<std::pair<const char*, SyncMode>> kSync{{"search", SyncMode::Search},
                                                                    {"oracle", SyncMode::Oracle}};
const std::initializer_list<std::pair<const char*, DopplerMode>> kDoppler{{"resample", DopplerMode::Resample},
                                                                          {"pll_init", DopplerMode::PllInit}};
const std::initializer_list<std::pair<const char*, Payload>> kPayload{{"mseq", Payload::MSequence},
                                                                      {"random", Payload::Random}};

template <typename E>
void read_enum(const json& j, const char* key, E& out, std::initializer_list<std::pair<const char*, E>> table,
               const std::string& where) {
    auto it = j.find(key);
    if (it == j.end()) return;
    if (!it->is_string()) throw InvalidArgument("config: " + where + "." + key + " must be a string");
    out = enum_from(it->get<std::string>(), table, where + "." + key);
}

PathConfig path_from_json(const json& j, const std::string& where) {
    check_keys(j, {"gain", "tau0", "theta_deg", "drift", "angle_rate_deg_s", "fluctuation"}, where);
    PathConfig p;
    read(j, "gain", p.gain, where);
    read(j, "tau0", p.tau0, where);
    read(j, "theta_deg", p.theta_deg, where);
    read(j, "angle_rate_deg_s", p.angle_rate_deg_s, where);
    if (auto it = j.find("drift"); it != j.end()) {
        const std::string w = where + ".drift";
        check_keys(*it, {"slope", "sin_amplitude", "sin_frequency", "sin_phase"}, w);
        read(*it, "slope", p.drift.slope, w);
        read(*it, "sin_amplitude", p.drift.sin_amplitude, w);
        read(*it, "sin_frequency", p.drift.sin_frequency, w);
        read(*it, "sin_phase", p.drift.sin_phase, w);
    }
    if (auto it = j.find("fluctuation"); it != j.end()) {
        const std::string w = where + ".fluctuation";
        check_keys(*it, {"depth", "frequency", "phase"}, w);
        read(*it, "depth", p.fluctuation.depth, w);
        read(*it, "frequency", p.fluctuation.frequency, w);
        read(*it, "phase", p.fluctuation.phase, w);
    }
    return p;
}

json path_to_json(const PathConfig& p) {
    return {{"gain", p.gain},
            {"tau0", p.tau0},
            {"theta_deg", p.theta_deg},
            {"angle_rate_deg_s", p.angle_rate_deg_s},
            {"drift",
             {{"slope", p.drift.slope},
              {"sin_amplitude", p.drift.sin_amplitude},
              {"sin_frequency", p.drift.sin_frequency},
              {"sin_phase", p.drift.sin_phase}}},
            {"fluctuation",
             {{"depth", p.fluctuation.depth}, {"frequency", p.fluctuation.frequency}, {"phase", p.fluctuation.phase}}}};
}

}  // namespace

PathSpec PathConfig::to_spec() const {
    PathSpec p;
    p.gain = gain;
    p.tau0 = tau0;
    p.theta = theta_deg * kDeg;
    p.angle_rate = angle_rate_deg_s * kDeg;
    p.drift = drift;
    p.fluctuation = fluctuation;
    return p;
}

ProfileParams profile_params(Profile p) {
    switch (p) {
        case Profile::Space:
            return {12500.0, 1e7 / 256.0, 6, 24, 0.05, 12, 20, 20, 1e-4};
        case Profile::Mace:
            return {13000.0, 1e7 / 256.0, 8, 12, 0.12, 11, 15, 8, 0.01};
        case Profile::Custom:
            break;
    }
    throw InvalidArgument("custom profile has no fixed parameters");
}

std::string to_string(Profile p) {
    switch (p) {
        case Profile::Space:
            return "space";
        case Profile::Mace:
            return "mace";
        case Profile::Custom:
            return "custom";
    }
    return "?";
}

Profile profile_from_string(const std::string& s) {
    return enum_from<Profile>(s, {{"space", Profile::Space}, {"mace", Profile::Mace}, {"custom", Profile::Custom}},
                     "profile");
}

ExperimentConfig default_config(Profile p) {
    ExperimentConfig c;
    c.profile = p;
    const ProfileParams pp = profile_params(p == Profile::Custom ? Profile::Space : p);
    c.fc = pp.fc;
    c.fs = pp.fs;
    c.array = {pp.M, pp.delta, 1500.0};
    c.pulse = {0.25, pp.samples_per_symbol / pp.fs, 16, pp.samples_per_symbol};
    c.mseq_degree = pp.mseq_degree;
    c.equalizer.Nf = pp.Nf;
    c.equalizer.Nb = pp.Nb;
    c.equalizer.Kf1 = pp.Kf1;
    c.equalizer.lambda = 0.995;
    c.equalizer.fc = pp.fc;
    c.equalizer.symbol_period = c.pulse.symbol_period;

    // Nominal geometry: a stable direct path, a bottom bounce and a fluctuating surface bounce.
    if (p == Profile::Mace) {
        const double a = 6.7e-4;  // about 1 m/s closing speed
        c.channel.paths = {make_path(1.0, 0.020, 6.0, a), make_path(0.55, 0.0215, -19.0, a),
                           make_path(0.35, 0.0232, 32.0, a)};
    } else {
        c.channel.paths = {make_path(1.0, 0.012, 4.0, 1e-5), make_path(0.6, 0.0128, -12.0, 1e-5),
                           make_path(0.4, 0.0141, 21.0, 1e-5)};
    }
    c.channel.paths[2].drift.sin_amplitude = 2e-5;
    c.channel.paths[2].drift.sin_frequency = 0.2;
    c.channel.randomization = {1.0, 1e-4, 0.0, 0.0, true};
    return c;
}

void ExperimentConfig::validate() const {
    if (profile != Profile::Custom) {
        const ProfileParams pp = profile_params(profile);
        auto differs = [](double a, double b) { return std::abs(a - b) > 1e-9 * std::max(1.0, std::abs(b)); };
        if (differs(fc, pp.fc) || array.M != pp.M || differs(array.delta, pp.delta) ||
            pulse.samples_per_symbol != pp.samples_per_symbol || fs != pp.fs ||
            mseq_degree != pp.mseq_degree)
            throw InvalidArgument("config: signal parameters differ from the " + to_string(profile) +
                                  " profile; use profile 'custom' to change them");
    }
    if (!(fc > 0.0)) throw InvalidArgument("config: fc must be positive");
    array.validate();
    pulse.validate();
    if (pulse.symbol_period != pulse.samples_per_symbol / fs)
        throw InvalidArgument("config: pulse symbol period must equal samples_per_symbol / fs");
    if (mseq_degree < 2 || mseq_degree > 16) throw InvalidArgument("config: mseq_degree must be in [2, 16]");
    if (channel.paths.empty()) throw InvalidArgument("config: channel needs at least one path");
    equalizer.validate();
    if (std::abs(equalizer.fc - fc) > 1e-9 * fc) throw InvalidArgument("config: equalizer fc differs from fc");
    if (std::abs(equalizer.symbol_period - pulse.symbol_period) > 1e-12 * pulse.symbol_period)
        throw InvalidArgument("config: equalizer symbol period differs from the pulse");
    if (beam.L < 16) throw InvalidArgument("config: beam.L must be >= 16");
    if (!(beam.angle_step_deg > 0.0) || !(beam.angle_max_deg > beam.angle_min_deg))
        throw InvalidArgument("config: bad angle grid");
    if (beam.probe_periods < 1) throw InvalidArgument("config: beam.probe_periods must be >= 1");
    if (beam.probe_degree < 2 || beam.probe_degree > 16) throw InvalidArgument("config: beam.probe_degree in [2, 16]");
    if (!(sync.a_max >= 0.0 && sync.a_max < 0.01)) throw InvalidArgument("config: sync.a_max must be in [0, 0.01)");
    if (!(sync.search_window_s > 0.0)) throw InvalidArgument("config: sync.search_window_s must be positive");
    if (protocol.frames < 1) throw InvalidArgument("config: protocol.frames must be >= 1");
    if (Nd() <= equalizer.nt()) throw InvalidArgument("config: Nd must exceed the training length");
    if (!(protocol.feedback_delay_s >= 0.0)) throw InvalidArgument("config: feedback_delay_s must be >= 0");
    if (protocol.realizations < 1) throw InvalidArgument("config: realizations must be >= 1");
    if (protocol.threads < 0) throw InvalidArgument("config: threads must be >= 0");
    if (two_user.theta1_deg == two_user.theta2_deg) throw InvalidArgument("config: two-user angles must differ");
    if (!std::isfinite(two_user.sir_db)) throw InvalidArgument("config: two_user.sir_db must be finite");
}

ExperimentConfig config_from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw InvalidArgument(std::string("config: invalid JSON: ") + e.what());
    }
    check_keys(j, {"profile", "fc", "array", "pulse", "mseq_degree", "channel", "equalizer", "beam", "sync", "protocol",
                   "two_user"},
               "config");
    Profile prof = Profile::Space;
    if (auto it = j.find("profile"); it != j.end()) {
        if (!it->is_string()) throw InvalidArgument("config: profile must be a string");
        prof = profile_from_string(it->get<std::string>());
    }
    ExperimentConfig c = default_config(prof);

    read(j, "fc", c.fc, "config");
    read(j, "mseq_degree", c.mseq_degree, "config");
    if (auto it = j.find("array"); it != j.end()) {
        check_keys(*it, {"M", "delta", "c"}, "array");
        read(*it, "M", c.array.M, "array");
        read(*it, "delta", c.array.delta, "array");
        read(*it, "c", c.array.c, "array");
    }
    if (auto it = j.find("pulse"); it != j.end()) {
        check_keys(*it, {"alpha_rc", "span_symbols", "samples_per_symbol", "fs"}, "pulse");
        read(*it, "alpha_rc", c.pulse.alpha_rc, "pulse");
        read(*it, "span_symbols", c.pulse.span_symbols, "pulse");
        read(*it, "samples_per_symbol", c.pulse.samples_per_symbol, "pulse");
        read(*it, "fs", c.fs, "pulse");
        if (!(c.fs > 0.0)) throw InvalidArgument("config: pulse.fs must be positive");
        c.pulse.symbol_period = c.pulse.samples_per_symbol / c.fs;
    }
    if (auto it = j.find("channel"); it != j.end()) {
        check_keys(*it, {"paths", "snr_db", "snr_reference", "randomization"}, "channel");
        if (auto p = it->find("paths"); p != it->end()) {
            if (!p->is_array()) throw InvalidArgument("config: channel.paths must be an array");
            c.channel.paths.clear();
            for (std::size_t i = 0; i < p->size(); ++i)
                c.channel.paths.push_back(path_from_json((*p)[i], "channel.paths[" + std::to_string(i) + "]"));
        }
        if (auto s = it->find("snr_db"); s != it->end()) {
            if (s->is_string() && (s->get<std::string>() == "inf" || s->get<std::string>() == "infinity"))
                c.channel.snr_db = std::numeric_limits<double>::infinity();
            else
                read(*it, "snr_db", c.channel.snr_db, "channel");
        }
        read_enum(*it, "snr_reference", c.channel.snr_reference, kSnrRef, "channel");
        if (auto r = it->find("randomization"); r != it->end()) {
            const std::string w = "channel.randomization";
            check_keys(*r, {"gain_jitter_db", "tau_jitter_s", "theta_jitter_deg", "slope_jitter", "random_drift_phase"},
                       w);
            auto& rnd = c.channel.randomization;
            read(*r, "gain_jitter_db", rnd.gain_jitter_db, w);
            read(*r, "tau_jitter_s", rnd.tau_jitter_s, w);
            read(*r, "theta_jitter_deg", rnd.theta_jitter_deg, w);
            read(*r, "slope_jitter", rnd.slope_jitter, w);
            read(*r, "random_drift_phase", rnd.random_drift_phase, w);
        }
    }
    // The equalizer's carrier and symbol period always follow the signal parameters.
    auto& eq = c.equalizer;
    if (auto it = j.find("equalizer"); it != j.end()) {
        const std::string w = "equalizer";
        check_keys(*it, {"Nf", "Nb", "N1", "algorithm", "lambda", "mu", "Kf1", "Kf2", "constellation", "Nt", "rls_init",
                         "phi_init", "integrator_init", "divergence_threshold", "divergence_run"},
                   w);
        read(*it, "Nf", eq.Nf, w);
        read(*it, "Nb", eq.Nb, w);
        read(*it, "N1", eq.N1, w);
        read_enum(*it, "algorithm", eq.algorithm, kAlg, w);
        read(*it, "lambda", eq.lambda, w);
        read(*it, "mu", eq.mu, w);
        read(*it, "Kf1", eq.Kf1, w);
        read(*it, "Kf2", eq.Kf2, w);
        read_enum(*it, "constellation", eq.constellation, kConst, w);
        read(*it, "Nt", eq.Nt, w);
        read(*it, "rls_init", eq.rls_init, w);
        read(*it, "phi_init", eq.phi_init, w);
        read(*it, "integrator_init", eq.integrator_init, w);
        read(*it, "divergence_threshold", eq.divergence_threshold, w);
        read(*it, "divergence_run", eq.divergence_run, w);
    }
    eq.fc = c.fc;
    eq.symbol_period = c.pulse.symbol_period;

    if (auto it = j.find("beam"); it != j.end()) {
        const std::string w = "beam";
        check_keys(*it, {"L", "angle_source", "angle_min_deg", "angle_max_deg", "angle_step_deg", "probe_degree",
                         "probe_periods"},
                   w);
        read(*it, "L", c.beam.L, w);
        read_enum(*it, "angle_source", c.beam.angle_source, kAngle, w);
        read(*it, "angle_min_deg", c.beam.angle_min_deg, w);
        read(*it, "angle_max_deg", c.beam.angle_max_deg, w);
        read(*it, "angle_step_deg", c.beam.angle_step_deg, w);
        read(*it, "probe_degree", c.beam.probe_degree, w);
        read(*it, "probe_periods", c.beam.probe_periods, w);
    }
    if (auto it = j.find("sync"); it != j.end()) {
        const std::string w = "sync";
        check_keys(*it, {"mode", "doppler", "preamble_degree", "a_max", "min_peak_quality_db", "search_window_s"}, w);
        read_enum(*it, "mode", c.sync.mode, kSync, w);
        read_enum(*it, "doppler", c.sync.doppler, kDoppler, w);
        read(*it, "preamble_degree", c.sync.preamble_degree, w);
        read(*it, "a_max", c.sync.a_max, w);
        read(*it, "min_peak_quality_db", c.sync.min_peak_quality_db, w);
        read(*it, "search_window_s", c.sync.search_window_s, w);
    }
    if (auto it = j.find("protocol"); it != j.end()) {
        const std::string w = "protocol";
        check_keys(*it, {"frames", "Nd", "feedback_delay_s", "realizations", "seed", "payload", "threads"}, w);
        read(*it, "frames", c.protocol.frames, w);
        read(*it, "Nd", c.protocol.Nd, w);
        read(*it, "feedback_delay_s", c.protocol.feedback_delay_s, w);
        read(*it, "realizations", c.protocol.realizations, w);
        read(*it, "seed", c.protocol.seed, w);
        read_enum(*it, "payload", c.protocol.payload, kPayload, w);
        read(*it, "threads", c.protocol.threads, w);
    }
    if (auto it = j.find("two_user"); it != j.end()) {
        const std::string w = "two_user";
        check_keys(*it, {"theta1_deg", "theta2_deg", "sir_db", "slope1", "slope2", "null_steering"}, w);
        read(*it, "theta1_deg", c.two_user.theta1_deg, w);
        read(*it, "theta2_deg", c.two_user.theta2_deg, w);
        read(*it, "sir_db", c.two_user.sir_db, w);
        read(*it, "slope1", c.two_user.slope1, w);
        read(*it, "slope2", c.two_user.slope2, w);
        read(*it, "null_steering", c.two_user.null_steering, w);
    }
    c.validate();
    return c;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open config " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return config_from_json_text(ss.str());
}

std::string config_to_json_text(const ExperimentConfig& c, int indent) {
    json paths = json::array();
    for (const auto& p : c.channel.paths) paths.push_back(path_to_json(p));
    const auto& eq = c.equalizer;
    const auto& rnd = c.channel.randomization;
    json snr = std::isfinite(c.channel.snr_db) ? json(c.channel.snr_db) : json("inf");
    json j = {
        {"profile", to_string(c.profile)},
        {"fc", c.fc},
        {"mseq_degree", c.mseq_degree},
        {"array", {{"M", c.array.M}, {"delta", c.array.delta}, {"c", c.array.c}}},
        {"pulse",
         {{"alpha_rc", c.pulse.alpha_rc},
          {"span_symbols", c.pulse.span_symbols},
          {"samples_per_symbol", c.pulse.samples_per_symbol},
          {"fs", c.fs}}},
        {"channel",
         {{"paths", paths},
          {"snr_db", snr},
          {"snr_reference", enum_name(c.channel.snr_reference, kSnrRef)},
          {"randomization",
           {{"gain_jitter_db", rnd.gain_jitter_db},
            {"tau_jitter_s", rnd.tau_jitter_s},
            {"theta_jitter_deg", rnd.theta_jitter_deg},
            {"slope_jitter", rnd.slope_jitter},
            {"random_drift_phase", rnd.random_drift_phase}}}}},
        {"equalizer",
         {{"Nf", eq.Nf},
          {"Nb", eq.Nb},
          {"N1", eq.n1()},
          {"algorithm", enum_name(eq.algorithm, kAlg)},
          {"lambda", eq.lambda},
          {"mu", eq.mu},
          {"Kf1", eq.Kf1},
          {"Kf2", eq.kf2()},
          {"constellation", enum_name(eq.constellation, kConst)},
          {"Nt", eq.nt()},
          {"rls_init", eq.rls_init},
          {"phi_init", eq.phi_init},
          {"integrator_init", eq.integrator_init},
          {"divergence_threshold", eq.divergence_threshold},
          {"divergence_run", eq.divergence_run}}},
        {"beam",
         {{"L", c.beam.L},
          {"angle_source", enum_name(c.beam.angle_source, kAngle)},
          {"angle_min_deg", c.beam.angle_min_deg},
          {"angle_max_deg", c.beam.angle_max_deg},
          {"angle_step_deg", c.beam.angle_step_deg},
          {"probe_degree", c.beam.probe_degree},
          {"probe_periods", c.beam.probe_periods}}},
        {"sync",
         {{"mode", enum_name(c.sync.mode, kSync)},
          {"doppler", enum_name(c.sync.doppler, kDoppler)},
          {"preamble_degree", c.preamble_degree()},
          {"a_max", c.sync.a_max},
          {"min_peak_quality_db", c.sync.min_peak_quality_db},
          {"search_window_s", c.sync.search_window_s}}},
        {"protocol",
         {{"frames", c.protocol.frames},
          {"Nd", c.Nd()},
          {"feedback_delay_s", c.protocol.feedback_delay_s},
          {"realizations", c.protocol.realizations},
          {"seed", c.protocol.seed},
          {"payload", enum_name(c.protocol.payload, kPayload)},
          {"threads", c.protocol.threads}}},
        {"two_user",
         {{"theta1_deg", c.two_user.theta1_deg},
          {"theta2_deg", c.two_user.theta2_deg},
          {"sir_db", c.two_user.sir_db},
          {"slope1", c.two_user.slope1},
          {"slope2", c.two_user.slope2},
          {"null_steering", c.two_user.null_steering}}},
    };
    return j.dump(indent);
}

}  // namespace uwbeam
