#include "uwbeam/harness/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "uwbeam/angle_estimator.hpp"
#include "uwbeam/beamformer.hpp"
#include "uwbeam/channel.hpp"
#include "uwbeam/error.hpp"
#include "uwbeam/mseq.hpp"
#include "uwbeam/noise.hpp"

namespace uwbeam {

namespace {

constexpr double kDeg = kPi / 180.0;

// Seed streams derived from a realization seed.
enum Stream : std::uint64_t {
    kRandomize = 1,
    kProbeNoise = 2,
    kUser2Offset = 3,
    kUser2Payload = 4,
    kUser2Preamble = 5,
    kPayload = 100,
    kFrameNoise = 200,
    kUserNoise = 300,
};

template <typename F>
auto stage(const char* name, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError(name, e.what());
    }
}

double principal_doppler(const PathSpec& p, double t) {
    const auto& d = p.drift;
    return d.slope + d.sin_amplitude * kTwoPi * d.sin_frequency * std::cos(kTwoPi * d.sin_frequency * t + d.sin_phase);
}

double frame_duration(const ExperimentConfig& cfg, std::size_t symbols) {
    return static_cast<double>(symbols + 2 * static_cast<std::size_t>(cfg.pulse.span_symbols)) * cfg.symbol_period() +
           static_cast<double>(cfg.beam.L) / cfg.fs;
}

double ls_slope(std::span<const double> t, std::span<const double> y) {
    const auto n = static_cast<double>(t.size());
    if (t.size() < 2) return 0.0;
    double mt = 0.0, my = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        mt += t[i];
        my += y[i];
    }
    mt /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        sxy += (t[i] - mt) * (y[i] - my);
        sxx += (t[i] - mt) * (t[i] - mt);
    }
    return sxx > 0.0 ? sxy / sxx : 0.0;
}

}  // namespace

BinGrid bin_grid(const ExperimentConfig& cfg) {
    return {cfg.fc, cfg.fs, cfg.beam.L, cfg.pulse.samples_per_symbol, cfg.pulse.alpha_rc};
}

namespace {

// Mean power per sample of a unit-power symbol stream after pulse shaping.
double shaped_symbol_power(const PulseSpec& pulse) {
    double e = 0.0;
    for (double g : raised_cosine_taps(pulse)) e += g * g;
    return e / pulse.samples_per_symbol;
}

/// Sync, Doppler compensation and equalization of one frame.
FrameTrace receive_frame(const ComplexBasebandSignal& rx, std::span<const cplx> preamble, const CVec& payload,
                         const ExperimentConfig& cfg, EqualizerConfig eq, DopplerMode mode,
                         std::optional<double> known_doppler) {
    FrameTrace tr;
    tr.payload = payload;
    const PulseSpec& pulse = cfg.pulse;
    const double fs = cfg.fs;
    const double T = cfg.symbol_period();

    const ComplexBasebandSignal v0 = stage("front-end", [&] { return front_end_filter(rx, pulse); });

    SyncConfig sc;
    sc.a_max = cfg.sync.a_max;
    sc.min_peak_quality_db = cfg.sync.min_peak_quality_db;
    sc.known_doppler = known_doppler;
    sc.max_offset = preamble.size() * static_cast<std::size_t>(pulse.samples_per_symbol) +
                    static_cast<std::size_t>(cfg.sync.search_window_s * fs);
    tr.sync = stage("synchronize", [&] { return synchronize(v0, preamble, pulse, cfg.fc, sc); });
    const double a = tr.sync.coarse_doppler;

    // Undo the path gain and phase seen on the preamble.
    ComplexBasebandSignal v = v0;
    const cplx g = tr.sync.gain;
    if (std::abs(g) > 0.0) {
        const cplx s = std::conj(g) / std::norm(g);
        for (auto& x : v.mutable_samples()) x *= s;
    }

    // Index in v0 of the first preamble symbol's peak.
    const double q = static_cast<double>(tr.sync.frame_start) + tr.sync.fine_offset +
                     static_cast<double>(pulse.center_tap()) / (1.0 - a);
    const double Npre = static_cast<double>(preamble.size());
    if (mode == DopplerMode::Resample) {
        v = stage("resample", [&] { return coarse_resample(v, a, cfg.fc); });
        tr.t_first = v.t0() + q * (1.0 - a) / fs + Npre * T;
    } else {
        tr.t_first = v.t0() + q / fs + Npre * T / (1.0 - a);
        if (eq.kf2() > 0.0) eq.integrator_init = -kTwoPi * cfg.fc * a * T / ((1.0 - a) * eq.kf2());
    }
    const std::size_t Nt = static_cast<std::size_t>(eq.nt());
    const std::span<const cplx> training(payload.data(), std::min(Nt, payload.size()));
    tr.dfe = stage("equalize", [&] { return dfe_run(v, eq, training, payload.size(), tr.t_first); });
    return tr;
}

FrameMetrics frame_metrics(const FrameTrace& tr, const EqualizerConfig& eq) {
    FrameMetrics m;
    const auto Nt = static_cast<std::size_t>(eq.nt());
    m.symbols = tr.payload.size();
    m.mse_db = compute_frame_mse(tr.payload, tr.dfe.d_hat, Nt);
    m.bit_errors = count_bit_errors(tr.payload, tr.dfe.d_tilde, Nt, eq.constellation);
    m.bits = (m.symbols - Nt) * static_cast<std::size_t>(bits_per_symbol(eq.constellation));
    m.converged = true;
    return m;
}

FrameMetrics failed_frame(const ExperimentConfig& cfg, Constellation c, const std::string& why) {
    FrameMetrics m;
    const auto Nt = static_cast<std::size_t>(cfg.equalizer.nt());
    m.symbols = static_cast<std::size_t>(cfg.Nd());
    m.mse_db = 0.0;
    m.bits = (m.symbols - Nt) * static_cast<std::size_t>(bits_per_symbol(c));
    m.bit_errors = m.bits;
    m.converged = false;
    m.failure = why;
    return m;
}

std::optional<double> oracle_doppler(const ExperimentConfig& cfg, const ChannelSpec& spec, double t) {
    if (cfg.sync.mode != SyncMode::Oracle) return std::nullopt;
    return principal_doppler(spec.paths.front(), t);
}

}  // namespace

double compute_frame_mse(std::span<const cplx> d, std::span<const cplx> d_hat, std::size_t Nt) {
    if (d.size() != d_hat.size())
        throw InvalidArgument("compute_frame_mse: " + std::to_string(d.size()) + " symbols but " +
                              std::to_string(d_hat.size()) + " estimates");
    if (d.size() <= Nt) throw InvalidArgument("compute_frame_mse: frame not longer than the training length");
    double acc = 0.0;
    for (std::size_t n = Nt; n < d.size(); ++n) acc += std::norm(d[n] - d_hat[n]);
    const double mse = acc / static_cast<double>(d.size() - Nt);
    return mse > 0.0 ? std::max(kMseFloorDb, 10.0 * std::log10(mse)) : kMseFloorDb;
}

std::size_t count_bit_errors(std::span<const cplx> d, std::span<const cplx> d_tilde, std::size_t Nt, Constellation c) {
    if (d.size() != d_tilde.size()) throw InvalidArgument("count_bit_errors: length mismatch");
    std::size_t errors = 0;
    for (std::size_t n = Nt; n < d.size(); ++n)
        errors += static_cast<std::size_t>(std::popcount(symbol_bits(d[n], c) ^ symbol_bits(d_tilde[n], c)));
    return errors;
}

ChannelSpec build_channel(const ExperimentConfig& cfg, std::uint64_t seed, bool randomize) {
    ChannelSpec spec;
    spec.geom = cfg.array;
    spec.fc = cfg.fc;
    spec.snr_db = cfg.channel.snr_db;
    spec.snr_reference = cfg.channel.snr_reference;
    spec.reference_power = shaped_symbol_power(cfg.pulse);
    spec.seed = seed;
    for (const auto& p : cfg.channel.paths) spec.paths.push_back(p.to_spec());
    if (randomize) {
        const auto& r = cfg.channel.randomization;
        Rng rng(derive_seed(seed, kRandomize));
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        std::uniform_real_distribution<double> ph(0.0, kTwoPi);
        for (auto& p : spec.paths) {
            // Draw every variate regardless of the ranges so realizations stay aligned across configs.
            const double dg = u(rng), dt = u(rng), dth = u(rng), ds = u(rng), dp = ph(rng);
            p.gain *= std::pow(10.0, r.gain_jitter_db * dg / 20.0);
            p.tau0 = std::max(0.0, p.tau0 + r.tau_jitter_s * dt);
            p.theta += r.theta_jitter_deg * kDeg * dth;
            p.drift.slope += r.slope_jitter * ds;
            if (r.random_drift_phase) p.drift.sin_phase = dp;
        }
    }
    spec.validate();
    return spec;
}

CVec frame_preamble(const ExperimentConfig& cfg) { return mseq_symbols(alternate_mseq_spec(cfg.preamble_degree())); }

CVec frame_payload(const ExperimentConfig& cfg, std::uint64_t seed, int frame) {
    const auto Nd = static_cast<std::size_t>(cfg.Nd());
    if (cfg.protocol.payload == Payload::Random)
        return random_symbols(Nd, cfg.equalizer.constellation, derive_seed(seed, kPayload + static_cast<std::uint64_t>(frame)));
    const CVec seq = mseq_symbols(default_mseq_spec(cfg.mseq_degree));
    CVec out(Nd);
    for (std::size_t n = 0; n < Nd; ++n) out[n] = seq[n % seq.size()];
    return out;
}

double acquire_angle(const ExperimentConfig& cfg, const ChannelSpec& spec, double t) {
    if (cfg.beam.angle_source == AngleSource::Oracle) return spec.paths.front().theta_at(t);
    return stage("angle estimate", [&] { return principal_angle(probe_angle_map(cfg, spec, t)); });
}

DelayAngleMap probe_angle_map(const ExperimentConfig& cfg, const ChannelSpec& spec, double t) {
    const CVec seq = mseq_symbols(default_mseq_spec(cfg.beam.probe_degree));
    const auto probe = probe_transmission(seq, cfg.pulse, cfg.beam.probe_periods);
    ChannelSpec s = spec;
    s.seed = derive_seed(spec.seed, kProbeNoise);
    const auto rx = propagate_uplink(probe, s, t);
    ProbeConfig pc;
    pc.periods = cfg.beam.probe_periods;
    const auto ch = estimate_element_channels(rx, seq, cfg.pulse, pc);
    const RVec grid = angle_grid(cfg.beam.angle_min_deg * kDeg, cfg.beam.angle_max_deg * kDeg + 1e-12,
                                 cfg.beam.angle_step_deg * kDeg);
    return delay_angle_map(ch, spec.geom, spec.fc, grid);
}

LinkResult run_single_link(const ExperimentConfig& cfg, std::uint64_t seed, bool randomize) {
    cfg.validate();
    LinkResult out;
    const ChannelSpec spec = stage("channel", [&] { return build_channel(cfg, seed, randomize); });
    out.theta_hat = acquire_angle(cfg, spec, 0.0);
    const TimeFilters filters = stage("beam design", [&] {
        return synthesize_time_filters(design_single_beam(cfg.array, out.theta_hat, bin_grid(cfg)));
    });

    const CVec preamble = frame_preamble(cfg);
    double t = cfg.protocol.feedback_delay_s;
    for (int f = 0; f < cfg.protocol.frames; ++f) {
        const CVec payload = frame_payload(cfg, seed, f);
        CVec symbols(preamble);
        symbols.insert(symbols.end(), payload.begin(), payload.end());
        ChannelSpec s = spec;
        s.seed = derive_seed(seed, kFrameNoise + static_cast<std::uint64_t>(f));
        const BeamformedStream stream{symbols, cfg.pulse, &filters, 0.0, 1.0};
        const auto rx = stage("propagate", [&] { return propagate_streams(std::span(&stream, 1), s, t); });
        FrameTrace tr = receive_frame(rx, preamble, payload, cfg, cfg.equalizer, cfg.sync.doppler,
                                      oracle_doppler(cfg, s, t));
        out.frames.push_back(frame_metrics(tr, cfg.equalizer));
        out.traces.push_back(std::move(tr));
        t += frame_duration(cfg, symbols.size()) + 0.1;
    }
    return out;
}

std::vector<CdfPoint> empirical_cdf(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    std::vector<CdfPoint> cdf(values.size());
    const auto n = static_cast<double>(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) cdf[i] = {values[i], static_cast<double>(i + 1) / n};
    return cdf;
}

MonteCarloResult run_monte_carlo(const ExperimentConfig& cfg) {
    cfg.validate();
    const auto K = static_cast<std::size_t>(cfg.protocol.realizations);
    MonteCarloResult r;
    r.master_seed = cfg.protocol.seed;
    r.realizations.resize(K);

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t k = next++; k < K; k = next++) {
            const std::uint64_t seed = derive_seed(cfg.protocol.seed, k);
            try {
                r.realizations[k] = run_single_link(cfg, seed, true).frames;
            } catch (const Error& e) {
                r.realizations[k].assign(static_cast<std::size_t>(cfg.protocol.frames),
                                         failed_frame(cfg, cfg.equalizer.constellation, e.what()));
            }
        }
    };
    unsigned n = cfg.protocol.threads > 0 ? static_cast<unsigned>(cfg.protocol.threads)
                                          : std::max(1u, std::thread::hardware_concurrency());
    n = static_cast<unsigned>(std::min<std::size_t>(n, K));
    if (n <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned i = 0; i < n; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    std::vector<double> mse;
    std::size_t errors = 0, bits = 0;
    for (const auto& frames : r.realizations)
        for (const auto& m : frames) {
            mse.push_back(m.mse_db);
            errors += m.bit_errors;
            bits += m.bits;
            if (!m.converged) ++r.failures;
        }
    r.cdf = empirical_cdf(std::move(mse));
    r.ber = bits > 0 ? static_cast<double>(errors) / static_cast<double>(bits) : 0.0;
    return r;
}

ChannelSpec two_user_channel(const ExperimentConfig& cfg, int user, std::uint64_t seed) {
    if (user != 0 && user != 1) throw InvalidArgument("two_user_channel: user must be 0 or 1");
    ChannelSpec spec = build_channel(cfg, derive_seed(seed, kUserNoise + static_cast<std::uint64_t>(user)), false);
    const double theta_u = (user == 0 ? cfg.two_user.theta1_deg : cfg.two_user.theta2_deg) * kDeg;
    const double slope = user == 0 ? cfg.two_user.slope1 : cfg.two_user.slope2;
    const double base = spec.paths.front().theta;
    for (auto& p : spec.paths) {
        p.theta = theta_u + (p.theta - base);
        p.drift.slope = slope;
    }
    spec.validate();
    return spec;
}

TwoUserResult run_two_user(const ExperimentConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    const double th1 = cfg.two_user.theta1_deg * kDeg;
    const double th2 = cfg.two_user.theta2_deg * kDeg;
    const BinGrid grid = bin_grid(cfg);
    const auto [f1, f2] = stage("beam design", [&] {
        if (!cfg.two_user.null_steering)
            return std::pair{synthesize_time_filters(design_single_beam(cfg.array, th1, grid)),
                             synthesize_time_filters(design_single_beam(cfg.array, th2, grid))};
        const double n1[] = {th2};
        const double n2[] = {th1};
        return std::pair{synthesize_time_filters(design_null_steering(cfg.array, th1, n1, grid)),
                         synthesize_time_filters(design_null_steering(cfg.array, th2, n2, grid))};
    });

    // User 1: BPSK payload after the standard preamble. User 2: QPSK payload after a
    // random BPSK preamble, starting a random fraction of a symbol plus whole symbols later.
    const CVec pre1 = frame_preamble(cfg);
    const CVec pay1 = frame_payload(cfg, seed, 0);
    const CVec pre2 = random_symbols(pre1.size(), Constellation::BPSK, derive_seed(seed, kUser2Preamble));
    const CVec pay2 = random_symbols(static_cast<std::size_t>(cfg.Nd()), Constellation::QPSK,
                                     derive_seed(seed, kUser2Payload));
    CVec sym1(pre1), sym2(pre2);
    sym1.insert(sym1.end(), pay1.begin(), pay1.end());
    sym2.insert(sym2.end(), pay2.begin(), pay2.end());
    Rng rng(derive_seed(seed, kUser2Offset));
    const double T = cfg.symbol_period();
    const double offset = std::uniform_real_distribution<double>(0.0, T)(rng) +
                          static_cast<double>(std::uniform_int_distribution<int>(0, 31)(rng)) * T;
    const double amp2 = std::pow(10.0, -cfg.two_user.sir_db / 20.0);
    const BeamformedStream streams[2] = {{sym1, cfg.pulse, &f1, 0.0, 1.0}, {sym2, cfg.pulse, &f2, offset, amp2}};

    TwoUserResult res;
    const double t = cfg.protocol.feedback_delay_s;
    for (int u = 0; u < 2; ++u) {
        const ChannelSpec spec = two_user_channel(cfg, u, seed);
        const auto rx = stage("propagate", [&] { return propagate_streams(streams, spec, t); });
        EqualizerConfig eq = cfg.equalizer;
        eq.constellation = u == 0 ? Constellation::BPSK : Constellation::QPSK;
        auto& ur = res.users[u];
        ur.trace = receive_frame(rx, u == 0 ? pre1 : pre2, u == 0 ? pay1 : pay2, cfg, eq, DopplerMode::PllInit,
                                 oracle_doppler(cfg, spec, t));
        ur.metrics = frame_metrics(ur.trace, eq);
        const auto& phi = ur.trace.dfe.phi;
        RVec tt(phi.size());
        for (std::size_t n = 0; n < phi.size(); ++n) tt[n] = static_cast<double>(n) * T;
        ur.phi_slope = ls_slope(tt, phi);
    }
    return res;
}

namespace {

std::filesystem::path prepare_dir(const std::string& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create output directory " + out_dir + ": " + ec.message());
    return out_dir;
}

std::ofstream open_out(const std::filesystem::path& p) {
    std::ofstream f(p);
    if (!f) throw IoError("cannot open " + p.string() + " for writing");
    f << std::setprecision(17);
    return f;
}

void close_out(std::ofstream& f, const std::filesystem::path& p) {
    f.flush();
    if (!f) throw IoError("write failed: " + p.string());
}

void write_manifest(const std::filesystem::path& dir, const ExperimentConfig& cfg, std::uint64_t seed,
                    const EmitOptions& opt, const nlohmann::json& summary) {
    nlohmann::json m;
    m["artifact_version"] = opt.artifact_version;
    m["command"] = opt.command;
    m["master_seed"] = seed;
    m["config"] = nlohmann::json::parse(config_to_json_text(cfg));
    m["channel_variability"] =
        "simulated: per-realization path gain/delay jitter and random drift phases drawn from the configured ranges";
    m["summary"] = summary;
    const auto p = dir / "manifest.json";
    auto f = open_out(p);
    f << m.dump(2) << '\n';
    close_out(f, p);
}

void write_metrics_row(std::ofstream& f, std::size_t a, std::size_t b, const FrameMetrics& m) {
    f << a << ',' << b << ',' << m.mse_db << ',' << m.bit_errors << ',' << (m.converged ? 1 : 0) << '\n';
}

}  // namespace

void emit_results(const MonteCarloResult& r, const ExperimentConfig& cfg, const std::string& out_dir,
                  const EmitOptions& opt) {
    if (r.realizations.empty()) throw InvalidArgument("emit_results: empty result");
    const auto dir = prepare_dir(out_dir);
    {
        const auto p = dir / "mse_cdf.csv";
        auto f = open_out(p);
        f << "mse_db,cdf\n";
        for (const auto& c : r.cdf) f << c.mse_db << ',' << c.cdf << '\n';
        close_out(f, p);
    }
    {
        const auto p = dir / "metrics.csv";
        auto f = open_out(p);
        f << "realization,frame,mse_db,bit_errors,converged\n";
        for (std::size_t k = 0; k < r.realizations.size(); ++k)
            for (std::size_t i = 0; i < r.realizations[k].size(); ++i) write_metrics_row(f, k, i, r.realizations[k][i]);
        close_out(f, p);
    }
    double mean = 0.0;
    for (const auto& c : r.cdf) mean += c.mse_db;
    mean /= static_cast<double>(r.cdf.size());
    write_manifest(dir, cfg, r.master_seed, opt,
                   {{"realizations", r.realizations.size()},
                    {"mean_mse_db", mean},
                    {"ber", r.ber},
                    {"failures", r.failures}});
}

void emit_link(const std::vector<LinkRecord>& records, const ExperimentConfig& cfg, std::uint64_t seed,
               const std::string& out_dir, const EmitOptions& opt) {
    if (records.empty()) throw InvalidArgument("emit_link: no frames");
    for (const auto& r : records)
        if (!r.metrics || !r.trace) throw InvalidArgument("emit_link: record without metrics or trace");
    const auto dir = prepare_dir(out_dir);
    const auto Nt = static_cast<std::size_t>(cfg.equalizer.nt());
    {
        const auto p = dir / "metrics.csv";
        auto f = open_out(p);
        f << "stream,frame,mse_db,bit_errors,converged\n";
        for (const auto& r : records)
            write_metrics_row(f, static_cast<std::size_t>(r.stream), static_cast<std::size_t>(r.frame), *r.metrics);
        close_out(f, p);
    }
    {
        const auto p = dir / "constellation.csv";
        auto f = open_out(p);
        f << "stream,frame,n,d_hat_re,d_hat_im\n";
        for (const auto& r : records)
            for (std::size_t n = Nt; n < r.trace->dfe.d_hat.size(); ++n)
                f << r.stream << ',' << r.frame << ',' << n << ',' << r.trace->dfe.d_hat[n].real() << ','
                  << r.trace->dfe.d_hat[n].imag() << '\n';
        close_out(f, p);
    }
    {
        const auto p = dir / "pll_trace.csv";
        auto f = open_out(p);
        f << "stream,frame,n,t_s,phi_hat\n";
        for (const auto& r : records)
            for (std::size_t n = 0; n < r.trace->dfe.phi.size(); ++n)
                f << r.stream << ',' << r.frame << ',' << n << ',' << static_cast<double>(n) * cfg.symbol_period()
                  << ',' << r.trace->dfe.phi[n] << '\n';
        close_out(f, p);
    }
    nlohmann::json frames = nlohmann::json::array();
    for (const auto& r : records) {
        const auto& m = *r.metrics;
        frames.push_back({{"stream", r.stream},
                          {"frame", r.frame},
                          {"mse_db", m.mse_db},
                          {"bit_errors", m.bit_errors},
                          {"bits", m.bits},
                          {"converged", m.converged}});
    }
    write_manifest(dir, cfg, seed, opt, {{"frames", frames}});
}

void emit_link(const LinkResult& r, const ExperimentConfig& cfg, std::uint64_t seed, const std::string& out_dir,
               const EmitOptions& opt) {
    if (r.frames.size() != r.traces.size()) throw InvalidArgument("emit_link: frames and traces differ in count");
    std::vector<LinkRecord> rec;
    for (std::size_t i = 0; i < r.frames.size(); ++i) rec.push_back({0, static_cast<int>(i), &r.frames[i], &r.traces[i]});
    emit_link(rec, cfg, seed, out_dir, opt);
}

void emit_link(const TwoUserResult& r, const ExperimentConfig& cfg, std::uint64_t seed, const std::string& out_dir,
               const EmitOptions& opt) {
    emit_link({{0, 0, &r.users[0].metrics, &r.users[0].trace}, {1, 0, &r.users[1].metrics, &r.users[1].trace}}, cfg,
              seed, out_dir, opt);
}

void write_weights_csv(const std::string& path, const BeamWeights& w) {
    auto f = open_out(path);
    f << "bin,freq_hz,element,re,im\n";
    for (std::size_t l : w.band_bins())
        for (int m = 0; m < w.elements(); ++m)
            f << l << ',' << w.grid().bin_frequency(l) << ',' << m << ',' << w(l, m).real() << ',' << w(l, m).imag()
              << '\n';
    close_out(f, path);
}

void write_filters_csv(const std::string& path, const TimeFilters& filters) {
    auto f = open_out(path);
    f << "element,n,re,im\n";
    for (std::size_t m = 0; m < filters.taps.size(); ++m) {
        const CVec taps = filters.centered(static_cast<int>(m));
        for (std::size_t n = 0; n < taps.size(); ++n) f << m << ',' << n << ',' << taps[n].real() << ',' << taps[n].imag() << '\n';
    }
    close_out(f, path);
}

void write_beampattern_csv(const std::string& path, const BeamWeights& w, const ArrayGeometry& geom,
                           std::span<const double> angles_rad, std::span<const double> freqs_hz) {
    std::vector<RVec> patterns;
    for (double fq : freqs_hz) patterns.push_back(beam_pattern(w, geom, angles_rad, fq));
    auto f = open_out(path);
    f << "freq_hz,angle_deg,gain_db\n";
    for (std::size_t k = 0; k < freqs_hz.size(); ++k)
        for (std::size_t i = 0; i < angles_rad.size(); ++i)
            f << freqs_hz[k] << ',' << angles_rad[i] / kDeg << ','
              << 20.0 * std::log10(std::max(patterns[k][i], 1e-15)) << '\n';
    close_out(f, path);
}

ExperimentConfig config_from_manifest(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open manifest " + path);
    nlohmann::json m;
    try {
        m = nlohmann::json::parse(f);
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument("manifest " + path + ": " + e.what());
    }
    if (!m.contains("config")) throw InvalidArgument("manifest " + path + " has no config");
    ExperimentConfig cfg = config_from_json_text(m["config"].dump());
    if (m.contains("master_seed")) cfg.protocol.seed = m["master_seed"].get<std::uint64_t>();
    return cfg;
}

}  // namespace uwbeam
