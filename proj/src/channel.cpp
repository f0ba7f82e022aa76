#include "uwbeam/channel.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "uwbeam/error.hpp"
#include "uwbeam/fft.hpp"
#include "uwbeam/interp.hpp"
#include "uwbeam/noise.hpp"

namespace uwbeam {

double DriftLaw::operator()(double t) const {
    double eps = slope * t;
    if (sin_amplitude != 0.0) eps += sin_amplitude * std::sin(kTwoPi * sin_frequency * t + sin_phase);
    return eps;
}

double GainFluctuation::operator()(double t) const {
    if (depth == 0.0) return 1.0;
    return 1.0 + depth * std::sin(kTwoPi * frequency * t + phase);
}

void ChannelSpec::validate() const {
    geom.validate();
    if (!(fc > 0.0) || !std::isfinite(fc)) throw InvalidArgument("carrier frequency must be positive");
    if (std::isnan(snr_db)) throw InvalidArgument("snr_db is NaN");
    if (!(reference_power > 0.0) || !std::isfinite(reference_power))
        throw InvalidArgument("reference_power must be positive");
    for (std::size_t p = 0; p < paths.size(); ++p) {
        const PathSpec& ps = paths[p];
        const std::string tag = "path " + std::to_string(p) + ": ";
        if (!std::isfinite(ps.gain)) throw InvalidArgument(tag + "gain not finite");
        if (!(ps.tau0 >= 0.0) || !std::isfinite(ps.tau0)) throw InvalidArgument(tag + "tau0 must be >= 0");
        if (!(std::abs(ps.theta) <= kPi / 2)) throw InvalidArgument(tag + "theta outside [-90, 90] deg");
        const DriftLaw& d = ps.drift;
        if (!(std::abs(d.slope) < 0.01)) throw InvalidArgument(tag + "|drift slope| must be < 0.01");
        if (!std::isfinite(d.sin_amplitude) || !std::isfinite(d.sin_frequency) || !std::isfinite(d.sin_phase))
            throw InvalidArgument(tag + "drift parameters not finite");
        if (!(std::abs(d.slope) + kTwoPi * std::abs(d.sin_frequency * d.sin_amplitude) < 0.01))
            throw InvalidArgument(tag + "peak drift rate must be < 0.01");
        if (!(std::abs(ps.fluctuation.depth) < 1.0)) throw InvalidArgument(tag + "|fluctuation depth| must be < 1");
        if (!std::isfinite(ps.angle_rate)) throw InvalidArgument(tag + "angle_rate not finite");
    }
}

ElementPathParams element_path_params(const ChannelSpec& spec, std::size_t p, int m, double t) {
    if (p >= spec.paths.size()) throw OutOfBounds("path index " + std::to_string(p) + " out of range");
    if (m < 0 || m >= spec.geom.M) throw OutOfBounds("element index " + std::to_string(m) + " out of range");
    const PathSpec& ps = spec.paths[p];
    const double dtau = incremental_delay(spec.geom, ps.theta_at(t));
    const double delay = ps.tau0 + m * dtau;
    // Keep the reference-delay and aperture phases separate so large tau0 does
    // not eat the precision of the small per-element term.
    const cplx gain = ps.gain * std::polar(1.0, -kTwoPi * std::fmod(spec.fc * ps.tau0, 1.0)) *
                      std::polar(1.0, -kTwoPi * spec.fc * m * dtau);
    return {delay, gain};
}

namespace {

constexpr long kInterpMargin = BandlimitedInterpolator::kHalf + 8;
constexpr long kEdgeMargin = 64;

// FFT sizes are kept a multiple of 8192 so that every power-of-two DFT grid up
// to that size lines up with the simulation grid.
std::size_t grid_fft_size(std::size_t n) {
    constexpr std::size_t kUnit = 8192;
    return kUnit * fast_fft_size((n + kUnit - 1) / kUnit);
}

// acc[k] += X[k] * c * exp(-j 2 pi f_k D), f_k the signed frequency of bin k.
void accumulate_delayed(const CVec& X, cplx c, double D, double fs, CVec& acc) {
    const std::size_t N = X.size();
    const double step = -kTwoPi * D * fs / static_cast<double>(N);
    const cplx rot = std::polar(1.0, step);
    constexpr std::size_t kBlock = 256;
    auto run = [&](std::size_t begin, std::size_t end, long signed_offset) {
        for (std::size_t b = begin; b < end; b += kBlock) {
            const std::size_t e = std::min(end, b + kBlock);
            cplx ph = c * std::polar(1.0, step * static_cast<double>(static_cast<long>(b) + signed_offset));
            for (std::size_t k = b; k < e; ++k) {
                acc[k] += X[k] * ph;
                ph *= rot;
            }
        }
    };
    run(0, N / 2, 0);
    run(N / 2, N, -static_cast<long>(N));
}

struct EpsRange {
    double lo = 0.0;
    double hi = 0.0;
};

// Bounds of eps_p over absolute times [t_lo, t_hi] for every path.
EpsRange drift_range(const ChannelSpec& spec, double t_lo, double t_hi) {
    EpsRange r;
    for (const PathSpec& ps : spec.paths) {
        const DriftLaw& d = ps.drift;
        const double a = d.slope * t_lo;
        const double b = d.slope * t_hi;
        const double amp = std::abs(d.sin_amplitude);
        r.lo = std::min(r.lo, std::min(a, b) - amp);
        r.hi = std::max(r.hi, std::max(a, b) + amp);
    }
    return r;
}

// Grid layout in integer sample indices relative to a reference grid.
// W is the output window, E the wider window the static sums live on.
struct Layout {
    long w0 = 0;
    long w1 = 0;
    long e0 = 0;
    long e1 = 0;
    std::size_t wlen() const { return static_cast<std::size_t>(w1 - w0); }
    std::size_t elen() const { return static_cast<std::size_t>(e1 - e0); }
};

Layout make_layout(double src_lo, double src_hi, const EpsRange& eps, double fs) {
    // src_lo/src_hi: earliest/latest arrival sample index ignoring drift.
    Layout g;
    g.w0 = static_cast<long>(std::floor(src_lo + eps.lo * fs)) - kEdgeMargin;
    g.w1 = static_cast<long>(std::ceil(src_hi + eps.hi * fs)) + kEdgeMargin;
    g.e0 = g.w0 - static_cast<long>(std::ceil(std::max(eps.hi, 0.0) * fs)) - kInterpMargin;
    g.e1 = g.w1 + static_cast<long>(std::ceil(std::max(-eps.lo, 0.0) * fs)) + kInterpMargin;
    return g;
}

// Maps the static path sum (on E) to the output window W, applying the path's
// time-varying drift and gain fluctuation. t_ref is the absolute time of index 0.
CVec apply_drift(const CVec& s_ext, const Layout& g, const PathSpec& ps, double fc, double fs, double t_ref,
                 double eps_time_shift = 0.0) {
    CVec out(g.wlen());
    const double Ts = 1.0 / fs;
    const bool drift = !ps.drift.is_static();
    const bool fluct = !ps.fluctuation.is_static();
    const auto& bl = BandlimitedInterpolator::instance();
    for (std::size_t i = 0; i < out.size(); ++i) {
        const long k = g.w0 + static_cast<long>(i);
        const double t = t_ref + static_cast<double>(k) * Ts;
        const long idx = k - g.e0;
        cplx v;
        if (drift) {
            const double eps = ps.drift(t + eps_time_shift);
            v = bl.value_at(s_ext, static_cast<double>(idx) - eps * fs) *
                std::polar(1.0, -kTwoPi * std::fmod(fc * eps, 1.0));
        } else {
            v = s_ext[static_cast<std::size_t>(idx)];
        }
        if (fluct) v *= ps.fluctuation(t);
        out[i] = v;
    }
    return out;
}

void check_tx(std::span<const ComplexBasebandSignal> tx, const ChannelSpec& spec) {
    if (static_cast<int>(tx.size()) != spec.geom.M)
        throw InvalidArgument("expected " + std::to_string(spec.geom.M) + " element signals, got " +
                              std::to_string(tx.size()));
    for (const auto& s : tx) {
        if (s.sample_rate() != tx[0].sample_rate()) throw InvalidArgument("element signals differ in sample rate");
        if (s.size() != tx[0].size() || std::abs(s.t0() - tx[0].t0()) > 1e-12)
            throw InvalidArgument("element signals must share one time grid");
    }
}

double noise_variance(double clean_power, const ChannelSpec& spec) {
    if (std::isinf(spec.snr_db) && spec.snr_db > 0) return 0.0;
    double ref = 0.0;
    if (spec.snr_reference == SnrReference::Transmit) {
        double g2 = 0.0;
        for (const auto& ps : spec.paths) g2 += ps.gain * ps.gain;
        ref = spec.reference_power * g2;
    } else {
        ref = clean_power;
    }
    // With nothing received there is no signal to measure against; fall back
    // to the transmit reference so the output is still pure noise.
    if (!(ref > 0.0)) ref = spec.reference_power;
    return ref / std::pow(10.0, spec.snr_db / 10.0);
}

ComplexBasebandSignal sum_paths(const std::vector<ComplexBasebandSignal>& paths, const ComplexBasebandSignal& shape) {
    CVec acc(shape.size(), cplx{});
    for (const auto& p : paths)
        for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += p[i];
    return ComplexBasebandSignal(std::move(acc), shape.sample_rate(), shape.t0());
}

}  // namespace

std::vector<ComplexBasebandSignal> propagate_paths(std::span<const ComplexBasebandSignal> tx, const ChannelSpec& spec,
                                                   double t_start) {
    spec.validate();
    if (tx.empty()) throw InvalidArgument("no element signals");
    check_tx(tx, spec);
    if (!(t_start >= 0.0)) throw InvalidArgument("t_start must be >= 0");

    const double fs = tx[0].sample_rate();
    const std::size_t n = tx[0].size();
    const std::size_t P = spec.paths.size();
    const int M = spec.geom.M;
    const double t_ref = t_start + tx[0].t0();

    std::vector<std::vector<ElementPathParams>> epp(P);
    double dmin = 0.0, dmax = 0.0;
    for (std::size_t p = 0; p < P; ++p)
        for (int m = 0; m < M; ++m) {
            epp[p].push_back(element_path_params(spec, p, m, t_start));
            const double d = epp[p].back().delay;
            dmin = (p == 0 && m == 0) ? d : std::min(dmin, d);
            dmax = (p == 0 && m == 0) ? d : std::max(dmax, d);
        }
    const double dur = static_cast<double>(n) / fs;
    const EpsRange eps = drift_range(spec, t_ref + dmin - 1.0, t_ref + dur + dmax + 1.0);
    const Layout g = make_layout(dmin * fs, static_cast<double>(n) + dmax * fs, eps, fs);
    const double out_t0 = tx[0].t0() + static_cast<double>(g.w0) / fs;

    std::vector<ComplexBasebandSignal> out;
    out.reserve(P);
    if (P == 0) return out;

    const std::size_t N = grid_fft_size(g.elen() + 2048);
    std::vector<CVec> S(P, CVec(N, cplx{}));
    CVec X(N);
    for (int m = 0; m < M; ++m) {
        std::fill(X.begin(), X.end(), cplx{});
        const auto& x = tx[static_cast<std::size_t>(m)].samples();
        for (std::size_t j = 0; j < n; ++j) {
            long pos = static_cast<long>(j) - g.e0;
            pos %= static_cast<long>(N);
            if (pos < 0) pos += static_cast<long>(N);
            X[static_cast<std::size_t>(pos)] += x[j];
        }
        fft_inplace(X, -1);
        for (std::size_t p = 0; p < P; ++p) {
            const auto& e = epp[p][static_cast<std::size_t>(m)];
            accumulate_delayed(X, e.gain, e.delay, fs, S[p]);
        }
    }
    for (std::size_t p = 0; p < P; ++p) {
        fft_inplace(S[p], +1);
        const double scale = 1.0 / static_cast<double>(N);
        CVec ext(S[p].begin(), S[p].begin() + static_cast<long>(g.elen()));
        for (auto& v : ext) v *= scale;
        CVec w = apply_drift(ext, g, spec.paths[p], spec.fc, fs, t_start + tx[0].t0());
        out.emplace_back(std::move(w), fs, out_t0);
    }
    return out;
}

ComplexBasebandSignal channel_noise(const ComplexBasebandSignal& clean, const ChannelSpec& spec, std::uint64_t stream) {
    const double var = noise_variance(clean.mean_power(), spec);
    if (var == 0.0) return ComplexBasebandSignal(CVec(clean.size(), cplx{}), clean.sample_rate(), clean.t0());
    Rng rng(derive_seed(spec.seed, stream));
    return ComplexBasebandSignal(complex_gaussian(clean.size(), var, rng), clean.sample_rate(), clean.t0());
}

Decomposition interference_decomposition(std::span<const ComplexBasebandSignal> tx, const ChannelSpec& spec,
                                         double t_start) {
    if (spec.paths.empty()) throw InvalidArgument("interference decomposition needs at least one path");
    auto paths = propagate_paths(tx, spec, t_start);
    const auto& ref = paths.front();
    CVec interf(ref.size(), cplx{});
    for (std::size_t p = 1; p < paths.size(); ++p)
        for (std::size_t i = 0; i < interf.size(); ++i) interf[i] += paths[p][i];
    ComplexBasebandSignal clean = sum_paths(paths, ref);
    ComplexBasebandSignal noise = channel_noise(clean, spec);
    CVec total(clean.samples());
    for (std::size_t i = 0; i < total.size(); ++i) total[i] += noise[i];
    return Decomposition{ref, ComplexBasebandSignal(std::move(interf), ref.sample_rate(), ref.t0()), noise,
                         ComplexBasebandSignal(std::move(total), ref.sample_rate(), ref.t0())};
}

ComplexBasebandSignal propagate(std::span<const ComplexBasebandSignal> tx, const ChannelSpec& spec, double t_start) {
    if (spec.paths.empty()) {
        spec.validate();
        if (tx.empty()) throw InvalidArgument("no element signals");
        check_tx(tx, spec);
        ComplexBasebandSignal zero(CVec(tx[0].size(), cplx{}), tx[0].sample_rate(), tx[0].t0());
        return channel_noise(zero, spec);
    }
    return interference_decomposition(tx, spec, t_start).total;
}

std::vector<ComplexBasebandSignal> propagate_streams_paths(std::span<const BeamformedStream> streams,
                                                           const ChannelSpec& spec, double t_start) {
    spec.validate();
    if (!(t_start >= 0.0)) throw InvalidArgument("t_start must be >= 0");
    if (streams.empty()) throw InvalidArgument("no streams");
    const int M = spec.geom.M;
    const double fs = streams[0].pulse.sample_rate();
    for (const auto& s : streams) {
        s.pulse.validate();
        if (s.filters == nullptr) throw InvalidArgument("stream without beam filters");
        if (static_cast<int>(s.filters->taps.size()) != M) throw InvalidArgument("beam filters do not match array size");
        if (std::abs(s.pulse.sample_rate() - fs) > 1e-9 * fs || std::abs(s.filters->fs - fs) > 1e-9 * fs)
            throw InvalidArgument("stream sample rates differ");
        if (s.symbols.empty()) throw InvalidArgument("empty symbol stream");
    }
    const std::size_t P = spec.paths.size();
    std::vector<ComplexBasebandSignal> out;
    if (P == 0) return out;

    std::vector<std::vector<ElementPathParams>> epp(P);
    std::vector<long> I(P);
    double dmin = 0.0, dmax = 0.0;
    for (std::size_t p = 0; p < P; ++p) {
        double lo = 0.0, hi = 0.0;
        for (int m = 0; m < M; ++m) {
            epp[p].push_back(element_path_params(spec, p, m, t_start));
            const double d = epp[p].back().delay;
            lo = (m == 0) ? d : std::min(lo, d);
            hi = (m == 0) ? d : std::max(hi, d);
        }
        I[p] = static_cast<long>(std::floor(lo * fs));
        dmin = (p == 0) ? lo : std::min(dmin, lo);
        dmax = (p == 0) ? hi : std::max(dmax, hi);
    }

    // Per-stream compact geometry and the overall source span in absolute samples.
    struct StreamGeom {
        long J;
        double frac;
        long half;  // pulse half length plus filter half length, samples
    };
    std::vector<StreamGeom> sg;
    double src_lo = 0.0, src_hi = 0.0;
    std::size_t n2_need = 0;
    for (std::size_t s = 0; s < streams.size(); ++s) {
        const auto& st = streams[s];
        const double off = st.time_offset * fs;
        const long J = static_cast<long>(std::floor(off));
        const long half = static_cast<long>(st.pulse.center_tap() + st.filters->L / 2);
        sg.push_back({J, off - static_cast<double>(J), half});
        const double lo = off - static_cast<double>(half);
        const double hi = off + static_cast<double>((st.symbols.size() - 1) * st.pulse.samples_per_symbol + half + 1);
        src_lo = (s == 0) ? lo : std::min(src_lo, lo);
        src_hi = (s == 0) ? hi : std::max(src_hi, hi);
        n2_need = std::max(n2_need, st.pulse.tap_count() + st.filters->L);
    }
    const double dur = (src_hi - src_lo) / fs;
    const EpsRange eps = drift_range(spec, t_start + src_lo / fs + dmin - 1.0, t_start + src_lo / fs + dur + dmax + 1.0);
    const Layout g = make_layout(src_lo + dmin * fs, src_hi + dmax * fs, eps, fs);

    // Compact responses live on an N2 grid with time 0 at index 0; o is where
    // time 0 lands once unwrapped.
    const long guard = 1024;
    const long aperture = static_cast<long>(std::ceil((dmax - dmin) * fs)) + 2;
    const std::size_t N2 = grid_fft_size(n2_need + static_cast<std::size_t>(aperture + 2 * guard));
    const std::size_t N = grid_fft_size(g.elen() + N2);

    std::vector<CVec> S(P, CVec(N, cplx{}));
    CVec Qp(N2), buf(N2), Qbig(N);
    for (std::size_t s = 0; s < streams.size(); ++s) {
        const auto& st = streams[s];
        const long Ns = st.pulse.samples_per_symbol;
        const long o = sg[s].half + guard;

        // Pulse and per-element filter spectra on N2, zero-phase placement.
        const RVec taps = raised_cosine_taps(st.pulse);
        const long c = static_cast<long>(st.pulse.center_tap());
        CVec Gf(N2, cplx{});
        for (std::size_t i = 0; i < taps.size(); ++i) {
            long pos = static_cast<long>(i) - c;
            if (pos < 0) pos += static_cast<long>(N2);
            Gf[static_cast<std::size_t>(pos)] = taps[i] * st.amplitude;
        }
        fft_inplace(Gf, -1);
        std::vector<CVec> Psi(static_cast<std::size_t>(M));
        const long Lh = static_cast<long>(st.filters->L / 2);
        for (int m = 0; m < M; ++m) {
            const CVec cen = st.filters->centered(m);
            CVec& F = Psi[static_cast<std::size_t>(m)];
            F.assign(N2, cplx{});
            for (std::size_t k = 0; k < cen.size(); ++k) {
                long pos = static_cast<long>(k) - Lh;
                if (pos < 0) pos += static_cast<long>(N2);
                F[static_cast<std::size_t>(pos)] = cen[k];
            }
            fft_inplace(F, -1);
        }

        // Symbol impulse train spectrum on N.
        CVec train(N, cplx{});
        for (std::size_t n = 0; n < st.symbols.size(); ++n) train[static_cast<std::size_t>(n) * static_cast<std::size_t>(Ns)] = st.symbols[n];
        fft_inplace(train, -1);

        for (std::size_t p = 0; p < P; ++p) {
            std::fill(Qp.begin(), Qp.end(), cplx{});
            for (int m = 0; m < M; ++m) {
                const auto& e = epp[p][static_cast<std::size_t>(m)];
                const double d = e.delay * fs - static_cast<double>(I[p]) + sg[s].frac;
                accumulate_delayed(Psi[static_cast<std::size_t>(m)], e.gain, d / fs, fs, Qp);
            }
            for (std::size_t k = 0; k < N2; ++k) Qp[k] *= Gf[k];
            fft_inplace(Qp, +1);
            // q_lin[i] = q_circ[(i - o) mod N2] lands at absolute index n Ns + J + I_p + i - o.
            const long shift = sg[s].J + I[p] - o - g.e0;
            std::fill(Qbig.begin(), Qbig.end(), cplx{});
            const double inv = 1.0 / static_cast<double>(N2);
            for (long i = 0; i < static_cast<long>(N2); ++i) {
                long src = (i - o) % static_cast<long>(N2);
                if (src < 0) src += static_cast<long>(N2);
                long dst = (i + shift) % static_cast<long>(N);
                if (dst < 0) dst += static_cast<long>(N);
                Qbig[static_cast<std::size_t>(dst)] += Qp[static_cast<std::size_t>(src)] * inv;
            }
            fft_inplace(Qbig, -1);
            for (std::size_t k = 0; k < N; ++k) S[p][k] += Qbig[k] * train[k];
        }
    }

    const double out_t0 = static_cast<double>(g.w0) / fs;
    for (std::size_t p = 0; p < P; ++p) {
        fft_inplace(S[p], +1);
        const double scale = 1.0 / static_cast<double>(N);
        CVec ext(S[p].begin(), S[p].begin() + static_cast<long>(g.elen()));
        for (auto& v : ext) v *= scale;
        out.emplace_back(apply_drift(ext, g, spec.paths[p], spec.fc, fs, t_start), fs, out_t0);
    }
    return out;
}

ComplexBasebandSignal propagate_streams(std::span<const BeamformedStream> streams, const ChannelSpec& spec,
                                        double t_start) {
    auto paths = propagate_streams_paths(streams, spec, t_start);
    if (paths.empty()) throw InvalidArgument("channel has no paths");
    ComplexBasebandSignal clean = sum_paths(paths, paths.front());
    ComplexBasebandSignal noise = channel_noise(clean, spec);
    CVec total(clean.samples());
    for (std::size_t i = 0; i < total.size(); ++i) total[i] += noise[i];
    return ComplexBasebandSignal(std::move(total), clean.sample_rate(), clean.t0());
}

std::vector<ComplexBasebandSignal> propagate_uplink(const ComplexBasebandSignal& tx, const ChannelSpec& spec,
                                                    double t_start) {
    spec.validate();
    if (!(t_start >= 0.0)) throw InvalidArgument("t_start must be >= 0");
    if (spec.paths.empty()) throw InvalidArgument("uplink needs at least one path");
    const double fs = tx.sample_rate();
    const std::size_t n = tx.size();
    const std::size_t P = spec.paths.size();
    const int M = spec.geom.M;
    const double t_ref = t_start + tx.t0();

    std::vector<std::vector<ElementPathParams>> epp(P);
    double dmin = 0.0, dmax = 0.0;
    for (std::size_t p = 0; p < P; ++p)
        for (int m = 0; m < M; ++m) {
            epp[p].push_back(element_path_params(spec, p, m, t_start));
            const double d = epp[p].back().delay;
            dmin = (p == 0 && m == 0) ? d : std::min(dmin, d);
            dmax = (p == 0 && m == 0) ? d : std::max(dmax, d);
        }
    const double dur = static_cast<double>(n) / fs;
    const EpsRange eps = drift_range(spec, t_ref - 1.0, t_ref + dur + dmax + 1.0);

    // Drift first, on tx's own grid (extended); static element delays after.
    const Layout gd = make_layout(0.0, static_cast<double>(n), eps, fs);
    CVec src_ext(gd.elen(), cplx{});
    for (std::size_t j = 0; j < n; ++j) src_ext[static_cast<std::size_t>(static_cast<long>(j) - gd.e0)] = tx[j];

    const Layout g = make_layout(static_cast<double>(gd.w0) + dmin * fs, static_cast<double>(gd.w1) + dmax * fs,
                                 EpsRange{}, fs);
    const std::size_t N = grid_fft_size(g.elen() + 2048);
    std::vector<CVec> Xp(P);
    for (std::size_t p = 0; p < P; ++p) {
        CVec drifted = apply_drift(src_ext, gd, spec.paths[p], spec.fc, fs, t_ref, spec.paths[p].tau0);
        CVec& X = Xp[p];
        X.assign(N, cplx{});
        for (std::size_t i = 0; i < drifted.size(); ++i) {
            long pos = (gd.w0 + static_cast<long>(i) - g.e0) % static_cast<long>(N);
            if (pos < 0) pos += static_cast<long>(N);
            X[static_cast<std::size_t>(pos)] += drifted[i];
        }
        fft_inplace(X, -1);
    }

    const double out_t0 = tx.t0() + static_cast<double>(g.w0) / fs;
    std::vector<ComplexBasebandSignal> out;
    double power = 0.0;
    for (int m = 0; m < M; ++m) {
        CVec acc(N, cplx{});
        for (std::size_t p = 0; p < P; ++p) {
            const auto& e = epp[p][static_cast<std::size_t>(m)];
            accumulate_delayed(Xp[p], e.gain, e.delay, fs, acc);
        }
        fft_inplace(acc, +1);
        CVec w(g.wlen());
        const double scale = 1.0 / static_cast<double>(N);
        for (std::size_t i = 0; i < w.size(); ++i) w[i] = acc[static_cast<std::size_t>(g.w0 - g.e0) + i] * scale;
        out.emplace_back(std::move(w), fs, out_t0);
        power += out.back().mean_power();
    }
    power /= M;
    const double var = noise_variance(power, spec);
    if (var > 0.0) {
        for (int m = 0; m < M; ++m) {
            Rng rng(derive_seed(spec.seed, 1000 + static_cast<std::uint64_t>(m)));
            CVec w = complex_gaussian(out[static_cast<std::size_t>(m)].size(), var, rng);
            auto& v = out[static_cast<std::size_t>(m)].mutable_samples();
            for (std::size_t i = 0; i < v.size(); ++i) v[i] += w[i];
        }
    }
    return out;
}

ComplexBasebandSignal steered_path_pulse(const PulseSpec& pulse, const ChannelSpec& spec, std::size_t p, double theta0,
                                         double t) {
    spec.validate();
    pulse.validate();
    if (p >= spec.paths.size()) throw OutOfBounds("path index " + std::to_string(p) + " out of range");
    const PathSpec& ps = spec.paths[p];
    const int M = spec.geom.M;
    const double fs = pulse.sample_rate();
    const double d = incremental_delay(spec.geom, ps.theta_at(t)) - incremental_delay(spec.geom, theta0);
    const cplx cp = ps.gain * std::polar(1.0, -kTwoPi * std::fmod(spec.fc * ps.tau0, 1.0));

    const RVec taps = raised_cosine_taps(pulse);
    const long c = static_cast<long>(pulse.center_tap());
    const long margin = static_cast<long>(std::ceil(std::abs(d) * (M - 1) * fs)) + kEdgeMargin;
    const std::size_t len = taps.size() + 2 * static_cast<std::size_t>(margin);
    const std::size_t N = grid_fft_size(len + 2048);
    CVec G(N, cplx{});
    for (std::size_t i = 0; i < taps.size(); ++i) G[static_cast<std::size_t>(margin) + i] = taps[i];
    fft_inplace(G, -1);
    CVec acc(N, cplx{});
    const double norm = 1.0 / std::sqrt(static_cast<double>(M));
    for (int m = 0; m < M; ++m) {
        const double dm = m * d;
        accumulate_delayed(G, cp * norm * std::polar(1.0, -kTwoPi * spec.fc * dm), dm, fs, acc);
    }
    fft_inplace(acc, +1);
    CVec out(len);
    for (std::size_t i = 0; i < len; ++i) out[i] = acc[i] / static_cast<double>(N);
    return ComplexBasebandSignal(std::move(out), fs, -static_cast<double>(c + margin) / fs);
}

}  // namespace uwbeam
