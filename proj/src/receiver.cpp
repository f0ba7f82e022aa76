#include "uwbeam/receiver.hpp"

#include <algorithm>
#include <cmath>

#include "uwbeam/error.hpp"
#include "uwbeam/fft.hpp"
#include "uwbeam/interp.hpp"
#include "uwbeam/noise.hpp"

namespace uwbeam {

cplx decision(cplx d_hat, Constellation c) {
    const double re = d_hat.real() >= 0.0 ? 1.0 : -1.0;
    if (c == Constellation::BPSK) return {re, 0.0};
    const double im = d_hat.imag() >= 0.0 ? 1.0 : -1.0;
    return cplx(re, im) / std::sqrt(2.0);
}

int bits_per_symbol(Constellation c) { return c == Constellation::BPSK ? 1 : 2; }

unsigned symbol_bits(cplx point, Constellation c) {
    unsigned b = point.real() < 0.0 ? 1u : 0u;
    if (c == Constellation::QPSK) b |= (point.imag() < 0.0 ? 2u : 0u);
    return b;
}

CVec random_symbols(std::size_t n, Constellation c, std::uint64_t seed) {
    Rng rng(seed);
    CVec out(n);
    const double s = 1.0 / std::sqrt(2.0);
    for (auto& v : out) {
        const auto r = rng();
        if (c == Constellation::BPSK)
            v = (r & 1u) ? cplx(-1.0, 0.0) : cplx(1.0, 0.0);
        else
            v = cplx((r & 1u) ? -s : s, (r & 2u) ? -s : s);
    }
    return out;
}

namespace {

// Preamble replica compressed by a_hat: u((1 - a) s) e^{-j 2 pi fc a s}, s from the replica start.
CVec doppler_replica(const CVec& rep, double a_hat, double fc, double fs) {
    if (a_hat == 0.0) return rep;
    const auto n = static_cast<std::size_t>(std::ceil(static_cast<double>(rep.size()) / (1.0 - a_hat)));
    const auto& bl = BandlimitedInterpolator::instance();
    CVec out(n);
    const double Ts = 1.0 / fs;
    for (std::size_t k = 0; k < n; ++k) {
        const double s = static_cast<double>(k);
        out[k] = bl.value_at(rep, s * (1.0 - a_hat)) * std::polar(1.0, -kTwoPi * fc * a_hat * s * Ts);
    }
    return out;
}

cplx direct_corr(std::span<const cplx> v, const CVec& rep, long k) {
    cplx acc{};
    const long n = static_cast<long>(v.size());
    for (std::size_t j = 0; j < rep.size(); ++j) {
        const long i = k + static_cast<long>(j);
        if (i < 0 || i >= n) continue;
        acc += v[static_cast<std::size_t>(i)] * std::conj(rep[j]);
    }
    return acc;
}

}  // namespace

SyncResult synchronize(const ComplexBasebandSignal& v, std::span<const cplx> preamble, const PulseSpec& pulse,
                       double fc, const SyncConfig& cfg) {
    pulse.validate();
    if (preamble.empty()) throw InvalidArgument("synchronize: empty preamble");
    if (std::abs(v.sample_rate() - pulse.sample_rate()) > 1e-9 * pulse.sample_rate())
        throw InvalidArgument("synchronize: signal rate differs from pulse rate");
    if (!(cfg.a_max >= 0.0 && cfg.a_max < 0.01)) throw InvalidArgument("synchronize: a_max must be in [0, 0.01)");
    if (cfg.search_doppler && !cfg.known_doppler && (!(cfg.a_step > 0.0) || !(cfg.coarse_step > 0.0)))
        throw InvalidArgument("synchronize: Doppler steps must be positive");

    const double fs = v.sample_rate();
    const CVec rep0 = pulse_shape(preamble, pulse).samples();
    const std::size_t K = std::min<std::size_t>(cfg.max_offset == 0 ? v.size() : cfg.max_offset + 1, v.size());
    if (K == 0) throw SyncFailure("synchronize: empty signal");

    std::vector<double> coarse;
    if (cfg.known_doppler) {
        if (!(std::abs(*cfg.known_doppler) < 0.01)) throw InvalidArgument("synchronize: |a| must be < 0.01");
        coarse.push_back(*cfg.known_doppler);
    } else if (cfg.search_doppler) {
        const int half = static_cast<int>(std::floor(cfg.a_max / cfg.coarse_step + 1e-9));
        for (int i = -half; i <= half; ++i) coarse.push_back(i * cfg.coarse_step);
    } else {
        coarse.push_back(0.0);
    }

    const double a_extreme = std::max(std::abs(coarse.front()), std::abs(coarse.back())) + cfg.coarse_step;
    const auto nr_max = static_cast<std::size_t>(std::ceil(static_cast<double>(rep0.size()) / (1.0 - a_extreme))) + 1;
    const std::size_t N = fast_fft_size(K + nr_max);
    CVec V(N, cplx{});
    std::copy_n(v.samples().begin(), std::min(v.size(), N), V.begin());
    fft_inplace(V, -1);

    double best_metric = -1.0;
    double best_a = 0.0;
    std::size_t best_k = 0;
    RVec best_mag;
    CVec R(N);
    for (double a : coarse) {
        const CVec rep = doppler_replica(rep0, a, fc, fs);
        std::fill(R.begin(), R.end(), cplx{});
        std::copy(rep.begin(), rep.end(), R.begin());
        fft_inplace(R, -1);
        for (std::size_t i = 0; i < N; ++i) R[i] = V[i] * std::conj(R[i]);
        fft_inplace(R, +1);
        const double e = energy(rep) * static_cast<double>(N) * static_cast<double>(N);
        RVec mag(K);
        std::size_t arg = 0;
        for (std::size_t k = 0; k < K; ++k) {
            mag[k] = std::norm(R[k]) / e;
            if (mag[k] > mag[arg]) arg = k;
        }
        if (mag[arg] > best_metric) {
            best_metric = mag[arg];
            best_a = a;
            best_k = arg;
            best_mag = std::move(mag);
        }
    }

    // Local refinement on the fine Doppler grid with direct correlation.
    CVec best_rep = doppler_replica(rep0, best_a, fc, fs);
    if (!cfg.known_doppler && cfg.search_doppler && cfg.a_step < cfg.coarse_step) {
        const int steps = static_cast<int>(std::ceil(cfg.coarse_step / cfg.a_step));
        const long span = static_cast<long>(pulse.samples_per_symbol);
        const double a0 = best_a;
        for (int j = -steps + 1; j < steps; ++j) {
            if (j == 0) continue;
            const double a = a0 + j * cfg.a_step;
            if (std::abs(a) > cfg.a_max + 1e-12) continue;
            const CVec rep = doppler_replica(rep0, a, fc, fs);
            const double e = energy(rep);
            for (long k = static_cast<long>(best_k) - span; k <= static_cast<long>(best_k) + span; ++k) {
                if (k < 0 || k >= static_cast<long>(K)) continue;
                const double m = std::norm(direct_corr(v.view(), rep, k)) / e;
                if (m > best_metric) {
                    best_metric = m;
                    best_a = a;
                    best_k = static_cast<std::size_t>(k);
                    best_rep = rep;
                }
            }
        }
    }

    SyncResult out;
    out.frame_start = best_k;
    out.coarse_doppler = best_a;
    const double e_rep = energy(best_rep);
    const cplx peak = direct_corr(v.view(), best_rep, static_cast<long>(best_k));
    out.gain = peak / e_rep;

    // Parabolic sub-sample refinement on the correlation magnitude.
    if (best_k > 0 && best_k + 1 < v.size()) {
        const double ym = std::abs(direct_corr(v.view(), best_rep, static_cast<long>(best_k) - 1));
        const double y0 = std::abs(peak);
        const double yp = std::abs(direct_corr(v.view(), best_rep, static_cast<long>(best_k) + 1));
        const double den = ym - 2.0 * y0 + yp;
        if (den < 0.0) out.fine_offset = std::clamp(0.5 * (ym - yp) / den, -0.5, 0.5);
    }

    // Sidelobes from the coarse correlation of the winning branch's neighbourhood.
    const long excl = 2L * pulse.samples_per_symbol;
    double side = 0.0;
    for (std::size_t k = 0; k < best_mag.size(); ++k)
        if (std::abs(static_cast<long>(k) - static_cast<long>(best_k)) > excl) side = std::max(side, best_mag[k]);
    const double peak_metric = std::norm(peak) / e_rep;
    out.peak_quality = side > 0.0 ? 10.0 * std::log10(peak_metric / side) : 300.0;
    if (!(peak_metric > 0.0)) throw SyncFailure("synchronize: no correlation peak");
    if (out.peak_quality < cfg.min_peak_quality_db)
        throw SyncFailure("synchronize: peak quality " + std::to_string(out.peak_quality) + " dB below threshold " +
                          std::to_string(cfg.min_peak_quality_db) + " dB");
    return out;
}

ComplexBasebandSignal coarse_resample(const ComplexBasebandSignal& v, double a_hat, double fc) {
    return resample(v, a_hat, fc);
}

ComplexBasebandSignal front_end_filter(const ComplexBasebandSignal& v, const PulseSpec& pulse, double margin) {
    if (!(margin > 0.0)) throw InvalidArgument("front_end_filter: margin must be positive");
    const std::size_t N = fast_fft_size(v.size() + 1024);
    CVec X(N, cplx{});
    std::copy(v.samples().begin(), v.samples().end(), X.begin());
    fft_inplace(X, -1);
    const double fs = v.sample_rate();
    const double cutoff = pulse.half_bandwidth() * margin;
    for (std::size_t k = 0; k < N; ++k) {
        const double f = (k < N / 2 ? static_cast<double>(k) : static_cast<double>(k) - static_cast<double>(N)) * fs /
                         static_cast<double>(N);
        if (std::abs(f) > cutoff) X[k] = 0.0;
    }
    fft_inplace(X, +1);
    CVec out(v.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = X[i] / static_cast<double>(N);
    return ComplexBasebandSignal(std::move(out), fs, v.t0());
}

}  // namespace uwbeam
