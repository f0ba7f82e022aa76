#include "uwbeam/angle_estimator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>

#include "uwbeam/error.hpp"
#include "uwbeam/fft.hpp"

namespace uwbeam {

CVec periodic_probe(std::span<const cplx> sequence, const PulseSpec& pulse) {
    pulse.validate();
    if (sequence.empty()) throw InvalidArgument("probe sequence is empty");
    const auto Ns = static_cast<std::size_t>(pulse.samples_per_symbol);
    const std::size_t P = sequence.size() * Ns;
    const RVec taps = raised_cosine_taps(pulse);
    const auto c = static_cast<long>(pulse.center_tap());
    CVec out(P, cplx{});
    for (std::size_t n = 0; n < sequence.size(); ++n) {
        const long base = static_cast<long>(n * Ns) - c;
        for (std::size_t i = 0; i < taps.size(); ++i) {
            long k = (base + static_cast<long>(i)) % static_cast<long>(P);
            if (k < 0) k += static_cast<long>(P);
            out[static_cast<std::size_t>(k)] += sequence[n] * taps[i];
        }
    }
    return out;
}

ComplexBasebandSignal probe_transmission(std::span<const cplx> sequence, const PulseSpec& pulse, int periods) {
    if (periods < 1) throw InvalidArgument("probe needs at least one measured period");
    const CVec one = periodic_probe(sequence, pulse);
    CVec x;
    x.reserve(one.size() * static_cast<std::size_t>(periods + 1));
    for (int i = 0; i <= periods; ++i) x.insert(x.end(), one.begin(), one.end());
    return ComplexBasebandSignal(std::move(x), pulse.sample_rate(), 0.0);
}

ChannelEstimates estimate_element_channels(std::span<const ComplexBasebandSignal> rx, std::span<const cplx> sequence,
                                           const PulseSpec& pulse, const ProbeConfig& cfg) {
    if (rx.empty()) throw InvalidArgument("no element receptions");
    if (cfg.periods < 1) throw InvalidArgument("probe needs at least one measured period");
    const CVec rep = periodic_probe(sequence, pulse);
    const std::size_t P = rep.size();
    const double fs = pulse.sample_rate();
    ChannelEstimates out;
    out.fs = fs;
    out.period = P;
    if (cfg.expected_delay_spread * fs > static_cast<double>(P))
        out.warnings.push_back("probe period " + std::to_string(static_cast<double>(P) / fs) +
                               " s is shorter than the delay spread; estimates are aliased");

    CVec R = rep;
    fft_inplace(R, -1);
    const double e = energy(rep);
    out.h.assign(static_cast<std::size_t>(cfg.periods), std::vector<CVec>(rx.size()));
    CVec X(P);
    for (std::size_t m = 0; m < rx.size(); ++m) {
        const auto& r = rx[m];
        if (std::abs(r.sample_rate() - fs) > 1e-9 * fs) throw InvalidArgument("reception rate differs from probe rate");
        // Index of absolute time P T_s (start of the first measured period).
        const long start = std::lround(static_cast<double>(P) - r.t0() * fs);
        for (int i = 0; i < cfg.periods; ++i) {
            const long s0 = start + static_cast<long>(i) * static_cast<long>(P);
            if (s0 < 0 || s0 + static_cast<long>(P) > static_cast<long>(r.size()))
                throw TruncatedFrame("probe reception does not cover measured period " + std::to_string(i));
            std::copy_n(r.samples().begin() + s0, P, X.begin());
            fft_inplace(X, -1);
            for (std::size_t k = 0; k < P; ++k) X[k] *= std::conj(R[k]);
            fft_inplace(X, +1);
            CVec& h = out.h[static_cast<std::size_t>(i)][m];
            h.resize(P);
            for (std::size_t k = 0; k < P; ++k) h[k] = X[k] / (static_cast<double>(P) * e);
        }
    }
    return out;
}

RVec angle_grid(double lo, double hi, double step) {
    if (!(step > 0.0) || !(hi >= lo)) throw InvalidArgument("angle grid needs step > 0 and hi >= lo");
    const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
    RVec g(n);
    for (std::size_t i = 0; i < n; ++i) g[i] = lo + static_cast<double>(i) * step;
    return g;
}

DelayAngleMap delay_angle_map(const ChannelEstimates& ch, const ArrayGeometry& geom, double fc,
                              std::span<const double> angles, const MapWindow& window) {
    geom.validate();
    const int M = ch.elements();
    if (M < 2) throw InvalidArgument("delay-angle map needs at least two elements");
    if (M != geom.M) throw InvalidArgument("channel estimates do not match array size");
    if (angles.empty()) throw InvalidArgument("empty angle grid");
    for (std::size_t i = 1; i < angles.size(); ++i)
        if (!(angles[i] > angles[i - 1])) throw InvalidArgument("angle grid must be strictly increasing");
    const std::size_t P = ch.period;
    const double fs = ch.fs;

    // Anchor the window at the delay with the most energy summed over elements and periods.
    std::size_t peak = 0;
    double best = -1.0;
    for (std::size_t k = 0; k < P; ++k) {
        double acc = 0.0;
        for (const auto& per : ch.h)
            for (const auto& h : per) acc += std::norm(h[k]);
        if (acc > best) {
            best = acc;
            peak = k;
        }
    }
    const auto before = static_cast<long>(std::lround(window.before * fs));
    const auto len = std::min<std::size_t>(P, static_cast<std::size_t>(std::max(1L, std::lround(window.length * fs))));
    const long first = static_cast<long>(peak) - before;

    DelayAngleMap map;
    map.angle_axis.assign(angles.begin(), angles.end());
    map.delay_axis.resize(len);
    for (std::size_t d = 0; d < len; ++d) map.delay_axis[d] = static_cast<double>(first + static_cast<long>(d)) / fs;

    // Element m is read at tau + m dtau(theta) and rotated by e^{+j 2 pi fc m dtau}; the
    // fractional alignment is a phase ramp over a zero-padded segment around the window.
    const std::size_t A = angles.size();
    RVec dts(A);
    double max_shift = 0.0;
    for (std::size_t a = 0; a < A; ++a) {
        dts[a] = incremental_delay(geom, angles[a]);
        max_shift = std::max(max_shift, std::abs(dts[a]) * (M - 1) * fs);
    }
    const auto pad = static_cast<std::size_t>(std::ceil(max_shift)) + 64;
    const std::size_t W = fast_fft_size(len + 3 * pad);
    const long seg0 = first - static_cast<long>(pad);
    const std::size_t Mu = static_cast<std::size_t>(M);

    const double df = fs / static_cast<double>(W);
    const std::size_t half = W / 2;

    RVec power(len * A, 0.0);
    std::vector<CVec> H(Mu, CVec(W));
    CVec Y(W);
    for (const auto& per : ch.h) {
        for (std::size_t m = 0; m < Mu; ++m) {
            CVec& x = H[m];
            std::fill(x.begin(), x.end(), cplx{});
            for (std::size_t k = 0; k < len + 2 * pad; ++k) {
                long i = (seg0 + static_cast<long>(k)) % static_cast<long>(P);
                if (i < 0) i += static_cast<long>(P);
                x[k] = per[m][static_cast<std::size_t>(i)];
            }
            fft_inplace(x, -1);
        }
        for (std::size_t a = 0; a < A; ++a) {
            std::fill(Y.begin(), Y.end(), cplx{});
            for (std::size_t m = 0; m < Mu; ++m) {
                const double D = static_cast<double>(m) * dts[a];
                const CVec& x = H[m];
                const cplx step = std::polar(1.0, kTwoPi * df * D);
                // Non-negative bins start at fc, negative ones at fc - half df.
                cplx r = std::polar(1.0, kTwoPi * fc * D);
                for (std::size_t k = 0; k < half; ++k, r *= step) Y[k] += x[k] * r;
                r = std::polar(1.0, kTwoPi * (fc - static_cast<double>(W - half) * df) * D);
                for (std::size_t k = half; k < W; ++k, r *= step) Y[k] += x[k] * r;
            }
            fft_inplace(Y, +1);
            for (std::size_t d = 0; d < len; ++d)
                power[d * A + a] += std::norm(Y[pad + d] / static_cast<double>(W));
        }
    }
    const double norm = 1.0 / (static_cast<double>(M) * static_cast<double>(ch.h.size()));
    double pmax = 0.0;
    for (auto& p : power) {
        p *= norm;
        pmax = std::max(pmax, p);
    }
    map.power_db.resize(power.size());
    for (std::size_t i = 0; i < power.size(); ++i)
        map.power_db[i] = pmax > 0.0 ? 10.0 * std::log10(std::max(power[i] / pmax, 1e-30)) : -300.0;
    return map;
}

double principal_angle(const DelayAngleMap& map) {
    const std::size_t A = map.angle_axis.size();
    if (A == 0 || map.power_db.empty()) throw InvalidArgument("principal_angle: empty map");
    std::size_t best = 0;
    for (std::size_t i = 1; i < map.power_db.size(); ++i) {
        const double p = map.power_db[i];
        const double q = map.power_db[best];
        if (p > q || (p == q && std::abs(map.angle_axis[i % A]) < std::abs(map.angle_axis[best % A]))) best = i;
    }
    return map.angle_axis[best % A];
}

void write_map_csv(const std::string& path, const DelayAngleMap& map) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot open " + path + " for writing");
    f << "delay_s,angle_deg,power_db\n" << std::setprecision(10);
    const std::size_t A = map.angle_axis.size();
    for (std::size_t d = 0; d < map.delay_axis.size(); ++d)
        for (std::size_t a = 0; a < A; ++a)
            f << map.delay_axis[d] << ',' << map.angle_axis[a] * 180.0 / kPi << ',' << map.at(d, a) << '\n';
    if (!f) throw IoError("write failed: " + path);
}

}  // namespace uwbeam
