#include "uwbeam/interp.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "uwbeam/error.hpp"

namespace uwbeam {

cplx linear_interpolate(const ComplexBasebandSignal& v, double t) {
    const std::size_t n = v.size();
    const double pos = (t - v.t0()) * v.sample_rate();
    // Allow round-off at the ends of the valid range, never real extrapolation.
    constexpr double kSlack = 1e-9;
    if (n == 0 || !(pos >= -kSlack) || !(pos <= static_cast<double>(n - 1) + kSlack)) {
        std::ostringstream msg;
        msg << "linear_interpolate: t = " << t << " s outside [" << v.t0() << ", " << v.time_of(n == 0 ? 0 : n - 1)
            << "]";
        throw OutOfBounds(msg.str());
    }
    const double clamped = std::clamp(pos, 0.0, static_cast<double>(n - 1));
    const auto left = static_cast<std::size_t>(std::floor(clamped));
    const double alpha = clamped - static_cast<double>(left);
    if (left + 1 >= n || alpha == 0.0) return v[left];
    return (1.0 - alpha) * v[left] + alpha * v[left + 1];
}

namespace {

double bessel_i0(double x) {
    double sum = 1.0, term = 1.0;
    const double q = x * x / 4.0;
    for (int k = 1; k < 200; ++k) {
        term *= q / (static_cast<double>(k) * k);
        sum += term;
        if (term < sum * 1e-17) break;
    }
    return sum;
}

}  // namespace

const BandlimitedInterpolator& BandlimitedInterpolator::instance() {
    static const BandlimitedInterpolator interp;
    return interp;
}

BandlimitedInterpolator::BandlimitedInterpolator(double kaiser_beta, int phases) : phases_(phases) {
    const std::size_t count = static_cast<std::size_t>(kTaps * phases_) + 1;
    table_.resize(count);
    const double norm = bessel_i0(kaiser_beta);
    for (std::size_t i = 0; i < count; ++i) {
        const double u = -kHalf + static_cast<double>(i) / phases_;
        const double r = u / kHalf;
        const double w = std::abs(r) >= 1.0 ? 0.0 : bessel_i0(kaiser_beta * std::sqrt(1.0 - r * r)) / norm;
        const double s = std::abs(u) < 1e-15 ? 1.0 : std::sin(kPi * u) / (kPi * u);
        table_[i] = s * w;
    }
}

double BandlimitedInterpolator::kernel(double u) const {
    const double idx = (u + kHalf) * phases_;
    if (idx <= 0.0 || idx >= static_cast<double>(table_.size() - 1)) return 0.0;
    const auto i = static_cast<std::size_t>(idx);
    const double f = idx - static_cast<double>(i);
    return table_[i] + f * (table_[i + 1] - table_[i]);
}

cplx BandlimitedInterpolator::value_at(std::span<const cplx> x, double pos) const {
    const double base = std::floor(pos);
    const double frac = pos - base;
    const long k0 = static_cast<long>(base);
    const long n = static_cast<long>(x.size());
    // Offsets u = pos - k for k = k0 - kHalf + 1 .. k0 + kHalf.
    const long first = k0 - kHalf + 1;
    const long lo = std::max<long>(first, 0);
    const long hi = std::min<long>(k0 + kHalf, n - 1);
    if (lo > hi) return {};
    if (frac == 0.0) return (k0 >= 0 && k0 < n) ? x[static_cast<std::size_t>(k0)] : cplx{};
    // Table index of u is (u + kHalf) * phases; u = frac + kHalf - 1 at k = first
    // and each later tap steps back by `phases_`.
    const double start = (frac + kTaps - 1) * phases_;
    const auto istart = static_cast<long>(start);
    const double f = start - static_cast<double>(istart);
    double re = 0.0, im = 0.0;
    for (long k = lo; k <= hi; ++k) {
        const long i = istart - (k - first) * phases_;
        const double w = table_[static_cast<std::size_t>(i)] + f * (table_[static_cast<std::size_t>(i) + 1] - table_[static_cast<std::size_t>(i)]);
        re += w * x[static_cast<std::size_t>(k)].real();
        im += w * x[static_cast<std::size_t>(k)].imag();
    }
    return {re, im};
}

ComplexBasebandSignal resample(const ComplexBasebandSignal& v, double a_hat, double carrier_hz) {
    if (!(std::abs(a_hat) < 0.01)) throw InvalidArgument("resample: |a_hat| must be < 0.01");
    if (a_hat == 0.0) return v;
    const auto out_len = static_cast<std::size_t>(std::llround(static_cast<double>(v.size()) * (1.0 - a_hat)));
    const double scale = 1.0 / (1.0 - a_hat);
    const auto& interp = BandlimitedInterpolator::instance();
    const double Ts = v.sample_period();
    CVec out(out_len);
    for (std::size_t k = 0; k < out_len; ++k) {
        const double pos = static_cast<double>(k) * scale;
        cplx s = interp.value_at(v.view(), pos);
        if (carrier_hz != 0.0) {
            const double t = static_cast<double>(k) * Ts;
            s *= std::polar(1.0, kTwoPi * carrier_hz * a_hat * t * scale);
        }
        out[k] = s;
    }
    return ComplexBasebandSignal(std::move(out), v.sample_rate(), v.t0());
}

}  // namespace uwbeam
