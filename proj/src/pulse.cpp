#include "uwbeam/pulse.hpp"

#include <cmath>
#include <string>

#include "uwbeam/error.hpp"

namespace uwbeam {
namespace {

double sinc(double x) {
    if (std::abs(x) < 1e-12) return 1.0;
    return std::sin(kPi * x) / (kPi * x);
}

}  // namespace

void PulseSpec::validate() const {
    if (!(alpha_rc >= 0.0 && alpha_rc <= 1.0)) {
        throw InvalidArgument("alpha_rc must lie in [0, 1], got " + std::to_string(alpha_rc));
    }
    if (!(symbol_period > 0.0) || !std::isfinite(symbol_period)) throw InvalidArgument("symbol_period must be positive");
    if (span_symbols < 4) throw InvalidArgument("span_symbols must be >= 4, got " + std::to_string(span_symbols));
    if (samples_per_symbol < 2) {
        throw InvalidArgument("samples_per_symbol must be >= 2, got " + std::to_string(samples_per_symbol));
    }
}

double raised_cosine(double t, double T, double alpha) {
    const double x = t / T;
    if (alpha > 0.0) {
        const double denom = 1.0 - 4.0 * alpha * alpha * x * x;
        if (std::abs(denom) < 1e-10) return (kPi / 4.0) * sinc(1.0 / (2.0 * alpha));
        return sinc(x) * std::cos(kPi * alpha * x) / denom;
    }
    return sinc(x);
}

RVec raised_cosine_taps(const PulseSpec& spec) {
    spec.validate();
    const std::size_t n = spec.tap_count();
    const auto center = static_cast<long>(spec.center_tap());
    const double Ts = spec.symbol_period / spec.samples_per_symbol;
    RVec taps(n);
    for (std::size_t i = 0; i < n; ++i) {
        const long k = static_cast<long>(i) - center;
        // Exact zeros at the Nyquist crossings avoid sin(k*pi) round-off.
        if (k != 0 && k % spec.samples_per_symbol == 0) {
            const double x = static_cast<double>(k / spec.samples_per_symbol);
            const double denom = 1.0 - 4.0 * spec.alpha_rc * spec.alpha_rc * x * x;
            if (std::abs(denom) > 1e-10) {
                taps[i] = 0.0;
                continue;
            }
        }
        taps[i] = raised_cosine(static_cast<double>(k) * Ts, spec.symbol_period, spec.alpha_rc);
    }
    return taps;
}

ComplexBasebandSignal pulse_shape(std::span<const cplx> symbols, const PulseSpec& pulse) {
    if (symbols.empty()) throw InvalidArgument("pulse_shape needs at least one symbol");
    const RVec taps = raised_cosine_taps(pulse);
    const std::size_t ns = static_cast<std::size_t>(pulse.samples_per_symbol);
    CVec out((symbols.size() - 1) * ns + taps.size(), cplx{});
    for (std::size_t n = 0; n < symbols.size(); ++n) {
        const cplx d = symbols[n];
        if (d == cplx{}) continue;
        cplx* dst = out.data() + n * ns;
        for (std::size_t i = 0; i < taps.size(); ++i) dst[i] += d * taps[i];
    }
    return ComplexBasebandSignal(std::move(out), pulse.sample_rate(), -pulse.span_symbols * pulse.symbol_period);
}

}  // namespace uwbeam
