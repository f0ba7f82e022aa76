#pragma once

#include <span>

#include "uwbeam/signal.hpp"

namespace uwbeam {

/// Raised-cosine pulse sampled at samples_per_symbol / symbol_period.
struct PulseSpec {
    double alpha_rc = 0.25;
    double symbol_period = 1.0;  // T = 1/R, seconds
    int span_symbols = 16;       // taps cover [-span*T, span*T]
    int samples_per_symbol = 6;  // N_s

    double sample_rate() const noexcept { return samples_per_symbol / symbol_period; }
    /// One-sided occupied bandwidth (1 + alpha) / (2T).
    double half_bandwidth() const noexcept { return (1.0 + alpha_rc) / (2.0 * symbol_period); }
    std::size_t tap_count() const noexcept { return 2 * static_cast<std::size_t>(span_symbols * samples_per_symbol) + 1; }
    std::size_t center_tap() const noexcept { return static_cast<std::size_t>(span_symbols * samples_per_symbol); }

    void validate() const;
};

/// Continuous raised-cosine g(t) with g(0) = 1; the removable singularity at
/// |t| = T/(2 alpha) is replaced by its limit (pi/4) sinc(1/(2 alpha)).
double raised_cosine(double t, double T, double alpha);

/// Symmetric taps g(n T_s), n = -span*N_s .. span*N_s.
RVec raised_cosine_taps(const PulseSpec& spec);

/// u(t) = sum_n d[n] g(t - nT). The first output sample sits at t0 = -span*T so
/// that symbol 0 peaks at t = 0. Output length (N-1)*N_s + tap_count.
ComplexBasebandSignal pulse_shape(std::span<const cplx> symbols, const PulseSpec& pulse);

}  // namespace uwbeam
