#pragma once

#include <span>

#include "uwbeam/signal.hpp"

namespace uwbeam {

/// (1 - alpha) v(t_L) + alpha v(t_R) with t_L, t_R the grid points around t.
/// Throws OutOfBounds unless t0 <= t <= t0 + duration - T_s.
cplx linear_interpolate(const ComplexBasebandSignal& v, double t);

/// 64-tap Kaiser-windowed sinc fractional-delay interpolator. The kernel is
/// tabulated once; evaluation is a table lookup per tap.
class BandlimitedInterpolator {
public:
    static constexpr int kTaps = 64;
    static constexpr int kHalf = kTaps / 2;

    /// Shared default instance (beta = 12, cutoff 0.5 cycles/sample).
    static const BandlimitedInterpolator& instance();

    explicit BandlimitedInterpolator(double kaiser_beta = 12.0, int phases = 4096);

    /// Value of the band-limited reconstruction of x at fractional index pos.
    /// Samples outside [0, x.size()) count as zero.
    cplx value_at(std::span<const cplx> x, double pos) const;

    /// Kernel weight at continuous offset u (|u| < kHalf).
    double kernel(double u) const;

private:
    int phases_;
    RVec table_;  // kernel sampled at u = -kHalf + i / phases_
};

/// Band-limited resampling out(t) = v(t / (1 - a_hat)) on v's own sample grid,
/// t measured from v.t0(). When carrier_hz != 0 the carrier rotation left by a
/// time compression is removed as well: out *= exp(+j 2 pi f_c a_hat t / (1 - a_hat)).
/// Output length round(len * (1 - a_hat)).
ComplexBasebandSignal resample(const ComplexBasebandSignal& v, double a_hat, double carrier_hz = 0.0);

}  // namespace uwbeam
