#pragma once

#include <span>
#include <string>
#include <vector>

#include "uwbeam/beamformer.hpp"
#include "uwbeam/pulse.hpp"
#include "uwbeam/signal.hpp"

namespace uwbeam {

/// One period of the periodically repeated, pulse-shaped probe (circular pulse shaping).
CVec periodic_probe(std::span<const cplx> sequence, const PulseSpec& pulse);

/// Probe transmission: one guard period followed by `periods` measured periods, t0 = 0.
ComplexBasebandSignal probe_transmission(std::span<const cplx> sequence, const PulseSpec& pulse, int periods);

struct ProbeConfig {
    int periods = 4;
    double expected_delay_spread = 0.0;  // s; warns when longer than one probe period
};

/// Per-period, per-element circular channel estimates. h[i][m][k] is the
/// estimate for delay k T_s (modulo the probe period) in measured period i.
struct ChannelEstimates {
    std::vector<std::vector<CVec>> h;
    double fs = 1.0;
    std::size_t period = 0;  // samples
    std::vector<std::string> warnings;

    int elements() const { return h.empty() ? 0 : static_cast<int>(h.front().size()); }
};

/// Circular cross-correlation of each element's reception with the probe period,
/// normalized by the probe energy. The measured periods start one period after
/// the probe's t0 (probe_transmission timing), so delays are relative to it.
ChannelEstimates estimate_element_channels(std::span<const ComplexBasebandSignal> rx, std::span<const cplx> sequence,
                                           const PulseSpec& pulse, const ProbeConfig& cfg = {});

struct DelayAngleMap {
    RVec delay_axis;  // s, strictly increasing
    RVec angle_axis;  // rad, strictly increasing
    RVec power_db;    // row-major [delay][angle], dB re map maximum

    double at(std::size_t d, std::size_t a) const { return power_db[d * angle_axis.size() + a]; }
};

struct MapWindow {
    double before = 2e-3;  // s before the strongest arrival
    double length = 20e-3; // s
};

/// Uniform angle grid from lo to hi (inclusive) in steps of `step`, radians.
RVec angle_grid(double lo, double hi, double step);

/// power(tau, theta) = mean over periods |sum_m h_m(tau) e^{+j 2 pi fc m dtau(theta)}|^2 / M,
/// over a delay window anchored at the strongest arrival, in dB re the maximum.
/// An all-zero input gives a uniform -300 dB floor.
DelayAngleMap delay_angle_map(const ChannelEstimates& ch, const ArrayGeometry& geom, double fc,
                              std::span<const double> angles, const MapWindow& window = {});

/// Angle of the global maximum; ties go to smaller |theta|, then to the smaller index.
double principal_angle(const DelayAngleMap& map);

/// delay_s, angle_deg, power_db
void write_map_csv(const std::string& path, const DelayAngleMap& map);

}  // namespace uwbeam
