#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "uwbeam/beamformer.hpp"
#include "uwbeam/pulse.hpp"
#include "uwbeam/signal.hpp"

namespace uwbeam {

/// Path delay perturbation eps(t) = slope * t + sin_amplitude * sin(2 pi sin_frequency t + sin_phase).
struct DriftLaw {
    double slope = 0.0;          // dimensionless (v / c)
    double sin_amplitude = 0.0;  // seconds
    double sin_frequency = 0.0;  // Hz
    double sin_phase = 0.0;      // rad

    double operator()(double t) const;
    bool is_static() const { return slope == 0.0 && sin_amplitude == 0.0; }
};

/// Slow multiplicative gain variation 1 + depth * sin(2 pi frequency t + phase).
struct GainFluctuation {
    double depth = 0.0;
    double frequency = 0.0;  // Hz
    double phase = 0.0;      // rad

    double operator()(double t) const;
    bool is_static() const { return depth == 0.0; }
};

struct PathSpec {
    double gain = 1.0;        // h_p
    double tau0 = 0.0;        // delay at element 0, s
    double theta = 0.0;       // departure angle, rad
    DriftLaw drift;
    double angle_rate = 0.0;  // rad/s, slow geometry change
    GainFluctuation fluctuation;

    double theta_at(double t) const { return theta + angle_rate * t; }
};

enum class SnrReference {
    Received,  // noise against the mean noiseless received power of the frame
    Transmit,  // noise against reference_power * sum_p h_p^2 (omnidirectional equivalent)
};

struct ChannelSpec {
    std::vector<PathSpec> paths;
    ArrayGeometry geom;
    double fc = 12500.0;
    double snr_db = std::numeric_limits<double>::infinity();
    SnrReference snr_reference = SnrReference::Received;
    double reference_power = 1.0;  // mean transmit power per sample, Transmit mode only
    std::uint64_t seed = 0;

    void validate() const;
};

struct ElementPathParams {
    double delay;  // tau_p^0 + m dtau_p, s
    cplx gain;     // h_p e^{-j 2 pi fc tau_p^0} e^{-j 2 pi fc m dtau_p}
};

/// Geometry of path p seen from element m, with the path angle taken at time t.
ElementPathParams element_path_params(const ChannelSpec& spec, std::size_t p, int m, double t = 0.0);

/// Received baseband at the user:
///   sum_m sum_p gain_pm tx_m(t - delay_pm - eps_p(t_start + t)) e^{-j 2 pi fc eps_p(t_start + t)} + noise.
/// Static delays are applied exactly in the frequency domain, time-varying drift
/// with the 64-tap windowed-sinc interpolator. The output grid is tx's grid,
/// extended to cover every delayed copy.
ComplexBasebandSignal propagate(std::span<const ComplexBasebandSignal> tx, const ChannelSpec& spec, double t_start);

/// Noiseless per-path contributions on the common output grid of `propagate`.
std::vector<ComplexBasebandSignal> propagate_paths(std::span<const ComplexBasebandSignal> tx, const ChannelSpec& spec,
                                                   double t_start);

struct Decomposition {
    ComplexBasebandSignal principal;     // p = 0 term
    ComplexBasebandSignal interference;  // sum over p != 0
    ComplexBasebandSignal noise;
    ComplexBasebandSignal total;         // identical to propagate()
};

Decomposition interference_decomposition(std::span<const ComplexBasebandSignal> tx, const ChannelSpec& spec,
                                         double t_start);

/// One symbol stream sent through its own beam. The stream is delayed by
/// time_offset (the carrier stays continuous) and scaled by amplitude.
struct BeamformedStream {
    std::span<const cplx> symbols;
    PulseSpec pulse;
    const TimeFilters* filters = nullptr;
    double time_offset = 0.0;
    double amplitude = 1.0;
};

/// Same result as propagate(apply_transmit_beamforming(...)) summed over
/// streams, without materializing the M element signals. The output grid starts
/// at an integer multiple of T_s (absolute time).
ComplexBasebandSignal propagate_streams(std::span<const BeamformedStream> streams, const ChannelSpec& spec,
                                        double t_start);
std::vector<ComplexBasebandSignal> propagate_streams_paths(std::span<const BeamformedStream> streams,
                                                           const ChannelSpec& spec, double t_start);

/// Reciprocal link: one transmitter at the user, reception on every array
/// element. Element m sees path p with the same delay and phase as the downlink.
/// Drift is evaluated per path at t + tau_p^0 (aperture-scale differences ignored).
/// Noise is independent per element, seeded from spec.seed and m.
std::vector<ComplexBasebandSignal> propagate_uplink(const ComplexBasebandSignal& tx, const ChannelSpec& spec,
                                                    double t_start);

/// Effective pulse of path p after a single beam toward theta0:
///   (c_p / sqrt(M)) sum_m e^{-j 2 pi fc m (dtau_p - dtau_0)} g(t - m (dtau_p - dtau_0)),
/// delays applied band-limited. The pulse peak sits at t = 0 (tau_p^0 not included).
ComplexBasebandSignal steered_path_pulse(const PulseSpec& pulse, const ChannelSpec& spec, std::size_t p, double theta0,
                                         double t = 0.0);

/// Circularly symmetric noise for a noiseless reception under spec's SNR rule.
ComplexBasebandSignal channel_noise(const ComplexBasebandSignal& clean, const ChannelSpec& spec,
                                    std::uint64_t stream = 0);

}  // namespace uwbeam
