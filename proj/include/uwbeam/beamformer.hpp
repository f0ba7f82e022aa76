#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "uwbeam/pulse.hpp"
#include "uwbeam/signal.hpp"

namespace uwbeam {

/// Uniform linear array; element 0 is the phase reference and positive angles
/// point toward increasing element index.
struct ArrayGeometry {
    int M = 1;
    double delta = 0.05;    // element spacing, m
    double c = 1500.0;      // nominal sound speed, m/s

    void validate() const;
};

/// delta * sin(theta) / c
double incremental_delay(const ArrayGeometry& geom, double theta);

/// [1, e^{-j chi}, ..., e^{-j (M-1) chi}]
CVec steering_vector(int M, double chi);

/// Frequency grid and band mask shared by every design.
struct BinGrid {
    double fc = 0.0;
    double fs = 1.0;
    std::size_t L = 0;
    int Ns = 2;
    double alpha_rc = 0.0;

    /// ceil(L (1 + alpha) / (2 Ns))
    std::size_t half_band_bins() const;
    double bin_spacing() const { return fs / static_cast<double>(L); }
    /// Passband frequency of bin l: fc + l df for l <= L/2, fc + (l - L) df above.
    double bin_frequency(std::size_t l) const;
    bool in_band(std::size_t l) const;
    /// Occupied bins in increasing index order.
    std::vector<std::size_t> band_bins() const;
    /// L must be even and at least 2 (half_band_bins + 1); alpha in [0, 1].
    void validate() const;
};

/// Per-bin, per-element transmit weights. Row l holds Phi_l.
class BeamWeights {
public:
    BeamWeights() = default;
    BeamWeights(BinGrid grid, int M);

    const BinGrid& grid() const noexcept { return grid_; }
    int elements() const noexcept { return M_; }
    std::size_t bins() const noexcept { return grid_.L; }
    const std::vector<std::size_t>& band_bins() const noexcept { return band_bins_; }

    std::span<const cplx> bin(std::size_t l) const { return {data_.data() + l * static_cast<std::size_t>(M_), static_cast<std::size_t>(M_)}; }
    std::span<cplx> bin(std::size_t l) { return {data_.data() + l * static_cast<std::size_t>(M_), static_cast<std::size_t>(M_)}; }
    cplx operator()(std::size_t l, int m) const { return data_[l * static_cast<std::size_t>(M_) + static_cast<std::size_t>(m)]; }

    /// phi_m[l] for l = 0 .. L-1
    CVec element_column(int m) const;

private:
    BinGrid grid_;
    int M_ = 0;
    std::vector<std::size_t> band_bins_;
    CVec data_;
};

/// Phi_l = s_M^*(2 pi f_l dtau0) / sqrt(M) on the occupied bins, zero elsewhere.
BeamWeights design_single_beam(const ArrayGeometry& geom, double theta0, const BinGrid& grid);

/// Per occupied bin: minimum-norm Phi_l with s^T(chi_target) Phi_l real positive and
/// s^T(chi_null) Phi_l = 0 for every null, rescaled to unit norm.
/// Throws InvalidArgument for coincident angles or too many constraints and
/// SingularDesign (carrying the bin) when the constraints alias.
BeamWeights design_null_steering(const ArrayGeometry& geom, double theta_target, std::span<const double> theta_nulls,
                                 const BinGrid& grid);

/// Complex array response s^T(2 pi f_l dtau(theta)) Phi_l at one bin.
cplx array_response(const BeamWeights& w, const ArrayGeometry& geom, std::size_t l, double theta);

/// |array_response| over theta_grid at the occupied bin nearest to f (passband Hz).
/// Throws InvalidArgument when f falls outside the occupied band.
RVec beam_pattern(const BeamWeights& w, const ArrayGeometry& geom, std::span<const double> theta_grid, double f);

/// Per-element time filters psi_m[n] = (1/L) sum_l phi_m[l] e^{j 2 pi l n / L}, n = 0..L-1.
struct TimeFilters {
    std::vector<CVec> taps;  // one length-L sequence per element, index n as in the IDFT
    double fs = 1.0;
    std::size_t L = 0;

    /// Taps reordered as a causal FIR with the n = 0 tap at index L/2.
    CVec centered(int m) const;
    /// Group delay of the centered FIR, (L/2) T_s.
    double group_delay() const { return static_cast<double>(L / 2) / fs; }
};

TimeFilters synthesize_time_filters(const BeamWeights& w);

/// u_m = pulse_shape(symbols) convolved with the centered psi_m. The t0 of each
/// output is shifted back by the group delay so symbol 0 still peaks at t = 0.
std::vector<ComplexBasebandSignal> apply_transmit_beamforming(std::span<const cplx> symbols, const PulseSpec& pulse,
                                                              const TimeFilters& filters);

}  // namespace uwbeam
