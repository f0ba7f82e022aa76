#include "uwbeam/beamformer.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <sstream>

#include "uwbeam/error.hpp"
#include "uwbeam/fft.hpp"

namespace uwbeam {

void ArrayGeometry::validate() const {
    if (M < 1) throw InvalidArgument("array needs at least one element");
    if (!(delta > 0.0)) throw InvalidArgument("element spacing must be positive");
    if (!(c > 0.0)) throw InvalidArgument("sound speed must be positive");
}

double incremental_delay(const ArrayGeometry& geom, double theta) {
    if (!(std::abs(theta) <= kPi / 2 + 1e-12)) throw InvalidArgument("steering angle must satisfy |theta| <= pi/2");
    return geom.delta * std::sin(theta) / geom.c;
}

CVec steering_vector(int M, double chi) {
    if (M < 1) throw InvalidArgument("steering_vector needs M >= 1");
    CVec s(static_cast<std::size_t>(M));
    for (int m = 0; m < M; ++m) s[static_cast<std::size_t>(m)] = std::polar(1.0, -chi * m);
    return s;
}

std::size_t BinGrid::half_band_bins() const {
    // Exact integer ceil where the product is integral avoids 1e-16 surprises.
    const double exact = static_cast<double>(L) * (1.0 + alpha_rc) / (2.0 * Ns);
    const double rounded = std::round(exact);
    if (std::abs(exact - rounded) < 1e-9) return static_cast<std::size_t>(rounded);
    return static_cast<std::size_t>(std::ceil(exact));
}

double BinGrid::bin_frequency(std::size_t l) const {
    const double df = bin_spacing();
    if (l <= L / 2) return fc + static_cast<double>(l) * df;
    return fc + (static_cast<double>(l) - static_cast<double>(L)) * df;
}

bool BinGrid::in_band(std::size_t l) const {
    const std::size_t hb = half_band_bins();
    return l <= hb || l + hb >= L;
}

std::vector<std::size_t> BinGrid::band_bins() const {
    std::vector<std::size_t> out;
    for (std::size_t l = 0; l < L; ++l) {
        if (in_band(l)) out.push_back(l);
    }
    return out;
}

void BinGrid::validate() const {
    if (!(alpha_rc >= 0.0 && alpha_rc <= 1.0)) throw InvalidArgument("alpha_rc must lie in [0, 1]");
    if (Ns < 2) throw InvalidArgument("Ns must be >= 2");
    if (!(fs > 0.0)) throw InvalidArgument("fs must be positive");
    if (L == 0 || L % 2 != 0) throw InvalidArgument("bin count L must be even and positive");
    const std::size_t hb = half_band_bins();
    if (L < 2 * hb + 2) {
        std::ostringstream msg;
        msg << "L = " << L << " cannot hold the occupied band; need L >= " << 2 * hb + 2 << " (2 * (ceil(L(1+alpha)/(2Ns)) + 1))";
        throw InvalidArgument(msg.str());
    }
}

BeamWeights::BeamWeights(BinGrid grid, int M)
    : grid_(grid), M_(M), band_bins_(grid.band_bins()), data_(grid.L * static_cast<std::size_t>(M), cplx{}) {}

CVec BeamWeights::element_column(int m) const {
    CVec col(grid_.L);
    for (std::size_t l = 0; l < grid_.L; ++l) col[l] = (*this)(l, m);
    return col;
}

BeamWeights design_single_beam(const ArrayGeometry& geom, double theta0, const BinGrid& grid) {
    geom.validate();
    grid.validate();
    const double dtau = incremental_delay(geom, theta0);
    BeamWeights w(grid, geom.M);
    const double scale = 1.0 / std::sqrt(static_cast<double>(geom.M));
    for (std::size_t l : w.band_bins()) {
        const double chi = kTwoPi * grid.bin_frequency(l) * dtau;
        auto phi = w.bin(l);
        for (int m = 0; m < geom.M; ++m) phi[static_cast<std::size_t>(m)] = std::polar(scale, chi * m);
    }
    return w;
}

BeamWeights design_null_steering(const ArrayGeometry& geom, double theta_target, std::span<const double> theta_nulls,
                                 const BinGrid& grid) {
    geom.validate();
    grid.validate();
    const std::size_t K = 1 + theta_nulls.size();
    if (K > static_cast<std::size_t>(geom.M)) {
        throw InvalidArgument("null steering needs 1 + #nulls <= M (" + std::to_string(K) + " > " +
                              std::to_string(geom.M) + ")");
    }
    std::vector<double> angles{theta_target};
    angles.insert(angles.end(), theta_nulls.begin(), theta_nulls.end());
    for (std::size_t i = 0; i < K; ++i) {
        for (std::size_t j = i + 1; j < K; ++j) {
            if (std::abs(angles[i] - angles[j]) < 1e-12) {
                throw InvalidArgument(i == 0 ? "null angle coincides with the target angle" : "duplicate null angles");
            }
        }
    }
    std::vector<double> dtau(K);
    for (std::size_t k = 0; k < K; ++k) dtau[k] = incremental_delay(geom, angles[k]);

    BeamWeights w(grid, geom.M);
    const auto M = static_cast<Eigen::Index>(geom.M);
    Eigen::MatrixXcd A(static_cast<Eigen::Index>(K), M);
    Eigen::VectorXcd target = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(K));
    target(0) = 1.0;
    for (std::size_t l : w.band_bins()) {
        const double f = grid.bin_frequency(l);
        for (std::size_t k = 0; k < K; ++k) {
            const double chi = kTwoPi * f * dtau[k];
            for (Eigen::Index m = 0; m < M; ++m) A(static_cast<Eigen::Index>(k), m) = std::polar(1.0, -chi * static_cast<double>(m));
        }
        const Eigen::MatrixXcd gram = A * A.adjoint();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(gram, Eigen::EigenvaluesOnly);
        const auto& ev = eig.eigenvalues();
        if (!(ev(0) > 1e-12 * ev(ev.size() - 1))) {
            std::ostringstream msg;
            msg << "null-steering constraints are rank deficient at bin " << l << " (f = " << f << " Hz)";
            throw SingularDesign(msg.str(), l);
        }
        const Eigen::VectorXcd phi = A.adjoint() * gram.ldlt().solve(target);
        const double norm = phi.norm();
        auto out = w.bin(l);
        for (Eigen::Index m = 0; m < M; ++m) out[static_cast<std::size_t>(m)] = phi(m) / norm;
    }
    return w;
}

cplx array_response(const BeamWeights& w, const ArrayGeometry& geom, std::size_t l, double theta) {
    const double chi = kTwoPi * w.grid().bin_frequency(l) * incremental_delay(geom, theta);
    const auto phi = w.bin(l);
    cplx acc{};
    for (int m = 0; m < w.elements(); ++m) acc += std::polar(1.0, -chi * m) * phi[static_cast<std::size_t>(m)];
    return acc;
}

RVec beam_pattern(const BeamWeights& w, const ArrayGeometry& geom, std::span<const double> theta_grid, double f) {
    const BinGrid& g = w.grid();
    const double offset = (f - g.fc) / g.bin_spacing();
    const long nearest = std::lround(offset);
    const long Ll = static_cast<long>(g.L);
    const auto l = static_cast<std::size_t>(((nearest % Ll) + Ll) % Ll);
    if (std::abs(nearest) > Ll / 2 || !g.in_band(l)) {
        std::ostringstream msg;
        msg << "beam_pattern: f = " << f << " Hz lies outside the occupied band around fc = " << g.fc << " Hz";
        throw InvalidArgument(msg.str());
    }
    RVec gains(theta_grid.size());
    for (std::size_t i = 0; i < theta_grid.size(); ++i) gains[i] = std::abs(array_response(w, geom, l, theta_grid[i]));
    return gains;
}

CVec TimeFilters::centered(int m) const {
    const CVec& src = taps.at(static_cast<std::size_t>(m));
    CVec out(L);
    const std::size_t half = L / 2;
    for (std::size_t k = 0; k < L; ++k) out[k] = src[(k + L - half) % L];
    return out;
}

TimeFilters synthesize_time_filters(const BeamWeights& w) {
    TimeFilters f;
    f.fs = w.grid().fs;
    f.L = w.bins();
    f.taps.reserve(static_cast<std::size_t>(w.elements()));
    for (int m = 0; m < w.elements(); ++m) f.taps.push_back(idft(w.element_column(m), w.bins()));
    return f;
}

std::vector<ComplexBasebandSignal> apply_transmit_beamforming(std::span<const cplx> symbols, const PulseSpec& pulse,
                                                              const TimeFilters& filters) {
    if (std::abs(filters.fs - pulse.sample_rate()) > 1e-9 * pulse.sample_rate()) {
        std::ostringstream msg;
        msg << "filter rate " << filters.fs << " Hz does not match pulse-shaped rate " << pulse.sample_rate() << " Hz";
        throw InvalidArgument(msg.str());
    }
    const ComplexBasebandSignal base = pulse_shape(symbols, pulse);
    std::vector<ComplexBasebandSignal> out;
    out.reserve(filters.taps.size());
    const std::size_t n = base.size() + filters.L - 1;
    const std::size_t nfft = fast_fft_size(n);
    CVec spectrum(nfft, cplx{});
    std::copy(base.samples().begin(), base.samples().end(), spectrum.begin());
    fft_inplace(spectrum, -1);
    const double scale = 1.0 / static_cast<double>(nfft);
    for (std::size_t m = 0; m < filters.taps.size(); ++m) {
        CVec h(nfft, cplx{});
        const CVec c = filters.centered(static_cast<int>(m));
        std::copy(c.begin(), c.end(), h.begin());
        fft_inplace(h, -1);
        for (std::size_t k = 0; k < nfft; ++k) h[k] *= spectrum[k] * scale;
        fft_inplace(h, +1);
        h.resize(n);
        out.emplace_back(std::move(h), base.sample_rate(), base.t0() - filters.group_delay());
    }
    return out;
}

}  // namespace uwbeam
