#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace uwbeam {

using cplx = std::complex<double>;
using CVec = std::vector<cplx>;
using RVec = std::vector<double>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

/// Uniformly sampled complex baseband sequence. Sample k sits at t0 + k / sample_rate.
class ComplexBasebandSignal {
public:
    ComplexBasebandSignal() = default;
    ComplexBasebandSignal(CVec samples, double sample_rate, double t0 = 0.0);

    const CVec& samples() const noexcept { return samples_; }
    CVec& mutable_samples() noexcept { return samples_; }
    std::span<const cplx> view() const noexcept { return samples_; }

    double sample_rate() const noexcept { return sample_rate_; }
    double sample_period() const noexcept { return 1.0 / sample_rate_; }
    double t0() const noexcept { return t0_; }
    void set_t0(double t0) noexcept { t0_ = t0; }

    std::size_t size() const noexcept { return samples_.size(); }
    bool empty() const noexcept { return samples_.empty(); }
    double duration() const noexcept { return static_cast<double>(samples_.size()) / sample_rate_; }
    double time_of(std::size_t k) const noexcept { return t0_ + static_cast<double>(k) / sample_rate_; }

    const cplx& operator[](std::size_t k) const { return samples_[k]; }
    cplx& operator[](std::size_t k) { return samples_[k]; }

    /// Mean of |x|^2 over all samples (0 for an empty signal).
    double mean_power() const noexcept;
    double energy() const noexcept;

    /// Throws InvalidArgument on NaN/Inf samples.
    void check_finite() const;

private:
    CVec samples_;
    double sample_rate_ = 1.0;
    double t0_ = 0.0;
};

double energy(std::span<const cplx> x) noexcept;

}  // namespace uwbeam
