#include "uwbeam/signal.hpp"

#include <cmath>
#include <string>

#include "uwbeam/error.hpp"

namespace uwbeam {

ComplexBasebandSignal::ComplexBasebandSignal(CVec samples, double sample_rate, double t0)
    : samples_(std::move(samples)), sample_rate_(sample_rate), t0_(t0) {
    if (!(sample_rate > 0.0) || !std::isfinite(sample_rate)) {
        throw InvalidArgument("sample_rate must be positive and finite, got " + std::to_string(sample_rate));
    }
    if (!std::isfinite(t0)) throw InvalidArgument("t0 must be finite");
}

double energy(std::span<const cplx> x) noexcept {
    double acc = 0.0;
    for (const auto& v : x) acc += std::norm(v);
    return acc;
}

double ComplexBasebandSignal::energy() const noexcept { return uwbeam::energy(samples_); }

double ComplexBasebandSignal::mean_power() const noexcept {
    return samples_.empty() ? 0.0 : energy() / static_cast<double>(samples_.size());
}

void ComplexBasebandSignal::check_finite() const {
    for (std::size_t k = 0; k < samples_.size(); ++k) {
        if (!std::isfinite(samples_[k].real()) || !std::isfinite(samples_[k].imag())) {
            throw InvalidArgument("non-finite sample at index " + std::to_string(k));
        }
    }
}

}  // namespace uwbeam
