#pragma once

#include <cstdint>
#include <random>

#include "uwbeam/signal.hpp"

namespace uwbeam {

using Rng = std::mt19937_64;

/// splitmix64 finalizer; derives independent child seeds from a master seed.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) noexcept;

/// n samples of circularly symmetric complex Gaussian noise, E|w|^2 = variance.
CVec complex_gaussian(std::size_t n, double variance, Rng& rng);

/// v + w with E|w|^2 = mean_power(v) / 10^(snr_db/10). snr_db = +inf returns v.
ComplexBasebandSignal add_awgn(const ComplexBasebandSignal& v, double snr_db, std::uint64_t seed);

}  // namespace uwbeam
