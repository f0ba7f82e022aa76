#include "uwbeam/noise.hpp"

#include <cmath>

#include "uwbeam/error.hpp"

namespace uwbeam {

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) noexcept {
    std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

CVec complex_gaussian(std::size_t n, double variance, Rng& rng) {
    std::normal_distribution<double> normal(0.0, std::sqrt(variance / 2.0));
    CVec out(n);
    for (auto& w : out) {
        const double re = normal(rng);
        const double im = normal(rng);
        w = {re, im};
    }
    return out;
}

ComplexBasebandSignal add_awgn(const ComplexBasebandSignal& v, double snr_db, std::uint64_t seed) {
    if (std::isinf(snr_db) && snr_db > 0) return v;
    const double power = v.mean_power();
    if (!(power > 0.0) || !std::isfinite(power)) {
        throw InvalidArgument("add_awgn needs finite positive signal power unless snr_db = +inf");
    }
    Rng rng(seed);
    const CVec noise = complex_gaussian(v.size(), power / std::pow(10.0, snr_db / 10.0), rng);
    CVec out = v.samples();
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += noise[k];
    return ComplexBasebandSignal(std::move(out), v.sample_rate(), v.t0());
}

}  // namespace uwbeam
