#include "uwbeam/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <string>
#include <utility>

#include "uwbeam/error.hpp"

namespace uwbeam {
namespace {

// fftw planning is not thread safe; execution on new arrays is.
class PlanCache {
public:
    ~PlanCache() {
        for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
    }

    fftw_plan get(std::size_t n, int sign) {
        std::lock_guard lock(mutex_);
        auto key = std::make_pair(n, sign);
        if (auto it = plans_.find(key); it != plans_.end()) return it->second;
        CVec scratch(n);
        auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
        fftw_plan plan = fftw_plan_dft_1d(static_cast<int>(n), buf, buf, sign == -1 ? FFTW_FORWARD : FFTW_BACKWARD,
                                          FFTW_ESTIMATE | FFTW_UNALIGNED);
        if (plan == nullptr) throw Error("fftw failed to plan a transform of size " + std::to_string(n));
        plans_.emplace(key, plan);
        return plan;
    }

private:
    std::mutex mutex_;
    std::map<std::pair<std::size_t, int>, fftw_plan> plans_;
};

PlanCache& plan_cache() {
    static PlanCache cache;
    return cache;
}

constexpr std::size_t kDirectConvolutionLimit = 64;

}  // namespace

void fft_inplace(CVec& x, int sign) {
    if (x.empty()) return;
    fftw_plan plan = plan_cache().get(x.size(), sign);
    auto* buf = reinterpret_cast<fftw_complex*>(x.data());
    fftw_execute_dft(plan, buf, buf);
}

CVec dft(std::span<const cplx> x, std::size_t L) {
    if (L == 0 || L < x.size()) {
        throw InvalidArgument("dft length " + std::to_string(L) + " is smaller than input length " +
                              std::to_string(x.size()));
    }
    CVec out(L, cplx{});
    std::copy(x.begin(), x.end(), out.begin());
    fft_inplace(out, -1);
    return out;
}

CVec idft(std::span<const cplx> X, std::size_t L) {
    if (L == 0 || L < X.size()) {
        throw InvalidArgument("idft length " + std::to_string(L) + " is smaller than input length " +
                              std::to_string(X.size()));
    }
    CVec out(L, cplx{});
    std::copy(X.begin(), X.end(), out.begin());
    fft_inplace(out, +1);
    const double scale = 1.0 / static_cast<double>(L);
    for (auto& v : out) v *= scale;
    return out;
}

std::size_t fast_fft_size(std::size_t n) {
    if (n <= 1) return 1;
    for (std::size_t m = n;; ++m) {
        std::size_t r = m;
        for (std::size_t p : {2u, 3u, 5u, 7u}) {
            while (r % p == 0) r /= p;
        }
        if (r == 1) return m;
    }
}

CVec convolve(std::span<const cplx> a, std::span<const cplx> b) {
    if (a.empty() || b.empty()) return {};
    const std::size_t out_len = a.size() + b.size() - 1;
    if (std::min(a.size(), b.size()) <= kDirectConvolutionLimit) {
        CVec out(out_len, cplx{});
        for (std::size_t i = 0; i < a.size(); ++i) {
            for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
        }
        return out;
    }
    const std::size_t n = fast_fft_size(out_len);
    CVec fa(n, cplx{}), fb(n, cplx{});
    std::copy(a.begin(), a.end(), fa.begin());
    std::copy(b.begin(), b.end(), fb.begin());
    fft_inplace(fa, -1);
    fft_inplace(fb, -1);
    for (std::size_t k = 0; k < n; ++k) fa[k] *= fb[k];
    fft_inplace(fa, +1);
    const double scale = 1.0 / static_cast<double>(n);
    fa.resize(out_len);
    for (auto& v : fa) v *= scale;
    return fa;
}

}  // namespace uwbeam
