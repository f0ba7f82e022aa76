#pragma once

#include <cstddef>
#include <span>

#include "uwbeam/signal.hpp"

namespace uwbeam {

/// Forward DFT of x zero-padded to L points: X[l] = sum_n x[n] e^{-j 2 pi l n / L}.
/// Throws InvalidArgument if L < x.size() or L == 0.
CVec dft(std::span<const cplx> x, std::size_t L);

/// Inverse DFT with 1/L scaling: x[n] = (1/L) sum_l X[l] e^{+j 2 pi l n / L}.
CVec idft(std::span<const cplx> X, std::size_t L);

/// Unnormalized in-place transform. Sign -1 is forward, +1 inverse.
void fft_inplace(CVec& x, int sign);

/// Smallest n' >= n whose prime factors are all in {2, 3, 5, 7}.
std::size_t fast_fft_size(std::size_t n);

/// Full linear convolution, length a.size() + b.size() - 1.
CVec convolve(std::span<const cplx> a, std::span<const cplx> b);

}  // namespace uwbeam
