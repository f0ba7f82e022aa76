#pragma once

#include <cstdint>
#include <vector>

#include "uwbeam/signal.hpp"

namespace uwbeam {

/// Maximal-length LFSR description. `taps` are the nonzero exponents of the
/// feedback polynomial except the constant term, e.g. x^3 + x + 1 -> {3, 1}.
/// Bit i of `initial_state` is register cell i.
struct MSequenceSpec {
    int degree = 0;
    std::vector<int> taps;
    std::uint64_t initial_state = 1;
};

/// Spec with the default primitive polynomial for `degree` (2..16) and fill 1.
MSequenceSpec default_mseq_spec(int degree);

/// A second primitive polynomial of the same degree, for co-channel preambles
/// with low cross-correlation. Available for degrees 7, 11 and 12.
MSequenceSpec alternate_mseq_spec(int degree);

/// +-1 sequence of length 2^degree - 1 (0 -> +1, 1 -> -1).
/// Throws InvalidArgument on a zero fill or malformed taps and
/// InvalidPolynomial if the register period is not maximal.
RVec generate_mseq(const MSequenceSpec& spec);

/// generate_mseq as BPSK symbols.
CVec mseq_symbols(const MSequenceSpec& spec);

/// sum_n x[n] x[(n + lag) mod N]
double periodic_autocorrelation(const RVec& x, std::size_t lag);

}  // namespace uwbeam
