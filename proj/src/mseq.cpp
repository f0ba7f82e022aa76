#include "uwbeam/mseq.hpp"

#include <algorithm>
#include <string>

#include "uwbeam/error.hpp"

namespace uwbeam {

MSequenceSpec default_mseq_spec(int degree) {
    static const std::vector<std::vector<int>> table = {
        {},               {},          {2, 1},        {3, 1},       {4, 1},       {5, 2},
        {6, 1},           {7, 3},      {8, 4, 3, 2},  {9, 4},       {10, 3},      {11, 2},
        {12, 6, 4, 1},    {13, 4, 3, 1}, {14, 10, 6, 1}, {15, 1},   {16, 12, 3, 1},
    };
    if (degree < 2 || degree >= static_cast<int>(table.size())) {
        throw InvalidArgument("no default primitive polynomial for degree " + std::to_string(degree));
    }
    return MSequenceSpec{degree, table[static_cast<std::size_t>(degree)], 1};
}

MSequenceSpec alternate_mseq_spec(int degree) {
    switch (degree) {
        case 7: return MSequenceSpec{7, {7, 1}, 1};
        case 11: return MSequenceSpec{11, {11, 8, 5, 2}, 1};
        case 12: return MSequenceSpec{12, {12, 11, 10, 4}, 1};
        default: throw InvalidArgument("no alternate primitive polynomial for degree " + std::to_string(degree));
    }
}

RVec generate_mseq(const MSequenceSpec& spec) {
    const int k = spec.degree;
    if (k < 2 || k > 30) throw InvalidArgument("m-sequence degree must be in [2, 30], got " + std::to_string(k));
    if (std::find(spec.taps.begin(), spec.taps.end(), k) == spec.taps.end()) {
        throw InvalidArgument("taps must include the polynomial degree " + std::to_string(k));
    }
    for (int t : spec.taps) {
        if (t < 1 || t > k) throw InvalidArgument("tap exponent " + std::to_string(t) + " out of range");
    }
    const std::uint64_t mask = (std::uint64_t{1} << k) - 1;
    const std::uint64_t start = spec.initial_state & mask;
    if (start == 0) throw InvalidArgument("m-sequence initial state must be nonzero");

    // s[n+k] = s[n] xor sum_{t in taps, t < k} s[n+t]; cell i holds s[n+i].
    std::uint64_t feedback_mask = 1;
    for (int t : spec.taps) {
        if (t < k) feedback_mask |= std::uint64_t{1} << t;
    }
    const std::size_t period = static_cast<std::size_t>(mask);
    RVec out(period);
    std::uint64_t state = start;
    for (std::size_t n = 0; n < period; ++n) {
        out[n] = (state & 1u) ? -1.0 : 1.0;
        const std::uint64_t fb = static_cast<std::uint64_t>(__builtin_parityll(state & feedback_mask));
        state = (state >> 1) | (fb << (k - 1));
        if (state == start && n + 1 < period) {
            throw InvalidPolynomial("register period " + std::to_string(n + 1) + " is not maximal (" +
                                    std::to_string(period) + ") for degree " + std::to_string(k));
        }
    }
    if (state != start) throw InvalidPolynomial("register did not return to its initial state");
    return out;
}

double periodic_autocorrelation(const RVec& x, std::size_t lag) {
    const std::size_t n = x.size();
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i] * x[(i + lag) % n];
    return acc;
}

CVec mseq_symbols(const MSequenceSpec& spec) {
    const RVec x = generate_mseq(spec);
    return CVec(x.begin(), x.end());
}

}  // namespace uwbeam
