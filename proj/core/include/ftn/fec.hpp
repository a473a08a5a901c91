// Outer code: rate-1/2 feedforward convolutional code with zero-tail
// termination, a seeded uniform random interleaver, and a soft-input Viterbi
// decoder operating on log-likelihood ratios.
#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "ftn/rng.hpp"

namespace ftn {

// Generators in octal, most significant bit = current input bit.
struct ConvCode {
    int constraint_length = 7;
    std::array<unsigned, 2> generators = {0171, 0133};
};

// Zero-tail encode: appends constraint_length-1 flush zeros, emits the two
// generator outputs interleaved per input bit. Output length 2*(K + memory).
std::vector<int> conv_encode(const ConvCode& code, const std::vector<int>& info_bits);

// Seeded uniform random permutation of positions 0..n-1.
struct Interleaver {
    std::vector<std::size_t> perm;

    static Interleaver make(std::size_t n, std::uint64_t seed)
    {
        return Interleaver{random_permutation(n, seed)};
    }
};

// out[i] = in[perm[i]]
template <typename T>
std::vector<T> interleave(const Interleaver& il, const std::vector<T>& in)
{
    std::vector<T> out(in.size());
    for (std::size_t i = 0; i < in.size(); ++i)
        out[i] = in[il.perm[i]];
    return out;
}

// Inverse mapping: out[perm[i]] = in[i]
template <typename T>
std::vector<T> deinterleave(const Interleaver& il, const std::vector<T>& in)
{
    std::vector<T> out(in.size());
    for (std::size_t i = 0; i < in.size(); ++i)
        out[il.perm[i]] = in[i];
    return out;
}

// Soft Viterbi decode of a zero-tailed codeword. llrs has one value per coded
// bit, positive meaning bit 1 is more likely; the survivor maximizes
// sum(+llr/2 for coded bit 1, -llr/2 for coded bit 0). Returns the info bits
// (tail stripped).
std::vector<int> viterbi_decode_soft(const ConvCode& code, const std::vector<double>& llrs);

} // namespace ftn
