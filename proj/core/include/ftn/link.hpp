// Discrete link model: antipodal bit mapping, the tall banded convolution
// matrix of the tap expansion, Eb/N0-to-noise conversion, and the noisy
// observation y = H a + w.
#pragma once

#include <cstdint>
#include <vector>

#include "ftn/mat.hpp"

namespace ftn {

// Map bits {0,1} to symbols {-sqrt(eb), +sqrt(eb)}.
Vec map_bits(const std::vector<int>& bits, double eb);

// Inverse of map_bits by sign.
std::vector<int> demap_symbols(const Vec& symbols);

// Tall (N+L-1) x N convolution (Toeplitz) matrix from L taps: column j holds
// the taps shifted down by j, so H a is the full convolution of a with taps.
Mat build_isi_matrix(const std::vector<double>& taps, int block_len);

// Noise description. sigma_sq is the per-sample variance of the real AWGN
// after the orthonormal matched filter bank.
struct NoiseSpec {
    double sigma_sq = 0.0;
    double ebn0_db = 0.0;
    double code_rate = 1.0;
};

// sigma^2 = (eb / code_rate) / (2 * 10^(ebn0_db/10)). The code-rate division
// keeps Eb referenced to information bits when the block carries coded bits.
NoiseSpec ebn0_to_sigma(double ebn0_db, double eb, double code_rate);

// y = H a + w with w ~ N(0, sigma_sq I), generated deterministically from the
// seed (fresh generator per call, so identical seeds give identical noise).
Vec transmit(const Mat& h, const Vec& symbols, const NoiseSpec& noise, std::uint64_t seed);

} // namespace ftn
