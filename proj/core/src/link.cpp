#include "ftn/link.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "ftn/rng.hpp"

namespace ftn {

Vec map_bits(const std::vector<int>& bits, double eb)
{
    if (!(eb > 0.0) || !std::isfinite(eb))
        throw std::domain_error("map_bits: eb must be positive");
    const double amp = std::sqrt(eb);
    Vec s(bits.size());
    for (std::size_t i = 0; i < bits.size(); ++i) {
        if (bits[i] != 0 && bits[i] != 1)
            throw std::invalid_argument("map_bits: bits must be 0 or 1");
        s[i] = bits[i] ? amp : -amp;
    }
    return s;
}

std::vector<int> demap_symbols(const Vec& symbols)
{
    std::vector<int> b(symbols.size());
    for (std::size_t i = 0; i < symbols.size(); ++i)
        b[i] = symbols[i] > 0.0 ? 1 : 0;
    return b;
}

Mat build_isi_matrix(const std::vector<double>& taps, int block_len)
{
    if (taps.empty())
        throw std::invalid_argument("build_isi_matrix: need at least one tap");
    if (block_len < 1)
        throw std::invalid_argument("build_isi_matrix: block_len must be >= 1");
    const std::size_t L = taps.size();
    const std::size_t N = static_cast<std::size_t>(block_len);
    Mat h(N + L - 1, N);
    for (std::size_t j = 0; j < N; ++j)
        for (std::size_t l = 0; l < L; ++l)
            h(j + l, j) = taps[l];
    return h;
}

NoiseSpec ebn0_to_sigma(double ebn0_db, double eb, double code_rate)
{
    if (!(eb > 0.0) || !std::isfinite(eb))
        throw std::domain_error("ebn0_to_sigma: eb must be positive");
    if (!(code_rate > 0.0 && code_rate <= 1.0))
        throw std::domain_error("ebn0_to_sigma: code_rate must be in (0, 1]");
    if (!std::isfinite(ebn0_db))
        throw std::domain_error("ebn0_to_sigma: ebn0_db must be finite");
    NoiseSpec n;
    n.ebn0_db = ebn0_db;
    n.code_rate = code_rate;
    n.sigma_sq = (eb / code_rate) / (2.0 * std::pow(10.0, ebn0_db / 10.0));
    return n;
}

Vec transmit(const Mat& h, const Vec& symbols, const NoiseSpec& noise, std::uint64_t seed)
{
    if (!(noise.sigma_sq >= 0.0))
        throw std::domain_error("transmit: sigma_sq must be nonnegative");
    Vec y = matvec(h, symbols);
    if (noise.sigma_sq > 0.0) {
        auto gen = make_rng(seed);
        std::normal_distribution<double> gauss(0.0, std::sqrt(noise.sigma_sq));
        for (double& v : y)
            v += gauss(gen);
    }
    return y;
}

} // namespace ftn
