#include "doctest.h"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "ftn/link.hpp"
#include "ftn/rng.hpp"

using namespace ftn;

TEST_SUITE("link") {

TEST_CASE("bit mapping is antipodal")
{
    const Vec s = map_bits({0, 1, 1}, 1.0);
    REQUIRE(s.size() == 3);
    CHECK(s[0] == doctest::Approx(-1.0));
    CHECK(s[1] == doctest::Approx(1.0));
    CHECK(s[2] == doctest::Approx(1.0));

    const Vec t = map_bits(std::vector<int>(6, 1), 4.0);
    for (double x : t)
        CHECK(x == doctest::Approx(2.0)); // sqrt(Eb) with Eb = 4

    CHECK_THROWS_AS(map_bits({0, 2}, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(map_bits({0, 1}, 0.0), std::domain_error);
    CHECK_THROWS_AS(map_bits({0, 1}, -1.0), std::domain_error);
}

TEST_CASE("demap inverts map")
{
    const std::vector<int> bits{1, 0, 0, 1, 1, 0};
    CHECK(demap_symbols(map_bits(bits, 2.7)) == bits);
}

TEST_CASE("isi matrix small cases")
{
    const Mat i3 = build_isi_matrix({1.0}, 3);
    REQUIRE(i3.rows == 3);
    REQUIRE(i3.cols == 3);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j)
            CHECK(i3(i, j) == doctest::Approx(i == j ? 1.0 : 0.0));

    const Mat m = build_isi_matrix({1.0, 0.5}, 2);
    REQUIRE(m.rows == 3);
    REQUIRE(m.cols == 2);
    CHECK(m(0, 0) == doctest::Approx(1.0));
    CHECK(m(0, 1) == doctest::Approx(0.0));
    CHECK(m(1, 0) == doctest::Approx(0.5));
    CHECK(m(1, 1) == doctest::Approx(1.0));
    CHECK(m(2, 0) == doctest::Approx(0.0));
    CHECK(m(2, 1) == doctest::Approx(0.5));
}

TEST_CASE("isi matrix times symbols is the full convolution")
{
    const std::vector<double> taps{0.9, -0.4, 0.22, 0.05};
    const int n = 6;
    const Mat h = build_isi_matrix(taps, n);
    REQUIRE(h.rows == static_cast<std::size_t>(n + 3));
    REQUIRE(h.cols == static_cast<std::size_t>(n));

    auto gen = make_rng(77);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Vec a(static_cast<std::size_t>(n));
    for (double& x : a)
        x = dist(gen);

    const Vec ha = matvec(h, a);
    for (std::size_t m = 0; m < ha.size(); ++m) {
        double conv = 0.0;
        for (std::size_t k = 0; k < taps.size(); ++k) {
            const std::ptrdiff_t j = static_cast<std::ptrdiff_t>(m) - static_cast<std::ptrdiff_t>(k);
            if (j >= 0 && j < n)
                conv += taps[k] * a[static_cast<std::size_t>(j)];
        }
        CHECK(ha[m] == doctest::Approx(conv).epsilon(1e-12));
    }

    CHECK_THROWS_AS(build_isi_matrix({}, 3), std::invalid_argument);
    CHECK_THROWS_AS(build_isi_matrix({1.0}, 0), std::invalid_argument);
}

TEST_CASE("noise variance mapping")
{
    CHECK(ebn0_to_sigma(0.0, 1.0, 1.0).sigma_sq == doctest::Approx(0.5).epsilon(1e-12));
    // 3.0103 dB is a factor of 2 in linear scale
    CHECK(ebn0_to_sigma(3.0103, 1.0, 1.0).sigma_sq == doctest::Approx(0.25).epsilon(1e-4));
    // halving the code rate doubles the per-coded-bit noise budget
    CHECK(ebn0_to_sigma(0.0, 1.0, 0.5).sigma_sq == doctest::Approx(1.0).epsilon(1e-12));
    const NoiseSpec ns = ebn0_to_sigma(8.0, 1.0, 0.5);
    CHECK(ns.ebn0_db == doctest::Approx(8.0));
    CHECK(ns.code_rate == doctest::Approx(0.5));

    CHECK_THROWS_AS(ebn0_to_sigma(0.0, 0.0, 1.0), std::domain_error);
    CHECK_THROWS_AS(ebn0_to_sigma(0.0, -1.0, 1.0), std::domain_error);
    CHECK_THROWS_AS(ebn0_to_sigma(0.0, 1.0, 0.0), std::domain_error);
    CHECK_THROWS_AS(ebn0_to_sigma(0.0, 1.0, 1.5), std::domain_error);
}

TEST_CASE("near-noiseless transmit returns H a")
{
    const std::vector<double> taps{1.0, 0.4, -0.1};
    const Mat h = build_isi_matrix(taps, 8);
    const Vec a = map_bits({1, 0, 1, 1, 0, 0, 1, 0}, 1.0);
    const Vec ha = matvec(h, a);
    NoiseSpec ns;
    ns.sigma_sq = 1e-24; // sigma = 1e-12
    const Vec y = transmit(h, a, ns, 5);
    REQUIRE(y.size() == ha.size());
    for (std::size_t i = 0; i < y.size(); ++i)
        CHECK(std::fabs(y[i] - ha[i]) < 1e-9);
}

TEST_CASE("noise statistics: variance, mean, whiteness")
{
    // identity channel isolates the noise: w = y - a
    const Mat h = build_isi_matrix({1.0}, 25);
    const Vec a = map_bits(std::vector<int>(25, 1), 1.0);
    NoiseSpec ns;
    ns.sigma_sq = 1.0;

    std::vector<double> w;
    w.reserve(100000);
    for (int rep = 0; rep < 4000; ++rep) {
        const Vec y = transmit(h, a, ns, derive_seed(999, static_cast<std::uint64_t>(rep)));
        for (std::size_t i = 0; i < y.size(); ++i)
            w.push_back(y[i] - a[i]);
    }
    REQUIRE(w.size() == 100000);

    double m1 = 0.0, m2 = 0.0, lag1 = 0.0;
    for (double x : w) {
        m1 += x;
        m2 += x * x;
    }
    m1 /= static_cast<double>(w.size());
    m2 /= static_cast<double>(w.size());
    for (std::size_t i = 0; i + 1 < w.size(); ++i)
        lag1 += w[i] * w[i + 1];
    lag1 /= static_cast<double>(w.size() - 1);

    CHECK(std::fabs(m1) < 0.01);                       // ~3 sigma of the mean estimate
    CHECK(m2 - m1 * m1 == doctest::Approx(1.0).epsilon(0.03)); // within 3 %
    CHECK(std::fabs(lag1) < 0.02 * ns.sigma_sq);       // white across samples
}

TEST_CASE("transmit is deterministic per seed and linear without noise")
{
    const Mat h = build_isi_matrix({1.0, 0.3}, 6);
    const Vec a = map_bits({1, 1, 0, 1, 0, 0}, 1.0);
    const Vec b = map_bits({0, 1, 1, 0, 0, 1}, 1.0);
    NoiseSpec noisy;
    noisy.sigma_sq = 0.5;

    const Vec y1 = transmit(h, a, noisy, 42);
    const Vec y2 = transmit(h, a, noisy, 42);
    const Vec y3 = transmit(h, a, noisy, 43);
    CHECK(y1 == y2);
    double diff = 0.0;
    for (std::size_t i = 0; i < y1.size(); ++i)
        diff += std::fabs(y1[i] - y3[i]);
    CHECK(diff > 1e-6); // a different seed draws different noise

    NoiseSpec clean; // sigma_sq = 0
    Vec ab(a.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        ab[i] = a[i] + b[i];
    const Vec ya = transmit(h, a, clean, 1);
    const Vec yb = transmit(h, b, clean, 1);
    const Vec yab = transmit(h, ab, clean, 1);
    for (std::size_t i = 0; i < ya.size(); ++i)
        CHECK(yab[i] == doctest::Approx(ya[i] + yb[i]).epsilon(1e-12));
}

} // TEST_SUITE
