// Microbenchmarks for the hot paths: pulse evaluation, tap expansion, QR,
// sphere search at a typical operating point, the radius predictor forward
// pass, soft-decision decoding, and the exhaustive LLR reference.
#include <benchmark/benchmark.h>

#include <cmath>
#include <random>
#include <vector>

#include "ftn/detector.hpp"
#include "ftn/fec.hpp"
#include "ftn/link.hpp"
#include "ftn/pulse.hpp"
#include "ftn/radius_net.hpp"
#include "ftn/rng.hpp"

namespace {

using namespace ftn;

const PulseSpec kSignal{0.35, 1.0};

void BM_RrcValue(benchmark::State& state)
{
    double t = 0.0;
    double acc = 0.0;
    for (auto _ : state) {
        acc += rrc_value(kSignal, t);
        t += 0.01;
        if (t > 5.0)
            t = -5.0;
    }
    benchmark::DoNotOptimize(acc);
}
BENCHMARK(BM_RrcValue);

void BM_BasisCoefficients(benchmark::State& state)
{
    const PulseSpec basis{0.12, 0.6};
    for (auto _ : state) {
        const BasisExpansion exp = basis_coefficients(kSignal, basis, 0.6, 20, false);
        benchmark::DoNotOptimize(exp.coefficients.data());
    }
}
BENCHMARK(BM_BasisCoefficients);

struct LinkFixture {
    Mat h;
    Vec y;
    NoiseSpec noise;

    LinkFixture()
    {
        const PulseSpec basis{0.12, 0.6};
        const BasisExpansion exp = basis_coefficients(kSignal, basis, 0.6, 20, false);
        h = build_isi_matrix(exp.coefficients, 25);
        noise = ebn0_to_sigma(8.0, 1.0, 1.0);
        auto gen = make_rng(17);
        std::vector<int> bits(25);
        for (int& b : bits)
            b = static_cast<int>(gen() & 1u);
        y = transmit(h, map_bits(bits, 1.0), noise, 99);
    }
};

const LinkFixture& link_fixture()
{
    static const LinkFixture f;
    return f;
}

void BM_QrFactorize(benchmark::State& state)
{
    const LinkFixture& f = link_fixture();
    for (auto _ : state) {
        const QrFactors qr = qr_factorize(f.h);
        benchmark::DoNotOptimize(qr.r.a.data());
    }
}
BENCHMARK(BM_QrFactorize);

void BM_ListSphereSearch(benchmark::State& state)
{
    const LinkFixture& f = link_fixture();
    const QrFactors qr = qr_factorize(f.h);
    const SphereProblem p = make_sphere_problem(qr, f.y, 1.0);
    const double d0 = initial_radius_noise(f.noise.sigma_sq,
                                           static_cast<int>(p.z.size()), 0.01);
    for (auto _ : state) {
        FlopCounter fc;
        const CandidateList list = list_sphere_search(p, d0, 32, fc);
        benchmark::DoNotOptimize(list.entries.data());
    }
}
BENCHMARK(BM_ListSphereSearch);

void BM_RadiusNetForward(benchmark::State& state)
{
    const NnModel model = make_model(44, 5); // default widths
    const LinkFixture& f = link_fixture();
    for (auto _ : state) {
        const double r = forward(model, f.y);
        benchmark::DoNotOptimize(r);
    }
}
BENCHMARK(BM_RadiusNetForward);

void BM_ViterbiDecode(benchmark::State& state)
{
    const ConvCode code;
    auto gen = make_rng(3);
    std::vector<int> info(244);
    for (int& b : info)
        b = static_cast<int>(gen() & 1u);
    const std::vector<int> coded = conv_encode(code, info);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Vec llr(coded.size());
    for (std::size_t i = 0; i < coded.size(); ++i)
        llr[i] = (coded[i] ? 4.0 : -4.0) + gauss(gen);
    for (auto _ : state) {
        const std::vector<int> decoded = viterbi_decode_soft(code, llr);
        benchmark::DoNotOptimize(decoded.data());
    }
}
BENCHMARK(BM_ViterbiDecode);

void BM_ExactLlr(benchmark::State& state)
{
    const Mat h = build_isi_matrix({1.0, 0.6, -0.2}, 8);
    auto gen = make_rng(7);
    std::vector<int> bits(8);
    for (int& b : bits)
        b = static_cast<int>(gen() & 1u);
    NoiseSpec noise = ebn0_to_sigma(6.0, 1.0, 1.0);
    const Vec y = transmit(h, map_bits(bits, 1.0), noise, 11);
    for (auto _ : state) {
        const LlrVector llr = exact_llr(y, h, noise.sigma_sq, {}, 1.0);
        benchmark::DoNotOptimize(llr.values.data());
    }
}
BENCHMARK(BM_ExactLlr);

} // namespace

BENCHMARK_MAIN();
