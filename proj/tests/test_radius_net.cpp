#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

#include "ftn/radius_net.hpp"
#include "ftn/errors.hpp"
#include "ftn/rng.hpp"

using namespace ftn;

namespace {

NnModel zero_model(int seq_len, int w1, int w2, int fc)
{
    NnModel m = make_model(seq_len, 1, w1, w2, fc);
    for (double& x : m.w1x.a) x = 0.0;
    for (double& x : m.w1h.a) x = 0.0;
    for (double& x : m.w2x.a) x = 0.0;
    for (double& x : m.w2h.a) x = 0.0;
    for (double& x : m.w3.a) x = 0.0;
    for (double& x : m.w4) x = 0.0;
    return m;
}

// width-1 everywhere with unit weights: the recurrences become plain
// relu-gated running sums that are easy to chase by hand
NnModel unit_chain(int seq_len)
{
    NnModel m = zero_model(seq_len, 1, 1, 1);
    m.w1x(0, 0) = 1.0;
    m.w1h(0, 0) = 1.0;
    m.w2x(0, 0) = 1.0;
    m.w2h(0, 0) = 1.0;
    m.w3(0, 0) = 1.0;
    m.w4[0] = 1.0;
    return m;
}

TrainingSet random_set(std::size_t n, int seq_len, std::uint64_t seed, double radius)
{
    auto gen = make_rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    TrainingSet set;
    for (std::size_t i = 0; i < n; ++i) {
        TrainingSample s;
        s.y.resize(static_cast<std::size_t>(seq_len));
        for (double& x : s.y)
            x = gauss(gen);
        s.radius = radius;
        set.push_back(s);
    }
    return set;
}

// visit every parameter of a model as (reference, matching gradient value)
template <typename Fn>
void for_each_param(NnModel& m, ParamBuffers& g, Fn fn)
{
    for (std::size_t i = 0; i < m.w1x.a.size(); ++i) fn(m.w1x.a[i], g.w1x.a[i]);
    for (std::size_t i = 0; i < m.w1h.a.size(); ++i) fn(m.w1h.a[i], g.w1h.a[i]);
    for (std::size_t i = 0; i < m.b1.size(); ++i) fn(m.b1[i], g.b1[i]);
    for (std::size_t i = 0; i < m.w2x.a.size(); ++i) fn(m.w2x.a[i], g.w2x.a[i]);
    for (std::size_t i = 0; i < m.w2h.a.size(); ++i) fn(m.w2h.a[i], g.w2h.a[i]);
    for (std::size_t i = 0; i < m.b2.size(); ++i) fn(m.b2[i], g.b2[i]);
    for (std::size_t i = 0; i < m.w3.a.size(); ++i) fn(m.w3.a[i], g.w3.a[i]);
    for (std::size_t i = 0; i < m.b3.size(); ++i) fn(m.b3[i], g.b3[i]);
    for (std::size_t i = 0; i < m.w4.size(); ++i) fn(m.w4[i], g.w4[i]);
    fn(m.b4, g.b4);
}

bool buffers_equal(const ParamBuffers& a, const ParamBuffers& b)
{
    return a.w1x.a == b.w1x.a && a.w1h.a == b.w1h.a && a.b1 == b.b1 && a.w2x.a == b.w2x.a &&
           a.w2h.a == b.w2h.a && a.b2 == b.b2 && a.w3.a == b.w3.a && a.b3 == b.b3 &&
           a.w4 == b.w4 && a.b4 == b.b4;
}

} // namespace

TEST_SUITE("radius_net") {

TEST_CASE("forward of the zero model is the output bias")
{
    NnModel m = zero_model(5, 4, 4, 3);
    CHECK(forward(m, {1.0, -2.0, 3.0, 0.5, 0.1}) == 0.0);
    m.b4 = 2.5;
    CHECK(forward(m, {9.0, -9.0, 9.0, -9.0, 9.0}) == 2.5);
    CHECK(forward(m, Vec(5, 0.0)) == 2.5);
}

TEST_CASE("bottleneck bias feeds the head directly")
{
    NnModel m = zero_model(3, 4, 4, 5);
    for (double& b : m.b3) b = 1.0;
    for (double& w : m.w4) w = 1.0;
    m.b4 = -0.25;
    // every bottleneck unit outputs relu(1) = 1; head sums five of them
    CHECK(forward(m, {0.3, -0.7, 2.0}) == doctest::Approx(5.0 - 0.25).epsilon(1e-15));
}

TEST_CASE("unit chain follows the hand-computed running sums")
{
    const NnModel m = unit_chain(3);
    // all inputs positive: h1 = 1,2,3; h2 = 1,3,6
    CHECK(forward(m, {1.0, 1.0, 1.0}) == doctest::Approx(6.0).epsilon(1e-15));
    // negative middle input: h1 = 1, relu(-2+1)=0, 3; h2 = 1, relu(0+1)=1, 4
    CHECK(forward(m, {1.0, -2.0, 3.0}) == doctest::Approx(4.0).epsilon(1e-15));
}

TEST_CASE("forward validates the observation length")
{
    const NnModel m = zero_model(4, 2, 2, 2);
    CHECK_THROWS_AS(forward(m, Vec(3, 0.0)), std::invalid_argument);
    CHECK_THROWS_AS(forward(m, Vec(5, 0.0)), std::invalid_argument);
}

TEST_CASE("forward flop count matches the layer arithmetic")
{
    const NnModel small = make_model(5, 3, 4, 4, 3);
    // per step: (2*4*1 + 2*4*4 + 2*4) + (2*4*4 + 2*4*4 + 2*4) = 48 + 72
    // tail: (2*3*4 + 3) + (2*3 + 1) = 27 + 7
    CHECK(forward_flop_count(small) == 5 * 120 + 34);

    const NnModel big = make_model(44, 3); // default widths 128/128/64
    CHECK(forward_flop_count(big) == 4375745);
}

TEST_CASE("model initialization is seeded and bounded")
{
    const NnModel a = make_model(6, 42, 8, 8, 4);
    const NnModel b = make_model(6, 42, 8, 8, 4);
    const NnModel c = make_model(6, 43, 8, 8, 4);
    CHECK(a.w1x.a == b.w1x.a);
    CHECK(a.w1h.a == b.w1h.a);
    CHECK(a.w2x.a == b.w2x.a);
    CHECK(a.w2h.a == b.w2h.a);
    CHECK(a.w3.a == b.w3.a);
    CHECK(a.w4 == b.w4);
    CHECK(a.w1x.a != c.w1x.a);

    // biases start at zero
    for (double v : a.b1) CHECK(v == 0.0);
    for (double v : a.b2) CHECK(v == 0.0);
    for (double v : a.b3) CHECK(v == 0.0);
    CHECK(a.b4 == 0.0);

    // uniform bounds sqrt(6 / (fan_in + fan_out)) per weight block
    auto within = [](const std::vector<double>& w, double bound) {
        bool nonzero = false;
        for (double v : w) {
            if (std::fabs(v) > bound)
                return false;
            nonzero = nonzero || v != 0.0;
        }
        return nonzero;
    };
    CHECK(within(a.w1x.a, std::sqrt(6.0 / (1 + 8))));
    CHECK(within(a.w1h.a, std::sqrt(6.0 / (8 + 8))));
    CHECK(within(a.w2x.a, std::sqrt(6.0 / (8 + 8))));
    CHECK(within(a.w2h.a, std::sqrt(6.0 / (8 + 8))));
    CHECK(within(a.w3.a, std::sqrt(6.0 / (8 + 4))));
    CHECK(within(a.w4, std::sqrt(6.0 / (4 + 1))));
}

TEST_CASE("mse loss averages squared radius errors")
{
    NnModel m = zero_model(2, 2, 2, 2); // predicts 0
    TrainingSet set;
    set.push_back({{0.1, 0.2}, 2.0});
    set.push_back({{0.3, 0.4}, 4.0});
    CHECK(mse_loss(m, set) == doctest::Approx(10.0).epsilon(1e-15)); // (4 + 16) / 2
    CHECK_THROWS_AS(mse_loss(m, TrainingSet{}), std::invalid_argument);
}

TEST_CASE("backward matches central finite differences")
{
    NnModel m = make_model(4, 77, 4, 4, 3);
    auto gen = make_rng(5);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Vec y(4);
    for (double& x : y)
        x = gauss(gen);
    const double target = 1.3;

    ParamBuffers grads = ParamBuffers::zeros_like(m);
    const double sq = backward(m, y, target, grads);
    const double pred = forward(m, y);
    CHECK(sq == doctest::Approx((pred - target) * (pred - target)).epsilon(1e-12));

    const double h = 1e-5;
    int checked = 0;
    for_each_param(m, grads, [&](double& p, double& g) {
        const double keep = p;
        p = keep + h;
        const double up = forward(m, y) - target;
        p = keep - h;
        const double dn = forward(m, y) - target;
        p = keep;
        const double fd = (up * up - dn * dn) / (2.0 * h);
        CHECK(std::fabs(g - fd) <= 1e-6 + 1e-4 * std::max(std::fabs(g), std::fabs(fd)));
        ++checked;
    });
    CHECK(checked == static_cast<int>(m.w1x.a.size() + m.w1h.a.size() + m.b1.size() +
                                      m.w2x.a.size() + m.w2h.a.size() + m.b2.size() +
                                      m.w3.a.size() + m.b3.size() + m.w4.size() + 1));
}

TEST_CASE("adam leaves the model alone on a zero gradient")
{
    NnModel m = make_model(3, 11, 3, 3, 2);
    const NnModel before = m;
    AdamState state = AdamState::zeros_like(m);
    const ParamBuffers zeros = ParamBuffers::zeros_like(m);
    adam_step(m, zeros, state, AdamConfig{});
    CHECK(m.w1x.a == before.w1x.a);
    CHECK(m.w1h.a == before.w1h.a);
    CHECK(m.w2x.a == before.w2x.a);
    CHECK(m.w2h.a == before.w2h.a);
    CHECK(m.w3.a == before.w3.a);
    CHECK(m.w4 == before.w4);
    CHECK(m.b4 == before.b4);
    CHECK(state.t == 1);
}

TEST_CASE("first adam step is a signed normalized update")
{
    NnModel m = zero_model(2, 2, 2, 2);
    AdamState state = AdamState::zeros_like(m);
    ParamBuffers g = ParamBuffers::zeros_like(m);
    g.b4 = 3.0;
    g.w4[0] = -0.5;
    AdamConfig cfg;
    cfg.learning_rate = 0.01;
    adam_step(m, g, state, cfg);
    // t=1: mhat = g, vhat = g^2, step = -lr * g / (|g| + eps)
    CHECK(m.b4 == doctest::Approx(-0.01 * 3.0 / (3.0 + 1e-8)).epsilon(1e-12));
    CHECK(m.w4[0] == doctest::Approx(0.01 * 0.5 / (0.5 + 1e-8)).epsilon(1e-12));
    CHECK(m.w4[1] == 0.0); // untouched where the gradient is zero
}

TEST_CASE("batch gradient is thread-count invariant")
{
    const NnModel m = make_model(6, 21, 6, 6, 4);
    const TrainingSet set = random_set(23, 6, 99, 2.0);
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < set.size(); ++i)
        idx.push_back(i);

    double l1 = 0.0, l5 = 0.0;
    const ParamBuffers g1 = batch_gradient(m, set, idx, 1, &l1);
    const ParamBuffers g5 = batch_gradient(m, set, idx, 5, &l5);
    CHECK(buffers_equal(g1, g5));
    CHECK(l1 == l5);

    CHECK_THROWS_AS(batch_gradient(m, set, {}, 1), std::invalid_argument);
    CHECK_THROWS_AS(batch_gradient(m, set, {set.size()}, 1), std::invalid_argument);
}

TEST_CASE("mini-batch losses recombine into the full loss")
{
    const NnModel m = make_model(5, 31, 5, 5, 3);
    const TrainingSet set = random_set(17, 5, 123, 1.5);
    const double full = mse_loss(m, set);

    double acc = 0.0;
    for (std::size_t start = 0; start < set.size(); start += 3) {
        std::vector<std::size_t> idx;
        for (std::size_t i = start; i < std::min(set.size(), start + 3); ++i)
            idx.push_back(i);
        double part = 0.0;
        batch_gradient(m, set, idx, 2, &part);
        acc += part * static_cast<double>(idx.size());
    }
    CHECK(acc / static_cast<double>(set.size()) == doctest::Approx(full).epsilon(1e-12));
}

TEST_CASE("zero learning rate trains flat and stops on patience")
{
    const TrainingSet set = random_set(30, 6, 7, 2.0);
    TrainingConfig cfg;
    cfg.adam.learning_rate = 0.0;
    cfg.batch_size = 8;
    cfg.max_epochs = 50;
    cfg.patience = 10;
    cfg.seed = 9;
    cfg.rnn1_width = 6;
    cfg.rnn2_width = 6;
    cfg.fc_width = 4;
    const TrainResult res = train(set, 6, cfg);

    REQUIRE(res.trace.size() == 11); // epoch 0 plus patience epochs without improvement
    for (const auto& st : res.trace)
        CHECK(st.holdout_mse == res.trace[0].holdout_mse);
    CHECK(res.best_epoch == 0);
    CHECK(res.best_holdout_mse == res.trace[0].holdout_mse);

    // the returned model is the untouched initial model
    const NnModel fresh = make_model(6, derive_seed(9, 1), 6, 6, 4);
    for (const auto& s : set)
        CHECK(forward(res.model, s.y) == forward(fresh, s.y));
}

TEST_CASE("training rejects malformed inputs")
{
    const TrainingSet set = random_set(10, 4, 3, 1.0);
    TrainingConfig cfg;
    cfg.rnn1_width = 4;
    cfg.rnn2_width = 4;
    cfg.fc_width = 3;
    CHECK_THROWS_AS(train(TrainingSet{}, 4, cfg), std::invalid_argument);
    CHECK_THROWS_AS(train(set, 5, cfg), std::invalid_argument); // length mismatch
    TrainingConfig bad = cfg;
    bad.batch_size = 0;
    CHECK_THROWS_AS(train(set, 4, bad), std::invalid_argument);
    bad = cfg;
    bad.holdout_fraction = 1.0;
    CHECK_THROWS_AS(train(set, 4, bad), std::invalid_argument);
}

TEST_CASE("non-finite targets abort training with the epoch attached")
{
    TrainingSet set = random_set(20, 4, 13, 1.0);
    set[4].radius = std::numeric_limits<double>::quiet_NaN();
    TrainingConfig cfg;
    cfg.rnn1_width = 4;
    cfg.rnn2_width = 4;
    cfg.fc_width = 3;
    try {
        train(set, 4, cfg);
        FAIL("expected NonFiniteLoss");
    } catch (const NonFiniteLoss& e) {
        CHECK(e.epoch == 0); // detected on the untrained-model evaluation
    }
}

TEST_CASE("training learns a norm-like target")
{
    // targets: euclidean norm of the observation, the shape the radius
    // predictor faces in the pipeline
    auto gen = make_rng(2718);
    std::normal_distribution<double> gauss(0.0, 1.0);
    TrainingSet set;
    for (int i = 0; i < 300; ++i) {
        TrainingSample s;
        s.y.resize(8);
        double acc = 0.0;
        for (double& x : s.y) {
            x = gauss(gen);
            acc += x * x;
        }
        s.radius = std::sqrt(acc);
        set.push_back(s);
    }

    TrainingConfig cfg;
    cfg.adam.learning_rate = 1e-3;
    cfg.batch_size = 20;
    cfg.max_epochs = 200;
    cfg.patience = 200; // run the full budget
    cfg.seed = 4;
    cfg.num_threads = 2;
    cfg.rnn1_width = 16;
    cfg.rnn2_width = 16;
    cfg.fc_width = 8;
    const TrainResult res = train(set, 8, cfg);

    REQUIRE(res.trace.size() >= 2);
    CHECK(res.best_epoch > 0);
    CHECK(res.best_holdout_mse < 0.1 * res.trace[0].holdout_mse);
    // the best snapshot reproduces its recorded holdout score: epoch-ordered
    // trace entry best_epoch was measured on exactly this model
    CHECK(res.trace[static_cast<std::size_t>(res.best_epoch)].holdout_mse ==
          doctest::Approx(res.best_holdout_mse));
}

TEST_CASE("radius statistics and the derived growth step")
{
    const RadiusStats s = radius_stats({1.0, 2.0, 3.0, 4.0}, 4);
    CHECK(s.mean == doctest::Approx(2.5));
    CHECK(s.stddev == doctest::Approx(std::sqrt(5.0 / 3.0)));
    CHECK(s.min == 1.0);
    CHECK(s.max == 4.0);
    REQUIRE(s.histogram.size() == 4);
    std::uint64_t total = 0;
    for (std::uint64_t c : s.histogram)
        total += c;
    CHECK(total == 4);
    CHECK(s.histogram[0] == 1);
    CHECK(s.histogram[3] == 1); // max lands in the last bin

    const RadiusStats flat = radius_stats({2.0, 2.0, 2.0}, 5);
    CHECK(flat.stddev == 0.0);
    CHECK(flat.histogram[0] == 3); // zero span collapses to the first bin

    CHECK_THROWS_AS(radius_stats({}, 4), std::invalid_argument);
    CHECK_THROWS_AS(radius_stats({1.0}, 0), std::invalid_argument);

    CHECK(estimate_delta_d(radius_stats({1.0, 3.0}, 2)) == doctest::Approx(std::sqrt(2.0)));
    CHECK(estimate_delta_d(flat) == doctest::Approx(0.002)); // floored at 1e-3 * mean
}

} // TEST_SUITE
