#include "ftn/radius_net.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "ftn/errors.hpp"
#include "ftn/rng.hpp"
#include "ftn/stats.hpp"

namespace ftn {

namespace {

void check_model(const NnModel& m)
{
    const std::size_t w1 = static_cast<std::size_t>(m.rnn1_width);
    const std::size_t w2 = static_cast<std::size_t>(m.rnn2_width);
    const std::size_t fc = static_cast<std::size_t>(m.fc_width);
    if (m.seq_len < 1 || m.rnn1_width < 1 || m.rnn2_width < 1 || m.fc_width < 1)
        throw std::invalid_argument("radius net: widths and seq_len must be positive");
    if (m.w1x.rows != w1 || m.w1x.cols != 1 || m.w1h.rows != w1 || m.w1h.cols != w1 ||
        m.b1.size() != w1 || m.w2x.rows != w2 || m.w2x.cols != w1 || m.w2h.rows != w2 ||
        m.w2h.cols != w2 || m.b2.size() != w2 || m.w3.rows != fc || m.w3.cols != w2 ||
        m.b3.size() != fc || m.w4.size() != fc)
        throw std::invalid_argument("radius net: weight shapes inconsistent with widths");
}

double relu(double x) { return x > 0.0 ? x : 0.0; }

struct ForwardCache {
    Mat h1; // seq_len x rnn1_width, post-activation
    Mat h2; // seq_len x rnn2_width
    Vec f;  // fc_width, post-activation
    double pred = 0.0;
};

void forward_pass(const NnModel& m, const Vec& y, ForwardCache& cache)
{
    const int seq = m.seq_len;
    const int w1 = m.rnn1_width;
    const int w2 = m.rnn2_width;
    const int fc = m.fc_width;
    if (static_cast<int>(y.size()) != seq)
        throw std::invalid_argument("radius net: observation length must equal seq_len");

    cache.h1 = Mat(static_cast<std::size_t>(seq), static_cast<std::size_t>(w1));
    cache.h2 = Mat(static_cast<std::size_t>(seq), static_cast<std::size_t>(w2));
    for (int t = 0; t < seq; ++t) {
        const double x = y[static_cast<std::size_t>(t)];
        const double* h1_prev = t > 0 ? cache.h1.row(static_cast<std::size_t>(t - 1)) : nullptr;
        double* h1_now = cache.h1.row(static_cast<std::size_t>(t));
        for (int j = 0; j < w1; ++j) {
            double acc = m.b1[static_cast<std::size_t>(j)] +
                         m.w1x(static_cast<std::size_t>(j), 0) * x;
            if (h1_prev) {
                const double* wr = m.w1h.row(static_cast<std::size_t>(j));
                for (int k = 0; k < w1; ++k)
                    acc += wr[k] * h1_prev[k];
            }
            h1_now[j] = relu(acc);
        }
        const double* h2_prev = t > 0 ? cache.h2.row(static_cast<std::size_t>(t - 1)) : nullptr;
        double* h2_now = cache.h2.row(static_cast<std::size_t>(t));
        for (int j = 0; j < w2; ++j) {
            double acc = m.b2[static_cast<std::size_t>(j)];
            {
                const double* wr = m.w2x.row(static_cast<std::size_t>(j));
                for (int k = 0; k < w1; ++k)
                    acc += wr[k] * h1_now[k];
            }
            if (h2_prev) {
                const double* wr = m.w2h.row(static_cast<std::size_t>(j));
                for (int k = 0; k < w2; ++k)
                    acc += wr[k] * h2_prev[k];
            }
            h2_now[j] = relu(acc);
        }
    }

    const double* h2_last = cache.h2.row(static_cast<std::size_t>(seq - 1));
    cache.f.assign(static_cast<std::size_t>(fc), 0.0);
    for (int j = 0; j < fc; ++j) {
        double acc = m.b3[static_cast<std::size_t>(j)];
        const double* wr = m.w3.row(static_cast<std::size_t>(j));
        for (int k = 0; k < w2; ++k)
            acc += wr[k] * h2_last[k];
        cache.f[static_cast<std::size_t>(j)] = relu(acc);
    }
    double pred = m.b4;
    for (int j = 0; j < fc; ++j)
        pred += m.w4[static_cast<std::size_t>(j)] * cache.f[static_cast<std::size_t>(j)];
    cache.pred = pred;
}

void glorot_fill(Mat& w, std::size_t fan_in, std::size_t fan_out, std::mt19937_64& gen)
{
    const double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-a, a);
    for (double& x : w.a)
        x = dist(gen);
}

} // namespace

NnModel make_model(int seq_len, std::uint64_t seed, int rnn1_width, int rnn2_width,
                   int fc_width)
{
    NnModel m;
    m.seq_len = seq_len;
    m.rnn1_width = rnn1_width;
    m.rnn2_width = rnn2_width;
    m.fc_width = fc_width;
    const std::size_t w1 = static_cast<std::size_t>(rnn1_width);
    const std::size_t w2 = static_cast<std::size_t>(rnn2_width);
    const std::size_t fc = static_cast<std::size_t>(fc_width);
    m.w1x = Mat(w1, 1);
    m.w1h = Mat(w1, w1);
    m.b1.assign(w1, 0.0);
    m.w2x = Mat(w2, w1);
    m.w2h = Mat(w2, w2);
    m.b2.assign(w2, 0.0);
    m.w3 = Mat(fc, w2);
    m.b3.assign(fc, 0.0);
    m.w4.assign(fc, 0.0);
    m.b4 = 0.0;

    auto gen = make_rng(seed);
    glorot_fill(m.w1x, 1, w1, gen);
    glorot_fill(m.w1h, w1, w1, gen);
    glorot_fill(m.w2x, w1, w2, gen);
    glorot_fill(m.w2h, w2, w2, gen);
    glorot_fill(m.w3, w2, fc, gen);
    {
        const double a = std::sqrt(6.0 / static_cast<double>(fc + 1));
        std::uniform_real_distribution<double> dist(-a, a);
        for (double& x : m.w4)
            x = dist(gen);
    }
    check_model(m);
    return m;
}

double forward(const NnModel& model, const Vec& y)
{
    check_model(model);
    ForwardCache cache;
    forward_pass(model, y, cache);
    return cache.pred;
}

std::uint64_t forward_flop_count(const NnModel& model)
{
    const std::uint64_t w1 = static_cast<std::uint64_t>(model.rnn1_width);
    const std::uint64_t w2 = static_cast<std::uint64_t>(model.rnn2_width);
    const std::uint64_t fc = static_cast<std::uint64_t>(model.fc_width);
    const std::uint64_t seq = static_cast<std::uint64_t>(model.seq_len);
    // per step: input and recurrent products plus bias adds for both layers
    const std::uint64_t step = (2 * w1 * 1 + 2 * w1 * w1 + 2 * w1) +
                               (2 * w2 * w1 + 2 * w2 * w2 + 2 * w2);
    // bottleneck and head
    const std::uint64_t tail = (2 * fc * w2 + fc) + (2 * fc + 1);
    return seq * step + tail;
}

ParamBuffers ParamBuffers::zeros_like(const NnModel& model)
{
    ParamBuffers g;
    g.w1x = Mat(model.w1x.rows, model.w1x.cols);
    g.w1h = Mat(model.w1h.rows, model.w1h.cols);
    g.b1.assign(model.b1.size(), 0.0);
    g.w2x = Mat(model.w2x.rows, model.w2x.cols);
    g.w2h = Mat(model.w2h.rows, model.w2h.cols);
    g.b2.assign(model.b2.size(), 0.0);
    g.w3 = Mat(model.w3.rows, model.w3.cols);
    g.b3.assign(model.b3.size(), 0.0);
    g.w4.assign(model.w4.size(), 0.0);
    g.b4 = 0.0;
    return g;
}

namespace {

void add_vec(Vec& a, const Vec& b)
{
    for (std::size_t i = 0; i < a.size(); ++i)
        a[i] += b[i];
}

void scale_vec(Vec& a, double f)
{
    for (double& x : a)
        x *= f;
}

} // namespace

void ParamBuffers::add(const ParamBuffers& other)
{
    add_vec(w1x.a, other.w1x.a);
    add_vec(w1h.a, other.w1h.a);
    add_vec(b1, other.b1);
    add_vec(w2x.a, other.w2x.a);
    add_vec(w2h.a, other.w2h.a);
    add_vec(b2, other.b2);
    add_vec(w3.a, other.w3.a);
    add_vec(b3, other.b3);
    add_vec(w4, other.w4);
    b4 += other.b4;
}

void ParamBuffers::scale(double factor)
{
    scale_vec(w1x.a, factor);
    scale_vec(w1h.a, factor);
    scale_vec(b1, factor);
    scale_vec(w2x.a, factor);
    scale_vec(w2h.a, factor);
    scale_vec(b2, factor);
    scale_vec(w3.a, factor);
    scale_vec(b3, factor);
    scale_vec(w4, factor);
    b4 *= factor;
}

double backward(const NnModel& m, const Vec& y, double target, ParamBuffers& grads)
{
    check_model(m);
    ForwardCache cache;
    forward_pass(m, y, cache);

    const int seq = m.seq_len;
    const int w1 = m.rnn1_width;
    const int w2 = m.rnn2_width;
    const int fc = m.fc_width;

    const double err = cache.pred - target;
    const double g_pred = 2.0 * err;

    // head and bottleneck
    Vec g_f_pre(static_cast<std::size_t>(fc), 0.0);
    for (int j = 0; j < fc; ++j) {
        grads.w4[static_cast<std::size_t>(j)] += g_pred * cache.f[static_cast<std::size_t>(j)];
        g_f_pre[static_cast<std::size_t>(j)] =
            cache.f[static_cast<std::size_t>(j)] > 0.0
                ? g_pred * m.w4[static_cast<std::size_t>(j)]
                : 0.0;
    }
    grads.b4 += g_pred;

    const double* h2_last = cache.h2.row(static_cast<std::size_t>(seq - 1));
    Vec carry2(static_cast<std::size_t>(w2), 0.0); // gradient flowing into h2 at step t
    for (int j = 0; j < fc; ++j) {
        const double g = g_f_pre[static_cast<std::size_t>(j)];
        if (g == 0.0)
            continue;
        double* gw = grads.w3.row(static_cast<std::size_t>(j));
        const double* wr = m.w3.row(static_cast<std::size_t>(j));
        for (int k = 0; k < w2; ++k) {
            gw[k] += g * h2_last[k];
            carry2[static_cast<std::size_t>(k)] += wr[k] * g;
        }
        grads.b3[static_cast<std::size_t>(j)] += g;
    }

    Vec carry1(static_cast<std::size_t>(w1), 0.0);
    Vec g2(static_cast<std::size_t>(w2));
    Vec g1(static_cast<std::size_t>(w1));
    Vec next_carry2(static_cast<std::size_t>(w2));
    Vec next_carry1(static_cast<std::size_t>(w1));
    for (int t = seq - 1; t >= 0; --t) {
        const double* h2_now = cache.h2.row(static_cast<std::size_t>(t));
        const double* h1_now = cache.h1.row(static_cast<std::size_t>(t));
        const double* h2_prev = t > 0 ? cache.h2.row(static_cast<std::size_t>(t - 1)) : nullptr;
        const double* h1_prev = t > 0 ? cache.h1.row(static_cast<std::size_t>(t - 1)) : nullptr;

        for (int k = 0; k < w2; ++k)
            g2[static_cast<std::size_t>(k)] =
                h2_now[k] > 0.0 ? carry2[static_cast<std::size_t>(k)] : 0.0;

        std::fill(next_carry2.begin(), next_carry2.end(), 0.0);
        Vec into1(static_cast<std::size_t>(w1), 0.0);
        for (int k = 0; k < w2; ++k) {
            const double g = g2[static_cast<std::size_t>(k)];
            if (g == 0.0)
                continue;
            grads.b2[static_cast<std::size_t>(k)] += g;
            {
                double* gw = grads.w2x.row(static_cast<std::size_t>(k));
                const double* wr = m.w2x.row(static_cast<std::size_t>(k));
                for (int j = 0; j < w1; ++j) {
                    gw[j] += g * h1_now[j];
                    into1[static_cast<std::size_t>(j)] += wr[j] * g;
                }
            }
            if (h2_prev) {
                double* gw = grads.w2h.row(static_cast<std::size_t>(k));
                const double* wr = m.w2h.row(static_cast<std::size_t>(k));
                for (int j = 0; j < w2; ++j) {
                    gw[j] += g * h2_prev[j];
                    next_carry2[static_cast<std::size_t>(j)] += wr[j] * g;
                }
            }
        }

        for (int j = 0; j < w1; ++j) {
            const double total = into1[static_cast<std::size_t>(j)] +
                                 carry1[static_cast<std::size_t>(j)];
            g1[static_cast<std::size_t>(j)] = h1_now[j] > 0.0 ? total : 0.0;
        }

        std::fill(next_carry1.begin(), next_carry1.end(), 0.0);
        const double x = y[static_cast<std::size_t>(t)];
        for (int j = 0; j < w1; ++j) {
            const double g = g1[static_cast<std::size_t>(j)];
            if (g == 0.0)
                continue;
            grads.b1[static_cast<std::size_t>(j)] += g;
            grads.w1x(static_cast<std::size_t>(j), 0) += g * x;
            if (h1_prev) {
                double* gw = grads.w1h.row(static_cast<std::size_t>(j));
                const double* wr = m.w1h.row(static_cast<std::size_t>(j));
                for (int k = 0; k < w1; ++k) {
                    gw[k] += g * h1_prev[k];
                    next_carry1[static_cast<std::size_t>(k)] += wr[k] * g;
                }
            }
        }

        std::swap(carry2, next_carry2);
        std::swap(carry1, next_carry1);
    }

    return err * err;
}

AdamState AdamState::zeros_like(const NnModel& model)
{
    AdamState s;
    s.m = ParamBuffers::zeros_like(model);
    s.v = ParamBuffers::zeros_like(model);
    s.t = 0;
    return s;
}

namespace {

void adam_update(Vec& param, const Vec& grad, Vec& m, Vec& v, double lr, double beta1,
                 double beta2, double eps, double bc1, double bc2)
{
    for (std::size_t i = 0; i < param.size(); ++i) {
        m[i] = beta1 * m[i] + (1.0 - beta1) * grad[i];
        v[i] = beta2 * v[i] + (1.0 - beta2) * grad[i] * grad[i];
        const double mhat = m[i] / bc1;
        const double vhat = v[i] / bc2;
        param[i] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
}

} // namespace

void adam_step(NnModel& model, const ParamBuffers& grads, AdamState& state,
               const AdamConfig& config)
{
    state.t += 1;
    const double bc1 = 1.0 - std::pow(config.beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(config.beta2, static_cast<double>(state.t));
    const double lr = config.learning_rate;
    adam_update(model.w1x.a, grads.w1x.a, state.m.w1x.a, state.v.w1x.a, lr, config.beta1,
                config.beta2, config.epsilon, bc1, bc2);
    adam_update(model.w1h.a, grads.w1h.a, state.m.w1h.a, state.v.w1h.a, lr, config.beta1,
                config.beta2, config.epsilon, bc1, bc2);
    adam_update(model.b1, grads.b1, state.m.b1, state.v.b1, lr, config.beta1, config.beta2,
                config.epsilon, bc1, bc2);
    adam_update(model.w2x.a, grads.w2x.a, state.m.w2x.a, state.v.w2x.a, lr, config.beta1,
                config.beta2, config.epsilon, bc1, bc2);
    adam_update(model.w2h.a, grads.w2h.a, state.m.w2h.a, state.v.w2h.a, lr, config.beta1,
                config.beta2, config.epsilon, bc1, bc2);
    adam_update(model.b2, grads.b2, state.m.b2, state.v.b2, lr, config.beta1, config.beta2,
                config.epsilon, bc1, bc2);
    adam_update(model.w3.a, grads.w3.a, state.m.w3.a, state.v.w3.a, lr, config.beta1,
                config.beta2, config.epsilon, bc1, bc2);
    adam_update(model.b3, grads.b3, state.m.b3, state.v.b3, lr, config.beta1, config.beta2,
                config.epsilon, bc1, bc2);
    adam_update(model.w4, grads.w4, state.m.w4, state.v.w4, lr, config.beta1, config.beta2,
                config.epsilon, bc1, bc2);
    {
        double m0 = state.m.b4, v0 = state.v.b4;
        m0 = config.beta1 * m0 + (1.0 - config.beta1) * grads.b4;
        v0 = config.beta2 * v0 + (1.0 - config.beta2) * grads.b4 * grads.b4;
        state.m.b4 = m0;
        state.v.b4 = v0;
        model.b4 -= lr * (m0 / bc1) / (std::sqrt(v0 / bc2) + config.epsilon);
    }
}

namespace {

double eval_mse(const NnModel& model, const TrainingSet& set, const std::vector<int>& idx)
{
    if (idx.empty())
        return std::numeric_limits<double>::quiet_NaN();
    double acc = 0.0;
    for (int i : idx) {
        const double p = forward(model, set[static_cast<std::size_t>(i)].y);
        const double e = p - set[static_cast<std::size_t>(i)].radius;
        acc += e * e;
    }
    return acc / static_cast<double>(idx.size());
}

// Per-sample gradient buffers summed in sample order keep the result identical
// for any thread count.
double batch_gradients(const NnModel& model, const TrainingSet& set,
                       const std::vector<int>& batch, int num_threads, ParamBuffers& out)
{
    const std::size_t n = batch.size();
    std::vector<ParamBuffers> per_sample;
    per_sample.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
        per_sample.push_back(ParamBuffers::zeros_like(model));
    std::vector<double> sq_err(n, 0.0);

    auto worker = [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            const TrainingSample& s = set[static_cast<std::size_t>(batch[i])];
            sq_err[i] = backward(model, s.y, s.radius, per_sample[i]);
        }
    };

    const int threads = std::max(1, std::min<int>(num_threads, static_cast<int>(n)));
    if (threads == 1) {
        worker(0, n);
    } else {
        std::vector<std::thread> pool;
        const std::size_t chunk = (n + threads - 1) / static_cast<std::size_t>(threads);
        for (int k = 0; k < threads; ++k) {
            const std::size_t lo = static_cast<std::size_t>(k) * chunk;
            const std::size_t hi = std::min(n, lo + chunk);
            if (lo >= hi)
                break;
            pool.emplace_back(worker, lo, hi);
        }
        for (auto& th : pool)
            th.join();
    }

    double loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        out.add(per_sample[i]);
        loss += sq_err[i];
    }
    out.scale(1.0 / static_cast<double>(n));
    return loss / static_cast<double>(n);
}

} // namespace

double mse_loss(const NnModel& model, const TrainingSet& set)
{
    if (set.empty())
        throw std::invalid_argument("mse_loss: empty sample set");
    std::vector<int> idx(set.size());
    std::iota(idx.begin(), idx.end(), 0);
    return eval_mse(model, set, idx);
}

ParamBuffers batch_gradient(const NnModel& model, const TrainingSet& set,
                            const std::vector<std::size_t>& indices, int num_threads,
                            double* loss)
{
    if (indices.empty())
        throw std::invalid_argument("batch_gradient: empty batch");
    std::vector<int> batch;
    batch.reserve(indices.size());
    for (std::size_t i : indices) {
        if (i >= set.size())
            throw std::invalid_argument("batch_gradient: index out of range");
        batch.push_back(static_cast<int>(i));
    }
    ParamBuffers grads = ParamBuffers::zeros_like(model);
    const double batch_loss = batch_gradients(model, set, batch, num_threads, grads);
    if (loss)
        *loss = batch_loss;
    return grads;
}

TrainResult train(const TrainingSet& set, int seq_len, const TrainingConfig& config)
{
    if (set.empty())
        throw std::invalid_argument("train: empty training set");
    for (const auto& s : set)
        if (static_cast<int>(s.y.size()) != seq_len)
            throw std::invalid_argument("train: sample length does not match seq_len");
    if (config.batch_size < 1 || config.max_epochs < 1 || config.patience < 1)
        throw std::invalid_argument("train: batch_size, max_epochs, patience must be >= 1");
    if (!(config.holdout_fraction >= 0.0 && config.holdout_fraction < 1.0))
        throw std::invalid_argument("train: holdout_fraction must be in [0, 1)");

    const int n = static_cast<int>(set.size());
    int n_hold = static_cast<int>(std::lround(config.holdout_fraction * n));
    if (config.holdout_fraction > 0.0 && n_hold == 0)
        n_hold = 1;
    if (n_hold >= n)
        n_hold = n - 1;

    const auto split_perm = random_permutation(static_cast<std::size_t>(n),
                                               derive_seed(config.seed, 0));
    std::vector<int> hold_idx, train_idx;
    for (int i = 0; i < n; ++i) {
        const int s = static_cast<int>(split_perm[static_cast<std::size_t>(i)]);
        if (i < n_hold)
            hold_idx.push_back(s);
        else
            train_idx.push_back(s);
    }

    NnModel model = make_model(seq_len, derive_seed(config.seed, 1), config.rnn1_width,
                               config.rnn2_width, config.fc_width);
    AdamState adam = AdamState::zeros_like(model);

    TrainResult result;
    const bool use_holdout = !hold_idx.empty();

    auto record = [&](int epoch, double train_mse) {
        EpochStats st;
        st.epoch = epoch;
        st.train_mse = train_mse;
        st.holdout_mse = use_holdout ? eval_mse(model, set, hold_idx)
                                     : std::numeric_limits<double>::quiet_NaN();
        if (!std::isfinite(st.train_mse) || (use_holdout && !std::isfinite(st.holdout_mse)))
            throw NonFiniteLoss("training loss became non-finite at epoch " + std::to_string(epoch), epoch);
        result.trace.push_back(st);
        return st;
    };

    // epoch 0: untrained model, both splits evaluated without any update
    EpochStats st0 = record(0, eval_mse(model, set, train_idx));
    double best = use_holdout ? st0.holdout_mse : st0.train_mse;
    result.model = model;
    result.best_epoch = 0;
    result.best_holdout_mse = st0.holdout_mse;
    int since_best = 0;

    for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
        const auto order = random_permutation(train_idx.size(),
                                              derive_seed(config.seed, 1000 + epoch));
        double loss_acc = 0.0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < train_idx.size();
             start += static_cast<std::size_t>(config.batch_size)) {
            const std::size_t stop = std::min(train_idx.size(),
                                              start + static_cast<std::size_t>(config.batch_size));
            std::vector<int> batch;
            batch.reserve(stop - start);
            for (std::size_t i = start; i < stop; ++i)
                batch.push_back(train_idx[order[i]]);
            ParamBuffers grads = ParamBuffers::zeros_like(model);
            const double batch_loss = batch_gradients(model, set, batch, config.num_threads,
                                                      grads);
            if (!std::isfinite(batch_loss))
                throw NonFiniteLoss("training loss became non-finite at epoch " + std::to_string(epoch), epoch);
            adam_step(model, grads, adam, config.adam);
            loss_acc += batch_loss;
            batches += 1;
        }
        const EpochStats st = record(epoch, loss_acc / static_cast<double>(batches));
        const double score = use_holdout ? st.holdout_mse : st.train_mse;
        if (score < best) {
            best = score;
            result.model = model;
            result.best_epoch = epoch;
            result.best_holdout_mse = st.holdout_mse;
            since_best = 0;
        } else {
            since_best += 1;
            if (since_best >= config.patience)
                break;
        }
    }
    return result;
}

RadiusStats radius_stats(const std::vector<double>& radii, int num_bins)
{
    if (radii.empty())
        throw std::invalid_argument("radius_stats: empty input");
    if (num_bins < 1)
        throw std::invalid_argument("radius_stats: need at least one bin");
    RadiusStats s;
    s.mean = mean(radii);
    s.stddev = sample_stddev(radii);
    s.min = *std::min_element(radii.begin(), radii.end());
    s.max = *std::max_element(radii.begin(), radii.end());
    s.histogram.assign(static_cast<std::size_t>(num_bins), 0);
    const double span = s.max - s.min;
    for (double r : radii) {
        int bin = span > 0.0
                      ? static_cast<int>((r - s.min) / span * num_bins)
                      : 0;
        bin = std::clamp(bin, 0, num_bins - 1);
        s.histogram[static_cast<std::size_t>(bin)] += 1;
    }
    return s;
}

double estimate_delta_d(const RadiusStats& stats)
{
    return std::max(stats.stddev, 1e-3 * stats.mean);
}

} // namespace ftn
