#pragma once

// Recurrent radius predictor: consumes a received block one sample per step
// and regresses the search radius (plain distance, not squared) that a
// candidate-list search should start from.  Two recurrent relu layers, a relu
// bottleneck on the final state, and a scalar linear head.  Training is
// straight backpropagation through time with Adam on mean squared error.

#include <cstdint>
#include <vector>

#include "ftn/mat.hpp"

namespace ftn {

struct NnModel {
    // experiment identity carried with the weights
    int schema_version = 1;
    double tau = 0.0;
    double ebn0_db = 0.0;
    int block_len = 0;
    int list_size = 0;
    double delta_d = 0.0; // radius growth step used when the sphere comes up short
    int seq_len = 0;      // observation samples consumed per prediction

    int rnn1_width = 128;
    int rnn2_width = 128;
    int fc_width = 64;

    Mat w1x; // rnn1_width x 1
    Mat w1h; // rnn1_width x rnn1_width
    Vec b1;
    Mat w2x; // rnn2_width x rnn1_width
    Mat w2h; // rnn2_width x rnn2_width
    Vec b2;
    Mat w3; // fc_width x rnn2_width
    Vec b3;
    Vec w4; // fc_width, scalar head weights
    double b4 = 0.0;
};

// Glorot-uniform initialized model (biases zero).
NnModel make_model(int seq_len, std::uint64_t seed, int rnn1_width = 128,
                   int rnn2_width = 128, int fc_width = 64);

double forward(const NnModel& model, const Vec& y);

// Analytic flop count of one forward pass (multiply-add pairs counted as two).
std::uint64_t forward_flop_count(const NnModel& model);

// Per-parameter buffers shaped like the model; used for gradients and for the
// two Adam moment accumulators.
struct ParamBuffers {
    Mat w1x, w1h;
    Vec b1;
    Mat w2x, w2h;
    Vec b2;
    Mat w3;
    Vec b3;
    Vec w4;
    double b4 = 0.0;

    static ParamBuffers zeros_like(const NnModel& model);
    void add(const ParamBuffers& other);
    void scale(double factor);
};

// Accumulates d(loss)/d(params) for one sample into grads; returns the sample's
// squared error.  target is the desired radius.
double backward(const NnModel& model, const Vec& y, double target, ParamBuffers& grads);

struct AdamState {
    ParamBuffers m;
    ParamBuffers v;
    std::int64_t t = 0;

    static AdamState zeros_like(const NnModel& model);
};

struct AdamConfig {
    double learning_rate = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

void adam_step(NnModel& model, const ParamBuffers& grads, AdamState& state,
               const AdamConfig& config);

struct TrainingSample {
    Vec y;
    double radius = 0.0;
};

using TrainingSet = std::vector<TrainingSample>;

struct TrainingConfig {
    AdamConfig adam;
    int batch_size = 20;
    int max_epochs = 100;
    int patience = 10;           // epochs without holdout improvement before stopping
    double holdout_fraction = 0.1;
    std::uint64_t seed = 1;
    int num_threads = 1; // gradient accumulation threads; result is thread-count invariant
    int rnn1_width = 128;
    int rnn2_width = 128;
    int fc_width = 64;
};

struct EpochStats {
    int epoch = 0; // 0 is the untrained model
    double train_mse = 0.0;
    double holdout_mse = 0.0;
};

struct TrainResult {
    NnModel model; // snapshot from the best holdout epoch
    std::vector<EpochStats> trace;
    int best_epoch = 0;
    double best_holdout_mse = 0.0;
};

// Mean squared radius error of the model over a sample set.
double mse_loss(const NnModel& model, const TrainingSet& set);

// Mean gradient (and, via *loss, mean squared error) over set[indices].
// Per-sample contributions are summed in index order, so the result does not
// depend on num_threads.
ParamBuffers batch_gradient(const NnModel& model, const TrainingSet& set,
                            const std::vector<std::size_t>& indices, int num_threads,
                            double* loss = nullptr);

// Trains on the set minus a seeded holdout split; throws NonFiniteLoss when a
// loss value stops being finite.
TrainResult train(const TrainingSet& set, int seq_len, const TrainingConfig& config);

struct RadiusStats {
    double mean = 0.0;
    double stddev = 0.0; // sample standard deviation
    double min = 0.0;
    double max = 0.0;
    std::vector<std::uint64_t> histogram; // equal-width bins over [min, max]
};

RadiusStats radius_stats(const std::vector<double>& radii, int num_bins = 40);

// Growth step derived from the spread of training radii, floored so that a
// near-constant radius distribution still yields usable growth.
double estimate_delta_d(const RadiusStats& stats);

} // namespace ftn
