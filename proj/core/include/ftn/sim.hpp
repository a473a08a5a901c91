#pragma once

// Experiment harness: paired Monte-Carlo runs of the noise-statistics radius
// strategy and the learned radius strategy over the same transmissions,
// optional convolutional coding, deterministic per-frame seeding, and a
// worker pool whose aggregates do not depend on the worker count.

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "ftn/radius_net.hpp"

namespace ftn {

struct ExperimentConfig {
    double tau = 0.6;
    double beta_signal = 0.35;
    double beta_basis = 0.12;
    double symbol_time = 1.0;
    int block_len = 25;
    int num_taps = 20;
    int n_list = 32;
    double eb = 1.0;
    double epsilon = 0.01; // sphere coverage miss probability for the noise radius
    bool coded = false;
    int info_bits = 244; // info bits per coded frame
    std::vector<double> ebn0_db;
    int num_frames = 100; // frames per grid point (a frame is one block when uncoded)
    std::uint64_t seed = 1;
    int num_workers = 1;
};

struct ResultRow {
    double tau = 0.0;
    double ebn0_db = 0.0;
    double code_rate = 1.0;
    std::uint64_t frames = 0;
    std::uint64_t blocks = 0;
    std::uint64_t bits = 0; // bits entering the error count
    std::uint64_t bit_errors_noise = 0;
    std::uint64_t bit_errors_learned = 0;
    double ber_noise = 0.0;
    double ber_learned = 0.0;
    std::uint64_t search_flops_noise = 0;
    std::uint64_t search_flops_learned = 0;
    double avg_flops_noise = 0.0;    // per block
    double avg_flops_learned = 0.0;  // per block, tree search only
    double flop_ratio = 0.0;         // learned / noise, search flops
    double avg_nn_flops = 0.0;        // per block, reported outside the ratio
    double avg_list_size_noise = 0.0; // returned (post-truncation) list size
    double avg_list_size_learned = 0.0;
    double avg_pretrunc_noise = 0.0; // list size before truncation
    double avg_pretrunc_learned = 0.0;
    double avg_leaves_noise = 0.0; // points accepted during search, evictions included
    double avg_leaves_learned = 0.0;
    double avg_rounds_noise = 0.0;
    double avg_rounds_learned = 0.0;
    double fallback_fraction = 0.0;
    bool learned_ran = false;
};

// Per grid point: the model driving the learned strategy, or nullptr to run
// the noise-radius side only.
std::vector<ResultRow> run_simulate(const ExperimentConfig& config,
                                    const std::vector<const NnModel*>& models,
                                    const std::function<void(const std::string&)>& log = {});

void save_results_csv(const std::vector<ResultRow>& rows, const std::string& path);

struct DataGenConfig {
    double tau = 0.6;
    double beta_signal = 0.35;
    double beta_basis = 0.12;
    double symbol_time = 1.0;
    int block_len = 25;
    int num_taps = 20;
    int n_list = 32;
    double eb = 1.0;
    double epsilon = 0.01;
    double ebn0_db = 8.0;
    double code_rate = 1.0; // enters the noise variance mapping only
    int num_blocks = 1000;
    std::uint64_t seed = 1;
};

// One sample per block: the received vector paired with the distance of the
// n_list-th closest lattice point found by the noise-radius search.
TrainingSet generate_training_set(const DataGenConfig& config);

// Config-file / flag-override plumbing shared with the command-line tool.
ExperimentConfig parse_experiment_config(const std::map<std::string, std::string>& kv);
DataGenConfig parse_datagen_config(const std::map<std::string, std::string>& kv);

} // namespace ftn
