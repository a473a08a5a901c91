#pragma once

// Text serialization: radius-model files, training datasets with metadata
// sidecars, and loss traces.  All floating-point values are written with 17
// significant digits so a write/read round trip is value-identical.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ftn/radius_net.hpp"

namespace ftn {

void save_model(const NnModel& model, const std::string& path);
NnModel load_model(const std::string& path);

struct DatasetMeta {
    double tau = 0.0;
    double beta_signal = 0.35;
    double beta_basis = 0.12;
    int block_len = 0;
    int num_taps = 0;
    int list_size = 0;
    double ebn0_db = 0.0;
    double code_rate = 1.0;
    double eb = 1.0;
    double epsilon = 0.01;
    int num_blocks = 0;
    std::uint64_t seed = 0;
    int seq_len = 0;
};

struct Dataset {
    DatasetMeta meta;
    TrainingSet samples;
};

// Writes path (CSV, one row per sample) and path + ".meta" (key = value lines).
void save_dataset(const Dataset& data, const std::string& path);
Dataset load_dataset(const std::string& path);

void save_loss_trace(const std::vector<EpochStats>& trace, const std::string& path);

// Generic "key = value" config-file reader shared by the command-line tool;
// '#' starts a comment, blank lines are skipped.
std::map<std::string, std::string> read_key_value_file(const std::string& path);

} // namespace ftn
