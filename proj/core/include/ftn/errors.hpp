// Error types thrown by the library. Callers that need to distinguish
// configuration problems from numeric failures catch these by type.
#pragma once

#include <stdexcept>
#include <string>

namespace ftn {

// Basis pulse's flat band does not cover the signal bandwidth.
struct FlatBandViolation : std::runtime_error {
    explicit FlatBandViolation(const std::string& msg) : std::runtime_error(msg) {}
};

// Compression/rolloff pair outside the region where the basis expansion is valid.
struct OperationRegionViolation : std::runtime_error {
    explicit OperationRegionViolation(const std::string& msg) : std::runtime_error(msg) {}
};

// Exhaustive enumeration requested for a block too large to enumerate.
struct BlockTooLarge : std::runtime_error {
    explicit BlockTooLarge(const std::string& msg) : std::runtime_error(msg) {}
};

// QR factorization hit a (numerically) rank-deficient matrix.
struct RankDeficient : std::runtime_error {
    explicit RankDeficient(const std::string& msg) : std::runtime_error(msg) {}
};

// A candidate list that must be non-empty was empty.
struct EmptyList : std::runtime_error {
    explicit EmptyList(const std::string& msg) : std::runtime_error(msg) {}
};

// Radius predictor produced a non-finite or non-positive radius and no
// fallback radius was available.
struct NonFiniteRadius : std::runtime_error {
    explicit NonFiniteRadius(const std::string& msg) : std::runtime_error(msg) {}
};

// Training loss became non-finite; carries the epoch where it happened.
struct NonFiniteLoss : std::runtime_error {
    int epoch;
    NonFiniteLoss(const std::string& msg, int epoch_) : std::runtime_error(msg), epoch(epoch_) {}
};

// File could not be opened, read, written, or parsed as the expected format.
struct IoError : std::runtime_error {
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace ftn
