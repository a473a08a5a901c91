// Block detector: exhaustive log-MAP reference, QR preprocessing, a
// depth-first list sphere search with best-first child ordering, list-based
// LLRs, and the two initial-radius strategies (noise-statistics radius and
// learned radius with additive growth).
#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "ftn/mat.hpp"

namespace ftn {

struct NnModel; // radius_net.hpp
struct NoiseSpec;

// Counts floating add/sub/mul/div performed inside the sphere search. The
// same accounting runs for every strategy so totals are comparable.
struct FlopCounter {
    std::uint64_t count = 0;
    void add(std::uint64_t n) { count += n; }
};

// One antipodal block hypothesis. bits[k] in {-1,+1}; symbols = sqrt(Eb)*bits.
struct LatticePoint {
    std::vector<int> bits;
    std::vector<double> symbols;
    double squared_distance = 0.0;
};

// Compact candidate entry: bit pattern packed with the first symbol at the
// most significant position, so an ascending integer order is a left-to-right
// lexicographic order on the bit sequence (used to break distance ties).
struct CandidateEntry {
    double squared_distance = 0.0;
    std::uint32_t pattern = 0;
};

// Search output, sorted by (squared_distance, pattern).
struct CandidateList {
    std::vector<CandidateEntry> entries;
    int block_len = 0;
    int capacity = 0;
    double symbol_amp = 1.0;

    bool full() const { return static_cast<int>(entries.size()) >= capacity; }
    double worst_distance() const { return entries.back().squared_distance; }
};

std::uint32_t pattern_from_bits(const std::vector<int>& bits_pm1);
std::vector<int> bits_from_pattern(std::uint32_t pattern, int block_len);
LatticePoint to_lattice_point(const CandidateList& list, std::size_t index);

// Thin QR of a tall matrix: q is m x n column-orthonormal, r is n x n upper
// triangular with nonnegative diagonal. Throws RankDeficient when a diagonal
// entry falls below 1e-10.
struct QrFactors {
    Mat q;
    Mat r;
};
QrFactors qr_factorize(const Mat& h);

// Reduced search problem: ||y - H a||^2 = ||z - R a||^2 + dist_offset with
// z = Q^T y and dist_offset = ||y||^2 - ||z||^2 (nonnegative; carried so all
// reported distances are true distances to y).
struct SphereProblem {
    Mat r;
    Vec z;
    double dist_offset = 0.0;
    double symbol_amp = 1.0;
};
SphereProblem make_sphere_problem(const QrFactors& qr, const Vec& y, double eb);

// Auxiliary search tallies (not part of the flop count).
struct SearchStats {
    std::uint64_t nodes_visited = 0;
    std::uint64_t leaves_inside = 0; // points accepted into the list, evicted ones included
};

// Depth-first sphere search over all antipodal blocks keeping at most
// capacity points with true squared distance <= d_init_sq. While the list is
// full the radius shrinks to the current worst kept distance; a newly found
// closer point evicts the worst one. Ties at the boundary keep the
// lexicographically smallest bit pattern. Returns the kept points sorted by
// (distance, pattern); possibly fewer than capacity when the sphere is small.
CandidateList list_sphere_search(const SphereProblem& problem, double d_init_sq, int capacity,
                                 FlopCounter& flops, SearchStats* stats = nullptr);

// LLR vector with the symmetric clamp applied to every component.
struct LlrVector {
    std::vector<double> values;
    double clamp = 30.0;
};

// Per-bit priors; empty means equiprobable.
using LlrPriors = std::vector<double>;

// Exact log-MAP bit LLRs by enumerating all 2^N blocks in the log domain
// (log-sum-exp, no max approximation). Guarded: throws BlockTooLarge for
// N > 20. priors may be empty or length N.
LlrVector exact_llr(const Vec& y, const Mat& h, double sigma_sq, const LlrPriors& priors,
                    double eb, double clamp = 30.0);

// Same log-sum-exp form restricted to the candidate list. A bit value absent
// from the list pins that bit's LLR to +/- clamp. Throws EmptyList on an
// empty list. (Distances are read from the list, so no observation vector is
// needed here.)
LlrVector approx_llr(const CandidateList& list, double sigma_sq, const LlrPriors& priors,
                     double clamp = 30.0);

// Initial squared radius from the noise statistics: sigma_sq times the
// chi-square quantile at probability 1-epsilon with n_rows degrees of
// freedom, so the transmitted point lies inside with probability 1-epsilon.
double initial_radius_noise(double sigma_sq, int n_rows, double epsilon);

// How the initial radius is chosen and grown when the search returns fewer
// than the target number of points.
struct NoiseRadius {
    double epsilon = 0.01; // grown by doubling the squared radius
};
struct LearnedRadius {
    const NnModel* model = nullptr;
    double delta_d = 0.0; // additive growth step on the radius (distance)
};

struct DetectStats {
    int rounds = 0;                      // sphere searches run
    std::size_t pre_truncation_count = 0; // points inside the final sphere
    double final_radius_sq = 0.0;
    bool used_fallback_radius = false;   // learned radius was non-finite/non-positive
    std::uint64_t leaves_inside_total = 0;
    std::uint64_t nodes_visited_total = 0;
    std::uint64_t nn_flops = 0;          // radius predictor cost, reported separately
};

struct DetectResult {
    CandidateList list;
    DetectStats stats;
};

// Full detection pass: pick the initial radius per strategy, search, and grow
// the radius until at least n_list points are found, then truncate to the
// n_list closest. Both strategies run the identical search and accounting and
// differ only in how the radius starts and grows. The observation y is the
// radius predictor's input; noise supplies the fallback/noise radius.
DetectResult detect(const SphereProblem& problem, const Vec& y, const NoiseSpec& noise,
                    const NoiseRadius& strategy, int n_list, FlopCounter& flops);
DetectResult detect(const SphereProblem& problem, const Vec& y, const NoiseSpec& noise,
                    const LearnedRadius& strategy, int n_list, FlopCounter& flops);

// Convenience wrapper: QR-factorize h and run learned-radius detection.
DetectResult learned_radius_detect(const Mat& h, const Vec& y, const NnModel& model,
                                   double delta_d, int n_list, FlopCounter& flops,
                                   const NoiseSpec& noise, double eb);

// Ratio of search flops, learned strategy over noise-radius strategy.
double complexity_report(std::uint64_t flops_learned, std::uint64_t flops_noise);

} // namespace ftn
