#include "ftn/detector.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "ftn/errors.hpp"
#include "ftn/link.hpp"
#include "ftn/radius_net.hpp"
#include "ftn/stats.hpp"

namespace ftn {

namespace {

// Max block length that fits the packed pattern representation.
constexpr int kMaxBlockLen = 31;

void check_block_len(int n, const char* who)
{
    if (n < 1 || n > kMaxBlockLen)
        throw std::invalid_argument(std::string(who) + ": block length out of range");
}

// Capacity sentinel: no eviction, list just collects everything in the sphere.
constexpr int kUnbounded = std::numeric_limits<int>::max();

} // namespace

std::uint32_t pattern_from_bits(const std::vector<int>& bits_pm1)
{
    check_block_len(static_cast<int>(bits_pm1.size()), "pattern_from_bits");
    const int n = static_cast<int>(bits_pm1.size());
    std::uint32_t p = 0;
    for (int k = 0; k < n; ++k) {
        if (bits_pm1[static_cast<std::size_t>(k)] == 1)
            p |= 1u << (n - 1 - k); // first bit at the most significant position
        else if (bits_pm1[static_cast<std::size_t>(k)] != -1)
            throw std::invalid_argument("pattern_from_bits: bits must be -1 or +1");
    }
    return p;
}

std::vector<int> bits_from_pattern(std::uint32_t pattern, int block_len)
{
    check_block_len(block_len, "bits_from_pattern");
    std::vector<int> bits(static_cast<std::size_t>(block_len));
    for (int k = 0; k < block_len; ++k)
        bits[static_cast<std::size_t>(k)] = (pattern >> (block_len - 1 - k)) & 1u ? 1 : -1;
    return bits;
}

LatticePoint to_lattice_point(const CandidateList& list, std::size_t index)
{
    if (index >= list.entries.size())
        throw std::out_of_range("to_lattice_point: index past end of list");
    LatticePoint p;
    p.bits = bits_from_pattern(list.entries[index].pattern, list.block_len);
    p.symbols.resize(p.bits.size());
    for (std::size_t k = 0; k < p.bits.size(); ++k)
        p.symbols[k] = list.symbol_amp * p.bits[k];
    p.squared_distance = list.entries[index].squared_distance;
    return p;
}

QrFactors qr_factorize(const Mat& h)
{
    const std::size_t m = h.rows, n = h.cols;
    if (n < 1 || m < n)
        throw std::invalid_argument("qr_factorize: need a tall matrix (rows >= cols >= 1)");

    Mat r_work = h;          // m x n, reduced in place
    Mat q_work(m, m);        // accumulates the product of reflectors
    for (std::size_t i = 0; i < m; ++i)
        q_work(i, i) = 1.0;

    std::vector<double> v(m);
    for (std::size_t k = 0; k < n; ++k) {
        double norm_sq_col = 0.0;
        for (std::size_t i = k; i < m; ++i)
            norm_sq_col += r_work(i, k) * r_work(i, k);
        const double norm_col = std::sqrt(norm_sq_col);
        if (norm_col == 0.0)
            throw RankDeficient("qr_factorize: zero column " + std::to_string(k));

        const double x0 = r_work(k, k);
        const double alpha = x0 >= 0.0 ? -norm_col : norm_col;
        // v = x - alpha e1 on the trailing rows
        double v_norm_sq = 0.0;
        for (std::size_t i = k; i < m; ++i) {
            v[i] = r_work(i, k) - (i == k ? alpha : 0.0);
            v_norm_sq += v[i] * v[i];
        }
        if (v_norm_sq > 0.0) {
            const double beta = 2.0 / v_norm_sq;
            // R <- (I - beta v v^T) R
            for (std::size_t j = k; j < n; ++j) {
                double w = 0.0;
                for (std::size_t i = k; i < m; ++i)
                    w += v[i] * r_work(i, j);
                w *= beta;
                for (std::size_t i = k; i < m; ++i)
                    r_work(i, j) -= w * v[i];
            }
            // Q <- Q (I - beta v v^T)
            for (std::size_t i = 0; i < m; ++i) {
                double w = 0.0;
                for (std::size_t j = k; j < m; ++j)
                    w += q_work(i, j) * v[j];
                w *= beta;
                for (std::size_t j = k; j < m; ++j)
                    q_work(i, j) -= w * v[j];
            }
        }
    }

    QrFactors f;
    f.q = Mat(m, n);
    f.r = Mat(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j)
            f.r(i, j) = r_work(i, j);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j)
            f.q(i, j) = q_work(i, j);

    // Normalize to a nonnegative diagonal.
    for (std::size_t i = 0; i < n; ++i) {
        if (f.r(i, i) < 0.0) {
            for (std::size_t j = i; j < n; ++j)
                f.r(i, j) = -f.r(i, j);
            for (std::size_t k = 0; k < m; ++k)
                f.q(k, i) = -f.q(k, i);
        }
        if (std::fabs(f.r(i, i)) < 1e-10)
            throw RankDeficient("qr_factorize: diagonal entry " + std::to_string(i) +
                                " below tolerance");
    }
    return f;
}

SphereProblem make_sphere_problem(const QrFactors& qr, const Vec& y, double eb)
{
    if (y.size() != qr.q.rows)
        throw std::invalid_argument("make_sphere_problem: observation length mismatch");
    if (!(eb > 0.0))
        throw std::domain_error("make_sphere_problem: eb must be positive");
    SphereProblem p;
    p.r = qr.r;
    p.z = matvec_t(qr.q, y);
    p.dist_offset = std::max(0.0, norm_sq(y) - norm_sq(p.z));
    p.symbol_amp = std::sqrt(eb);
    return p;
}

namespace {

// Depth-first search state shared across levels.
struct Search {
    const Mat& r;
    const Vec& z;
    double offset;
    double amp;
    int n;
    double d_init_sq;
    int capacity;
    CandidateList& list;
    std::uint64_t flops = 0;
    std::uint64_t nodes = 0;
    std::uint64_t leaves = 0;
    double bound_p; // current bound on the accumulated partial distance
    std::vector<double> sym;

    Search(const SphereProblem& p, double d_sq, int cap, CandidateList& l)
        : r(p.r), z(p.z), offset(p.dist_offset), amp(p.symbol_amp),
          n(static_cast<int>(p.r.cols)), d_init_sq(d_sq), capacity(cap), list(l),
          bound_p(0.0), sym(p.r.cols, 0.0)
    {
    }

    // (distance, pattern) strict order used for the kept list.
    static bool entry_less(const CandidateEntry& a, const CandidateEntry& b)
    {
        if (a.squared_distance != b.squared_distance)
            return a.squared_distance < b.squared_distance;
        return a.pattern < b.pattern;
    }

    void accept_leaf(double partial, std::uint32_t pattern)
    {
        const double dist = partial + offset;
        flops += 1;
        CandidateEntry e{dist, pattern};
        const bool at_cap = capacity != kUnbounded &&
                            static_cast<int>(list.entries.size()) >= capacity;
        if (at_cap) {
            if (!entry_less(e, list.entries.back()))
                return; // not better than the current worst kept point
            auto pos = std::upper_bound(list.entries.begin(), list.entries.end(), e, entry_less);
            list.entries.insert(pos, e);
            list.entries.pop_back();
            // radius shrinks to the worst kept distance
            bound_p = list.entries.back().squared_distance - offset;
            flops += 1;
            leaves += 1;
            return;
        }
        if (capacity == kUnbounded) {
            list.entries.push_back(e); // sorted once at the end
        } else {
            auto pos = std::upper_bound(list.entries.begin(), list.entries.end(), e, entry_less);
            list.entries.insert(pos, e);
            if (static_cast<int>(list.entries.size()) == capacity) {
                bound_p = list.entries.back().squared_distance - offset;
                flops += 1;
            }
        }
        leaves += 1;
    }

    void dfs(int i, double pdist, std::uint32_t pattern)
    {
        nodes += 1;
        double xi = 0.0;
        const double* row = r.row(static_cast<std::size_t>(i));
        for (int j = i + 1; j < n; ++j)
            xi += row[j] * sym[static_cast<std::size_t>(j)];
        flops += 2u * static_cast<std::uint64_t>(n - 1 - i);
        const double u = z[static_cast<std::size_t>(i)] - xi;
        flops += 1;

        const double rd = row[i];
        const double best = u >= 0.0 ? amp : -amp;
        for (int child = 0; child < 2; ++child) {
            const double s = child == 0 ? best : -best;
            const double t = u - rd * s;
            const double inc = t * t;
            const double nd = pdist + inc;
            flops += 4;
            if (nd <= bound_p) {
                const std::uint32_t bit = s > 0.0 ? 1u << (n - 1 - i) : 0u;
                if (i == 0) {
                    accept_leaf(nd, pattern | bit);
                } else {
                    sym[static_cast<std::size_t>(i)] = s;
                    dfs(i - 1, nd, pattern | bit);
                }
            } else if (child == 0) {
                break; // the farther sibling cannot be inside either
            }
        }
    }

    void run()
    {
        bound_p = d_init_sq - offset;
        flops += 1;
        if (bound_p < 0.0)
            return; // sphere lies inside the orthogonal residual; nothing can match
        dfs(n - 1, 0.0, 0u);
        if (capacity == kUnbounded)
            std::sort(list.entries.begin(), list.entries.end(), entry_less);
    }
};

CandidateList sphere_search(const SphereProblem& problem, double d_init_sq, int capacity,
                            FlopCounter& flops, SearchStats* stats)
{
    if (problem.r.rows != problem.r.cols || problem.r.cols != problem.z.size())
        throw std::invalid_argument("sphere search: malformed reduced problem");
    check_block_len(static_cast<int>(problem.r.cols), "sphere search");
    if (capacity < 1)
        throw std::invalid_argument("sphere search: capacity must be >= 1");
    if (!(d_init_sq >= 0.0) || !std::isfinite(d_init_sq))
        throw std::invalid_argument("sphere search: squared radius must be finite and >= 0");

    CandidateList list;
    list.block_len = static_cast<int>(problem.r.cols);
    list.capacity = capacity;
    list.symbol_amp = problem.symbol_amp;

    Search s(problem, d_init_sq, capacity, list);
    s.run();
    flops.add(s.flops);
    if (stats) {
        stats->nodes_visited += s.nodes;
        stats->leaves_inside += s.leaves;
    }
    return list;
}

} // namespace

CandidateList list_sphere_search(const SphereProblem& problem, double d_init_sq, int capacity,
                                 FlopCounter& flops, SearchStats* stats)
{
    return sphere_search(problem, d_init_sq, capacity, flops, stats);
}

namespace {

void apply_clamp(LlrVector& l)
{
    for (double& v : l.values) {
        if (v > l.clamp)
            v = l.clamp;
        else if (v < -l.clamp)
            v = -l.clamp;
    }
}

// Streaming log-sum-exp accumulator.
struct LogSum {
    bool any = false;
    double m = 0.0; // running max
    double s = 0.0; // sum of exp(x - m)

    void add(double x)
    {
        if (!any) {
            any = true;
            m = x;
            s = 1.0;
            return;
        }
        if (x <= m) {
            s += std::exp(x - m);
        } else {
            s = s * std::exp(m - x) + 1.0;
            m = x;
        }
    }

    double value() const { return m + std::log(s); }
};

const LlrPriors& resolve_priors(const LlrPriors& priors, std::size_t n, LlrPriors& scratch)
{
    if (priors.empty()) {
        scratch.assign(n, 0.0);
        return scratch;
    }
    if (priors.size() != n)
        throw std::invalid_argument("llr: priors length must match block length");
    return priors;
}

} // namespace

LlrVector exact_llr(const Vec& y, const Mat& h, double sigma_sq, const LlrPriors& priors,
                    double eb, double clamp)
{
    const std::size_t n = h.cols;
    const std::size_t m = h.rows;
    if (y.size() != m)
        throw std::invalid_argument("exact_llr: observation length mismatch");
    if (n > 20)
        throw BlockTooLarge("exact_llr: block length " + std::to_string(n) +
                            " exceeds the exhaustive-enumeration guard (20)");
    if (!(sigma_sq > 0.0))
        throw std::domain_error("exact_llr: sigma_sq must be positive");
    if (!(eb > 0.0))
        throw std::domain_error("exact_llr: eb must be positive");

    LlrPriors scratch;
    const LlrPriors& la = resolve_priors(priors, n, scratch);
    const double amp = std::sqrt(eb);
    const std::uint32_t total = 1u << n;

    // log p(y|x) up to a common constant, plus the full prior exponent
    std::vector<double> metric(total);
    std::vector<double> prior_sum(total);
    Vec residual(m);
    for (std::uint32_t p = 0; p < total; ++p) {
        for (std::size_t i = 0; i < m; ++i)
            residual[i] = y[i];
        double ps = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            const bool plus = (p >> (n - 1 - k)) & 1u;
            const double s = plus ? amp : -amp;
            if (plus)
                ps += la[k];
            for (std::size_t i = 0; i < m; ++i)
                residual[i] -= h(i, k) * s;
        }
        metric[p] = -norm_sq(residual) / (2.0 * sigma_sq);
        prior_sum[p] = ps;
    }

    LlrVector out;
    out.clamp = clamp;
    out.values.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        LogSum plus, minus;
        for (std::uint32_t p = 0; p < total; ++p) {
            const bool is_plus = (p >> (n - 1 - k)) & 1u;
            // prior of the bit in question is factored out of both sums
            const double term = metric[p] + prior_sum[p] - (is_plus ? la[k] : 0.0);
            if (is_plus)
                plus.add(term);
            else
                minus.add(term);
        }
        out.values[k] = la[k] + plus.value() - minus.value();
    }
    apply_clamp(out);
    return out;
}

LlrVector approx_llr(const CandidateList& list, double sigma_sq, const LlrPriors& priors,
                     double clamp)
{
    if (list.entries.empty())
        throw EmptyList("approx_llr: candidate list is empty");
    if (!(sigma_sq > 0.0))
        throw std::domain_error("approx_llr: sigma_sq must be positive");
    const std::size_t n = static_cast<std::size_t>(list.block_len);
    check_block_len(list.block_len, "approx_llr");

    LlrPriors scratch;
    const LlrPriors& la = resolve_priors(priors, n, scratch);

    std::vector<double> metric(list.entries.size());
    std::vector<double> prior_sum(list.entries.size());
    for (std::size_t e = 0; e < list.entries.size(); ++e) {
        metric[e] = -list.entries[e].squared_distance / (2.0 * sigma_sq);
        double ps = 0.0;
        for (std::size_t k = 0; k < n; ++k)
            if ((list.entries[e].pattern >> (n - 1 - k)) & 1u)
                ps += la[k];
        prior_sum[e] = ps;
    }

    LlrVector out;
    out.clamp = clamp;
    out.values.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        LogSum plus, minus;
        for (std::size_t e = 0; e < list.entries.size(); ++e) {
            const bool is_plus = (list.entries[e].pattern >> (n - 1 - k)) & 1u;
            const double term = metric[e] + prior_sum[e] - (is_plus ? la[k] : 0.0);
            if (is_plus)
                plus.add(term);
            else
                minus.add(term);
        }
        if (!plus.any)
            out.values[k] = -clamp;
        else if (!minus.any)
            out.values[k] = clamp;
        else
            out.values[k] = la[k] + plus.value() - minus.value();
    }
    apply_clamp(out);
    return out;
}

double initial_radius_noise(double sigma_sq, int n_rows, double epsilon)
{
    if (!(sigma_sq >= 0.0))
        throw std::domain_error("initial_radius_noise: sigma_sq must be >= 0");
    if (n_rows < 1)
        throw std::invalid_argument("initial_radius_noise: n_rows must be >= 1");
    if (!(epsilon > 0.0 && epsilon < 1.0))
        throw std::domain_error("initial_radius_noise: epsilon must be in (0, 1)");
    return sigma_sq * chi_square_quantile(static_cast<double>(n_rows), 1.0 - epsilon);
}

namespace {

void check_n_list(int n_list, int block_len)
{
    if (n_list < 1)
        throw std::invalid_argument("detect: n_list must be >= 1");
    if (block_len < kMaxBlockLen) {
        const std::int64_t max_points = std::int64_t{1} << block_len;
        if (n_list > max_points)
            throw std::invalid_argument("detect: n_list exceeds the number of lattice points");
    }
}

// Shared growth loop. Both strategies run the identical collect-everything
// search inside the current sphere and then keep the n_list closest points;
// grow maps the current squared radius to the next when the sphere came up
// short. Keeping the search uncapped is what makes the found-point count an
// honest measure of how well the initial radius was chosen.
template <typename GrowFn>
DetectResult detect_loop(const SphereProblem& problem, double d_init_sq, int n_list,
                         GrowFn grow, FlopCounter& flops)
{
    DetectResult res;
    double d_sq = d_init_sq;
    constexpr int kMaxRounds = 10000;
    for (int round = 0;; ++round) {
        if (round >= kMaxRounds)
            throw std::runtime_error("detect: radius growth failed to terminate");
        SearchStats round_stats;
        res.list = list_sphere_search(problem, d_sq, kUnbounded, flops, &round_stats);
        res.stats.rounds += 1;
        res.stats.nodes_visited_total += round_stats.nodes_visited;
        res.stats.leaves_inside_total += round_stats.leaves_inside;
        if (static_cast<int>(res.list.entries.size()) >= n_list) {
            res.stats.final_radius_sq = d_sq;
            break;
        }
        d_sq = grow(d_sq);
    }
    res.stats.pre_truncation_count = res.list.entries.size();
    if (static_cast<int>(res.list.entries.size()) > n_list)
        res.list.entries.resize(static_cast<std::size_t>(n_list)); // keep the closest; ties
                                                                   // already lex-ordered
    res.list.capacity = n_list;
    return res;
}

} // namespace

DetectResult detect(const SphereProblem& problem, const Vec& y, const NoiseSpec& noise,
                    const NoiseRadius& strategy, int n_list, FlopCounter& flops)
{
    check_n_list(n_list, static_cast<int>(problem.r.cols));
    // The search bounds true distances to y, so the coverage radius uses the
    // full observation dimension: ||y - Ha||^2 is chi-square with y.size()
    // degrees of freedom at the transmitted point.
    const double d0 = initial_radius_noise(noise.sigma_sq, static_cast<int>(y.size()),
                                           strategy.epsilon);
    // Restart with a doubled squared radius when the sphere held fewer than
    // n_list points (the small absolute floor keeps a zero radius growing).
    return detect_loop(problem, d0, n_list,
                       [](double d_sq) { return 2.0 * d_sq + 1e-12; }, flops);
}

DetectResult detect(const SphereProblem& problem, const Vec& y, const NoiseSpec& noise,
                    const LearnedRadius& strategy, int n_list, FlopCounter& flops)
{
    check_n_list(n_list, static_cast<int>(problem.r.cols));
    if (strategy.model == nullptr)
        throw std::invalid_argument("detect: learned strategy needs a model");
    if (!(strategy.delta_d > 0.0) || !std::isfinite(strategy.delta_d))
        throw std::invalid_argument("detect: delta_d must be positive and finite");

    double d = forward(*strategy.model, y);
    bool fallback = false;
    if (!std::isfinite(d) || d <= 0.0) {
        // fall back to the noise radius when the predictor misbehaves
        if (!(noise.sigma_sq > 0.0))
            throw NonFiniteRadius("detect: predicted radius unusable and no noise fallback");
        d = std::sqrt(initial_radius_noise(noise.sigma_sq, static_cast<int>(y.size()), 0.01));
        fallback = true;
    }
    const double delta = strategy.delta_d;
    // Radius grows additively in distance; the search consumes it squared.
    // The growth sequence is reconstructed from the current squared value so
    // the loop interface stays a plain squared-radius mapping.
    auto res = detect_loop(problem, d * d, n_list,
                           [delta](double d_sq) {
                               const double grown = std::sqrt(d_sq) + delta;
                               return grown * grown;
                           },
                           flops);
    res.stats.used_fallback_radius = fallback;
    res.stats.nn_flops = forward_flop_count(*strategy.model);
    return res;
}

DetectResult learned_radius_detect(const Mat& h, const Vec& y, const NnModel& model,
                                   double delta_d, int n_list, FlopCounter& flops,
                                   const NoiseSpec& noise, double eb)
{
    const QrFactors qr = qr_factorize(h);
    const SphereProblem problem = make_sphere_problem(qr, y, eb);
    LearnedRadius strategy;
    strategy.model = &model;
    strategy.delta_d = delta_d;
    return detect(problem, y, noise, strategy, n_list, flops);
}

double complexity_report(std::uint64_t flops_learned, std::uint64_t flops_noise)
{
    if (flops_noise == 0)
        throw std::domain_error("complexity_report: reference flop count is zero");
    return static_cast<double>(flops_learned) / static_cast<double>(flops_noise);
}

} // namespace ftn
