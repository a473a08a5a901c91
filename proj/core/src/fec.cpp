#include "ftn/fec.hpp"

#include <bit>
#include <limits>
#include <stdexcept>

namespace ftn {

namespace {

void check_code(const ConvCode& code)
{
    if (code.constraint_length < 2 || code.constraint_length > 16)
        throw std::invalid_argument("conv code: constraint_length out of range");
    const unsigned mask = (1u << code.constraint_length) - 1u;
    for (unsigned g : code.generators)
        if (g == 0 || (g & ~mask) != 0)
            throw std::invalid_argument("conv code: generator does not fit constraint length");
}

inline int parity(unsigned x) { return std::popcount(x) & 1; }

} // namespace

std::vector<int> conv_encode(const ConvCode& code, const std::vector<int>& info_bits)
{
    check_code(code);
    const int mem = code.constraint_length - 1;
    std::vector<int> out;
    out.reserve(2 * (info_bits.size() + static_cast<std::size_t>(mem)));

    unsigned state = 0; // previous inputs, most recent at the high bit
    auto push = [&](int u) {
        const unsigned reg = (static_cast<unsigned>(u) << mem) | state;
        out.push_back(parity(reg & code.generators[0]));
        out.push_back(parity(reg & code.generators[1]));
        state = reg >> 1;
    };

    for (int u : info_bits) {
        if (u != 0 && u != 1)
            throw std::invalid_argument("conv_encode: bits must be 0 or 1");
        push(u);
    }
    for (int i = 0; i < mem; ++i)
        push(0); // zero tail drives the register back to state 0
    return out;
}

std::vector<int> viterbi_decode_soft(const ConvCode& code, const std::vector<double>& llrs)
{
    check_code(code);
    if (llrs.size() % 2 != 0)
        throw std::invalid_argument("viterbi_decode_soft: llr count must be even");
    const int mem = code.constraint_length - 1;
    const std::size_t steps = llrs.size() / 2;
    if (steps < static_cast<std::size_t>(mem))
        throw std::invalid_argument("viterbi_decode_soft: codeword shorter than the tail");

    const std::size_t num_states = 1u << mem;
    const double neg_inf = -std::numeric_limits<double>::infinity();

    // Precompute per-(state, input) output bits.
    std::vector<std::array<int, 2>> out0(num_states), out1(num_states);
    std::vector<std::array<std::size_t, 2>> next(num_states);
    for (std::size_t s = 0; s < num_states; ++s) {
        for (unsigned u = 0; u < 2; ++u) {
            const unsigned reg = (u << mem) | static_cast<unsigned>(s);
            const int o0 = parity(reg & code.generators[0]);
            const int o1 = parity(reg & code.generators[1]);
            if (u == 0)
                out0[s] = {o0, o1};
            else
                out1[s] = {o0, o1};
            next[s][u] = reg >> 1;
        }
    }

    std::vector<double> metric(num_states, neg_inf), metric_next(num_states);
    metric[0] = 0.0; // encoder starts in the zero state
    std::vector<std::vector<std::uint8_t>> decision(steps, std::vector<std::uint8_t>(num_states, 0));
    std::vector<std::vector<std::uint8_t>> prev_state_bit(steps, std::vector<std::uint8_t>(num_states, 0));

    for (std::size_t t = 0; t < steps; ++t) {
        const double l0 = llrs[2 * t];
        const double l1 = llrs[2 * t + 1];
        std::fill(metric_next.begin(), metric_next.end(), neg_inf);
        for (std::size_t s = 0; s < num_states; ++s) {
            if (metric[s] == neg_inf)
                continue;
            for (unsigned u = 0; u < 2; ++u) {
                const auto& ob = u ? out1[s] : out0[s];
                const double branch = (ob[0] ? 0.5 * l0 : -0.5 * l0) + (ob[1] ? 0.5 * l1 : -0.5 * l1);
                const double cand = metric[s] + branch;
                const std::size_t ns = next[s][u];
                // strict > keeps the first (lower-state, input-0) path on ties
                if (cand > metric_next[ns]) {
                    metric_next[ns] = cand;
                    decision[t][ns] = static_cast<std::uint8_t>(u);
                    prev_state_bit[t][ns] = static_cast<std::uint8_t>(s & 1u);
                }
            }
        }
        metric.swap(metric_next);
    }

    // Zero tail: trace back from state 0.
    std::vector<int> bits(steps);
    std::size_t s = 0;
    for (std::size_t t = steps; t-- > 0;) {
        const unsigned u = decision[t][s];
        bits[t] = static_cast<int>(u);
        // predecessor: shift the input back in from the top, restore low bit
        s = ((s << 1) | prev_state_bit[t][s]) & (num_states - 1);
        // the bit that falls off the top must equal u by construction
    }

    bits.resize(steps - static_cast<std::size_t>(mem)); // strip the tail
    return bits;
}

} // namespace ftn
