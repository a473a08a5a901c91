#include "ftn/sim.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "ftn/detector.hpp"
#include "ftn/errors.hpp"
#include "ftn/fec.hpp"
#include "ftn/link.hpp"
#include "ftn/pulse.hpp"
#include "ftn/rng.hpp"

namespace ftn {

namespace {

// Floor applied to sigma^2 inside the LLR computation only, so a noiseless
// run still yields finite (fully saturated) soft values.
constexpr double kLlrSigmaFloor = 1e-30;

struct LinkSetup {
    Mat h;
    QrFactors qr;
};

LinkSetup make_link(double tau, double beta_signal, double beta_basis, double symbol_time,
                    int num_taps, int block_len)
{
    PulseSpec signal{beta_signal, symbol_time};
    PulseSpec basis{beta_basis, tau * symbol_time};
    // The compression region is a hard gate. The basis flat band can fall a
    // little short of the signal band near the region edge (e.g. tau = 0.74);
    // there the sampled taps remain the model, so force the expansion.
    if (!operation_region_ok(tau, signal.rolloff))
        throw OperationRegionViolation("simulate: tau=" + std::to_string(tau) +
                                       " not below 1/(1+rolloff)=" +
                                       std::to_string(1.0 / (1.0 + signal.rolloff)));
    const BasisExpansion exp = basis_coefficients(signal, basis, tau, num_taps,
                                                  /*force=*/true);
    LinkSetup s;
    s.h = build_isi_matrix(exp.coefficients, block_len);
    s.qr = qr_factorize(s.h);
    return s;
}

std::vector<int> random_bits(int n, std::uint64_t seed)
{
    auto gen = make_rng(seed);
    std::vector<int> bits(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        bits[static_cast<std::size_t>(i)] = static_cast<int>(gen() & 1u);
    return bits;
}

struct SidePartial {
    std::uint64_t bit_errors = 0;
    std::uint64_t flops = 0;
    std::uint64_t list_size = 0; // returned entries, after truncation
    std::uint64_t pretrunc = 0;
    std::uint64_t leaves = 0;
    std::uint64_t rounds = 0;
    std::uint64_t nn_flops = 0;
    std::uint64_t fallbacks = 0;
};

struct FramePartial {
    std::uint64_t bits = 0;
    std::uint64_t blocks = 0;
    SidePartial noise_side;
    SidePartial learned_side;
};

void absorb_stats(SidePartial& side, const DetectStats& st)
{
    side.pretrunc += st.pre_truncation_count;
    side.leaves += st.leaves_inside_total;
    side.rounds += static_cast<std::uint64_t>(st.rounds);
    side.nn_flops += st.nn_flops;
    if (st.used_fallback_radius)
        side.fallbacks += 1;
}

// Detect with both strategies on one received block; returns soft values.
void detect_block(const LinkSetup& link, const Vec& y, const NoiseSpec& noise,
                  const ExperimentConfig& cfg, const NnModel* model, FramePartial& out,
                  Vec& llr_noise, Vec& llr_learned)
{
    const SphereProblem problem = make_sphere_problem(link.qr, y, cfg.eb);
    const double sigma_llr = std::max(noise.sigma_sq, kLlrSigmaFloor);

    {
        FlopCounter fc;
        NoiseRadius strategy{cfg.epsilon};
        const DetectResult res = detect(problem, y, noise, strategy, cfg.n_list, fc);
        out.noise_side.flops += fc.count;
        out.noise_side.list_size += res.list.entries.size();
        absorb_stats(out.noise_side, res.stats);
        llr_noise = approx_llr(res.list, sigma_llr, {}).values;
    }
    if (model) {
        FlopCounter fc;
        LearnedRadius strategy{model, model->delta_d};
        const DetectResult res = detect(problem, y, noise, strategy, cfg.n_list, fc);
        out.learned_side.flops += fc.count;
        out.learned_side.list_size += res.list.entries.size();
        absorb_stats(out.learned_side, res.stats);
        llr_learned = approx_llr(res.list, sigma_llr, {}).values;
    }
    out.blocks += 1;
}

std::uint64_t count_bit_errors(const std::vector<int>& sent, const std::vector<int>& decided)
{
    std::uint64_t e = 0;
    for (std::size_t i = 0; i < sent.size(); ++i)
        e += sent[i] != decided[i];
    return e;
}

std::vector<int> hard_bits(const Vec& llr)
{
    std::vector<int> bits(llr.size());
    for (std::size_t i = 0; i < llr.size(); ++i)
        bits[i] = llr[i] > 0.0 ? 1 : 0;
    return bits;
}

FramePartial run_uncoded_frame(const LinkSetup& link, const ExperimentConfig& cfg,
                               const NoiseSpec& noise, const NnModel* model,
                               std::uint64_t frame_seed)
{
    FramePartial out;
    const std::vector<int> bits = random_bits(cfg.block_len, derive_seed(frame_seed, 1));
    const Vec symbols = map_bits(bits, cfg.eb);
    const Vec y = transmit(link.h, symbols, noise, derive_seed(frame_seed, 2));

    Vec llr_noise, llr_learned;
    detect_block(link, y, noise, cfg, model, out, llr_noise, llr_learned);

    out.bits = static_cast<std::uint64_t>(cfg.block_len);
    out.noise_side.bit_errors += count_bit_errors(bits, hard_bits(llr_noise));
    if (model)
        out.learned_side.bit_errors += count_bit_errors(bits, hard_bits(llr_learned));
    return out;
}

FramePartial run_coded_frame(const LinkSetup& link, const ExperimentConfig& cfg,
                             const NoiseSpec& noise, const NnModel* model,
                             const Interleaver& il, std::uint64_t frame_seed)
{
    FramePartial out;
    const ConvCode code;
    const std::vector<int> info = random_bits(cfg.info_bits, derive_seed(frame_seed, 1));
    const std::vector<int> coded = conv_encode(code, info);
    const std::vector<int> mixed = interleave(il, coded);

    const int n = cfg.block_len;
    const int num_blocks = (static_cast<int>(mixed.size()) + n - 1) / n;
    const int padded_len = num_blocks * n;

    std::vector<int> tx = mixed;
    tx.resize(static_cast<std::size_t>(padded_len), 0); // pad bits carry no data

    Vec soft_noise(static_cast<std::size_t>(padded_len), 0.0);
    Vec soft_learned(static_cast<std::size_t>(padded_len), 0.0);
    for (int b = 0; b < num_blocks; ++b) {
        const std::vector<int> block_bits(tx.begin() + static_cast<std::ptrdiff_t>(b) * n,
                                          tx.begin() + static_cast<std::ptrdiff_t>(b + 1) * n);
        const Vec symbols = map_bits(block_bits, cfg.eb);
        const Vec y = transmit(link.h, symbols, noise,
                               derive_seed(frame_seed, 100 + static_cast<std::uint64_t>(b)));
        Vec llr_noise, llr_learned;
        detect_block(link, y, noise, cfg, model, out, llr_noise, llr_learned);
        for (int i = 0; i < n; ++i) {
            soft_noise[static_cast<std::size_t>(b * n + i)] = llr_noise[static_cast<std::size_t>(i)];
            if (model)
                soft_learned[static_cast<std::size_t>(b * n + i)] =
                    llr_learned[static_cast<std::size_t>(i)];
        }
    }

    auto decode_side = [&](const Vec& soft) {
        Vec clipped(soft.begin(), soft.begin() + static_cast<std::ptrdiff_t>(coded.size()));
        const Vec llrs = deinterleave(il, clipped);
        return viterbi_decode_soft(code, llrs);
    };
    out.bits = static_cast<std::uint64_t>(cfg.info_bits);
    out.noise_side.bit_errors += count_bit_errors(info, decode_side(soft_noise));
    if (model)
        out.learned_side.bit_errors += count_bit_errors(info, decode_side(soft_learned));
    return out;
}

double ratio_or_nan(double num, double den)
{
    return den > 0.0 ? num / den : std::numeric_limits<double>::quiet_NaN();
}

} // namespace

std::vector<ResultRow> run_simulate(const ExperimentConfig& config,
                                    const std::vector<const NnModel*>& models,
                                    const std::function<void(const std::string&)>& log)
{
    if (config.ebn0_db.empty())
        throw std::invalid_argument("run_simulate: empty Eb/N0 grid");
    if (!models.empty() && models.size() != config.ebn0_db.size())
        throw std::invalid_argument("run_simulate: models must align with the Eb/N0 grid");
    if (config.num_frames < 1)
        throw std::invalid_argument("run_simulate: num_frames must be >= 1");

    const LinkSetup link = make_link(config.tau, config.beta_signal, config.beta_basis,
                                     config.symbol_time, config.num_taps, config.block_len);
    const double code_rate =
        config.coded ? static_cast<double>(config.info_bits) /
                           static_cast<double>(2 * (config.info_bits + 6))
                     : 1.0;
    const Interleaver il =
        config.coded
            ? Interleaver::make(static_cast<std::size_t>(2 * (config.info_bits + 6)),
                                derive_seed(config.seed, 0x1eaf))
            : Interleaver{};

    for (const NnModel* m : models) {
        if (!m)
            continue;
        if (m->block_len != config.block_len)
            throw std::invalid_argument("run_simulate: model block_len does not match config");
        if (std::fabs(m->tau - config.tau) > 1e-12)
            throw std::invalid_argument("run_simulate: model tau does not match config");
        if (m->list_size != config.n_list)
            throw std::invalid_argument("run_simulate: model list size does not match config");
    }

    std::vector<ResultRow> rows;
    for (std::size_t point = 0; point < config.ebn0_db.size(); ++point) {
        const double ebn0 = config.ebn0_db[point];
        const NnModel* model = models.empty() ? nullptr : models[point];
        const NoiseSpec noise = ebn0_to_sigma(ebn0, config.eb, code_rate);
        const std::uint64_t point_seed = derive_seed(config.seed, 1 + point);

        if (log) {
            std::ostringstream msg;
            msg << "point tau=" << config.tau << " ebn0_db=" << ebn0 << " frames="
                << config.num_frames << (model ? " (learned + noise)" : " (noise only)");
            log(msg.str());
        }

        const std::size_t num_frames = static_cast<std::size_t>(config.num_frames);
        std::vector<FramePartial> partials(num_frames);
        std::atomic<std::size_t> next{0};
        auto worker = [&]() {
            for (;;) {
                const std::size_t f = next.fetch_add(1);
                if (f >= num_frames)
                    return;
                const std::uint64_t frame_seed = derive_seed(point_seed, f);
                partials[f] = config.coded
                                  ? run_coded_frame(link, config, noise, model, il, frame_seed)
                                  : run_uncoded_frame(link, config, noise, model, frame_seed);
            }
        };
        const int workers = std::max(1, config.num_workers);
        if (workers == 1) {
            worker();
        } else {
            std::vector<std::thread> pool;
            for (int w = 0; w < workers; ++w)
                pool.emplace_back(worker);
            for (auto& th : pool)
                th.join();
        }

        ResultRow row;
        row.tau = config.tau;
        row.ebn0_db = ebn0;
        row.code_rate = code_rate;
        row.frames = num_frames;
        row.learned_ran = model != nullptr;
        for (const FramePartial& p : partials) { // fixed order, any worker count
            row.blocks += p.blocks;
            row.bits += p.bits;
            row.bit_errors_noise += p.noise_side.bit_errors;
            row.bit_errors_learned += p.learned_side.bit_errors;
            row.search_flops_noise += p.noise_side.flops;
            row.search_flops_learned += p.learned_side.flops;
            row.avg_list_size_noise += static_cast<double>(p.noise_side.list_size);
            row.avg_list_size_learned += static_cast<double>(p.learned_side.list_size);
            row.avg_pretrunc_noise += static_cast<double>(p.noise_side.pretrunc);
            row.avg_pretrunc_learned += static_cast<double>(p.learned_side.pretrunc);
            row.avg_leaves_noise += static_cast<double>(p.noise_side.leaves);
            row.avg_leaves_learned += static_cast<double>(p.learned_side.leaves);
            row.avg_rounds_noise += static_cast<double>(p.noise_side.rounds);
            row.avg_rounds_learned += static_cast<double>(p.learned_side.rounds);
            row.avg_nn_flops += static_cast<double>(p.learned_side.nn_flops);
            row.fallback_fraction += static_cast<double>(p.learned_side.fallbacks);
        }
        const double blocks = static_cast<double>(row.blocks);
        row.ber_noise = ratio_or_nan(static_cast<double>(row.bit_errors_noise),
                                     static_cast<double>(row.bits));
        row.avg_flops_noise = static_cast<double>(row.search_flops_noise) / blocks;
        row.avg_list_size_noise /= blocks;
        row.avg_pretrunc_noise /= blocks;
        row.avg_leaves_noise /= blocks;
        row.avg_rounds_noise /= blocks;
        if (row.learned_ran) {
            row.ber_learned = ratio_or_nan(static_cast<double>(row.bit_errors_learned),
                                           static_cast<double>(row.bits));
            row.avg_flops_learned = static_cast<double>(row.search_flops_learned) / blocks;
            row.flop_ratio = complexity_report(row.search_flops_learned,
                                               row.search_flops_noise);
            row.avg_nn_flops /= blocks;
            row.avg_list_size_learned /= blocks;
            row.avg_pretrunc_learned /= blocks;
            row.avg_leaves_learned /= blocks;
            row.avg_rounds_learned /= blocks;
            row.fallback_fraction /= blocks;
        } else {
            const double nan = std::numeric_limits<double>::quiet_NaN();
            row.ber_learned = nan;
            row.avg_flops_learned = nan;
            row.flop_ratio = nan;
            row.avg_nn_flops = nan;
            row.avg_list_size_learned = nan;
            row.avg_pretrunc_learned = nan;
            row.avg_leaves_learned = nan;
            row.avg_rounds_learned = nan;
            row.fallback_fraction = nan;
        }
        rows.push_back(row);
    }
    return rows;
}

void save_results_csv(const std::vector<ResultRow>& rows, const std::string& path)
{
    std::ofstream out(path);
    if (!out)
        throw IoError("save_results_csv: cannot open " + path);
    auto num = [](double x) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.12g", x);
        return std::string(buf);
    };
    out << "# schema: ftn_results 1\n";
    out << "tau,ebn0_db,code_rate,frames,blocks,bits,"
           "bit_errors_noise,bit_errors_learned,ber_noise,ber_learned,"
           "search_flops_noise,search_flops_learned,avg_flops_noise,avg_flops_learned,"
           "flop_ratio,avg_nn_flops,avg_list_size_noise,avg_list_size_learned,"
           "avg_pretrunc_noise,avg_pretrunc_learned,"
           "avg_leaves_noise,avg_leaves_learned,avg_rounds_noise,avg_rounds_learned,"
           "fallback_fraction,learned_ran\n";
    for (const ResultRow& r : rows) {
        out << num(r.tau) << ',' << num(r.ebn0_db) << ',' << num(r.code_rate) << ','
            << r.frames << ',' << r.blocks << ',' << r.bits << ',' << r.bit_errors_noise
            << ',' << r.bit_errors_learned << ',' << num(r.ber_noise) << ','
            << num(r.ber_learned) << ',' << r.search_flops_noise << ','
            << r.search_flops_learned << ',' << num(r.avg_flops_noise) << ','
            << num(r.avg_flops_learned) << ',' << num(r.flop_ratio) << ','
            << num(r.avg_nn_flops) << ',' << num(r.avg_list_size_noise) << ','
            << num(r.avg_list_size_learned) << ',' << num(r.avg_pretrunc_noise) << ','
            << num(r.avg_pretrunc_learned) << ',' << num(r.avg_leaves_noise) << ','
            << num(r.avg_leaves_learned) << ',' << num(r.avg_rounds_noise) << ','
            << num(r.avg_rounds_learned) << ',' << num(r.fallback_fraction) << ','
            << (r.learned_ran ? 1 : 0) << '\n';
    }
    if (!out)
        throw IoError("save_results_csv: write failed for " + path);
}

TrainingSet generate_training_set(const DataGenConfig& config)
{
    if (config.num_blocks < 1)
        throw std::invalid_argument("generate_training_set: num_blocks must be >= 1");
    const LinkSetup link = make_link(config.tau, config.beta_signal, config.beta_basis,
                                     config.symbol_time, config.num_taps, config.block_len);
    const NoiseSpec noise = ebn0_to_sigma(config.ebn0_db, config.eb, config.code_rate);

    TrainingSet set;
    set.reserve(static_cast<std::size_t>(config.num_blocks));
    for (int b = 0; b < config.num_blocks; ++b) {
        const std::uint64_t s = derive_seed(config.seed, static_cast<std::uint64_t>(b));
        const std::vector<int> bits = random_bits(config.block_len, derive_seed(s, 1));
        const Vec symbols = map_bits(bits, config.eb);
        const Vec y = transmit(link.h, symbols, noise, derive_seed(s, 2));
        const SphereProblem problem = make_sphere_problem(link.qr, y, config.eb);
        FlopCounter fc;
        NoiseRadius strategy{config.epsilon};
        const DetectResult res = detect(problem, y, noise, strategy, config.n_list, fc);
        TrainingSample sample;
        sample.y = y;
        sample.radius = std::sqrt(res.list.entries.back().squared_distance);
        set.push_back(std::move(sample));
    }
    return set;
}

namespace {

bool parse_bool(const std::string& v)
{
    if (v == "1" || v == "true" || v == "yes")
        return true;
    if (v == "0" || v == "false" || v == "no")
        return false;
    throw std::invalid_argument("config: boolean value must be 0/1/true/false, got '" + v + "'");
}

std::vector<double> parse_double_list(const std::string& v)
{
    std::vector<double> out;
    std::stringstream ss(v);
    std::string cell;
    while (std::getline(ss, cell, ','))
        if (!cell.empty())
            out.push_back(std::stod(cell));
    return out;
}

} // namespace

ExperimentConfig parse_experiment_config(const std::map<std::string, std::string>& kv)
{
    ExperimentConfig c;
    for (const auto& [key, value] : kv) {
        if (key == "tau")
            c.tau = std::stod(value);
        else if (key == "beta_signal")
            c.beta_signal = std::stod(value);
        else if (key == "beta_basis")
            c.beta_basis = std::stod(value);
        else if (key == "symbol_time")
            c.symbol_time = std::stod(value);
        else if (key == "block_len")
            c.block_len = std::stoi(value);
        else if (key == "num_taps")
            c.num_taps = std::stoi(value);
        else if (key == "n_list")
            c.n_list = std::stoi(value);
        else if (key == "eb")
            c.eb = std::stod(value);
        else if (key == "epsilon")
            c.epsilon = std::stod(value);
        else if (key == "coded")
            c.coded = parse_bool(value);
        else if (key == "info_bits")
            c.info_bits = std::stoi(value);
        else if (key == "ebn0_db")
            c.ebn0_db = parse_double_list(value);
        else if (key == "num_frames")
            c.num_frames = std::stoi(value);
        else if (key == "seed")
            c.seed = std::stoull(value);
        else if (key == "workers")
            c.num_workers = std::stoi(value);
        else if (key == "model_files" || key == "model_file" || key == "output")
            ; // consumed by the command-line layer
        else
            throw std::invalid_argument("config: unknown key '" + key + "'");
    }
    if (c.num_workers == 0)
        c.num_workers = static_cast<int>(std::thread::hardware_concurrency());
    return c;
}

DataGenConfig parse_datagen_config(const std::map<std::string, std::string>& kv)
{
    DataGenConfig c;
    for (const auto& [key, value] : kv) {
        if (key == "tau")
            c.tau = std::stod(value);
        else if (key == "beta_signal")
            c.beta_signal = std::stod(value);
        else if (key == "beta_basis")
            c.beta_basis = std::stod(value);
        else if (key == "symbol_time")
            c.symbol_time = std::stod(value);
        else if (key == "block_len")
            c.block_len = std::stoi(value);
        else if (key == "num_taps")
            c.num_taps = std::stoi(value);
        else if (key == "n_list")
            c.n_list = std::stoi(value);
        else if (key == "eb")
            c.eb = std::stod(value);
        else if (key == "epsilon")
            c.epsilon = std::stod(value);
        else if (key == "ebn0_db")
            c.ebn0_db = std::stod(value);
        else if (key == "code_rate")
            c.code_rate = std::stod(value);
        else if (key == "num_blocks")
            c.num_blocks = std::stoi(value);
        else if (key == "seed")
            c.seed = std::stoull(value);
        else if (key == "output")
            ; // consumed by the command-line layer
        else
            throw std::invalid_argument("config: unknown key '" + key + "'");
    }
    return c;
}

} // namespace ftn
