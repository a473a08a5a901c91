#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <unistd.h>
#include <vector>

#include "ftn/errors.hpp"
#include "ftn/link.hpp"
#include "ftn/pulse.hpp"
#include "ftn/radius_net.hpp"
#include "ftn/sim.hpp"

using namespace ftn;

namespace {

using KV = std::map<std::string, std::string>;

Mat rebuild_channel(double tau, int block_len, int num_taps)
{
    const PulseSpec signal{0.35, 1.0};
    const PulseSpec basis{0.12, tau};
    const BasisExpansion exp = basis_coefficients(signal, basis, tau, num_taps, true);
    return build_isi_matrix(exp.coefficients, block_len);
}

// constant-radius predictor shaped for the given experiment geometry
NnModel flat_predictor(const ExperimentConfig& cfg, double radius)
{
    NnModel m = make_model(cfg.block_len + cfg.num_taps - 1, 1, 4, 4, 3);
    for (double& w : m.w1x.a) w = 0.0;
    for (double& w : m.w1h.a) w = 0.0;
    for (double& w : m.w2x.a) w = 0.0;
    for (double& w : m.w2h.a) w = 0.0;
    for (double& w : m.w3.a) w = 0.0;
    for (double& w : m.w4) w = 0.0;
    m.b4 = radius;
    m.delta_d = 0.5;
    m.tau = cfg.tau;
    m.block_len = cfg.block_len;
    m.list_size = cfg.n_list;
    return m;
}

bool rows_identical(const ResultRow& a, const ResultRow& b)
{
    auto same = [](double x, double y) {
        return (std::isnan(x) && std::isnan(y)) || x == y;
    };
    return same(a.tau, b.tau) && same(a.ebn0_db, b.ebn0_db) && same(a.code_rate, b.code_rate) &&
           a.frames == b.frames && a.blocks == b.blocks && a.bits == b.bits &&
           a.bit_errors_noise == b.bit_errors_noise &&
           a.bit_errors_learned == b.bit_errors_learned && same(a.ber_noise, b.ber_noise) &&
           same(a.ber_learned, b.ber_learned) &&
           a.search_flops_noise == b.search_flops_noise &&
           a.search_flops_learned == b.search_flops_learned &&
           same(a.avg_flops_noise, b.avg_flops_noise) &&
           same(a.avg_flops_learned, b.avg_flops_learned) &&
           same(a.flop_ratio, b.flop_ratio) && same(a.avg_nn_flops, b.avg_nn_flops) &&
           same(a.avg_list_size_noise, b.avg_list_size_noise) &&
           same(a.avg_list_size_learned, b.avg_list_size_learned) &&
           same(a.avg_pretrunc_noise, b.avg_pretrunc_noise) &&
           same(a.avg_pretrunc_learned, b.avg_pretrunc_learned) &&
           same(a.avg_leaves_noise, b.avg_leaves_noise) &&
           same(a.avg_leaves_learned, b.avg_leaves_learned) &&
           same(a.avg_rounds_noise, b.avg_rounds_noise) &&
           same(a.avg_rounds_learned, b.avg_rounds_learned) &&
           same(a.fallback_fraction, b.fallback_fraction) && a.learned_ran == b.learned_ran;
}

std::string temp_csv(const std::string& tag)
{
    static int counter = 0;
    std::ostringstream ss;
    ss << "ftn_sim_test_" << static_cast<unsigned long>(::getpid()) << "_" << tag << "_"
       << counter++ << ".csv";
    return ss.str();
}

std::string read_text(const std::string& path)
{
    std::ifstream in(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_SUITE("sim") {

TEST_CASE("experiment config parsing")
{
    SUBCASE("defaults survive an empty map") {
        const ExperimentConfig c = parse_experiment_config({});
        CHECK(c.tau == 0.6);
        CHECK(c.block_len == 25);
        CHECK(c.num_taps == 20);
        CHECK(c.n_list == 32);
        CHECK(c.coded == false);
        CHECK(c.info_bits == 244);
        CHECK(c.num_frames == 100);
        CHECK(c.num_workers == 1);
        CHECK(c.ebn0_db.empty());
    }
    SUBCASE("overrides and list values") {
        const KV kv{{"tau", "0.74"},   {"block_len", "8"}, {"n_list", "16"},
                    {"coded", "true"}, {"ebn0_db", "4,6,8"}, {"seed", "99"},
                    {"workers", "3"},  {"num_frames", "7"}, {"info_bits", "30"}};
        const ExperimentConfig c = parse_experiment_config(kv);
        CHECK(c.tau == 0.74);
        CHECK(c.block_len == 8);
        CHECK(c.n_list == 16);
        CHECK(c.coded == true);
        REQUIRE(c.ebn0_db.size() == 3);
        CHECK(c.ebn0_db[0] == 4.0);
        CHECK(c.ebn0_db[1] == 6.0);
        CHECK(c.ebn0_db[2] == 8.0);
        CHECK(c.seed == 99);
        CHECK(c.num_workers == 3);
        CHECK(c.num_frames == 7);
        CHECK(c.info_bits == 30);
    }
    SUBCASE("boolean spellings") {
        CHECK(parse_experiment_config({{"coded", "1"}}).coded);
        CHECK(parse_experiment_config({{"coded", "yes"}}).coded);
        CHECK_FALSE(parse_experiment_config({{"coded", "0"}}).coded);
        CHECK_FALSE(parse_experiment_config({{"coded", "false"}}).coded);
        CHECK_THROWS_AS(parse_experiment_config({{"coded", "maybe"}}), std::invalid_argument);
    }
    SUBCASE("unknown keys are rejected") {
        CHECK_THROWS_AS(parse_experiment_config({{"tua", "0.6"}}), std::invalid_argument);
    }
    SUBCASE("zero workers resolves to the hardware count") {
        const ExperimentConfig c = parse_experiment_config({{"workers", "0"}});
        CHECK(c.num_workers == static_cast<int>(std::thread::hardware_concurrency()));
    }
    SUBCASE("file-layer keys pass through silently") {
        const ExperimentConfig c = parse_experiment_config(
            {{"model_files", "a.txt,b.txt"}, {"output", "r.csv"}});
        CHECK(c.tau == 0.6);
    }
}

TEST_CASE("data-generation config parsing")
{
    const DataGenConfig d = parse_datagen_config({});
    CHECK(d.tau == 0.6);
    CHECK(d.num_blocks == 1000);
    CHECK(d.code_rate == 1.0);
    CHECK(d.ebn0_db == 8.0);

    const DataGenConfig e = parse_datagen_config(
        {{"tau", "0.74"}, {"num_blocks", "50"}, {"code_rate", "0.488"}, {"ebn0_db", "6"}});
    CHECK(e.tau == 0.74);
    CHECK(e.num_blocks == 50);
    CHECK(e.code_rate == 0.488);
    CHECK(e.ebn0_db == 6.0);

    CHECK_THROWS_AS(parse_datagen_config({{"coded", "1"}}), std::invalid_argument);
}

TEST_CASE("training targets are the distance of the last kept point")
{
    DataGenConfig cfg;
    cfg.tau = 0.6;
    cfg.block_len = 8;
    cfg.num_taps = 6;
    cfg.n_list = 16;
    cfg.ebn0_db = 6.0;
    cfg.num_blocks = 30;
    cfg.seed = 77;
    const TrainingSet set = generate_training_set(cfg);
    REQUIRE(set.size() == 30);

    const Mat h = rebuild_channel(cfg.tau, cfg.block_len, cfg.num_taps);
    REQUIRE(h.rows == 13);
    for (const TrainingSample& s : set) {
        REQUIRE(s.y.size() == h.rows);
        // brute-force every block's distance to this sample's observation
        std::vector<double> dists;
        for (std::uint32_t p = 0; p < (1u << 8); ++p) {
            Vec a(8);
            for (int k = 0; k < 8; ++k)
                a[static_cast<std::size_t>(k)] = ((p >> (7 - k)) & 1u) ? 1.0 : -1.0;
            const Vec ha = matvec(h, a);
            double d = 0.0;
            for (std::size_t i = 0; i < s.y.size(); ++i)
                d += (s.y[i] - ha[i]) * (s.y[i] - ha[i]);
            dists.push_back(d);
        }
        std::sort(dists.begin(), dists.end());
        CHECK(s.radius ==
              doctest::Approx(std::sqrt(dists[static_cast<std::size_t>(cfg.n_list - 1)]))
                  .epsilon(1e-9));
    }
}

TEST_CASE("data generation is seed-reproducible")
{
    DataGenConfig cfg;
    cfg.block_len = 6;
    cfg.num_taps = 4;
    cfg.n_list = 8;
    cfg.num_blocks = 10;
    cfg.seed = 5;
    const TrainingSet a = generate_training_set(cfg);
    const TrainingSet b = generate_training_set(cfg);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].y == b[i].y);
        CHECK(a[i].radius == b[i].radius);
    }
    cfg.seed = 6;
    const TrainingSet c = generate_training_set(cfg);
    bool different = false;
    for (std::size_t i = 0; i < a.size(); ++i)
        different = different || a[i].y != c[i].y;
    CHECK(different);

    cfg.num_blocks = 0;
    CHECK_THROWS_AS(generate_training_set(cfg), std::invalid_argument);
}

TEST_CASE("uncoded simulation without a model")
{
    ExperimentConfig cfg;
    cfg.block_len = 8;
    cfg.num_taps = 6;
    cfg.n_list = 16;
    cfg.ebn0_db = {4.0, 8.0};
    cfg.num_frames = 20;
    cfg.seed = 11;
    const std::vector<ResultRow> rows = run_simulate(cfg, {});
    REQUIRE(rows.size() == 2);
    for (const ResultRow& r : rows) {
        CHECK(r.frames == 20);
        CHECK(r.blocks == 20);
        CHECK(r.bits == 160);
        CHECK(r.code_rate == 1.0);
        CHECK_FALSE(r.learned_ran);
        // growth guarantees a full list; the sphere itself may hold more
        CHECK(r.avg_list_size_noise == 16.0);
        CHECK(r.avg_pretrunc_noise >= 16.0);
        CHECK(r.avg_rounds_noise >= 1.0);
        CHECK(r.avg_flops_noise > 0.0);
        CHECK(std::isnan(r.ber_learned));
        CHECK(std::isnan(r.flop_ratio));
        CHECK(std::isnan(r.avg_list_size_learned));
        CHECK(std::isnan(r.fallback_fraction));
        CHECK(r.ber_noise == static_cast<double>(r.bit_errors_noise) / 160.0);
    }
    // more noise, more errors (sanity on the operating points)
    CHECK(rows[0].bit_errors_noise >= rows[1].bit_errors_noise);
}

TEST_CASE("simulation aggregates do not depend on the worker count")
{
    ExperimentConfig cfg;
    cfg.block_len = 8;
    cfg.num_taps = 6;
    cfg.n_list = 8;
    cfg.ebn0_db = {6.0};
    cfg.num_frames = 12;
    cfg.seed = 31;

    cfg.num_workers = 1;
    const std::vector<ResultRow> serial = run_simulate(cfg, {});
    cfg.num_workers = 4;
    const std::vector<ResultRow> pooled = run_simulate(cfg, {});
    REQUIRE(serial.size() == pooled.size());
    CHECK(rows_identical(serial[0], pooled[0]));
}

TEST_CASE("learned side runs against a constant predictor")
{
    ExperimentConfig cfg;
    cfg.block_len = 8;
    cfg.num_taps = 4;
    cfg.n_list = 8;
    cfg.ebn0_db = {8.0};
    cfg.num_frames = 15;
    cfg.seed = 21;
    const NnModel model = flat_predictor(cfg, 3.0);
    const std::vector<ResultRow> rows = run_simulate(cfg, {&model});
    REQUIRE(rows.size() == 1);
    const ResultRow& r = rows[0];
    CHECK(r.learned_ran);
    CHECK(r.avg_list_size_learned == 8.0);
    CHECK(r.avg_list_size_noise == 8.0);
    CHECK(r.avg_pretrunc_learned >= 8.0); // uncapped search keeps everything inside
    CHECK(r.fallback_fraction == 0.0);
    CHECK(r.avg_nn_flops > 0.0);
    CHECK(r.flop_ratio > 0.0);
    // identical transmissions on both sides: same points, same hard decisions
    CHECK(r.bit_errors_learned == r.bit_errors_noise);
}

TEST_CASE("model metadata must match the experiment")
{
    ExperimentConfig cfg;
    cfg.block_len = 8;
    cfg.num_taps = 4;
    cfg.n_list = 8;
    cfg.ebn0_db = {8.0};
    cfg.num_frames = 2;
    const NnModel good = flat_predictor(cfg, 2.0);

    NnModel wrong_tau = good;
    wrong_tau.tau = 0.7;
    CHECK_THROWS_AS(run_simulate(cfg, {&wrong_tau}), std::invalid_argument);

    NnModel wrong_block = good;
    wrong_block.block_len = 10;
    CHECK_THROWS_AS(run_simulate(cfg, {&wrong_block}), std::invalid_argument);

    NnModel wrong_list = good;
    wrong_list.list_size = 32;
    CHECK_THROWS_AS(run_simulate(cfg, {&wrong_list}), std::invalid_argument);

    // one model for a two-point grid
    cfg.ebn0_db = {4.0, 8.0};
    CHECK_THROWS_AS(run_simulate(cfg, {&good}), std::invalid_argument);

    cfg.ebn0_db = {};
    CHECK_THROWS_AS(run_simulate(cfg, {}), std::invalid_argument);
}

TEST_CASE("out-of-region compression is refused")
{
    ExperimentConfig cfg;
    cfg.tau = 0.9;
    cfg.block_len = 8;
    cfg.num_taps = 4;
    cfg.ebn0_db = {8.0};
    cfg.num_frames = 1;
    CHECK_THROWS_AS(run_simulate(cfg, {}), OperationRegionViolation);
}

TEST_CASE("coded frames count information bits")
{
    ExperimentConfig cfg;
    cfg.coded = true;
    cfg.info_bits = 30; // coded length 2*(30+6) = 72 -> nine 8-bit blocks
    cfg.block_len = 8;
    cfg.num_taps = 4;
    cfg.n_list = 16;
    cfg.ebn0_db = {7.0};
    cfg.num_frames = 5;
    cfg.seed = 13;
    const std::vector<ResultRow> rows = run_simulate(cfg, {});
    REQUIRE(rows.size() == 1);
    const ResultRow& r = rows[0];
    CHECK(r.bits == 150);
    CHECK(r.blocks == 45);
    CHECK(r.code_rate == doctest::Approx(30.0 / 72.0));
    CHECK(r.bit_errors_noise <= r.bits);
    CHECK(r.ber_noise == static_cast<double>(r.bit_errors_noise) / 150.0);
}

TEST_CASE("results csv shape and determinism")
{
    ExperimentConfig cfg;
    cfg.block_len = 6;
    cfg.num_taps = 4;
    cfg.n_list = 8;
    cfg.ebn0_db = {5.0, 9.0};
    cfg.num_frames = 6;
    cfg.seed = 3;
    const std::vector<ResultRow> rows = run_simulate(cfg, {});

    const std::string p1 = temp_csv("a");
    const std::string p2 = temp_csv("b");
    save_results_csv(rows, p1);
    save_results_csv(run_simulate(cfg, {}), p2);
    const std::string t1 = read_text(p1);
    const std::string t2 = read_text(p2);
    std::remove(p1.c_str());
    std::remove(p2.c_str());

    CHECK(t1 == t2); // same config, byte-identical output

    std::stringstream ss(t1);
    std::string schema, header, row1, row2, tail;
    REQUIRE(std::getline(ss, schema));
    REQUIRE(std::getline(ss, header));
    REQUIRE(std::getline(ss, row1));
    REQUIRE(std::getline(ss, row2));
    CHECK_FALSE(std::getline(ss, tail));
    CHECK(schema == "# schema: ftn_results 1");
    const auto fields = [](const std::string& line) {
        return static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) + 1;
    };
    CHECK(fields(header) == 26);
    CHECK(fields(row1) == fields(header));
    CHECK(fields(row2) == fields(header));
    CHECK(row1.substr(0, 4) == "0.6,");

    CHECK_THROWS_AS(save_results_csv(rows, "no_such_dir/deep/results.csv"), IoError);
}

} // TEST_SUITE
