#include "ftn/io.hpp"

#include "ftn/errors.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ftn {

namespace {

std::string fmt17(double x)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

void write_matrix(std::ostream& out, const std::string& name, const double* data,
                  std::size_t rows, std::size_t cols)
{
    out << name << ' ' << rows << ' ' << cols << '\n';
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < cols; ++j) {
            if (j)
                out << ' ';
            out << fmt17(data[i * cols + j]);
        }
        out << '\n';
    }
}

void read_matrix(std::istream& in, const std::string& expect_name, double* data,
                 std::size_t rows, std::size_t cols)
{
    std::string name;
    std::size_t r = 0, c = 0;
    if (!(in >> name >> r >> c) || name != expect_name || r != rows || c != cols)
        throw IoError("model file: expected block '" + expect_name + "' " +
                                 std::to_string(rows) + "x" + std::to_string(cols));
    for (std::size_t i = 0; i < rows * cols; ++i)
        if (!(in >> data[i]))
            throw IoError("model file: truncated block '" + expect_name + "'");
}

} // namespace

void save_model(const NnModel& model, const std::string& path)
{
    std::ofstream out(path);
    if (!out)
        throw IoError("save_model: cannot open " + path);
    out << "ftn_radius_model " << model.schema_version << '\n';
    out << "tau " << fmt17(model.tau) << '\n';
    out << "ebn0_db " << fmt17(model.ebn0_db) << '\n';
    out << "block_len " << model.block_len << '\n';
    out << "list_size " << model.list_size << '\n';
    out << "radius_semantics distance\n";
    out << "seq_len " << model.seq_len << '\n';
    out << "rnn1_width " << model.rnn1_width << '\n';
    out << "rnn2_width " << model.rnn2_width << '\n';
    out << "fc_width " << model.fc_width << '\n';
    out << "delta_d " << fmt17(model.delta_d) << '\n';
    write_matrix(out, "w1x", model.w1x.a.data(), model.w1x.rows, model.w1x.cols);
    write_matrix(out, "w1h", model.w1h.a.data(), model.w1h.rows, model.w1h.cols);
    write_matrix(out, "b1", model.b1.data(), model.b1.size(), 1);
    write_matrix(out, "w2x", model.w2x.a.data(), model.w2x.rows, model.w2x.cols);
    write_matrix(out, "w2h", model.w2h.a.data(), model.w2h.rows, model.w2h.cols);
    write_matrix(out, "b2", model.b2.data(), model.b2.size(), 1);
    write_matrix(out, "w3", model.w3.a.data(), model.w3.rows, model.w3.cols);
    write_matrix(out, "b3", model.b3.data(), model.b3.size(), 1);
    write_matrix(out, "w4", model.w4.data(), model.w4.size(), 1);
    write_matrix(out, "b4", &model.b4, 1, 1);
    if (!out)
        throw IoError("save_model: write failed for " + path);
}

NnModel load_model(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw IoError("load_model: cannot open " + path);
    std::string magic;
    NnModel m;
    if (!(in >> magic >> m.schema_version) || magic != "ftn_radius_model")
        throw IoError("load_model: not a radius-model file: " + path);
    if (m.schema_version != 1)
        throw IoError("load_model: unsupported schema version " +
                                 std::to_string(m.schema_version));

    auto expect_key = [&](const char* key) {
        std::string k;
        if (!(in >> k) || k != key)
            throw IoError(std::string("load_model: expected key '") + key + "'");
    };
    expect_key("tau");
    in >> m.tau;
    expect_key("ebn0_db");
    in >> m.ebn0_db;
    expect_key("block_len");
    in >> m.block_len;
    expect_key("list_size");
    in >> m.list_size;
    expect_key("radius_semantics");
    std::string sem;
    in >> sem;
    if (sem != "distance")
        throw IoError("load_model: unknown radius semantics '" + sem + "'");
    expect_key("seq_len");
    in >> m.seq_len;
    expect_key("rnn1_width");
    in >> m.rnn1_width;
    expect_key("rnn2_width");
    in >> m.rnn2_width;
    expect_key("fc_width");
    in >> m.fc_width;
    expect_key("delta_d");
    in >> m.delta_d;
    if (!in)
        throw IoError("load_model: malformed header in " + path);
    if (m.seq_len < 1 || m.rnn1_width < 1 || m.rnn2_width < 1 || m.fc_width < 1)
        throw IoError("load_model: invalid dimensions in " + path);

    const std::size_t w1 = static_cast<std::size_t>(m.rnn1_width);
    const std::size_t w2 = static_cast<std::size_t>(m.rnn2_width);
    const std::size_t fc = static_cast<std::size_t>(m.fc_width);
    m.w1x = Mat(w1, 1);
    m.w1h = Mat(w1, w1);
    m.b1.assign(w1, 0.0);
    m.w2x = Mat(w2, w1);
    m.w2h = Mat(w2, w2);
    m.b2.assign(w2, 0.0);
    m.w3 = Mat(fc, w2);
    m.b3.assign(fc, 0.0);
    m.w4.assign(fc, 0.0);
    read_matrix(in, "w1x", m.w1x.a.data(), w1, 1);
    read_matrix(in, "w1h", m.w1h.a.data(), w1, w1);
    read_matrix(in, "b1", m.b1.data(), w1, 1);
    read_matrix(in, "w2x", m.w2x.a.data(), w2, w1);
    read_matrix(in, "w2h", m.w2h.a.data(), w2, w2);
    read_matrix(in, "b2", m.b2.data(), w2, 1);
    read_matrix(in, "w3", m.w3.a.data(), fc, w2);
    read_matrix(in, "b3", m.b3.data(), fc, 1);
    read_matrix(in, "w4", m.w4.data(), fc, 1);
    read_matrix(in, "b4", &m.b4, 1, 1);
    return m;
}

void save_dataset(const Dataset& data, const std::string& path)
{
    const DatasetMeta& meta = data.meta;
    {
        std::ofstream out(path);
        if (!out)
            throw IoError("save_dataset: cannot open " + path);
        out << "# schema: ftn_dataset 1\n";
        for (int i = 0; i < meta.seq_len; ++i)
            out << 'y' << i << ',';
        out << "radius\n";
        for (const auto& s : data.samples) {
            if (static_cast<int>(s.y.size()) != meta.seq_len)
                throw IoError("save_dataset: sample length != seq_len");
            for (double v : s.y)
                out << fmt17(v) << ',';
            out << fmt17(s.radius) << '\n';
        }
        if (!out)
            throw IoError("save_dataset: write failed for " + path);
    }
    {
        std::ofstream out(path + ".meta");
        if (!out)
            throw IoError("save_dataset: cannot open " + path + ".meta");
        out << "# schema: ftn_dataset_meta 1\n";
        out << "tau = " << fmt17(meta.tau) << '\n';
        out << "beta_signal = " << fmt17(meta.beta_signal) << '\n';
        out << "beta_basis = " << fmt17(meta.beta_basis) << '\n';
        out << "block_len = " << meta.block_len << '\n';
        out << "num_taps = " << meta.num_taps << '\n';
        out << "list_size = " << meta.list_size << '\n';
        out << "ebn0_db = " << fmt17(meta.ebn0_db) << '\n';
        out << "code_rate = " << fmt17(meta.code_rate) << '\n';
        out << "eb = " << fmt17(meta.eb) << '\n';
        out << "epsilon = " << fmt17(meta.epsilon) << '\n';
        out << "num_blocks = " << meta.num_blocks << '\n';
        out << "seed = " << meta.seed << '\n';
        out << "seq_len = " << meta.seq_len << '\n';
        if (!out)
            throw IoError("save_dataset: write failed for " + path + ".meta");
    }
}

namespace {

// corrupt numeric text in a data file is a file problem, not a usage problem
double parse_double_or(const std::string& text, const std::string& what)
{
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used != text.size())
            throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        throw IoError(what + ": bad numeric value '" + text + "'");
    }
}

long long parse_int_or(const std::string& text, const std::string& what)
{
    try {
        std::size_t used = 0;
        const long long v = std::stoll(text, &used);
        if (used != text.size())
            throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        throw IoError(what + ": bad integer value '" + text + "'");
    }
}

} // namespace

Dataset load_dataset(const std::string& path)
{
    Dataset data;
    const auto kv = read_key_value_file(path + ".meta");
    const std::string what = "load_dataset " + path;
    auto need = [&](const char* key) -> const std::string& {
        auto it = kv.find(key);
        if (it == kv.end())
            throw IoError("load_dataset: missing key '" + std::string(key) +
                                     "' in " + path + ".meta");
        return it->second;
    };
    DatasetMeta& meta = data.meta;
    meta.tau = parse_double_or(need("tau"), what);
    meta.beta_signal = parse_double_or(need("beta_signal"), what);
    meta.beta_basis = parse_double_or(need("beta_basis"), what);
    meta.block_len = static_cast<int>(parse_int_or(need("block_len"), what));
    meta.num_taps = static_cast<int>(parse_int_or(need("num_taps"), what));
    meta.list_size = static_cast<int>(parse_int_or(need("list_size"), what));
    meta.ebn0_db = parse_double_or(need("ebn0_db"), what);
    meta.code_rate = parse_double_or(need("code_rate"), what);
    meta.eb = parse_double_or(need("eb"), what);
    meta.epsilon = parse_double_or(need("epsilon"), what);
    meta.num_blocks = static_cast<int>(parse_int_or(need("num_blocks"), what));
    meta.seed = static_cast<std::uint64_t>(parse_int_or(need("seed"), what));
    meta.seq_len = static_cast<int>(parse_int_or(need("seq_len"), what));
    if (meta.seq_len < 1)
        throw IoError("load_dataset: invalid seq_len");

    std::ifstream in(path);
    if (!in)
        throw IoError("load_dataset: cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || line.rfind("# schema: ftn_dataset", 0) != 0)
        throw IoError("load_dataset: missing schema line in " + path);
    if (!std::getline(in, line))
        throw IoError("load_dataset: missing header row in " + path);
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        TrainingSample s;
        s.y.reserve(static_cast<std::size_t>(meta.seq_len));
        std::stringstream ss(line);
        std::string cell;
        std::vector<double> vals;
        while (std::getline(ss, cell, ','))
            vals.push_back(parse_double_or(cell, "load_dataset " + path));
        if (static_cast<int>(vals.size()) != meta.seq_len + 1)
            throw IoError("load_dataset: row width mismatch in " + path);
        s.y.assign(vals.begin(), vals.end() - 1);
        s.radius = vals.back();
        data.samples.push_back(std::move(s));
    }
    return data;
}

void save_loss_trace(const std::vector<EpochStats>& trace, const std::string& path)
{
    std::ofstream out(path);
    if (!out)
        throw IoError("save_loss_trace: cannot open " + path);
    out << "# schema: ftn_loss_trace 1\n";
    out << "epoch,train_mse,holdout_mse\n";
    for (const auto& st : trace)
        out << st.epoch << ',' << fmt17(st.train_mse) << ',' << fmt17(st.holdout_mse) << '\n';
    if (!out)
        throw IoError("save_loss_trace: write failed for " + path);
}

std::map<std::string, std::string> read_key_value_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open " + path);
    std::map<std::string, std::string> kv;
    std::string line;
    auto trim = [](std::string s) {
        const char* ws = " \t\r";
        const auto b = s.find_first_not_of(ws);
        if (b == std::string::npos)
            return std::string();
        const auto e = s.find_last_not_of(ws);
        return s.substr(b, e - b + 1);
    };
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos)
            line = line.substr(0, hash);
        line = trim(line);
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("malformed line (expected key = value) in " + path +
                                     ": " + line);
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw std::invalid_argument("empty key in " + path);
        kv[key] = value;
    }
    return kv;
}

} // namespace ftn
