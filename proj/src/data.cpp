#include "damc/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <random>
#include <sstream>
#include <string_view>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "damc/error.hpp"

namespace damc {

namespace {

std::vector<std::string_view> split_fields(std::string_view line, char delimiter) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(delimiter, start);
        fields.push_back(line.substr(start, pos - start));
        if (pos == std::string_view::npos)
            break;
        start = pos + 1;
    }
    return fields;
}

template <class T>
T parse_number(std::string_view text, std::size_t line, const char *what) {
    T value{};
    const auto *end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc{} || ptr != end || text.empty())
        throw ParseError(line, fmt::format("invalid {} '{}'", what, text));
    return value;
}

std::string_view trim_cr(std::string_view line) {
    if (!line.empty() && line.back() == '\r')
        line.remove_suffix(1);
    return line;
}

} // namespace

std::vector<RatingRecord> parse_movielens(std::istream &in) {
    std::vector<RatingRecord> records;
    std::string raw;
    std::size_t line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const std::string_view text = trim_cr(raw);
        if (text.empty())
            continue;
        const auto fields = split_fields(text, '\t');
        if (fields.size() != 4)
            throw ParseError(line, fmt::format("expected 4 tab-separated fields, found {}",
                                               fields.size()));
        RatingRecord rec;
        rec.user = parse_number<std::uint32_t>(fields[0], line, "user id");
        rec.item = parse_number<std::uint32_t>(fields[1], line, "item id");
        rec.rating = parse_number<int>(fields[2], line, "rating");
        rec.timestamp = parse_number<std::int64_t>(fields[3], line, "timestamp");
        if (rec.user == 0 || rec.item == 0)
            throw ValidationError(fmt::format("line {}: ids must be positive", line));
        if (rec.rating < 1 || rec.rating > 5)
            throw ValidationError(
                fmt::format("line {}: rating {} outside 1..5", line, rec.rating));
        records.push_back(rec);
    }
    return records;
}

std::vector<RatingRecord> load_movielens(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in)
        throw ValidationError("cannot open ratings file " + path.string());
    return parse_movielens(in);
}

std::string serialize_movielens(std::span<const RatingRecord> records) {
    std::string out;
    for (const auto &r : records)
        fmt::format_to(std::back_inserter(out), "{}\t{}\t{}\t{}\n", r.user, r.item, r.rating,
                       r.timestamp);
    return out;
}

Dataset build_matrix(std::span<const RatingRecord> records) {
    if (records.empty())
        throw ValidationError("build_matrix: no ratings");
    std::size_t users = 0;
    std::size_t items = 0;
    for (const auto &r : records) {
        users = std::max<std::size_t>(users, r.user);
        items = std::max<std::size_t>(items, r.item);
    }
    Dataset ds{DenseMatrix(users, items), IndexSet(users, items), users, items, 0};
    std::vector<std::size_t> offsets;
    offsets.reserve(records.size());
    auto values = ds.observed.values();
    for (const auto &r : records) {
        const std::size_t k = (r.user - 1) * items + (r.item - 1);
        if (values[k] != 0.0)
            ++ds.duplicate_warnings;
        else
            offsets.push_back(k);
        values[k] = r.rating;
    }
    if (ds.duplicate_warnings > 0)
        spdlog::warn("build_matrix: {} duplicate (user, item) ratings, kept the last of each",
                     ds.duplicate_warnings);
    ds.known = IndexSet::from_offsets(users, items, std::move(offsets));
    return ds;
}

Dataset dataset_from_matrix(DenseMatrix matrix) {
    const auto rows = matrix.rows();
    const auto cols = matrix.cols();
    return {std::move(matrix), IndexSet::full(rows, cols), rows, cols, 0};
}

Split split(const Dataset &dataset, const SplitSpec &spec) {
    if (!(spec.observe_ratio > 0.0 && spec.observe_ratio <= 1.0))
        throw ConfigError(fmt::format("observation ratio {} outside (0, 1]", spec.observe_ratio));
    const auto known = dataset.known.offsets();
    std::vector<std::size_t> order(known.begin(), known.end());
    std::mt19937_64 rng(spec.seed);
    std::shuffle(order.begin(), order.end(), rng);
    const auto train_count =
        static_cast<std::size_t>(std::llround(spec.observe_ratio * static_cast<double>(order.size())));
    const auto rows = dataset.known.rows();
    const auto cols = dataset.known.cols();
    std::vector<std::size_t> test(order.begin() + static_cast<std::ptrdiff_t>(train_count), order.end());
    order.resize(train_count);
    return {IndexSet::from_offsets(rows, cols, std::move(order)),
            IndexSet::from_offsets(rows, cols, std::move(test))};
}

SyntheticMatrix synth_discrete_lowrank(std::size_t rows, std::size_t cols, std::size_t rank,
                                       const Alphabet &alphabet, std::uint64_t seed) {
    if (rows == 0 || cols == 0 || rank == 0 || rank > std::min(rows, cols))
        throw ConfigError(fmt::format("invalid synthetic shape {}x{} rank {}", rows, cols, rank));
    if (alphabet.size() < 2)
        throw ConfigError("synthetic matrices need at least two alphabet letters");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    Eigen::MatrixXd p(rows, rank);
    Eigen::MatrixXd q(cols, rank);
    for (Eigen::Index i = 0; i < p.size(); ++i)
        p.data()[i] = normal(rng);
    for (Eigen::Index i = 0; i < q.size(); ++i)
        q.data()[i] = normal(rng);
    RowMajorMatrix g = p * q.transpose();
    const double lo = g.minCoeff();
    const double hi = g.maxCoeff();
    const double span = alphabet.back() - alphabet.front();
    if (hi > lo)
        g = ((g.array() - lo) * (span / (hi - lo)) + alphabet.front()).matrix();
    else
        g.setConstant(alphabet.front());

    SyntheticMatrix out{DenseMatrix(rows, cols), DenseMatrix::from_eigen(g)};
    const auto src = out.continuous.values();
    auto dst = out.rounded.values();
    for (std::size_t k = 0; k < src.size(); ++k)
        dst[k] = alphabet.nearest(src[k]);
    return out;
}

void write_matrix_csv(std::ostream &out, const DenseMatrix &m) {
    out << m.rows() << ',' << m.cols() << '\n';
    std::string line;
    for (std::size_t i = 0; i < m.rows(); ++i) {
        line.clear();
        for (std::size_t j = 0; j < m.cols(); ++j) {
            if (j > 0)
                line.push_back(',');
            fmt::format_to(std::back_inserter(line), "{}", m(i, j));
        }
        out << line << '\n';
    }
}

DenseMatrix read_matrix_csv(std::istream &in) {
    std::string raw;
    std::size_t line = 1;
    if (!std::getline(in, raw))
        throw ParseError(line, "missing rows,cols header");
    const auto header = split_fields(trim_cr(raw), ',');
    if (header.size() != 2)
        throw ParseError(line, "header must be 'rows,cols'");
    const auto rows = parse_number<std::size_t>(header[0], line, "row count");
    const auto cols = parse_number<std::size_t>(header[1], line, "column count");
    if (rows == 0 || cols == 0)
        throw ParseError(line, "matrix dimensions must be positive");
    std::vector<double> entries;
    entries.reserve(rows * cols);
    for (std::size_t i = 0; i < rows; ++i) {
        ++line;
        if (!std::getline(in, raw))
            throw ParseError(line, fmt::format("expected {} rows, found {}", rows, i));
        const auto fields = split_fields(trim_cr(raw), ',');
        if (fields.size() != cols)
            throw ParseError(line, fmt::format("expected {} values, found {}", cols, fields.size()));
        for (auto f : fields) {
            const double v = parse_number<double>(f, line, "value");
            if (!std::isfinite(v))
                throw ParseError(line, "non-finite value");
            entries.push_back(v);
        }
    }
    return {rows, cols, std::move(entries)};
}

} // namespace damc
