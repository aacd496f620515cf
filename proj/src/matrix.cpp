#include "damc/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "damc/error.hpp"
#include "damc/kernels.hpp"

namespace damc {

namespace {

void require_shape(std::size_t rows, std::size_t cols) {
    if (rows == 0 || cols == 0)
        throw DimensionError("matrix dimensions must be positive, got " +
                             std::to_string(rows) + "x" + std::to_string(cols));
}

void require_same_shape(const DenseMatrix &x, const IndexSet &set, const char *op) {
    if (x.rows() != set.rows() || x.cols() != set.cols())
        throw DimensionError(std::string(op) + ": index set shape " +
                             std::to_string(set.rows()) + "x" + std::to_string(set.cols()) +
                             " does not match matrix " + std::to_string(x.rows()) + "x" +
                             std::to_string(x.cols()));
}

} // namespace

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols) {
    require_shape(rows, cols);
    entries_.assign(rows * cols, 0.0);
}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> entries)
    : rows_(rows), cols_(cols), entries_(std::move(entries)) {
    require_shape(rows, cols);
    if (entries_.size() != rows * cols)
        throw DimensionError("expected " + std::to_string(rows * cols) + " entries, got " +
                             std::to_string(entries_.size()));
    require_finite("DenseMatrix");
}

DenseMatrix DenseMatrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    const std::size_t m = rows.size();
    const std::size_t n = m ? rows.begin()->size() : 0;
    std::vector<double> entries;
    entries.reserve(m * n);
    for (const auto &row : rows) {
        if (row.size() != n)
            throw DimensionError("ragged row list");
        entries.insert(entries.end(), row.begin(), row.end());
    }
    return {m, n, std::move(entries)};
}

DenseMatrix DenseMatrix::from_eigen(const Eigen::Ref<const RowMajorMatrix> &m) {
    DenseMatrix out(static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols()));
    out.eigen() = m;
    out.require_finite("DenseMatrix::from_eigen");
    return out;
}

double DenseMatrix::frobenius_norm() const {
    return std::sqrt(kernels::active().squared_norm(entries_));
}

void DenseMatrix::require_finite(std::string_view where) const {
    auto bad = std::find_if(entries_.begin(), entries_.end(),
                            [](double v) { return !std::isfinite(v); });
    if (bad != entries_.end()) {
        const auto k = static_cast<std::size_t>(bad - entries_.begin());
        throw NumericError(std::string(where) + ": non-finite entry at (" +
                           std::to_string(k / cols_) + ", " + std::to_string(k % cols_) + ")");
    }
}

IndexSet::IndexSet(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols) {}

IndexSet::IndexSet(std::size_t rows, std::size_t cols, std::vector<Position> positions)
    : rows_(rows), cols_(cols) {
    offsets_.reserve(positions.size());
    for (const auto &p : positions) {
        if (p.row >= rows || p.col >= cols)
            throw DimensionError("position (" + std::to_string(p.row) + ", " +
                                 std::to_string(p.col) + ") outside " + std::to_string(rows) +
                                 "x" + std::to_string(cols));
        offsets_.push_back(p.row * cols + p.col);
    }
    std::sort(offsets_.begin(), offsets_.end());
    if (std::adjacent_find(offsets_.begin(), offsets_.end()) != offsets_.end())
        throw ConfigError("duplicate position in index set");
}

IndexSet IndexSet::from_offsets(std::size_t rows, std::size_t cols,
                                std::vector<std::size_t> offsets) {
    IndexSet out(rows, cols);
    std::sort(offsets.begin(), offsets.end());
    if (!offsets.empty() && offsets.back() >= rows * cols)
        throw DimensionError("offset outside matrix shape");
    if (std::adjacent_find(offsets.begin(), offsets.end()) != offsets.end())
        throw ConfigError("duplicate position in index set");
    out.offsets_ = std::move(offsets);
    return out;
}

IndexSet IndexSet::full(std::size_t rows, std::size_t cols) {
    IndexSet out(rows, cols);
    out.offsets_.resize(rows * cols);
    for (std::size_t k = 0; k < out.offsets_.size(); ++k)
        out.offsets_[k] = k;
    return out;
}

bool IndexSet::contains(Position p) const {
    if (p.row >= rows_ || p.col >= cols_)
        return false;
    return std::binary_search(offsets_.begin(), offsets_.end(), p.row * cols_ + p.col);
}

DenseMatrix apply_mask(const DenseMatrix &x, const IndexSet &set) {
    require_same_shape(x, set, "apply_mask");
    DenseMatrix out(x.rows(), x.cols());
    copy_entries(out, x, set);
    return out;
}

IndexSet complement(const IndexSet &set) {
    std::vector<std::size_t> out;
    const std::size_t total = set.rows() * set.cols();
    out.reserve(total - set.size());
    auto it = set.offsets().begin();
    const auto end = set.offsets().end();
    for (std::size_t k = 0; k < total; ++k) {
        if (it != end && *it == k)
            ++it;
        else
            out.push_back(k);
    }
    return IndexSet::from_offsets(set.rows(), set.cols(), std::move(out));
}

std::vector<double> vec_extract(const DenseMatrix &x, const IndexSet &set) {
    require_same_shape(x, set, "vec_extract");
    std::vector<double> out(set.size());
    const auto values = x.values();
    const auto offsets = set.offsets();
    for (std::size_t k = 0; k < out.size(); ++k)
        out[k] = values[offsets[k]];
    return out;
}

DenseMatrix vec_scatter(std::span<const double> v, const IndexSet &set) {
    DenseMatrix out(set.rows(), set.cols());
    scatter_into(out, v, set);
    return out;
}

void scatter_into(DenseMatrix &x, std::span<const double> v, const IndexSet &set) {
    require_same_shape(x, set, "vec_scatter");
    if (v.size() != set.size())
        throw DimensionError("vec_scatter: vector length " + std::to_string(v.size()) +
                             " does not match index set size " + std::to_string(set.size()));
    auto values = x.values();
    const auto offsets = set.offsets();
    for (std::size_t k = 0; k < v.size(); ++k)
        values[offsets[k]] = v[k];
}

void copy_entries(DenseMatrix &target, const DenseMatrix &source, const IndexSet &set) {
    require_same_shape(target, set, "copy_entries");
    require_same_shape(source, set, "copy_entries");
    auto out = target.values();
    const auto in = source.values();
    for (auto k : set.offsets())
        out[k] = in[k];
}

} // namespace damc
