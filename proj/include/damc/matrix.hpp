#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace damc {

using RowMajorMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Dense real matrix stored row-major. Every stored entry is finite.
class DenseMatrix {
  public:
    /// Zero-filled rows x cols matrix. Both dimensions must be positive.
    DenseMatrix(std::size_t rows, std::size_t cols);
    /// Takes ownership of row-major `entries`; validates size and finiteness.
    DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> entries);

    static DenseMatrix from_rows(std::initializer_list<std::initializer_list<double>> rows);
    static DenseMatrix from_eigen(const Eigen::Ref<const RowMajorMatrix> &m);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return entries_.size(); }

    double operator()(std::size_t i, std::size_t j) const { return entries_[i * cols_ + j]; }
    double &operator()(std::size_t i, std::size_t j) { return entries_[i * cols_ + j]; }

    std::span<const double> values() const noexcept { return entries_; }
    std::span<double> values() noexcept { return entries_; }

    Eigen::Map<const RowMajorMatrix> eigen() const {
        return {entries_.data(), static_cast<Eigen::Index>(rows_),
                static_cast<Eigen::Index>(cols_)};
    }
    Eigen::Map<RowMajorMatrix> eigen() {
        return {entries_.data(), static_cast<Eigen::Index>(rows_),
                static_cast<Eigen::Index>(cols_)};
    }

    double frobenius_norm() const;

    /// Throws NumericError naming `where` if any entry is NaN or infinite.
    void require_finite(std::string_view where) const;

    bool operator==(const DenseMatrix &) const = default;

  private:
    std::size_t rows_;
    std::size_t cols_;
    std::vector<double> entries_;
};

struct Position {
    std::size_t row;
    std::size_t col;
    auto operator<=>(const Position &) const = default;
};

/// A set of matrix positions for a fixed shape, kept in row-major
/// lexicographic order. Positions are stored as linear offsets
/// row * cols + col, which preserves that order.
class IndexSet {
  public:
    IndexSet(std::size_t rows, std::size_t cols);
    /// Sorts `positions`; throws DimensionError if any is out of range and
    /// ConfigError on duplicates.
    IndexSet(std::size_t rows, std::size_t cols, std::vector<Position> positions);

    static IndexSet from_offsets(std::size_t rows, std::size_t cols,
                                 std::vector<std::size_t> offsets);
    static IndexSet full(std::size_t rows, std::size_t cols);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return offsets_.size(); }
    bool empty() const noexcept { return offsets_.empty(); }

    std::span<const std::size_t> offsets() const noexcept { return offsets_; }
    Position position(std::size_t k) const {
        return {offsets_[k] / cols_, offsets_[k] % cols_};
    }
    bool contains(Position p) const;

    bool operator==(const IndexSet &) const = default;

  private:
    std::size_t rows_;
    std::size_t cols_;
    std::vector<std::size_t> offsets_;
};

/// P_S(X): keeps entries in `set`, zeros the rest.
DenseMatrix apply_mask(const DenseMatrix &x, const IndexSet &set);

IndexSet complement(const IndexSet &set);

/// Entries of `x` at the positions of `set`, in canonical order.
std::vector<double> vec_extract(const DenseMatrix &x, const IndexSet &set);

/// Inverse of vec_extract: places `v` at the positions of `set`, zeros elsewhere.
DenseMatrix vec_scatter(std::span<const double> v, const IndexSet &set);

/// Writes `v` into `x` at the positions of `set`, leaving other entries alone.
void scatter_into(DenseMatrix &x, std::span<const double> v, const IndexSet &set);

/// Copies the entries of `source` at `set` into `target`.
void copy_entries(DenseMatrix &target, const DenseMatrix &source, const IndexSet &set);

} // namespace damc
