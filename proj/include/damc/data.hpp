#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "damc/matrix.hpp"
#include "damc/regularizer.hpp"

namespace damc {

struct RatingRecord {
    std::uint32_t user = 0;
    std::uint32_t item = 0;
    int rating = 0;
    std::int64_t timestamp = 0;
    bool operator==(const RatingRecord &) const = default;
};

/// Parses MovieLens `u.data` text: user<TAB>item<TAB>rating<TAB>timestamp per
/// line. Blank lines are skipped. Throws ParseError on malformed lines and
/// ValidationError on ratings outside 1..5 or zero ids, both with the line number.
std::vector<RatingRecord> parse_movielens(std::istream &in);
std::vector<RatingRecord> load_movielens(const std::filesystem::path &path);

std::string serialize_movielens(std::span<const RatingRecord> records);

/// Ratings as a users x items matrix. Unknown entries are stored as 0 and are
/// never part of `known`.
struct Dataset {
    DenseMatrix observed;
    IndexSet known;
    std::size_t users = 0;
    std::size_t items = 0;
    /// Records that overwrote an earlier rating of the same cell.
    std::size_t duplicate_warnings = 0;
};

/// Sizes the matrix by the largest ids; a repeated (user, item) keeps the
/// last rating.
Dataset build_matrix(std::span<const RatingRecord> records);

/// A fully known matrix, e.g. a synthetic ground truth.
Dataset dataset_from_matrix(DenseMatrix matrix);

struct SplitSpec {
    double observe_ratio = 0.2;
    std::uint64_t seed = 0;
};

struct Split {
    IndexSet train;
    IndexSet test;
};

/// Uniform random partition of `known` with |train| = round(ratio |known|).
/// Throws ConfigError unless 0 < ratio <= 1.
Split split(const Dataset &dataset, const SplitSpec &spec);

struct SyntheticMatrix {
    DenseMatrix rounded;    ///< entries drawn from the alphabet
    DenseMatrix continuous; ///< the rescaled rank-r matrix before rounding
};

/// P Q^T with standard normal P (m x r), Q (n x r), affinely mapped onto
/// [a_1, a_|A|] and rounded to the nearest letter.
SyntheticMatrix synth_discrete_lowrank(std::size_t rows, std::size_t cols, std::size_t rank,
                                       const Alphabet &alphabet, std::uint64_t seed);

/// CSV layout: first line "rows,cols", then one comma-separated line per row.
void write_matrix_csv(std::ostream &out, const DenseMatrix &m);
DenseMatrix read_matrix_csv(std::istream &in);

} // namespace damc
