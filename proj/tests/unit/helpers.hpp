#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "damc/matrix.hpp"

namespace testing {

inline damc::DenseMatrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed,
                                       double lo = -1.0, double hi = 1.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<double> v(rows * cols);
    for (auto &x : v)
        x = u(rng);
    return {rows, cols, std::move(v)};
}

inline std::vector<double> random_vector(std::size_t n, std::uint64_t seed, double lo = -1.0,
                                         double hi = 1.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<double> v(n);
    for (auto &x : v)
        x = u(rng);
    return v;
}

/// Each position kept with probability p.
inline damc::IndexSet random_set(std::size_t rows, std::size_t cols, double p, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::bernoulli_distribution keep(p);
    std::vector<std::size_t> offsets;
    for (std::size_t k = 0; k < rows * cols; ++k)
        if (keep(rng))
            offsets.push_back(k);
    return damc::IndexSet::from_offsets(rows, cols, std::move(offsets));
}

inline double max_abs_diff(const damc::DenseMatrix &a, const damc::DenseMatrix &b) {
    return (a.eigen() - b.eigen()).cwiseAbs().maxCoeff();
}

} // namespace testing
