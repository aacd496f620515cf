#pragma once

// Element-wise arithmetic kernels for the regularizer and solver inner loops.
//
// Every kernel has a portable scalar reference and, on x86-64, an AVX2/FMA
// variant compiled separately and selected at runtime from CPUID. The scalar
// table is the reference the vector tables are tested against. Reductions in
// the vector variants use a different summation order, so results agree with
// the scalar ones to rounding, not bitwise. A given process always uses one
// table, so runs remain bitwise reproducible on the same machine.
//
// DAMC_KERNELS=scalar|avx2 overrides the automatic choice.

#include <span>
#include <string_view>

namespace damc::kernels {

struct KernelTable {
    std::string_view name;

    /// For one alphabet letter: beta_j = sqrt(alpha) / ((x_j - letter)^2 + alpha),
    /// writes beta_j, then b_diag_j += beta_j^2 and b_vec_j += letter * beta_j^2.
    void (*fp_accumulate)(std::span<const double> x, double letter, double alpha,
                          std::span<double> beta, std::span<double> b_diag,
                          std::span<double> b_vec);

    /// sum_j alpha / ((x_j - letter)^2 + alpha)
    double (*l0_affinity_sum)(std::span<const double> x, double letter, double alpha);

    /// sum_j |x_j - letter|
    double (*abs_distance_sum)(std::span<const double> x, double letter);

    /// out_j = 2 b_diag_j x_j - 2 b_vec_j
    void (*quadratic_gradient)(std::span<const double> x, std::span<const double> b_diag,
                               std::span<const double> b_vec, std::span<double> out);

    /// sum_j b_diag_j x_j^2 - 2 b_vec_j x_j
    double (*quadratic_value)(std::span<const double> x, std::span<const double> b_diag,
                              std::span<const double> b_vec);

    /// out_j = a * x_j + b * y_j  (out may alias x or y)
    void (*axpby)(double a, std::span<const double> x, double b, std::span<const double> y,
                  std::span<double> out);

    /// sum_j (x_j - y_j)^2
    double (*squared_distance)(std::span<const double> x, std::span<const double> y);

    /// sum_j x_j^2
    double (*squared_norm)(std::span<const double> x);
};

const KernelTable &scalar();

/// The AVX2 table, or nullptr when the CPU or the build lacks support.
const KernelTable *avx2();

/// The table used by the library; chosen once per process.
const KernelTable &active();

} // namespace damc::kernels
