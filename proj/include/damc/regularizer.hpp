#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include "damc/matrix.hpp"

namespace damc {

/// Strictly increasing, nonempty, finite set of admissible entry values.
class Alphabet {
  public:
    explicit Alphabet(std::vector<double> values);
    Alphabet(std::initializer_list<double> values) : Alphabet(std::vector<double>(values)) {}

    /// {first, first + 1, ..., last}
    static Alphabet integer_range(int first, int last);

    std::span<const double> values() const noexcept { return values_; }
    std::size_t size() const noexcept { return values_.size(); }
    double operator[](std::size_t k) const { return values_[k]; }
    double front() const { return values_.front(); }
    double back() const { return values_.back(); }

    /// Closest letter; exact midpoints go to the smaller letter.
    double nearest(double x) const;

    bool operator==(const Alphabet &) const = default;

  private:
    std::vector<double> values_;
};

/// Quadratic-transform auxiliaries for one linearization point:
/// beta(k, j) = sqrt(alpha) / ((x_j - a_k)^2 + alpha),
/// b_diag[j] = sum_k beta(k, j)^2, b_vec[j] = sum_k a_k beta(k, j)^2.
struct FpAux {
    std::size_t letters = 0;
    std::size_t count = 0;
    std::vector<double> beta; ///< letters x count, row-major
    std::vector<double> b_diag;
    std::vector<double> b_vec;

    double beta_at(std::size_t k, std::size_t j) const { return beta[k * count + j]; }
};

enum class LipschitzRule {
    /// L = max_j b_diag[j]^2
    paper,
    /// L = 2 max_j b_diag[j], the Lipschitz constant of the gradient of h.
    classical,
};

struct StepSize {
    double lipschitz;
    double mu;
};

/// sum_i v_i^2 / (v_i^2 + alpha): smooth count of the nonzero entries of v.
double l0_approx(std::span<const double> v, double alpha);

/// -sum_k sum_j alpha / ((x_j - a_k)^2 + alpha) over the entries of `omega_bar`.
/// The constant |A| |omega_bar| of the approximation is dropped.
double discrete_l0_value(std::span<const double> x_bar, const Alphabet &alphabet, double alpha);
double discrete_l0_value(const DenseMatrix &x, const IndexSet &omega_bar,
                         const Alphabet &alphabet, double alpha);

/// r(X|1) = sum_k sum_j |x_j - a_k|.
double discrete_l1_value(std::span<const double> x_bar, const Alphabet &alphabet);

FpAux update_fp_aux(std::span<const double> x_bar, const Alphabet &alphabet, double alpha);

/// h(x) = x^T B x - 2 x^T b. Throws DimensionError on length mismatch.
double h_value(std::span<const double> x_bar, const FpAux &aux);

/// Gradient of h on omega_bar, scattered back to a full matrix (zero on omega).
DenseMatrix h_gradient(const DenseMatrix &x, const IndexSet &omega_bar, const FpAux &aux);

/// In-place variant on the extracted vector: out = 2 B x - 2 b.
void h_gradient(std::span<const double> x_bar, const FpAux &aux, std::span<double> out);

/// Lipschitz constant and step mu = 1 / L. Throws DegenerateInputError when
/// there are no unobserved entries.
StepSize lipschitz_step(const FpAux &aux, LipschitzRule rule = LipschitzRule::paper);

/// sum_k sum_j [beta^2 ((x_j - a_k)^2 + alpha) - 2 beta sqrt(alpha)], the
/// quadratic-transform majorizer of discrete_l0_value. Equal to it when `aux`
/// was built at x_bar, and never below it otherwise.
double surrogate_value(std::span<const double> x_bar, const FpAux &aux,
                       const Alphabet &alphabet, double alpha);

} // namespace damc
