#include "damc/regularizer.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "damc/error.hpp"
#include "damc/kernels.hpp"

namespace damc {

namespace {

void require_alpha(double alpha) {
    if (!(alpha > 0.0) || !std::isfinite(alpha))
        throw ConfigError("alpha must be finite and positive");
}

void require_length(std::span<const double> x_bar, const FpAux &aux, const char *op) {
    if (x_bar.size() != aux.count)
        throw DimensionError(std::string(op) + ": vector length " + std::to_string(x_bar.size()) +
                             " does not match auxiliaries for " + std::to_string(aux.count) +
                             " entries");
}

} // namespace

Alphabet::Alphabet(std::vector<double> values) : values_(std::move(values)) {
    if (values_.empty())
        throw ConfigError("alphabet must be nonempty");
    for (std::size_t k = 0; k < values_.size(); ++k) {
        if (!std::isfinite(values_[k]))
            throw ConfigError("alphabet letters must be finite");
        if (k > 0 && !(values_[k - 1] < values_[k]))
            throw ConfigError("alphabet must be strictly increasing");
    }
}

Alphabet Alphabet::integer_range(int first, int last) {
    std::vector<double> values;
    for (int v = first; v <= last; ++v)
        values.push_back(v);
    return Alphabet(std::move(values));
}

double Alphabet::nearest(double x) const {
    auto upper = std::lower_bound(values_.begin(), values_.end(), x);
    if (upper == values_.begin())
        return values_.front();
    if (upper == values_.end())
        return values_.back();
    const double hi = *upper;
    const double lo = *(upper - 1);
    return (hi - x < x - lo) ? hi : lo;
}

double l0_approx(std::span<const double> v, double alpha) {
    require_alpha(alpha);
    // sum v^2/(v^2+alpha) = L - sum alpha/(v^2+alpha); the direct form keeps
    // precision when every term is tiny.
    double sum = 0.0;
    for (double x : v) {
        const double sq = x * x;
        sum += sq / (sq + alpha);
    }
    return sum;
}

double discrete_l0_value(std::span<const double> x_bar, const Alphabet &alphabet, double alpha) {
    require_alpha(alpha);
    const auto &k = kernels::active();
    double sum = 0.0;
    for (double letter : alphabet.values())
        sum += k.l0_affinity_sum(x_bar, letter, alpha);
    return -sum;
}

double discrete_l0_value(const DenseMatrix &x, const IndexSet &omega_bar,
                         const Alphabet &alphabet, double alpha) {
    return discrete_l0_value(vec_extract(x, omega_bar), alphabet, alpha);
}

double discrete_l1_value(std::span<const double> x_bar, const Alphabet &alphabet) {
    const auto &k = kernels::active();
    double sum = 0.0;
    for (double letter : alphabet.values())
        sum += k.abs_distance_sum(x_bar, letter);
    return sum;
}

FpAux update_fp_aux(std::span<const double> x_bar, const Alphabet &alphabet, double alpha) {
    require_alpha(alpha);
    FpAux aux;
    aux.letters = alphabet.size();
    aux.count = x_bar.size();
    aux.beta.resize(aux.letters * aux.count);
    aux.b_diag.assign(aux.count, 0.0);
    aux.b_vec.assign(aux.count, 0.0);
    const auto &k = kernels::active();
    const std::span<double> beta(aux.beta);
    for (std::size_t letter = 0; letter < aux.letters; ++letter)
        k.fp_accumulate(x_bar, alphabet[letter], alpha, beta.subspan(letter * aux.count, aux.count),
                        aux.b_diag, aux.b_vec);
    return aux;
}

double h_value(std::span<const double> x_bar, const FpAux &aux) {
    require_length(x_bar, aux, "h_value");
    return kernels::active().quadratic_value(x_bar, aux.b_diag, aux.b_vec);
}

void h_gradient(std::span<const double> x_bar, const FpAux &aux, std::span<double> out) {
    require_length(x_bar, aux, "h_gradient");
    if (out.size() != x_bar.size())
        throw DimensionError("h_gradient: output length mismatch");
    kernels::active().quadratic_gradient(x_bar, aux.b_diag, aux.b_vec, out);
}

DenseMatrix h_gradient(const DenseMatrix &x, const IndexSet &omega_bar, const FpAux &aux) {
    const std::vector<double> x_bar = vec_extract(x, omega_bar);
    std::vector<double> grad(x_bar.size());
    h_gradient(x_bar, aux, grad);
    return vec_scatter(grad, omega_bar);
}

StepSize lipschitz_step(const FpAux &aux, LipschitzRule rule) {
    if (aux.b_diag.empty())
        throw DegenerateInputError("lipschitz_step: no unobserved entries");
    const double top = *std::max_element(aux.b_diag.begin(), aux.b_diag.end());
    if (!(top > 0.0))
        throw NumericError("lipschitz_step: B is not positive definite");
    const double lipschitz = rule == LipschitzRule::paper ? top * top : 2.0 * top;
    return {lipschitz, 1.0 / lipschitz};
}

double surrogate_value(std::span<const double> x_bar, const FpAux &aux,
                       const Alphabet &alphabet, double alpha) {
    require_alpha(alpha);
    require_length(x_bar, aux, "surrogate_value");
    if (alphabet.size() != aux.letters)
        throw DimensionError("surrogate_value: alphabet size does not match auxiliaries");
    const double root = std::sqrt(alpha);
    double sum = 0.0;
    for (std::size_t k = 0; k < aux.letters; ++k) {
        const double letter = alphabet[k];
        const double *beta = aux.beta.data() + k * aux.count;
        for (std::size_t j = 0; j < aux.count; ++j) {
            const double d = x_bar[j] - letter;
            sum += beta[j] * (beta[j] * (d * d + alpha) - 2.0 * root);
        }
    }
    return sum;
}

} // namespace damc
