#include <cmath>

#include "damc/kernels.hpp"

namespace damc::kernels {

namespace {

void fp_accumulate(std::span<const double> x, double letter, double alpha,
                   std::span<double> beta, std::span<double> b_diag, std::span<double> b_vec) {
    const double root = std::sqrt(alpha);
    for (std::size_t j = 0; j < x.size(); ++j) {
        const double d = x[j] - letter;
        const double bj = root / (d * d + alpha);
        const double sq = bj * bj;
        beta[j] = bj;
        b_diag[j] += sq;
        b_vec[j] += letter * sq;
    }
}

double l0_affinity_sum(std::span<const double> x, double letter, double alpha) {
    double sum = 0.0;
    for (double v : x) {
        const double d = v - letter;
        sum += alpha / (d * d + alpha);
    }
    return sum;
}

double abs_distance_sum(std::span<const double> x, double letter) {
    double sum = 0.0;
    for (double v : x)
        sum += std::abs(v - letter);
    return sum;
}

void quadratic_gradient(std::span<const double> x, std::span<const double> b_diag,
                        std::span<const double> b_vec, std::span<double> out) {
    for (std::size_t j = 0; j < x.size(); ++j)
        out[j] = 2.0 * b_diag[j] * x[j] - 2.0 * b_vec[j];
}

double quadratic_value(std::span<const double> x, std::span<const double> b_diag,
                       std::span<const double> b_vec) {
    double sum = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j)
        sum += b_diag[j] * x[j] * x[j] - 2.0 * b_vec[j] * x[j];
    return sum;
}

void axpby(double a, std::span<const double> x, double b, std::span<const double> y,
           std::span<double> out) {
    for (std::size_t j = 0; j < x.size(); ++j)
        out[j] = a * x[j] + b * y[j];
}

double squared_distance(std::span<const double> x, std::span<const double> y) {
    double sum = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
        const double d = x[j] - y[j];
        sum += d * d;
    }
    return sum;
}

double squared_norm(std::span<const double> x) {
    double sum = 0.0;
    for (double v : x)
        sum += v * v;
    return sum;
}

constexpr KernelTable table{
    "scalar",         fp_accumulate, l0_affinity_sum,  abs_distance_sum, quadratic_gradient,
    quadratic_value, axpby,         squared_distance, squared_norm,
};

} // namespace

const KernelTable &scalar() { return table; }

} // namespace damc::kernels
