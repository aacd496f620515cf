// Compiled with -mavx2 -mfma; only reached after a CPUID check.

#include <cmath>

#include "damc/kernels.hpp"

#if defined(__x86_64__) && defined(__AVX2__) && defined(__FMA__)
#include <immintrin.h>
#define DAMC_HAVE_AVX2 1
#endif

namespace damc::kernels {

#ifdef DAMC_HAVE_AVX2

namespace {

inline double hsum(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

inline __m256d abs_pd(__m256d v) { return _mm256_andnot_pd(_mm256_set1_pd(-0.0), v); }

void fp_accumulate(std::span<const double> x, double letter, double alpha,
                   std::span<double> beta, std::span<double> b_diag, std::span<double> b_vec) {
    const double root = std::sqrt(alpha);
    const __m256d vroot = _mm256_set1_pd(root);
    const __m256d valpha = _mm256_set1_pd(alpha);
    const __m256d vletter = _mm256_set1_pd(letter);
    const std::size_t n = x.size();
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
        const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(&x[j]), vletter);
        const __m256d bj = _mm256_div_pd(vroot, _mm256_fmadd_pd(d, d, valpha));
        const __m256d sq = _mm256_mul_pd(bj, bj);
        _mm256_storeu_pd(&beta[j], bj);
        _mm256_storeu_pd(&b_diag[j], _mm256_add_pd(_mm256_loadu_pd(&b_diag[j]), sq));
        _mm256_storeu_pd(&b_vec[j], _mm256_fmadd_pd(vletter, sq, _mm256_loadu_pd(&b_vec[j])));
    }
    for (; j < n; ++j) {
        const double d = x[j] - letter;
        const double bj = root / std::fma(d, d, alpha);
        const double sq = bj * bj;
        beta[j] = bj;
        b_diag[j] += sq;
        b_vec[j] = std::fma(letter, sq, b_vec[j]);
    }
}

double l0_affinity_sum(std::span<const double> x, double letter, double alpha) {
    const __m256d valpha = _mm256_set1_pd(alpha);
    const __m256d vletter = _mm256_set1_pd(letter);
    __m256d acc = _mm256_setzero_pd();
    const std::size_t n = x.size();
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
        const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(&x[j]), vletter);
        acc = _mm256_add_pd(acc, _mm256_div_pd(valpha, _mm256_fmadd_pd(d, d, valpha)));
    }
    double sum = hsum(acc);
    for (; j < n; ++j) {
        const double d = x[j] - letter;
        sum += alpha / std::fma(d, d, alpha);
    }
    return sum;
}

double abs_distance_sum(std::span<const double> x, double letter) {
    const __m256d vletter = _mm256_set1_pd(letter);
    __m256d acc = _mm256_setzero_pd();
    const std::size_t n = x.size();
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4)
        acc = _mm256_add_pd(acc, abs_pd(_mm256_sub_pd(_mm256_loadu_pd(&x[j]), vletter)));
    double sum = hsum(acc);
    for (; j < n; ++j)
        sum += std::abs(x[j] - letter);
    return sum;
}

void quadratic_gradient(std::span<const double> x, std::span<const double> b_diag,
                        std::span<const double> b_vec, std::span<double> out) {
    const __m256d two = _mm256_set1_pd(2.0);
    const std::size_t n = x.size();
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
        const __m256d bx = _mm256_mul_pd(_mm256_loadu_pd(&b_diag[j]), _mm256_loadu_pd(&x[j]));
        _mm256_storeu_pd(&out[j], _mm256_mul_pd(two, _mm256_sub_pd(bx, _mm256_loadu_pd(&b_vec[j]))));
    }
    for (; j < n; ++j)
        out[j] = 2.0 * (b_diag[j] * x[j] - b_vec[j]);
}

double quadratic_value(std::span<const double> x, std::span<const double> b_diag,
                       std::span<const double> b_vec) {
    const __m256d two = _mm256_set1_pd(2.0);
    __m256d acc = _mm256_setzero_pd();
    const std::size_t n = x.size();
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
        const __m256d vx = _mm256_loadu_pd(&x[j]);
        // x (B x - 2 b)
        const __m256d inner =
            _mm256_fmsub_pd(_mm256_loadu_pd(&b_diag[j]), vx, _mm256_mul_pd(two, _mm256_loadu_pd(&b_vec[j])));
        acc = _mm256_fmadd_pd(vx, inner, acc);
    }
    double sum = hsum(acc);
    for (; j < n; ++j)
        sum += x[j] * (b_diag[j] * x[j] - 2.0 * b_vec[j]);
    return sum;
}

void axpby(double a, std::span<const double> x, double b, std::span<const double> y,
           std::span<double> out) {
    const __m256d va = _mm256_set1_pd(a);
    const __m256d vb = _mm256_set1_pd(b);
    const std::size_t n = x.size();
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
        const __m256d by = _mm256_mul_pd(vb, _mm256_loadu_pd(&y[j]));
        _mm256_storeu_pd(&out[j], _mm256_fmadd_pd(va, _mm256_loadu_pd(&x[j]), by));
    }
    for (; j < n; ++j)
        out[j] = std::fma(a, x[j], b * y[j]);
}

double squared_distance(std::span<const double> x, std::span<const double> y) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    const std::size_t n = x.size();
    std::size_t j = 0;
    for (; j + 8 <= n; j += 8) {
        const __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(&x[j]), _mm256_loadu_pd(&y[j]));
        const __m256d d1 = _mm256_sub_pd(_mm256_loadu_pd(&x[j + 4]), _mm256_loadu_pd(&y[j + 4]));
        acc0 = _mm256_fmadd_pd(d0, d0, acc0);
        acc1 = _mm256_fmadd_pd(d1, d1, acc1);
    }
    double sum = hsum(_mm256_add_pd(acc0, acc1));
    for (; j < n; ++j) {
        const double d = x[j] - y[j];
        sum += d * d;
    }
    return sum;
}

double squared_norm(std::span<const double> x) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    const std::size_t n = x.size();
    std::size_t j = 0;
    for (; j + 8 <= n; j += 8) {
        const __m256d v0 = _mm256_loadu_pd(&x[j]);
        const __m256d v1 = _mm256_loadu_pd(&x[j + 4]);
        acc0 = _mm256_fmadd_pd(v0, v0, acc0);
        acc1 = _mm256_fmadd_pd(v1, v1, acc1);
    }
    double sum = hsum(_mm256_add_pd(acc0, acc1));
    for (; j < n; ++j)
        sum += x[j] * x[j];
    return sum;
}

constexpr KernelTable table{
    "avx2",          fp_accumulate, l0_affinity_sum,  abs_distance_sum, quadratic_gradient,
    quadratic_value, axpby,         squared_distance, squared_norm,
};

} // namespace

const KernelTable *avx2_table() { return &table; }

#else

const KernelTable *avx2_table() { return nullptr; }

#endif

} // namespace damc::kernels
