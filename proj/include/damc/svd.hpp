#pragma once

#include <cstddef>
#include <optional>

#include <Eigen/Core>

#include "damc/matrix.hpp"

namespace damc {

/// A = U diag(sigma) V^T with column-orthonormal U (m x r), V (n x r) and
/// nonincreasing nonnegative sigma.
struct ThinSvd {
    Eigen::MatrixXd u;
    Eigen::VectorXd sigma;
    Eigen::MatrixXd v;

    std::size_t rank() const { return static_cast<std::size_t>(sigma.size()); }
    RowMajorMatrix reconstruct() const;
};

enum class SvtMethod {
    /// gram when the smaller side is at least 200, svd otherwise.
    automatic,
    /// Thin SVD (divide and conquer).
    svd,
    /// Symmetric eigendecomposition of the smaller Gram matrix. Singular
    /// values carry an absolute error near eps * sigma_max^2 / sigma.
    gram,
};

struct SvdOptions {
    /// Relative accuracy target. The full decomposition is accurate to
    /// working precision; the truncated path iterates until every kept
    /// triplet has residual <= max(tol, truncated_tol) * sigma_max.
    double tol = 1e-10;
    /// 0 requests the full thin SVD. A positive cap requests only the
    /// leading `rank_cap` triplets, computed by block subspace iteration.
    std::size_t rank_cap = 0;
    double truncated_tol = 1e-8;
    std::size_t max_subspace_iters = 500;
    /// Backend for SvtOperator when rank_cap == 0.
    SvtMethod svt_method = SvtMethod::automatic;
};

/// Thin SVD of `a`. r = min(m, n) unless options.rank_cap truncates it.
/// Throws NumericError when the decomposition fails to converge.
ThinSvd thin_svd(const DenseMatrix &a, const SvdOptions &options = {});

/// Singular values at or below lambda + this margin are treated as zero.
inline constexpr double svt_zero_margin = 1e-12;

/// SVT_lambda(A) = U (Sigma - lambda I)_+ V^T, using a full thin SVD.
DenseMatrix svt(const DenseMatrix &a, double lambda);

struct SvtResult {
    DenseMatrix value;
    /// Thresholded singular values sigma_i - lambda of the kept components.
    Eigen::VectorXd shrunk_sigma;
    std::size_t rank() const { return static_cast<std::size_t>(shrunk_sigma.size()); }
    double nuclear_norm() const { return shrunk_sigma.sum(); }
};

/// Repeated SVT evaluation for iterative solvers.
///
/// With rank_cap == 0 every call performs a full thin SVD. With a positive
/// rank_cap the operator runs block subspace iteration on a block of
/// rank_cap + oversampling columns, warm-started from the previous call's
/// right singular vectors. The block grows whenever every computed singular
/// value exceeds the threshold, so the result is the exact SVT up to the
/// iteration tolerance rather than a rank-capped approximation.
class SvtOperator {
  public:
    explicit SvtOperator(SvdOptions options = {});

    SvtResult apply(const DenseMatrix &a, double lambda);

    /// Drops the warm-start basis.
    void reset() { basis_.reset(); }
    std::size_t last_subspace_iterations() const { return last_iterations_; }

  private:
    SvtResult apply_full(const DenseMatrix &a, double lambda);
    SvtResult apply_gram(const DenseMatrix &a, double lambda);
    SvtResult apply_truncated(const DenseMatrix &a, double lambda);

    SvdOptions options_;
    std::optional<Eigen::MatrixXd> basis_;
    std::size_t block_ = 0;
    std::size_t last_iterations_ = 0;
};

} // namespace damc
