#include "damc/svd.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include "damc/error.hpp"

namespace damc {

namespace {

using ConstMap = Eigen::Map<const RowMajorMatrix>;

constexpr std::size_t oversampling = 10;
constexpr std::uint64_t basis_seed = 0x5eed5eedULL;
constexpr std::size_t gram_min_side = 200;

ThinSvd full_svd(const ConstMap &a) {
    Eigen::BDCSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (svd.info() != Eigen::Success)
        throw NumericError("thin_svd: BDCSVD did not converge on a " + std::to_string(a.rows()) +
                           "x" + std::to_string(a.cols()) + " matrix");
    ThinSvd out{svd.matrixU(), svd.singularValues(), svd.matrixV()};
    if (!out.sigma.allFinite() || !out.u.allFinite() || !out.v.allFinite())
        throw NumericError("thin_svd: non-finite factors");
    return out;
}

Eigen::MatrixXd orthonormal_columns(const Eigen::MatrixXd &m) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
    return qr.householderQ() * Eigen::MatrixXd::Identity(m.rows(), m.cols());
}

Eigen::MatrixXd random_basis(Eigen::Index rows, Eigen::Index cols, Eigen::Index first_col) {
    std::mt19937_64 rng(basis_seed + static_cast<std::uint64_t>(first_col));
    std::normal_distribution<double> normal;
    Eigen::MatrixXd out(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i)
            out(i, j) = normal(rng);
    return out;
}

/// Widens or narrows `basis` to `cols` columns and re-orthonormalizes.
Eigen::MatrixXd fit_basis(const Eigen::MatrixXd *basis, Eigen::Index rows, Eigen::Index cols) {
    Eigen::MatrixXd start(rows, cols);
    Eigen::Index have = 0;
    if (basis != nullptr && basis->rows() == rows) {
        have = std::min<Eigen::Index>(basis->cols(), cols);
        start.leftCols(have) = basis->leftCols(have);
    }
    if (have < cols)
        start.rightCols(cols - have) = random_basis(rows, cols - have, have);
    return orthonormal_columns(start);
}

struct SubspaceResult {
    ThinSvd svd;
    std::size_t iterations = 0;
    bool converged = false;
    double residual = 0.0;
};

/// Block subspace iteration with Rayleigh-Ritz extraction. `checked` maps the
/// current singular value estimates to how many leading triplets must meet
/// the residual tolerance.
template <class Checked>
SubspaceResult subspace_svd(const ConstMap &a, Eigen::MatrixXd v, Checked checked, double tol,
                            std::size_t max_iters) {
    SubspaceResult out;
    for (std::size_t it = 1; it <= max_iters; ++it) {
        const Eigen::MatrixXd w = a * v;
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(w);
        const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(w.rows(), w.cols());
        const Eigen::MatrixXd r = qr.matrixQR().topRows(w.cols()).triangularView<Eigen::Upper>();
        Eigen::JacobiSVD<Eigen::MatrixXd> small(r, Eigen::ComputeFullU | Eigen::ComputeFullV);

        out.svd.u = q * small.matrixU();
        out.svd.sigma = small.singularValues();
        out.svd.v = v * small.matrixV();
        out.iterations = it;

        const Eigen::MatrixXd back = a.transpose() * out.svd.u;
        const Eigen::Index count =
            std::min<Eigen::Index>(static_cast<Eigen::Index>(checked(out.svd.sigma)), back.cols());
        const double scale = std::max(out.svd.sigma.size() ? out.svd.sigma(0) : 0.0,
                                      std::numeric_limits<double>::min());
        double worst = 0.0;
        for (Eigen::Index i = 0; i < count; ++i)
            worst = std::max(worst, (back.col(i) - out.svd.sigma(i) * out.svd.v.col(i)).norm());
        out.residual = worst / scale;
        if (out.residual <= tol) {
            out.converged = true;
            return out;
        }
        v = orthonormal_columns(back);
    }
    return out;
}

} // namespace

RowMajorMatrix ThinSvd::reconstruct() const {
    return u * sigma.asDiagonal() * v.transpose();
}

ThinSvd thin_svd(const DenseMatrix &a, const SvdOptions &options) {
    const ConstMap map = a.eigen();
    const auto full_rank = std::min(a.rows(), a.cols());
    if (options.rank_cap == 0 || options.rank_cap + oversampling >= full_rank) {
        ThinSvd out = full_svd(map);
        if (options.rank_cap > 0 && options.rank_cap < full_rank) {
            const auto k = static_cast<Eigen::Index>(options.rank_cap);
            out.u = out.u.leftCols(k).eval();
            out.v = out.v.leftCols(k).eval();
            out.sigma = out.sigma.head(k).eval();
        }
        return out;
    }
    const auto block = static_cast<Eigen::Index>(options.rank_cap + oversampling);
    const auto cap = options.rank_cap;
    auto result = subspace_svd(
        map, fit_basis(nullptr, map.cols(), block), [cap](const Eigen::VectorXd &) { return cap; },
        std::max(options.tol, options.truncated_tol), options.max_subspace_iters);
    if (!result.converged)
        throw NumericError("thin_svd: subspace iteration did not converge after " +
                           std::to_string(result.iterations) + " iterations (residual " +
                           std::to_string(result.residual) + ")");
    const auto k = static_cast<Eigen::Index>(cap);
    return {result.svd.u.leftCols(k), result.svd.sigma.head(k), result.svd.v.leftCols(k)};
}

DenseMatrix svt(const DenseMatrix &a, double lambda) {
    return SvtOperator{}.apply(a, lambda).value;
}

SvtOperator::SvtOperator(SvdOptions options) : options_(options) {}

SvtResult SvtOperator::apply(const DenseMatrix &a, double lambda) {
    if (!(lambda >= 0.0) || !std::isfinite(lambda))
        throw ConfigError("svt: lambda must be finite and nonnegative");
    a.require_finite("svt argument");
    if (options_.rank_cap > 0)
        return apply_truncated(a, lambda);
    const bool gram = options_.svt_method == SvtMethod::gram ||
                      (options_.svt_method == SvtMethod::automatic &&
                       std::min(a.rows(), a.cols()) >= gram_min_side);
    return gram ? apply_gram(a, lambda) : apply_full(a, lambda);
}

namespace {

SvtResult shrink(const Eigen::MatrixXd &u, const Eigen::VectorXd &sigma, const Eigen::MatrixXd &v,
                 double lambda, std::size_t rows, std::size_t cols) {
    Eigen::Index kept = 0;
    while (kept < sigma.size() && sigma(kept) > lambda + svt_zero_margin)
        ++kept;
    SvtResult out{DenseMatrix(rows, cols), sigma.head(kept).array() - lambda};
    if (kept > 0)
        out.value.eigen().noalias() =
            (u.leftCols(kept) * out.shrunk_sigma.asDiagonal()) * v.leftCols(kept).transpose();
    out.value.require_finite("svt");
    return out;
}

} // namespace

SvtResult SvtOperator::apply_full(const DenseMatrix &a, double lambda) {
    const ThinSvd svd = full_svd(a.eigen());
    last_iterations_ = 0;
    return shrink(svd.u, svd.sigma, svd.v, lambda, a.rows(), a.cols());
}

SvtResult SvtOperator::apply_gram(const DenseMatrix &a, double lambda) {
    const ConstMap map = a.eigen();
    const bool wide = map.rows() <= map.cols();
    const Eigen::Index side = wide ? map.rows() : map.cols();
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(side, side);
    if (wide)
        gram.selfadjointView<Eigen::Lower>().rankUpdate(map);
    else
        gram.selfadjointView<Eigen::Lower>().rankUpdate(map.transpose());
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
    if (eig.info() != Eigen::Success)
        throw NumericError("svt: eigensolver did not converge on a " + std::to_string(side) + "x" +
                           std::to_string(side) + " Gram matrix");
    last_iterations_ = 0;

    // Eigenvalues are ascending; walk from the top.
    const Eigen::VectorXd &values = eig.eigenvalues();
    Eigen::Index kept = 0;
    while (kept < side && std::sqrt(std::max(values(side - 1 - kept), 0.0)) > lambda + svt_zero_margin)
        ++kept;
    SvtResult out{DenseMatrix(a.rows(), a.cols()), Eigen::VectorXd(kept)};
    if (kept == 0)
        return out;
    const Eigen::MatrixXd basis = eig.eigenvectors().rightCols(kept).rowwise().reverse();
    Eigen::VectorXd factor(kept);
    for (Eigen::Index i = 0; i < kept; ++i) {
        const double sigma = std::sqrt(values(side - 1 - i));
        out.shrunk_sigma(i) = sigma - lambda;
        factor(i) = out.shrunk_sigma(i) / sigma;
    }
    // SVT(A) = U diag((s - l) / s) U^T A, or A V diag((s - l) / s) V^T.
    if (wide) {
        const Eigen::MatrixXd projected = basis.transpose() * map;
        out.value.eigen().noalias() = (basis * factor.asDiagonal()) * projected;
    } else {
        const Eigen::MatrixXd projected = map * basis;
        out.value.eigen().noalias() = (projected * factor.asDiagonal()) * basis.transpose();
    }
    out.value.require_finite("svt");
    return out;
}

SvtResult SvtOperator::apply_truncated(const DenseMatrix &a, double lambda) {
    const ConstMap map = a.eigen();
    const auto full_rank = std::min(a.rows(), a.cols());
    if (block_ == 0 || (basis_ && basis_->rows() != map.cols()))
        block_ = options_.rank_cap + oversampling;
    const double tol = std::max(options_.tol, options_.truncated_tol);
    const auto above = [lambda](const Eigen::VectorXd &s) {
        std::size_t k = 0;
        while (k < static_cast<std::size_t>(s.size()) && s(static_cast<Eigen::Index>(k)) > lambda + svt_zero_margin)
            ++k;
        return k;
    };

    while (2 * block_ < full_rank) {
        const auto cols = static_cast<Eigen::Index>(block_);
        auto result = subspace_svd(map, fit_basis(basis_ ? &*basis_ : nullptr, map.cols(), cols),
                                   above, tol, options_.max_subspace_iters);
        last_iterations_ = result.iterations;
        basis_ = result.svd.v;
        const std::size_t kept = above(result.svd.sigma);
        if (kept + oversampling / 2 >= block_) {
            block_ *= 2;
            continue;
        }
        if (!result.converged)
            throw NumericError("svt: subspace iteration did not converge after " +
                               std::to_string(result.iterations) + " iterations (residual " +
                               std::to_string(result.residual) + ", block " +
                               std::to_string(block_) + ")");
        // Shrink the block again when the threshold leaves it mostly empty.
        if (block_ > options_.rank_cap + oversampling && 4 * (kept + oversampling) < block_)
            block_ /= 2;
        return shrink(result.svd.u, result.svd.sigma, result.svd.v, lambda, a.rows(), a.cols());
    }
    basis_.reset();
    return apply_full(a, lambda);
}

} // namespace damc
