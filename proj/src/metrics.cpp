#include "damc/metrics.hpp"

#include "damc/error.hpp"

namespace damc {

double nmse(const DenseMatrix &x, const DenseMatrix &truth, const IndexSet &eval_set) {
    if (x.rows() != truth.rows() || x.cols() != truth.cols() || x.rows() != eval_set.rows() ||
        x.cols() != eval_set.cols())
        throw DimensionError("nmse: shape mismatch");
    if (eval_set.empty())
        throw MetricError("nmse: empty evaluation set");
    const auto xv = x.values();
    const auto ov = truth.values();
    double num = 0.0;
    double den = 0.0;
    for (auto k : eval_set.offsets()) {
        const double d = xv[k] - ov[k];
        num += d * d;
        den += ov[k] * ov[k];
    }
    if (!(den > 0.0))
        throw MetricError("nmse: ground truth is zero on the evaluation set");
    return num / den;
}

DenseMatrix alphabet_project(const DenseMatrix &x, const Alphabet &alphabet, const IndexSet &set) {
    if (x.rows() != set.rows() || x.cols() != set.cols())
        throw DimensionError("alphabet_project: shape mismatch");
    DenseMatrix out = x;
    auto values = out.values();
    for (auto k : set.offsets())
        values[k] = alphabet.nearest(values[k]);
    return out;
}

} // namespace damc
