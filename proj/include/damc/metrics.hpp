#pragma once

#include "damc/matrix.hpp"
#include "damc/regularizer.hpp"

namespace damc {

/// ||P_S(X - O)||_F^2 / ||P_S(O)||_F^2 over the evaluation set S.
/// Throws MetricError for an empty set or a zero denominator.
double nmse(const DenseMatrix &x, const DenseMatrix &truth, const IndexSet &eval_set);

/// Replaces each entry in `set` by its nearest letter (ties to the smaller).
DenseMatrix alphabet_project(const DenseMatrix &x, const Alphabet &alphabet, const IndexSet &set);

} // namespace damc
