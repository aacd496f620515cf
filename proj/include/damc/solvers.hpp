#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "damc/matrix.hpp"
#include "damc/regularizer.hpp"
#include "damc/svd.hpp"

namespace damc {

enum class MomentumSign {
    /// Y = (1 + g) X_{t-1} - g X_{t-2}, the Nesterov extrapolation.
    extrapolate,
    /// Y = (1 + g) X_{t-1} + g X_{t-2}. Not an extrapolation; for comparison runs.
    literal_plus,
};

struct SolverConfig {
    double lambda = 10.0;
    double zeta = 0.15;
    double alpha = 0.1;
    std::size_t max_inner_iters = 500;
    std::size_t max_outer_iters = 20;
    double inner_tol = 1e-4; ///< relative Frobenius change of the iterate
    double outer_tol = 1e-3; ///< relative max-norm change of diag(B)
    std::uint64_t seed = 0;
    std::optional<double> mu_override;
    LipschitzRule lipschitz_rule = LipschitzRule::paper;
    MomentumSign momentum_sign = MomentumSign::extrapolate;
    /// false forces gamma = 0 on every step.
    bool momentum = true;
    SvdOptions svd;
    /// Called with every SVT argument; used by tests to observe the clamp.
    std::function<void(const DenseMatrix &)> on_svt_argument;

    /// Throws ConfigError on out-of-range values.
    void validate() const;
};

/// Held-out truth used only for NMSE tracing.
struct GroundTruth {
    DenseMatrix truth;
    IndexSet eval_set;
};

struct TraceRecord {
    std::size_t iteration = 0; ///< 1-based, cumulative over outer loops and phases
    std::size_t outer = 0;     ///< 1-based outer iteration (1 for single-loop solvers)
    std::string phase;
    double objective = 0.0;
    std::optional<double> nmse;
    double rel_change = 0.0;
    double elapsed_ms = 0.0;
};

struct SolverRun {
    std::string solver;
    DenseMatrix final_x{1, 1};
    std::vector<TraceRecord> trace;
    bool converged = false;
    std::size_t outer_iterations = 0;
    std::size_t inner_iterations = 0;
    /// Set when there was nothing to regularize (every entry observed).
    bool degenerate = false;
};

/// Nesterov theta recursion: theta_t = (1 + sqrt(1 + 4 theta_{t-1}^2)) / 2.
struct MomentumState {
    double theta_prev = 1.0;
    double theta_curr = 1.6180339887498949;
    DenseMatrix x_prev;
    DenseMatrix x_prev2;

    explicit MomentumState(DenseMatrix start);
    /// Shifts the iterate history and advances theta.
    void advance(DenseMatrix next);
};

/// gamma_t = (theta_prev - 1) / theta_curr; zero on the first step.
double gamma_schedule(const MomentumState &state);

DenseMatrix momentum_extrapolate(const DenseMatrix &x_prev, const DenseMatrix &x_prev2,
                                 double gamma, MomentumSign sign = MomentumSign::extrapolate);

/// argmin_u sum_k |u - a_k| + (u - y)^2 / (2 zeta), solved exactly by
/// enumerating the breakpoints a_k and the stationary point of every linear
/// piece. zeta == 0 returns y.
double prox_discrete_l1(double y, const Alphabet &alphabet, double zeta);

/// Entries outside omega of `o` are ignored. `initial` defaults to zeros.
SolverRun soft_impute(const DenseMatrix &o, const IndexSet &omega, const SolverConfig &cfg,
                      const GroundTruth *truth = nullptr, const DenseMatrix *initial = nullptr);

SolverRun ais_impute(const DenseMatrix &o, const IndexSet &omega, const SolverConfig &cfg,
                     const GroundTruth *truth = nullptr, const DenseMatrix *initial = nullptr);

/// `initial` defaults to a seeded uniform draw over [a_1, a_|A|].
SolverRun l1_discrete_complete(const DenseMatrix &o, const IndexSet &omega,
                               const Alphabet &alphabet, const SolverConfig &cfg,
                               const GroundTruth *truth = nullptr,
                               const DenseMatrix *initial = nullptr);

SolverRun l0_fp_complete(const DenseMatrix &o, const IndexSet &omega, const Alphabet &alphabet,
                         const SolverConfig &cfg, const GroundTruth *truth = nullptr,
                         const DenseMatrix *initial = nullptr);

/// l1_discrete_complete to convergence, then l0_fp_complete started from its
/// output. Trace records carry phase "l1" or "l0".
SolverRun warm_start_complete(const DenseMatrix &o, const IndexSet &omega,
                              const Alphabet &alphabet, const SolverConfig &cfg,
                              const GroundTruth *truth = nullptr);

/// Seeded uniform draw over [a_1, a_|A|] with the entries of omega set to o.
DenseMatrix random_initial(const DenseMatrix &o, const IndexSet &omega, const Alphabet &alphabet,
                           std::uint64_t seed);

enum class SolverKind { si, ais, l1, l0, warm };

std::string_view to_string(SolverKind kind);
/// Throws ConfigError for unknown names.
SolverKind parse_solver_kind(std::string_view name);

SolverRun run_solver(SolverKind kind, const DenseMatrix &o, const IndexSet &omega,
                     const Alphabet &alphabet, const SolverConfig &cfg,
                     const GroundTruth *truth = nullptr);

} // namespace damc
