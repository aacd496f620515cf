#include "damc/solvers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>
#include <string>
#include <utility>

#include <spdlog/spdlog.h>

#include "damc/error.hpp"
#include "damc/kernels.hpp"
#include "damc/metrics.hpp"

namespace damc {

void SolverConfig::validate() const {
    auto finite_nonneg = [](double v) { return std::isfinite(v) && v >= 0.0; };
    if (!finite_nonneg(lambda))
        throw ConfigError("lambda must be finite and nonnegative");
    if (!finite_nonneg(zeta))
        throw ConfigError("zeta must be finite and nonnegative");
    if (!(alpha > 0.0) || !std::isfinite(alpha))
        throw ConfigError("alpha must be finite and positive");
    if (max_inner_iters < 1 || max_outer_iters < 1)
        throw ConfigError("iteration caps must be at least 1");
    if (!(inner_tol > 0.0) || !(outer_tol > 0.0))
        throw ConfigError("tolerances must be positive");
    if (mu_override && !(*mu_override > 0.0 && std::isfinite(*mu_override)))
        throw ConfigError("mu override must be finite and positive");
}

MomentumState::MomentumState(DenseMatrix start) : x_prev(start), x_prev2(std::move(start)) {}

void MomentumState::advance(DenseMatrix next) {
    theta_prev = theta_curr;
    theta_curr = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * theta_curr * theta_curr));
    x_prev2 = std::exchange(x_prev, std::move(next));
}

double gamma_schedule(const MomentumState &state) {
    return (state.theta_prev - 1.0) / state.theta_curr;
}

DenseMatrix momentum_extrapolate(const DenseMatrix &x_prev, const DenseMatrix &x_prev2,
                                 double gamma, MomentumSign sign) {
    if (x_prev.rows() != x_prev2.rows() || x_prev.cols() != x_prev2.cols())
        throw DimensionError("momentum_extrapolate: shape mismatch");
    DenseMatrix out(x_prev.rows(), x_prev.cols());
    const double second = sign == MomentumSign::extrapolate ? -gamma : gamma;
    kernels::active().axpby(1.0 + gamma, x_prev.values(), second, x_prev2.values(), out.values());
    return out;
}

double prox_discrete_l1(double y, const Alphabet &alphabet, double zeta) {
    if (!(zeta >= 0.0))
        throw ConfigError("prox_discrete_l1: zeta must be nonnegative");
    if (zeta == 0.0)
        return y;
    const auto letters = alphabet.values();
    const auto count = static_cast<long>(letters.size());
    // On the piece with `below` letters under u the objective's slope from the
    // absolute values is s = 2 below - count, so the stationary point is y - zeta s.
    for (long below = 0; below <= count; ++below) {
        const double u = y - zeta * static_cast<double>(2 * below - count);
        const double lo = below == 0 ? -std::numeric_limits<double>::infinity() : letters[below - 1];
        const double hi = below == count ? std::numeric_limits<double>::infinity() : letters[below];
        if (u > lo && u < hi)
            return u;
    }
    // Otherwise the minimizer sits on a breakpoint: 0 must lie in the
    // subdifferential (a_k - y) / zeta + [2k - count, 2k - count + 2].
    for (long k = 0; k < count; ++k) {
        const double gap = y - letters[k];
        if (gap >= zeta * static_cast<double>(2 * k - count) &&
            gap <= zeta * static_cast<double>(2 * k - count + 2))
            return letters[k];
    }
    // Only reachable through rounding at a piece boundary.
    auto objective = [&](double u) {
        double sum = (u - y) * (u - y) / (2.0 * zeta);
        for (double a : letters)
            sum += std::abs(u - a);
        return sum;
    };
    return *std::min_element(letters.begin(), letters.end(),
                             [&](double a, double b) { return objective(a) < objective(b); });
}

DenseMatrix random_initial(const DenseMatrix &o, const IndexSet &omega, const Alphabet &alphabet,
                           std::uint64_t seed) {
    DenseMatrix x(o.rows(), o.cols());
    if (alphabet.size() == 1) {
        std::fill(x.values().begin(), x.values().end(), alphabet.front());
    } else {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> uniform(alphabet.front(), alphabet.back());
        for (double &v : x.values())
            v = uniform(rng);
    }
    copy_entries(x, o, omega);
    return x;
}

namespace {

using Clock = std::chrono::steady_clock;

void require_problem(const DenseMatrix &o, const IndexSet &omega) {
    if (o.rows() != omega.rows() || o.cols() != omega.cols())
        throw DimensionError("observation set shape does not match the observed matrix");
}

/// Shared machinery of the proximal-gradient solvers: the SVT operator, the
/// trace, and the accelerated inner loop.
class Engine {
  public:
    Engine(std::string solver, const DenseMatrix &o, const IndexSet &omega,
           const SolverConfig &cfg, const GroundTruth *truth)
        : o_(o), omega_(omega), omega_bar_(complement(omega)), cfg_(cfg), truth_(truth),
          svt_(cfg.svd), start_(Clock::now()) {
        cfg.validate();
        require_problem(o, omega);
        run_.solver = std::move(solver);
    }

    const IndexSet &omega_bar() const { return omega_bar_; }
    const DenseMatrix &observed() const { return o_; }
    const IndexSet &omega() const { return omega_; }
    const SolverConfig &config() const { return cfg_; }

    /// f(X) = 1/2 ||P_omega(X - O)||_F^2
    double data_fit(const DenseMatrix &x) const {
        const auto xv = x.values();
        const auto ov = o_.values();
        double sum = 0.0;
        for (auto k : omega_.offsets()) {
            const double d = xv[k] - ov[k];
            sum += d * d;
        }
        return 0.5 * sum;
    }

    /// Runs the accelerated inner loop from `x`. `prepare` turns the
    /// extrapolated point into the SVT argument (before the data clamp);
    /// `penalty` returns the discrete term of the logged objective.
    template <class Prepare, class Penalty>
    bool inner_loop(DenseMatrix &x, std::size_t outer, const std::string &phase, Prepare prepare,
                    Penalty penalty) {
        MomentumState state(std::move(x));
        bool converged = false;
        for (std::size_t t = 1; t <= cfg_.max_inner_iters; ++t) {
            const double gamma = cfg_.momentum ? gamma_schedule(state) : 0.0;
            DenseMatrix arg = gamma == 0.0 ? state.x_prev
                                           : momentum_extrapolate(state.x_prev, state.x_prev2,
                                                                  gamma, cfg_.momentum_sign);
            prepare(arg);
            copy_entries(arg, o_, omega_);
            if (cfg_.on_svt_argument)
                cfg_.on_svt_argument(arg);

            SvtResult step = svt_.apply(arg, cfg_.lambda);
            const auto &k = kernels::active();
            const double change = std::sqrt(k.squared_distance(step.value.values(), state.x_prev.values()));
            const double rel = change / std::max(1.0, state.x_prev.frobenius_norm());
            const double objective =
                data_fit(step.value) + cfg_.lambda * step.nuclear_norm() + penalty(step.value);
            record(outer, phase, objective, rel, step.value);
            ++run_.inner_iterations;
            state.advance(std::move(step.value));
            if (rel <= cfg_.inner_tol) {
                converged = true;
                break;
            }
        }
        x = std::move(state.x_prev);
        return converged;
    }

    void record(std::size_t outer, const std::string &phase, double objective, double rel,
                const DenseMatrix &x) {
        TraceRecord rec;
        rec.iteration = run_.trace.size() + 1;
        rec.outer = outer;
        rec.phase = phase;
        rec.objective = objective;
        rec.rel_change = rel;
        if (truth_ != nullptr && !truth_->eval_set.empty())
            rec.nmse = nmse(x, truth_->truth, truth_->eval_set);
        rec.elapsed_ms =
            std::chrono::duration<double, std::milli>(Clock::now() - start_).count();
        run_.trace.push_back(std::move(rec));
    }

    SolverRun finish(DenseMatrix x, bool converged) {
        run_.final_x = std::move(x);
        run_.converged = converged;
        return std::move(run_);
    }

    SolverRun &run() { return run_; }

  private:
    const DenseMatrix &o_;
    const IndexSet &omega_;
    IndexSet omega_bar_;
    const SolverConfig &cfg_;
    const GroundTruth *truth_;
    SvtOperator svt_;
    Clock::time_point start_;
    SolverRun run_;
};

DenseMatrix start_point(const DenseMatrix &o, const DenseMatrix *initial) {
    if (initial == nullptr)
        return DenseMatrix(o.rows(), o.cols());
    if (initial->rows() != o.rows() || initial->cols() != o.cols())
        throw DimensionError("initial iterate shape does not match the observed matrix");
    return *initial;
}

SolverRun accelerated_svt(std::string solver, const DenseMatrix &o, const IndexSet &omega,
                          SolverConfig cfg, const GroundTruth *truth, const DenseMatrix *initial,
                          bool momentum) {
    cfg.momentum = cfg.momentum && momentum;
    Engine engine(solver, o, omega, cfg, truth);
    DenseMatrix x = start_point(o, initial);
    const bool converged = engine.inner_loop(
        x, 1, solver, [](DenseMatrix &) {}, [](const DenseMatrix &) { return 0.0; });
    engine.run().outer_iterations = 1;
    return engine.finish(std::move(x), converged);
}

double relative_max_change(std::span<const double> next, std::span<const double> prev) {
    double diff = 0.0;
    double scale = 0.0;
    for (std::size_t j = 0; j < next.size(); ++j) {
        diff = std::max(diff, std::abs(next[j] - prev[j]));
        scale = std::max(scale, std::abs(prev[j]));
    }
    return diff / std::max(scale, std::numeric_limits<double>::min());
}

} // namespace

SolverRun soft_impute(const DenseMatrix &o, const IndexSet &omega, const SolverConfig &cfg,
                      const GroundTruth *truth, const DenseMatrix *initial) {
    return accelerated_svt("si", o, omega, cfg, truth, initial, false);
}

SolverRun ais_impute(const DenseMatrix &o, const IndexSet &omega, const SolverConfig &cfg,
                     const GroundTruth *truth, const DenseMatrix *initial) {
    return accelerated_svt("ais", o, omega, cfg, truth, initial, true);
}

SolverRun l1_discrete_complete(const DenseMatrix &o, const IndexSet &omega,
                               const Alphabet &alphabet, const SolverConfig &cfg,
                               const GroundTruth *truth, const DenseMatrix *initial) {
    Engine engine("l1", o, omega, cfg, truth);
    DenseMatrix x = initial ? start_point(o, initial) : random_initial(o, omega, alphabet, cfg.seed);
    const IndexSet &omega_bar = engine.omega_bar();
    const double zeta = cfg.zeta;

    auto prepare = [&](DenseMatrix &y) {
        if (zeta == 0.0)
            return;
        auto values = y.values();
        for (auto k : omega_bar.offsets())
            values[k] = prox_discrete_l1(values[k], alphabet, zeta);
    };
    auto penalty = [&](const DenseMatrix &z) {
        return zeta == 0.0 ? 0.0 : zeta * discrete_l1_value(vec_extract(z, omega_bar), alphabet);
    };
    const bool converged = engine.inner_loop(x, 1, "l1", prepare, penalty);
    engine.run().outer_iterations = 1;
    return engine.finish(std::move(x), converged);
}

SolverRun l0_fp_complete(const DenseMatrix &o, const IndexSet &omega, const Alphabet &alphabet,
                         const SolverConfig &cfg, const GroundTruth *truth,
                         const DenseMatrix *initial) {
    Engine engine("l0", o, omega, cfg, truth);
    DenseMatrix x = initial ? start_point(o, initial) : random_initial(o, omega, alphabet, cfg.seed);
    const IndexSet &omega_bar = engine.omega_bar();

    if (omega_bar.empty()) {
        spdlog::warn("l0_fp_complete: every entry is observed; returning one SVT pass");
        SvtOperator svt(cfg.svd);
        const SvtResult step = svt.apply(apply_mask(o, omega), cfg.lambda);
        engine.record(1, "l0", engine.data_fit(step.value) + cfg.lambda * step.nuclear_norm(), 0.0,
                      step.value);
        engine.run().degenerate = true;
        engine.run().outer_iterations = 1;
        engine.run().inner_iterations = 1;
        return engine.finish(step.value, true);
    }

    if (cfg.zeta == 0.0) {
        // Without the discrete term the auxiliaries play no role and the
        // method is accelerated SVT with the data clamp.
        const bool converged = engine.inner_loop(
            x, 1, "l0", [](DenseMatrix &) {}, [](const DenseMatrix &) { return 0.0; });
        engine.run().outer_iterations = 1;
        return engine.finish(std::move(x), converged);
    }

    const double zeta = cfg.zeta;
    const double alpha = cfg.alpha;
    std::vector<double> x_bar(omega_bar.size());
    std::vector<double> grad(omega_bar.size());
    std::vector<double> previous_b;
    bool converged = false;

    for (std::size_t outer = 1; outer <= cfg.max_outer_iters; ++outer) {
        x_bar = vec_extract(x, omega_bar);
        const FpAux aux = update_fp_aux(x_bar, alphabet, alpha);
        if (!previous_b.empty()) {
            const double change = relative_max_change(aux.b_diag, previous_b);
            spdlog::debug("l0 outer {}: relative change of B {:.3e}", outer, change);
            if (change <= cfg.outer_tol) {
                converged = true;
                break;
            }
        }
        previous_b = aux.b_diag;
        const double mu = cfg.mu_override ? *cfg.mu_override : lipschitz_step(aux, cfg.lipschitz_rule).mu;
        const double step = mu * zeta;

        auto prepare = [&](DenseMatrix &y) {
            auto values = y.values();
            const auto offsets = omega_bar.offsets();
            for (std::size_t j = 0; j < offsets.size(); ++j)
                x_bar[j] = values[offsets[j]];
            h_gradient(x_bar, aux, grad);
            kernels::active().axpby(1.0, x_bar, -step, grad, x_bar);
            for (std::size_t j = 0; j < offsets.size(); ++j)
                values[offsets[j]] = x_bar[j];
        };
        auto penalty = [&](const DenseMatrix &z) {
            return zeta * discrete_l0_value(vec_extract(z, omega_bar), alphabet, alpha);
        };
        engine.inner_loop(x, outer, "l0", prepare, penalty);
        engine.run().outer_iterations = outer;
    }
    return engine.finish(std::move(x), converged);
}

SolverRun warm_start_complete(const DenseMatrix &o, const IndexSet &omega,
                              const Alphabet &alphabet, const SolverConfig &cfg,
                              const GroundTruth *truth) {
    SolverRun first = l1_discrete_complete(o, omega, alphabet, cfg, truth);
    SolverRun second = l0_fp_complete(o, omega, alphabet, cfg, truth, &first.final_x);

    SolverRun out;
    out.solver = "warm";
    out.trace = std::move(first.trace);
    const std::size_t offset = out.trace.size();
    const double elapsed = offset ? out.trace.back().elapsed_ms : 0.0;
    for (auto &rec : second.trace) {
        rec.iteration += offset;
        rec.elapsed_ms += elapsed;
        out.trace.push_back(std::move(rec));
    }
    out.final_x = std::move(second.final_x);
    out.converged = second.converged;
    out.degenerate = second.degenerate;
    out.outer_iterations = first.outer_iterations + second.outer_iterations;
    out.inner_iterations = first.inner_iterations + second.inner_iterations;
    return out;
}

std::string_view to_string(SolverKind kind) {
    switch (kind) {
    case SolverKind::si: return "si";
    case SolverKind::ais: return "ais";
    case SolverKind::l1: return "l1";
    case SolverKind::l0: return "l0";
    case SolverKind::warm: return "warm";
    }
    return "?";
}

SolverKind parse_solver_kind(std::string_view name) {
    for (auto kind : {SolverKind::si, SolverKind::ais, SolverKind::l1, SolverKind::l0, SolverKind::warm})
        if (to_string(kind) == name)
            return kind;
    throw ConfigError("unknown solver '" + std::string(name) + "' (expected si|ais|l1|l0|warm)");
}

SolverRun run_solver(SolverKind kind, const DenseMatrix &o, const IndexSet &omega,
                     const Alphabet &alphabet, const SolverConfig &cfg, const GroundTruth *truth) {
    switch (kind) {
    case SolverKind::si: return soft_impute(o, omega, cfg, truth);
    case SolverKind::ais: return ais_impute(o, omega, cfg, truth);
    case SolverKind::l1: return l1_discrete_complete(o, omega, alphabet, cfg, truth);
    case SolverKind::l0: return l0_fp_complete(o, omega, alphabet, cfg, truth);
    case SolverKind::warm: return warm_start_complete(o, omega, alphabet, cfg, truth);
    }
    throw ConfigError("unknown solver kind");
}

} // namespace damc
