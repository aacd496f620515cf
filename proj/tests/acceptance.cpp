// Acceptance suite. Prints one PASS/FAIL line per criterion.
//
//   damc_acceptance                 run every criterion
//   damc_acceptance --criterion 6   run one criterion
//
// Exit status: 0 when every selected criterion passed, 1 otherwise, 77 when
// the only selected criterion was skipped for missing data.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <Eigen/SVD>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "damc/data.hpp"
#include "damc/experiments.hpp"
#include "damc/metrics.hpp"
#include "damc/regularizer.hpp"
#include "damc/solvers.hpp"
#include "damc/svd.hpp"

#ifndef DAMC_DEFAULT_MOVIELENS
#define DAMC_DEFAULT_MOVIELENS "data/ml-100k/u.data"
#endif

using namespace damc;

namespace {

enum class Status { pass, fail, skip };

struct Outcome {
    Status status = Status::fail;
    std::string detail;
};

Outcome verdict(bool ok, std::string detail) {
    return {ok ? Status::pass : Status::fail, std::move(detail)};
}

using Rng = std::mt19937_64;

double uniform(Rng &rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

std::size_t uniform_int(Rng &rng, std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

/// Strictly increasing letters with gaps of at least 0.1.
Alphabet random_alphabet(Rng &rng, std::size_t letters) {
    std::vector<double> values;
    double next = uniform(rng, -3.0, 1.0);
    for (std::size_t k = 0; k < letters; ++k) {
        values.push_back(next);
        next += uniform(rng, 0.1, 2.0);
    }
    return Alphabet(values);
}

std::vector<double> random_vector(Rng &rng, std::size_t n, double lo, double hi) {
    std::vector<double> v(n);
    for (double &x : v)
        x = uniform(rng, lo, hi);
    return v;
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const auto n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// 1 --------------------------------------------------------------------------

Outcome tightness() {
    Rng rng(101);
    double worst_gap = 0.0;
    double worst_violation = -std::numeric_limits<double>::infinity();
    for (int trial = 0; trial < 1000; ++trial) {
        const Alphabet alphabet = random_alphabet(rng, uniform_int(rng, 1, 5));
        const double alpha = std::exp(uniform(rng, std::log(1e-3), std::log(10.0)));
        const std::size_t n = uniform_int(rng, 1, 50);
        const double lo = alphabet.front() - 2.0;
        const double hi = alphabet.back() + 2.0;
        const auto x = random_vector(rng, n, lo, hi);
        const auto other = random_vector(rng, n, lo, hi);

        const double exact = discrete_l0_value(x, alphabet, alpha);
        const double matched = surrogate_value(x, update_fp_aux(x, alphabet, alpha), alphabet, alpha);
        const double mismatched =
            surrogate_value(x, update_fp_aux(other, alphabet, alpha), alphabet, alpha);
        worst_gap = std::max(worst_gap, std::abs(matched - exact));
        worst_violation = std::max(worst_violation, exact - mismatched);
    }
    return verdict(worst_gap <= 1e-12 && worst_violation <= 1e-12,
                   fmt::format("max |surrogate - l0| at matched beta {:.2e}; max (l0 - surrogate) "
                               "at mismatched beta {:.2e}",
                               worst_gap, worst_violation));
}

// 2 --------------------------------------------------------------------------

Outcome gradient_oracle() {
    Rng rng(202);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const Alphabet alphabet = random_alphabet(rng, uniform_int(rng, 1, 5));
        const double alpha = uniform(rng, 0.01, 1.0);
        const std::size_t n = uniform_int(rng, 1, 200);
        auto x = random_vector(rng, n, alphabet.front() - 1.0, alphabet.back() + 1.0);
        const auto base = random_vector(rng, n, alphabet.front() - 1.0, alphabet.back() + 1.0);
        const FpAux aux = update_fp_aux(base, alphabet, alpha);

        std::vector<double> grad(n);
        h_gradient(x, aux, grad);
        double diff = 0.0;
        double norm = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double step = 1e-6 * std::max(1.0, std::abs(x[j]));
            const double keep = x[j];
            x[j] = keep + step;
            const double up = h_value(x, aux);
            x[j] = keep - step;
            const double down = h_value(x, aux);
            x[j] = keep;
            const double fd = (up - down) / (2.0 * step);
            diff += (fd - grad[j]) * (fd - grad[j]);
            norm += grad[j] * grad[j];
        }
        worst = std::max(worst, std::sqrt(diff) / std::max(std::sqrt(norm), 1e-300));
    }
    return verdict(worst <= 1e-6, fmt::format("max relative error {:.2e}", worst));
}

// 3 --------------------------------------------------------------------------

double grid_prox(double y, const Alphabet &alphabet, double zeta) {
    const double lo = alphabet.front() - 3.0;
    const double hi = alphabet.back() + 3.0;
    const auto steps = static_cast<long>(std::floor((hi - lo) / 1e-4));
    double best = lo;
    double best_value = std::numeric_limits<double>::infinity();
    for (long i = 0; i <= steps; ++i) {
        const double u = lo + 1e-4 * static_cast<double>(i);
        double value = (u - y) * (u - y) / (2.0 * zeta);
        for (double a : alphabet.values())
            value += std::abs(u - a);
        if (value < best_value) {
            best_value = value;
            best = u;
        }
    }
    return best;
}

Outcome prox_oracle() {
    Rng rng(303);
    double worst_grid = 0.0;
    double worst_closed = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t letters = 1 + static_cast<std::size_t>(trial % 5);
        const Alphabet alphabet = random_alphabet(rng, letters);
        const double zeta = uniform(rng, 0.01, 2.0);
        const double y = uniform(rng, alphabet.front() - 2.5, alphabet.back() + 2.5);
        const double u = prox_discrete_l1(y, alphabet, zeta);
        worst_grid = std::max(worst_grid, std::abs(u - grid_prox(y, alphabet, zeta)));
        if (letters == 1) {
            const double shifted = y - alphabet.front();
            const double closed = std::copysign(std::max(std::abs(shifted) - zeta, 0.0), shifted) +
                                  alphabet.front();
            worst_closed = std::max(worst_closed, std::abs(u - closed));
        }
    }
    return verdict(worst_grid <= 1e-3 && worst_closed <= 1e-12,
                   fmt::format("max |prox - grid| {:.2e}; single-letter closed form gap {:.2e}",
                               worst_grid, worst_closed));
}

// 4 --------------------------------------------------------------------------

double nuclear_norm(const DenseMatrix &z) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(Eigen::MatrixXd(z.eigen()));
    return svd.singularValues().sum();
}

double prox_objective(const DenseMatrix &z, const DenseMatrix &a, double lambda) {
    return 0.5 * (z.eigen() - a.eigen()).squaredNorm() + lambda * nuclear_norm(z);
}

Outcome svt_correctness() {
    const DenseMatrix diag = DenseMatrix::from_rows({{3.0, 0.0}, {0.0, 1.0}});
    const DenseMatrix expect = DenseMatrix::from_rows({{1.0, 0.0}, {0.0, 0.0}});
    const double diag_error = (svt(diag, 2.0).eigen() - expect.eigen()).cwiseAbs().maxCoeff();

    Rng rng(404);
    std::normal_distribution<double> normal;
    double worst = -std::numeric_limits<double>::infinity();
    for (int trial = 0; trial < 50; ++trial) {
        DenseMatrix a(6, 6);
        for (double &v : a.values())
            v = normal(rng);
        const double lambda = 1.0;
        const DenseMatrix z = svt(a, lambda);
        const double at_z = prox_objective(z, a, lambda);
        for (int p = 0; p < 100; ++p) {
            DenseMatrix moved = z;
            for (double &v : moved.values())
                v += uniform(rng, -1e-2, 1e-2);
            worst = std::max(worst, at_z - prox_objective(moved, a, lambda));
        }
    }
    return verdict(diag_error <= 1e-14 && worst <= 0.0,
                   fmt::format("diag(3,1) error {:.1e}; max objective gain over 5000 "
                               "perturbations {:.2e} (must be <= 0)",
                               diag_error, worst));
}

// 5 --------------------------------------------------------------------------

Outcome mm_descent() {
    const Alphabet alphabet = Alphabet::integer_range(1, 5);
    std::size_t checked = 0;
    std::size_t violations = 0;
    double worst = -std::numeric_limits<double>::infinity();
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const Dataset ds = dataset_from_matrix(synth_discrete_lowrank(50, 50, 2, alphabet, seed).rounded);
        const Split sp = split(ds, {0.4, seed});
        SolverConfig cfg;
        cfg.lambda = 1.0;
        cfg.inner_tol = 1e-6;
        cfg.max_inner_iters = 2000;
        cfg.max_outer_iters = 20;
        cfg.seed = seed;
        const SolverRun run = l0_fp_complete(apply_mask(ds.observed, sp.train), sp.train, alphabet, cfg);
        std::vector<double> per_outer;
        for (std::size_t i = 0; i < run.trace.size(); ++i)
            if (i + 1 == run.trace.size() || run.trace[i + 1].outer != run.trace[i].outer)
                per_outer.push_back(run.trace[i].objective);
        for (std::size_t i = 1; i < per_outer.size(); ++i) {
            const double rise = per_outer[i] - per_outer[i - 1];
            const double slack = 1e-6 * (1.0 + std::abs(per_outer[i - 1]));
            ++checked;
            worst = std::max(worst, rise / (1.0 + std::abs(per_outer[i - 1])));
            if (rise > slack)
                ++violations;
        }
    }
    return verdict(violations == 0,
                   fmt::format("{} outer transitions checked, {} rises beyond slack; max relative "
                               "change {:.2e}",
                               checked, violations, worst));
}

// 6 and 8 --------------------------------------------------------------------

BenchmarkPlan synthetic_plan(double lambda) {
    BenchmarkPlan plan;
    plan.dataset.kind = DatasetSpec::Kind::synthetic;
    plan.dataset.rows = 50;
    plan.dataset.cols = 50;
    plan.dataset.rank = 2;
    plan.solvers = {SolverKind::si, SolverKind::ais, SolverKind::l1, SolverKind::l0};
    plan.ratios = {0.2, 0.4, 0.6};
    plan.seeds = {1, 2, 3, 4, 5};
    plan.config.alpha = 0.1;
    plan.config.zeta = 0.15;
    plan.config.lambda = lambda;
    plan.jobs = std::max(1u, std::thread::hardware_concurrency());
    return plan;
}

const std::vector<double> lambda_grid = {0.5, 1.0, 2.0, 3.0, 5.0, 10.0};

/// Picks the lambda whose l0 median NMSE, averaged over the ratios, is lowest.
double tune_lambda(std::string &log) {
    double best = lambda_grid.front();
    double best_score = std::numeric_limits<double>::infinity();
    for (double lambda : lambda_grid) {
        BenchmarkPlan plan = synthetic_plan(lambda);
        plan.solvers = {SolverKind::l0};
        const BenchmarkReport report = run_benchmark(plan);
        double score = 0.0;
        for (double ratio : plan.ratios)
            score += report.find(SolverKind::l0, ratio)->median / 3.0;
        log += fmt::format("lambda {:g}: l0 mean median NMSE {:.5f}\n", lambda, score);
        if (score < best_score) {
            best_score = score;
            best = lambda;
        }
    }
    return best;
}

Outcome ordering() {
    std::string log;
    const double lambda = tune_lambda(log);
    const BenchmarkReport report = run_benchmark(synthetic_plan(lambda));
    bool ok = true;
    std::string table;
    for (double ratio : {0.2, 0.4, 0.6}) {
        const double si = report.find(SolverKind::si, ratio)->median;
        const double ais = report.find(SolverKind::ais, ratio)->median;
        const double l1 = report.find(SolverKind::l1, ratio)->median;
        const double l0 = report.find(SolverKind::l0, ratio)->median;
        const bool row_ok = l0 <= l1 && l1 <= std::min(si, ais);
        ok = ok && row_ok;
        table += fmt::format("\n    ratio {:.1f}: si {:.5f} ais {:.5f} l1 {:.5f} l0 {:.5f}  {}", ratio,
                             si, ais, l1, l0, row_ok ? "ordered" : "NOT ordered");
    }
    for (const auto &cell : report.cells)
        if (!cell.ok)
            return {Status::fail, "cell failed: " + cell.error};
    std::istringstream lines(log);
    std::string tuning;
    for (std::string line; std::getline(lines, line);)
        tuning += "\n    " + line;
    return verdict(ok, fmt::format("lambda {:g} (tuned on l0 over {{0.5,1,2,3,5,10}}), median final "
                                   "NMSE over 5 seeds:{}\n  tuning:{}",
                                   lambda, table, tuning));
}

Outcome determinism() {
    std::string log;
    const double lambda = tune_lambda(log);
    std::ostringstream first;
    std::ostringstream second;
    BenchmarkPlan threaded = synthetic_plan(lambda);
    threaded.jobs = std::max<std::size_t>(4, threaded.jobs);
    write_trace_csv(first, run_benchmark(threaded).cells, false);
    BenchmarkPlan serial = synthetic_plan(lambda);
    serial.jobs = 1;
    write_trace_csv(second, run_benchmark(serial).cells, false);
    const bool same = first.str() == second.str();
    return verdict(same, fmt::format("two runs at lambda {:g} ({} vs 1 worker threads): {} bytes "
                                     "of trace CSV, {}",
                                     lambda, threaded.jobs, first.str().size(),
                                     same ? "identical" : "DIFFERENT"));
}

// 7 --------------------------------------------------------------------------

std::filesystem::path movielens_path() {
    if (const char *env = std::getenv("MOVIELENS_PATH"))
        return env;
    return DAMC_DEFAULT_MOVIELENS;
}

/// First 1-based iteration whose NMSE is at or below `target`.
std::optional<std::size_t> first_reaching(const std::vector<TraceRecord> &trace, double target) {
    for (const auto &rec : trace)
        if (rec.nmse && *rec.nmse <= target)
            return rec.iteration;
    return std::nullopt;
}

Outcome movielens() {
    const auto path = movielens_path();
    if (!std::filesystem::exists(path))
        return {Status::skip, fmt::format("{} not found; run tools/fetch_movielens.py or set "
                                          "MOVIELENS_PATH",
                                          path.string())};
    const Alphabet alphabet = Alphabet::integer_range(1, 5);
    const Dataset ds = build_matrix(load_movielens(path));

    SolverConfig base;
    base.lambda = 10.0;
    base.zeta = 0.15;
    base.alpha = 0.1;
    SolverConfig si_cfg = base;
    si_cfg.max_inner_iters = 100;
    SolverConfig l0_cfg = base;
    l0_cfg.max_inner_iters = 20;
    l0_cfg.max_outer_iters = 3;

    std::vector<double> si_nmse;
    std::vector<double> l0_nmse;
    std::vector<double> cold_iters;
    std::vector<double> warm_iters;
    std::string rows;
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        const Split sp = split(ds, {0.2, seed});
        const GroundTruth truth{ds.observed, sp.test};
        const DenseMatrix o = apply_mask(ds.observed, sp.train);
        si_cfg.seed = seed;
        l0_cfg.seed = seed;
        const SolverRun si = soft_impute(o, sp.train, si_cfg, &truth);
        const SolverRun cold = l0_fp_complete(o, sp.train, alphabet, l0_cfg, &truth);
        const SolverRun warm = warm_start_complete(o, sp.train, alphabet, l0_cfg, &truth);
        const double si_final = *si.trace.back().nmse;
        const double cold_final = *cold.trace.back().nmse;
        const auto reach = first_reaching(warm.trace, cold_final);
        si_nmse.push_back(si_final);
        l0_nmse.push_back(cold_final);
        cold_iters.push_back(static_cast<double>(cold.trace.size()));
        warm_iters.push_back(reach ? static_cast<double>(*reach) : std::numeric_limits<double>::infinity());
        rows += fmt::format("\n    seed {}: si {:.5f} ({} it), l0 {:.5f} ({} it), warm reaches it at "
                            "iteration {} (final {:.5f} after {} it)",
                            seed, si_final, si.trace.size(), cold_final, cold.trace.size(),
                            reach ? std::to_string(*reach) : "never", *warm.trace.back().nmse,
                            warm.trace.size());
    }
    const double si_med = median(si_nmse);
    const double l0_med = median(l0_nmse);
    const double cold_med = median(cold_iters);
    const double warm_med = median(warm_iters);
    return verdict(l0_med < si_med && warm_med < cold_med,
                   fmt::format("median NMSE l0 {:.5f} vs si {:.5f}; median iterations to the cold "
                               "l0 final NMSE: warm {} vs cold {}{}",
                               l0_med, si_med, warm_med, cold_med, rows));
}

// 9 --------------------------------------------------------------------------

std::size_t numeric_rank(const DenseMatrix &m) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(Eigen::MatrixXd(m.eigen()));
    const auto s = svd.singularValues();
    std::size_t r = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i)
        if (s(i) > 1e-9 * std::max(1.0, s(0)))
            ++r;
    return r;
}

/// Rank-1 4x4 matrices over {1,2} have constant rows or constant columns.
DenseMatrix random_rank_one(Rng &rng) {
    DenseMatrix m(4, 4);
    std::array<double, 4> pattern{};
    do {
        for (double &p : pattern)
            p = static_cast<double>(uniform_int(rng, 1, 2));
    } while (std::all_of(pattern.begin(), pattern.end(), [&](double p) { return p == pattern[0]; }));
    const bool by_row = uniform_int(rng, 0, 1) == 0;
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j)
            m(i, j) = by_row ? pattern[i] : pattern[j];
    return m;
}

/// All minimum-rank completions over {1,2} of the 8 hidden cells.
std::vector<DenseMatrix> brute_force(const DenseMatrix &truth, const IndexSet &hidden) {
    std::vector<DenseMatrix> best;
    std::size_t best_rank = 5;
    for (unsigned mask = 0; mask < (1u << hidden.size()); ++mask) {
        DenseMatrix candidate = truth;
        for (std::size_t k = 0; k < hidden.size(); ++k)
            candidate.values()[hidden.offsets()[k]] = (mask >> k) & 1u ? 2.0 : 1.0;
        const std::size_t r = numeric_rank(candidate);
        if (r < best_rank) {
            best_rank = r;
            best.clear();
        }
        if (r == best_rank)
            best.push_back(candidate);
    }
    return best;
}

Outcome small_oracle() {
    const Alphabet alphabet{1.0, 2.0};
    Rng rng(909);
    std::size_t matches = 0;
    std::size_t instances = 0;
    std::size_t rejected = 0;
    while (instances < 10) {
        const DenseMatrix truth = random_rank_one(rng);
        std::vector<std::size_t> cells(16);
        std::iota(cells.begin(), cells.end(), 0);
        std::shuffle(cells.begin(), cells.end(), rng);
        std::vector<std::size_t> observed(cells.begin(), cells.begin() + 8);
        const IndexSet omega = IndexSet::from_offsets(4, 4, observed);
        const IndexSet hidden = complement(omega);
        const auto best = brute_force(truth, hidden);
        if (best.size() != 1) {
            ++rejected;
            continue;
        }
        ++instances;
        SolverConfig cfg;
        cfg.lambda = 0.1;
        cfg.seed = instances;
        const SolverRun run = l0_fp_complete(apply_mask(truth, omega), omega, alphabet, cfg);
        const DenseMatrix projected = alphabet_project(run.final_x, alphabet, hidden);
        if (vec_extract(projected, hidden) == vec_extract(best.front(), hidden))
            ++matches;
    }
    return verdict(matches >= 9, fmt::format("{}/10 instances recovered the unique minimum-rank "
                                             "completion ({} draws with ambiguous minimum rejected)",
                                             matches, rejected));
}

struct Criterion {
    int id;
    const char *name;
    double budget_s;
    std::function<Outcome()> run;
};

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Acceptance criteria"};
    std::vector<int> selected;
    app.add_option("--criterion,-c", selected, "criteria to run (default: all)")->check(CLI::Range(1, 9));
    CLI11_PARSE(app, argc, argv);
    spdlog::set_level(spdlog::level::err);

    const std::vector<Criterion> criteria = {
        {1, "quadratic-transform tightness", 5.0, tightness},
        {2, "gradient oracle", 10.0, gradient_oracle},
        {3, "prox oracle", 30.0, prox_oracle},
        {4, "SVT correctness", 20.0, svt_correctness},
        {5, "MM descent", 120.0, mm_descent},
        {6, "synthetic ordering l0 <= l1 <= min(si, ais)", 600.0, ordering},
        {7, "MovieLens desk-scale run", 900.0, movielens},
        {8, "determinism", std::numeric_limits<double>::infinity(), determinism},
        {9, "small-instance oracle", 60.0, small_oracle},
    };

    bool all_pass = true;
    bool any_skip = false;
    for (const auto &c : criteria) {
        if (!selected.empty() && std::find(selected.begin(), selected.end(), c.id) == selected.end())
            continue;
        const auto start = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = c.run();
        } catch (const std::exception &e) {
            out = {Status::fail, std::string("exception: ") + e.what()};
        }
        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (out.status == Status::pass && seconds > c.budget_s) {
            out.status = Status::fail;
            out.detail += fmt::format("; runtime over the {:g} s budget", c.budget_s);
        }
        const char *label = out.status == Status::pass ? "PASS" : out.status == Status::skip ? "SKIP" : "FAIL";
        std::cout << fmt::format("criterion {}: {} {} [{:.1f} s] {}", c.id, label, c.name, seconds,
                                 out.detail)
                  << std::endl;
        all_pass = all_pass && out.status == Status::pass;
        any_skip = any_skip || out.status == Status::skip;
    }
    if (any_skip && selected.size() == 1)
        return 77;
    return all_pass ? 0 : 1;
}
