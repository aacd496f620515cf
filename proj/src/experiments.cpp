#include "damc/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <ostream>
#include <set>
#include <thread>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "damc/error.hpp"

namespace damc {

using nlohmann::json;

namespace {

template <class T>
T read_or(const json &doc, const char *key, T fallback) {
    if (!doc.contains(key))
        return fallback;
    try {
        return doc.at(key).get<T>();
    } catch (const json::exception &err) {
        throw ConfigError(fmt::format("plan field '{}': {}", key, err.what()));
    }
}

void reject_unknown(const json &doc, std::initializer_list<const char *> allowed, const char *where) {
    for (const auto &[key, value] : doc.items()) {
        if (std::none_of(allowed.begin(), allowed.end(), [&](const char *a) { return key == a; }))
            throw ConfigError(fmt::format("unknown key '{}' in {}", key, where));
    }
}

DatasetSpec parse_dataset(const json &doc) {
    if (!doc.is_object())
        throw ConfigError("plan 'dataset' must be an object");
    reject_unknown(doc, {"type", "path", "rows", "cols", "rank", "seed"}, "dataset");
    DatasetSpec spec;
    const auto type = read_or<std::string>(doc, "type", "synthetic");
    if (type == "movielens")
        spec.kind = DatasetSpec::Kind::movielens;
    else if (type == "synthetic")
        spec.kind = DatasetSpec::Kind::synthetic;
    else if (type == "csv")
        spec.kind = DatasetSpec::Kind::csv;
    else
        throw ConfigError("dataset type must be movielens, synthetic or csv");
    spec.path = read_or<std::string>(doc, "path", "");
    if (spec.kind != DatasetSpec::Kind::synthetic && spec.path.empty())
        throw ConfigError("dataset 'path' is required for movielens and csv inputs");
    spec.rows = read_or<std::size_t>(doc, "rows", spec.rows);
    spec.cols = read_or<std::size_t>(doc, "cols", spec.cols);
    spec.rank = read_or<std::size_t>(doc, "rank", spec.rank);
    if (doc.contains("seed"))
        spec.seed = read_or<std::uint64_t>(doc, "seed", 0);
    return spec;
}

double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string format_optional(const std::optional<double> &v) {
    return v ? fmt::format("{}", *v) : std::string();
}

json optional_json(const std::optional<double> &v) { return v ? json(*v) : json(nullptr); }

} // namespace

BenchmarkPlan parse_plan(const json &doc) {
    if (!doc.is_object())
        throw ConfigError("plan must be a JSON object");
    reject_unknown(doc,
                   {"dataset", "alphabet", "solvers", "ratios", "seeds", "alpha", "lambda", "zeta",
                    "max_inner", "max_outer", "inner_tol", "outer_tol", "mu", "lipschitz_rule",
                    "rank_cap", "jobs"},
                   "plan");
    BenchmarkPlan plan;
    if (doc.contains("dataset"))
        plan.dataset = parse_dataset(doc.at("dataset"));
    if (doc.contains("alphabet"))
        plan.alphabet = Alphabet(read_or<std::vector<double>>(doc, "alphabet", {}));
    for (const auto &name : read_or<std::vector<std::string>>(doc, "solvers", {"si", "ais", "l1", "l0", "warm"}))
        plan.solvers.push_back(parse_solver_kind(name));
    plan.ratios = read_or<std::vector<double>>(doc, "ratios", {0.2});
    plan.seeds = read_or<std::vector<std::uint64_t>>(doc, "seeds", {0});
    if (plan.solvers.empty() || plan.ratios.empty() || plan.seeds.empty())
        throw ConfigError("plan needs at least one solver, ratio and seed");
    for (double r : plan.ratios)
        if (!(r > 0.0 && r <= 1.0))
            throw ConfigError(fmt::format("ratio {} outside (0, 1]", r));

    SolverConfig &cfg = plan.config;
    cfg.alpha = read_or(doc, "alpha", cfg.alpha);
    cfg.lambda = read_or(doc, "lambda", cfg.lambda);
    cfg.zeta = read_or(doc, "zeta", cfg.zeta);
    cfg.max_inner_iters = read_or(doc, "max_inner", cfg.max_inner_iters);
    cfg.max_outer_iters = read_or(doc, "max_outer", cfg.max_outer_iters);
    cfg.inner_tol = read_or(doc, "inner_tol", cfg.inner_tol);
    cfg.outer_tol = read_or(doc, "outer_tol", cfg.outer_tol);
    cfg.svd.rank_cap = read_or(doc, "rank_cap", cfg.svd.rank_cap);
    if (doc.contains("mu"))
        cfg.mu_override = read_or(doc, "mu", 0.0);
    const auto rule = read_or<std::string>(doc, "lipschitz_rule", "paper");
    if (rule == "paper")
        cfg.lipschitz_rule = LipschitzRule::paper;
    else if (rule == "classical")
        cfg.lipschitz_rule = LipschitzRule::classical;
    else
        throw ConfigError("lipschitz_rule must be 'paper' or 'classical'");
    cfg.validate();
    plan.jobs = std::max<std::size_t>(1, read_or<std::size_t>(doc, "jobs", 1));
    return plan;
}

BenchmarkPlan load_plan(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open plan " + path.string());
    try {
        return parse_plan(json::parse(in));
    } catch (const json::parse_error &err) {
        throw ConfigError(fmt::format("plan {}: {}", path.string(), err.what()));
    }
}

const Aggregate *BenchmarkReport::find(SolverKind solver, double ratio) const {
    for (const auto &a : aggregates)
        if (a.solver == solver && a.ratio == ratio)
            return &a;
    return nullptr;
}

Dataset materialize_dataset(const DatasetSpec &spec, const Alphabet &alphabet, std::uint64_t seed) {
    switch (spec.kind) {
    case DatasetSpec::Kind::movielens:
        return build_matrix(load_movielens(spec.path));
    case DatasetSpec::Kind::csv: {
        std::ifstream in(spec.path);
        if (!in)
            throw ValidationError("cannot open matrix file " + spec.path.string());
        return dataset_from_matrix(read_matrix_csv(in));
    }
    case DatasetSpec::Kind::synthetic:
        break;
    }
    return dataset_from_matrix(
        synth_discrete_lowrank(spec.rows, spec.cols, spec.rank, alphabet, spec.seed.value_or(seed))
            .rounded);
}

CellResult run_cell(const Dataset &dataset, const Split &split, const Alphabet &alphabet,
                    SolverKind solver, const SolverConfig &cfg, DenseMatrix *completed) {
    CellResult cell;
    cell.solver = solver;
    cell.seed = cfg.seed;
    const auto start = std::chrono::steady_clock::now();
    std::optional<GroundTruth> truth;
    if (!split.test.empty())
        truth.emplace(GroundTruth{dataset.observed, split.test});
    SolverRun run = run_solver(solver, dataset.observed, split.train, alphabet, cfg,
                               truth ? &*truth : nullptr);
    cell.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    if (truth) {
        cell.nmse_raw = nmse(run.final_x, dataset.observed, split.test);
        cell.nmse_projected =
            nmse(alphabet_project(run.final_x, alphabet, split.test), dataset.observed, split.test);
    }
    cell.ok = true;
    cell.converged = run.converged;
    cell.outer_iterations = run.outer_iterations;
    cell.inner_iterations = run.inner_iterations;
    cell.trace = std::move(run.trace);
    if (completed != nullptr)
        *completed = std::move(run.final_x);
    return cell;
}

std::vector<Aggregate> aggregate(const std::vector<CellResult> &cells) {
    std::map<std::pair<int, double>, std::vector<double>> groups;
    std::vector<std::pair<int, double>> order;
    for (const auto &c : cells) {
        const auto key = std::make_pair(static_cast<int>(c.solver), c.ratio);
        if (!groups.contains(key))
            order.push_back(key);
        auto &group = groups[key];
        if (c.ok && c.nmse_raw)
            group.push_back(*c.nmse_raw);
    }
    std::vector<Aggregate> out;
    for (const auto &key : order) {
        const auto &values = groups[key];
        Aggregate a;
        a.solver = static_cast<SolverKind>(key.first);
        a.ratio = key.second;
        a.count = values.size();
        if (!values.empty()) {
            a.median = median_of(values);
            a.min = *std::min_element(values.begin(), values.end());
            a.max = *std::max_element(values.begin(), values.end());
        }
        out.push_back(a);
    }
    return out;
}

BenchmarkReport run_benchmark(const BenchmarkPlan &plan) {
    plan.config.validate();
    struct Task {
        double ratio;
        std::uint64_t seed;
        SolverKind solver;
    };
    std::vector<Task> tasks;
    for (double ratio : plan.ratios)
        for (auto seed : plan.seeds)
            for (auto solver : plan.solvers)
                tasks.push_back({ratio, seed, solver});

    // Datasets are built up front: one shared copy for file inputs, one per
    // seed for synthetic matrices without a fixed seed.
    const bool per_seed = plan.dataset.kind == DatasetSpec::Kind::synthetic && !plan.dataset.seed;
    std::map<std::uint64_t, std::shared_ptr<const Dataset>> datasets;
    std::shared_ptr<const Dataset> shared;
    std::string dataset_error;
    try {
        if (per_seed) {
            for (auto seed : plan.seeds)
                if (!datasets.contains(seed))
                    datasets[seed] = std::make_shared<const Dataset>(
                        materialize_dataset(plan.dataset, plan.alphabet, seed));
        } else {
            shared = std::make_shared<const Dataset>(
                materialize_dataset(plan.dataset, plan.alphabet, plan.seeds.front()));
        }
    } catch (const Error &err) {
        dataset_error = err.what();
    }

    std::vector<CellResult> cells(tasks.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < tasks.size(); i = next++) {
            const Task &task = tasks[i];
            CellResult &cell = cells[i];
            try {
                if (!dataset_error.empty())
                    throw ValidationError(dataset_error);
                const Dataset &ds = per_seed ? *datasets.at(task.seed) : *shared;
                const Split parts = split(ds, {task.ratio, task.seed});
                SolverConfig cfg = plan.config;
                cfg.seed = task.seed;
                cell = run_cell(ds, parts, plan.alphabet, task.solver, cfg);
                spdlog::info("{} ratio={} seed={}: nmse={} ({} iterations)", to_string(task.solver),
                             task.ratio, task.seed, format_optional(cell.nmse_raw),
                             cell.inner_iterations);
            } catch (const std::exception &err) {
                cell = CellResult{};
                cell.error = err.what();
                spdlog::error("{} ratio={} seed={} failed: {}", to_string(task.solver), task.ratio,
                              task.seed, err.what());
            }
            cell.solver = task.solver;
            cell.ratio = task.ratio;
            cell.seed = task.seed;
        }
    };
    const std::size_t jobs = std::min(plan.jobs, std::max<std::size_t>(1, tasks.size()));
    {
        std::vector<std::jthread> pool;
        for (std::size_t j = 1; j < jobs; ++j)
            pool.emplace_back(worker);
        worker();
    }

    BenchmarkReport report;
    report.cells = std::move(cells);
    report.aggregates = aggregate(report.cells);
    return report;
}

void write_trace_csv(std::ostream &out, const std::vector<CellResult> &cells, bool include_timing) {
    out << "solver,ratio,seed,phase,outer,iter,objective,nmse,rel_change";
    if (include_timing)
        out << ",ms";
    out << '\n';
    std::string line;
    for (const auto &c : cells) {
        for (const auto &r : c.trace) {
            line.clear();
            fmt::format_to(std::back_inserter(line), "{},{},{},{},{},{},{},{},{}", to_string(c.solver),
                           c.ratio, c.seed, r.phase, r.outer, r.iteration, r.objective,
                           format_optional(r.nmse), r.rel_change);
            if (include_timing)
                fmt::format_to(std::back_inserter(line), ",{:.3f}", r.elapsed_ms);
            out << line << '\n';
        }
    }
}

json report_to_json(const BenchmarkReport &report, bool include_timing) {
    json cells = json::array();
    for (const auto &c : report.cells) {
        json cell{{"solver", to_string(c.solver)},
                  {"ratio", c.ratio},
                  {"seed", c.seed},
                  {"ok", c.ok},
                  {"nmse", optional_json(c.nmse_raw)},
                  {"nmse_projected", optional_json(c.nmse_projected)},
                  {"converged", c.converged},
                  {"outer_iterations", c.outer_iterations},
                  {"inner_iterations", c.inner_iterations},
                  {"trace_rows", c.trace.size()}};
        if (!c.ok)
            cell["error"] = c.error;
        if (include_timing)
            cell["wall_ms"] = c.wall_ms;
        cells.push_back(std::move(cell));
    }
    json aggregates = json::array();
    for (const auto &a : report.aggregates)
        aggregates.push_back({{"solver", to_string(a.solver)},
                              {"ratio", a.ratio},
                              {"count", a.count},
                              {"median_nmse", a.median},
                              {"min_nmse", a.min},
                              {"max_nmse", a.max}});
    return {{"cells", std::move(cells)}, {"aggregates", std::move(aggregates)}};
}

} // namespace damc
