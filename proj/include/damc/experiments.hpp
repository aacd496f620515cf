#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "damc/data.hpp"
#include "damc/metrics.hpp"
#include "damc/solvers.hpp"

namespace damc {

struct DatasetSpec {
    enum class Kind { movielens, synthetic, csv };
    Kind kind = Kind::synthetic;
    std::filesystem::path path;
    std::size_t rows = 50;
    std::size_t cols = 50;
    std::size_t rank = 2;
    /// Fixed seed for the synthetic matrix; unset means each cell's seed.
    std::optional<std::uint64_t> seed;
};

struct BenchmarkPlan {
    DatasetSpec dataset;
    Alphabet alphabet = Alphabet::integer_range(1, 5);
    std::vector<SolverKind> solvers;
    std::vector<double> ratios;
    std::vector<std::uint64_t> seeds;
    SolverConfig config;
    std::size_t jobs = 1;
};

/// Reads a plan from JSON. Unknown keys are rejected; missing hyperparameters
/// keep the SolverConfig defaults. Throws ConfigError.
BenchmarkPlan parse_plan(const nlohmann::json &doc);
BenchmarkPlan load_plan(const std::filesystem::path &path);

struct CellResult {
    SolverKind solver = SolverKind::si;
    double ratio = 0.0;
    std::uint64_t seed = 0;
    bool ok = false;
    std::string error;
    std::optional<double> nmse_raw;
    std::optional<double> nmse_projected;
    bool converged = false;
    std::size_t outer_iterations = 0;
    std::size_t inner_iterations = 0;
    double wall_ms = 0.0;
    std::vector<TraceRecord> trace;
};

struct Aggregate {
    SolverKind solver = SolverKind::si;
    double ratio = 0.0;
    std::size_t count = 0;
    double median = 0.0;
    double min = 0.0;
    double max = 0.0;
};

struct BenchmarkReport {
    std::vector<CellResult> cells;
    std::vector<Aggregate> aggregates;

    const Aggregate *find(SolverKind solver, double ratio) const;
};

/// The matrix and observation pool a plan draws from for one seed.
Dataset materialize_dataset(const DatasetSpec &spec, const Alphabet &alphabet, std::uint64_t seed);

/// Runs every (ratio, seed, solver) cell. Cells run on `plan.jobs` worker
/// threads; the report lists them in plan order regardless of completion
/// order. A failing cell is recorded with its error and the run continues.
BenchmarkReport run_benchmark(const BenchmarkPlan &plan);

/// Evaluates one solver on one split of `dataset`. The completed matrix is
/// moved into `completed` when it is not null.
CellResult run_cell(const Dataset &dataset, const Split &split, const Alphabet &alphabet,
                    SolverKind solver, const SolverConfig &cfg, DenseMatrix *completed = nullptr);

/// Median of the raw NMSE over successful cells, per (solver, ratio).
std::vector<Aggregate> aggregate(const std::vector<CellResult> &cells);

/// Columns: solver,ratio,seed,phase,outer,iter,objective,nmse,rel_change[,ms]
void write_trace_csv(std::ostream &out, const std::vector<CellResult> &cells, bool include_timing);

nlohmann::json report_to_json(const BenchmarkReport &report, bool include_timing);

} // namespace damc
