// damc: discrete-aware matrix completion from the command line.
//
//   damc complete  --input u.data --solver l0 --ratio 0.2 --out run/
//   damc benchmark --plan plan.json --out bench/
//   damc synth     --rows 50 --cols 50 --rank 2 --out m.csv
//
// Exit codes: 0 success, 1 configuration error, 2 data error, 3 numeric failure.
// DAMC_LOG_LEVEL=trace|debug|info|warn|error|off sets the log verbosity.

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "damc/data.hpp"
#include "damc/error.hpp"
#include "damc/experiments.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace damc;

namespace {

enum Exit { ok = 0, config_error = 1, data_error = 2, numeric_error = 3 };

Alphabet parse_alphabet(const std::string &text) {
    std::vector<double> values;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto end = std::min(text.find(',', start), text.size());
        const std::string_view field(text.data() + start, end - start);
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
        if (field.empty() || ec != std::errc{} || ptr != field.data() + field.size())
            throw ConfigError(fmt::format("invalid alphabet letter '{}'", field));
        values.push_back(v);
        start = end + 1;
    }
    return Alphabet(std::move(values));
}

LipschitzRule parse_rule(const std::string &name) {
    if (name == "paper")
        return LipschitzRule::paper;
    if (name == "classical")
        return LipschitzRule::classical;
    throw ConfigError("lipschitz rule must be 'paper' or 'classical'");
}

void prepare_dir(const fs::path &dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec)
        throw ValidationError(fmt::format("cannot create {}: {}", dir.string(), ec.message()));
}

std::ofstream open_out(const fs::path &path) {
    std::ofstream out(path);
    if (!out)
        throw ValidationError("cannot write " + path.string());
    return out;
}

struct CompleteArgs {
    fs::path input;
    std::string solver = "l0";
    double ratio = 0.2;
    std::uint64_t seed = 0;
    std::string alphabet = "1,2,3,4,5";
    SolverConfig cfg;
    std::optional<double> mu;
    std::string rule = "paper";
    fs::path out;
    bool write_matrix = false;
};

int run_complete(const CompleteArgs &args) {
    SolverConfig cfg = args.cfg;
    cfg.seed = args.seed;
    cfg.mu_override = args.mu;
    cfg.lipschitz_rule = parse_rule(args.rule);
    cfg.validate();
    const Alphabet alphabet = parse_alphabet(args.alphabet);
    const SolverKind kind = parse_solver_kind(args.solver);

    DatasetSpec spec;
    spec.path = args.input;
    spec.kind = args.input.extension() == ".csv" ? DatasetSpec::Kind::csv : DatasetSpec::Kind::movielens;
    const Dataset ds = materialize_dataset(spec, alphabet, args.seed);
    const Split parts = split(ds, {args.ratio, args.seed});
    spdlog::info("{}x{} matrix, {} known entries, {} observed, {} held out", ds.observed.rows(),
                 ds.observed.cols(), ds.known.size(), parts.train.size(), parts.test.size());

    DenseMatrix completed(1, 1);
    CellResult cell = run_cell(ds, parts, alphabet, kind, cfg, &completed);
    cell.ratio = args.ratio;

    prepare_dir(args.out);
    {
        auto trace = open_out(args.out / "trace.csv");
        write_trace_csv(trace, {cell}, true);
    }
    BenchmarkReport report;
    report.cells.push_back(cell);
    report.aggregates = aggregate(report.cells);
    json summary = report_to_json(report, true);
    summary["input"] = args.input.string();
    summary["config"] = {{"lambda", cfg.lambda},       {"zeta", cfg.zeta},
                         {"alpha", cfg.alpha},         {"max_inner", cfg.max_inner_iters},
                         {"max_outer", cfg.max_outer_iters}, {"inner_tol", cfg.inner_tol},
                         {"outer_tol", cfg.outer_tol}, {"lipschitz_rule", args.rule},
                         {"mu", cfg.mu_override ? json(*cfg.mu_override) : json(nullptr)}};
    open_out(args.out / "summary.json") << summary.dump(2) << '\n';

    if (args.write_matrix) {
        auto out = open_out(args.out / "completed.csv");
        write_matrix_csv(out, completed);
    }
    if (cell.nmse_raw)
        fmt::print("{} nmse={:.6f} projected={:.6f} iterations={}\n", args.solver, *cell.nmse_raw,
                   *cell.nmse_projected, cell.inner_iterations);
    else
        fmt::print("{} iterations={} (no held-out entries)\n", args.solver, cell.inner_iterations);
    return ok;
}

int run_bench(const fs::path &plan_path, const fs::path &out_dir, bool timing) {
    const BenchmarkPlan plan = load_plan(plan_path);
    const BenchmarkReport report = run_benchmark(plan);
    prepare_dir(out_dir);
    {
        auto trace = open_out(out_dir / "trace.csv");
        write_trace_csv(trace, report.cells, timing);
    }
    open_out(out_dir / "summary.json") << report_to_json(report, timing).dump(2) << '\n';

    std::size_t failed = 0;
    for (const auto &c : report.cells)
        failed += c.ok ? 0 : 1;
    for (const auto &a : report.aggregates)
        fmt::print("{:>4} ratio={:.2f} median_nmse={:.6f} (n={})\n", to_string(a.solver), a.ratio,
                   a.median, a.count);
    if (failed > 0) {
        spdlog::error("{} of {} cells failed; see summary.json", failed, report.cells.size());
        return numeric_error;
    }
    return ok;
}

int run_synth(std::size_t rows, std::size_t cols, std::size_t rank, const std::string &alphabet,
              std::uint64_t seed, const fs::path &out) {
    const SyntheticMatrix m = synth_discrete_lowrank(rows, cols, rank, parse_alphabet(alphabet), seed);
    if (out.has_parent_path())
        prepare_dir(out.parent_path());
    auto file = open_out(out);
    write_matrix_csv(file, m.rounded);
    return ok;
}

void configure_logging() {
    auto logger = spdlog::stderr_color_mt("damc");
    spdlog::set_default_logger(logger);
    spdlog::set_level(spdlog::level::warn);
    if (const char *level = std::getenv("DAMC_LOG_LEVEL"))
        spdlog::set_level(spdlog::level::from_str(level));
}

} // namespace

int main(int argc, char **argv) {
    configure_logging();
    CLI::App app{"Discrete-aware low-rank matrix completion"};
    app.require_subcommand(1);

    CompleteArgs complete;
    auto *cmd_complete = app.add_subcommand("complete", "Complete one observed split with one solver");
    cmd_complete->add_option("--input", complete.input, "MovieLens u.data file or matrix CSV")->required();
    cmd_complete->add_option("--solver", complete.solver, "si|ais|l1|l0|warm")->capture_default_str();
    cmd_complete->add_option("--ratio", complete.ratio, "fraction of known entries observed")->capture_default_str();
    cmd_complete->add_option("--seed", complete.seed, "split and initialization seed")->capture_default_str();
    cmd_complete->add_option("--alphabet", complete.alphabet, "comma-separated letters")->capture_default_str();
    cmd_complete->add_option("--alpha", complete.cfg.alpha)->capture_default_str();
    cmd_complete->add_option("--lambda", complete.cfg.lambda)->capture_default_str();
    cmd_complete->add_option("--zeta", complete.cfg.zeta)->capture_default_str();
    cmd_complete->add_option("--max-inner", complete.cfg.max_inner_iters)->capture_default_str();
    cmd_complete->add_option("--max-outer", complete.cfg.max_outer_iters)->capture_default_str();
    cmd_complete->add_option("--inner-tol", complete.cfg.inner_tol)->capture_default_str();
    cmd_complete->add_option("--outer-tol", complete.cfg.outer_tol)->capture_default_str();
    cmd_complete->add_option("--mu", complete.mu, "fixed step size instead of 1/L");
    cmd_complete->add_option("--lipschitz-rule", complete.rule, "paper|classical")->capture_default_str();
    cmd_complete->add_option("--rank-cap", complete.cfg.svd.rank_cap, "truncated SVT block size (0 = full)")
        ->capture_default_str();
    cmd_complete->add_flag("--write-matrix", complete.write_matrix, "also write completed.csv");
    cmd_complete->add_option("--out", complete.out, "output directory")->required();

    fs::path plan_path;
    fs::path bench_out;
    bool no_timing = false;
    auto *cmd_bench = app.add_subcommand("benchmark", "Run a JSON benchmark plan");
    cmd_bench->add_option("--plan", plan_path)->required();
    cmd_bench->add_option("--out", bench_out)->required();
    cmd_bench->add_flag("--no-timing", no_timing, "omit wall-clock columns for diffable output");

    std::size_t rows = 50;
    std::size_t cols = 50;
    std::size_t rank = 2;
    std::string synth_alphabet = "1,2,3,4,5";
    std::uint64_t synth_seed = 0;
    fs::path synth_out;
    auto *cmd_synth = app.add_subcommand("synth", "Write a synthetic discrete low-rank matrix as CSV");
    cmd_synth->add_option("--rows", rows)->capture_default_str();
    cmd_synth->add_option("--cols", cols)->capture_default_str();
    cmd_synth->add_option("--rank", rank)->capture_default_str();
    cmd_synth->add_option("--alphabet", synth_alphabet)->capture_default_str();
    cmd_synth->add_option("--seed", synth_seed)->capture_default_str();
    cmd_synth->add_option("--out", synth_out)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? ok : config_error;
    }

    try {
        if (*cmd_complete)
            return run_complete(complete);
        if (*cmd_bench)
            return run_bench(plan_path, bench_out, !no_timing);
        return run_synth(rows, cols, rank, synth_alphabet, synth_seed, synth_out);
    } catch (const ConfigError &e) {
        spdlog::error("configuration error: {}", e.what());
        return config_error;
    } catch (const DimensionError &e) {
        spdlog::error("configuration error: {}", e.what());
        return config_error;
    } catch (const ParseError &e) {
        spdlog::error("data error: {}", e.what());
        return data_error;
    } catch (const ValidationError &e) {
        spdlog::error("data error: {}", e.what());
        return data_error;
    } catch (const Error &e) {
        spdlog::error("numeric failure: {}", e.what());
        return numeric_error;
    }
}
