#pragma once

// Subcommands of the `anneal` tool. Exit codes: 0 success, 2 config or usage
// error, 3 numeric failure.

#include "config.hpp"
#include "plotdata.hpp"
#include "results.hpp"

#include "qaga/experiments.hpp"
#include "qaga/parallel.hpp"

#include <filesystem>
#include <iomanip>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace anneal {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumeric = 3;

struct CommandOptions {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<int> workers;
    std::optional<std::string> output;
};

namespace detail {

inline ExperimentConfig resolve(const CommandOptions& opts) {
    ExperimentConfig cfg = load_config(opts.config);
    if (opts.seed) cfg.problem.ga.seed = *opts.seed;
    if (opts.workers) {
        if (*opts.workers < 0) throw ConfigError("--workers", "must be >= 0");
        cfg.workers = *opts.workers;
    }
    if (opts.output) cfg.output_dir = *opts.output;
    return cfg;
}

/// Builds the problem; invalid specs are config errors, a closing gap while
/// resolving T = "auto" is a numeric failure and propagates as such.
inline qaga::AnnealingProblem make_problem(const ExperimentConfig& cfg) {
    try {
        return qaga::AnnealingProblem(cfg.problem);
    } catch (const std::invalid_argument& e) {
        throw ConfigError("problem", e.what());
    }
}

/// Serializes results in run order no matter which worker finishes first.
class OrderedWriter {
public:
    OrderedWriter(std::filesystem::path dir, std::string hash, bool traces)
        : dir_(std::move(dir)), hash_(std::move(hash)), traces_(traces),
          runs_(dir_ / "runs.jsonl", std::ios::binary | std::ios::trunc) {
        if (!runs_) throw std::runtime_error("cannot write " + (dir_ / "runs.jsonl").string());
    }

    struct Item {
        qaga::RunRecord record;
        std::optional<std::string> trace;
    };

    void submit(std::size_t index, Item item) {
        std::lock_guard lock(mutex_);
        pending_.emplace(index, std::move(item));
        while (!pending_.empty() && pending_.begin()->first == next_) {
            flush(pending_.begin()->second);
            pending_.erase(pending_.begin());
            ++next_;
        }
    }

private:
    void flush(const Item& item) {
        const auto& r = item.record;
        runs_ << run_json(r, hash_).dump() << '\n';
        runs_.flush();
        std::string history;
        for (const auto& g : r.history) history += generation_json(g, r.index, r.seed, hash_).dump() + "\n";
        write_text(dir_ / "history" / (run_stem(r.index) + ".jsonl"), history);
        if (traces_ && item.trace) write_text(dir_ / "traces" / (run_stem(r.index) + ".tsv"), *item.trace);
    }

    std::filesystem::path dir_;
    std::string hash_;
    bool traces_;
    std::ofstream runs_;
    std::mutex mutex_;
    std::map<std::size_t, Item> pending_;
    std::size_t next_{0};
};

} // namespace detail

/// Full repetition batch. Returns the summary for in-process callers.
inline qaga::RepetitionSummary execute_run(const ExperimentConfig& cfg, std::ostream& log) {
    const qaga::AnnealingProblem problem = detail::make_problem(cfg);
    const std::filesystem::path dir(cfg.output_dir);
    std::filesystem::create_directories(dir / "history");
    if (cfg.emit_traces) std::filesystem::create_directories(dir / "traces");

    const int workers = qaga::resolve_workers(cfg.workers);
    // Spread whole runs over the pool; a single run parallelizes its evaluations.
    qaga::ga::RunOptions ga_opts;
    ga_opts.workers = cfg.n_rep == 1 ? workers : 1;
    const int run_workers = cfg.n_rep == 1 ? 1 : workers;

    detail::OrderedWriter writer(dir, cfg.config_hash, cfg.emit_traces);
    std::vector<qaga::RunRecord> runs(static_cast<std::size_t>(cfg.n_rep));
    const std::uint64_t base_seed = cfg.problem.ga.seed;
    qaga::parallel_for(runs.size(), run_workers, [&](std::size_t k) {
        auto rec = qaga::run_single(problem, base_seed + k, static_cast<int>(k), ga_opts);
        detail::OrderedWriter::Item item{rec, std::nullopt};
        if (cfg.emit_traces && rec.ok) {
            const auto setup = problem.setup_for(rec.genes);
            item.trace = trace_text(problem.trace(setup), provenance(cfg.config_hash, rec.seed));
        }
        runs[k] = std::move(rec);
        writer.submit(k, std::move(item));
    });

    auto summary = qaga::summarize(std::move(runs));
    write_text(dir / "summary.json", summary_json(cfg, problem, summary).dump(2) + "\n");
    log << "T = " << problem.annealing_time() << ", " << summary.successes << " of " << cfg.n_rep
        << " runs succeeded\n";
    if (summary.successes > 0) {
        log << std::setprecision(6) << (cfg.problem.is_ising() ? "approximation ratio" : "fidelity")
            << ": median " << summary.score.median << " (Q1 " << summary.score.q1 << ", Q3 " << summary.score.q3
            << "), level crossings " << summary.crossings << '\n';
    }
    for (const auto& r : summary.runs) {
        if (!r.ok) log << "run " << r.index << " failed: " << r.error << '\n';
    }
    log << "results written to " << dir.string() << '\n';
    return summary;
}

inline int cmd_run(const CommandOptions& opts, std::ostream& out) {
    const auto summary = execute_run(detail::resolve(opts), out);
    return summary.failures > 0 ? kExitNumeric : kExitOk;
}

inline int cmd_baseline(const CommandOptions& opts, std::ostream& out) {
    const ExperimentConfig cfg = detail::resolve(opts);
    const qaga::AnnealingProblem problem = detail::make_problem(cfg);
    const auto setup = problem.baseline_setup();
    const auto trace = problem.trace(setup);
    const auto m = problem.metrics(setup, trace);

    const std::filesystem::path dir(cfg.output_dir);
    std::filesystem::create_directories(dir / "traces");
    write_text(dir / "traces" / "baseline.tsv", trace_text(trace, provenance(cfg.config_hash, cfg.problem.ga.seed)));
    json doc{{"config_hash", cfg.config_hash},
             {"seed", cfg.problem.ga.seed},
             {"model", model_json(cfg.problem)},
             {"n", model_qubits(cfg.problem)},
             {"T", problem.annealing_time()},
             {"schedules", qaga::schedule_records(setup)}};
    const json metrics = metrics_json(m);
    for (const auto& [k, v] : metrics.items()) doc[k] = v;
    write_text(dir / "baseline.json", doc.dump(2) + "\n");

    out << std::setprecision(6) << "T = " << problem.annealing_time() << "\nfidelity = " << m.fidelity
        << "\narea = " << m.area << "\ngap_min = " << m.gap_min << " at s = " << m.gap_min_s << '\n';
    if (m.approximation_ratio) out << "approximation ratio = " << *m.approximation_ratio << '\n';
    return kExitOk;
}

inline int cmd_timescale(const CommandOptions& opts, std::ostream& out) {
    ExperimentConfig cfg = detail::resolve(opts);
    // The timescale only needs the bare path; skip resolving an "auto" T twice.
    cfg.problem.annealing_time = cfg.problem.annealing_time.value_or(1.0);
    const qaga::AnnealingProblem problem = detail::make_problem(cfg);
    const double t_ad = problem.bare_adiabatic_timescale();
    out << std::fixed << std::setprecision(4) << "T_AD = " << t_ad << '\n'
        << std::setprecision(1) << "T = " << std::round(t_ad) / 10.0 << " (T_AD / 10)\n";
    return kExitOk;
}

inline int cmd_plotdata(const PlotRequest& req, const std::optional<std::string>& output, std::ostream& out) {
    if (output) {
        std::ostringstream buf;
        write_plot_table(buf, req);
        write_text(*output, buf.str());
    } else {
        write_plot_table(out, req);
    }
    return kExitOk;
}

/// Maps exceptions from any command to the documented exit codes.
template <class Fn>
int guarded_command(Fn&& fn, std::ostream& err) {
    try {
        return fn();
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const PlotError& e) {
        err << "plotdata: " << e.what() << '\n';
        return kExitConfig;
    } catch (const qaga::IntegrationError& e) {
        err << "numeric failure: " << e.what() << '\n';
        return kExitNumeric;
    } catch (const qaga::DegenerateGapError& e) {
        err << "numeric failure: " << e.what() << '\n';
        return kExitNumeric;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

} // namespace anneal
