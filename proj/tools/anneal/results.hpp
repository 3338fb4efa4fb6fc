#pragma once

// Result files written by `anneal run` and `anneal baseline`:
//
//   runs.jsonl            one record per repetition, in run order
//   summary.json          aggregates plus a compact per-run table
//   history/run_NNN.jsonl per-generation best / median fitness
//   traces/run_NNN.tsv    re-simulated best chromosome (emit_traces)
//   baseline.json         linear-schedule reference (baseline command)
//
// Fields named `wall_seconds` carry timing only; everything else is a pure
// function of the config and seed.

#include "config.hpp"

#include "qaga/experiments.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <variant>

namespace anneal {

inline constexpr const char* kWallTimeKey = "wall_seconds";

inline std::string run_stem(int index) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "run_%03d", index);
    return buf;
}

inline std::string provenance(const std::string& hash, std::uint64_t seed) {
    return "config_hash=" + hash + " seed=" + std::to_string(seed);
}

inline json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

inline json model_json(const qaga::ProblemSpec& spec) {
    if (const auto* p = std::get_if<qaga::PSpinModel>(&spec.model)) {
        return {{"type", "pspin"}, {"n", p->qubits}, {"p", p->order}, {"J", p->coupling}};
    }
    const auto& inst = std::get<qaga::IsingInstance>(spec.model);
    json bonds = json::array();
    for (const auto& b : inst.bonds) bonds.push_back({b.i, b.j, b.coupling});
    return {{"type", "ising"}, {"n", inst.qubits}, {"bonds", bonds}};
}

inline int model_qubits(const qaga::ProblemSpec& spec) {
    if (const auto* p = std::get_if<qaga::PSpinModel>(&spec.model)) return p->qubits;
    return std::get<qaga::IsingInstance>(spec.model).qubits;
}

inline json metrics_json(const qaga::RunMetrics& m) {
    return {{"fidelity", m.fidelity},
            {"area", m.area},
            {"gap_min", m.gap_min},
            {"gap_min_s", m.gap_min_s},
            {"crossing", m.crossing},
            {"mean_energy", m.mean_energy},
            {"approximation_ratio", optional_number(m.approximation_ratio)},
            {"within_bound", m.within_bound}};
}

inline json run_json(const qaga::RunRecord& r, const std::string& hash) {
    json j{{"index", r.index}, {"seed", r.seed}, {"config_hash", hash}, {"ok", r.ok}};
    if (!r.ok) {
        j["error"] = r.error;
    } else {
        j["genes"] = r.genes;
        j["best_fitness"] = r.best_fitness;
        if (r.objectives) {
            j["objectives"] = {{"area", (*r.objectives)[0]}, {"final_pgs", (*r.objectives)[1]}};
            j["front_size"] = r.front_size;
        }
        j["score"] = r.score;
        j["metrics"] = metrics_json(r.metrics);
        j["schedules"] = r.schedules;
    }
    j[kWallTimeKey] = r.wall_seconds;
    return j;
}

inline json generation_json(const qaga::ga::GenerationRecord& g, int run, std::uint64_t seed, const std::string& hash) {
    return {{"run", run},
            {"seed", seed},
            {"config_hash", hash},
            {"generation", g.generation},
            {"best", g.best},
            {"median", g.median},
            {kWallTimeKey, g.wall_seconds}};
}

inline json box_json(const qaga::BoxStats& b) {
    return {{"count", b.count}, {"min", b.min}, {"q1", b.q1}, {"median", b.median}, {"q3", b.q3}, {"max", b.max}};
}

inline json summary_json(const ExperimentConfig& cfg, const qaga::AnnealingProblem& problem,
                         const qaga::RepetitionSummary& summary) {
    json runs = json::array();
    for (const auto& r : summary.runs) {
        json row{{"index", r.index}, {"seed", r.seed}, {"ok", r.ok}};
        if (r.ok) {
            row["score"] = r.score;
            row["fidelity"] = r.metrics.fidelity;
            row["area"] = r.metrics.area;
            row["gap_min"] = r.metrics.gap_min;
            row["crossing"] = r.metrics.crossing;
            row["approximation_ratio"] = optional_number(r.metrics.approximation_ratio);
        } else {
            row["error"] = r.error;
        }
        runs.push_back(row);
    }
    return {{"config_hash", cfg.config_hash},
            {"seed", cfg.problem.ga.seed},
            {"model", model_json(cfg.problem)},
            {"n", model_qubits(cfg.problem)},
            {"T", problem.annealing_time()},
            {"chromosome_length", problem.chromosome_length()},
            {"generations", cfg.problem.ga.generations},
            {"n_rep", cfg.n_rep},
            {"score_kind", cfg.problem.is_ising() ? "approximation_ratio" : "fidelity"},
            {"successes", summary.successes},
            {"failures", summary.failures},
            {"score", box_json(summary.score)},
            {"crossings", summary.crossings},
            {"runs", runs},
            {kWallTimeKey, summary.wall_seconds}};
}

/// Copy of `j` with every timing field removed, for reproducibility checks.
inline json strip_wall_time(json j) {
    if (j.is_object()) {
        j.erase(kWallTimeKey);
        for (auto& [k, v] : j.items()) {
            (void)k;
            v = strip_wall_time(v);
        }
    } else if (j.is_array()) {
        for (auto& v : j) v = strip_wall_time(v);
    }
    return j;
}

/// File contents with timing fields removed; JSON and JSON-lines files are
/// re-serialized, anything else is returned verbatim.
inline std::string timing_free_contents(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    const auto ext = path.extension().string();
    if (ext == ".json") return strip_wall_time(json::parse(text)).dump(2);
    if (ext == ".jsonl") {
        std::istringstream lines(text);
        std::string line;
        std::string out;
        while (std::getline(lines, line)) {
            if (!line.empty()) out += strip_wall_time(json::parse(line)).dump() + "\n";
        }
        return out;
    }
    return text;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

inline std::string trace_text(const qaga::EvolutionTrace& trace, const std::string& prov) {
    std::ostringstream os;
    qaga::write_trace_table(os, trace, prov);
    return os.str();
}

} // namespace anneal
