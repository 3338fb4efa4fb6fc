#pragma once

// Experiment config files (JSON). Every error names the offending key path,
// e.g. `problem.model.n`. See README.md for the full key reference.

#include "qaga/experiments.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace anneal {

using json = nlohmann::json;

class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string key, const std::string& message)
        : std::runtime_error(key + ": " + message), key_(std::move(key)) {}

    [[nodiscard]] const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

struct ExperimentConfig {
    qaga::ProblemSpec problem;
    std::string output_dir{"results"};
    bool emit_traces{false};
    int n_rep{1};
    int workers{0};  // 0: all available cores
    std::string config_hash;
    json source;     // the document as read
};

/// 64-bit FNV-1a, printed as 16 hex digits.
inline std::string fnv1a_hex(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
}

namespace detail {

/// Object view that tracks which keys were consumed, so leftovers can be
/// reported as unknown.
class Section {
public:
    Section(const json& node, std::string path) : node_(&node), path_(std::move(path)) {
        if (!node.is_object()) throw ConfigError(path_, "expected an object");
    }

    [[nodiscard]] const std::string& path() const noexcept { return path_; }
    [[nodiscard]] std::string key_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    [[nodiscard]] bool has(const std::string& key) const { return node_->contains(key); }

    const json& require(const std::string& key) {
        if (!has(key)) throw ConfigError(key_path(key), "missing required key");
        used_.insert(key);
        return node_->at(key);
    }

    const json* find(const std::string& key) {
        if (!has(key)) return nullptr;
        used_.insert(key);
        return &node_->at(key);
    }

    Section section(const std::string& key) { return {require(key), key_path(key)}; }

    int integer(const std::string& key, std::optional<int> fallback = std::nullopt) {
        const json* v = fallback ? find(key) : &require(key);
        if (!v) return *fallback;
        if (!v->is_number_integer()) throw ConfigError(key_path(key), "expected an integer");
        return v->get<int>();
    }

    std::uint64_t unsigned_integer(const std::string& key, std::uint64_t fallback) {
        const json* v = find(key);
        if (!v) return fallback;
        if (!v->is_number_integer() || v->get<long long>() < 0) {
            throw ConfigError(key_path(key), "expected a non-negative integer");
        }
        return v->get<std::uint64_t>();
    }

    double number(const std::string& key, std::optional<double> fallback = std::nullopt) {
        const json* v = fallback ? find(key) : &require(key);
        if (!v) return *fallback;
        if (!v->is_number()) throw ConfigError(key_path(key), "expected a number");
        return v->get<double>();
    }

    bool boolean(const std::string& key, bool fallback) {
        const json* v = find(key);
        if (!v) return fallback;
        if (!v->is_boolean()) throw ConfigError(key_path(key), "expected true or false");
        return v->get<bool>();
    }

    std::string string(const std::string& key, std::optional<std::string> fallback = std::nullopt) {
        const json* v = fallback ? find(key) : &require(key);
        if (!v) return *fallback;
        if (!v->is_string()) throw ConfigError(key_path(key), "expected a string");
        return v->get<std::string>();
    }

    void finish() const {
        for (const auto& [key, value] : node_->items()) {
            (void)value;
            if (!used_.count(key)) throw ConfigError(key_path(key), "unknown key");
        }
    }

private:
    const json* node_;
    std::string path_;
    std::set<std::string> used_;
};

template <class Fn>
auto guarded(const std::string& key, Fn&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        throw ConfigError(key, e.what());
    }
}

inline std::vector<std::pair<int, int>> parse_edges(const json& node, const std::string& key) {
    if (!node.is_array()) throw ConfigError(key, "expected a list of [i, j] pairs");
    std::vector<std::pair<int, int>> edges;
    for (const auto& e : node) {
        if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() || !e[1].is_number_integer()) {
            throw ConfigError(key, "expected a list of [i, j] pairs");
        }
        edges.emplace_back(e[0].get<int>(), e[1].get<int>());
    }
    return edges;
}

inline qaga::Model parse_model(Section m, const std::filesystem::path& base_dir) {
    const std::string type = m.string("type");
    qaga::Model model;
    if (type == "pspin") {
        qaga::PSpinModel p;
        p.qubits = m.integer("n");
        if (p.qubits < 1) throw ConfigError(m.key_path("n"), "must be >= 1");
        p.order = m.integer("p", 3);
        if (p.order < 2) throw ConfigError(m.key_path("p"), "must be >= 2");
        p.coupling = m.number("J", 1.0);
        if (!(p.coupling > 0.0)) throw ConfigError(m.key_path("J"), "must be positive");
        model = p;
    } else if (type == "ising") {
        const int n = m.integer("n");
        if (n < 1 || n > qaga::kMaxFullRegisterQubits) {
            throw ConfigError(m.key_path("n"), "must lie in [1, " + std::to_string(qaga::kMaxFullRegisterQubits) + "]");
        }
        qaga::IsingInstance inst;
        if (const json* bonds = m.find("bonds")) {
            inst.qubits = n;
            if (!bonds->is_array()) throw ConfigError(m.key_path("bonds"), "expected a list of [i, j, J] triples");
            for (const auto& b : *bonds) {
                if (!b.is_array() || b.size() != 3 || !b[0].is_number_integer() || !b[1].is_number_integer()
                    || !b[2].is_number()) {
                    throw ConfigError(m.key_path("bonds"), "expected a list of [i, j, J] triples");
                }
                inst.bonds.push_back({b[0].get<int>(), b[1].get<int>(), b[2].get<double>()});
            }
        } else if (const json* file = m.find("instance_file")) {
            if (!file->is_string()) throw ConfigError(m.key_path("instance_file"), "expected a string");
            const auto path = base_dir / file->get<std::string>();
            std::ifstream in(path);
            if (!in) throw ConfigError(m.key_path("instance_file"), "cannot open " + path.string());
            inst = guarded(m.key_path("instance_file"), [&] { return qaga::read_ising_instance(in); });
            if (inst.qubits != n) throw ConfigError(m.key_path("n"), "does not match the instance file");
        } else {
            const std::uint64_t seed = m.unsigned_integer("seed", 0);
            std::vector<std::pair<int, int>> edges;
            if (const json* e = m.find("edges")) {
                edges = parse_edges(*e, m.key_path("edges"));
            } else if (n == 5) {
                edges = qaga::default_ising_edges();
            } else {
                throw ConfigError(m.key_path("edges"), "missing required key (no default graph for n != 5)");
            }
            inst = guarded(m.key_path("edges"), [&] { return qaga::generate_ising_instance(n, edges, seed); });
        }
        guarded(m.key_path("bonds"), [&] { inst.validate(); });
        model = inst;
    } else {
        throw ConfigError(m.key_path("type"), "expected \"pspin\" or \"ising\", got \"" + type + "\"");
    }
    m.finish();
    return model;
}

inline qaga::Mode parse_mode(Section m) {
    const std::string type = m.string("type");
    auto order = [&](const char* key, int fallback) {
        const int k = m.integer(key, fallback);
        if (k < 1) throw ConfigError(m.key_path(key), "must be >= 1");
        return k;
    };
    auto count = [&](int fallback) {
        const int d = m.integer("d", fallback);
        guarded(m.key_path("d"), [&] { return qaga::od_operator_count(d); });
        return d;
    };
    qaga::Mode mode;
    if (type == "schedule") {
        const int ka = order("k_a", 2);
        const int kb = order("k_b", 2);
        mode = qaga::ScheduleOnly{ka, kb};
    } else if (type == "od") {
        mode = qaga::OdOnly{count(3)};
    } else if (type == "joint") {
        const int ka = order("k_a", 2);
        const int kb = order("k_b", 2);
        const int kc = order("k_c", 3);
        mode = qaga::Joint{ka, kb, kc, count(3)};
    } else {
        throw ConfigError(m.key_path("type"), "expected \"schedule\", \"od\" or \"joint\", got \"" + type + "\"");
    }
    m.finish();
    return mode;
}

inline qaga::ga::Hyperparams parse_ga(Section* g, const qaga::Mode& mode) {
    const bool schedules = std::holds_alternative<qaga::ScheduleOnly>(mode);
    std::string preset = schedules ? "schedule" : "od";
    if (g) preset = g->string("preset", preset);
    qaga::ga::Hyperparams p;
    if (preset == "schedule") {
        p = qaga::ga::Hyperparams::schedule_preset();
    } else if (preset == "od") {
        p = qaga::ga::Hyperparams::od_preset();
    } else {
        throw ConfigError(g->key_path("preset"), "expected \"schedule\" or \"od\"");
    }
    if (!g) return p;
    p.population = g->integer("population", p.population);
    p.generations = g->integer("generations", p.generations);
    p.tournament_size = g->integer("tournament_size", p.tournament_size);
    p.crossover_prob = g->number("crossover_prob", p.crossover_prob);
    p.mutation_prob = g->number("mutation_prob", p.mutation_prob);
    p.gene_mutation_prob = g->number("gene_mutation_prob", p.gene_mutation_prob);
    p.mutation_mean = g->number("mutation_mean", p.mutation_mean);
    p.mutation_variance = g->number("mutation_variance", p.mutation_variance);
    p.gene_min = g->number("gene_min", p.gene_min);
    p.gene_max = g->number("gene_max", p.gene_max);
    p.seed = g->unsigned_integer("seed", p.seed);
    g->finish();
    auto check = [&](bool ok, const char* key, const char* msg) {
        if (!ok) throw ConfigError(g->key_path(key), msg);
    };
    for (const auto& [v, key] : {std::pair{p.crossover_prob, "crossover_prob"}, std::pair{p.mutation_prob, "mutation_prob"},
                                 std::pair{p.gene_mutation_prob, "gene_mutation_prob"}}) {
        check(v >= 0.0 && v <= 1.0, key, "must lie in [0, 1]");
    }
    check(p.population >= 1, "population", "must be >= 1");
    check(p.generations >= 0, "generations", "must be >= 0");
    check(p.tournament_size >= 1, "tournament_size", "must be >= 1");
    check(p.mutation_variance > 0.0, "mutation_variance", "must be positive");
    check(p.gene_min < p.gene_max, "gene_max", "must exceed gene_min");
    guarded(g->path(), [&] { p.validate(); });
    return p;
}

inline qaga::ProblemSpec parse_problem(Section p, const std::filesystem::path& base_dir) {
    qaga::ProblemSpec spec;
    spec.model = parse_model(p.section("model"), base_dir);
    spec.mode = parse_mode(p.section("mode"));
    if (spec.is_ising()) {
        if (const auto* od = std::get_if<qaga::OdOnly>(&spec.mode); od && od->d != 3) {
            throw ConfigError("problem.mode.d", "Ising problems support d = 3 only");
        }
        if (const auto* j = std::get_if<qaga::Joint>(&spec.mode); j && j->d != 3) {
            throw ConfigError("problem.mode.d", "Ising problems support d = 3 only");
        }
    }

    if (const json* t = p.find("T")) {
        if (t->is_string() && t->get<std::string>() == "auto") {
            spec.annealing_time.reset();
        } else if (t->is_number() && t->get<double>() > 0.0) {
            spec.annealing_time = t->get<double>();
        } else {
            throw ConfigError(p.key_path("T"), "expected a positive number or \"auto\"");
        }
    }
    spec.gamma = p.number("gamma", 1.0);
    if (!(spec.gamma > 0.0)) throw ConfigError(p.key_path("gamma"), "must be positive");

    const std::string fitness = p.string("fitness", spec.is_ising() ? "mean_energy" : "fidelity");
    if (fitness == "fidelity") {
        spec.fitness = qaga::FitnessKind::Fidelity;
    } else if (fitness == "mean_energy") {
        spec.fitness = qaga::FitnessKind::MeanEnergy;
    } else if (fitness == "multi_objective") {
        spec.fitness = qaga::FitnessKind::MultiObjective;
    } else {
        throw ConfigError(p.key_path("fitness"), "expected \"fidelity\", \"mean_energy\" or \"multi_objective\"");
    }

    if (p.has("ga")) {
        Section g = p.section("ga");
        spec.ga = parse_ga(&g, spec.mode);
    } else {
        spec.ga = parse_ga(nullptr, spec.mode);
    }
    spec.n_samples = p.integer("n_samples", 100);
    if (spec.n_samples < 2) throw ConfigError(p.key_path("n_samples"), "must be >= 2");
    spec.amplitude_bound = p.number("amplitude_bound", 10.0);
    if (const json* tol = p.find("degeneracy_tol")) {
        if (!tol->is_number() || !(tol->get<double>() > 0.0)) {
            throw ConfigError(p.key_path("degeneracy_tol"), "expected a positive number");
        }
        spec.degeneracy_tol = tol->get<double>();
    }
    p.finish();
    return spec;
}

} // namespace detail

inline ExperimentConfig parse_config(const json& doc, const std::filesystem::path& base_dir = {}) {
    ExperimentConfig cfg;
    detail::Section root(doc, "");
    cfg.problem = detail::parse_problem(root.section("problem"), base_dir);
    cfg.output_dir = root.string("output_dir", cfg.output_dir);
    cfg.emit_traces = root.boolean("emit_traces", cfg.emit_traces);
    cfg.n_rep = root.integer("n_rep", cfg.n_rep);
    if (cfg.n_rep < 1) throw ConfigError("n_rep", "must be >= 1");
    cfg.workers = root.integer("workers", cfg.workers);
    if (cfg.workers < 0) throw ConfigError("workers", "must be >= 0");
    root.finish();
    cfg.source = doc;
    cfg.config_hash = fnv1a_hex(doc.dump());
    return cfg;
}

inline ExperimentConfig parse_config_text(const std::string& text, const std::filesystem::path& base_dir = {}) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("(document)", std::string("invalid JSON: ") + e.what());
    }
    return parse_config(doc, base_dir);
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("(file)", "cannot open config " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str(), path.parent_path());
}

} // namespace anneal
