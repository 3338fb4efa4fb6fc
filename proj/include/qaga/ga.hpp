#pragma once

// Real-valued genetic optimization.
//
// SOGA: Gaussian mutation -> two-point crossover -> evaluation -> tournament
// selection, with a best-ever archive outside the population.
// MOGA: NSGA-II (non-dominated sorting, crowding distance, binary tournament on
// rank and crowding) maximizing two objectives.
//
// Every random decision is drawn on the calling thread in a fixed order, so a
// run is a pure function of (fitness, L, hyperparameters). Fitness evaluations
// may be spread across worker threads.

#include "qaga/parallel.hpp"

#include <algorithm>
#include <array>
#include <cassert>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace qaga::ga {

using Rng = std::mt19937_64;
using Objectives = std::array<double, 2>;

struct Hyperparams {
    int population{20};
    int generations{100};
    int tournament_size{6};
    double crossover_prob{0.75};
    double mutation_prob{0.35};
    double gene_mutation_prob{0.1};
    double mutation_mean{0.0};
    double mutation_variance{0.6};
    double gene_min{-1.0};
    double gene_max{1.0};
    std::uint64_t seed{0};

    /// Tuned values for annealing-schedule chromosomes.
    static Hyperparams schedule_preset() { return {}; }

    /// Tuned values for optimal-driving chromosomes.
    static Hyperparams od_preset() {
        Hyperparams p;
        p.tournament_size = 3;
        p.crossover_prob = 0.3;
        p.mutation_prob = 0.9;
        p.gene_mutation_prob = 0.1;
        p.mutation_variance = 1.0;
        return p;
    }

    void validate() const {
        auto prob = [](double p, const char* name) {
            if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument(std::string("Hyperparams: ") + name + " must lie in [0, 1]");
        };
        prob(crossover_prob, "P_c");
        prob(mutation_prob, "P_m");
        prob(gene_mutation_prob, "P_ind");
        if (population < 1) throw std::invalid_argument("Hyperparams: N_pop must be positive");
        if (generations < 0) throw std::invalid_argument("Hyperparams: N_gen must be non-negative");
        if (tournament_size < 1) throw std::invalid_argument("Hyperparams: N_T must be >= 1");
        if (!(mutation_variance > 0.0)) throw std::invalid_argument("Hyperparams: sigma2 must be positive");
        if (!(gene_min < gene_max)) throw std::invalid_argument("Hyperparams: g_min must be < g_max");
    }
};

template <class Fitness>
struct BasicChromosome {
    std::vector<double> genes;
    std::optional<Fitness> fitness;

    [[nodiscard]] bool evaluated() const noexcept { return fitness.has_value(); }
};

using Chromosome = BasicChromosome<double>;
using MoChromosome = BasicChromosome<Objectives>;

class FitnessError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Variation and selection operators

template <class Fitness = double>
std::vector<BasicChromosome<Fitness>> initialize_population(std::size_t length, const Hyperparams& params, Rng& rng) {
    params.validate();
    std::uniform_real_distribution<double> gene(params.gene_min, params.gene_max);
    std::vector<BasicChromosome<Fitness>> pop(static_cast<std::size_t>(params.population));
    for (auto& c : pop) {
        c.genes.resize(length);
        for (auto& g : c.genes) g = gene(rng);
    }
    return pop;
}

/// With probability P_m, add N(mu, sigma2) to each gene with probability P_ind.
template <class Fitness>
BasicChromosome<Fitness> gaussian_mutate(BasicChromosome<Fitness> c, const Hyperparams& params, Rng& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    if (!(u(rng) < params.mutation_prob)) return c;
    std::normal_distribution<double> noise(params.mutation_mean, std::sqrt(params.mutation_variance));
    bool changed = false;
    for (auto& g : c.genes) {
        if (u(rng) < params.gene_mutation_prob) {
            const double before = g;
            g += noise(rng);
            changed = changed || g != before;
        }
    }
    if (changed) c.fitness.reset();
    return c;
}

/// Swaps genes [lo, hi) between the two chromosomes.
template <class Fitness>
void exchange_segment(BasicChromosome<Fitness>& a, BasicChromosome<Fitness>& b, std::size_t lo, std::size_t hi) {
    if (a.genes.size() != b.genes.size()) throw std::invalid_argument("crossover: chromosome lengths differ");
    if (lo > hi) std::swap(lo, hi);
    hi = std::min(hi, a.genes.size());
    bool changed = false;
    for (std::size_t i = lo; i < hi; ++i) {
        changed = changed || a.genes[i] != b.genes[i];
        std::swap(a.genes[i], b.genes[i]);
    }
    if (changed) {
        a.fitness.reset();
        b.fitness.reset();
    }
}

/// With probability P_c, draws two cut indices in [0, L - 1] and exchanges the
/// segment between them. Chromosomes shorter than two genes pass unchanged.
template <class Fitness>
std::pair<BasicChromosome<Fitness>, BasicChromosome<Fitness>> two_point_crossover(BasicChromosome<Fitness> a,
                                                                                  BasicChromosome<Fitness> b,
                                                                                  const Hyperparams& params, Rng& rng) {
    if (a.genes.size() != b.genes.size()) throw std::invalid_argument("crossover: chromosome lengths differ");
    std::uniform_real_distribution<double> u(0.0, 1.0);
    if (!(u(rng) < params.crossover_prob) || a.genes.size() < 2) return {std::move(a), std::move(b)};
    std::uniform_int_distribution<std::size_t> cut(0, a.genes.size() - 1);
    const std::size_t c1 = cut(rng);
    const std::size_t c2 = cut(rng);
    exchange_segment(a, b, std::min(c1, c2), std::max(c1, c2));
    return {std::move(a), std::move(b)};
}

/// N_pop tournaments of N_T competitors drawn with replacement; the first
/// drawn among the fittest wins.
inline std::vector<Chromosome> tournament_select(const std::vector<Chromosome>& population, const Hyperparams& params,
                                                 Rng& rng) {
    if (population.empty()) throw std::invalid_argument("tournament_select: empty population");
    for (const auto& c : population) {
        if (!c.evaluated()) throw std::invalid_argument("tournament_select: unevaluated chromosome in population");
    }
    std::uniform_int_distribution<std::size_t> pick(0, population.size() - 1);
    std::vector<Chromosome> out;
    out.reserve(static_cast<std::size_t>(params.population));
    for (int t = 0; t < params.population; ++t) {
        std::size_t winner = pick(rng);
        for (int k = 1; k < params.tournament_size; ++k) {
            const std::size_t challenger = pick(rng);
            if (*population[challenger].fitness > *population[winner].fitness) winner = challenger;
        }
        out.push_back(population[winner]);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Shared driver pieces

struct GenerationRecord {
    int generation{0};
    std::vector<double> best;    // per objective
    std::vector<double> median;  // per objective
    double wall_seconds{0.0};
};

struct RunOptions {
    int workers{1};
    std::function<void(const GenerationRecord&)> on_generation;
};

namespace detail {

inline double median_of(std::vector<double> v) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

template <class Fitness, class Fn>
void evaluate_pending(std::vector<BasicChromosome<Fitness>>& pop, Fn& fitness, int workers, int generation) {
    std::vector<std::size_t> pending;
    for (std::size_t i = 0; i < pop.size(); ++i) {
        if (!pop[i].evaluated()) pending.push_back(i);
    }
    std::vector<Fitness> results(pending.size());
    parallel_for(pending.size(), workers, [&](std::size_t k) {
        const std::size_t i = pending[k];
        try {
            results[k] = fitness(std::span<const double>(pop[i].genes));
        } catch (const std::exception& e) {
            throw FitnessError("fitness evaluation failed at generation " + std::to_string(generation) + ", individual "
                               + std::to_string(i) + ": " + e.what());
        }
    });
    for (std::size_t k = 0; k < pending.size(); ++k) pop[pending[k]].fitness = results[k];
}

template <class Fitness>
void vary(std::vector<BasicChromosome<Fitness>>& pop, const Hyperparams& params, Rng& rng) {
    for (auto& c : pop) c = gaussian_mutate(std::move(c), params, rng);
    for (std::size_t i = 1; i < pop.size(); i += 2) {
        auto [x, y] = two_point_crossover(std::move(pop[i - 1]), std::move(pop[i]), params, rng);
        pop[i - 1] = std::move(x);
        pop[i] = std::move(y);
    }
}

class Stopwatch {
public:
    [[nodiscard]] double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

} // namespace detail

// ---------------------------------------------------------------------------
// SOGA

using ScalarFitness = std::function<double(std::span<const double>)>;

struct SogaResult {
    Chromosome best;
    std::vector<GenerationRecord> history;  // generation 0 is the initial population
};

inline SogaResult run_soga(const ScalarFitness& fitness, std::size_t length, const Hyperparams& params,
                           const RunOptions& options = {}) {
    params.validate();
    if (length == 0) throw std::invalid_argument("run_soga: chromosome length must be positive");
    Rng rng(params.seed);
    detail::Stopwatch clock;
    auto fn = fitness;

    auto pop = initialize_population<double>(length, params, rng);
    detail::evaluate_pending(pop, fn, options.workers, 0);

    SogaResult result;
    result.best = pop.front();
    auto update_archive = [&] {
        for (const auto& c : pop) {
            if (*c.fitness > *result.best.fitness) result.best = c;
        }
    };
    auto record = [&](int generation) {
        std::vector<double> values;
        values.reserve(pop.size());
        for (const auto& c : pop) values.push_back(*c.fitness);
        GenerationRecord rec{generation, {*result.best.fitness}, {detail::median_of(std::move(values))}, clock.seconds()};
        if (options.on_generation) options.on_generation(rec);
        result.history.push_back(std::move(rec));
    };

    update_archive();
    record(0);
    for (int g = 1; g <= params.generations; ++g) {
        detail::vary(pop, params, rng);
        detail::evaluate_pending(pop, fn, options.workers, g);
        update_archive();
        pop = tournament_select(pop, params, rng);
        assert(pop.size() == static_cast<std::size_t>(params.population));
        record(g);
    }
    return result;
}

// ---------------------------------------------------------------------------
// NSGA-II

/// True when `a` is at least as good in both objectives and better in one.
inline bool dominates(const Objectives& a, const Objectives& b) {
    return a[0] >= b[0] && a[1] >= b[1] && (a[0] > b[0] || a[1] > b[1]);
}

/// Fronts of indices into `points`, best first (both objectives maximized).
inline std::vector<std::vector<std::size_t>> fast_nondominated_sort(std::span<const Objectives> points) {
    const std::size_t n = points.size();
    std::vector<std::vector<std::size_t>> dominated_by(n);
    std::vector<int> domination_count(n, 0);
    std::vector<std::vector<std::size_t>> fronts;
    std::vector<std::size_t> current;
    for (std::size_t p = 0; p < n; ++p) {
        for (std::size_t q = 0; q < n; ++q) {
            if (p == q) continue;
            if (dominates(points[p], points[q])) {
                dominated_by[p].push_back(q);
            } else if (dominates(points[q], points[p])) {
                ++domination_count[p];
            }
        }
        if (domination_count[p] == 0) current.push_back(p);
    }
    while (!current.empty()) {
        std::vector<std::size_t> next;
        for (std::size_t p : current) {
            for (std::size_t q : dominated_by[p]) {
                if (--domination_count[q] == 0) next.push_back(q);
            }
        }
        std::sort(next.begin(), next.end());
        fronts.push_back(std::move(current));
        current = std::move(next);
    }
    return fronts;
}

/// Crowding distance of each member of one front. Boundary members of either
/// objective get +infinity; a zero objective range contributes nothing.
inline std::vector<double> crowding_distance(std::span<const Objectives> front) {
    if (front.empty()) throw std::invalid_argument("crowding_distance: empty front");
    const std::size_t n = front.size();
    std::vector<double> distance(n, 0.0);
    if (n <= 2) {
        std::fill(distance.begin(), distance.end(), std::numeric_limits<double>::infinity());
        return distance;
    }
    std::vector<std::size_t> order(n);
    for (std::size_t m = 0; m < 2; ++m) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return front[a][m] < front[b][m]; });
        const double range = front[order.back()][m] - front[order.front()][m];
        distance[order.front()] = std::numeric_limits<double>::infinity();
        distance[order.back()] = std::numeric_limits<double>::infinity();
        if (range <= 0.0) continue;
        for (std::size_t k = 1; k + 1 < n; ++k) {
            distance[order[k]] += (front[order[k + 1]][m] - front[order[k - 1]][m]) / range;
        }
    }
    return distance;
}

struct ParetoFront {
    std::vector<MoChromosome> members;
};

struct MogaResult {
    ParetoFront front;
    std::vector<MoChromosome> population;
    std::vector<GenerationRecord> history;
};

/// Appendix-style pick: the member maximizing 0.4 * area + 0.6 * final P_gs,
/// with objectives ordered (area, final P_gs). Ties go to the larger final P_gs.
inline MoChromosome pick_from_front(const ParetoFront& front) {
    if (front.members.empty()) throw std::invalid_argument("pick_from_front: empty front");
    const MoChromosome* best = nullptr;
    double best_score = -std::numeric_limits<double>::infinity();
    for (const auto& c : front.members) {
        if (!c.evaluated()) throw std::invalid_argument("pick_from_front: unevaluated member");
        const auto& f = *c.fitness;
        const double score = 0.4 * f[0] + 0.6 * f[1];
        if (score > best_score || (score == best_score && f[1] > (*best->fitness)[1])) {
            best = &c;
            best_score = score;
        }
    }
    return *best;
}

/// Area dominated by a set of maximized points relative to `reference`.
inline double hypervolume_2d(std::vector<Objectives> points, Objectives reference = {0.0, 0.0}) {
    std::erase_if(points, [&](const Objectives& p) { return !(p[0] > reference[0] && p[1] > reference[1]); });
    std::sort(points.begin(), points.end(), [](const Objectives& a, const Objectives& b) { return a[0] > b[0]; });
    double volume = 0.0;
    double covered = reference[1];
    for (const auto& p : points) {
        if (p[1] > covered) {
            volume += (p[0] - reference[0]) * (p[1] - covered);
            covered = p[1];
        }
    }
    return volume;
}

using VectorFitness = std::function<Objectives(std::span<const double>)>;

namespace detail {

struct RankedPopulation {
    std::vector<int> rank;
    std::vector<double> crowding;
    std::vector<std::vector<std::size_t>> fronts;
};

inline RankedPopulation rank_population(const std::vector<MoChromosome>& pop) {
    std::vector<Objectives> pts;
    pts.reserve(pop.size());
    for (const auto& c : pop) pts.push_back(*c.fitness);
    RankedPopulation r;
    r.fronts = fast_nondominated_sort(pts);
    r.rank.assign(pop.size(), 0);
    r.crowding.assign(pop.size(), 0.0);
    for (std::size_t f = 0; f < r.fronts.size(); ++f) {
        std::vector<Objectives> members;
        for (std::size_t i : r.fronts[f]) members.push_back(pts[i]);
        const auto cd = crowding_distance(members);
        for (std::size_t k = 0; k < r.fronts[f].size(); ++k) {
            r.rank[r.fronts[f][k]] = static_cast<int>(f);
            r.crowding[r.fronts[f][k]] = cd[k];
        }
    }
    return r;
}

inline bool front_is_nondominated(const std::vector<MoChromosome>& pop, const std::vector<std::size_t>& front) {
    for (std::size_t a : front) {
        for (std::size_t b : front) {
            if (dominates(*pop[a].fitness, *pop[b].fitness)) return false;
        }
    }
    return true;
}

} // namespace detail

inline MogaResult run_moga(const VectorFitness& fitness, std::size_t length, const Hyperparams& params,
                           const RunOptions& options = {}) {
    params.validate();
    if (length == 0) throw std::invalid_argument("run_moga: chromosome length must be positive");
    Rng rng(params.seed);
    detail::Stopwatch clock;
    auto fn = fitness;
    const auto n_pop = static_cast<std::size_t>(params.population);

    auto pop = initialize_population<Objectives>(length, params, rng);
    detail::evaluate_pending(pop, fn, options.workers, 0);
    auto ranked = detail::rank_population(pop);

    MogaResult result;
    auto record = [&](int generation) {
        GenerationRecord rec{generation, {}, {}, clock.seconds()};
        for (std::size_t m = 0; m < 2; ++m) {
            std::vector<double> values;
            for (const auto& c : pop) values.push_back((*c.fitness)[m]);
            rec.best.push_back(*std::max_element(values.begin(), values.end()));
            rec.median.push_back(detail::median_of(std::move(values)));
        }
        if (options.on_generation) options.on_generation(rec);
        result.history.push_back(std::move(rec));
    };
    record(0);

    std::uniform_int_distribution<std::size_t> pick(0, n_pop - 1);
    for (int g = 1; g <= params.generations; ++g) {
        // Binary tournament on (rank, crowding distance).
        std::vector<MoChromosome> offspring;
        offspring.reserve(n_pop);
        for (std::size_t t = 0; t < n_pop; ++t) {
            const std::size_t a = pick(rng);
            const std::size_t b = pick(rng);
            bool take_b = ranked.rank[b] < ranked.rank[a]
                          || (ranked.rank[b] == ranked.rank[a] && ranked.crowding[b] > ranked.crowding[a]);
            offspring.push_back(pop[take_b ? b : a]);
        }
        detail::vary(offspring, params, rng);
        detail::evaluate_pending(offspring, fn, options.workers, g);

        std::vector<MoChromosome> combined = std::move(pop);
        combined.insert(combined.end(), std::make_move_iterator(offspring.begin()),
                        std::make_move_iterator(offspring.end()));
        const auto merged = detail::rank_population(combined);
        std::vector<MoChromosome> next;
        next.reserve(n_pop);
        for (const auto& front : merged.fronts) {
            if (next.size() + front.size() <= n_pop) {
                for (std::size_t i : front) next.push_back(combined[i]);
                if (next.size() == n_pop) break;
                continue;
            }
            std::vector<std::size_t> order = front;
            std::stable_sort(order.begin(), order.end(),
                             [&](std::size_t a, std::size_t b) { return merged.crowding[a] > merged.crowding[b]; });
            for (std::size_t k = 0; next.size() < n_pop; ++k) next.push_back(combined[order[k]]);
            break;
        }
        pop = std::move(next);
        ranked = detail::rank_population(pop);
        assert(detail::front_is_nondominated(pop, ranked.fronts.front()));
        record(g);
    }

    for (std::size_t i : ranked.fronts.front()) result.front.members.push_back(pop[i]);
    result.population = std::move(pop);
    return result;
}

} // namespace qaga::ga
