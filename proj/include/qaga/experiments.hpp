#pragma once

// Binds chromosomes to annealing problems and runs repeated optimizations.
//
// Chromosome layouts:
//   schedule-only  [a_1 .. a_ka, b_1 .. b_kb]                      L = ka + kb
//   OD-only        [g_1 .. g_d]                                     L = d
//   joint          [a_1 .. a_ka, b_1 .. b_kb, e_11 .. e_kc1, .., e_kcd]
//                                                                   L = ka + kb + d kc
// OD weights multiply the fixed pace C(s) = s (1 - s) under linear A, B.

#include "qaga/dynamics.hpp"
#include "qaga/ga.hpp"
#include "qaga/parallel.hpp"
#include "qaga/schedule.hpp"
#include "qaga/spin.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <tuple>
#include <type_traits>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace qaga {

// ---------------------------------------------------------------------------
// Problem description

struct ScheduleOnly {
    int k_a{2};
    int k_b{2};
};

struct OdOnly {
    int d{3};
};

struct Joint {
    int k_a{2};
    int k_b{2};
    int k_c{3};
    int d{3};
};

using Mode = std::variant<ScheduleOnly, OdOnly, Joint>;
using Model = std::variant<PSpinModel, IsingInstance>;

enum class FitnessKind { Fidelity, MeanEnergy, MultiObjective };

struct ProblemSpec {
    Model model{PSpinModel{15, 3, 1.0}};
    Mode mode{ScheduleOnly{}};
    std::optional<double> annealing_time;  // empty: T_AD / 10 rounded to one decimal
    double gamma{1.0};
    FitnessKind fitness{FitnessKind::Fidelity};
    ga::Hyperparams ga;
    int n_samples{100};
    double amplitude_bound{10.0};  // <= 0 disables the bound
    std::optional<double> degeneracy_tol;

    [[nodiscard]] bool is_ising() const noexcept { return std::holds_alternative<IsingInstance>(model); }

    [[nodiscard]] double resolved_degeneracy_tol() const {
        return degeneracy_tol.value_or(is_ising() ? 1e-6 : 1e-9);
    }
};

inline std::size_t chromosome_length(const Mode& mode) {
    return std::visit(
        [](const auto& m) -> std::size_t {
            using M = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<M, ScheduleOnly>) {
                return static_cast<std::size_t>(m.k_a + m.k_b);
            } else if constexpr (std::is_same_v<M, OdOnly>) {
                return static_cast<std::size_t>(od_operator_count(m.d));
            } else {
                return static_cast<std::size_t>(m.k_a + m.k_b + od_operator_count(m.d) * m.k_c);
            }
        },
        mode);
}

// ---------------------------------------------------------------------------
// Decoders

namespace detail {
inline void check_length(std::span<const double> genes, std::size_t expected, const char* who) {
    if (genes.size() != expected) {
        throw std::invalid_argument(std::string(who) + ": expected " + std::to_string(expected) + " genes, got "
                                    + std::to_string(genes.size()));
    }
}

inline void check_order(int k, const char* what) {
    if (k < 1) throw std::invalid_argument(std::string(what) + " must be >= 1");
}
} // namespace detail

inline std::pair<PolynomialSchedule, PolynomialSchedule> decode_d1(std::span<const double> genes, int k_a, int k_b) {
    detail::check_order(k_a, "k_a");
    detail::check_order(k_b, "k_b");
    detail::check_length(genes, static_cast<std::size_t>(k_a + k_b), "decode_d1");
    return {PolynomialSchedule::a({genes.begin(), genes.begin() + k_a}),
            PolynomialSchedule::b({genes.begin() + k_a, genes.end()})};
}

/// OD weights for C(s) = s (1 - s) driving.
inline std::vector<double> decode_d2(std::span<const double> genes, int d) {
    detail::check_length(genes, static_cast<std::size_t>(od_operator_count(d)), "decode_d2");
    return {genes.begin(), genes.end()};
}

struct JointSchedules {
    PolynomialSchedule a;
    PolynomialSchedule b;
    std::vector<PolynomialSchedule> c;
};

inline JointSchedules decode_d3(std::span<const double> genes, int k_a, int k_b, int k_c, int d) {
    detail::check_order(k_a, "k_a");
    detail::check_order(k_b, "k_b");
    detail::check_order(k_c, "k_c");
    const int ops = od_operator_count(d);
    detail::check_length(genes, static_cast<std::size_t>(k_a + k_b + ops * k_c), "decode_d3");
    auto [a, b] = decode_d1(genes.first(static_cast<std::size_t>(k_a + k_b)), k_a, k_b);
    JointSchedules out{std::move(a), std::move(b), {}};
    auto rest = genes.subspan(static_cast<std::size_t>(k_a + k_b));
    for (int i = 0; i < ops; ++i) {
        auto block = rest.subspan(static_cast<std::size_t>(i * k_c), static_cast<std::size_t>(k_c));
        out.c.push_back(PolynomialSchedule::c_poly({block.begin(), block.end()}));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Random Ising instances

/// Ring 0-1-2-3-4-0 plus the chord 0-2: connected, five qubits, six bonds.
inline std::vector<std::pair<int, int>> default_ising_edges() {
    return {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {0, 4}, {0, 2}};
}

inline IsingInstance generate_ising_instance(int qubits, const std::vector<std::pair<int, int>>& edges,
                                             std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> coupling(-1.0, 1.0);
    IsingInstance instance{qubits, {}};
    for (const auto& [i, j] : edges) instance.bonds.push_back({i, j, coupling(rng)});
    instance.validate();
    return instance;
}

// ---------------------------------------------------------------------------
// Problem binding

struct RunMetrics {
    double fidelity{0.0};
    double area{0.0};
    double gap_min{0.0};
    double gap_min_s{0.0};
    bool crossing{false};
    double mean_energy{0.0};                 // <observable> at T
    std::optional<double> approximation_ratio;  // Ising only
    bool within_bound{true};
};

/// Precomputed operators and reference states for one ProblemSpec.
class AnnealingProblem {
public:
    explicit AnnealingProblem(ProblemSpec spec) : spec_(std::move(spec)) {
        spec_.ga.validate();
        if (!(spec_.gamma > 0.0)) throw std::invalid_argument("ProblemSpec: gamma must be positive");
        if (spec_.n_samples < 2) throw std::invalid_argument("ProblemSpec: n_samples must be >= 2");
        if (const auto* p = std::get_if<PSpinModel>(&spec_.model)) {
            const SpinSector sector(p->qubits);
            hx_ = transverse_hamiltonian(sector, spec_.gamma);
            hz_ = pspin_hamiltonian(*p, sector);
            psi0_ = collective_plus_state(sector);
            observable_ = hz_;
            observable_sign_ = -1.0;
            od_source_ = [sector](int d) { return od_basis_operators(sector, d); };
        } else {
            const auto& inst = std::get<IsingInstance>(spec_.model);
            hx_ = full_transverse_hamiltonian(inst.qubits, spec_.gamma);
            observable_ = ising_hamiltonian(inst);
            // Annealing targets the maximum of H_I, i.e. the ground state of -H_I.
            hz_ = -1.0 * observable_;
            psi0_ = full_register_plus_state(inst.qubits);
            observable_sign_ = 1.0;
            const int qubits = inst.qubits;
            od_source_ = [qubits](int d) {
                if (d != 3) throw std::invalid_argument("Ising OD driving supports d = 3 only");
                return full_register_spin_operators(qubits);
            };
            observable_max_ = observable_.matrix().diagonal().real().maxCoeff();
        }
        final_spectrum_ = eigh(hz_);
        if (const int d = od_count_requested(); d > 0) od_ops_ = od_source_(d);
        annealing_time_ = spec_.annealing_time.value_or(0.0);
        if (!spec_.annealing_time) annealing_time_ = recommended_annealing_time();
        if (!(annealing_time_ > 0.0)) throw std::invalid_argument("ProblemSpec: T must be positive");
    }

    [[nodiscard]] const ProblemSpec& spec() const noexcept { return spec_; }
    [[nodiscard]] double annealing_time() const noexcept { return annealing_time_; }
    [[nodiscard]] std::size_t chromosome_length() const { return qaga::chromosome_length(spec_.mode); }
    [[nodiscard]] const StateVector& initial_state() const noexcept { return psi0_; }
    [[nodiscard]] const HermitianOperator& target_hamiltonian() const noexcept { return hz_; }
    [[nodiscard]] const HermitianOperator& observable() const noexcept { return observable_; }

    /// Adiabatic timescale of the bare linear-schedule path.
    [[nodiscard]] double bare_adiabatic_timescale(int fine_grid = 2001) const {
        AnnealingSetup s = baseline_setup();
        return adiabatic_timescale(s, fine_grid);
    }

    /// T_AD / 10 rounded to one decimal.
    [[nodiscard]] double recommended_annealing_time() const {
        const double t = std::round(bare_adiabatic_timescale()) / 10.0;
        return t > 0.0 ? t : 0.1;
    }

    /// Linear schedules, no OD term.
    [[nodiscard]] AnnealingSetup baseline_setup() const {
        AnnealingSetup s;
        s.hx = hx_;
        s.hz = hz_;
        s.annealing_time = annealing_time_ > 0.0 ? annealing_time_ : 1.0;
        s.n_samples = spec_.n_samples;
        return s;
    }

    [[nodiscard]] AnnealingSetup setup_for(std::span<const double> genes) const {
        AnnealingSetup s = baseline_setup();
        std::visit(
            [&](const auto& m) {
                using M = std::decay_t<decltype(m)>;
                if constexpr (std::is_same_v<M, ScheduleOnly>) {
                    std::tie(s.a, s.b) = decode_d1(genes, m.k_a, m.k_b);
                } else if constexpr (std::is_same_v<M, OdOnly>) {
                    s.od_weights = decode_d2(genes, m.d);
                    s.od_ops = od_ops_;
                    s.od_schedules.assign(od_ops_.size(), PolynomialSchedule::c_fixed());
                } else {
                    auto joint = decode_d3(genes, m.k_a, m.k_b, m.k_c, m.d);
                    s.a = std::move(joint.a);
                    s.b = std::move(joint.b);
                    s.od_ops = od_ops_;
                    s.od_schedules = std::move(joint.c);
                }
            },
            spec_.mode);
        return s;
    }

    /// False when any schedule coefficient exceeds the amplitude bound on the sample grid.
    [[nodiscard]] bool within_amplitude_bound(const AnnealingSetup& setup) const {
        if (spec_.amplitude_bound <= 0.0) return true;
        const int n = setup.n_samples;
        for (int k = 0; k < n; ++k) {
            const double s = k == n - 1 ? 1.0 : static_cast<double>(k) / (n - 1);
            for (double c : setup.coefficients(s)) {
                if (!(std::abs(c) <= spec_.amplitude_bound)) return false;
            }
        }
        return true;
    }

    [[nodiscard]] double final_ground_probability(const StateVector& psi) const {
        return ground_state_probability(final_spectrum_, psi, spec_.resolved_degeneracy_tol());
    }

    /// Signed mean energy used as fitness: <H_I> for Ising, -<Hz> for p-spin.
    [[nodiscard]] double mean_energy_score(const StateVector& psi) const {
        return observable_sign_ * observable_.expectation(psi);
    }

    [[nodiscard]] std::optional<double> approximation_ratio(const StateVector& psi) const {
        if (!spec_.is_ising() || !(observable_max_ > 0.0)) return std::nullopt;
        return observable_.expectation(psi) / observable_max_;
    }

    /// Scalar GA fitness; rejected (out-of-bound) schedules score 0.
    [[nodiscard]] double scalar_fitness(std::span<const double> genes) const {
        const AnnealingSetup setup = setup_for(genes);
        if (!within_amplitude_bound(setup)) return 0.0;
        PropagationOptions opts;
        opts.record_spectrum = false;
        const auto trace = propagate(setup, psi0_, opts);
        if (spec_.fitness == FitnessKind::MeanEnergy) return mean_energy_score(trace.final_state());
        const double f = final_ground_probability(trace.final_state());
        check_unit_interval(f, "fidelity");
        return f;
    }

    /// (time-averaged P_gs, final P_gs); rejected schedules score (0, 0).
    [[nodiscard]] ga::Objectives objectives(std::span<const double> genes) const {
        const AnnealingSetup setup = setup_for(genes);
        if (!within_amplitude_bound(setup)) return {0.0, 0.0};
        PropagationOptions opts;
        opts.degeneracy_tol = spec_.resolved_degeneracy_tol();
        const auto trace = propagate(setup, psi0_, opts);
        const double area = area_fitness(trace);
        const double final_pgs = final_ground_probability(trace.final_state());
        check_unit_interval(area, "area");
        check_unit_interval(final_pgs, "fidelity");
        return {area, final_pgs};
    }

    [[nodiscard]] EvolutionTrace trace(const AnnealingSetup& setup) const {
        PropagationOptions opts;
        opts.degeneracy_tol = spec_.resolved_degeneracy_tol();
        return propagate(setup, psi0_, opts);
    }

    [[nodiscard]] RunMetrics metrics(const AnnealingSetup& setup, const EvolutionTrace& trace) const {
        RunMetrics m;
        m.within_bound = within_amplitude_bound(setup);
        m.fidelity = final_ground_probability(trace.final_state());
        m.area = area_fitness(trace);
        const auto gm = minimal_gap(trace);
        m.gap_min = gm.gap;
        m.gap_min_s = gm.s;
        m.crossing = gm.gap < kCrossingThreshold;
        m.mean_energy = observable_.expectation(trace.final_state());
        m.approximation_ratio = approximation_ratio(trace.final_state());
        return m;
    }

    [[nodiscard]] RunMetrics evaluate(std::span<const double> genes) const {
        const auto setup = setup_for(genes);
        return metrics(setup, trace(setup));
    }

private:
    static void check_unit_interval(double v, const char* what) {
        if (!(v >= -1e-9 && v <= 1.0 + 1e-9)) {
            throw std::logic_error(std::string(what) + " outside [0, 1]: " + std::to_string(v));
        }
    }

    [[nodiscard]] int od_count_requested() const {
        return std::visit(
            [](const auto& m) -> int {
                using M = std::decay_t<decltype(m)>;
                if constexpr (std::is_same_v<M, ScheduleOnly>) {
                    return 0;
                } else {
                    return m.d;
                }
            },
            spec_.mode);
    }

    static std::vector<HermitianOperator> full_register_spin_operators(int qubits) {
        // Total spins (1/2) sum_i sigma^a_i on the full register.
        const std::uint32_t dim = 1U << qubits;
        Matrix sx = Matrix::Zero(dim, dim);
        Matrix sy = Matrix::Zero(dim, dim);
        Eigen::VectorXd sz = Eigen::VectorXd::Zero(dim);
        for (std::uint32_t state = 0; state < dim; ++state) {
            for (int q = 0; q < qubits; ++q) {
                const std::uint32_t mask = 1U << (qubits - 1 - q);
                const bool down = (state & mask) != 0U;
                sx(state ^ mask, state) += 0.5;
                // sigma^y |0> = i |1>, sigma^y |1> = -i |0>
                sy(state ^ mask, state) += down ? Complex(0.0, -0.5) : Complex(0.0, 0.5);
                sz(state) += down ? -0.5 : 0.5;
            }
        }
        return {HermitianOperator(sx), HermitianOperator(sy), HermitianOperator::diagonal(sz)};
    }

    ProblemSpec spec_;
    HermitianOperator hx_;
    HermitianOperator hz_;
    HermitianOperator observable_;
    double observable_sign_{1.0};
    double observable_max_{0.0};
    StateVector psi0_;
    Spectrum final_spectrum_;
    std::function<std::vector<HermitianOperator>(int)> od_source_;
    std::vector<HermitianOperator> od_ops_;
    double annealing_time_{0.0};
};

inline std::optional<double> approximation_ratio(const AnnealingProblem& problem, std::span<const double> genes) {
    if (!problem.spec().is_ising()) throw std::invalid_argument("approximation_ratio: Ising problem required");
    const auto setup = problem.setup_for(genes);
    PropagationOptions opts;
    opts.record_spectrum = false;
    return problem.approximation_ratio(propagate(setup, problem.initial_state(), opts).final_state());
}

// ---------------------------------------------------------------------------
// Statistics

/// Type-7 (linear interpolation) sample quantile.
inline double quantile(std::vector<double> values, double q) {
    if (values.empty()) throw std::invalid_argument("quantile: empty sample");
    std::sort(values.begin(), values.end());
    const double h = (static_cast<double>(values.size()) - 1.0) * q;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

struct BoxStats {
    std::size_t count{0};
    double min{0.0};
    double q1{0.0};
    double median{0.0};
    double q3{0.0};
    double max{0.0};
};

inline BoxStats box_stats(const std::vector<double>& values) {
    if (values.empty()) return {};
    return {values.size(),
            *std::min_element(values.begin(), values.end()),
            quantile(values, 0.25),
            quantile(values, 0.5),
            quantile(values, 0.75),
            *std::max_element(values.begin(), values.end())};
}

struct Histogram {
    std::vector<double> edges;  // bins + 1 entries
    std::vector<std::size_t> counts;
};

/// Equal-width bins on [lo, hi]; the last bin is closed. Values outside are dropped.
inline Histogram histogram(const std::vector<double>& values, int bins, double lo, double hi) {
    if (bins < 1 || !(lo < hi)) throw std::invalid_argument("histogram: need bins >= 1 and lo < hi");
    Histogram h;
    for (int b = 0; b <= bins; ++b) h.edges.push_back(lo + (hi - lo) * b / bins);
    h.counts.assign(static_cast<std::size_t>(bins), 0);
    for (double v : values) {
        if (!(v >= lo && v <= hi)) continue;
        auto b = static_cast<std::size_t>(std::floor((v - lo) / (hi - lo) * bins));
        h.counts[std::min(b, static_cast<std::size_t>(bins - 1))] += 1;
    }
    return h;
}

// ---------------------------------------------------------------------------
// Runs

struct RunRecord {
    int index{0};
    std::uint64_t seed{0};
    bool ok{false};
    std::string error;
    std::vector<double> genes;
    double best_fitness{0.0};                 // GA objective (scalar runs) or pick score (MOGA)
    std::optional<ga::Objectives> objectives; // MOGA only
    std::size_t front_size{0};
    double score{0.0};                        // fidelity (p-spin) or approximation ratio (Ising)
    RunMetrics metrics;
    std::vector<std::string> schedules;       // `kind k c...` records
    std::vector<ga::GenerationRecord> history;
    double wall_seconds{0.0};
};

struct RepetitionSummary {
    std::vector<RunRecord> runs;
    std::size_t successes{0};
    std::size_t failures{0};
    BoxStats score;
    std::size_t crossings{0};
    double wall_seconds{0.0};
};

inline std::vector<std::string> schedule_records(const AnnealingSetup& setup) {
    std::vector<std::string> out{setup.a.to_record(), setup.b.to_record()};
    for (const auto& c : setup.od_schedules) out.push_back(c.to_record());
    return out;
}

inline double run_score(const AnnealingProblem& problem, const RunMetrics& m) {
    if (problem.spec().is_ising()) {
        return m.approximation_ratio.value_or(std::numeric_limits<double>::quiet_NaN());
    }
    return m.fidelity;
}

/// One GA optimization followed by a full re-simulation of the returned chromosome.
inline RunRecord run_single(const AnnealingProblem& problem, std::uint64_t seed, int index = 0,
                            const ga::RunOptions& options = {}) {
    ga::detail::Stopwatch clock;
    RunRecord rec;
    rec.index = index;
    rec.seed = seed;
    try {
        ga::Hyperparams params = problem.spec().ga;
        params.seed = seed;
        const std::size_t length = problem.chromosome_length();
        if (problem.spec().fitness == FitnessKind::MultiObjective) {
            const auto result = ga::run_moga([&](std::span<const double> g) { return problem.objectives(g); }, length,
                                             params, options);
            const auto chosen = ga::pick_from_front(result.front);
            rec.genes = chosen.genes;
            rec.objectives = *chosen.fitness;
            rec.best_fitness = 0.4 * (*chosen.fitness)[0] + 0.6 * (*chosen.fitness)[1];
            rec.front_size = result.front.members.size();
            rec.history = result.history;
        } else {
            const auto result = ga::run_soga([&](std::span<const double> g) { return problem.scalar_fitness(g); },
                                             length, params, options);
            rec.genes = result.best.genes;
            rec.best_fitness = *result.best.fitness;
            rec.history = result.history;
        }
        const auto setup = problem.setup_for(rec.genes);
        rec.metrics = problem.metrics(setup, problem.trace(setup));
        rec.schedules = schedule_records(setup);
        rec.score = run_score(problem, rec.metrics);
        rec.ok = true;
    } catch (const std::exception& e) {
        rec.ok = false;
        rec.error = e.what();
    }
    rec.wall_seconds = clock.seconds();
    return rec;
}

inline RepetitionSummary summarize(std::vector<RunRecord> runs) {
    RepetitionSummary summary;
    std::vector<double> scores;
    for (const auto& r : runs) {
        summary.wall_seconds += r.wall_seconds;
        if (!r.ok) {
            ++summary.failures;
            continue;
        }
        ++summary.successes;
        scores.push_back(r.score);
        if (r.metrics.crossing) ++summary.crossings;
    }
    summary.score = box_stats(scores);
    summary.runs = std::move(runs);
    return summary;
}

/// N_rep independent runs seeded base_seed + k, fanned out over `workers` threads.
inline RepetitionSummary run_repetitions(const AnnealingProblem& problem, int repetitions, std::uint64_t base_seed,
                                         int workers = 1,
                                         const std::function<void(const RunRecord&)>& on_run = {}) {
    if (repetitions < 1) throw std::invalid_argument("run_repetitions: need at least one repetition");
    std::vector<RunRecord> runs(static_cast<std::size_t>(repetitions));
    parallel_for(runs.size(), workers, [&](std::size_t k) {
        runs[k] = run_single(problem, base_seed + k, static_cast<int>(k));
    });
    if (on_run) {
        for (const auto& r : runs) on_run(r);
    }
    return summarize(std::move(runs));
}

} // namespace qaga
