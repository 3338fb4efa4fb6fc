#include "qaga/experiments.hpp"

#include "support/oracles.hpp"

#include <gtest/gtest.h>

#include <numeric>
#include <random>

using namespace qaga;

namespace {

ProblemSpec pspin_spec(int n, Mode mode, double T) {
    ProblemSpec spec;
    spec.model = PSpinModel{n, 3, 1.0};
    spec.mode = mode;
    spec.annealing_time = T;
    return spec;
}

ProblemSpec ising_spec(const IsingInstance& inst, double T) {
    ProblemSpec spec;
    spec.model = inst;
    spec.mode = ScheduleOnly{3, 3};
    spec.annealing_time = T;
    spec.fitness = FitnessKind::MeanEnergy;
    return spec;
}

std::vector<double> gather_genes(const AnnealingSetup& s, bool with_ab) {
    std::vector<double> out;
    if (with_ab) {
        out = s.a.coefficients();
        out.insert(out.end(), s.b.coefficients().begin(), s.b.coefficients().end());
    }
    for (const auto& c : s.od_schedules) out.insert(out.end(), c.coefficients().begin(), c.coefficients().end());
    return out;
}

} // namespace

TEST(Decode, D1Examples) {
    const std::vector<double> zero(4, 0.0);
    const auto [a, b] = decode_d1(zero, 2, 2);
    EXPECT_DOUBLE_EQ(a(0.5), 0.875);
    EXPECT_DOUBLE_EQ(b(0.5), 0.125);
    const std::vector<double> lin{-1.0, 0.0, 1.0, 0.0};
    const auto [a2, b2] = decode_d1(lin, 2, 2);
    EXPECT_EQ(a2.polynomial(), (std::vector<double>{1.0, -1.0, 0.0, 0.0}));
    for (double s : {0.1, 0.5, 0.9}) {
        EXPECT_NEAR(a2(s), 1.0 - s, 1e-15);
        EXPECT_NEAR(b2(s), s, 1e-15);
    }
    EXPECT_THROW(decode_d1(std::vector<double>(5, 0.0), 2, 2), std::invalid_argument);
}

TEST(Decode, D2LengthGuard) {
    EXPECT_EQ(decode_d2(std::vector<double>{0.0, 1.0, 0.0}, 3), (std::vector<double>{0.0, 1.0, 0.0}));
    EXPECT_THROW(decode_d2(std::vector<double>(4, 0.0), 3), std::invalid_argument);
}

TEST(Decode, D3LayoutAndBoundaries) {
    std::vector<double> genes(13);
    std::iota(genes.begin(), genes.end(), 1.0);
    const auto j = decode_d3(genes, 2, 2, 3, 3);
    ASSERT_EQ(j.c.size(), 3U);
    EXPECT_EQ(j.a.coefficients(), (std::vector<double>{1, 2}));
    EXPECT_EQ(j.b.coefficients(), (std::vector<double>{3, 4}));
    EXPECT_EQ(j.c[0].coefficients(), (std::vector<double>{5, 6, 7}));
    EXPECT_EQ(j.c[2].coefficients(), (std::vector<double>{11, 12, 13}));
    for (const auto& c : j.c) {
        EXPECT_EQ(c(0.0), 0.0);
        EXPECT_EQ(c(1.0), 0.0);
    }
    const auto z = decode_d3(std::vector<double>(13, 0.0), 2, 2, 3, 3);
    for (const auto& c : z.c) EXPECT_EQ(c(0.4), 0.0);
    EXPECT_THROW(decode_d3(std::vector<double>(12, 0.0), 2, 2, 3, 3), std::invalid_argument);
}

TEST(Decode, ChromosomeLengths) {
    EXPECT_EQ(chromosome_length(ScheduleOnly{2, 2}), 4U);
    EXPECT_EQ(chromosome_length(ScheduleOnly{3, 3}), 6U);
    EXPECT_EQ(chromosome_length(OdOnly{3}), 3U);
    EXPECT_EQ(chromosome_length(OdOnly{9}), 9U);
    EXPECT_EQ(chromosome_length(Joint{2, 2, 3, 3}), 13U);
}

TEST(Decode, RoundTripThroughSetup) {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (const Mode& mode : {Mode{ScheduleOnly{2, 3}}, Mode{OdOnly{3}}, Mode{Joint{2, 2, 3, 3}}, Mode{Joint{1, 2, 2, 9}}}) {
        const AnnealingProblem problem(pspin_spec(4, mode, 1.0));
        for (int draw = 0; draw < 20; ++draw) {
            std::vector<double> genes(problem.chromosome_length());
            for (auto& g : genes) g = u(rng);
            const auto setup = problem.setup_for(genes);
            if (std::holds_alternative<OdOnly>(mode)) {
                EXPECT_EQ(setup.od_weights, genes);
            } else {
                EXPECT_EQ(gather_genes(setup, true), genes);
            }
        }
    }
}

TEST(Problem, AutoTimeAndBaseline) {
    ProblemSpec spec = pspin_spec(15, OdOnly{3}, 1.0);
    spec.annealing_time.reset();
    const AnnealingProblem problem(spec);
    EXPECT_DOUBLE_EQ(problem.annealing_time(), 3.1);

    const double zero_od = problem.scalar_fitness(std::vector<double>{0.0, 0.0, 0.0});
    const auto base = problem.baseline_setup();
    const double linear = fidelity_fitness(base, problem.initial_state());
    EXPECT_NEAR(zero_od, linear, 1e-9);
    EXPECT_LT(linear, 0.05);
}

TEST(Problem, SyDrivingDominates) {
    const AnnealingProblem problem(pspin_spec(15, OdOnly{3}, 3.1));
    const double base = problem.scalar_fitness(std::vector<double>{0.0, 0.0, 0.0});
    double best_sy = 0.0;
    double best_other = 0.0;
    for (double w : {-4.0, -2.0, 2.0, 4.0}) {
        best_sy = std::max(best_sy, problem.scalar_fitness(std::vector<double>{0.0, w, 0.0}));
        best_other = std::max(best_other, problem.scalar_fitness(std::vector<double>{w, 0.0, 0.0}));
        best_other = std::max(best_other, problem.scalar_fitness(std::vector<double>{0.0, 0.0, w}));
    }
    EXPECT_GT(best_sy, 10.0 * base);
    EXPECT_GT(best_sy, best_other);
}

TEST(Problem, AmplitudeBoundRejectsRunawaySchedules) {
    const AnnealingProblem problem(pspin_spec(6, ScheduleOnly{2, 2}, 1.0));
    EXPECT_EQ(problem.scalar_fitness(std::vector<double>{80.0, 0.0, 0.0, 0.0}), 0.0);
    EXPECT_EQ(problem.objectives(std::vector<double>{80.0, 0.0, 0.0, 0.0}), (ga::Objectives{0.0, 0.0}));
    EXPECT_GT(problem.scalar_fitness(std::vector<double>{0.0, 0.0, 0.0, 0.0}), 0.0);
}

TEST(Problem, ObjectivesLieInUnitSquare) {
    ProblemSpec spec = pspin_spec(10, OdOnly{3}, 2.0);
    spec.fitness = FitnessKind::MultiObjective;
    const AnnealingProblem problem(spec);
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (int draw = 0; draw < 20; ++draw) {
        const auto obj = problem.objectives(std::vector<double>{u(rng), u(rng), u(rng)});
        for (double v : obj) {
            EXPECT_GE(v, 0.0);
            EXPECT_LE(v, 1.0 + 1e-9);
        }
    }
}

TEST(Problem, RejectsInvalidSpecs) {
    ProblemSpec spec = pspin_spec(5, ScheduleOnly{}, 1.0);
    spec.gamma = 0.0;
    EXPECT_THROW(AnnealingProblem{spec}, std::invalid_argument);
    spec = pspin_spec(5, ScheduleOnly{}, -1.0);
    EXPECT_THROW(AnnealingProblem{spec}, std::invalid_argument);
    ProblemSpec ising = ising_spec(generate_ising_instance(5, default_ising_edges(), 1), 5.0);
    ising.mode = OdOnly{9};
    EXPECT_THROW(AnnealingProblem{ising}, std::invalid_argument);
}

TEST(Ising, InstanceGeneration) {
    const auto a = generate_ising_instance(5, default_ising_edges(), 17);
    const auto b = generate_ising_instance(5, default_ising_edges(), 17);
    EXPECT_EQ(a, b);
    EXPECT_EQ(a.bonds.size(), 6U);
    EXPECT_NE(a, generate_ising_instance(5, default_ising_edges(), 18));

    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i < 150; ++i) {
        for (int j = i + 1; j < 150; ++j) edges.emplace_back(i, j);
    }
    const auto big = generate_ising_instance(150, edges, 5);
    ASSERT_GE(big.bonds.size(), 10000U);
    double mean = 0.0;
    for (const auto& bond : big.bonds) {
        EXPECT_GE(bond.coupling, -1.0);
        EXPECT_LE(bond.coupling, 1.0);
        mean += bond.coupling;
    }
    EXPECT_NEAR(mean / big.bonds.size(), 0.0, 0.02);
}

// The target is the ground manifold of -H_I: ferromagnetic pairs for all
// couplings -1, the two Neel states of a bipartite graph for all couplings +1.
TEST(Ising, TargetManifoldIsTwofold) {
    const std::vector<std::pair<int, int>> ring{{0, 1}, {1, 2}, {2, 3}, {0, 3}};
    for (double j : {-1.0, 1.0}) {
        IsingInstance inst{4, {}};
        for (auto [a, b] : ring) inst.bonds.push_back({a, b, j});
        const AnnealingProblem problem(ising_spec(inst, 5.0));
        const Spectrum sp = eigh(problem.target_hamiltonian());
        EXPECT_LT(sp.values(1) - sp.values(0), 1e-12);
        EXPECT_GT(sp.values(2) - sp.values(0), 0.5);
        const std::uint32_t first = j < 0 ? 0b0000 : 0b0101;
        const std::uint32_t second = j < 0 ? 0b1111 : 0b1010;
        StateVector pair = StateVector::Zero(16);
        pair(first) = pair(second) = 1.0 / std::sqrt(2.0);
        EXPECT_NEAR(problem.final_ground_probability(pair), 1.0, 1e-12);
        StateVector single = StateVector::Zero(16);
        single(first) = 1.0;
        EXPECT_NEAR(*problem.approximation_ratio(single), 1.0, 1e-14);
    }
}

TEST(Ising, ApproximationRatioBoundsAndAdiabaticLimit) {
    const auto inst = generate_ising_instance(5, default_ising_edges(), 3);
    const auto energies = oracle::ising_energies(5, inst.bonds);
    const double hi = *std::max_element(energies.begin(), energies.end());
    const double lo = *std::min_element(energies.begin(), energies.end());

    const AnnealingProblem fast(ising_spec(inst, 5.0));
    const double linear = *approximation_ratio(fast, std::vector<double>{-1, 0, 0, 1, 0, 0});
    EXPECT_GE(linear, lo / hi - 1e-12);
    EXPECT_LE(linear, 1.0 + 1e-12);

    const AnnealingProblem slow(ising_spec(inst, 200.0));
    EXPECT_GT(*approximation_ratio(slow, std::vector<double>{-1, 0, 0, 1, 0, 0}), 0.99);

    const AnnealingProblem pspin(pspin_spec(4, ScheduleOnly{3, 3}, 1.0));
    EXPECT_THROW(approximation_ratio(pspin, std::vector<double>(6, 0.0)), std::invalid_argument);
}

TEST(Statistics, QuartilesOfHandArrays) {
    const auto b = box_stats({5, 1, 4, 2, 3});
    EXPECT_EQ(b.count, 5U);
    EXPECT_DOUBLE_EQ(b.min, 1);
    EXPECT_DOUBLE_EQ(b.q1, 2);
    EXPECT_DOUBLE_EQ(b.median, 3);
    EXPECT_DOUBLE_EQ(b.q3, 4);
    EXPECT_DOUBLE_EQ(b.max, 5);
    EXPECT_DOUBLE_EQ(quantile({1, 2, 3, 4}, 0.5), 2.5);
    EXPECT_DOUBLE_EQ(quantile({1, 2, 3, 4}, 0.25), 1.75);
    EXPECT_THROW(quantile({}, 0.5), std::invalid_argument);
}

TEST(Statistics, QuartileOrderingOnRandomSamples) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int draw = 0; draw < 200; ++draw) {
        std::vector<double> v(1 + draw % 17);
        for (auto& x : v) x = u(rng);
        const auto b = box_stats(v);
        EXPECT_LE(b.min, b.q1);
        EXPECT_LE(b.q1, b.median);
        EXPECT_LE(b.median, b.q3);
        EXPECT_LE(b.q3, b.max);
    }
}

TEST(Statistics, Histogram) {
    const auto h = histogram(std::vector<double>(7, 0.42), 10, 0.0, 1.0);
    EXPECT_EQ(std::count_if(h.counts.begin(), h.counts.end(), [](std::size_t c) { return c > 0; }), 1);
    EXPECT_EQ(h.counts[4], 7U);
    const auto edge = histogram({0.0, 1.0}, 4, 0.0, 1.0);
    EXPECT_EQ(edge.counts.front(), 1U);
    EXPECT_EQ(edge.counts.back(), 1U);
    EXPECT_EQ(edge.edges.size(), 5U);
}

TEST(Repetitions, SyntheticSummary) {
    std::vector<RunRecord> runs(6);
    for (std::size_t k = 0; k < runs.size(); ++k) {
        runs[k].ok = k != 2;
        runs[k].score = 0.5;
        runs[k].metrics.crossing = k == 4;
    }
    const auto s = summarize(runs);
    EXPECT_EQ(s.successes, 5U);
    EXPECT_EQ(s.failures, 1U);
    EXPECT_EQ(s.crossings, 1U);
    EXPECT_DOUBLE_EQ(s.score.q1, 0.5);
    EXPECT_DOUBLE_EQ(s.score.median, 0.5);
    EXPECT_DOUBLE_EQ(s.score.q3, 0.5);
}

TEST(Repetitions, SingleRunMedianIsItsScore) {
    ProblemSpec spec = pspin_spec(5, OdOnly{3}, 1.0);
    spec.ga = ga::Hyperparams::od_preset();
    spec.ga.generations = 5;
    const AnnealingProblem problem(spec);
    const auto summary = run_repetitions(problem, 1, 9);
    ASSERT_EQ(summary.runs.size(), 1U);
    ASSERT_TRUE(summary.runs[0].ok) << summary.runs[0].error;
    EXPECT_EQ(summary.score.median, summary.runs[0].score);
    EXPECT_EQ(summary.runs[0].seed, 9U);
    EXPECT_EQ(summary.runs[0].history.size(), 6U);
    EXPECT_NEAR(summary.runs[0].score, summary.runs[0].best_fitness, 1e-9);
}

TEST(Repetitions, SeedsAndOrderIndependence) {
    ProblemSpec spec = pspin_spec(4, ScheduleOnly{2, 2}, 1.0);
    spec.ga.generations = 4;
    const AnnealingProblem problem(spec);
    const auto serial = run_repetitions(problem, 3, 100, 1);
    const auto threaded = run_repetitions(problem, 3, 100, 3);
    for (std::size_t k = 0; k < 3; ++k) {
        EXPECT_EQ(serial.runs[k].seed, 100U + k);
        EXPECT_EQ(serial.runs[k].genes, threaded.runs[k].genes);
        EXPECT_EQ(serial.runs[k].score, threaded.runs[k].score);
    }
    EXPECT_THROW(run_repetitions(problem, 0, 1), std::invalid_argument);
}

TEST(Problem, AutoTimeNeedsAnOpenGap) {
    ProblemSpec even = pspin_spec(4, ScheduleOnly{2, 2}, 1.0);
    even.model = PSpinModel{4, 2, 1.0};
    even.annealing_time.reset();
    EXPECT_THROW(AnnealingProblem{even}, DegenerateGapError);
    even.annealing_time = 2.0;
    EXPECT_NO_THROW(AnnealingProblem{even});
}
