#include "qaga/ga.hpp"

#include "support/oracles.hpp"

#include <gtest/gtest.h>

#include <boost/math/distributions/chi_squared.hpp>

#include <algorithm>
#include <random>
#include <set>

using namespace qaga::ga;

namespace {

Chromosome make(std::vector<double> genes, std::optional<double> fitness = std::nullopt) {
    return {std::move(genes), fitness};
}

double sphere(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return -s;
}

std::vector<Objectives> random_points(std::mt19937_64& rng, std::size_t n) {
    // Coarse integer grid so ties and duplicates actually occur.
    std::uniform_int_distribution<int> u(0, 9);
    std::vector<Objectives> pts(n);
    for (auto& p : pts) p = {static_cast<double>(u(rng)), static_cast<double>(u(rng))};
    return pts;
}

std::vector<std::set<std::size_t>> as_sets(const std::vector<std::vector<std::size_t>>& fronts) {
    std::vector<std::set<std::size_t>> out;
    for (const auto& f : fronts) out.emplace_back(f.begin(), f.end());
    return out;
}

} // namespace

TEST(Hyperparams, Presets) {
    const auto s = Hyperparams::schedule_preset();
    EXPECT_EQ(s.population, 20);
    EXPECT_EQ(s.tournament_size, 6);
    EXPECT_DOUBLE_EQ(s.crossover_prob, 0.75);
    EXPECT_DOUBLE_EQ(s.mutation_prob, 0.35);
    EXPECT_DOUBLE_EQ(s.gene_mutation_prob, 0.1);
    EXPECT_DOUBLE_EQ(s.mutation_variance, 0.6);
    EXPECT_DOUBLE_EQ(s.mutation_mean, 0.0);
    EXPECT_NO_THROW(Hyperparams::od_preset().validate());
}

TEST(Hyperparams, Validation) {
    Hyperparams p;
    p.gene_min = p.gene_max = 0.0;
    EXPECT_THROW(p.validate(), std::invalid_argument);
    p = {};
    p.crossover_prob = 1.5;
    EXPECT_THROW(p.validate(), std::invalid_argument);
    p = {};
    p.tournament_size = 0;
    EXPECT_THROW(p.validate(), std::invalid_argument);
    p = {};
    p.mutation_variance = 0.0;
    EXPECT_THROW(p.validate(), std::invalid_argument);
}

TEST(Initialize, ShapeRangeAndDeterminism) {
    Hyperparams p;
    p.gene_min = -2.0;
    p.gene_max = 3.0;
    Rng r1(9);
    Rng r2(9);
    const auto a = initialize_population(4, p, r1);
    const auto b = initialize_population(4, p, r2);
    ASSERT_EQ(a.size(), 20U);
    for (std::size_t i = 0; i < a.size(); ++i) {
        ASSERT_EQ(a[i].genes.size(), 4U);
        EXPECT_EQ(a[i].genes, b[i].genes);
        EXPECT_FALSE(a[i].evaluated());
        for (double g : a[i].genes) {
            EXPECT_GE(g, -2.0);
            EXPECT_LE(g, 3.0);
        }
    }
}

TEST(Mutation, Limits) {
    Rng rng(1);
    Hyperparams p;
    p.mutation_prob = 1.0;
    p.gene_mutation_prob = 1.0;
    p.mutation_variance = 1e-30;
    const auto c = make({0.1, -0.2, 0.3}, 1.0);
    const auto tiny = gaussian_mutate(c, p, rng);
    for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(tiny.genes[i], c.genes[i], 1e-10);

    p.mutation_mean = 5.0;
    const auto shifted = gaussian_mutate(c, p, rng);
    for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(shifted.genes[i], c.genes[i] + 5.0, 1e-10);
    EXPECT_FALSE(shifted.evaluated());

    p.mutation_prob = 0.0;
    const auto same = gaussian_mutate(c, p, rng);
    EXPECT_EQ(same.genes, c.genes);
    EXPECT_TRUE(same.evaluated());
}

TEST(Mutation, SelectionRates) {
    Rng rng(3);
    Hyperparams p;
    p.mutation_prob = 0.35;
    p.gene_mutation_prob = 0.1;
    const auto c = make(std::vector<double>(10, 0.0));
    int changed_genes = 0;
    const int trials = 20000;
    for (int t = 0; t < trials; ++t) {
        const auto m = gaussian_mutate(c, p, rng);
        for (double g : m.genes) changed_genes += g != 0.0;
    }
    EXPECT_NEAR(changed_genes / (10.0 * trials), 0.035, 0.003);
}

TEST(Crossover, ExchangesSegment) {
    auto a = make({1, 2, 3, 4}, 0.5);
    auto b = make({5, 6, 7, 8}, 0.7);
    exchange_segment(a, b, 1, 3);
    EXPECT_EQ(a.genes, (std::vector<double>{1, 6, 7, 4}));
    EXPECT_EQ(b.genes, (std::vector<double>{5, 2, 3, 8}));
    EXPECT_FALSE(a.evaluated());

    auto c = make({1, 2, 3, 4}, 0.5);
    auto d = make({5, 6, 7, 8}, 0.7);
    exchange_segment(c, d, 2, 2);
    EXPECT_EQ(c.genes, (std::vector<double>{1, 2, 3, 4}));
    EXPECT_TRUE(c.evaluated());
}

TEST(Crossover, DisabledReturnsParents) {
    Rng rng(4);
    Hyperparams p;
    p.crossover_prob = 0.0;
    const auto [x, y] = two_point_crossover(make({1, 2, 3}), make({4, 5, 6}), p, rng);
    EXPECT_EQ(x.genes, (std::vector<double>{1, 2, 3}));
    EXPECT_EQ(y.genes, (std::vector<double>{4, 5, 6}));
    EXPECT_THROW(two_point_crossover(make({1, 2}), make({1}), p, rng), std::invalid_argument);
}

TEST(Crossover, ConservesGenesPerPosition) {
    Rng rng(12);
    std::uniform_int_distribution<std::size_t> len(2, 13);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Hyperparams p;
    p.crossover_prob = 1.0;
    int swapped = 0;
    for (int draw = 0; draw < 1000; ++draw) {
        const std::size_t L = len(rng);
        Chromosome a;
        Chromosome b;
        for (std::size_t i = 0; i < L; ++i) {
            a.genes.push_back(u(rng));
            b.genes.push_back(u(rng));
        }
        const auto [x, y] = two_point_crossover(a, b, p, rng);
        for (std::size_t i = 0; i < L; ++i) {
            const std::multiset<double> before{a.genes[i], b.genes[i]};
            const std::multiset<double> after{x.genes[i], y.genes[i]};
            ASSERT_EQ(before, after);
        }
        // The exchanged positions form one contiguous block that never includes the last gene.
        std::vector<std::size_t> moved;
        for (std::size_t i = 0; i < L; ++i) {
            if (x.genes[i] != a.genes[i]) moved.push_back(i);
        }
        if (!moved.empty()) {
            ++swapped;
            EXPECT_EQ(moved.back() - moved.front() + 1, moved.size());
            EXPECT_LT(moved.back(), L - 1);
        }
    }
    EXPECT_GT(swapped, 500);
}

TEST(Tournament, UnitSizeIsUniform) {
    Rng rng(2718);
    Hyperparams p;
    p.population = 10;
    p.tournament_size = 1;
    std::vector<Chromosome> pop;
    for (int i = 0; i < 10; ++i) pop.push_back(make({static_cast<double>(i)}, static_cast<double>(i * i)));
    std::vector<double> counts(10, 0.0);
    for (int round = 0; round < 1000; ++round) {
        for (const auto& c : tournament_select(pop, p, rng)) counts[static_cast<std::size_t>(c.genes[0])] += 1.0;
    }
    double chi2 = 0.0;
    for (double c : counts) chi2 += (c - 1000.0) * (c - 1000.0) / 1000.0;
    const boost::math::chi_squared dist(9.0);
    EXPECT_GT(boost::math::cdf(boost::math::complement(dist, chi2)), 0.01) << chi2;
}

TEST(Tournament, FullSizeFavoursBest) {
    Rng rng(5);
    Hyperparams p;
    p.population = 8;
    p.tournament_size = 64;
    std::vector<Chromosome> pop;
    for (int i = 0; i < 8; ++i) pop.push_back(make({static_cast<double>(i)}, i == 3 ? 10.0 : 0.0));
    for (const auto& c : tournament_select(pop, p, rng)) EXPECT_EQ(c.genes[0], 3.0);
}

TEST(Tournament, RejectsUnevaluated) {
    Rng rng(5);
    Hyperparams p;
    EXPECT_THROW(tournament_select({make({1.0})}, p, rng), std::invalid_argument);
    EXPECT_THROW(tournament_select({}, p, rng), std::invalid_argument);
}

TEST(Soga, SphereConvergesAndArchiveIsMonotone) {
    Hyperparams p;
    p.generations = 200;
    p.seed = 42;
    const auto result = run_soga(sphere, 4, p);
    EXPECT_GT(*result.best.fitness, -1e-2);
    EXPECT_NEAR(*result.best.fitness, sphere(result.best.genes), 0.0);
    ASSERT_EQ(result.history.size(), 201U);
    for (std::size_t g = 1; g < result.history.size(); ++g) {
        EXPECT_GE(result.history[g].best[0], result.history[g - 1].best[0]);
        EXPECT_EQ(result.history[g].generation, static_cast<int>(g));
    }
}

TEST(Soga, DeterministicAcrossWorkerCounts) {
    Hyperparams p;
    p.generations = 50;
    p.seed = 7;
    RunOptions serial;
    RunOptions threaded;
    threaded.workers = 4;
    const auto a = run_soga(sphere, 5, p, serial);
    const auto b = run_soga(sphere, 5, p, threaded);
    EXPECT_EQ(a.best.genes, b.best.genes);
    ASSERT_EQ(a.history.size(), b.history.size());
    for (std::size_t g = 0; g < a.history.size(); ++g) {
        EXPECT_EQ(a.history[g].best, b.history[g].best);
        EXPECT_EQ(a.history[g].median, b.history[g].median);
    }
}

TEST(Soga, CallbackFailureCarriesContext) {
    Hyperparams p;
    p.generations = 3;
    int calls = 0;
    auto bad = [&](std::span<const double>) -> double {
        if (++calls == 25) throw std::runtime_error("boom");
        return 0.0;
    };
    try {
        run_soga(bad, 2, p);
        FAIL() << "expected FitnessError";
    } catch (const FitnessError& e) {
        EXPECT_NE(std::string(e.what()).find("boom"), std::string::npos);
        EXPECT_NE(std::string(e.what()).find("generation 1"), std::string::npos);
    }
}

TEST(NondominatedSort, HandExample) {
    const std::vector<Objectives> pts{{2, 2}, {1, 1}, {0, 3}};
    const auto fronts = fast_nondominated_sort(pts);
    ASSERT_EQ(fronts.size(), 2U);
    EXPECT_EQ(std::set<std::size_t>(fronts[0].begin(), fronts[0].end()), (std::set<std::size_t>{0, 2}));
    EXPECT_EQ(fronts[1], (std::vector<std::size_t>{1}));
}

TEST(NondominatedSort, IdenticalPointsFormOneFront) {
    const std::vector<Objectives> pts(7, Objectives{0.5, 0.5});
    EXPECT_EQ(fast_nondominated_sort(pts).size(), 1U);
}

TEST(NondominatedSort, MatchesBruteForceOracle) {
    std::mt19937_64 rng(100);
    std::uniform_int_distribution<std::size_t> size(1, 60);
    for (int draw = 0; draw < 100; ++draw) {
        const auto pts = random_points(rng, draw < 50 ? 50 : size(rng));
        EXPECT_EQ(as_sets(fast_nondominated_sort(pts)), as_sets(oracle::peel_fronts(pts))) << draw;
    }
}

TEST(Crowding, Examples) {
    const std::vector<Objectives> two{{0, 1}, {1, 0}};
    for (double d : crowding_distance(two)) EXPECT_TRUE(std::isinf(d));

    const std::vector<Objectives> line{{0, 2}, {1, 1}, {2, 0}};
    const auto cd = crowding_distance(line);
    EXPECT_TRUE(std::isinf(cd[0]) && std::isinf(cd[2]));
    // Each objective contributes (2 - 0) / 2 = 1.
    EXPECT_DOUBLE_EQ(cd[1], 2.0);

    const std::vector<Objectives> flat{{1, 0}, {1, 1}, {1, 2}, {1, 3}};
    const auto f = crowding_distance(flat);
    EXPECT_DOUBLE_EQ(f[1], 2.0 / 3.0);
    EXPECT_DOUBLE_EQ(f[2], 2.0 / 3.0);
    for (double d : f) EXPECT_FALSE(std::isnan(d));

    EXPECT_THROW(crowding_distance(std::vector<Objectives>{}), std::invalid_argument);
}

TEST(Pick, Examples) {
    auto member = [](double area, double pgs) { return MoChromosome{{area}, Objectives{area, pgs}}; };
    EXPECT_EQ(pick_from_front({{member(1.0, 0.0), member(0.0, 1.0)}}).genes[0], 0.0);
    EXPECT_EQ(pick_from_front({{member(0.3, 0.2)}}).genes[0], 0.3);
    EXPECT_EQ(pick_from_front({{member(0.9, 0.9), member(1.0, 0.8)}}).genes[0], 0.9);
    EXPECT_THROW(pick_from_front({}), std::invalid_argument);
}

TEST(Hypervolume, Basics) {
    EXPECT_DOUBLE_EQ(hypervolume_2d({{1.0, 1.0}}), 1.0);
    EXPECT_DOUBLE_EQ(hypervolume_2d({{1.0, 0.5}, {0.5, 1.0}}), 0.75);
    EXPECT_DOUBLE_EQ(hypervolume_2d({{1.0, 0.5}, {0.5, 0.25}}), 0.5);
}

TEST(Moga, TradeOffSegment) {
    Hyperparams p;
    p.generations = 100;
    p.gene_min = 0.0;
    p.gene_max = 1.0;
    p.seed = 3;
    p.mutation_variance = 0.01;
    auto toy = [](std::span<const double> x) {
        const double t = std::clamp(x[0], 0.0, 1.0);
        return Objectives{t, 1.0 - t};
    };
    const auto result = run_moga(toy, 1, p);
    std::vector<Objectives> pts;
    for (const auto& m : result.front.members) pts.push_back(*m.fitness);
    // A single gene cannot be recombined, so survivors come in copies; ten
    // evenly spread distinct points give 0.5 - 1/18.
    EXPECT_GE(hypervolume_2d(pts), 0.43);
    auto distinct = pts;
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    EXPECT_GE(distinct.size(), 8U);
    EXPECT_EQ(result.population.size(), 20U);
    EXPECT_EQ(result.history.size(), 101U);
    for (std::size_t a = 0; a < pts.size(); ++a) {
        for (std::size_t b = 0; b < pts.size(); ++b) EXPECT_FALSE(dominates(pts[a], pts[b]));
    }
}

TEST(Moga, EqualObjectivesCollapseToBest) {
    Hyperparams p;
    p.generations = 60;
    p.seed = 8;
    auto equal = [](std::span<const double> x) {
        const double v = -std::abs(x[0] - 0.25);
        return Objectives{v, v};
    };
    const auto result = run_moga(equal, 1, p);
    for (const auto& m : result.front.members) {
        EXPECT_EQ((*m.fitness)[0], (*result.front.members.front().fitness)[0]);
        EXPECT_GT((*m.fitness)[0], -0.05);
    }
}

TEST(Moga, Deterministic) {
    Hyperparams p;
    p.generations = 30;
    p.seed = 11;
    auto f = [](std::span<const double> x) { return Objectives{-x[0] * x[0], -(x[1] - 1) * (x[1] - 1)}; };
    RunOptions threaded;
    threaded.workers = 3;
    const auto a = run_moga(f, 2, p);
    const auto b = run_moga(f, 2, p, threaded);
    ASSERT_EQ(a.population.size(), b.population.size());
    for (std::size_t i = 0; i < a.population.size(); ++i) EXPECT_EQ(a.population[i].genes, b.population[i].genes);
}
