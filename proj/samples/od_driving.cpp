// Short single-objective GA over the three local optimal-driving weights
// (S_x, S_y, S_z) with linear annealing schedules.

#include "qaga/experiments.hpp"

#include <cstdio>

int main(int argc, char** argv) {
    const int generations = argc > 1 ? std::atoi(argv[1]) : 100;

    qaga::ProblemSpec spec;
    spec.model = qaga::PSpinModel{15, 3, 1.0};
    spec.mode = qaga::OdOnly{3};
    spec.ga = qaga::ga::Hyperparams::od_preset();
    spec.ga.generations = generations;
    const qaga::AnnealingProblem problem(spec);

    qaga::ga::RunOptions opts;
    opts.on_generation = [](const qaga::ga::GenerationRecord& g) {
        if (g.generation % 20 == 0) std::printf("gen %4d  best %.5f  median %.5f\n", g.generation, g.best[0], g.median[0]);
    };
    const auto rec = qaga::run_single(problem, 7, 0, opts);
    if (!rec.ok) {
        std::fprintf(stderr, "run failed: %s\n", rec.error.c_str());
        return 1;
    }
    std::printf("gamma = (%.4f, %.4f, %.4f)\nfidelity %.5f, min gap %.4f\n", rec.genes[0], rec.genes[1], rec.genes[2],
                rec.metrics.fidelity, rec.metrics.gap_min);
}
