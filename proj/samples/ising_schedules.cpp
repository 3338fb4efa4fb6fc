// Schedule optimization for one random 5-qubit Ising instance, compared with
// linear schedules by approximation ratio <H_I> / max H_I.

#include "qaga/experiments.hpp"

#include <cstdio>

int main() {
    qaga::ProblemSpec spec;
    spec.model = qaga::generate_ising_instance(5, qaga::default_ising_edges(), 3);
    spec.mode = qaga::ScheduleOnly{3, 3};
    spec.annealing_time = 5.0;
    spec.fitness = qaga::FitnessKind::MeanEnergy;
    spec.ga.generations = 60;
    const qaga::AnnealingProblem problem(spec);

    for (const auto& b : std::get<qaga::IsingInstance>(spec.model).bonds) std::printf("J(%d,%d) = %+.3f\n", b.i, b.j, b.coupling);

    const auto base = problem.metrics(problem.baseline_setup(), problem.trace(problem.baseline_setup()));
    std::printf("linear schedules: ratio %.4f\n", *base.approximation_ratio);

    const auto summary = qaga::run_repetitions(problem, 5, 11);
    std::printf("optimized, 5 runs: median ratio %.4f (Q1 %.4f, Q3 %.4f)\n", summary.score.median, summary.score.q1,
                summary.score.q3);
}
