// Adiabatic timescale and the linear-schedule baseline of the 15-spin,
// p = 3 ferromagnet.

#include "qaga/experiments.hpp"

#include <cstdio>

int main() {
    qaga::ProblemSpec spec;
    spec.model = qaga::PSpinModel{15, 3, 1.0};
    spec.mode = qaga::OdOnly{3};
    const qaga::AnnealingProblem problem(spec);

    std::printf("T_AD = %.3f, annealing time T = %.1f\n", problem.bare_adiabatic_timescale(),
                problem.annealing_time());

    const auto setup = problem.baseline_setup();
    const auto trace = problem.trace(setup);
    const auto m = problem.metrics(setup, trace);
    std::printf("linear schedules: fidelity %.4f, minimum gap %.4f at s = %.2f\n", m.fidelity, m.gap_min,
                m.gap_min_s);

    // A pure S_y drive already does much better.
    const std::vector<double> sy{0.0, -4.0, 0.0};
    std::printf("C(s) = s(1-s), gamma = (0, -4, 0): fidelity %.4f\n", problem.evaluate(sy).fidelity);
}
