#pragma once

// Time-dependent Schrodinger propagation of
//
//   H(s) = A(s) Hx + B(s) Hz + sum_i w_i C_i(s) O_i,     s = t / T,
//
// together with the spectral diagnostics used as fitness measures.

#include "qaga/schedule.hpp"
#include "qaga/spin.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCore>
#include <boost/numeric/odeint.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace qaga {

class IntegrationError : public std::runtime_error {
public:
    IntegrationError(const std::string& what, double s, double step)
        : std::runtime_error(what + " (s = " + std::to_string(s) + ", ds = " + std::to_string(step) + ")"),
          s_(s), step_(step) {}

    [[nodiscard]] double position() const noexcept { return s_; }
    [[nodiscard]] double step() const noexcept { return step_; }

private:
    double s_;
    double step_;
};

class DegenerateGapError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Dense Hermitian eigensolver

struct Spectrum {
    Eigen::VectorXd values;  // ascending
    Matrix vectors;          // columns
};

namespace detail {
inline bool is_tridiagonal(const Matrix& m) {
    const Eigen::Index n = m.rows();
    for (Eigen::Index c = 0; c < n; ++c) {
        for (Eigen::Index r = c + 2; r < n; ++r) {
            if (m(r, c) != Complex(0.0, 0.0)) return false;
        }
    }
    return true;
}
} // namespace detail

/// Full eigendecomposition. Tridiagonal input is gauged to a real symmetric
/// Jacobi matrix first, which covers every collective-sector Hamiltonian built
/// from linear spin terms.
inline Spectrum eigh(const HermitianOperator& op) {
    const Matrix& h = op.matrix();
    const Eigen::Index n = h.rows();
    if (n > 2 && detail::is_tridiagonal(h)) {
        Eigen::VectorXd diag = h.diagonal().real();
        Eigen::VectorXd sub(n - 1);
        Eigen::VectorXcd phase(n);
        phase(0) = 1.0;
        for (Eigen::Index k = 0; k + 1 < n; ++k) {
            const Complex off = h(k + 1, k);
            const double r = std::abs(off);
            sub(k) = r;
            phase(k + 1) = r > 0.0 ? phase(k) * (off / r) : phase(k);
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
        solver.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
        if (solver.info() != Eigen::Success) throw std::runtime_error("eigh: tridiagonal QL failed");
        return {solver.eigenvalues(), phase.asDiagonal() * solver.eigenvectors().cast<Complex>()};
    }
    Eigen::SelfAdjointEigenSolver<Matrix> solver(h);
    if (solver.info() != Eigen::Success) throw std::runtime_error("eigh: eigensolver failed");
    return {solver.eigenvalues(), solver.eigenvectors()};
}

namespace detail {

struct LowSpectrum {
    double e0;
    double e1;
    double pgs;
};

/// Solves (T - shift) x = rhs for a real symmetric tridiagonal T that stays
/// positive definite after the shift, by LDL^T elimination.
inline Eigen::VectorXd solve_shifted_tridiagonal(const Eigen::VectorXd& diag, const Eigen::VectorXd& sub,
                                                 double shift, Eigen::VectorXd rhs) {
    const Eigen::Index n = diag.size();
    Eigen::VectorXd d(n);
    Eigen::VectorXd l(n > 1 ? n - 1 : 0);
    d(0) = diag(0) - shift;
    for (Eigen::Index k = 1; k < n; ++k) {
        l(k - 1) = sub(k - 1) / d(k - 1);
        d(k) = diag(k) - shift - l(k - 1) * sub(k - 1);
    }
    for (Eigen::Index k = 1; k < n; ++k) rhs(k) -= l(k - 1) * rhs(k - 1);
    rhs(n - 1) /= d(n - 1);
    for (Eigen::Index k = n - 2; k >= 0; --k) rhs(k) = rhs(k) / d(k) - l(k) * rhs(k + 1);
    return rhs;
}

} // namespace detail

/// Lowest two eigenvalues and the ground-manifold weight of psi. Unreduced
/// tridiagonal matrices with a resolved lowest gap take an eigenvalue-only QL
/// pass plus inverse iteration; everything else goes through eigh.
inline detail::LowSpectrum low_spectrum(const HermitianOperator& op, const StateVector& psi, double degeneracy_tol) {
    const Matrix& h = op.matrix();
    const Eigen::Index n = h.rows();
    auto full = [&] {
        const Spectrum sp = eigh(op);
        double pgs = 0.0;
        for (Eigen::Index k = 0; k < n && sp.values(k) - sp.values(0) < degeneracy_tol; ++k) {
            pgs += std::norm(sp.vectors.col(k).dot(psi));
        }
        return detail::LowSpectrum{sp.values(0), n > 1 ? sp.values(1) : sp.values(0), pgs};
    };
    if (n <= 2 || !detail::is_tridiagonal(h)) return full();

    Eigen::VectorXd diag = h.diagonal().real();
    Eigen::VectorXd sub(n - 1);
    Eigen::VectorXcd phase(n);
    phase(0) = 1.0;
    for (Eigen::Index k = 0; k + 1 < n; ++k) {
        const Complex off = h(k + 1, k);
        const double r = std::abs(off);
        if (r == 0.0) return full();
        sub(k) = r;
        phase(k + 1) = phase(k) * (off / r);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    solver.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) return full();
    const double e0 = solver.eigenvalues()(0);
    const double e1 = solver.eigenvalues()(1);
    const double gap = e1 - e0;
    if (gap < degeneracy_tol) return full();

    const double scale = diag.cwiseAbs().maxCoeff() + 2.0 * sub.maxCoeff();
    const double shift = e0 - std::max(1e-9 * gap, 64.0 * std::numeric_limits<double>::epsilon() * scale);
    Eigen::VectorXd v = Eigen::VectorXd::Ones(n);
    for (int it = 0; it < 3; ++it) {
        v = detail::solve_shifted_tridiagonal(diag, sub, shift, v);
        v.normalize();
    }
    if (!v.allFinite()) return full();
    const StateVector ground = phase.cwiseProduct(v.cast<Complex>());
    return {e0, e1, std::norm(ground.dot(psi))};
}

// ---------------------------------------------------------------------------
// Setup

struct AnnealingSetup {
    HermitianOperator hx;
    HermitianOperator hz;
    std::vector<HermitianOperator> od_ops;
    PolynomialSchedule a = linear_schedules().first;
    PolynomialSchedule b = linear_schedules().second;
    std::vector<PolynomialSchedule> od_schedules;
    std::vector<double> od_weights;  // empty means all ones
    double annealing_time{1.0};
    int n_samples{100};

    void validate() const {
        const int dim = hx.dim();
        if (dim == 0 || hz.dim() != dim) throw std::invalid_argument("AnnealingSetup: Hx and Hz dimensions differ");
        for (const auto& op : od_ops) {
            if (op.dim() != dim) throw std::invalid_argument("AnnealingSetup: OD operator dimension mismatch");
        }
        if (od_schedules.size() != od_ops.size()) {
            throw std::invalid_argument("AnnealingSetup: one OD schedule per OD operator required");
        }
        if (!od_weights.empty() && od_weights.size() != od_ops.size()) {
            throw std::invalid_argument("AnnealingSetup: OD weight count mismatch");
        }
        if (!(annealing_time > 0.0)) throw std::invalid_argument("AnnealingSetup: T must be positive");
        if (n_samples < 2) throw std::invalid_argument("AnnealingSetup: need at least two samples");
    }

    [[nodiscard]] int dim() const noexcept { return hx.dim(); }

    [[nodiscard]] double od_weight(std::size_t i) const { return od_weights.empty() ? 1.0 : od_weights[i]; }

    /// Coefficients (A, B, w_1 C_1, ..., w_d C_d) at s.
    [[nodiscard]] std::vector<double> coefficients(double s) const {
        std::vector<double> c;
        coefficients(s, c);
        return c;
    }

    /// Same as above, reusing the caller's buffer.
    void coefficients(double s, std::vector<double>& out) const {
        out.resize(term_count());
        out[0] = a(s);
        out[1] = b(s);
        for (std::size_t i = 0; i < od_ops.size(); ++i) out[i + 2] = od_weight(i) * od_schedules[i](s);
    }

    [[nodiscard]] std::vector<double> coefficient_derivatives(double s) const {
        std::vector<double> c{a.derivative(s), b.derivative(s)};
        for (std::size_t i = 0; i < od_ops.size(); ++i) c.push_back(od_weight(i) * od_schedules[i].derivative(s));
        return c;
    }

    [[nodiscard]] const HermitianOperator& term(std::size_t k) const {
        if (k == 0) return hx;
        if (k == 1) return hz;
        return od_ops[k - 2];
    }

    [[nodiscard]] std::size_t term_count() const noexcept { return 2 + od_ops.size(); }
};

namespace detail {
inline HermitianOperator combine(const AnnealingSetup& setup, const std::vector<double>& coeffs) {
    HermitianOperator h = HermitianOperator::zero(setup.dim());
    for (std::size_t k = 0; k < coeffs.size(); ++k) {
        if (coeffs[k] != 0.0) h += coeffs[k] * setup.term(k);
    }
    return h;
}
} // namespace detail

inline HermitianOperator assemble_hamiltonian(const AnnealingSetup& setup, double s) {
    return detail::combine(setup, setup.coefficients(s));
}

/// dH/ds from analytic schedule derivatives.
inline HermitianOperator hamiltonian_derivative(const AnnealingSetup& setup, double s) {
    return detail::combine(setup, setup.coefficient_derivatives(s));
}

// ---------------------------------------------------------------------------
// Ground-state measures

/// Total weight of psi on the eigenvectors with E_k - E_0 < degeneracy_tol.
inline double ground_state_probability(const Spectrum& spectrum, const StateVector& psi, double degeneracy_tol) {
    const double e0 = spectrum.values(0);
    double p = 0.0;
    for (Eigen::Index k = 0; k < spectrum.values.size(); ++k) {
        if (spectrum.values(k) - e0 >= degeneracy_tol) break;
        p += std::norm(spectrum.vectors.col(k).dot(psi));
    }
    return p;
}

inline double ground_state_probability(const HermitianOperator& h, const StateVector& psi, double degeneracy_tol) {
    if (h.dim() != psi.size()) throw std::invalid_argument("ground_state_probability: dimension mismatch");
    return ground_state_probability(eigh(h), psi, degeneracy_tol);
}

// ---------------------------------------------------------------------------
// Propagation

struct PropagationOptions {
    double rel_tol{1e-9};
    double abs_tol{1e-11};
    double min_rel_tol{1e-13};
    bool record_spectrum{true};
    double degeneracy_tol{1e-9};
    long max_steps{5'000'000};
    double norm_tol{1e-8};
};

struct EvolutionTrace {
    std::vector<double> s_grid;
    std::vector<StateVector> psi;
    std::vector<std::vector<double>> schedule_values;  // A, B, w_i C_i
    // Filled when spectra are recorded.
    std::vector<double> e0;
    std::vector<double> e1;
    std::vector<double> gap;
    std::vector<double> pgs;

    [[nodiscard]] bool has_spectrum() const noexcept { return !pgs.empty(); }
    [[nodiscard]] const StateVector& final_state() const { return psi.back(); }
};

namespace detail {

using SparseOp = Eigen::SparseMatrix<Complex, Eigen::RowMajor>;
using OdeState = std::vector<Complex>;

/// dpsi/ds = -i T H(s) psi. All terms share one sparse pattern (the union of
/// their nonzeros), so each call is a single weighted sum plus one product.
class SchrodingerRhs {
public:
    explicit SchrodingerRhs(const AnnealingSetup& setup) : setup_(&setup) {
        const Eigen::Index dim = setup.dim();
        std::vector<Eigen::Triplet<Complex>> entries;
        for (Eigen::Index r = 0; r < dim; ++r) {
            for (Eigen::Index c = 0; c < dim; ++c) {
                for (std::size_t k = 0; k < setup.term_count(); ++k) {
                    if (setup.term(k).matrix()(r, c) != Complex(0.0, 0.0)) {
                        entries.emplace_back(r, c, Complex(1.0, 0.0));
                        break;
                    }
                }
            }
        }
        combined_.resize(dim, dim);
        combined_.setFromTriplets(entries.begin(), entries.end());
        combined_.makeCompressed();
        const auto nnz = static_cast<Eigen::Index>(combined_.nonZeros());
        term_values_.assign(setup.term_count(), Eigen::VectorXcd(nnz));
        for (std::size_t k = 0; k < setup.term_count(); ++k) {
            const Matrix& m = setup.term(k).matrix();
            Eigen::Index idx = 0;
            for (Eigen::Index r = 0; r < dim; ++r) {
                for (SparseOp::InnerIterator it(combined_, r); it; ++it) term_values_[k](idx++) = m(r, it.col());
            }
        }
    }

    void operator()(const OdeState& x, OdeState& dxds, double s) {
        const Eigen::Index n = static_cast<Eigen::Index>(x.size());
        Eigen::Map<const StateVector> psi(x.data(), n);
        Eigen::Map<StateVector> out(dxds.data(), n);
        setup_->coefficients(std::clamp(s, 0.0, 1.0), coeffs_);
        Eigen::Map<Eigen::VectorXcd> values(combined_.valuePtr(), combined_.nonZeros());
        values.setZero();
        for (std::size_t k = 0; k < term_values_.size(); ++k) {
            if (coeffs_[k] != 0.0) values += coeffs_[k] * term_values_[k];
        }
        out.noalias() = combined_ * psi;
        out *= Complex(0.0, -setup_->annealing_time);
    }

private:
    const AnnealingSetup* setup_;
    SparseOp combined_;
    std::vector<Eigen::VectorXcd> term_values_;
    std::vector<double> coeffs_;
};

} // namespace detail

namespace detail {

inline std::vector<double> sample_grid(int n) {
    std::vector<double> grid(n);
    for (int k = 0; k < n; ++k) grid[k] = k == n - 1 ? 1.0 : static_cast<double>(k) / (n - 1);
    return grid;
}

/// One adaptive pass at fixed tolerances. Returns the states at the sample
/// points and the largest norm defect seen.
inline std::pair<std::vector<StateVector>, double> integrate_samples(const AnnealingSetup& setup,
                                                                     const StateVector& psi0,
                                                                     const std::vector<double>& grid,
                                                                     double rel_tol, double abs_tol, long max_steps) {
    namespace odeint = boost::numeric::odeint;
    SchrodingerRhs rhs(setup);
    auto stepper = odeint::make_controlled(abs_tol, rel_tol, odeint::runge_kutta_fehlberg78<OdeState>());
    OdeState x(psi0.data(), psi0.data() + psi0.size());
    const auto n = static_cast<Eigen::Index>(x.size());

    std::vector<StateVector> states;
    states.reserve(grid.size());
    states.push_back(psi0);
    double defect = std::abs(psi0.norm() - 1.0);

    double s = 0.0;
    const double scale = setup.annealing_time
                         * (1.0 + setup.hx.matrix().cwiseAbs().maxCoeff() + setup.hz.matrix().cwiseAbs().maxCoeff());
    double ds = std::min(grid.size() > 1 ? grid[1] : 1.0, 0.5 / scale);
    long steps = 0;
    for (std::size_t k = 1; k < grid.size(); ++k) {
        const double target = grid[k];
        while (s < target) {
            const bool last = s + ds >= target;
            double trial = last ? target - s : ds;
            const double before = trial;
            if (++steps > max_steps) throw IntegrationError("propagate: step budget exhausted", s, trial);
            const auto result = stepper.try_step(std::ref(rhs), x, s, trial);
            if (result == odeint::success) {
                if (last) s = target;  // land exactly on the sample point
                if (!last || trial > ds) ds = trial;
            } else {
                if (!std::isfinite(trial) || !(trial > 1e-15 * std::max(1.0, s))) {
                    throw IntegrationError("propagate: step size underflow", s, before);
                }
                ds = trial;
            }
        }
        states.emplace_back(Eigen::Map<const StateVector>(x.data(), n));
        defect = std::max(defect, std::abs(states.back().norm() - 1.0));
    }
    return {std::move(states), defect};
}

} // namespace detail

/// Integrates i dpsi/dt = H(t) psi over [0, T] with an adaptive Runge-Kutta-
/// Fehlberg 7(8) stepper, recording the state at n_samples evenly spaced s.
/// When the norm defect exceeds `norm_tol` the pass is repeated with tolerances
/// tightened tenfold, down to `min_rel_tol`.
inline EvolutionTrace propagate(const AnnealingSetup& setup, const StateVector& psi0,
                                const PropagationOptions& options = {}) {
    setup.validate();
    if (psi0.size() != setup.dim()) throw std::invalid_argument("propagate: psi0 dimension mismatch");
    if (std::abs(psi0.norm() - 1.0) > options.norm_tol) throw std::invalid_argument("propagate: psi0 is not normalized");

    EvolutionTrace trace;
    trace.s_grid = detail::sample_grid(setup.n_samples);

    double rel_tol = options.rel_tol;
    double abs_tol = options.abs_tol;
    for (;;) {
        auto [states, defect] =
            detail::integrate_samples(setup, psi0, trace.s_grid, rel_tol, abs_tol, options.max_steps);
        if (defect <= options.norm_tol) {
            trace.psi = std::move(states);
            break;
        }
        if (rel_tol / 10.0 < options.min_rel_tol) {
            throw IntegrationError("propagate: norm drifted by " + std::to_string(defect)
                                       + " at the tightest tolerance",
                                   1.0, 0.0);
        }
        rel_tol /= 10.0;
        abs_tol /= 10.0;
    }

    for (std::size_t k = 0; k < trace.s_grid.size(); ++k) {
        const double s = trace.s_grid[k];
        trace.schedule_values.push_back(setup.coefficients(s));
        if (options.record_spectrum) {
            const auto low = low_spectrum(assemble_hamiltonian(setup, s), trace.psi[k], options.degeneracy_tol);
            trace.e0.push_back(low.e0);
            trace.e1.push_back(low.e1);
            trace.gap.push_back(std::max(0.0, low.e1 - low.e0));
            trace.pgs.push_back(low.pgs);
        }
    }
    return trace;
}

// ---------------------------------------------------------------------------
// Fitness measures

/// P_gs of the final state against the ground manifold of H(1).
inline double fidelity_fitness(const AnnealingSetup& setup, const StateVector& psi0, double degeneracy_tol = 1e-9,
                               PropagationOptions options = {}) {
    options.record_spectrum = false;
    const auto trace = propagate(setup, psi0, options);
    return ground_state_probability(assemble_hamiltonian(setup, 1.0), trace.final_state(), degeneracy_tol);
}

inline double mean_energy_fitness(const AnnealingSetup& setup, const StateVector& psi0,
                                  const HermitianOperator& observable, PropagationOptions options = {}) {
    if (observable.dim() != setup.dim()) throw std::invalid_argument("mean_energy_fitness: dimension mismatch");
    options.record_spectrum = false;
    const auto trace = propagate(setup, psi0, options);
    return observable.expectation(trace.final_state());
}

/// Trapezoidal mean of P_gs over dimensionless time.
inline double area_fitness(const EvolutionTrace& trace) {
    if (!trace.has_spectrum() || trace.pgs.size() != trace.s_grid.size() || trace.s_grid.size() < 2) {
        throw std::invalid_argument("area_fitness: trace has no ground-state probabilities");
    }
    double area = 0.0;
    for (std::size_t k = 1; k < trace.s_grid.size(); ++k) {
        area += 0.5 * (trace.pgs[k] + trace.pgs[k - 1]) * (trace.s_grid[k] - trace.s_grid[k - 1]);
    }
    return area / (trace.s_grid.back() - trace.s_grid.front());
}

struct GapMinimum {
    double gap;
    double s;
};

inline constexpr double kCrossingThreshold = 1e-6;

inline GapMinimum minimal_gap(const EvolutionTrace& trace) {
    if (trace.gap.empty()) throw std::invalid_argument("minimal_gap: trace has no spectrum");
    const auto it = std::min_element(trace.gap.begin(), trace.gap.end());
    return {*it, trace.s_grid[static_cast<std::size_t>(it - trace.gap.begin())]};
}

inline bool has_level_crossing(const EvolutionTrace& trace, double threshold = kCrossingThreshold) {
    return minimal_gap(trace).gap < threshold;
}

/// Ratio |<e0| dH/ds |e1>| / (e1 - e0)^2 at one point of the path.
inline double adiabatic_ratio(const AnnealingSetup& setup, double s) {
    const Spectrum sp = eigh(assemble_hamiltonian(setup, s));
    if (sp.values.size() < 2) throw DegenerateGapError("adiabatic_timescale: one-dimensional Hilbert space");
    const double gap = sp.values(1) - sp.values(0);
    if (gap < 1e-12) {
        throw DegenerateGapError("adiabatic_timescale: lowest gap closes at s = " + std::to_string(s));
    }
    const HermitianOperator dh = hamiltonian_derivative(setup, s);
    const Complex element = sp.vectors.col(0).dot(dh.matrix() * sp.vectors.col(1));
    return std::abs(element) / (gap * gap);
}

/// Adiabatic timescale maximized over a uniform grid of `fine_grid` points in s.
inline double adiabatic_timescale(const AnnealingSetup& setup, int fine_grid = 2001) {
    setup.validate();
    if (fine_grid < 2) throw std::invalid_argument("adiabatic_timescale: fine grid needs >= 2 points");
    double best = 0.0;
    for (int k = 0; k < fine_grid; ++k) {
        const double s = k == fine_grid - 1 ? 1.0 : static_cast<double>(k) / (fine_grid - 1);
        best = std::max(best, adiabatic_ratio(setup, s));
    }
    return best;
}

/// Columnar table: s E0 E1 gap pgs A B C_1 ... C_d.
inline void write_trace_table(std::ostream& os, const EvolutionTrace& trace, const std::string& provenance = {}) {
    if (!trace.has_spectrum()) throw std::invalid_argument("write_trace_table: trace has no spectrum");
    std::ostringstream buf;
    if (!provenance.empty()) buf << "# " << provenance << '\n';
    const std::size_t od = trace.schedule_values.front().size() - 2;
    buf << "s\tE0\tE1\tgap\tpgs\tA\tB";
    for (std::size_t i = 1; i <= od; ++i) buf << "\tC_" << i;
    buf << '\n' << std::setprecision(12);
    for (std::size_t k = 0; k < trace.s_grid.size(); ++k) {
        buf << trace.s_grid[k] << '\t' << trace.e0[k] << '\t' << trace.e1[k] << '\t' << trace.gap[k] << '\t'
            << trace.pgs[k];
        for (double v : trace.schedule_values[k]) buf << '\t' << v;
        buf << '\n';
    }
    os << buf.str();
}

} // namespace qaga
