#pragma once

// Collective-spin and full-register operators for annealing problems.
//
// The collective sector holds the n + 1 states of maximum total spin
// S = n / 2, ordered by descending magnetization m = S, S - 1, ..., -S.
// Full-register operators act on 2^n computational basis states; qubit 0
// is the most significant bit and |0> is the z = +1 state.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace qaga {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using StateVector = Eigen::VectorXcd;

inline constexpr int kMaxFullRegisterQubits = 12;

class SpinSector {
public:
    explicit SpinSector(int qubits) : qubits_(qubits) {
        if (qubits < 1) {
            throw std::invalid_argument("SpinSector: qubit count must be positive");
        }
    }

    [[nodiscard]] int qubits() const noexcept { return qubits_; }
    [[nodiscard]] double spin() const noexcept { return 0.5 * qubits_; }
    [[nodiscard]] int dim() const noexcept { return qubits_ + 1; }

    /// Magnetization quantum number of basis state `index`.
    [[nodiscard]] double magnetization(int index) const noexcept { return spin() - index; }

private:
    int qubits_;
};

/// Dense complex matrix that equals its conjugate transpose.
class HermitianOperator {
public:
    static constexpr double kTolerance = 1e-12;

    HermitianOperator() = default;

    explicit HermitianOperator(Matrix entries) : entries_(std::move(entries)) {
        if (entries_.rows() != entries_.cols()) {
            throw std::invalid_argument("HermitianOperator: matrix must be square");
        }
        const double defect = (entries_ - entries_.adjoint()).cwiseAbs().maxCoeff();
        if (defect > kTolerance) {
            throw std::invalid_argument("HermitianOperator: matrix is not Hermitian (defect "
                                        + std::to_string(defect) + ")");
        }
    }

    static HermitianOperator diagonal(const Eigen::VectorXd& values) {
        HermitianOperator op;
        op.entries_ = values.cast<Complex>().asDiagonal();
        return op;
    }

    static HermitianOperator zero(int dim) {
        HermitianOperator op;
        op.entries_ = Matrix::Zero(dim, dim);
        return op;
    }

    static HermitianOperator identity(int dim) {
        HermitianOperator op;
        op.entries_ = Matrix::Identity(dim, dim);
        return op;
    }

    /// Hermitian part (A + A^dagger) / 2 of an arbitrary square matrix.
    static HermitianOperator hermitian_part(const Matrix& m) {
        HermitianOperator op;
        op.entries_ = 0.5 * (m + m.adjoint());
        return op;
    }

    [[nodiscard]] int dim() const noexcept { return static_cast<int>(entries_.rows()); }
    [[nodiscard]] const Matrix& matrix() const noexcept { return entries_; }
    [[nodiscard]] Complex operator()(int r, int c) const { return entries_(r, c); }

    [[nodiscard]] bool is_diagonal() const {
        return (entries_ - Matrix(entries_.diagonal().asDiagonal())).cwiseAbs().maxCoeff() == 0.0;
    }

    [[nodiscard]] double expectation(const StateVector& psi) const {
        return psi.dot(entries_ * psi).real();
    }

    HermitianOperator& operator+=(const HermitianOperator& rhs) {
        entries_ += rhs.entries_;
        return *this;
    }
    HermitianOperator& operator-=(const HermitianOperator& rhs) {
        entries_ -= rhs.entries_;
        return *this;
    }
    HermitianOperator& operator*=(double factor) {
        entries_ *= factor;
        return *this;
    }

    friend HermitianOperator operator+(HermitianOperator lhs, const HermitianOperator& rhs) { return lhs += rhs; }
    friend HermitianOperator operator-(HermitianOperator lhs, const HermitianOperator& rhs) { return lhs -= rhs; }
    friend HermitianOperator operator*(double factor, HermitianOperator op) { return op *= factor; }
    friend HermitianOperator operator*(HermitianOperator op, double factor) { return op *= factor; }

private:
    Matrix entries_;
};

struct SpinOperators {
    HermitianOperator x;
    HermitianOperator y;
    HermitianOperator z;

    [[nodiscard]] const HermitianOperator& operator[](int axis) const {
        switch (axis) {
        case 0: return x;
        case 1: return y;
        default: return z;
        }
    }
};

struct PSpinModel {
    int qubits{0};
    int order{3};
    double coupling{1.0};

    void validate() const {
        if (qubits < 1) throw std::invalid_argument("PSpinModel: qubit count must be positive");
        if (order < 2) throw std::invalid_argument("PSpinModel: interaction order p must be >= 2");
        if (!(coupling > 0.0)) throw std::invalid_argument("PSpinModel: coupling J must be positive");
    }
};

struct IsingBond {
    int i{0};
    int j{0};
    double coupling{0.0};

    friend bool operator==(const IsingBond&, const IsingBond&) = default;
};

struct IsingInstance {
    int qubits{0};
    std::vector<IsingBond> bonds;

    void validate() const {
        if (qubits < 1) throw std::invalid_argument("IsingInstance: qubit count must be positive");
        std::set<std::pair<int, int>> seen;
        for (const auto& b : bonds) {
            if (b.i < 0 || b.j >= qubits || b.i >= b.j) {
                throw std::invalid_argument("IsingInstance: edge (" + std::to_string(b.i) + ", "
                                            + std::to_string(b.j) + ") must satisfy 0 <= i < j < n");
            }
            if (!seen.emplace(b.i, b.j).second) {
                throw std::invalid_argument("IsingInstance: duplicate edge (" + std::to_string(b.i) + ", "
                                            + std::to_string(b.j) + ")");
            }
            if (!(b.coupling >= -1.0 && b.coupling <= 1.0)) {
                throw std::invalid_argument("IsingInstance: coupling outside [-1, 1]");
            }
        }
    }

    [[nodiscard]] std::vector<std::pair<int, int>> edges() const {
        std::vector<std::pair<int, int>> out;
        out.reserve(bonds.size());
        for (const auto& b : bonds) out.emplace_back(b.i, b.j);
        return out;
    }

    friend bool operator==(const IsingInstance&, const IsingInstance&) = default;
};

// Plain-text instance format: first line `n`, then `i j J_ij` per edge.
inline void write_ising_instance(std::ostream& os, const IsingInstance& instance) {
    std::ostringstream buf;
    buf.precision(17);
    buf << instance.qubits << '\n';
    for (const auto& b : instance.bonds) buf << b.i << ' ' << b.j << ' ' << b.coupling << '\n';
    os << buf.str();
}

inline IsingInstance read_ising_instance(std::istream& is) {
    IsingInstance instance;
    std::string line;
    int line_no = 0;
    bool have_n = false;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::istringstream ls(line);
        if (!have_n) {
            if (!(ls >> instance.qubits)) {
                throw std::invalid_argument("ising instance: line 1 must hold the qubit count");
            }
            have_n = true;
            continue;
        }
        IsingBond b;
        if (!(ls >> b.i >> b.j >> b.coupling)) {
            throw std::invalid_argument("ising instance: malformed edge on line " + std::to_string(line_no));
        }
        instance.bonds.push_back(b);
    }
    if (!have_n) throw std::invalid_argument("ising instance: empty input");
    instance.validate();
    return instance;
}

inline SpinOperators collective_spin_operators(const SpinSector& sector) {
    const int dim = sector.dim();
    const double s = sector.spin();
    Matrix raise = Matrix::Zero(dim, dim);
    Eigen::VectorXd mz(dim);
    for (int k = 0; k < dim; ++k) {
        const double m = sector.magnetization(k);
        mz(k) = m;
        // S+ |m> = sqrt(S(S+1) - m(m+1)) |m+1>, and |m+1> sits at index k - 1.
        if (k > 0) raise(k - 1, k) = std::sqrt(s * (s + 1.0) - m * (m + 1.0));
    }
    const Matrix lower = raise.adjoint();
    const Complex i_unit(0.0, 1.0);
    return SpinOperators{
        HermitianOperator(0.5 * (raise + lower)),
        HermitianOperator((raise - lower) / (2.0 * i_unit)),
        HermitianOperator::diagonal(mz),
    };
}

/// Diagonal -J n (2m / n)^p on the collective sector.
inline HermitianOperator pspin_hamiltonian(const PSpinModel& model, const SpinSector& sector) {
    model.validate();
    if (model.qubits != sector.qubits()) {
        throw std::invalid_argument("pspin_hamiltonian: model and sector qubit counts differ");
    }
    const double n = model.qubits;
    Eigen::VectorXd diag(sector.dim());
    for (int k = 0; k < sector.dim(); ++k) {
        diag(k) = -model.coupling * n * std::pow(2.0 * sector.magnetization(k) / n, model.order);
    }
    return HermitianOperator::diagonal(diag);
}

/// -Gamma * sum_i sigma^x_i restricted to the collective sector, i.e. -2 Gamma Sx.
inline HermitianOperator transverse_hamiltonian(const SpinSector& sector, double gamma) {
    if (!(gamma > 0.0)) throw std::invalid_argument("transverse_hamiltonian: gamma must be positive");
    return (-2.0 * gamma) * collective_spin_operators(sector).x;
}

/// Number of operators returned by od_basis_operators for a requested expansion.
/// The cubic block holds the ten Weyl-symmetrized monomials, so d = 21 yields 19.
inline int od_operator_count(int d) {
    switch (d) {
    case 3: return 3;
    case 9: return 9;
    case 21: return 19;
    default: throw std::invalid_argument("od_basis_operators: d must be 3, 9 or 21 (got " + std::to_string(d) + ")");
    }
}

/// Local optimal-driving operators: the three total spins, then symmetrized
/// quadratic products, then symmetrized cubic products.
inline std::vector<HermitianOperator> od_basis_operators(const SpinSector& sector, int d) {
    const int count = od_operator_count(d);
    const auto spins = collective_spin_operators(sector);
    std::vector<HermitianOperator> ops{spins.x, spins.y, spins.z};
    if (count == 3) return ops;

    const std::array<Matrix, 3> s{spins.x.matrix(), spins.y.matrix(), spins.z.matrix()};
    for (int a = 0; a < 3; ++a) {
        for (int b = a; b < 3; ++b) {
            ops.push_back(HermitianOperator::hermitian_part(0.5 * (s[a] * s[b] + s[b] * s[a])));
        }
    }
    if (count == 9) return ops;

    for (int a = 0; a < 3; ++a) {
        for (int b = a; b < 3; ++b) {
            for (int c = b; c < 3; ++c) {
                // Average over the distinct orderings of the multiset {a, b, c}.
                std::array<int, 3> idx{a, b, c};
                Matrix sum = Matrix::Zero(sector.dim(), sector.dim());
                int perms = 0;
                do {
                    sum += s[idx[0]] * s[idx[1]] * s[idx[2]];
                    ++perms;
                } while (std::next_permutation(idx.begin(), idx.end()));
                ops.push_back(HermitianOperator::hermitian_part(sum / static_cast<double>(perms)));
            }
        }
    }
    return ops;
}

namespace detail {
inline void check_register_size(int qubits, const char* who) {
    if (qubits < 1 || qubits > kMaxFullRegisterQubits) {
        throw std::invalid_argument(std::string(who) + ": qubit count must lie in [1, "
                                    + std::to_string(kMaxFullRegisterQubits) + "]");
    }
}

/// z eigenvalue (+1 for |0>, -1 for |1>) of `qubit` in basis state `state`.
inline int z_value(std::uint32_t state, int qubit, int qubits) {
    return ((state >> (qubits - 1 - qubit)) & 1U) ? -1 : 1;
}
} // namespace detail

/// Classical energy sum_<ij> (1 - J_ij z_i z_j) / 2 of one spin configuration.
inline double ising_energy(const IsingInstance& instance, std::uint32_t state) {
    double e = 0.0;
    for (const auto& b : instance.bonds) {
        e += 0.5 * (1.0 - b.coupling * detail::z_value(state, b.i, instance.qubits)
                              * detail::z_value(state, b.j, instance.qubits));
    }
    return e;
}

inline HermitianOperator ising_hamiltonian(const IsingInstance& instance) {
    detail::check_register_size(instance.qubits, "ising_hamiltonian");
    instance.validate();
    const std::uint32_t dim = 1U << instance.qubits;
    Eigen::VectorXd diag(dim);
    for (std::uint32_t state = 0; state < dim; ++state) diag(state) = ising_energy(instance, state);
    return HermitianOperator::diagonal(diag);
}

/// -gamma * sum_i sigma^x_i on the full 2^n register.
inline HermitianOperator full_transverse_hamiltonian(int qubits, double gamma) {
    detail::check_register_size(qubits, "full_transverse_hamiltonian");
    const std::uint32_t dim = 1U << qubits;
    Matrix m = Matrix::Zero(dim, dim);
    for (std::uint32_t state = 0; state < dim; ++state) {
        for (int q = 0; q < qubits; ++q) m(state ^ (1U << (qubits - 1 - q)), state) += -gamma;
    }
    return HermitianOperator(std::move(m));
}

/// Uniform superposition |+...+>, the ground state of the full transverse field.
inline StateVector full_register_plus_state(int qubits) {
    detail::check_register_size(qubits, "full_register_plus_state");
    const auto dim = static_cast<Eigen::Index>(1U << qubits);
    return StateVector::Constant(dim, Complex(1.0 / std::sqrt(static_cast<double>(dim)), 0.0));
}

/// Spin coherent state along +x in the collective sector (ground state of -Sx).
inline StateVector collective_plus_state(const SpinSector& sector) {
    const int n = sector.qubits();
    StateVector psi(sector.dim());
    // Amplitude sqrt(C(n, k)) / 2^(n/2), accumulated in log space.
    for (int k = 0; k <= n; ++k) {
        const double log_amp = 0.5 * (std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0))
                               - 0.5 * n * std::log(2.0);
        psi(k) = std::exp(log_amp);
    }
    return psi.normalized();
}

} // namespace qaga
