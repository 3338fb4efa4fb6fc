#pragma once

// Polynomial annealing schedules on dimensionless time s = t / T.
//
//   A(s) = 1 + sum_i a_i s^i + (-1 - sum_i a_i) s^(k+1)     A(0) = 1, A(1) = 0
//   B(s) =     sum_j b_j s^j + ( 1 - sum_j b_j) s^(k+1)     B(0) = 0, B(1) = 1
//   C_i(s) =   sum_j e_j s^j + (   - sum_j e_j) s^(k+1)     C(0) = 0, C(1) = 0
//   C_fixed(s) = s (1 - s)

#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace qaga {

enum class ScheduleKind { A, B, CFixed, CPoly };

inline const char* to_string(ScheduleKind kind) {
    switch (kind) {
    case ScheduleKind::A: return "A";
    case ScheduleKind::B: return "B";
    case ScheduleKind::CFixed: return "C_fixed";
    case ScheduleKind::CPoly: return "C_i";
    }
    return "?";
}

inline ScheduleKind schedule_kind_from_string(const std::string& s) {
    if (s == "A") return ScheduleKind::A;
    if (s == "B") return ScheduleKind::B;
    if (s == "C_fixed") return ScheduleKind::CFixed;
    if (s == "C_i") return ScheduleKind::CPoly;
    throw std::invalid_argument("unknown schedule kind '" + s + "'");
}

class PolynomialSchedule {
public:
    PolynomialSchedule() : PolynomialSchedule(ScheduleKind::CFixed, {}) {}

    PolynomialSchedule(ScheduleKind kind, std::vector<double> free_coeffs)
        : kind_(kind), free_(std::move(free_coeffs)) {
        if (kind_ == ScheduleKind::CFixed) {
            if (!free_.empty()) throw std::invalid_argument("C_fixed schedule takes no coefficients");
            poly_ = {0.0, 1.0, -1.0};
        } else {
            if (free_.empty()) throw std::invalid_argument("polynomial schedule needs at least one coefficient");
            const double sum = std::accumulate(free_.begin(), free_.end(), 0.0);
            poly_.assign(free_.size() + 2, 0.0);
            poly_[0] = start_value();
            for (std::size_t i = 0; i < free_.size(); ++i) poly_[i + 1] = free_[i];
            poly_.back() = end_value() - start_value() - sum;
        }
    }

    static PolynomialSchedule a(std::vector<double> alpha) { return {ScheduleKind::A, std::move(alpha)}; }
    static PolynomialSchedule b(std::vector<double> beta) { return {ScheduleKind::B, std::move(beta)}; }
    static PolynomialSchedule c_fixed() { return {ScheduleKind::CFixed, {}}; }
    static PolynomialSchedule c_poly(std::vector<double> eps) { return {ScheduleKind::CPoly, std::move(eps)}; }

    [[nodiscard]] ScheduleKind kind() const noexcept { return kind_; }
    [[nodiscard]] std::size_t order() const noexcept { return free_.size(); }
    [[nodiscard]] const std::vector<double>& coefficients() const noexcept { return free_; }

    /// Full monomial coefficients c_0 ... c_(k+1), closure term included.
    [[nodiscard]] const std::vector<double>& polynomial() const noexcept { return poly_; }

    [[nodiscard]] double start_value() const noexcept { return kind_ == ScheduleKind::A ? 1.0 : 0.0; }
    [[nodiscard]] double end_value() const noexcept { return kind_ == ScheduleKind::B ? 1.0 : 0.0; }

    [[nodiscard]] double operator()(double s) const {
        check_range(s);
        // Endpoints are pinned; the closure sum is exact only in real arithmetic.
        if (s == 0.0) return start_value();
        if (s == 1.0) return end_value();
        double v = 0.0;
        for (auto it = poly_.rbegin(); it != poly_.rend(); ++it) v = v * s + *it;
        return v;
    }

    [[nodiscard]] double derivative(double s) const {
        check_range(s);
        double v = 0.0;
        for (std::size_t i = poly_.size() - 1; i >= 1; --i) v = v * s + static_cast<double>(i) * poly_[i];
        return v;
    }

    /// `kind k c1 ... ck` record.
    [[nodiscard]] std::string to_record() const {
        std::ostringstream os;
        os.precision(17);
        os << to_string(kind_) << ' ' << free_.size();
        for (double c : free_) os << ' ' << c;
        return os.str();
    }

    static PolynomialSchedule from_record(const std::string& record) {
        std::istringstream is(record);
        std::string kind;
        std::size_t k = 0;
        if (!(is >> kind >> k)) throw std::invalid_argument("malformed schedule record '" + record + "'");
        std::vector<double> coeffs(k);
        for (auto& c : coeffs) {
            if (!(is >> c)) throw std::invalid_argument("schedule record '" + record + "' is missing coefficients");
        }
        return {schedule_kind_from_string(kind), std::move(coeffs)};
    }

private:
    static void check_range(double s) {
        if (!(s >= 0.0 && s <= 1.0)) {
            throw std::domain_error("schedule evaluated outside [0, 1] at s = " + std::to_string(s));
        }
    }

    ScheduleKind kind_;
    std::vector<double> free_;
    std::vector<double> poly_;
};

/// A(s) = 1 - s and B(s) = s as single-coefficient ansatze.
inline std::pair<PolynomialSchedule, PolynomialSchedule> linear_schedules() {
    return {PolynomialSchedule::a({-1.0}), PolynomialSchedule::b({1.0})};
}

} // namespace qaga
