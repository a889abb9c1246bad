#include "deadline/value_grid.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace deadline {

void ModelParams::validate() const {
    if (!(lambda > 0.0)) throw std::invalid_argument("params.lambda must be > 0");
    if (!(t_min < deadline_T)) throw std::invalid_argument("params.t_min must be < deadline_T");
    if (n < 1) throw std::invalid_argument("params.n must be >= 1");
    if (!(dt > 0.0)) throw std::invalid_argument("params.dt must be > 0");
    if (dt > 0.1 / lambda * (1.0 + 1e-12))
        throw std::invalid_argument("params.dt exceeds the stability guard 0.1/lambda");
    if (quad_points < 64) throw std::invalid_argument("params.quad_points must be >= 64");
}

nlohmann::json ModelParams::to_json() const {
    return {{"lambda", lambda}, {"T", deadline_T}, {"n", n},
            {"t_min", t_min},   {"dt", dt},        {"quad_points", quad_points}};
}

ModelParams ModelParams::from_json(const nlohmann::json& j) {
    ModelParams p;
    p.lambda = j.at("lambda").get<double>();
    p.deadline_T = j.at("T").get<double>();
    p.n = j.at("n").get<int>();
    p.t_min = j.at("t_min").get<double>();
    p.dt = j.at("dt").get<double>();
    p.quad_points = j.value("quad_points", 128);
    return p;
}

ValueGrid::ValueGrid(ModelParams params, std::vector<double> times,
                     std::vector<std::vector<double>> values, double worst_emax_gap)
    : params_(params),
      times_(std::move(times)),
      values_(std::move(values)),
      worst_emax_gap_(worst_emax_gap) {
    if (times_.size() != values_.size() || times_.size() < 2)
        throw std::invalid_argument("ValueGrid: times/values size mismatch");
    for (const auto& row : values_)
        if (row.size() != static_cast<std::size_t>(params_.n) + 1)
            throw std::invalid_argument("ValueGrid: row width must be n+1");
}

std::size_t ValueGrid::lower_index(double t) const {
    auto it = std::upper_bound(times_.begin(), times_.end(), t);
    if (it == times_.begin()) return 0;
    std::size_t k = static_cast<std::size_t>(it - times_.begin()) - 1;
    return std::min(k, times_.size() - 2);
}

double ValueGrid::value(double t, int i) const {
    if (i < 0 || i > params_.n) throw std::domain_error("ValueGrid: resource index out of range");
    if (t < times_.front() - 1e-12 || t > times_.back() + 1e-12)
        throw std::domain_error("ValueGrid: query time outside stored grid");
    t = std::clamp(t, times_.front(), times_.back());
    const std::size_t k = lower_index(t);
    const double w = (t - times_[k]) / (times_[k + 1] - times_[k]);
    const auto ui = static_cast<std::size_t>(i);
    return (1.0 - w) * values_[k][ui] + w * values_[k + 1][ui];
}

std::vector<double> ValueGrid::value_row(double t) const {
    std::vector<double> out(static_cast<std::size_t>(params_.n) + 1);
    for (int i = 0; i <= params_.n; ++i) out[static_cast<std::size_t>(i)] = value(t, i);
    return out;
}

void ValueGrid::validate(double mu1, bool require_zero_v0) const {
    constexpr double tol = 1e-8;
    const std::size_t last = times_.size() - 1;
    for (int i = 0; i <= params_.n; ++i)
        if (std::abs(values_[last][static_cast<std::size_t>(i)]) > tol)
            throw std::runtime_error("ValueGrid: terminal condition V(T,.) = 0 violated");
    for (std::size_t k = 0; k < times_.size(); ++k) {
        const auto& row = values_[k];
        if (require_zero_v0 && std::abs(row[0]) > tol)
            throw std::runtime_error("ValueGrid: V(t,0) = 0 violated");
        for (int i = 1; i <= params_.n; ++i) {
            const auto ui = static_cast<std::size_t>(i);
            if (k < last && !(row[ui] > -tol))
                throw std::runtime_error("ValueGrid: positivity violated");
            if (!(row[ui] - row[ui - 1] > -tol))
                throw std::runtime_error("ValueGrid: monotonicity in resources violated");
            if (i < params_.n &&
                !((row[ui] - row[ui - 1]) - (row[ui + 1] - row[ui]) > -tol))
                throw std::runtime_error("ValueGrid: discrete concavity violated");
            if (!(row[ui] < i * mu1 + tol))
                throw std::runtime_error("ValueGrid: V < x*mu(1) bound violated");
        }
        if (k > 0) {
            for (int i = 1; i <= params_.n; ++i) {
                const auto ui = static_cast<std::size_t>(i);
                if (!(values_[k - 1][ui] - values_[k][ui] > -tol))
                    throw std::runtime_error(
                        "ValueGrid: non-monotone V in t (step-size instability?)");
            }
        }
    }
}

void ValueGrid::to_csv(std::ostream& out) const {
    out << "t";
    for (int i = 0; i <= params_.n; ++i) out << ",V_" << i;
    out << "\n";
    for (std::size_t k = 0; k < times_.size(); ++k) {
        out << times_[k];
        for (int i = 0; i <= params_.n; ++i) out << "," << values_[k][static_cast<std::size_t>(i)];
        out << "\n";
    }
}

nlohmann::json ValueGrid::to_json() const {
    return {{"params", params_.to_json()},
            {"times", times_},
            {"values", values_},
            {"worst_emax_gap", worst_emax_gap_}};
}

ValueGrid ValueGrid::from_json(const nlohmann::json& j) {
    return ValueGrid(ModelParams::from_json(j.at("params")),
                     j.at("times").get<std::vector<double>>(),
                     j.at("values").get<std::vector<std::vector<double>>>(),
                     j.value("worst_emax_gap", 0.0));
}

void ValueGrid::perturb(std::size_t time_index, int i, double delta) {
    values_.at(time_index).at(static_cast<std::size_t>(i)) += delta;
}

}  // namespace deadline
