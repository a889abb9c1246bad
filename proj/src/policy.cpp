#include "deadline/policy.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace deadline {

namespace {

int argmax_save(const UtilitySpec& spec, const std::vector<double>& v_row, double theta, int x) {
    const double z = spec.zeta(theta);
    int best = 0;
    double best_val = z * spec.mu(x) + v_row[0];
    for (int y = 1; y <= x; ++y) {
        const double val = z * spec.mu(x - y) + v_row[static_cast<std::size_t>(y)];
        if (val >= best_val) {
            best_val = val;
            best = y;
        }
    }
    return best;
}

double cutoff_ratio(const ValueGrid& grid, const UtilitySpec& spec, double t, int i, int j) {
    return (grid.value(t, j) - grid.value(t, j - 1)) /
           (spec.mu(i - j + 1) - spec.mu(i - j));
}

}  // namespace

CutoffTable::CutoffTable(std::vector<double> times, int n) : times_(std::move(times)), n_(n) {
    if (n_ < 1) throw std::invalid_argument("CutoffTable: n must be >= 1");
    const std::size_t per_time = static_cast<std::size_t>(n_) * static_cast<std::size_t>(n_);
    phi_.resize(times_.size() * per_time);
    domain_start_.resize(per_time);
}

std::size_t CutoffTable::flat(int i, int j) const {
    if (i < 1 || i > n_ || j < 1 || j > i) throw std::domain_error("CutoffTable: bad (i, j)");
    return static_cast<std::size_t>(i - 1) * static_cast<std::size_t>(n_) +
           static_cast<std::size_t>(j - 1);
}

std::optional<double>& CutoffTable::at(std::size_t time_index, int i, int j) {
    return phi_[time_index * static_cast<std::size_t>(n_) * static_cast<std::size_t>(n_) + flat(i, j)];
}

const std::optional<double>& CutoffTable::at(std::size_t time_index, int i, int j) const {
    return phi_[time_index * static_cast<std::size_t>(n_) * static_cast<std::size_t>(n_) + flat(i, j)];
}

std::optional<double>& CutoffTable::domain_start(int i, int j) { return domain_start_[flat(i, j)]; }

const std::optional<double>& CutoffTable::domain_start(int i, int j) const {
    return domain_start_[flat(i, j)];
}

void CutoffTable::to_csv(std::ostream& out) const {
    out << "t,i,j,phi,defined\n";
    for (std::size_t k = 0; k < times_.size(); ++k)
        for (int i = 1; i <= n_; ++i)
            for (int j = 1; j <= i; ++j) {
                const auto& v = at(k, i, j);
                out << times_[k] << "," << i << "," << j << ",";
                if (v)
                    out << *v << ",1\n";
                else
                    out << ",0\n";
            }
}

CutoffTable cutoffs(const ValueGrid& grid, const UtilitySpec& spec) {
    const int n = grid.n();
    CutoffTable table(grid.times(), n);
    const auto& times = grid.times();
    for (std::size_t k = 0; k < times.size(); ++k)
        for (int i = 1; i <= n; ++i)
            for (int j = 1; j <= i; ++j) {
                const double r = (grid.at(k, j) - grid.at(k, j - 1)) /
                                 (spec.mu(i - j + 1) - spec.mu(i - j));
                if (r <= 1.0) table.at(k, i, j) = spec.zeta.inverse(std::max(r, 0.0));
            }

    // Locate the birth time of each cutoff: the marginal-value ratio is
    // decreasing in t, so bisect where it crosses 1.
    for (int i = 1; i <= n; ++i)
        for (int j = 1; j <= i; ++j) {
            std::size_t first = 0;
            while (first < times.size() && !table.at(first, i, j)) ++first;
            if (first == 0 || first == times.size()) continue;
            double lo = times[first - 1], hi = times[first];
            for (int it = 0; it < 60; ++it) {
                const double mid = 0.5 * (lo + hi);
                if (cutoff_ratio(grid, spec, mid, i, j) > 1.0)
                    lo = mid;
                else
                    hi = mid;
            }
            table.domain_start(i, j) = 0.5 * (lo + hi);
        }

    // Structural invariants.
    constexpr double tol = 1e-9;
    const std::size_t last = times.size() - 1;
    for (int i = 1; i <= n; ++i) {
        if (!table.at(last, i, i) || std::abs(*table.at(last, i, i)) > tol)
            throw std::runtime_error("cutoffs: phi_{i,j}(T) = 0 violated");
        for (std::size_t k = 0; k < times.size(); ++k) {
            if (!table.at(k, i, i))
                throw std::runtime_error("cutoffs: phi_{i,i} must be defined everywhere");
            for (int j = 1; j <= i; ++j) {
                const auto& v = table.at(k, i, j);
                if (!v) continue;
                if (*v < -tol || *v > 1.0 + tol)
                    throw std::runtime_error("cutoffs: phi outside [0, 1]");
                if (k > 0 && table.at(k - 1, i, j) && *table.at(k - 1, i, j) < *v - tol)
                    throw std::runtime_error("cutoffs: phi must be decreasing in t");
                if (i < n) {
                    const auto& up = table.at(k, i + 1, j);       // phi_{i+1,j}
                    const auto& diag = table.at(k, i + 1, j + 1); // phi_{i+1,j+1}
                    if (up && *up < *v - tol)
                        throw std::runtime_error("cutoffs: phi_{i,j} < phi_{i+1,j} violated");
                    if (diag && *diag > *v + tol)
                        throw std::runtime_error("cutoffs: phi_{i+1,j+1} < phi_{i,j} violated");
                }
            }
        }
    }
    return table;
}

int saving_rule(const ValueGrid& grid, const UtilitySpec& spec, double theta, double t, int x) {
    if (theta < 0.0 || theta > 1.0) throw std::domain_error("saving_rule: theta outside [0, 1]");
    if (x < 0 || x > grid.n()) throw std::domain_error("saving_rule: stock out of range");
    if (t > grid.params().deadline_T) throw std::domain_error("saving_rule: t beyond deadline");
    const auto row = grid.value_row(t);
    return argmax_save(spec, row, theta, x);
}

double misperceived_theta(const UtilitySpec& true_spec, const UtilitySpec& believed_spec,
                          double theta) {
    return believed_spec.zeta.inverse(true_spec.zeta(theta));
}

int procrastinator_policy(const UtilitySpec& true_spec, const UtilitySpec& believed_spec,
                          const ValueGrid& believed_grid, double theta, double t, int x) {
    if (!is_more_concave(true_spec, believed_spec, 1000))
        throw std::invalid_argument(
            "procrastinator_policy: believed quality component must be strictly more concave "
            "than the true one");
    return saving_rule(believed_grid, believed_spec,
                       misperceived_theta(true_spec, believed_spec, theta), t, x);
}

int lambda_misperception_policy(const UtilitySpec& spec, const ValueGrid& grid_true_lambda,
                                double kappa, double theta, double t, int x) {
    if (!(kappa > 0.0))
        throw std::invalid_argument("lambda_misperception_policy: kappa must be > 0");
    const double T = grid_true_lambda.params().deadline_T;
    const double dilated = T + kappa * (t - T);
    if (dilated < grid_true_lambda.params().t_min - 1e-12)
        throw std::domain_error("lambda_misperception_policy: dilated time below grid start");
    return saving_rule(grid_true_lambda, spec, theta, dilated, x);
}

}  // namespace deadline
