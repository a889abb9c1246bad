#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

#include "deadline/utility.hpp"
#include "deadline/value_grid.hpp"

namespace deadline {

/// Cutoff curves phi_{i,j}(t): the largest quality at which an agent
/// holding i units saves exactly j of them. Entries are absent where the
/// marginal unit is never spent (the cutoff formula's argument exceeds 1).
class CutoffTable {
public:
    CutoffTable() = default;
    CutoffTable(std::vector<double> times, int n);

    int n() const { return n_; }
    const std::vector<double>& times() const { return times_; }

    std::optional<double>& at(std::size_t time_index, int i, int j);
    const std::optional<double>& at(std::size_t time_index, int i, int j) const;

    /// Earliest time phi_{i,j} is defined (its inverse at 1), when that
    /// time falls inside the grid; absent if the cutoff is defined from the
    /// grid start.
    std::optional<double>& domain_start(int i, int j);
    const std::optional<double>& domain_start(int i, int j) const;

    /// Long format: t, i, j, phi, defined flag.
    void to_csv(std::ostream& out) const;

private:
    std::size_t flat(int i, int j) const;

    std::vector<double> times_;
    int n_ = 0;
    std::vector<std::optional<double>> phi_;           // [time][i][j] flattened
    std::vector<std::optional<double>> domain_start_;  // [i][j] flattened
};

/// Evaluates the cutoff formula at every stored time of the grid and
/// validates the structural cutoff invariants.
CutoffTable cutoffs(const ValueGrid& grid, const UtilitySpec& spec);

/// Optimal units retained at an opportunity of quality theta at time t with
/// stock x; ties broken toward saving more.
int saving_rule(const ValueGrid& grid, const UtilitySpec& spec, double theta, double t, int x);

/// Quality the misperceiving agent believes they observed:
/// believed_zeta(theta~) = true_zeta(theta).
double misperceived_theta(const UtilitySpec& true_spec, const UtilitySpec& believed_spec,
                          double theta);

/// Saving rule of an agent who believes the more-concave quality component
/// `believed_spec` instead of `true_spec`.
int procrastinator_policy(const UtilitySpec& true_spec, const UtilitySpec& believed_spec,
                          const ValueGrid& believed_grid, double theta, double t, int x);

/// Saving rule of an agent who believes the arrival rate is kappa * lambda:
/// their value function is the true one evaluated at the dilated time
/// T + kappa*(t - T).
int lambda_misperception_policy(const UtilitySpec& spec, const ValueGrid& grid_true_lambda,
                                double kappa, double theta, double t, int x);

}  // namespace deadline
