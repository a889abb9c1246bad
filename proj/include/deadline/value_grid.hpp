#pragma once

#include <iosfwd>
#include <vector>

#include "json.hpp"

namespace deadline {

/// Model primitives: Poisson rate, deadline, resource stock size, and the
/// backward-integration grid settings.
struct ModelParams {
    double lambda = 1.0;
    double deadline_T = 10.0;
    int n = 1;
    double t_min = 0.0;
    double dt = 1e-3;
    int quad_points = 128;

    void validate() const;

    nlohmann::json to_json() const;
    static ModelParams from_json(const nlohmann::json& j);
};

/// Time-gridded value function V_i(t), i = 0..n, on an increasing time grid
/// ending at the deadline. Immutable once built; linear interpolation
/// between stored times.
class ValueGrid {
public:
    ValueGrid() = default;
    ValueGrid(ModelParams params, std::vector<double> times,
              std::vector<std::vector<double>> values, double worst_emax_gap = 0.0);

    const ModelParams& params() const { return params_; }
    const std::vector<double>& times() const { return times_; }
    std::size_t size() const { return times_.size(); }
    int n() const { return params_.n; }

    double at(std::size_t time_index, int i) const { return values_[time_index][static_cast<std::size_t>(i)]; }
    const std::vector<double>& row(std::size_t time_index) const { return values_[time_index]; }

    /// V_i(t), linear interpolation; t must lie in [t_min, T].
    double value(double t, int i) const;
    std::vector<double> value_row(double t) const;
    /// Discrete resource derivative V_{i+1}(t) - V_i(t).
    double delta_resource(double t, int i) const { return value(t, i + 1) - value(t, i); }

    /// Worst disagreement between the two internal E-max evaluation routes
    /// seen while integrating this grid.
    double worst_emax_gap() const { return worst_emax_gap_; }

    /// Checks terminal condition, positivity, monotonicity in t and i,
    /// discrete concavity in i and the x*mu(1) bound; violations beyond
    /// 1e-8 throw. `require_zero_v0` is relaxed for two-payment grids
    /// whose pending payment gives V_0 > 0.
    void validate(double mu1, bool require_zero_v0 = true) const;

    void to_csv(std::ostream& out) const;
    nlohmann::json to_json() const;
    static ValueGrid from_json(const nlohmann::json& j);

    /// Fault-injection hook for diagnostics testing: additively perturbs a
    /// single stored value.
    void perturb(std::size_t time_index, int i, double delta);

private:
    std::size_t lower_index(double t) const;

    ModelParams params_;
    std::vector<double> times_;
    std::vector<std::vector<double>> values_;  // [time][resource]
    double worst_emax_gap_ = 0.0;
};

}  // namespace deadline
