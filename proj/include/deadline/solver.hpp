#pragma once

#include <functional>
#include <vector>

#include "deadline/utility.hpp"
#include "deadline/value_grid.hpp"

namespace deadline {

/// Closed-form single-unit value 1 - 2/(lambda*(T-t)+2), valid for the
/// identity quality component and mu(1)=1.
double closed_form_single(double lambda, double T, double t);

/// Expected best response at an opportunity: E_theta max_y { u(theta, x-y)
/// + v_row[y] }, theta ~ U[0,1]. Computed by two independent routes and
/// cross-checked; `method_gap` is their absolute disagreement (values above
/// 1e-7 indicate degraded accuracy).
struct EmaxResult {
    double value = 0.0;
    double method_gap = 0.0;
};

EmaxResult emax(const UtilitySpec& spec, const std::vector<double>& v_row, int x,
                int quad_points = 128);

/// Backward RK4 integration of dV_i/dt = lambda*[V_i - emax(V, i)] from
/// V(T,.) = 0 down to t_min. Every step is stored; the returned grid is
/// validated against the structural invariants (terminal condition,
/// positivity, monotonicity, concavity, the x*mu(1) bound).
ValueGrid solve(const UtilitySpec& spec, const ModelParams& params);

/// Solves for utility k*u and asserts the homogeneity law: the result must
/// equal k * solve(spec, params) pointwise within 1e-9 with an identical
/// induced saving rule.
ValueGrid solve_scaled(const UtilitySpec& spec, const ModelParams& params, double k);

/// A known future payment of x_bar extra units arriving at t_bar.
struct TwoPaymentSpec {
    ModelParams base;  // base.n must cover x + x_bar
    int x = 1;
    int x_bar = 1;
    double t_bar = 0.0;

    void validate() const;
};

/// Value of the two-payment problem: the base single-payment grid V (stock
/// up to x + x_bar) on [t_min, T] together with the pre-payment grid
/// holding V~_i(t) for i = 0..x on [t_min, t_bar], integrated backward from
/// the continuity condition V~_i(t_bar) = V(t_bar, i + x_bar).
class TwoPaymentValue {
public:
    TwoPaymentValue(ValueGrid base, ValueGrid pre, TwoPaymentSpec tp)
        : base_(std::move(base)), pre_(std::move(pre)), tp_(tp) {}

    const ValueGrid& base_grid() const { return base_; }
    const ValueGrid& pre_grid() const { return pre_; }
    const TwoPaymentSpec& spec() const { return tp_; }

    /// V~_i(t): stock i in hand, payment still pending if t < t_bar.
    double tilde(double t, int i) const;
    /// The composite query V~(t, x + x_bar * 1[t >= t_bar]).
    double composite(double t) const { return tilde(t, tp_.x); }

private:
    ValueGrid base_;
    ValueGrid pre_;
    TwoPaymentSpec tp_;
};

TwoPaymentValue solve_two_payment(const UtilitySpec& spec, const TwoPaymentSpec& tp);

/// Independent brute-force benchmark: discrete-time backward induction with
/// arrival probability lambda*dt_fine per step and quality discretized at
/// theta_grid midpoints. With `discount` given, the recursion is instead the
/// period model: an opportunity arrives every step of length dt_fine and the
/// continuation value is multiplied by discount(t + dt_fine).
ValueGrid oracle_discrete_time(const UtilitySpec& spec, const ModelParams& params,
                               double dt_fine, int theta_grid,
                               const std::function<double(double)>& discount = nullptr);

}  // namespace deadline
