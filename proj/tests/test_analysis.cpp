#include <cmath>
#include <stdexcept>
#include <vector>

#include "deadline/analysis.hpp"
#include "deadline/solver.hpp"
#include "doctest.h"

using namespace deadline;

namespace {

UtilitySpec sqrt_spec(double k = 1.0) { return {ZetaSpec::power(k), MuSpec::power(0.5)}; }

ModelParams make_params(int n, double lambda = 1.0, double t_min = 8.0, double dt = 1e-3) {
    ModelParams p;
    p.lambda = lambda;
    p.deadline_T = 10.0;
    p.n = n;
    p.t_min = t_min;
    p.dt = dt;
    return p;
}

bool all_pass_or_skip(const std::vector<PropertyReport>& reports) {
    for (const auto& r : reports)
        if (r.status == PropertyReport::Status::Fail) return false;
    return true;
}

}  // namespace

TEST_CASE("effective discount analogue") {
    CHECK(effective_discount(1.0, 10.0, 10.0) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(effective_discount(1.0, 10.0, 10.0 - std::log(2.0)) ==
          doctest::Approx(0.5).epsilon(1e-12));
    CHECK(effective_discount(2.0, 10.0, 5.0) ==
          doctest::Approx(1.0 - std::exp(-10.0)).epsilon(1e-12));
    CHECK(effective_discount(1.0, 10.0, -100.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_THROWS_AS(effective_discount(1.0, 10.0, 10.5), std::domain_error);
}

TEST_CASE("euler ratio diagnostic blows up near the deadline") {
    auto spec = sqrt_spec(2.0);
    auto grid = solve(spec, make_params(2, 1.0, -0.5, 1e-3));

    auto r = euler_ratio_diagnostic(grid, spec, 0.0);  // lambda*(T-t) = 10
    CHECK(r.analytic == doctest::Approx(1.0000454).epsilon(1e-6));
    CHECK(r.empirical >= 1.0);

    // both the analytic factor and the empirical ratio grow toward T
    double prev_a = 0.0, prev_e = 0.0;
    for (double t : {5.0, 8.0, 9.0, 9.5, 9.9}) {
        auto q = euler_ratio_diagnostic(grid, spec, t);
        CHECK(q.analytic > prev_a);
        CHECK(q.empirical > prev_e);
        CHECK(q.empirical >= 1.0);
        prev_a = q.analytic;
        prev_e = q.empirical;
    }
    auto near = euler_ratio_diagnostic(grid, spec, 9.99);
    CHECK(near.analytic > 100.0);
    CHECK(near.empirical > 10.0);

    CHECK_THROWS_AS(euler_ratio_diagnostic(grid, spec, 10.0), std::domain_error);
}

TEST_CASE("default battery composition") {
    auto battery = default_battery();
    CHECK(battery.size() == 36);
    for (const auto& inst : battery) {
        CHECK_NOTHROW(inst.params.validate());
        CHECK_NOTHROW(inst.spec.validate(inst.params.n));
        CHECK(inst.params.lambda * (inst.params.deadline_T - inst.params.t_min) ==
              doctest::Approx(20.0).epsilon(1e-12));
    }
}

TEST_CASE("property checks pass on a sound desk instance") {
    auto spec = sqrt_spec(2.0);
    auto params = make_params(3, 2.0, 0.0, 5e-4);
    auto grid = solve(spec, params);
    ToleranceConfig cfg;

    CHECK(check_value_shape(grid, spec, "desk", cfg).status == PropertyReport::Status::Pass);
    CHECK(check_marginal_value_decreasing(grid, "desk", cfg).status ==
          PropertyReport::Status::Pass);
    CHECK(check_emax_crosscheck(grid, "desk", cfg).status == PropertyReport::Status::Pass);
    CHECK(check_preference_reversal(grid, "desk", cfg).status == PropertyReport::Status::Pass);
    CHECK(check_cutoff_order(grid, spec, "desk", cfg).status == PropertyReport::Status::Pass);
    CHECK(check_cutoffs_approaching(grid, spec, "desk", cfg).status ==
          PropertyReport::Status::Pass);
    CHECK(check_decomposition(grid, spec, "desk", cfg).status == PropertyReport::Status::Pass);
    auto mc = check_more_concave(grid, spec, "desk", cfg);
    CHECK(mc.status == PropertyReport::Status::Pass);
    // the misperceiver's extra cutoff crosses the accurate one once
    CHECK(mc.notes.find("cross") != std::string::npos);
}

TEST_CASE("each check detects a corrupted grid") {
    auto spec = sqrt_spec(2.0);
    auto grid = solve(spec, make_params(2, 1.0, 7.0, 1e-3));
    ToleranceConfig cfg;

    auto bump = grid;
    bump.perturb(grid.size() / 2, 1, 0.05);
    CHECK(check_value_shape(bump, spec, "bump", cfg).status == PropertyReport::Status::Fail);
    CHECK(check_marginal_value_decreasing(bump, "bump", cfg).status ==
          PropertyReport::Status::Fail);
    CHECK(check_decomposition(bump, spec, "bump", cfg).status == PropertyReport::Status::Fail);

    auto dent = grid;
    dent.perturb(grid.size() / 3, 2, -0.05);
    CHECK(check_value_shape(dent, spec, "dent", cfg).status == PropertyReport::Status::Fail);

    // an expectation-route disagreement beyond tolerance is flagged
    ValueGrid noisy(grid.params(), grid.times(),
                    std::vector<std::vector<double>>(grid.size(), {0.0, 0.0, 0.0}), 1e-5);
    CHECK(check_emax_crosscheck(noisy, "noisy", cfg).status == PropertyReport::Status::Fail);
}

TEST_CASE("gated checks skip with a reason") {
    auto spec = sqrt_spec(2.0);
    auto grid = solve(spec, make_params(2, 1.0, 7.0, 1e-3));
    ToleranceConfig cfg;

    // non-log-concave quality component: the approach theorem does not apply
    const int m = 200;
    std::vector<double> xs(m + 1), hump(m + 1);
    for (int i = 0; i <= m; ++i) {
        xs[static_cast<std::size_t>(i)] = static_cast<double>(i) / m;
        const double t = xs[static_cast<std::size_t>(i)];
        hump[static_cast<std::size_t>(i)] = (t + std::pow(t, 10.0)) / 2.0;
    }
    UtilitySpec non_lc{ZetaSpec::tabulated(xs, hump), MuSpec::power(0.5)};
    auto r = check_cutoffs_approaching(grid, non_lc, "hump", cfg);
    CHECK(r.status == PropertyReport::Status::Skipped);
    CHECK(!r.notes.empty());

    // single-unit grids cannot exhibit the two-cutoff properties
    auto single = solve(sqrt_spec(), make_params(1));
    CHECK(check_cutoffs_approaching(single, sqrt_spec(), "single", cfg).status ==
          PropertyReport::Status::Skipped);
    CHECK(check_preference_reversal(single, "single", cfg).status ==
          PropertyReport::Status::Skipped);
}

TEST_CASE("battery verification aggregates instances") {
    // a reduced battery keeps the runtime modest; the asymptote gate span is
    // shortened to what these instances reach comfortably
    std::vector<BatteryInstance> battery;
    BatteryInstance a;
    a.name = "zeta=theta|mu=sqrt|n=1|lambda=1";
    a.spec = sqrt_spec();
    a.params = make_params(1, 1.0, -10.0, 1e-3);
    battery.push_back(a);
    BatteryInstance b;
    b.name = "zeta=1-(1-theta)^2|mu=sqrt|n=2|lambda=1";
    b.spec = {ZetaSpec::flipped_power(2.0), MuSpec::power(0.5)};
    b.params = make_params(2, 1.0, -10.0, 1e-3);
    battery.push_back(b);

    ToleranceConfig cfg;
    cfg.asymptote_lambda_span = 5000.0;
    cfg.threads = 1;
    auto reports = verify_all(battery, cfg);
    CHECK(reports.size() == 18);  // 9 properties x 2 instances
    CHECK(all_pass_or_skip(reports));
    int passes = 0;
    for (const auto& r : reports) {
        CHECK((r.instance_descriptor == a.name || r.instance_descriptor == b.name));
        if (r.status == PropertyReport::Status::Pass) ++passes;
        // json artifact is well formed
        auto j = r.to_json();
        CHECK(j.contains("property"));
        CHECK(j.contains("status"));
    }
    CHECK(passes >= 12);
}
