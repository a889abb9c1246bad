#include <cmath>
#include <stdexcept>

#include "deadline/simulator.hpp"
#include "deadline/solver.hpp"
#include "doctest.h"

using namespace deadline;

namespace {

UtilitySpec identity_spec() { return {ZetaSpec::power(1.0), MuSpec::power(1.0)}; }
UtilitySpec sqrt_spec() { return {ZetaSpec::power(1.0), MuSpec::power(0.5)}; }

ModelParams make_params(int n, double lambda = 1.0, double t_min = 8.0, double dt = 1e-3) {
    ModelParams p;
    p.lambda = lambda;
    p.deadline_T = 10.0;
    p.n = n;
    p.t_min = t_min;
    p.dt = dt;
    return p;
}

}  // namespace

TEST_CASE("splittable rng is deterministic and well scaled") {
    SplitMix64 a{42}, b{42};
    for (int k = 0; k < 100; ++k) CHECK(a.next() == b.next());
    SplitMix64 c{42};
    double mean = 0.0;
    for (int k = 0; k < 100000; ++k) {
        const double u = c.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        mean += u;
    }
    mean /= 100000.0;
    CHECK(mean == doctest::Approx(0.5).epsilon(5e-3));
    CHECK(derive_seed(1, 0) != derive_seed(1, 1));
    CHECK(derive_seed(1, 0) != derive_seed(2, 0));
    CHECK(derive_seed(7, 3) == derive_seed(7, 3));
}

TEST_CASE("sample paths are reproducible poisson arrivals") {
    auto params = make_params(1, 1.0, 0.0);
    auto p1 = sample_path(params, 0.0, 123);
    auto p2 = sample_path(params, 0.0, 123);
    REQUIRE(p1.size() == p2.size());
    for (std::size_t k = 0; k < p1.size(); ++k) {
        CHECK(p1[k].time == p2[k].time);
        CHECK(p1[k].theta == p2[k].theta);
    }
    double prev = 0.0;
    for (const auto& opp : p1) {
        CHECK(opp.time > prev);
        CHECK(opp.time <= 10.0);
        CHECK(opp.theta >= 0.0);
        CHECK(opp.theta < 1.0);
        prev = opp.time;
    }

    // expected number of arrivals over the window is lambda*(T - t0)
    const int reps = 20000;
    double total = 0.0;
    for (int k = 0; k < reps; ++k)
        total += static_cast<double>(sample_path(params, 0.0, derive_seed(99, static_cast<std::uint64_t>(k))).size());
    // std error of the mean count is sqrt(10 / reps) ~ 0.022
    CHECK(total / reps == doctest::Approx(10.0).epsilon(1.2e-2));

    CHECK(sample_path(params, 10.0, 5).empty());
    CHECK_THROWS_AS(sample_path(params, 10.5, 5), std::domain_error);
}

TEST_CASE("single-agent runs account every spend") {
    auto spec = sqrt_spec();
    auto grid = solve(spec, make_params(2, 1.0, 6.0, 1e-3));

    // no stock: nothing is ever earned
    auto t0 = run_agent(grid, spec, 0, 6.0, 7);
    CHECK(t0.realized_utility == doctest::Approx(0.0).epsilon(1e-15));
    for (const auto& d : t0.decisions) CHECK(d.spend == 0);

    auto tr = run_agent(grid, spec, 2, 6.0, 11);
    int stock = 2;
    double earned = 0.0;
    REQUIRE(tr.decisions.size() == tr.opportunities.size());
    for (std::size_t k = 0; k < tr.decisions.size(); ++k) {
        const auto& d = tr.decisions[k];
        CHECK(d.spend >= 0);
        CHECK(d.spend <= stock);
        CHECK(d.remaining == stock - d.spend);
        if (d.spend > 0)
            earned += spec.zeta(tr.opportunities[k].theta) * spec.mu(d.spend);
        stock = d.remaining;
    }
    CHECK(tr.realized_utility == doctest::Approx(earned).epsilon(1e-12));
    CHECK_THROWS_AS(run_agent(grid, spec, 3, 6.0, 1), std::domain_error);
}

TEST_CASE("monte carlo closes on the dynamic-programming value") {
    auto id = identity_spec();
    auto grid = solve(id, make_params(1));
    auto s = run_batch(grid, id, 1, 8.0, 200000, 20260823, 4);
    CHECK(std::abs(s.mean - 0.5) <= 4.0 * s.std_error);
    CHECK(s.std_error > 0.0);
    CHECK(s.n == 200000);

    // a very short horizon: the value is dominated by the first-arrival term
    auto s2 = run_batch(grid, id, 1, 10.0 - 0.01, 100000, 7, 2);
    CHECK(std::abs(s2.mean - closed_form_single(1.0, 10.0, 10.0 - 0.01)) <=
          4.0 * s2.std_error + 1e-6);
}

TEST_CASE("batch aggregation is independent of the thread count") {
    auto id = identity_spec();
    auto grid = solve(id, make_params(1));
    auto a = run_batch(grid, id, 1, 8.0, 5000, 99, 1);
    auto b = run_batch(grid, id, 1, 8.0, 5000, 99, 3);
    auto c = run_batch(grid, id, 1, 8.0, 5000, 99, 8);
    CHECK(a.mean == b.mean);
    CHECK(b.mean == c.mean);
    CHECK(a.std_error == c.std_error);
    CHECK_THROWS_AS(run_batch(grid, id, 1, 8.0, 0, 1, 1), std::invalid_argument);
}

TEST_CASE("correlated bernoulli joint table") {
    CorrelatedBernoulli d{0.5, 0.5, 0.0};
    CHECK(d.joint(1, 1) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(d.joint(1, 0) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(d.joint(0, 1) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(d.joint(0, 0) == doctest::Approx(0.5).epsilon(1e-15));

    CorrelatedBernoulli anti{0.5, 0.5, 0.5};
    CHECK(anti.joint(1, 1) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(anti.joint(1, 0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(anti.joint(0, 1) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(anti.joint(0, 0) == doctest::Approx(0.0).epsilon(1e-15));

    CorrelatedBernoulli skew{0.3, 0.6, 0.1};
    CHECK(skew.joint(1, 1) == doctest::Approx(0.2).epsilon(1e-15));
    CHECK(skew.joint(0, 1) == doctest::Approx(0.4).epsilon(1e-15));
    CHECK(skew.joint(1, 0) == doctest::Approx(0.1).epsilon(1e-15));
    CHECK(skew.joint(0, 0) == doctest::Approx(0.3).epsilon(1e-15));

    CorrelatedBernoulli bad{0.5, 0.5, 0.6};
    CHECK_THROWS_AS(bad.validate(), std::domain_error);
    CorrelatedBernoulli bad2{1.2, 0.5, 0.0};
    CHECK_THROWS_AS(bad2.validate(), std::domain_error);
}

TEST_CASE("correlated sampler matches its joint table") {
    for (const CorrelatedBernoulli d :
         {CorrelatedBernoulli{0.5, 0.5, 0.0}, CorrelatedBernoulli{0.5, 0.5, 0.5},
          CorrelatedBernoulli{0.3, 0.6, 0.1}}) {
        const int reps = 100000;
        double counts[2][2] = {{0.0, 0.0}, {0.0, 0.0}};
        for (int k = 0; k < reps; ++k) {
            auto [b1, b2] = sample_correlated(d, derive_seed(5150, static_cast<std::uint64_t>(k)));
            counts[b1][b2] += 1.0;
        }
        for (int b1 = 0; b1 <= 1; ++b1)
            for (int b2 = 0; b2 <= 1; ++b2) {
                const double p = d.joint(b1, b2);
                const double freq = counts[b1][b2] / reps;
                const double se = std::sqrt(std::max(p * (1.0 - p), 1e-12) / reps);
                CHECK(std::abs(freq - p) <= 4.0 * se + 1e-9);
            }
    }
}

TEST_CASE("double random payment value and its correlation slope") {
    auto spec = sqrt_spec();
    TwoPaymentSpec tp;
    tp.base = make_params(2, 1.0, 7.0, 1e-3);
    tp.x = 1;
    tp.x_bar = 1;
    tp.t_bar = 9.0;
    auto tv = solve_two_payment(spec, tp);

    // being averse to correlation, the agent gains when c rises
    CorrelatedBernoulli lo{0.5, 0.5, 0.0};
    CorrelatedBernoulli hi{0.5, 0.5, 0.5};
    auto e_lo = double_payment_value(tv, lo, 8.0);
    auto e_hi = double_payment_value(tv, hi, 8.0);
    CHECK(e_lo.d_expected_dc > 0.0);
    CHECK(e_hi.expected > e_lo.expected);
    // E is affine in c
    CHECK(e_hi.expected - e_lo.expected ==
          doctest::Approx(0.5 * e_lo.d_expected_dc).epsilon(1e-12));
    CHECK(e_lo.d_expected_dc == doctest::Approx(e_hi.d_expected_dc).epsilon(1e-15));

    // certain payments: only the joint-arrival value survives
    CorrelatedBernoulli certain{1.0, 1.0, 0.0};
    auto e_sure = double_payment_value(tv, certain, 8.0);
    CHECK(e_sure.expected == doctest::Approx(tv.tilde(8.0, 1)).epsilon(1e-12));

    CHECK_THROWS_AS(double_payment_value(tv, lo, 9.5), std::domain_error);
    CorrelatedBernoulli bad{0.5, 0.5, 0.7};
    CHECK_THROWS_AS(double_payment_value(tv, bad, 8.0), std::domain_error);
}
