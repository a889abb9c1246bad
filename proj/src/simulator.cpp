#include "deadline/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "deadline/policy.hpp"

namespace deadline {

namespace {

// Pairwise (cascade) summation over [lo, hi) for order-independent,
// low-error totals.
double pairwise_sum(const std::vector<double>& v, std::size_t lo, std::size_t hi) {
    const std::size_t len = hi - lo;
    if (len <= 8) {
        double s = 0.0;
        for (std::size_t k = lo; k < hi; ++k) s += v[k];
        return s;
    }
    const std::size_t mid = lo + len / 2;
    return pairwise_sum(v, lo, mid) + pairwise_sum(v, mid, hi);
}

}  // namespace

std::uint64_t SplitMix64::next() {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

double SplitMix64::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

double SplitMix64::exponential(double rate) { return -std::log1p(-uniform()) / rate; }

std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t index) {
    SplitMix64 g{master_seed ^ (0xA24BAED4963EE407ULL * (index + 1))};
    g.next();
    return g.next();
}

std::vector<Opportunity> sample_path(const ModelParams& params, double t0, std::uint64_t seed) {
    if (t0 > params.deadline_T) throw std::domain_error("sample_path: t0 beyond the deadline");
    SplitMix64 rng{seed};
    std::vector<Opportunity> path;
    double t = t0;
    while (true) {
        t += rng.exponential(params.lambda);
        if (t > params.deadline_T) break;
        path.push_back({t, rng.uniform()});
    }
    return path;
}

SimulationTrace run_agent(const ValueGrid& grid, const UtilitySpec& spec, int x0, double t0,
                          std::uint64_t seed) {
    if (x0 < 0 || x0 > grid.n()) throw std::domain_error("run_agent: x0 out of range");
    SimulationTrace trace;
    trace.seed = seed;
    trace.opportunities = sample_path(grid.params(), t0, seed);
    int x = x0;
    for (const auto& opp : trace.opportunities) {
        const int y = saving_rule(grid, spec, opp.theta, opp.time, x);
        const int spend = x - y;
        if (spend > 0) trace.realized_utility += spec.zeta(opp.theta) * spec.mu(spend);
        x = y;
        trace.decisions.push_back({spend, x});
    }
    return trace;
}

BatchSummary run_batch(const ValueGrid& grid, const UtilitySpec& spec, int x0, double t0,
                       std::size_t n_traces, std::uint64_t master_seed, int threads) {
    if (n_traces == 0) throw std::invalid_argument("run_batch: n_traces must be > 0");
    threads = std::clamp(threads, 1, 256);
    std::vector<double> utilities(n_traces);

    auto worker = [&](std::size_t lo, std::size_t hi) {
        for (std::size_t k = lo; k < hi; ++k)
            utilities[k] =
                run_agent(grid, spec, x0, t0, derive_seed(master_seed, k)).realized_utility;
    };
    if (threads == 1 || n_traces < 1024) {
        worker(0, n_traces);
    } else {
        std::vector<std::thread> pool;
        const std::size_t chunk = (n_traces + static_cast<std::size_t>(threads) - 1) /
                                  static_cast<std::size_t>(threads);
        for (int w = 0; w < threads; ++w) {
            const std::size_t lo = static_cast<std::size_t>(w) * chunk;
            if (lo >= n_traces) break;
            pool.emplace_back(worker, lo, std::min(lo + chunk, n_traces));
        }
        for (auto& th : pool) th.join();
    }

    BatchSummary s;
    s.n = n_traces;
    s.mean = pairwise_sum(utilities, 0, n_traces) / static_cast<double>(n_traces);
    if (n_traces > 1) {
        std::vector<double> sq(n_traces);
        for (std::size_t k = 0; k < n_traces; ++k) {
            const double d = utilities[k] - s.mean;
            sq[k] = d * d;
        }
        const double var =
            pairwise_sum(sq, 0, n_traces) / static_cast<double>(n_traces - 1);
        s.std_error = std::sqrt(var / static_cast<double>(n_traces));
    }
    return s;
}

void CorrelatedBernoulli::validate() const {
    if (p1 < 0.0 || p1 > 1.0 || p2 < 0.0 || p2 > 1.0)
        throw std::domain_error("correlated_bernoulli: p1, p2 must lie in [0, 1]");
    const double c_min = std::max(0.0, p1 - p2);
    const double c_max = std::min(p1, 1.0 - p2);
    if (c < c_min - 1e-12 || c > c_max + 1e-12)
        throw std::domain_error("correlated_bernoulli: c outside the admissible interval");
}

double CorrelatedBernoulli::joint(int b1, int b2) const {
    validate();
    if (b1 == 1 && b2 == 1) return std::min(p1, p2) - c;
    if (b1 == 1 && b2 == 0) return std::max(p1 - p2, 0.0) + c;
    if (b1 == 0 && b2 == 1) return std::max(p2 - p1, 0.0) + c;
    if (b1 == 0 && b2 == 0) return std::min(1.0 - p1, 1.0 - p2) - c;
    throw std::domain_error("correlated_bernoulli: bits must be 0 or 1");
}

std::pair<int, int> sample_correlated(const CorrelatedBernoulli& dist, std::uint64_t seed) {
    dist.validate();
    SplitMix64 rng{seed};
    const double x = rng.uniform();
    const int b1 = x <= dist.p1 ? 1 : 0;
    const int b2 = (x >= dist.c && x <= dist.c + dist.p2) ? 1 : 0;
    return {b1, b2};
}

DoublePaymentValue double_payment_value(const TwoPaymentValue& tv, const CorrelatedBernoulli& dist,
                                        double t) {
    dist.validate();
    const auto& tp = tv.spec();
    if (!(t < tp.t_bar)) throw std::domain_error("double_payment_value: t must precede t_bar");
    const double v_tilde = tv.tilde(t, tp.x);
    const double v_now = tv.base_grid().value(t, tp.x);
    const double v_later = tv.base_grid().value(tp.t_bar, tp.x_bar);
    DoublePaymentValue out;
    out.expected = dist.joint(1, 1) * v_tilde + dist.joint(1, 0) * v_now +
                   dist.joint(0, 1) * v_later;
    out.d_expected_dc = -v_tilde + v_now + v_later;
    return out;
}

}  // namespace deadline
