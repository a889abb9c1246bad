#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "deadline/solver.hpp"
#include "deadline/utility.hpp"
#include "deadline/value_grid.hpp"

namespace deadline {

/// Minimal splittable PRNG (splitmix64 mixing function) so batches are
/// byte-identical across platforms and thread schedules.
struct SplitMix64 {
    std::uint64_t state = 0;

    std::uint64_t next();
    /// Uniform draw on [0, 1) with 53 random bits.
    double uniform();
    double exponential(double rate);
};

/// Per-trace seed derived from a master seed and trace index; independent of
/// how traces are distributed over workers.
std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t index);

struct Opportunity {
    double time;
    double theta;
};

struct Decision {
    int spend;
    int remaining;
};

struct SimulationTrace {
    std::uint64_t seed = 0;
    std::vector<Opportunity> opportunities;
    std::vector<Decision> decisions;
    double realized_utility = 0.0;
};

/// One Poisson sample path on (t0, T]: exponential(lambda) inter-arrivals,
/// i.i.d. uniform qualities. An arrival exactly at T is admitted.
std::vector<Opportunity> sample_path(const ModelParams& params, double t0, std::uint64_t seed);

/// Runs the optimal policy forward along one sampled path.
SimulationTrace run_agent(const ValueGrid& grid, const UtilitySpec& spec, int x0, double t0,
                          std::uint64_t seed);

struct BatchSummary {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t n = 0;
};

/// Monte Carlo batch of independent agents; aggregation uses pairwise
/// summation in trace order, so the result does not depend on the thread
/// count.
BatchSummary run_batch(const ValueGrid& grid, const UtilitySpec& spec, int x0, double t0,
                       std::size_t n_traces, std::uint64_t master_seed, int threads = 1);

/// Pair of correlated Bernoulli variables built from one uniform draw X:
/// X1 = 1[X <= p1], X2 = 1[c <= X <= c + p2].
struct CorrelatedBernoulli {
    double p1 = 0.5;
    double p2 = 0.5;
    double c = 0.0;

    void validate() const;
    /// Joint probability P(X1 = b1, X2 = b2).
    double joint(int b1, int b2) const;
};

std::pair<int, int> sample_correlated(const CorrelatedBernoulli& dist, std::uint64_t seed);

/// Expected value of the double random payment (x now with prob p1, x_bar
/// at t_bar with prob p2) and its analytic derivative in the correlation
/// control c.
struct DoublePaymentValue {
    double expected = 0.0;
    double d_expected_dc = 0.0;
};

DoublePaymentValue double_payment_value(const TwoPaymentValue& tv, const CorrelatedBernoulli& dist,
                                        double t);

}  // namespace deadline
