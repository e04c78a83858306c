#pragma once

#include "cmdp/queue_model.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace cmdp {

struct SimConfig {
    double horizon = 1e5;
    double warmup = 1e3;
    std::uint64_t seed = 1;
    int batches = 20;

    /// Throws ModelError unless horizon > warmup > 0 and batches >= 2.
    void validate() const;
};

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    bool contains(double x) const noexcept { return lo <= x && x <= hi; }
};

struct SimEstimate {
    double eta_hat = 0.0;
    double std_error = 0.0;      // of the batch-means average
    Interval ci;                 // Student-t 95%
    Interval wide_ci;            // eta_hat +- 3 standard errors
    std::vector<double> batch_means;
    double idle_fraction = 0.0;  // time share of state 0 after warmup
    Interval idle_ci;
    std::uint64_t events = 0;
    std::vector<std::string> warnings;
};

/// Aggregate-rate simulation of the queue from an empty system: arrivals at
/// lambda, departures at u(n)mu. The post-warmup window is cut into equal
/// time batches for the confidence interval. Bit-identical for equal seeds.
SimEstimate simulate_eta(const GroupServerModel& model, const Policy& u, const SimConfig& cfg);

/// One run per seed cfg.seed, cfg.seed + 1, ...; runs execute concurrently.
std::vector<SimEstimate> simulate_replications(const GroupServerModel& model, const Policy& u, const SimConfig& cfg,
                                               std::size_t replications, unsigned workers = 0);

/// 0.975 quantile of Student's t with the given degrees of freedom.
double t_quantile_975(int dof);

} // namespace cmdp
