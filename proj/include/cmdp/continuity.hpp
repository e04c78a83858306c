#pragma once

#include "cmdp/evaluator.hpp"
#include "cmdp/queue_model.hpp"

#include <cstdint>
#include <vector>

namespace cmdp {

/**
 * Normaliser perturbation and cost decomposition for two queue policies that
 * agree on states 0..n:
 *
 *   (1 + G(u)) / (1 + G(u2)) = 1 + sigma
 *   eta(u2) - eta(u) = sigma * sum_{m<=n} pi(m,u) f(m,u)
 *                      + sum_{m>n} [pi(m,u2) f(m,u2) - pi(m,u) f(m,u)]
 */
struct ContinuityReport {
    long long agreement_k = -1;
    double distance = 0.0;
    long n = 0;                 // agreement state used for delta and sigma
    double sigma = 0.0;
    Bounded delta_u;            // delta(n, u)
    Bounded delta_u2;           // delta(n, u2)
    bool sandwich_strict = false;

    // Filled by eta_diff_bound().
    long head_states = 0;       // head sum runs over m <= head_states
    double head_sum = 0.0;
    double head_term = 0.0;     // sigma * head_sum
    double tail_term = 0.0;     // truncated tail difference
    double tail_term_bound = 0.0;
    double eta_u = 0.0;
    double eta_u2 = 0.0;
    double eta_diff = 0.0;      // eta(u2) - eta(u)
    double eta_error = 0.0;     // certified truncation error of eta_diff
    double rigorous_bound = 0.0;
    bool bound_holds = false;
    double head_scaling_residual = 0.0; // max relative |pi(m,u2) - (1+sigma) pi(m,u)|, m <= head_states
};

/// sigma, the deltas at the agreement state and the strict sandwich check.
/// Throws ModelError when the policies differ at state 0.
ContinuityReport sigma_report(const GroupServerModel& model, const Policy& u, const Policy& u2, double tol,
                              const MetricParams& metric = MetricParams{});

/// sigma_report plus the decomposition terms, both average costs and the
/// rigorous bound |sigma| * |head sum| + tail bound.
ContinuityReport eta_diff_bound(const GroupServerModel& model, const Policy& u, const Policy& u2, double tol,
                                const MetricParams& metric = MetricParams{});

struct SamplerOptions {
    std::size_t samples = 32;  // random samples per k, on top of the deterministic ones
    std::uint64_t seed = 1;
    long window = 8;           // mutated states k+1..k+window, then the tail
    unsigned workers = 0;      // 0: available parallelism
};

struct ScanRow {
    long k = 0;
    std::size_t samples = 0;   // evaluated neighbours, u itself included
    std::size_t skipped = 0;   // unstable neighbours
    double max_diff = 0.0;     // max |eta(u') - eta(u)|
    double max_bound = 0.0;    // max pair bound
    bool rigorous = true;      // every pair bound is certified
    bool exhausted = false;    // no state beyond k offers an alternative action
};

struct ModulusScan {
    std::vector<ScanRow> rows;
    bool diff_nonincreasing = true;
    bool bound_nonincreasing = true;
    /// The largest observed difference does not shrink: the last row keeps
    /// more than half of the first row's difference and exceeds 1e-6.
    bool modulus_stalls = false;
};

/// For each k, evaluates policies in the ball of radius r^k around u, i.e.
/// policies agreeing with u on states 0..k.
ModulusScan modulus_scan(const PolicyEvaluator& evaluator, const Policy& u, const std::vector<long>& ks,
                         const SamplerOptions& sampler, double tol);

/// Neighbours of u agreeing on states 0..k (u itself first); deterministic
/// for a given seed.
std::vector<Policy> sample_neighbours(const ActionSpace& space, const Policy& u, long k,
                                      const SamplerOptions& sampler);

} // namespace cmdp
