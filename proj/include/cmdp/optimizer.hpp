#pragma once

#include "cmdp/evaluator.hpp"
#include "cmdp/queue_model.hpp"

#include <optional>
#include <string>
#include <vector>

namespace cmdp {

struct SearchOptions {
    double tol = 1e-8;
    std::uint64_t cap = kDefaultEnumerationCap;
    std::optional<Objective> objective; // defaults to the evaluator's
    unsigned workers = 0;               // 0: available parallelism
};

/// First state where a server of some group is on while a group with a
/// strictly smaller c/mu ratio is not fully on. Groups are 0-based in
/// canonical order.
struct CmuCheck {
    bool conformant = true;
    long state = -1;
    int preferred_group = -1;
    int other_group = -1;
};

struct Candidate {
    Policy policy;
    std::optional<Estimate> eta; // empty when skipped
    std::string skipped_reason;
};

struct SearchResult {
    Policy best_policy;
    Estimate best_eta;
    Objective objective = Objective::minimize;
    std::uint64_t evaluated = 0;
    std::uint64_t skipped = 0;
    std::optional<double> runner_up_gap; // |second best - best|, absent with a single candidate
    std::optional<CmuCheck> cmu;         // queue models only
    std::vector<Candidate> candidates;   // enumeration order
};

/// Evaluates every prefix-L policy with the given tail. Candidates that are
/// unstable or have a zero service rate are skipped and counted; ties go to
/// the earliest candidate in enumeration order.
SearchResult exhaustive_search(const PolicyEvaluator& evaluator, long length, const TailRule& tail,
                               const SearchOptions& opts = {});

/// Group indices ordered by c_k/mu_k ascending, ties to the smaller index.
std::vector<int> cmu_priority(const GroupServerModel& model);

/**
 * Policy switching servers on in c/mu priority order: server s (groups
 * expanded into single servers, highest priority first) is on at state n iff
 * n > thresholds[s]. States beyond the largest threshold use all-on.
 */
Policy cmu_policy(const GroupServerModel& model, const std::vector<long>& thresholds);

/// Checks the priority property at every prefix state and at the tail action.
CmuCheck verify_cmu(const GroupServerModel& model, const Policy& u);

} // namespace cmdp
