#pragma once

#include "cmdp/policy.hpp"

#include <optional>
#include <string>
#include <vector>

namespace cmdp {

enum class Objective { minimize, maximize };

/**
 * Deterministic line chain on states 1, 2, ...: action 0 stays put and earns
 * the stay payoff f0(i), action 1 advances to i + 1 and earns 0. The chain
 * starts at state 1.
 *
 * Policy position i is chain state i. Position 0 is a placeholder whose only
 * action is 1, so prefix literals line up with state numbers.
 */
class LineChainModel final : public ActionSpace {
  public:
    enum class Payoff {
        inverse,    // f0(i) = 1/i
        complement, // f0(i) = 1 - 1/i
    };

    LineChainModel(Payoff payoff, Objective objective, std::string name);

    /// f0 = 1/i, costs minimised.
    static LineChainModel example1();
    /// f0 = 1 - 1/i, rewards maximised.
    static LineChainModel example2();

    double stay_payoff(long state) const;
    Payoff payoff() const noexcept { return payoff_; }
    Objective objective() const noexcept { return objective_; }
    const std::string& name() const noexcept { return name_; }

    std::span<const Action> actions_at(long state) const override;
    long uniform_from() const override { return 1; }

  private:
    Payoff payoff_;
    Objective objective_;
    std::string name_;
    std::vector<Action> placeholder_;
    std::vector<Action> actions_;
};

/// First state i >= 1 with u(i) = 0, i.e. where the chain started at 1 gets
/// absorbed; nullopt when the chain drifts to infinity.
std::optional<long> first_stay_state(const Policy& u);

/// Long-run average payoff from state 1: f0(i*) if the chain is absorbed at
/// i*, otherwise 0.
double eta_line(const LineChainModel& model, const Policy& u);

struct StayClass {
    std::optional<long> stay_state; // nullopt: drift class
    double eta = 0.0;
    std::uint64_t policies = 0;     // prefix-L policies with either constant tail in this class
};

struct SupremumGapReport {
    long length = 0;
    double max_stationary = 0.0;
    std::optional<long> argmax_stay_state;
    double supremum = 1.0;
    double gap = 1.0;
    std::vector<StayClass> classes;
};

/// Best stationary reward over prefix-L policies with tails constant(0) and
/// constant(1), grouped by absorbing state, against the supremum 1.
SupremumGapReport stationary_supremum_gap(const LineChainModel& model, long length);

/// Running average of the first T payoffs of the history-dependent policy that
/// stays i times at state i and then advances once.
double history_stream_average(const LineChainModel& model, long T);

/// Running averages at the end of blocks 1..blocks of the same stream.
std::vector<double> history_block_averages(const LineChainModel& model, long blocks);

} // namespace cmdp
