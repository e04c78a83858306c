#include "cmdp/line_chain.hpp"

#include "cmdp/error.hpp"

namespace cmdp {

LineChainModel::LineChainModel(Payoff payoff, Objective objective, std::string name)
    : payoff_(payoff), objective_(objective), name_(std::move(name)) {
    placeholder_.emplace_back(1);
    actions_.emplace_back(0);
    actions_.emplace_back(1);
}

LineChainModel LineChainModel::example1() {
    return LineChainModel(Payoff::inverse, Objective::minimize, "example1");
}

LineChainModel LineChainModel::example2() {
    return LineChainModel(Payoff::complement, Objective::maximize, "example2");
}

double LineChainModel::stay_payoff(long state) const {
    if (state < 1) throw ModelError("line chain states start at 1");
    const double inv = 1.0 / static_cast<double>(state);
    return payoff_ == Payoff::inverse ? inv : 1.0 - inv;
}

std::span<const Action> LineChainModel::actions_at(long state) const {
    return state == 0 ? std::span<const Action>(placeholder_) : std::span<const Action>(actions_);
}

std::optional<long> first_stay_state(const Policy& u) {
    const Action stay(0);
    for (long i = 1; i < u.prefix_length(); ++i)
        if (u.action_at(i) == stay) return i;
    if (u.tail_action() == stay) return std::max(u.prefix_length(), 1L);
    return std::nullopt;
}

double eta_line(const LineChainModel& model, const Policy& u) {
    if (!u.is_bound() || u.bound_to() != model.space_id()) throw ModelError("policy is not bound to this line chain");
    const auto stay = first_stay_state(u);
    return stay ? model.stay_payoff(*stay) : 0.0;
}

SupremumGapReport stationary_supremum_gap(const LineChainModel& model, long length) {
    if (length < 1) throw ModelError("prefix length must be at least 1");
    SupremumGapReport report;
    report.length = length;
    // Class sizes saturate to 0 once they no longer fit in 64 bits.
    auto count = [](long free_states) -> std::uint64_t {
        return free_states >= 64 ? 0 : std::uint64_t{1} << free_states;
    };
    // Stay at j < L: states j+1..L-1 and the tail are free.
    for (long j = 1; j < length; ++j)
        report.classes.push_back({j, model.stay_payoff(j), count(length - j)});
    report.classes.push_back({length, model.stay_payoff(length), 1});
    report.classes.push_back({std::nullopt, 0.0, 1});

    const bool maximize = model.objective() == Objective::maximize;
    bool first = true;
    for (const auto& c : report.classes) {
        const bool better = maximize ? c.eta > report.max_stationary : c.eta < report.max_stationary;
        if (first || better) {
            report.max_stationary = c.eta;
            report.argmax_stay_state = c.stay_state;
            first = false;
        }
    }
    report.supremum = model.payoff() == LineChainModel::Payoff::complement ? 1.0 : 0.0;
    report.gap = report.supremum - report.max_stationary;
    return report;
}

namespace {

template <class Visit>
void walk_stream(const LineChainModel& model, long T, Visit visit) {
    long t = 0;
    for (long block = 1; t < T; ++block) {
        const double stay = model.stay_payoff(block);
        for (long s = 0; s < block && t < T; ++s, ++t) visit(stay);
        if (t < T) {
            visit(0.0);
            ++t;
        }
    }
}

} // namespace

double history_stream_average(const LineChainModel& model, long T) {
    if (T < 1) throw ModelError("stream length T must be at least 1");
    double total = 0.0;
    walk_stream(model, T, [&](double payoff) { total += payoff; });
    return total / static_cast<double>(T);
}

std::vector<double> history_block_averages(const LineChainModel& model, long blocks) {
    if (blocks < 1) throw ModelError("block count must be at least 1");
    std::vector<double> averages;
    double total = 0.0;
    long steps = 0;
    for (long block = 1; block <= blocks; ++block) {
        total += static_cast<double>(block) * model.stay_payoff(block);
        steps += block + 1;
        averages.push_back(total / static_cast<double>(steps));
    }
    return averages;
}

} // namespace cmdp
