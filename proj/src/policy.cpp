#include "cmdp/policy.hpp"

#include "cmdp/error.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <charconv>
#include <cmath>
#include <sstream>

namespace cmdp {

namespace {

std::atomic<std::uint64_t> next_space_id{1};

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

int parse_int(std::string_view s, std::string_view context) {
    s = trim(s);
    int value = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw ModelError("invalid action component '" + std::string(s) + "' in " + std::string(context));
    return value;
}

Action parse_action(std::string_view token) {
    token = trim(token);
    if (token.empty()) throw ModelError("empty action in policy literal");
    if (token.front() != '(') return Action(parse_int(token, "action"));
    if (token.back() != ')') throw ModelError("unterminated action tuple '" + std::string(token) + "'");
    token = token.substr(1, token.size() - 2);
    std::vector<int> parts;
    while (true) {
        const auto bar = token.find('|');
        parts.push_back(parse_int(token.substr(0, bar), "action tuple"));
        if (bar == std::string_view::npos) break;
        token.remove_prefix(bar + 1);
    }
    return Action(std::move(parts));
}

} // namespace

std::string Action::to_string() const {
    if (parts_.size() == 1) return std::to_string(parts_[0]);
    std::string out = "(";
    for (std::size_t k = 0; k < parts_.size(); ++k) {
        if (k) out += '|';
        out += std::to_string(parts_[k]);
    }
    return out + ")";
}

ActionSpace::ActionSpace() : id_(next_space_id.fetch_add(1)) {}

bool ActionSpace::allows(long state, const Action& a) const {
    if (state < 0) return false;
    const auto set = actions_at(state);
    return std::find(set.begin(), set.end(), a) != set.end();
}

void ActionSpace::validate_policy(const Policy&) const {}

UniformActionSpace::UniformActionSpace(int count) {
    if (count < 1) throw ModelError("action count must be positive");
    for (int a = 0; a < count; ++a) actions_.emplace_back(a);
}

std::span<const Action> UniformActionSpace::actions_at(long) const { return actions_; }

std::string to_string(const TailRule& tail) {
    if (const auto* c = std::get_if<ConstantTail>(&tail)) return "constant(" + c->action.to_string() + ")";
    return "all-on";
}

TailRule parse_tail_rule(std::string_view text) {
    text = trim(text);
    if (text == "all-on") return AllOnTail{};
    constexpr std::string_view head = "constant(";
    if (text.starts_with(head) && text.ends_with(")")) {
        return ConstantTail{parse_action(text.substr(head.size(), text.size() - head.size() - 1))};
    }
    throw ModelError("unknown tail rule '" + std::string(text) + "' (expected constant(a) or all-on)");
}

Policy::Policy(std::vector<Action> prefix, TailRule tail, std::string label)
    : prefix_(std::move(prefix)), tail_(std::move(tail)), label_(std::move(label)) {
    if (const auto* c = std::get_if<ConstantTail>(&tail_)) resolved_tail_ = c->action;
}

Policy Policy::parse(std::string_view literal) {
    std::optional<std::vector<Action>> prefix;
    std::optional<TailRule> tail;
    std::string label;

    std::string_view rest = literal;
    while (!trim(rest).empty()) {
        const auto semi = rest.find(';');
        const auto field = trim(rest.substr(0, semi));
        rest = semi == std::string_view::npos ? std::string_view{} : rest.substr(semi + 1);
        if (field.empty()) continue;

        const auto eq = field.find('=');
        if (eq == std::string_view::npos)
            throw ModelError("policy field '" + std::string(field) + "' lacks '='");
        const auto key = trim(field.substr(0, eq));
        const auto value = trim(field.substr(eq + 1));

        if (key == "prefix") {
            if (value.size() < 2 || value.front() != '[' || value.back() != ']')
                throw ModelError("prefix must be a bracketed list");
            std::vector<Action> actions;
            auto body = trim(value.substr(1, value.size() - 2));
            while (!body.empty()) {
                const auto comma = body.find(',');
                actions.push_back(parse_action(body.substr(0, comma)));
                if (comma == std::string_view::npos) break;
                body.remove_prefix(comma + 1);
                if (trim(body).empty()) throw ModelError("trailing comma in prefix list");
            }
            prefix = std::move(actions);
        } else if (key == "tail") {
            tail = parse_tail_rule(value);
        } else if (key == "label") {
            label = std::string(value);
        } else {
            throw ModelError("unknown policy field '" + std::string(key) + "'");
        }
    }
    if (!prefix) throw ModelError("policy literal requires a prefix list");
    if (!tail) throw ModelError("policy literal requires a tail rule");
    return Policy(std::move(*prefix), *tail, std::move(label));
}

std::string Policy::to_string() const {
    std::string out = "prefix=[";
    for (std::size_t i = 0; i < prefix_.size(); ++i) {
        if (i) out += ',';
        out += prefix_[i].to_string();
    }
    out += "];tail=" + cmdp::to_string(tail_);
    if (!label_.empty()) out += ";label=" + label_;
    return out;
}

std::uint64_t Policy::bound_to() const {
    if (!space_) throw ModelError("policy is not bound to a model");
    return *space_;
}

Policy Policy::bind(const ActionSpace& space, bool model_checks) const {
    Policy out = *this;
    if (std::holds_alternative<AllOnTail>(tail_)) {
        const auto all = space.all_on();
        if (!all) throw ModelError("tail rule all-on is not defined for this model");
        out.resolved_tail_ = *all;
    }
    for (long i = 0; i < prefix_length(); ++i) {
        if (!space.allows(i, prefix_[static_cast<std::size_t>(i)]))
            throw ModelError("action " + prefix_[static_cast<std::size_t>(i)].to_string() +
                             " is not admissible at state " + std::to_string(i));
    }
    // Action sets are identical from uniform_from() on, so checking up to that
    // state covers the whole tail.
    const long last = std::max(prefix_length(), space.uniform_from());
    for (long s = prefix_length(); s <= last; ++s) {
        if (!space.allows(s, *out.resolved_tail_))
            throw ModelError("tail action " + out.resolved_tail_->to_string() + " is not admissible at state " +
                             std::to_string(s));
    }
    out.space_ = space.space_id();
    if (model_checks) space.validate_policy(out);
    return out;
}

const Action& Policy::action_at(long state) const {
    if (state < 0) throw ModelError("negative state");
    if (state < prefix_length()) return prefix_[static_cast<std::size_t>(state)];
    return tail_action();
}

const Action& Policy::tail_action() const {
    if (!resolved_tail_) throw ModelError("tail rule " + cmdp::to_string(tail_) + " is unresolved; bind the policy");
    return *resolved_tail_;
}

MetricParams::MetricParams(double r) : r_(r) {
    if (!(r > 0.0 && r < 0.5)) throw ModelError("metric parameter r must lie in (0, 0.5)");
}

namespace {

void require_same_space(const Policy& u1, const Policy& u2) {
    if (!u1.is_bound() || !u2.is_bound()) throw ModelError("distance requires policies bound to a model");
    if (u1.bound_to() != u2.bound_to()) throw ModelError("policies are bound to different models");
}

} // namespace

double distance(const Policy& u1, const Policy& u2, const MetricParams& params) {
    require_same_space(u1, u2);
    const double r = params.r();
    const long horizon = std::max(u1.prefix_length(), u2.prefix_length());
    double d = 0.0;
    for (long i = 0; i < horizon; ++i) {
        if (u1.action_at(i) != u2.action_at(i)) d += std::pow(r, static_cast<double>(i));
    }
    // Both tails are constant past the horizon: they agree everywhere or
    // disagree everywhere.
    if (u1.tail_action() != u2.tail_action()) d += std::pow(r, static_cast<double>(horizon)) / (1.0 - r);
    return d;
}

bool in_ball(const Policy& u, const Policy& center, double eps, const MetricParams& params) {
    if (!(eps > 0.0)) throw ModelError("ball radius must be positive");
    return distance(u, center, params) < eps;
}

long long prefix_agreement(const Policy& u1, const Policy& u2) {
    require_same_space(u1, u2);
    const long horizon = std::max(u1.prefix_length(), u2.prefix_length());
    for (long i = 0; i < horizon; ++i) {
        if (u1.action_at(i) != u2.action_at(i)) return static_cast<long long>(i) - 1;
    }
    if (u1.tail_action() != u2.tail_action()) return static_cast<long long>(horizon) - 1;
    return kAgreeForever;
}

bool extensionally_equal(const Policy& u1, const Policy& u2) {
    return prefix_agreement(u1, u2) == kAgreeForever;
}

PrefixEnumerator::PrefixEnumerator(const ActionSpace& space, long length, TailRule tail, std::uint64_t cap)
    : space_(&space), tail_(std::move(tail)) {
    if (length < 0) throw ModelError("prefix length must be nonnegative");
    for (long i = 0; i < length; ++i) {
        const auto set = space.actions_at(i);
        if (set.empty()) throw ModelError("empty action set at state " + std::to_string(i));
        if (cardinality_ > cap / set.size()) {
            throw SearchSpaceError("search space too large: more than " + std::to_string(cap) +
                                   " policies with prefix length " + std::to_string(length));
        }
        cardinality_ *= set.size();
        choices_.push_back(set);
    }
    if (cardinality_ > cap) throw SearchSpaceError("search space too large");
    odometer_.assign(choices_.size(), 0);
}

std::optional<Policy> PrefixEnumerator::next() {
    if (done_) return std::nullopt;
    std::vector<Action> prefix;
    prefix.reserve(choices_.size());
    for (std::size_t i = 0; i < choices_.size(); ++i) prefix.push_back(choices_[i][odometer_[i]]);
    Policy out = Policy(std::move(prefix), tail_).bind(*space_, false);

    // Advance: last state varies fastest.
    std::size_t pos = odometer_.size();
    while (pos > 0) {
        --pos;
        if (++odometer_[pos] < choices_[pos].size()) return out;
        odometer_[pos] = 0;
    }
    done_ = true;
    return out;
}

std::vector<Policy> enumerate_prefixes(const ActionSpace& space, long length, const TailRule& tail,
                                       std::uint64_t cap) {
    PrefixEnumerator it(space, length, tail, cap);
    std::vector<Policy> out;
    out.reserve(static_cast<std::size_t>(it.cardinality()));
    while (auto p = it.next()) out.push_back(std::move(*p));
    return out;
}

} // namespace cmdp
