#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace cmdp {

/**
 * An action identifier. Indexed action sets use a single component; queue
 * models use one component per server group (the number of servers on).
 */
class Action {
  public:
    Action() = default;
    explicit Action(int index) : parts_{index} {}
    explicit Action(std::vector<int> parts) : parts_(std::move(parts)) {}

    std::span<const int> parts() const noexcept { return parts_; }
    std::size_t size() const noexcept { return parts_.size(); }
    int operator[](std::size_t k) const { return parts_.at(k); }

    /// "3" for single-component actions, "(1|0)" otherwise.
    std::string to_string() const;

    friend bool operator==(const Action&, const Action&) = default;
    friend auto operator<=>(const Action&, const Action&) = default;

  private:
    std::vector<int> parts_;
};

class Policy;

/**
 * Per-state finite action sets of a countable-state model. Every model type
 * derives from this; policies are bound against it before any metric or
 * evaluation work.
 *
 * Copies share the identity token, so a policy bound to one copy is bound to
 * all of them.
 */
class ActionSpace {
  public:
    virtual ~ActionSpace() = default;

    /// Actions available at `state`, in the canonical (enumeration) order.
    virtual std::span<const Action> actions_at(long state) const = 0;

    /// States at or beyond this index share one action set.
    virtual long uniform_from() const = 0;

    /// The "all-on" action, for models where that tail rule makes sense.
    virtual std::optional<Action> all_on() const { return std::nullopt; }

    std::uint64_t space_id() const noexcept { return id_; }

    bool allows(long state, const Action& a) const;

    /// Hook for model-specific admissibility checks run at binding time.
    virtual void validate_policy(const Policy& policy) const;

  protected:
    ActionSpace();
    explicit ActionSpace(std::uint64_t shared_id) noexcept : id_(shared_id) {}
    ActionSpace(const ActionSpace&) = default;
    ActionSpace& operator=(const ActionSpace&) = default;

  private:
    std::uint64_t id_;
};

/// The action set {0, 1, ..., count-1} at every state.
class UniformActionSpace final : public ActionSpace {
  public:
    explicit UniformActionSpace(int count);
    std::span<const Action> actions_at(long state) const override;
    long uniform_from() const override { return 0; }

  private:
    std::vector<Action> actions_;
};

struct ConstantTail {
    Action action;
    friend bool operator==(const ConstantTail&, const ConstantTail&) = default;
};

struct AllOnTail {
    friend bool operator==(const AllOnTail&, const AllOnTail&) = default;
};

/// Rule assigning an action to every state past the explicit prefix.
using TailRule = std::variant<ConstantTail, AllOnTail>;

std::string to_string(const TailRule& tail);
TailRule parse_tail_rule(std::string_view text);

/**
 * A stationary policy: explicit actions for states 0..L-1 and a tail rule for
 * every state >= L.
 *
 * Literal syntax: `prefix=[a0,a1,...];tail=constant(a)` or `tail=all-on`,
 * optionally followed by `;label=name`. Actions are integers or tuples such
 * as `(1|0)`.
 */
class Policy {
  public:
    Policy(std::vector<Action> prefix, TailRule tail, std::string label = {});

    static Policy parse(std::string_view literal);
    std::string to_string() const;

    const std::vector<Action>& prefix() const noexcept { return prefix_; }
    long prefix_length() const noexcept { return static_cast<long>(prefix_.size()); }
    const TailRule& tail() const noexcept { return tail_; }
    const std::string& label() const noexcept { return label_; }
    void set_label(std::string label) { label_ = std::move(label); }

    bool is_bound() const noexcept { return space_.has_value(); }
    std::uint64_t bound_to() const;

    /// Validates every prefix entry and the tail against `space`; resolves
    /// `all-on`. Throws ModelError on any inadmissible action. The model's
    /// own admissibility hook runs unless `model_checks` is false.
    Policy bind(const ActionSpace& space, bool model_checks = true) const;

    /// Action used at `state`. Requires a resolved tail for states >= L.
    const Action& action_at(long state) const;
    const Action& tail_action() const;

  private:
    std::vector<Action> prefix_;
    TailRule tail_;
    std::string label_;
    std::optional<Action> resolved_tail_;
    std::optional<std::uint64_t> space_;
};

/// Metric parameter r of the weighted disagreement distance; 0 < r < 0.5.
class MetricParams {
  public:
    explicit MetricParams(double r = 0.1);
    double r() const noexcept { return r_; }

  private:
    double r_;
};

/// prefix_agreement result for extensionally equal policies.
inline constexpr long long kAgreeForever = std::numeric_limits<long long>::max();

/// Sum over states i of 1[u1(i) != u2(i)] r^i, exact up to rounding.
double distance(const Policy& u1, const Policy& u2, const MetricParams& params);

/// distance(u, center) < eps.
bool in_ball(const Policy& u, const Policy& center, double eps, const MetricParams& params);

/// Largest k with u1(i) == u2(i) for all i <= k: -1 if they differ at state
/// 0, kAgreeForever if they never differ.
long long prefix_agreement(const Policy& u1, const Policy& u2);

bool extensionally_equal(const Policy& u1, const Policy& u2);

inline constexpr std::uint64_t kDefaultEnumerationCap = 1u << 22;

/**
 * Lazily yields every policy with prefix length L over `space` (bound, with
 * the given tail), in lexicographic order of per-state action indices with
 * state 0 most significant.
 */
class PrefixEnumerator {
  public:
    PrefixEnumerator(const ActionSpace& space, long length, TailRule tail,
                     std::uint64_t cap = kDefaultEnumerationCap);

    std::uint64_t cardinality() const noexcept { return cardinality_; }
    std::optional<Policy> next();

  private:
    const ActionSpace* space_;
    TailRule tail_;
    std::vector<std::span<const Action>> choices_;
    std::vector<std::size_t> odometer_;
    std::uint64_t cardinality_ = 1;
    bool done_ = false;
};

std::vector<Policy> enumerate_prefixes(const ActionSpace& space, long length, const TailRule& tail,
                                       std::uint64_t cap = kDefaultEnumerationCap);

} // namespace cmdp
