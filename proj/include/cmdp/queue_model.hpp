#pragma once

#include "cmdp/policy.hpp"

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cmdp {

/// A value together with a certified bound on its absolute error.
struct Bounded {
    double value = 0.0;
    double bound = 0.0;
};

/// One homogeneous group of parallel exponential servers.
struct ServerGroup {
    int servers = 1;   // M_k
    double rate = 1.0; // mu_k, per server
    double cost = 0.0; // c_k, per server on, per unit time
};

/**
 * Holding cost rate h(n). Every kind except `exponential` carries a
 * polynomial majorant |h(n)| <= sum_j m_j n^j that drives the certified
 * remainder of the average cost.
 */
class HoldingCost {
  public:
    /// h(n) = sum_j coeffs[j] n^j
    static HoldingCost polynomial(std::vector<double> coeffs);
    /// h(n) = (-1)^n n, unbounded above and below.
    static HoldingCost signed_linear();
    /// h(n) = base^n; declared super-polynomial, so average costs are refused.
    static HoldingCost exponential(double base);
    static HoldingCost custom(std::function<double(long)> fn, std::optional<std::vector<double>> majorant,
                              std::string name);

    double operator()(long n) const { return fn_(n); }
    const std::optional<std::vector<double>>& majorant() const noexcept { return majorant_; }
    const std::string& describe() const noexcept { return name_; }

  private:
    HoldingCost(std::function<double(long)> fn, std::optional<std::vector<double>> majorant, std::string name);

    std::function<double(long)> fn_;
    std::optional<std::vector<double>> majorant_;
    std::string name_;
};

/**
 * Single-buffer queue with Poisson arrivals and K groups of servers switched
 * on and off per state. The state is the number of customers; an action at
 * state n lists how many servers of each group are on.
 *
 * Groups are stored in canonical order, fastest service rate first (stable
 * for ties); policy tuples refer to that order. For n >= 1 the first group
 * must have at least `action_floor` servers on.
 */
class GroupServerModel final : public ActionSpace {
  public:
    GroupServerModel(double arrival_rate, std::vector<ServerGroup> groups, HoldingCost holding,
                     int action_floor = 1);

    double arrival_rate() const noexcept { return lambda_; }
    std::span<const ServerGroup> groups() const noexcept { return groups_; }
    const HoldingCost& holding() const noexcept { return holding_; }
    int action_floor() const noexcept { return floor_; }

    /// sum_k a_k mu_k. Throws ModelError for components outside [0, M_k].
    double service_rate(const Action& a) const;
    /// sum_k c_k a_k
    double operating_cost(const Action& a) const;
    /// f(n, a) = h(n) + sum_k c_k a_k
    double cost(long n, const Action& a) const { return holding_(n) + operating_cost(a); }

    std::span<const Action> actions_at(long state) const override;
    long uniform_from() const override { return 1; }
    std::optional<Action> all_on() const override;
    void validate_policy(const Policy& policy) const override;

  private:
    void check_action(const Action& a) const;

    double lambda_;
    std::vector<ServerGroup> groups_;
    HoldingCost holding_;
    int floor_;
    std::vector<Action> idle_actions_; // state 0
    std::vector<Action> busy_actions_; // states >= 1
};

/**
 * Geometric drift certificate. When `stable`, every state n > `threshold` has
 * u(n)mu > lambda and every ratio lambda/(u(n)mu) past the last violating
 * state is at most `rho0` < 1. `threshold` is the last explicit prefix state
 * (0 when the prefix is empty). When not stable, `first_violation` names the
 * first tail state where the drift condition fails.
 */
struct StabilityCertificate {
    bool stable = false;
    double rho0 = 1.0;
    long threshold = 0;
    long first_violation = -1;
};

StabilityCertificate stability_certificate(const GroupServerModel& model, const Policy& u);

struct QueueSteadyState {
    std::vector<double> pi;        // states 0..truncation
    double normalizer = 0.0;       // G
    double log_normalizer = 0.0;   // log(1 + G)
    long truncation = 0;
    double tail_mass_bound = 0.0;  // certified bound on sum_{n > truncation} pi(n)
    std::optional<double> rho0;
    long threshold = 0;
    std::vector<double> cost;      // f(n, u(n)), filled by evaluate()
    std::optional<Bounded> eta;    // filled by evaluate()
};

/**
 * Product-form stationary distribution. The normalizer includes the exact
 * geometric sum of the constant tail rule; the truncation level is the first
 * state past the certificate threshold whose rho0-majorised tail mass is at
 * most `tol`.
 */
QueueSteadyState steady_state(const GroupServerModel& model, const Policy& u, double tol);

/// steady_state plus the long-run average cost, with the window extended until
/// the certified remainder of the cost series is at most `tol`.
QueueSteadyState evaluate(const GroupServerModel& model, const Policy& u, double tol);

/// eta(u) with its certified truncation bound.
Bounded average_cost(const GroupServerModel& model, const Policy& u, double tol);

/// delta(n, u) = sum_{m > n} prod_{l <= m} lambda/(u(l)mu).
Bounded delta(const GroupServerModel& model, const Policy& u, long n);

/// log of prod_{l=1..n} lambda/(u(l)mu); -inf when lambda = 0 and n >= 1.
double log_partial_product(const GroupServerModel& model, const Policy& u, long n);

} // namespace cmdp
