#pragma once

#include "cmdp/policy.hpp"
#include "cmdp/queue_model.hpp"

#include <map>
#include <optional>
#include <utility>
#include <vector>

namespace cmdp {

/// Declared bound nu(i) <= coeff * ratio^i on un-normalised stationary vectors
/// (anchored at nu(0) = 1), uniform over policies.
struct GeometricMajorant {
    double coeff = 1.0;
    double ratio = 0.5;

    /// sum_{i > k} coeff * ratio^i
    double tail_sum(long k) const;
};

/**
 * Continuous-time MDP on states {0, 1, ...} with finite action sets.
 *
 * rate(i, a, j) returns q^a(i, j), including the diagonal. Implementations
 * declare a uniform bound on |q| and the backward band M: q^a(j, i) = 0
 * whenever j > i + M. Implementations must be reentrant.
 */
class GenericCtmdpModel : public ActionSpace {
  public:
    virtual double rate(long from, const Action& a, long to) const = 0;
    virtual double cost(long state, const Action& a) const = 0;
    virtual double rate_bound() const = 0;
    virtual int band() const = 0;

    /// Largest upward jump, if known. Unknown reach makes assembly dense.
    virtual std::optional<int> forward_reach() const { return std::nullopt; }
    virtual std::optional<GeometricMajorant> nu_majorant() const { return std::nullopt; }
    /// Coefficients m_j with |f(i, a)| <= sum_j m_j i^j for all i, a.
    virtual std::optional<std::vector<double>> cost_majorant() const { return std::nullopt; }

  protected:
    using ActionSpace::ActionSpace;
};

/// Violations found by validate_generic_model on a finite window.
struct ModelCheck {
    bool ok = true;
    std::vector<std::string> violations;
};

/// Checks generator rows sum to zero, off-diagonal rates are nonnegative,
/// |q| <= Lambda and the band condition, for states 0..horizon.
ModelCheck validate_generic_model(const GenericCtmdpModel& model, long horizon);

/**
 * Rates given explicitly for states 0..horizon; every state i > horizon
 * repeats the pattern of state `horizon` shifted by i - horizon. The same
 * action identifiers are available at every state. Costs are
 * f(i, a) = sum_j state_coeffs[j] i^j + action_costs[a].
 */
class TableCtmdpModel final : public GenericCtmdpModel {
  public:
    struct Entry {
        long from;
        int action;
        long to;
        double rate;
    };

    TableCtmdpModel(long horizon, std::vector<int> actions, std::vector<Entry> entries, double rate_bound,
                    std::optional<int> declared_band, std::vector<double> state_cost_coeffs,
                    std::vector<double> action_costs, std::optional<GeometricMajorant> majorant = std::nullopt);

    double rate(long from, const Action& a, long to) const override;
    double cost(long state, const Action& a) const override;
    double rate_bound() const override { return rate_bound_; }
    int band() const override { return band_; }
    std::optional<int> forward_reach() const override { return reach_; }
    std::optional<GeometricMajorant> nu_majorant() const override { return majorant_; }
    std::optional<std::vector<double>> cost_majorant() const override;

    std::span<const Action> actions_at(long state) const override;
    long uniform_from() const override { return 0; }

    long horizon() const noexcept { return horizon_; }

  private:
    std::size_t action_index(const Action& a) const;

    long horizon_;
    std::vector<Action> actions_;
    // (state, action index) -> list of (destination offset, rate), off-diagonal only
    std::vector<std::vector<std::pair<long, double>>> rows_;
    double rate_bound_;
    int band_ = 1;
    int reach_ = 0;
    std::vector<double> state_coeffs_;
    std::vector<double> action_costs_;
    std::optional<GeometricMajorant> majorant_;
};

/// The birth-death generator induced by a group-server queue. Shares the
/// queue's action space, so policies bound to the queue apply directly.
class BirthDeathCtmdp final : public GenericCtmdpModel {
  public:
    explicit BirthDeathCtmdp(GroupServerModel queue);

    double rate(long from, const Action& a, long to) const override;
    double cost(long state, const Action& a) const override { return queue_.cost(state, a); }
    double rate_bound() const override;
    int band() const override { return 1; }
    std::optional<int> forward_reach() const override { return 1; }
    std::optional<GeometricMajorant> nu_majorant() const override;
    std::optional<std::vector<double>> cost_majorant() const override;

    std::span<const Action> actions_at(long state) const override { return queue_.actions_at(state); }
    long uniform_from() const override { return queue_.uniform_from(); }
    std::optional<Action> all_on() const override { return queue_.all_on(); }
    void validate_policy(const Policy& policy) const override { queue_.validate_policy(policy); }

    const GroupServerModel& queue() const noexcept { return queue_; }

  private:
    GroupServerModel queue_;
};

/// Square banded matrix with right-hand side; entry (i, j) is stored when
/// i - lower <= j <= i + upper.
class BandedSystem {
  public:
    BandedSystem(std::size_t size, int lower, int upper);

    std::size_t size() const noexcept { return n_; }
    int lower() const noexcept { return kl_; }
    int upper() const noexcept { return ku_; }

    double get(std::size_t i, std::size_t j) const;
    void set(std::size_t i, std::size_t j, double value);
    std::vector<double>& rhs() noexcept { return rhs_; }
    const std::vector<double>& rhs() const noexcept { return rhs_; }

    /// Gaussian elimination with partial pivoting inside the band. Throws
    /// NumericalError when the matrix is singular.
    std::vector<double> solve() const;

  private:
    bool in_band(std::size_t i, std::size_t j) const;

    std::size_t n_;
    int kl_;
    int ku_;
    std::vector<double> band_; // row-major, width kl + ku + 1
    std::vector<double> rhs_;
};

/**
 * Rows i = 0..K of sum_{j <= K} nu(j) q^{u(j)}(j, i) = 0, with row 0 replaced
 * by the anchor nu(0) = 1.
 */
BandedSystem build_truncated_system(const GenericCtmdpModel& model, const Policy& u, long K);

struct SolveOptions {
    long k_cap = 1L << 16;
    long k_initial = 0; // 0: max(2M, 16)
};

struct NuSolution {
    std::vector<double> nu;      // anchored, states 0..window
    std::vector<double> pi;      // nu normalised over the window
    long truncation = 0;         // K of the final solve
    long window = 0;             // N = K / 2
    double residual = 0.0;       // max |balance row| over rows 0..K-M
    double error_estimate = 0.0; // max-norm change of nu over the compared window at the last doubling
    double window_tail_mass = 0.0; // share of sum nu beyond the window in the final solve
    std::optional<double> kappa_bound;
    std::vector<double> cost;    // filled by evaluate_generic()
    std::optional<Bounded> eta;  // filled by evaluate_generic()
    bool eta_tail_certified = false;
};

/// Un-normalised stationary vector by K-doubling until the first K/2 entries
/// and the window mass stabilise within `tol`.
NuSolution solve_nu(const GenericCtmdpModel& model, const Policy& u, double tol, const SolveOptions& opts = {});

/// solve_nu plus eta(u) = sum_{i <= N} pi(i) f(i, u(i)) and an error estimate.
NuSolution evaluate_generic(const GenericCtmdpModel& model, const Policy& u, double tol,
                            const SolveOptions& opts = {});

Bounded average_cost_generic(const GenericCtmdpModel& model, const Policy& u, double tol,
                             const SolveOptions& opts = {});

/// max_i |sum_j nu(j) q^{u(j)}(j, i)| over rows first..last.
double balance_residual(const GenericCtmdpModel& model, const Policy& u, const std::vector<double>& nu, long first,
                        long last);

} // namespace cmdp
