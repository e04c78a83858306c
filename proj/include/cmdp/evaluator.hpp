#pragma once

#include "cmdp/generic_ctmdp.hpp"
#include "cmdp/line_chain.hpp"
#include "cmdp/queue_model.hpp"

#include <memory>

namespace cmdp {

struct Estimate {
    double value = 0.0;
    double error = 0.0;
    bool certified = false; // error is a proven bound rather than an estimate
};

/// Bound on |eta(v) - eta(u)| for a pair of policies.
struct PairBound {
    double eta_u = 0.0;
    double eta_v = 0.0;
    double diff = 0.0;  // eta(v) - eta(u)
    double bound = 0.0;
    bool rigorous = false;
};

/// Uniform view over the model kinds for search and neighbourhood scans.
class PolicyEvaluator {
  public:
    virtual ~PolicyEvaluator() = default;
    virtual const ActionSpace& space() const = 0;
    virtual Objective objective() const { return Objective::minimize; }
    virtual Estimate evaluate(const Policy& u, double tol) const = 0;
    virtual PairBound pair_bound(const Policy& u, const Policy& v, double tol) const = 0;
};

/// Product-form engine; pair bounds come from the sigma decomposition.
class QueueEvaluator final : public PolicyEvaluator {
  public:
    explicit QueueEvaluator(GroupServerModel model) : model_(std::move(model)) {}
    const ActionSpace& space() const override { return model_; }
    const GroupServerModel& model() const noexcept { return model_; }
    Estimate evaluate(const Policy& u, double tol) const override;
    PairBound pair_bound(const Policy& u, const Policy& v, double tol) const override;

  private:
    GroupServerModel model_;
};

/// Truncation engine. Pair bounds are the two error estimates added to the
/// observed difference, rigorous only when both remainders are certified.
class GenericEvaluator final : public PolicyEvaluator {
  public:
    explicit GenericEvaluator(std::shared_ptr<const GenericCtmdpModel> model, SolveOptions opts = {})
        : model_(std::move(model)), opts_(opts) {}
    const ActionSpace& space() const override { return *model_; }
    const GenericCtmdpModel& model() const noexcept { return *model_; }
    Estimate evaluate(const Policy& u, double tol) const override;
    PairBound pair_bound(const Policy& u, const Policy& v, double tol) const override;

  private:
    std::shared_ptr<const GenericCtmdpModel> model_;
    SolveOptions opts_;
};

/// Exact absorption values for the line chains.
class LineEvaluator final : public PolicyEvaluator {
  public:
    explicit LineEvaluator(LineChainModel model) : model_(std::move(model)) {}
    const ActionSpace& space() const override { return model_; }
    const LineChainModel& model() const noexcept { return model_; }
    Objective objective() const override { return model_.objective(); }
    Estimate evaluate(const Policy& u, double tol) const override;
    PairBound pair_bound(const Policy& u, const Policy& v, double tol) const override;

  private:
    LineChainModel model_;
};

} // namespace cmdp
