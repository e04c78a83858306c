#include "cmdp/queue_model.hpp"

#include "cmdp/error.hpp"
#include "cmdp/series.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cmdp {

HoldingCost::HoldingCost(std::function<double(long)> fn, std::optional<std::vector<double>> majorant,
                         std::string name)
    : fn_(std::move(fn)), majorant_(std::move(majorant)), name_(std::move(name)) {}

HoldingCost HoldingCost::polynomial(std::vector<double> coeffs) {
    if (coeffs.empty()) coeffs.push_back(0.0);
    std::vector<double> majorant;
    std::string name = "polynomial[";
    for (std::size_t j = 0; j < coeffs.size(); ++j) {
        if (!std::isfinite(coeffs[j])) throw ModelError("holding cost coefficients must be finite");
        majorant.push_back(std::abs(coeffs[j]));
        if (j) name += ',';
        name += std::to_string(coeffs[j]);
    }
    name += ']';
    auto fn = [c = coeffs](long n) { return polynomial_value(c, static_cast<double>(n)); };
    return HoldingCost(std::move(fn), std::move(majorant), std::move(name));
}

HoldingCost HoldingCost::signed_linear() {
    auto fn = [](long n) { return (n % 2 == 0 ? 1.0 : -1.0) * static_cast<double>(n); };
    return HoldingCost(std::move(fn), std::vector<double>{0.0, 1.0}, "signed_linear");
}

HoldingCost HoldingCost::exponential(double base) {
    if (!(base > 0.0)) throw ModelError("exponential holding cost needs a positive base");
    auto fn = [base](long n) { return std::pow(base, static_cast<double>(n)); };
    return HoldingCost(std::move(fn), std::nullopt, "exponential(" + std::to_string(base) + ")");
}

HoldingCost HoldingCost::custom(std::function<double(long)> fn, std::optional<std::vector<double>> majorant,
                                std::string name) {
    if (!fn) throw ModelError("custom holding cost needs a function");
    return HoldingCost(std::move(fn), std::move(majorant), std::move(name));
}

GroupServerModel::GroupServerModel(double arrival_rate, std::vector<ServerGroup> groups, HoldingCost holding,
                                   int action_floor)
    : lambda_(arrival_rate), groups_(std::move(groups)), holding_(std::move(holding)), floor_(action_floor) {
    if (!(lambda_ >= 0.0) || !std::isfinite(lambda_)) throw ModelError("arrival rate must be finite and >= 0");
    if (groups_.empty()) throw ModelError("a group-server queue needs at least one server group");
    for (const auto& g : groups_) {
        if (g.servers < 1) throw ModelError("every server group needs at least one server");
        if (!(g.rate > 0.0) || !std::isfinite(g.rate)) throw ModelError("service rates must be positive");
        if (!std::isfinite(g.cost)) throw ModelError("operating cost rates must be finite");
    }
    std::stable_sort(groups_.begin(), groups_.end(),
                     [](const ServerGroup& a, const ServerGroup& b) { return a.rate > b.rate; });
    if (floor_ < 0 || floor_ > groups_.front().servers)
        throw ModelError("action floor must lie between 0 and the size of the first group");

    std::vector<int> a(groups_.size(), 0);
    while (true) {
        Action act(a);
        idle_actions_.push_back(act);
        if (a[0] >= floor_) busy_actions_.push_back(act);
        std::size_t k = a.size();
        bool carry = true;
        while (carry && k > 0) {
            --k;
            if (++a[k] <= groups_[k].servers) {
                carry = false;
            } else {
                a[k] = 0;
            }
        }
        if (carry) break;
    }
}

void GroupServerModel::check_action(const Action& a) const {
    if (a.size() != groups_.size())
        throw ModelError("action " + a.to_string() + " has " + std::to_string(a.size()) + " components, model has " +
                         std::to_string(groups_.size()) + " groups");
    for (std::size_t k = 0; k < groups_.size(); ++k) {
        if (a[k] < 0 || a[k] > groups_[k].servers)
            throw ModelError("action " + a.to_string() + " exceeds the size of group " + std::to_string(k + 1));
    }
}

double GroupServerModel::service_rate(const Action& a) const {
    check_action(a);
    double rate = 0.0;
    for (std::size_t k = 0; k < groups_.size(); ++k) rate += a[k] * groups_[k].rate;
    return rate;
}

double GroupServerModel::operating_cost(const Action& a) const {
    check_action(a);
    double c = 0.0;
    for (std::size_t k = 0; k < groups_.size(); ++k) c += a[k] * groups_[k].cost;
    return c;
}

std::span<const Action> GroupServerModel::actions_at(long state) const {
    return state == 0 ? std::span<const Action>(idle_actions_) : std::span<const Action>(busy_actions_);
}

std::optional<Action> GroupServerModel::all_on() const {
    std::vector<int> a;
    for (const auto& g : groups_) a.push_back(g.servers);
    return Action(std::move(a));
}

void GroupServerModel::validate_policy(const Policy& policy) const {
    for (long n = 1; n < policy.prefix_length(); ++n) {
        if (service_rate(policy.action_at(n)) <= 0.0)
            throw NonErgodicPolicyError("zero aggregate service rate at state " + std::to_string(n));
    }
    if (service_rate(policy.tail_action()) <= 0.0)
        throw NonErgodicPolicyError("tail rule has zero aggregate service rate");
}

namespace {

void require_bound(const GroupServerModel& model, const Policy& u) {
    if (!u.is_bound() || u.bound_to() != model.space_id())
        throw ModelError("policy is not bound to this queue model");
}

double log_add(double a, double b) {
    if (a == -std::numeric_limits<double>::infinity()) return b;
    if (b == -std::numeric_limits<double>::infinity()) return a;
    const double hi = std::max(a, b);
    return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

// Log-domain partial products up to the end of the explicit prefix, and the
// exact normaliser obtained from the geometric sum over the constant tail.
struct ProductForm {
    std::vector<double> log_prod; // n = 0..prefix_end
    long prefix_end = 0;
    double log_tail_ratio = 0.0;
    double tail_ratio = 0.0;
    double log1p_g = 0.0;

    double log_product(long n) const {
        if (n <= prefix_end) return log_prod[static_cast<std::size_t>(n)];
        return log_prod.back() + static_cast<double>(n - prefix_end) * log_tail_ratio;
    }
    double pi(long n) const { return std::exp(log_product(n) - log1p_g); }
};

ProductForm product_form(const GroupServerModel& model, const Policy& u) {
    ProductForm pf;
    const double lambda = model.arrival_rate();
    pf.prefix_end = std::max(u.prefix_length() - 1, 0L);
    pf.tail_ratio = lambda / model.service_rate(u.tail_action());
    pf.log_tail_ratio = std::log(pf.tail_ratio);
    pf.log_prod.assign(static_cast<std::size_t>(pf.prefix_end) + 1, 0.0);
    double log_sum = 0.0;
    for (long n = 1; n <= pf.prefix_end; ++n) {
        const double ratio = lambda / model.service_rate(u.action_at(n));
        pf.log_prod[static_cast<std::size_t>(n)] = pf.log_prod[static_cast<std::size_t>(n) - 1] + std::log(ratio);
        log_sum = log_add(log_sum, pf.log_prod[static_cast<std::size_t>(n)]);
    }
    const double log_tail = pf.log_prod.back() + pf.log_tail_ratio - std::log1p(-pf.tail_ratio);
    pf.log1p_g = log_add(log_sum, log_tail);
    return pf;
}

constexpr long kMaxTruncation = 100'000'000;

StabilityCertificate checked_certificate(const GroupServerModel& model, const Policy& u) {
    auto cert = stability_certificate(model, u);
    if (!cert.stable)
        throw UnstablePolicyError("no stability certificate: drift condition fails at tail state " +
                                  std::to_string(cert.first_violation));
    return cert;
}

QueueSteadyState empty_queue(const GroupServerModel& model, const Policy& u) {
    QueueSteadyState s;
    s.pi = {1.0};
    s.rho0 = 0.0;
    s.threshold = std::max(u.prefix_length() - 1, 0L);
    s.cost = {model.cost(0, u.action_at(0))};
    return s;
}

} // namespace

StabilityCertificate stability_certificate(const GroupServerModel& model, const Policy& u) {
    require_bound(model, u);
    const double lambda = model.arrival_rate();
    const long L = u.prefix_length();
    StabilityCertificate cert;

    const double tail_rate = model.service_rate(u.tail_action());
    if (tail_rate <= 0.0) throw NonErgodicPolicyError("tail rule has zero aggregate service rate");
    std::vector<double> rates(static_cast<std::size_t>(std::max(L, 1L)), 0.0);
    long last_violation = 0;
    for (long n = 1; n < L; ++n) {
        const double rate = model.service_rate(u.action_at(n));
        if (rate <= 0.0) throw NonErgodicPolicyError("zero aggregate service rate at state " + std::to_string(n));
        rates[static_cast<std::size_t>(n)] = rate;
        if (rate <= lambda) last_violation = n;
    }
    if (tail_rate <= lambda) {
        cert.stable = false;
        cert.first_violation = std::max(L, 1L);
        return cert;
    }
    cert.stable = true;
    cert.rho0 = lambda / tail_rate;
    for (long n = last_violation + 1; n < L; ++n)
        cert.rho0 = std::max(cert.rho0, lambda / rates[static_cast<std::size_t>(n)]);
    cert.threshold = std::max({last_violation, L - 1, 0L});
    return cert;
}

QueueSteadyState steady_state(const GroupServerModel& model, const Policy& u, double tol) {
    if (!(tol > 0.0)) throw ModelError("tolerance must be positive");
    const auto cert = checked_certificate(model, u);
    if (model.arrival_rate() == 0.0) {
        auto s = empty_queue(model, u);
        s.cost.clear();
        return s;
    }
    const auto pf = product_form(model, u);
    const double tail_factor = cert.rho0 / (1.0 - cert.rho0);

    long n = std::max(cert.threshold, pf.prefix_end);
    while (pf.pi(n) * tail_factor > tol) {
        if (++n > kMaxTruncation) throw NumericalError("truncation level exceeds the hard cap");
    }

    QueueSteadyState s;
    s.truncation = n;
    s.pi.resize(static_cast<std::size_t>(n) + 1);
    for (long m = 0; m <= n; ++m) s.pi[static_cast<std::size_t>(m)] = pf.pi(m);
    s.log_normalizer = pf.log1p_g;
    s.normalizer = std::expm1(pf.log1p_g);
    s.tail_mass_bound = s.pi.back() * tail_factor;
    s.rho0 = cert.rho0;
    s.threshold = cert.threshold;
    return s;
}

QueueSteadyState evaluate(const GroupServerModel& model, const Policy& u, double tol) {
    if (!(tol > 0.0)) throw ModelError("tolerance must be positive");
    const auto& majorant = model.holding().majorant();
    if (!majorant)
        throw ModelError("holding cost " + model.holding().describe() +
                         " is declared super-polynomial; the average-cost remainder cannot be certified");
    const auto cert = checked_certificate(model, u);
    if (model.arrival_rate() == 0.0) {
        auto s = empty_queue(model, u);
        s.eta = Bounded{s.cost[0], 0.0};
        return s;
    }

    auto s = steady_state(model, u, tol);
    const auto pf = product_form(model, u);

    // Past the prefix the action is the tail action, so |f(n)| is dominated by
    // the holding majorant plus a constant operating cost.
    std::vector<double> cost_majorant = *majorant;
    cost_majorant[0] += std::abs(model.operating_cost(u.tail_action()));
    auto remainder = [&](long n) {
        return pf.pi(n) * geometric_polynomial_tail(cert.rho0, cost_majorant, static_cast<double>(n));
    };

    long n = s.truncation;
    while (remainder(n) > tol) {
        if (++n > kMaxTruncation) throw NumericalError("truncation level exceeds the hard cap");
    }
    const double tail_factor = cert.rho0 / (1.0 - cert.rho0);
    s.truncation = n;
    s.pi.resize(static_cast<std::size_t>(n) + 1);
    s.cost.resize(static_cast<std::size_t>(n) + 1);
    double eta = 0.0;
    for (long m = 0; m <= n; ++m) {
        s.pi[static_cast<std::size_t>(m)] = pf.pi(m);
        s.cost[static_cast<std::size_t>(m)] = model.cost(m, u.action_at(m));
        eta += s.pi[static_cast<std::size_t>(m)] * s.cost[static_cast<std::size_t>(m)];
    }
    s.tail_mass_bound = s.pi.back() * tail_factor;
    s.eta = Bounded{eta, remainder(n)};
    return s;
}

Bounded average_cost(const GroupServerModel& model, const Policy& u, double tol) {
    return *evaluate(model, u, tol).eta;
}

double log_partial_product(const GroupServerModel& model, const Policy& u, long n) {
    require_bound(model, u);
    if (n < 0) throw ModelError("state index must be nonnegative");
    if (n == 0) return 0.0;
    if (model.arrival_rate() == 0.0) return -std::numeric_limits<double>::infinity();
    return product_form(model, u).log_product(n);
}

Bounded delta(const GroupServerModel& model, const Policy& u, long n) {
    if (n < 0) throw ModelError("state index must be nonnegative");
    checked_certificate(model, u);
    if (model.arrival_rate() == 0.0) return {0.0, 0.0};
    const auto pf = product_form(model, u);
    const double log_tail_factor = pf.log_tail_ratio - std::log1p(-pf.tail_ratio);

    double log_value = pf.log_product(std::max(n, pf.prefix_end)) + log_tail_factor;
    long terms = 1;
    for (long m = n + 1; m <= pf.prefix_end; ++m, ++terms) log_value = log_add(log_value, pf.log_product(m));
    const double value = std::exp(log_value);
    return {value, 8.0 * std::numeric_limits<double>::epsilon() * value * static_cast<double>(terms + 1)};
}

} // namespace cmdp
