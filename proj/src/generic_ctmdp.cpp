#include "cmdp/generic_ctmdp.hpp"

#include "cmdp/error.hpp"
#include "cmdp/series.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace cmdp {

double GeometricMajorant::tail_sum(long k) const {
    return coeff * std::pow(ratio, static_cast<double>(k + 1)) / (1.0 - ratio);
}

ModelCheck validate_generic_model(const GenericCtmdpModel& model, long horizon) {
    ModelCheck check;
    const double bound = model.rate_bound();
    const int band = model.band();
    const auto reach = model.forward_reach();
    const long upper = reach ? static_cast<long>(*reach) : 2 * horizon + 2;
    auto flag = [&](std::string msg) {
        check.ok = false;
        if (check.violations.size() < 8) check.violations.push_back(std::move(msg));
    };
    if (band < 1) flag("band M must be a positive integer");

    for (long i = 0; i <= horizon; ++i) {
        for (const auto& a : model.actions_at(i)) {
            double out = 0.0;
            for (long j = 0; j <= i + upper; ++j) {
                if (j == i) continue;
                const double q = model.rate(i, a, j);
                if (q < 0.0) flag("negative rate q(" + std::to_string(i) + "," + std::to_string(j) + ")");
                if (std::abs(q) > bound) flag("rate exceeds the declared bound at state " + std::to_string(i));
                if (q != 0.0 && i > j + band)
                    flag("backward jump from " + std::to_string(i) + " to " + std::to_string(j) +
                         " violates the band");
                out += q;
            }
            const double diag = model.rate(i, a, i);
            if (std::abs(diag) > bound) flag("diagonal rate exceeds the declared bound at state " + std::to_string(i));
            if (reach && std::abs(diag + out) > 1e-9 * std::max(1.0, bound))
                flag("generator row " + std::to_string(i) + " does not sum to zero");
        }
    }
    return check;
}

TableCtmdpModel::TableCtmdpModel(long horizon, std::vector<int> actions, std::vector<Entry> entries,
                                 double rate_bound, std::optional<int> declared_band,
                                 std::vector<double> state_cost_coeffs, std::vector<double> action_costs,
                                 std::optional<GeometricMajorant> majorant)
    : horizon_(horizon), rate_bound_(rate_bound), state_coeffs_(std::move(state_cost_coeffs)),
      action_costs_(std::move(action_costs)), majorant_(majorant) {
    if (horizon_ < 0) throw ModelError("table horizon must be nonnegative");
    if (actions.empty()) throw ModelError("table model needs at least one action");
    if (!(rate_bound_ > 0.0)) throw ModelError("rate bound must be positive");
    for (int a : actions) actions_.emplace_back(a);
    if (state_coeffs_.empty()) state_coeffs_.push_back(0.0);
    if (action_costs_.empty()) action_costs_.assign(actions_.size(), 0.0);
    if (action_costs_.size() != actions_.size())
        throw ModelError("action_costs must list one cost per action");
    if (majorant_ && !(majorant_->ratio >= 0.0 && majorant_->ratio < 1.0 && majorant_->coeff > 0.0))
        throw ModelError("majorant needs coeff > 0 and 0 <= ratio < 1");

    rows_.resize(static_cast<std::size_t>(horizon_ + 1) * actions_.size());
    int inferred_band = 1;
    for (const auto& e : entries) {
        if (e.from < 0 || e.from > horizon_)
            throw ModelError("rate entry from state " + std::to_string(e.from) + " lies outside the table horizon");
        if (e.to < 0) throw ModelError("rate entry to a negative state");
        if (e.to == e.from) throw ModelError("diagonal rates are derived; list off-diagonal rates only");
        if (!(e.rate >= 0.0) || !std::isfinite(e.rate)) throw ModelError("rates must be finite and nonnegative");
        const auto idx = action_index(Action(e.action));
        rows_[static_cast<std::size_t>(e.from) * actions_.size() + idx].emplace_back(e.to - e.from, e.rate);
        if (e.rate > 0.0) {
            inferred_band = std::max(inferred_band, static_cast<int>(e.from - e.to));
            reach_ = std::max(reach_, static_cast<int>(e.to - e.from));
        }
    }
    band_ = declared_band.value_or(inferred_band);
    if (band_ < inferred_band)
        throw ModelError("declared band " + std::to_string(band_) + " is smaller than the table's backward reach " +
                         std::to_string(inferred_band));
}

std::size_t TableCtmdpModel::action_index(const Action& a) const {
    const auto it = std::find(actions_.begin(), actions_.end(), a);
    if (it == actions_.end()) throw ModelError("unknown action " + a.to_string());
    return static_cast<std::size_t>(it - actions_.begin());
}

double TableCtmdpModel::rate(long from, const Action& a, long to) const {
    const long base = std::min(from, horizon_);
    const auto& row = rows_[static_cast<std::size_t>(base) * actions_.size() + action_index(a)];
    if (to != from) {
        double q = 0.0;
        for (const auto& [offset, r] : row)
            if (from + offset == to) q += r;
        return q;
    }
    double out = 0.0;
    for (const auto& [offset, r] : row) out += r;
    return -out;
}

double TableCtmdpModel::cost(long state, const Action& a) const {
    return polynomial_value(state_coeffs_, static_cast<double>(state)) + action_costs_[action_index(a)];
}

std::optional<std::vector<double>> TableCtmdpModel::cost_majorant() const {
    std::vector<double> m;
    for (double c : state_coeffs_) m.push_back(std::abs(c));
    double worst = 0.0;
    for (double c : action_costs_) worst = std::max(worst, std::abs(c));
    m[0] += worst;
    return m;
}

std::span<const Action> TableCtmdpModel::actions_at(long) const { return actions_; }

BirthDeathCtmdp::BirthDeathCtmdp(GroupServerModel queue)
    : GenericCtmdpModel(queue.space_id()), queue_(std::move(queue)) {}

double BirthDeathCtmdp::rate(long from, const Action& a, long to) const {
    const double lambda = queue_.arrival_rate();
    const double service = from >= 1 ? queue_.service_rate(a) : 0.0;
    if (to == from + 1) return lambda;
    if (to == from - 1) return service;
    if (to == from) return -(lambda + service);
    return 0.0;
}

double BirthDeathCtmdp::rate_bound() const {
    return queue_.arrival_rate() + queue_.service_rate(*queue_.all_on());
}

std::optional<GeometricMajorant> BirthDeathCtmdp::nu_majorant() const {
    double slowest = std::numeric_limits<double>::infinity();
    for (const auto& a : queue_.actions_at(1)) slowest = std::min(slowest, queue_.service_rate(a));
    if (!(slowest > queue_.arrival_rate())) return std::nullopt;
    return GeometricMajorant{1.0, queue_.arrival_rate() / slowest};
}

std::optional<std::vector<double>> BirthDeathCtmdp::cost_majorant() const {
    auto m = queue_.holding().majorant();
    if (!m) return std::nullopt;
    double op = 0.0;
    for (const auto& g : queue_.groups()) op += std::abs(g.cost) * g.servers;
    (*m)[0] += op;
    return m;
}

BandedSystem::BandedSystem(std::size_t size, int lower, int upper)
    : n_(size), kl_(lower), ku_(upper), band_(size * static_cast<std::size_t>(lower + upper + 1), 0.0),
      rhs_(size, 0.0) {
    if (lower < 0 || upper < 0) throw ModelError("band widths must be nonnegative");
}

bool BandedSystem::in_band(std::size_t i, std::size_t j) const {
    const auto di = static_cast<long long>(i);
    const auto dj = static_cast<long long>(j);
    return dj >= di - kl_ && dj <= di + ku_ && i < n_ && j < n_;
}

double BandedSystem::get(std::size_t i, std::size_t j) const {
    if (!in_band(i, j)) return 0.0;
    return band_[i * static_cast<std::size_t>(kl_ + ku_ + 1) + (j + static_cast<std::size_t>(kl_) - i)];
}

void BandedSystem::set(std::size_t i, std::size_t j, double value) {
    if (!in_band(i, j)) {
        if (value == 0.0) return;
        throw ModelError("entry (" + std::to_string(i) + "," + std::to_string(j) + ") lies outside the band");
    }
    band_[i * static_cast<std::size_t>(kl_ + ku_ + 1) + (j + static_cast<std::size_t>(kl_) - i)] = value;
}

std::vector<double> BandedSystem::solve() const {
    // Working rows cover columns [i - kl, i + kl + ku]; row swaps within the
    // pivot window never leave that range.
    const long n = static_cast<long>(n_);
    const long kl = kl_;
    const long ku = ku_;
    const long width = 2 * kl + ku + 1;
    std::vector<double> w(n_ * static_cast<std::size_t>(width), 0.0);
    auto at = [&](long i, long j) -> double& {
        return w[static_cast<std::size_t>(i * width + (j - i + kl))];
    };
    double scale = 0.0;
    for (long i = 0; i < n; ++i) {
        for (long j = std::max(0L, i - kl); j <= std::min(n - 1, i + ku); ++j) {
            at(i, j) = get(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
            scale = std::max(scale, std::abs(at(i, j)));
        }
    }
    std::vector<double> b = rhs_;
    const double tiny = 1e-14 * scale;

    for (long k = 0; k < n; ++k) {
        const long last_row = std::min(n - 1, k + kl);
        const long last_col = std::min(n - 1, k + kl + ku);
        long p = k;
        for (long i = k + 1; i <= last_row; ++i)
            if (std::abs(at(i, k)) > std::abs(at(p, k))) p = i;
        if (!(std::abs(at(p, k)) > tiny))
            throw NumericalError("truncated system is singular at column " + std::to_string(k) +
                                 " (reducible or non-ergodic truncation)");
        if (p != k) {
            for (long j = k; j <= last_col; ++j) std::swap(at(k, j), at(p, j));
            std::swap(b[static_cast<std::size_t>(k)], b[static_cast<std::size_t>(p)]);
        }
        const double pivot = at(k, k);
        for (long i = k + 1; i <= last_row; ++i) {
            const double factor = at(i, k) / pivot;
            if (factor == 0.0) continue;
            at(i, k) = 0.0;
            for (long j = k + 1; j <= last_col; ++j) at(i, j) -= factor * at(k, j);
            b[static_cast<std::size_t>(i)] -= factor * b[static_cast<std::size_t>(k)];
        }
    }
    std::vector<double> x(n_, 0.0);
    for (long k = n - 1; k >= 0; --k) {
        double s = b[static_cast<std::size_t>(k)];
        for (long j = k + 1; j <= std::min(n - 1, k + kl + ku); ++j) s -= at(k, j) * x[static_cast<std::size_t>(j)];
        x[static_cast<std::size_t>(k)] = s / at(k, k);
    }
    return x;
}

namespace {

void require_bound(const GenericCtmdpModel& model, const Policy& u) {
    if (!u.is_bound() || u.bound_to() != model.space_id()) throw ModelError("policy is not bound to this model");
}

std::vector<double> solve_truncated(const GenericCtmdpModel& model, const Policy& u, long K) {
    auto nu = build_truncated_system(model, u, K).solve();
    double scale = 1.0;
    for (double v : nu) scale = std::max(scale, std::abs(v));
    for (std::size_t i = 0; i < nu.size(); ++i) {
        if (!std::isfinite(nu[i])) throw NumericalError("truncated solve produced a non-finite entry");
        if (nu[i] < 0.0) {
            if (nu[i] < -1e-10 * scale)
                throw NumericalError("negative entry nu(" + std::to_string(i) + ") = " + std::to_string(nu[i]) +
                                     " at K = " + std::to_string(K) + "; the truncation has not converged");
            nu[i] = 0.0;
        }
    }
    return nu;
}

} // namespace

BandedSystem build_truncated_system(const GenericCtmdpModel& model, const Policy& u, long K) {
    require_bound(model, u);
    const int band = model.band();
    if (K < band) throw ModelError("truncation level K must be at least the band M");
    const auto reach = model.forward_reach();
    const int lower = reach ? std::min<long>(*reach, K) : static_cast<int>(K);
    BandedSystem sys(static_cast<std::size_t>(K) + 1, lower, band);

    sys.set(0, 0, 1.0);
    sys.rhs()[0] = 1.0;
    for (long j = 0; j <= K; ++j) {
        const Action& a = u.action_at(j);
        const long lo = std::max(1L, j - band);
        const long hi = std::min(K, j + lower);
        for (long i = lo; i <= hi; ++i) {
            const double q = model.rate(j, a, i);
            if (q != 0.0) sys.set(static_cast<std::size_t>(i), static_cast<std::size_t>(j), q);
        }
    }
    return sys;
}

double balance_residual(const GenericCtmdpModel& model, const Policy& u, const std::vector<double>& nu, long first,
                        long last) {
    const long size = static_cast<long>(nu.size());
    const int band = model.band();
    const auto reach = model.forward_reach();
    double worst = 0.0;
    for (long i = std::max(0L, first); i <= std::min(last, size - 1); ++i) {
        const long lo = reach ? std::max(0L, i - *reach) : 0L;
        const long hi = std::min(size - 1, i + band);
        double s = 0.0;
        for (long j = lo; j <= hi; ++j) s += nu[static_cast<std::size_t>(j)] * model.rate(j, u.action_at(j), i);
        worst = std::max(worst, std::abs(s));
    }
    return worst;
}

NuSolution solve_nu(const GenericCtmdpModel& model, const Policy& u, double tol, const SolveOptions& opts) {
    if (!(tol > 0.0)) throw ModelError("tolerance must be positive");
    require_bound(model, u);
    const int band = model.band();
    long K = opts.k_initial > 0 ? opts.k_initial : std::max(2L * band, 16L);
    if (K < band) throw ModelError("initial truncation level must be at least the band M");

    const auto check = validate_generic_model(model, std::min(K, 64L));
    if (!check.ok) {
        std::string msg = "model violates its declared structure:";
        for (const auto& v : check.violations) msg += " " + v + ";";
        throw ModelError(msg);
    }

    auto prev = solve_truncated(model, u, K);
    while (true) {
        const long K2 = 2 * K;
        if (K2 > opts.k_cap)
            throw NumericalError("nu did not stabilise before the truncation cap K = " + std::to_string(opts.k_cap) +
                                 "; raise the cap, or the stationary vector is not summable under this policy");
        auto cur = solve_truncated(model, u, K2);

        double change = 0.0;
        for (long i = 0; i <= K / 2; ++i)
            change = std::max(change, std::abs(cur[static_cast<std::size_t>(i)] - prev[static_cast<std::size_t>(i)]));
        const long window = K2 / 2;
        const double total = std::accumulate(cur.begin(), cur.end(), 0.0);
        const double beyond =
            std::accumulate(cur.begin() + window + 1, cur.end(), 0.0);
        const double tail_share = total > 0.0 ? beyond / total : 0.0;

        if (change <= tol && tail_share <= tol) {
            NuSolution sol;
            sol.truncation = K2;
            sol.window = window;
            sol.error_estimate = change;
            sol.window_tail_mass = tail_share;
            sol.residual = balance_residual(model, u, cur, 0, K2 - band);
            sol.nu.assign(cur.begin(), cur.begin() + window + 1);
            const double mass = std::accumulate(sol.nu.begin(), sol.nu.end(), 0.0);
            sol.pi.reserve(sol.nu.size());
            for (double v : sol.nu) sol.pi.push_back(v / mass);
            if (const auto maj = model.nu_majorant()) sol.kappa_bound = model.rate_bound() * maj->tail_sum(K2);
            return sol;
        }
        prev = std::move(cur);
        K = K2;
    }
}

NuSolution evaluate_generic(const GenericCtmdpModel& model, const Policy& u, double tol, const SolveOptions& opts) {
    auto sol = solve_nu(model, u, tol, opts);
    const long N = sol.window;
    const double mass = std::accumulate(sol.nu.begin(), sol.nu.end(), 0.0);
    sol.cost.resize(static_cast<std::size_t>(N) + 1);
    double eta = 0.0;
    double abs_cost_mass = 0.0;
    double max_abs_cost = 0.0;
    for (long i = 0; i <= N; ++i) {
        const double f = model.cost(i, u.action_at(i));
        sol.cost[static_cast<std::size_t>(i)] = f;
        eta += sol.pi[static_cast<std::size_t>(i)] * f;
        abs_cost_mass += std::abs(f);
        max_abs_cost = std::max(max_abs_cost, std::abs(f));
    }
    // Perturbing each nu(i) by the doubling change moves the numerator by at
    // most change * sum|f| and the normaliser by change * (N + 1).
    const double head = sol.error_estimate / mass * (abs_cost_mass + std::abs(eta) * static_cast<double>(N + 1));
    double tail = 0.0;
    const auto maj = model.nu_majorant();
    const auto growth = model.cost_majorant();
    if (maj && growth) {
        tail = maj->coeff * std::pow(maj->ratio, static_cast<double>(N)) *
               geometric_polynomial_tail(maj->ratio, *growth, static_cast<double>(N)) / mass;
        sol.eta_tail_certified = true;
    } else {
        tail = sol.window_tail_mass * max_abs_cost;
    }
    sol.eta = Bounded{eta, head + tail + std::abs(eta) * sol.window_tail_mass};
    return sol;
}

Bounded average_cost_generic(const GenericCtmdpModel& model, const Policy& u, double tol, const SolveOptions& opts) {
    return *evaluate_generic(model, u, tol, opts).eta;
}

} // namespace cmdp
