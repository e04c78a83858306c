#include "cmdp/simulate.hpp"

#include "cmdp/error.hpp"
#include "cmdp/parallel.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <cmath>
#include <numeric>
#include <random>

namespace cmdp {

void SimConfig::validate() const {
    if (!(warmup > 0.0)) throw ModelError("warmup must be positive");
    if (!(horizon > warmup) || !std::isfinite(horizon)) throw ModelError("horizon must exceed warmup");
    if (batches < 2) throw ModelError("at least 2 batches are needed for a confidence interval");
}

double t_quantile_975(int dof) {
    if (dof < 1) throw ModelError("degrees of freedom must be positive");
    boost::math::students_t dist(dof);
    return boost::math::quantile(dist, 0.975);
}

namespace {

struct BatchStats {
    double mean = 0.0;
    double se = 0.0;
};

BatchStats batch_stats(const std::vector<double>& x) {
    const double n = static_cast<double>(x.size());
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : x) ss += (v - mean) * (v - mean);
    return {mean, std::sqrt(ss / (n - 1.0) / n)};
}

} // namespace

SimEstimate simulate_eta(const GroupServerModel& model, const Policy& u, const SimConfig& cfg) {
    cfg.validate();
    if (!u.is_bound() || u.bound_to() != model.space_id()) throw ModelError("policy is not bound to this queue model");

    SimEstimate est;
    if (!stability_certificate(model, u).stable)
        est.warnings.push_back("policy has no stability certificate; the estimate may diverge");

    const long L = u.prefix_length();
    std::vector<double> down(static_cast<std::size_t>(std::max(L, 1L)));
    std::vector<double> op_cost(down.size());
    for (long n = 0; n < static_cast<long>(down.size()); ++n) {
        down[static_cast<std::size_t>(n)] = n >= 1 ? model.service_rate(u.action_at(n)) : 0.0;
        op_cost[static_cast<std::size_t>(n)] = model.operating_cost(u.action_at(n));
    }
    const double tail_down = model.service_rate(u.tail_action());
    const double tail_op = model.operating_cost(u.tail_action());
    const double lambda = model.arrival_rate();
    auto departure_rate = [&](long n) { return n < static_cast<long>(down.size()) ? down[static_cast<std::size_t>(n)] : tail_down; };
    auto cost = [&](long n) {
        return model.holding()(n) + (n < static_cast<long>(op_cost.size()) ? op_cost[static_cast<std::size_t>(n)] : tail_op);
    };

    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    const int B = cfg.batches;
    const double width = (cfg.horizon - cfg.warmup) / B;
    std::vector<double> cost_int(static_cast<std::size_t>(B), 0.0);
    std::vector<double> idle_int(static_cast<std::size_t>(B), 0.0);

    // Credits the sojourn [from, to) in state n to the batches it overlaps.
    auto credit = [&](long n, double from, double to) {
        from = std::max(from, cfg.warmup);
        if (to <= from) return;
        const double f = cost(n);
        while (from < to) {
            int b = static_cast<int>((from - cfg.warmup) / width);
            if (b >= B) return;
            const double edge = std::min(to, cfg.warmup + (b + 1) * width);
            cost_int[static_cast<std::size_t>(b)] += f * (edge - from);
            if (n == 0) idle_int[static_cast<std::size_t>(b)] += edge - from;
            from = edge;
        }
    };

    if (lambda == 0.0) {
        // The chain never leaves the empty state.
        est.batch_means.assign(static_cast<std::size_t>(B), cost(0));
        est.eta_hat = cost(0);
        est.ci = est.wide_ci = {est.eta_hat, est.eta_hat};
        est.idle_fraction = 1.0;
        est.idle_ci = {1.0, 1.0};
        return est;
    }

    long n = 0;
    double t = 0.0;
    while (t < cfg.horizon) {
        const double mu = departure_rate(n);
        const double total = lambda + mu;
        if (total <= 0.0) {
            credit(n, t, cfg.horizon);
            break;
        }
        const double dt = -std::log1p(-unit(rng)) / total;
        const double next = std::min(t + dt, cfg.horizon);
        credit(n, t, next);
        t += dt;
        if (t >= cfg.horizon) break;
        ++est.events;
        if (unit(rng) * total < lambda) ++n;
        else --n;
    }

    est.batch_means.resize(static_cast<std::size_t>(B));
    std::vector<double> idle_means(static_cast<std::size_t>(B));
    for (int b = 0; b < B; ++b) {
        est.batch_means[static_cast<std::size_t>(b)] = cost_int[static_cast<std::size_t>(b)] / width;
        idle_means[static_cast<std::size_t>(b)] = idle_int[static_cast<std::size_t>(b)] / width;
    }
    const double tq = t_quantile_975(B - 1);
    const auto cs = batch_stats(est.batch_means);
    est.eta_hat = cs.mean;
    est.std_error = cs.se;
    est.ci = {cs.mean - tq * cs.se, cs.mean + tq * cs.se};
    est.wide_ci = {cs.mean - 3.0 * cs.se, cs.mean + 3.0 * cs.se};
    const auto is = batch_stats(idle_means);
    est.idle_fraction = is.mean;
    est.idle_ci = {is.mean - tq * is.se, is.mean + tq * is.se};
    return est;
}

std::vector<SimEstimate> simulate_replications(const GroupServerModel& model, const Policy& u, const SimConfig& cfg,
                                               std::size_t replications, unsigned workers) {
    cfg.validate();
    std::vector<SimEstimate> out(replications);
    parallel_for(replications, workers, [&](std::size_t i) {
        SimConfig c = cfg;
        c.seed = cfg.seed + i;
        out[i] = simulate_eta(model, u, c);
    });
    return out;
}

} // namespace cmdp
