#include "cmdp/cmdp.h"

#include "cmdp/config.hpp"
#include "cmdp/continuity.hpp"
#include "cmdp/error.hpp"
#include "cmdp/optimizer.hpp"
#include "cmdp/simulate.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <numeric>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

struct cmdp_model {
    cmdp::LoadedModel m;
};

struct cmdp_policy {
    cmdp::Policy p;
    double r;
};

struct cmdp_report {
    std::string summary;
    std::string csv;
    std::vector<std::pair<std::string, double>> numbers;
    std::vector<std::pair<std::string, bool>> checks;
};

namespace {

thread_local std::string last_error;

template <class F>
cmdp_status guard(F&& f) {
    try {
        last_error.clear();
        return f();
    } catch (const cmdp::ModelError& e) {
        last_error = e.what();
        return CMDP_E_MODEL;
    } catch (const cmdp::NumericalError& e) {
        last_error = e.what();
        return CMDP_E_NUMERIC;
    } catch (const std::bad_alloc&) {
        last_error = "out of memory";
        return CMDP_E_INTERNAL;
    } catch (const std::exception& e) {
        last_error = e.what();
        return CMDP_E_INTERNAL;
    } catch (...) {
        last_error = "unknown failure";
        return CMDP_E_INTERNAL;
    }
}

cmdp_status bad_argument(const char* what) {
    last_error = what;
    return CMDP_E_ARGUMENT;
}

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string short_num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

char* dup(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (!out) throw std::bad_alloc();
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

class ReportBuilder {
  public:
    void line(const std::string& key, const std::string& value) { summary_ << key << " = " << value << '\n'; }
    void number(const std::string& key, double v, bool show = true) {
        r_.numbers.emplace_back(key, v);
        if (show) line(key, short_num(v));
    }
    void check(const std::string& name, bool ok) {
        r_.checks.emplace_back(name, ok);
        line("check " + name, ok ? "pass" : "FAIL");
    }
    std::ostringstream& csv() { return csv_; }

    cmdp_report* release() {
        r_.summary = summary_.str();
        r_.csv = csv_.str();
        return new cmdp_report(std::move(r_));
    }

  private:
    cmdp_report r_;
    std::ostringstream summary_;
    std::ostringstream csv_;
};

cmdp::Engine engine_of(cmdp_engine e) {
    return e == CMDP_ENGINE_GENERIC ? cmdp::Engine::generic : cmdp::Engine::analytic;
}

void require_same_model(const cmdp_model* model, const cmdp_policy* p) {
    if (p->p.bound_to() != model->m.space().space_id())
        throw cmdp::ModelError("policy was parsed against a different model");
}

void eval_queue(const cmdp::GroupServerModel& q, const cmdp::Policy& u, double tol, ReportBuilder& rb) {
    const auto s = cmdp::evaluate(q, u, tol);
    rb.line("engine", "analytic");
    rb.line("policy", u.to_string());
    rb.number("eta", s.eta->value);
    rb.number("eta_bound", s.eta->bound);
    rb.number("truncation", static_cast<double>(s.truncation));
    rb.number("normalizer", s.normalizer);
    rb.number("rho0", s.rho0.value_or(NAN));
    rb.number("threshold", static_cast<double>(s.threshold));
    rb.number("tail_mass_bound", s.tail_mass_bound);
    rb.csv() << "state,pi,f,contribution\n";
    double mass = 0.0;
    double balance = 0.0;
    for (std::size_t n = 0; n < s.pi.size(); ++n) {
        rb.csv() << n << ',' << num(s.pi[n]) << ',' << num(s.cost[n]) << ',' << num(s.pi[n] * s.cost[n]) << '\n';
        mass += s.pi[n];
        if (n >= 1 && s.pi[n] > 0.0) {
            const double lhs = s.pi[n] * q.service_rate(u.action_at(static_cast<long>(n)));
            const double rhs = s.pi[n - 1] * q.arrival_rate();
            balance = std::max(balance, std::abs(lhs - rhs) / rhs);
        }
    }
    rb.number("detailed_balance_residual", balance);
    rb.check("normalization", mass <= 1.0 + 1e-12 && mass + s.tail_mass_bound >= 1.0 - 1e-12);
    rb.check("detailed_balance", balance <= 1e-10);
}

void eval_generic(const cmdp::GenericCtmdpModel& g, const cmdp::Policy& u, double tol, long k_cap,
                  ReportBuilder& rb) {
    cmdp::SolveOptions opts;
    if (k_cap > 0) opts.k_cap = k_cap;
    const auto s = cmdp::evaluate_generic(g, u, tol, opts);
    rb.line("engine", "generic");
    rb.line("policy", u.to_string());
    rb.number("eta", s.eta->value);
    rb.number("eta_bound", s.eta->bound);
    rb.line("eta_bound_certified", s.eta_tail_certified ? "yes" : "no");
    rb.number("K_trunc", static_cast<double>(s.truncation));
    rb.number("window", static_cast<double>(s.window));
    rb.number("residual", s.residual);
    rb.number("error_estimate", s.error_estimate);
    rb.number("window_tail_mass", s.window_tail_mass);
    if (s.kappa_bound) rb.number("kappa_bound", *s.kappa_bound);
    rb.csv() << "# K_trunc=" << s.truncation << ",residual=" << num(s.residual)
             << ",error_estimate=" << num(s.error_estimate) << '\n';
    rb.csv() << "state,nu,pi,f,contribution\n";
    double max_nu = 0.0;
    for (std::size_t i = 0; i < s.nu.size(); ++i) {
        rb.csv() << i << ',' << num(s.nu[i]) << ',' << num(s.pi[i]) << ',' << num(s.cost[i]) << ','
                 << num(s.pi[i] * s.cost[i]) << '\n';
        max_nu = std::max(max_nu, s.nu[i]);
    }
    rb.check("anchor", s.nu.front() == 1.0);
    rb.check("balance_residual", s.residual <= 1e-9 * g.rate_bound() * std::max(1.0, max_nu));
}

void describe_search(const cmdp::SearchResult& res, ReportBuilder& rb) {
    rb.line("best_policy", res.best_policy.to_string());
    rb.line("objective", res.objective == cmdp::Objective::maximize ? "max" : "min");
    rb.number("best_eta", res.best_eta.value);
    rb.number("best_eta_bound", res.best_eta.error);
    rb.number("evaluated", static_cast<double>(res.evaluated));
    rb.number("skipped", static_cast<double>(res.skipped));
    if (res.runner_up_gap) rb.number("runner_up_gap", *res.runner_up_gap);
    rb.csv() << "index,policy,eta,bound,status\n";
    for (std::size_t i = 0; i < res.candidates.size(); ++i) {
        const auto& c = res.candidates[i];
        rb.csv() << i << ",\"" << c.policy.to_string() << "\",";
        if (c.eta) rb.csv() << num(c.eta->value) << ',' << num(c.eta->error) << ",ok\n";
        else rb.csv() << ",,skipped\n";
    }
    // Optimality within the summed error bounds, against every evaluated candidate.
    bool optimal = true;
    const bool maximize = res.objective == cmdp::Objective::maximize;
    for (const auto& c : res.candidates) {
        if (!c.eta) continue;
        const double slack = c.eta->error + res.best_eta.error;
        if (maximize ? res.best_eta.value < c.eta->value - slack : res.best_eta.value > c.eta->value + slack)
            optimal = false;
    }
    rb.check("optimal_within_bounds", optimal);
    if (res.cmu) {
        if (res.cmu->conformant) {
            rb.line("cmu", "conformant");
        } else {
            rb.line("cmu", "violated at state " + std::to_string(res.cmu->state) + ": group " +
                               std::to_string(res.cmu->other_group + 1) + " on while group " +
                               std::to_string(res.cmu->preferred_group + 1) + " is not fully on");
        }
        rb.check("cmu_conformant", res.cmu->conformant);
    }
}

void describe_pair(const cmdp::ContinuityReport& r, ReportBuilder& rb) {
    rb.number("agreement_k", r.agreement_k == cmdp::kAgreeForever ? INFINITY : static_cast<double>(r.agreement_k));
    rb.number("distance", r.distance);
    rb.number("n", static_cast<double>(r.n));
    rb.number("sigma", r.sigma);
    rb.number("delta_u", r.delta_u.value);
    rb.number("delta_u2", r.delta_u2.value);
    rb.number("head_sum", r.head_sum);
    rb.number("head_term", r.head_term);
    rb.number("tail_term", r.tail_term);
    rb.number("tail_term_bound", r.tail_term_bound);
    rb.number("eta_u", r.eta_u);
    rb.number("eta_u2", r.eta_u2);
    rb.number("eta_diff", r.eta_diff);
    rb.number("rigorous_bound", r.rigorous_bound);
    rb.number("head_scaling_residual", r.head_scaling_residual);
    rb.check("sandwich_strict", r.sandwich_strict);
    rb.check("bound_holds", r.bound_holds);
    rb.check("head_scaling", r.head_scaling_residual <= 1e-8);
    rb.csv() << "agreement_k,distance,n,sigma,delta_u,delta_u2,head_sum,head_term,tail_term,tail_term_bound,"
                "eta_u,eta_u2,eta_diff,rigorous_bound,sandwich_strict,bound_holds\n";
    rb.csv() << (r.agreement_k == cmdp::kAgreeForever ? std::string("inf") : std::to_string(r.agreement_k)) << ','
             << num(r.distance) << ',' << r.n << ',' << num(r.sigma) << ',' << num(r.delta_u.value) << ','
             << num(r.delta_u2.value) << ',' << num(r.head_sum) << ',' << num(r.head_term) << ','
             << num(r.tail_term) << ',' << num(r.tail_term_bound) << ',' << num(r.eta_u) << ',' << num(r.eta_u2)
             << ',' << num(r.eta_diff) << ',' << num(r.rigorous_bound) << ',' << r.sandwich_strict << ','
             << r.bound_holds << '\n';
}

} // namespace

extern "C" {

const char* cmdp_version(void) { return "0.1.0"; }

const char* cmdp_last_error(void) { return last_error.c_str(); }

void cmdp_string_free(char* s) { std::free(s); }

cmdp_status cmdp_model_load_file(const char* path, cmdp_model** out) {
    if (!path || !out) return bad_argument("null argument");
    return guard([&] {
        *out = new cmdp_model{cmdp::load_model_file(path)};
        return CMDP_OK;
    });
}

cmdp_status cmdp_model_load_text(const char* text, cmdp_model** out) {
    if (!text || !out) return bad_argument("null argument");
    return guard([&] {
        *out = new cmdp_model{cmdp::load_model(text)};
        return CMDP_OK;
    });
}

cmdp_status cmdp_model_line_example(int which, cmdp_model** out) {
    if (!out) return bad_argument("null argument");
    return guard([&] {
        *out = new cmdp_model{cmdp::line_example(which)};
        return CMDP_OK;
    });
}

cmdp_status cmdp_model_describe(const cmdp_model* model, char** out) {
    if (!model || !out) return bad_argument("null argument");
    return guard([&] {
        *out = dup(model->m.describe());
        return CMDP_OK;
    });
}

double cmdp_model_metric_r(const cmdp_model* model) { return model ? model->m.metric.r() : NAN; }

void cmdp_model_free(cmdp_model* model) { delete model; }

cmdp_status cmdp_policy_parse(const cmdp_model* model, const char* literal, cmdp_policy** out) {
    if (!model || !literal || !out) return bad_argument("null argument");
    return guard([&] {
        *out = new cmdp_policy{model->m.parse_policy(literal), model->m.metric.r()};
        return CMDP_OK;
    });
}

cmdp_status cmdp_policy_default(const cmdp_model* model, cmdp_policy** out) {
    if (!model || !out) return bad_argument("null argument");
    return guard([&] {
        *out = new cmdp_policy{model->m.default_policy(), model->m.metric.r()};
        return CMDP_OK;
    });
}

cmdp_status cmdp_policy_format(const cmdp_policy* policy, char** out) {
    if (!policy || !out) return bad_argument("null argument");
    return guard([&] {
        *out = dup(policy->p.to_string());
        return CMDP_OK;
    });
}

void cmdp_policy_free(cmdp_policy* policy) { delete policy; }

cmdp_status cmdp_distance(const cmdp_policy* a, const cmdp_policy* b, double r, double* out) {
    if (!a || !b || !out) return bad_argument("null argument");
    return guard([&] {
        *out = cmdp::distance(a->p, b->p, cmdp::MetricParams(r > 0.0 ? r : a->r));
        return CMDP_OK;
    });
}

cmdp_status cmdp_prefix_agreement(const cmdp_policy* a, const cmdp_policy* b, int64_t* out) {
    if (!a || !b || !out) return bad_argument("null argument");
    return guard([&] {
        const long long k = cmdp::prefix_agreement(a->p, b->p);
        *out = k == cmdp::kAgreeForever ? INT64_MAX : static_cast<int64_t>(k);
        return CMDP_OK;
    });
}

void cmdp_eval_options_init(cmdp_eval_options* opts) {
    if (!opts) return;
    opts->tol = 1e-8;
    opts->engine = CMDP_ENGINE_ANALYTIC;
    opts->k_cap = 0;
}

void cmdp_optimize_options_init(cmdp_optimize_options* opts) {
    if (!opts) return;
    opts->tol = 1e-8;
    opts->length = 12;
    opts->tail = nullptr;
    opts->cap = cmdp::kDefaultEnumerationCap;
    opts->mode = 0;
    opts->workers = 0;
    opts->engine = CMDP_ENGINE_ANALYTIC;
}

void cmdp_continuity_options_init(cmdp_continuity_options* opts) {
    if (!opts) return;
    opts->tol = 1e-8;
    opts->ks = nullptr;
    opts->n_ks = 0;
    opts->samples = 32;
    opts->seed = 1;
    opts->window = 8;
    opts->workers = 0;
    opts->r = 0.0;
    opts->engine = CMDP_ENGINE_ANALYTIC;
}

void cmdp_examples_options_init(cmdp_examples_options* opts) {
    if (!opts) return;
    opts->which = 2;
    opts->policy = nullptr;
    opts->length = 12;
    opts->stream_t = 100000;
}

void cmdp_simulate_options_init(cmdp_simulate_options* opts) {
    if (!opts) return;
    opts->horizon = 1e5;
    opts->warmup = 1e3;
    opts->seed = 1;
    opts->batches = 20;
    opts->tol = 1e-8;
}

cmdp_status cmdp_eval(const cmdp_model* model, const cmdp_policy* policy, const cmdp_eval_options* opts,
                      cmdp_report** out) {
    if (!model || !policy || !out) return bad_argument("null argument");
    cmdp_eval_options o;
    cmdp_eval_options_init(&o);
    if (opts) o = *opts;
    if (!(o.tol > 0.0)) return bad_argument("tol must be positive");
    return guard([&] {
        require_same_model(model, policy);
        ReportBuilder rb;
        const auto& m = model->m;
        switch (m.kind) {
        case cmdp::ModelKind::queue:
            if (o.engine == CMDP_ENGINE_GENERIC) eval_generic(cmdp::BirthDeathCtmdp(*m.queue), policy->p, o.tol, o.k_cap, rb);
            else eval_queue(*m.queue, policy->p, o.tol, rb);
            break;
        case cmdp::ModelKind::table: eval_generic(*m.table, policy->p, o.tol, o.k_cap, rb); break;
        case cmdp::ModelKind::line: {
            rb.line("policy", policy->p.to_string());
            const auto stay = cmdp::first_stay_state(policy->p);
            rb.number("eta", cmdp::eta_line(*m.line, policy->p));
            rb.number("eta_bound", 0.0);
            rb.line("absorbing_state", stay ? std::to_string(*stay) : "none");
            rb.csv() << "policy,absorbing_state,eta\n\"" << policy->p.to_string() << "\","
                     << (stay ? std::to_string(*stay) : "") << ',' << num(cmdp::eta_line(*m.line, policy->p)) << '\n';
            break;
        }
        }
        *out = rb.release();
        return CMDP_OK;
    });
}

cmdp_status cmdp_optimize(const cmdp_model* model, const cmdp_optimize_options* opts, cmdp_report** out) {
    if (!model || !out) return bad_argument("null argument");
    cmdp_optimize_options o;
    cmdp_optimize_options_init(&o);
    if (opts) o = *opts;
    if (!(o.tol > 0.0)) return bad_argument("tol must be positive");
    if (o.length < 0) return bad_argument("prefix length must be nonnegative");
    if (o.mode < 0 || o.mode > 2) return bad_argument("mode must be 0, 1 or 2");
    return guard([&] {
        const auto& m = model->m;
        const cmdp::TailRule tail = o.tail ? cmdp::parse_tail_rule(o.tail) : m.default_tail();
        const auto ev = m.evaluator(engine_of(o.engine));
        cmdp::SearchOptions so;
        so.tol = o.tol;
        so.cap = o.cap;
        so.workers = o.workers;
        if (o.mode == 1) so.objective = cmdp::Objective::minimize;
        if (o.mode == 2) so.objective = cmdp::Objective::maximize;
        const auto res = cmdp::exhaustive_search(*ev, o.length, tail, so);
        ReportBuilder rb;
        rb.line("prefix_length", std::to_string(o.length));
        rb.line("tail", cmdp::to_string(tail));
        describe_search(res, rb);
        *out = rb.release();
        return CMDP_OK;
    });
}

cmdp_status cmdp_continuity(const cmdp_model* model, const cmdp_policy* u, const cmdp_policy* against,
                            const cmdp_continuity_options* opts, cmdp_report** out) {
    if (!model || !u || !out) return bad_argument("null argument");
    cmdp_continuity_options o;
    cmdp_continuity_options_init(&o);
    if (opts) o = *opts;
    if (!(o.tol > 0.0)) return bad_argument("tol must be positive");
    if (o.n_ks > 0 && !o.ks) return bad_argument("ks is null");
    return guard([&] {
        require_same_model(model, u);
        const auto& m = model->m;
        const cmdp::MetricParams metric(o.r > 0.0 ? o.r : m.metric.r());
        ReportBuilder rb;
        if (against) {
            require_same_model(model, against);
            rb.line("u", u->p.to_string());
            rb.line("u2", against->p.to_string());
            if (m.kind == cmdp::ModelKind::queue && o.engine == CMDP_ENGINE_ANALYTIC) {
                describe_pair(cmdp::eta_diff_bound(*m.queue, u->p, against->p, o.tol, metric), rb);
            } else {
                const auto ev = m.evaluator(engine_of(o.engine));
                const auto pb = ev->pair_bound(u->p, against->p, o.tol);
                const long long k = cmdp::prefix_agreement(u->p, against->p);
                rb.number("agreement_k", k == cmdp::kAgreeForever ? INFINITY : static_cast<double>(k));
                rb.number("distance", cmdp::distance(u->p, against->p, metric));
                rb.number("eta_u", pb.eta_u);
                rb.number("eta_u2", pb.eta_v);
                rb.number("eta_diff", pb.diff);
                rb.number("bound", pb.bound);
                rb.line("bound_rigorous", pb.rigorous ? "yes" : "no");
                rb.csv() << "distance,eta_u,eta_u2,eta_diff,bound\n"
                         << num(cmdp::distance(u->p, against->p, metric)) << ',' << num(pb.eta_u) << ','
                         << num(pb.eta_v) << ',' << num(pb.diff) << ',' << num(pb.bound) << '\n';
            }
        } else {
            std::vector<long> ks(o.ks, o.ks + o.n_ks);
            if (ks.empty()) ks = {0, 2, 5, 10};
            cmdp::SamplerOptions so;
            so.samples = o.samples;
            so.seed = o.seed;
            so.window = o.window;
            so.workers = o.workers;
            const auto ev = m.evaluator(engine_of(o.engine));
            const auto scan = cmdp::modulus_scan(*ev, u->p, ks, so, o.tol);
            rb.line("u", u->p.to_string());
            rb.csv() << "k,radius,samples,skipped,max_diff,max_bound,rigorous,exhausted\n";
            for (const auto& row : scan.rows) {
                rb.csv() << row.k << ',' << num(std::pow(metric.r(), static_cast<double>(row.k))) << ','
                         << row.samples << ',' << row.skipped << ',' << num(row.max_diff) << ','
                         << num(row.max_bound) << ',' << row.rigorous << ',' << row.exhausted << '\n';
                rb.line("k=" + std::to_string(row.k), "max_diff " + short_num(row.max_diff) + ", max_bound " +
                                                          short_num(row.max_bound) + ", samples " +
                                                          std::to_string(row.samples));
            }
            rb.number("diff_nonincreasing", scan.diff_nonincreasing ? 1.0 : 0.0);
            rb.number("bound_nonincreasing", scan.bound_nonincreasing ? 1.0 : 0.0);
            rb.number("modulus_stalls", scan.modulus_stalls ? 1.0 : 0.0);
            rb.check("columns_nonincreasing", scan.diff_nonincreasing && scan.bound_nonincreasing);
            if (scan.modulus_stalls) {
                rb.line("note", "modulus does not vanish: eta is discontinuous at u");
            }
        }
        *out = rb.release();
        return CMDP_OK;
    });
}

cmdp_status cmdp_examples(const cmdp_examples_options* opts, cmdp_report** out) {
    if (!out) return bad_argument("null argument");
    cmdp_examples_options o;
    cmdp_examples_options_init(&o);
    if (opts) o = *opts;
    if (o.which != 1 && o.which != 2) return bad_argument("which must be 1 or 2");
    if (o.length < 1) return bad_argument("length must be at least 1");
    if (o.stream_t < 0) return bad_argument("stream length must be nonnegative");
    return guard([&] {
        const auto m = cmdp::line_example(o.which);
        const auto& line = *m.line;
        ReportBuilder rb;
        rb.line("model", line.name());
        if (o.policy) {
            const auto u = m.parse_policy(o.policy);
            const auto stay = cmdp::first_stay_state(u);
            rb.line("policy", u.to_string());
            rb.line("absorbing_state", stay ? std::to_string(*stay) : "none");
            rb.number("eta", cmdp::eta_line(line, u));
        }
        const auto gap = cmdp::stationary_supremum_gap(line, o.length);
        rb.number("length", static_cast<double>(gap.length));
        rb.number("best_stationary", gap.max_stationary);
        rb.line("best_absorbing_state", gap.argmax_stay_state ? std::to_string(*gap.argmax_stay_state) : "none");
        rb.number("supremum", gap.supremum);
        rb.number("gap", gap.gap);
        rb.csv() << "absorbing_state,eta,policies\n";
        for (const auto& c : gap.classes)
            rb.csv() << (c.stay_state ? std::to_string(*c.stay_state) : "none") << ',' << num(c.eta) << ','
                     << c.policies << '\n';
        if (line.objective() == cmdp::Objective::maximize) rb.check("gap_positive", gap.gap > 0.0);
        if (o.stream_t > 0) {
            rb.number("stream_T", static_cast<double>(o.stream_t));
            rb.number("stream_average", cmdp::history_stream_average(line, o.stream_t));
            // Blocks that fit in the stream: block i ends at step i(i+3)/2.
            long blocks = 0;
            while ((blocks + 1) * (blocks + 4) / 2 <= o.stream_t) ++blocks;
            if (blocks > 0) {
                const auto avg = cmdp::history_block_averages(line, blocks);
                rb.number("blocks", static_cast<double>(blocks));
                rb.number("last_block_average", avg.back());
                if (line.objective() == cmdp::Objective::maximize)
                    rb.check("block_averages_nondecreasing", std::is_sorted(avg.begin(), avg.end()));
            }
        }
        *out = rb.release();
        return CMDP_OK;
    });
}

cmdp_status cmdp_simulate(const cmdp_model* model, const cmdp_policy* policy, const cmdp_simulate_options* opts,
                          cmdp_report** out) {
    if (!model || !policy || !out) return bad_argument("null argument");
    cmdp_simulate_options o;
    cmdp_simulate_options_init(&o);
    if (opts) o = *opts;
    return guard([&] {
        require_same_model(model, policy);
        const auto& m = model->m;
        if (m.kind != cmdp::ModelKind::queue) throw cmdp::ModelError("simulation needs a queue model");
        cmdp::SimConfig cfg{o.horizon, o.warmup, o.seed, o.batches};
        const auto est = cmdp::simulate_eta(*m.queue, policy->p, cfg);
        ReportBuilder rb;
        rb.line("policy", policy->p.to_string());
        rb.number("eta_hat", est.eta_hat);
        rb.number("std_error", est.std_error);
        rb.number("ci_lo", est.ci.lo);
        rb.number("ci_hi", est.ci.hi);
        rb.number("wide_lo", est.wide_ci.lo);
        rb.number("wide_hi", est.wide_ci.hi);
        rb.number("idle_fraction", est.idle_fraction);
        rb.number("events", static_cast<double>(est.events));
        for (const auto& w : est.warnings) rb.line("warning", w);
        std::string analytic = "nan";
        std::string inside = "n/a";
        if (cmdp::stability_certificate(*m.queue, policy->p).stable && m.queue->holding().majorant()) {
            const auto s = cmdp::evaluate(*m.queue, policy->p, o.tol > 0.0 ? o.tol : 1e-8);
            rb.number("analytic", s.eta->value);
            rb.number("pi0", s.pi.front());
            analytic = short_num(s.eta->value);
            const bool ok = est.wide_ci.contains(s.eta->value);
            inside = ok ? "yes" : "no";
            rb.check("analytic_inside_wide_ci", ok);
        }
        rb.line("eta_hat, ci_lo, ci_hi, analytic, inside", short_num(est.eta_hat) + ", " + short_num(est.ci.lo) +
                                                              ", " + short_num(est.ci.hi) + ", " + analytic + ", " +
                                                              inside);
        rb.csv() << "batch,mean\n";
        for (std::size_t b = 0; b < est.batch_means.size(); ++b) rb.csv() << b << ',' << num(est.batch_means[b]) << '\n';
        *out = rb.release();
        return CMDP_OK;
    });
}

const char* cmdp_report_summary(const cmdp_report* report) { return report ? report->summary.c_str() : ""; }

const char* cmdp_report_csv(const cmdp_report* report) { return report ? report->csv.c_str() : ""; }

size_t cmdp_report_field_count(const cmdp_report* report) { return report ? report->numbers.size() : 0; }

const char* cmdp_report_field_name(const cmdp_report* report, size_t index) {
    if (!report || index >= report->numbers.size()) return nullptr;
    return report->numbers[index].first.c_str();
}

cmdp_status cmdp_report_get_number(const cmdp_report* report, const char* key, double* out) {
    if (!report || !key || !out) return bad_argument("null argument");
    for (const auto& [k, v] : report->numbers) {
        if (k == key) {
            *out = v;
            return CMDP_OK;
        }
    }
    last_error = std::string("report has no field '") + key + "'";
    return CMDP_E_ARGUMENT;
}

int cmdp_report_check_passed(const cmdp_report* report) {
    if (!report) return 0;
    for (const auto& [name, ok] : report->checks)
        if (!ok) return 0;
    return 1;
}

size_t cmdp_report_check_count(const cmdp_report* report) { return report ? report->checks.size() : 0; }

const char* cmdp_report_check_name(const cmdp_report* report, size_t index) {
    if (!report || index >= report->checks.size()) return nullptr;
    return report->checks[index].first.c_str();
}

int cmdp_report_check_value(const cmdp_report* report, size_t index) {
    if (!report || index >= report->checks.size()) return 0;
    return report->checks[index].second ? 1 : 0;
}

void cmdp_report_free(cmdp_report* report) { delete report; }

} // extern "C"
