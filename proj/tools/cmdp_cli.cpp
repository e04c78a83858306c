// Command-line front end. Talks to the library only through the C API.
#include "cmdp/cmdp.h"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <thread>
#include <vector>

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitModel = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitCheck = 4;
constexpr int kExitInternal = 1;

struct Failure {
    int code;
    std::string message;
};

int exit_code(cmdp_status s) {
    switch (s) {
    case CMDP_OK: return kExitOk;
    case CMDP_E_ARGUMENT:
    case CMDP_E_MODEL: return kExitModel;
    case CMDP_E_NUMERIC: return kExitNumeric;
    case CMDP_E_CHECK: return kExitCheck;
    default: return kExitInternal;
    }
}

void ok(cmdp_status s) {
    if (s != CMDP_OK) throw Failure{exit_code(s), cmdp_last_error()};
}

template <class T, void (*Free)(T*)>
struct Deleter {
    void operator()(T* p) const { Free(p); }
};
using ModelPtr = std::unique_ptr<cmdp_model, Deleter<cmdp_model, cmdp_model_free>>;
using PolicyPtr = std::unique_ptr<cmdp_policy, Deleter<cmdp_policy, cmdp_policy_free>>;
using ReportPtr = std::unique_ptr<cmdp_report, Deleter<cmdp_report, cmdp_report_free>>;

std::string take_string(char* s) {
    std::string out = s ? s : "";
    cmdp_string_free(s);
    return out;
}

struct Settings {
    std::string config;
    std::string policy;
    std::string against;
    std::string tail;
    std::string engine = "analytic";
    std::string mode;
    std::string out = "cmdp_out";
    double tol = 1e-8;
    double r = 0.0;
    long length = 12;
    std::uint64_t cap = 1u << 22;
    std::uint64_t seed = 1;
    unsigned workers = 0;
    long k_cap = 0;
    std::vector<long> ks;
    std::size_t samples = 32;
    long window = 8;
    int which = 2;
    long stream_t = 100000;
    double horizon = 1e5;
    double warmup = 1e3;
    int batches = 20;
    bool self_check = false;
    std::string manifest;
};

ModelPtr load(const Settings& s) {
    if (s.config.empty()) throw Failure{kExitModel, "--config is required"};
    cmdp_model* m = nullptr;
    ok(cmdp_model_load_file(s.config.c_str(), &m));
    return ModelPtr(m);
}

PolicyPtr policy_for(const cmdp_model* m, const std::string& literal) {
    cmdp_policy* p = nullptr;
    if (literal.empty()) ok(cmdp_policy_default(m, &p));
    else ok(cmdp_policy_parse(m, literal.c_str(), &p));
    return PolicyPtr(p);
}

cmdp_engine engine_of(const std::string& e) {
    return e == "generic" ? CMDP_ENGINE_GENERIC : CMDP_ENGINE_ANALYTIC;
}

ReportPtr run_command(const std::string& cmd, const Settings& s, json& params) {
    cmdp_report* rep = nullptr;
    if (cmd == "eval") {
        auto m = load(s);
        auto u = policy_for(m.get(), s.policy);
        cmdp_eval_options o;
        cmdp_eval_options_init(&o);
        o.tol = s.tol;
        o.engine = engine_of(s.engine);
        o.k_cap = s.k_cap;
        params["policy"] = take_string([&] { char* t = nullptr; cmdp_policy_format(u.get(), &t); return t; }());
        ok(cmdp_eval(m.get(), u.get(), &o, &rep));
    } else if (cmd == "optimize") {
        auto m = load(s);
        cmdp_optimize_options o;
        cmdp_optimize_options_init(&o);
        o.tol = s.tol;
        o.length = s.length;
        o.tail = s.tail.empty() ? nullptr : s.tail.c_str();
        o.cap = s.cap;
        o.mode = s.mode == "min" ? 1 : s.mode == "max" ? 2 : 0;
        o.workers = s.workers;
        o.engine = engine_of(s.engine);
        ok(cmdp_optimize(m.get(), &o, &rep));
    } else if (cmd == "continuity") {
        auto m = load(s);
        auto u = policy_for(m.get(), s.policy);
        PolicyPtr v;
        if (!s.against.empty()) v = policy_for(m.get(), s.against);
        cmdp_continuity_options o;
        cmdp_continuity_options_init(&o);
        o.tol = s.tol;
        o.ks = s.ks.data();
        o.n_ks = s.ks.size();
        o.samples = s.samples;
        o.seed = s.seed;
        o.window = s.window;
        o.workers = s.workers;
        o.r = s.r;
        o.engine = engine_of(s.engine);
        ok(cmdp_continuity(m.get(), u.get(), v.get(), &o, &rep));
    } else if (cmd == "examples") {
        cmdp_examples_options o;
        cmdp_examples_options_init(&o);
        o.which = s.which;
        o.policy = s.policy.empty() ? nullptr : s.policy.c_str();
        o.length = s.length;
        o.stream_t = s.stream_t;
        ok(cmdp_examples(&o, &rep));
    } else if (cmd == "simulate") {
        auto m = load(s);
        auto u = policy_for(m.get(), s.policy);
        cmdp_simulate_options o;
        cmdp_simulate_options_init(&o);
        o.horizon = s.horizon;
        o.warmup = s.warmup;
        o.seed = s.seed;
        o.batches = s.batches;
        o.tol = s.tol;
        ok(cmdp_simulate(m.get(), u.get(), &o, &rep));
    } else {
        throw Failure{kExitModel, "unknown subcommand '" + cmd + "'"};
    }
    return ReportPtr(rep);
}

std::string timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

int run(const std::vector<std::string>& args);

int replay(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Failure{kExitModel, "cannot open manifest '" + path + "'"};
    json manifest;
    try {
        in >> manifest;
    } catch (const json::exception& e) {
        throw Failure{kExitModel, std::string("manifest is not valid JSON: ") + e.what()};
    }
    if (!manifest.contains("argv") || !manifest["argv"].is_array())
        throw Failure{kExitModel, "manifest lacks an argv array"};
    std::vector<std::string> args = manifest["argv"].get<std::vector<std::string>>();
    if (args.size() >= 2 && args[1] == "replay") throw Failure{kExitModel, "manifest records a replay"};
    return run(args);
}

int run(const std::vector<std::string>& args) {
    CLI::App app{"Average-cost evaluation, continuity diagnostics and policy search for countable-state MDPs",
                 "cmdp"};
    app.require_subcommand(1);
    Settings s;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--tol", s.tol, "Truncation tolerance")->capture_default_str();
        sub->add_option("--out", s.out, "Output directory for CSV and manifest")->capture_default_str();
        sub->add_flag("--self-check", s.self_check, "Exit 4 when a recorded self-check fails");
    };
    auto add_model = [&](CLI::App* sub) {
        sub->add_option("--config", s.config, "Model config file")->required();
        sub->add_option("--engine", s.engine, "analytic or generic")
            ->check(CLI::IsMember({"analytic", "generic"}))
            ->capture_default_str();
        sub->add_option("--r", s.r, "Metric parameter, 0 < r < 0.5 (default: config value or 0.1)");
    };

    auto* eval = app.add_subcommand("eval", "Long-run average cost of one policy");
    add_common(eval);
    add_model(eval);
    eval->add_option("--policy", s.policy, "Policy literal (default: all-on / first action)");
    eval->add_option("--k-cap", s.k_cap, "Truncation cap for the generic engine");

    auto* optimize = app.add_subcommand("optimize", "Exhaustive search over prefix-L policies");
    add_common(optimize);
    add_model(optimize);
    optimize->add_option("--L", s.length, "Prefix length")->capture_default_str();
    optimize->add_option("--tail", s.tail, "Tail rule: constant(a) or all-on");
    optimize->add_option("--cap", s.cap, "Enumeration cap")->capture_default_str();
    optimize->add_option("--mode", s.mode, "min or max (default: model objective)")
        ->check(CLI::IsMember({"min", "max"}));
    optimize->add_option("--workers", s.workers, "Worker threads (0: all cores)");

    auto* continuity = app.add_subcommand("continuity", "Pair bound or neighbourhood scan");
    add_common(continuity);
    add_model(continuity);
    continuity->add_option("--policy", s.policy, "Centre policy u");
    continuity->add_option("--against", s.against, "Second policy; omit for a scan over --ks");
    continuity->add_option("--ks", s.ks, "Ball indices k (radius r^k)")->delimiter(',');
    continuity->add_option("--samples", s.samples, "Random neighbours per k")->capture_default_str();
    continuity->add_option("--seed", s.seed, "Sampler seed")->capture_default_str();
    continuity->add_option("--window", s.window, "Mutated states beyond k")->capture_default_str();
    continuity->add_option("--workers", s.workers, "Worker threads (0: all cores)");

    auto* examples = app.add_subcommand("examples", "Deterministic line-chain examples");
    add_common(examples);
    examples->add_option("--which", s.which, "1 (cost 1/i) or 2 (reward 1-1/i)")
        ->check(CLI::IsMember({1, 2}))
        ->capture_default_str();
    examples->add_option("--policy", s.policy, "Policy literal to evaluate");
    examples->add_option("--L", s.length, "Prefix length for the supremum gap")->capture_default_str();
    examples->add_option("--stream-T", s.stream_t, "History stream length (0: skip)")->capture_default_str();

    auto* simulate = app.add_subcommand("simulate", "Discrete-event simulation of a queue policy");
    add_common(simulate);
    simulate->add_option("--config", s.config, "Model config file")->required();
    simulate->add_option("--policy", s.policy, "Policy literal");
    simulate->add_option("--horizon", s.horizon, "Simulated time")->capture_default_str();
    simulate->add_option("--warmup", s.warmup, "Discarded initial time")->capture_default_str();
    simulate->add_option("--batches", s.batches, "Batch count")->capture_default_str();
    simulate->add_option("--seed", s.seed, "RNG seed")->capture_default_str();

    auto* rep = app.add_subcommand("replay", "Re-run the command recorded in a manifest");
    rep->add_option("manifest", s.manifest, "Manifest JSON")->required();

    std::vector<std::string> rev(args.rbegin(), args.rend() - 1);
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n\n" << app.help();
        return kExitModel;
    }

    if (rep->parsed()) return replay(s.manifest);

    CLI::App* sub = app.get_subcommands().front();
    const std::string cmd = sub->get_name();
    json params;
    for (const auto* opt : sub->get_options()) {
        if (opt->get_name() == "--help") continue;
        const auto res = opt->results();
        if (res.empty()) continue;
        params[opt->get_name()] = res.size() == 1 ? json(res.front()) : json(res);
    }

    const auto start = std::chrono::steady_clock::now();
    const std::string started = timestamp();
    ReportPtr report = run_command(cmd, s, params);
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    std::cout << cmdp_report_summary(report.get());

    std::error_code ec;
    fs::create_directories(s.out, ec);
    if (ec) throw Failure{kExitModel, "cannot create output directory '" + s.out + "': " + ec.message()};
    const fs::path csv_path = fs::path(s.out) / (cmd + ".csv");
    const fs::path manifest_path = fs::path(s.out) / (cmd + ".manifest.json");
    {
        std::ofstream csv(csv_path);
        csv << cmdp_report_csv(report.get());
        if (!csv) throw Failure{kExitModel, "cannot write " + csv_path.string()};
    }

    json manifest;
    manifest["command"] = cmd;
    manifest["argv"] = args;
    manifest["config"] = s.config.empty() ? json(nullptr) : json(fs::absolute(s.config).string());
    manifest["parameters"] = params;
    manifest["versions"] = {{"cmdp", cmdp_version()}};
    manifest["outputs"] = {{"csv", csv_path.string()}, {"manifest", manifest_path.string()}};
    manifest["started_at"] = started;
    manifest["wall_clock_seconds"] = wall;
    json checks = json::object();
    for (std::size_t i = 0; i < cmdp_report_check_count(report.get()); ++i)
        checks[cmdp_report_check_name(report.get(), i)] = cmdp_report_check_value(report.get(), i) == 1;
    manifest["checks"] = checks;
    std::ofstream(manifest_path) << manifest.dump(2) << '\n';

    std::cout << "csv = " << csv_path.string() << "\nmanifest = " << manifest_path.string() << '\n';
    if (s.self_check && !cmdp_report_check_passed(report.get())) {
        std::cerr << "self-check failed\n";
        return kExitCheck;
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    std::vector<std::string> args(argv, argv + argc);
    try {
        return run(args);
    } catch (const Failure& f) {
        std::cerr << "error: " << f.message << '\n';
        return f.code;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInternal;
    }
}
