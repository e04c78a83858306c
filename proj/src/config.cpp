#include "cmdp/config.hpp"

#include "cmdp/error.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace cmdp {

namespace {

struct Token {
    enum Kind { word, punct, end } kind;
    std::string text;
    int line;
};

std::vector<Token> tokenize(std::string_view text) {
    std::vector<Token> out;
    int line = 1;
    std::size_t i = 0;
    auto special = [](char c) { return c == '=' || c == '{' || c == '}' || c == '[' || c == ']' || c == ','; };
    while (i < text.size()) {
        const char c = text[i];
        if (c == '\n') {
            ++line;
            ++i;
        } else if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
        } else if (c == '#') {
            while (i < text.size() && text[i] != '\n') ++i;
        } else if (special(c)) {
            out.push_back({Token::punct, std::string(1, c), line});
            ++i;
        } else {
            const std::size_t start = i;
            while (i < text.size() && !special(text[i]) && text[i] != '#' &&
                   !std::isspace(static_cast<unsigned char>(text[i])))
                ++i;
            out.push_back({Token::word, std::string(text.substr(start, i - start)), line});
        }
    }
    out.push_back({Token::end, "", line});
    return out;
}

[[noreturn]] void fail(int line, const std::string& msg) {
    throw ModelError("config line " + std::to_string(line) + ": " + msg);
}

class Parser {
  public:
    explicit Parser(std::vector<Token> tokens) : t_(std::move(tokens)) {}

    ConfigFile run() {
        ConfigFile cfg;
        while (peek().kind != Token::end) {
            const Token name = expect_word("a key or section name");
            if (is('=')) {
                ++pos_;
                if (cfg.values.count(name.text)) fail(name.line, "duplicate key '" + name.text + "'");
                cfg.values[name.text] = value();
            } else if (is('{')) {
                ++pos_;
                ConfigSection section{name.text, {}, name.line};
                while (!is('}')) {
                    if (peek().kind == Token::end) fail(name.line, "unterminated section '" + name.text + "'");
                    if (is(',')) {
                        ++pos_;
                        continue;
                    }
                    const Token key = expect_word("a key");
                    if (!is('=')) fail(key.line, "expected '=' after '" + key.text + "'");
                    ++pos_;
                    if (section.values.count(key.text))
                        fail(key.line, "duplicate key '" + key.text + "' in section '" + name.text + "'");
                    section.values[key.text] = value();
                }
                ++pos_;
                cfg.sections.push_back(std::move(section));
            } else {
                fail(name.line, "expected '=' or '{' after '" + name.text + "'");
            }
        }
        return cfg;
    }

  private:
    const Token& peek() const { return t_[pos_]; }
    bool is(char c) const { return peek().kind == Token::punct && peek().text[0] == c; }

    Token expect_word(const char* what) {
        if (peek().kind != Token::word) fail(peek().line, std::string("expected ") + what);
        return t_[pos_++];
    }

    ConfigValue value() {
        ConfigValue v;
        v.line = peek().line;
        if (is('[')) {
            ++pos_;
            v.is_list = true;
            while (!is(']')) {
                if (is(',')) {
                    ++pos_;
                    continue;
                }
                v.items.push_back(expect_word("a list item or ']'").text);
            }
            ++pos_;
        } else {
            v.items.push_back(expect_word("a value").text);
        }
        return v;
    }

    std::vector<Token> t_;
    std::size_t pos_ = 0;
};

double to_number(const std::string& s, int line, std::string_view key) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v))
        fail(line, "'" + std::string(key) + "' expects a number, got '" + s + "'");
    return v;
}

void only_keys(const std::map<std::string, ConfigValue>& values, const std::set<std::string>& allowed,
               const std::string& where) {
    for (const auto& [k, v] : values)
        if (!allowed.count(k)) fail(v.line, "unknown key '" + k + "' in " + where);
}

const ConfigValue* find(const std::map<std::string, ConfigValue>& values, const std::string& key) {
    const auto it = values.find(key);
    return it == values.end() ? nullptr : &it->second;
}

const ConfigValue& require(const std::map<std::string, ConfigValue>& values, const std::string& key,
                           const std::string& where, int line) {
    const auto* v = find(values, key);
    if (!v) fail(line, "missing '" + key + "' in " + where);
    return *v;
}

std::vector<const ConfigSection*> sections_named(const ConfigFile& cfg, const std::string& name) {
    std::vector<const ConfigSection*> out;
    for (const auto& s : cfg.sections)
        if (s.name == name) out.push_back(&s);
    return out;
}

const ConfigSection* single_section(const ConfigFile& cfg, const std::string& name) {
    const auto all = sections_named(cfg, name);
    if (all.size() > 1) fail(all[1]->line, "section '" + name + "' may appear only once");
    return all.empty() ? nullptr : all.front();
}

void only_sections(const ConfigFile& cfg, const std::set<std::string>& allowed, const std::string& kind) {
    for (const auto& s : cfg.sections)
        if (!allowed.count(s.name)) fail(s.line, "unknown section '" + s.name + "' for model " + kind);
}

MetricParams read_metric(const ConfigFile& cfg) {
    const auto* m = single_section(cfg, "metric");
    if (!m) return MetricParams{};
    only_keys(m->values, {"r"}, "metric");
    const auto* r = find(m->values, "r");
    return r ? MetricParams(r->number("r")) : MetricParams{};
}

HoldingCost read_holding(const ConfigFile& cfg) {
    const auto* h = single_section(cfg, "holding");
    if (!h) return HoldingCost::polynomial({0.0, 1.0});
    const auto kind = require(h->values, "kind", "holding", h->line).scalar("kind");
    if (kind == "polynomial") {
        only_keys(h->values, {"kind", "coeffs"}, "holding");
        return HoldingCost::polynomial(require(h->values, "coeffs", "holding", h->line).numbers("coeffs"));
    }
    if (kind == "signed_linear") {
        only_keys(h->values, {"kind"}, "holding");
        return HoldingCost::signed_linear();
    }
    if (kind == "exponential") {
        only_keys(h->values, {"kind", "base"}, "holding");
        return HoldingCost::exponential(require(h->values, "base", "holding", h->line).number("base"));
    }
    fail(h->line, "unknown holding kind '" + kind + "' (polynomial, signed_linear, exponential)");
}

LoadedModel load_queue(const ConfigFile& cfg) {
    only_keys(cfg.values, {"model", "lambda", "action_floor"}, "queue model");
    only_sections(cfg, {"group", "holding", "metric"}, "queue");
    const double lambda = require(cfg.values, "lambda", "queue model", 1).number("lambda");
    std::vector<ServerGroup> groups;
    for (const auto* g : sections_named(cfg, "group")) {
        only_keys(g->values, {"m", "mu", "c"}, "group");
        ServerGroup sg;
        if (const auto* m = find(g->values, "m")) sg.servers = static_cast<int>(m->integer("m"));
        sg.rate = require(g->values, "mu", "group", g->line).number("mu");
        if (const auto* c = find(g->values, "c")) sg.cost = c->number("c");
        groups.push_back(sg);
    }
    int floor = 1;
    if (const auto* f = find(cfg.values, "action_floor")) floor = static_cast<int>(f->integer("action_floor"));
    LoadedModel m;
    m.kind = ModelKind::queue;
    m.queue.emplace(lambda, std::move(groups), read_holding(cfg), floor);
    m.metric = read_metric(cfg);
    return m;
}

LoadedModel load_table(const ConfigFile& cfg) {
    only_keys(cfg.values, {"model", "horizon", "actions", "rate_bound", "band"}, "table model");
    only_sections(cfg, {"rate", "cost", "majorant", "metric"}, "table");
    const long horizon = require(cfg.values, "horizon", "table model", 1).integer("horizon");
    std::vector<int> actions{0};
    if (const auto* a = find(cfg.values, "actions")) {
        actions.clear();
        for (double v : a->numbers("actions")) {
            if (v != std::floor(v)) fail(a->line, "actions must be integers");
            actions.push_back(static_cast<int>(v));
        }
    }
    const double bound = require(cfg.values, "rate_bound", "table model", 1).number("rate_bound");
    std::optional<int> band;
    if (const auto* b = find(cfg.values, "band")) band = static_cast<int>(b->integer("band"));

    std::vector<TableCtmdpModel::Entry> entries;
    for (const auto* r : sections_named(cfg, "rate")) {
        only_keys(r->values, {"from", "action", "to", "q"}, "rate");
        TableCtmdpModel::Entry e{};
        e.from = require(r->values, "from", "rate", r->line).integer("from");
        e.action = actions.size() == 1 && !find(r->values, "action")
                       ? actions.front()
                       : static_cast<int>(require(r->values, "action", "rate", r->line).integer("action"));
        e.to = require(r->values, "to", "rate", r->line).integer("to");
        e.rate = require(r->values, "q", "rate", r->line).number("q");
        entries.push_back(e);
    }
    std::vector<double> coeffs, action_costs;
    if (const auto* c = single_section(cfg, "cost")) {
        only_keys(c->values, {"coeffs", "action_costs"}, "cost");
        if (const auto* v = find(c->values, "coeffs")) coeffs = v->numbers("coeffs");
        if (const auto* v = find(c->values, "action_costs")) action_costs = v->numbers("action_costs");
    }
    std::optional<GeometricMajorant> majorant;
    if (const auto* mj = single_section(cfg, "majorant")) {
        only_keys(mj->values, {"coeff", "ratio"}, "majorant");
        GeometricMajorant g;
        if (const auto* v = find(mj->values, "coeff")) g.coeff = v->number("coeff");
        g.ratio = require(mj->values, "ratio", "majorant", mj->line).number("ratio");
        majorant = g;
    }
    LoadedModel m;
    m.kind = ModelKind::table;
    m.table = std::make_shared<const TableCtmdpModel>(horizon, std::move(actions), std::move(entries), bound, band,
                                                      std::move(coeffs), std::move(action_costs), majorant);
    m.metric = read_metric(cfg);
    return m;
}

LoadedModel load_line(const ConfigFile& cfg) {
    only_keys(cfg.values, {"model", "which"}, "line model");
    only_sections(cfg, {"metric"}, "line");
    const long which = require(cfg.values, "which", "line model", 1).integer("which");
    auto m = line_example(static_cast<int>(which));
    m.metric = read_metric(cfg);
    return m;
}

} // namespace

const std::string& ConfigValue::scalar(std::string_view key) const {
    if (is_list || items.size() != 1) fail(line, "'" + std::string(key) + "' expects a single value");
    return items.front();
}

double ConfigValue::number(std::string_view key) const { return to_number(scalar(key), line, key); }

long ConfigValue::integer(std::string_view key) const {
    const auto& s = scalar(key);
    long v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        fail(line, "'" + std::string(key) + "' expects an integer, got '" + s + "'");
    return v;
}

std::vector<double> ConfigValue::numbers(std::string_view key) const {
    std::vector<double> out;
    for (const auto& s : items) out.push_back(to_number(s, line, key));
    return out;
}

ConfigFile ConfigFile::parse(std::string_view text) { return Parser(tokenize(text)).run(); }

const ActionSpace& LoadedModel::space() const {
    switch (kind) {
    case ModelKind::queue: return *queue;
    case ModelKind::table: return *table;
    case ModelKind::line: return *line;
    }
    throw ModelError("unknown model kind");
}

TailRule LoadedModel::default_tail() const {
    switch (kind) {
    case ModelKind::queue: return AllOnTail{};
    case ModelKind::table: return ConstantTail{table->actions_at(0).front()};
    case ModelKind::line: return ConstantTail{Action(1)};
    }
    throw ModelError("unknown model kind");
}

Policy LoadedModel::default_policy() const {
    std::vector<Action> prefix;
    if (kind == ModelKind::line) prefix.emplace_back(1);
    return Policy(std::move(prefix), default_tail(), "default").bind(space());
}

Policy LoadedModel::parse_policy(std::string_view literal) const { return Policy::parse(literal).bind(space()); }

std::unique_ptr<PolicyEvaluator> LoadedModel::evaluator(Engine engine, SolveOptions opts) const {
    switch (kind) {
    case ModelKind::queue:
        if (engine == Engine::generic)
            return std::make_unique<GenericEvaluator>(std::make_shared<const BirthDeathCtmdp>(*queue), opts);
        return std::make_unique<QueueEvaluator>(*queue);
    case ModelKind::table: return std::make_unique<GenericEvaluator>(table, opts);
    case ModelKind::line: return std::make_unique<LineEvaluator>(*line);
    }
    throw ModelError("unknown model kind");
}

std::string LoadedModel::describe() const {
    std::ostringstream os;
    switch (kind) {
    case ModelKind::queue:
        os << "queue lambda=" << queue->arrival_rate() << " groups=";
        for (const auto& g : queue->groups()) os << "(m=" << g.servers << ",mu=" << g.rate << ",c=" << g.cost << ")";
        os << " holding=" << queue->holding().describe() << " floor=" << queue->action_floor();
        break;
    case ModelKind::table:
        os << "table horizon=" << table->horizon() << " band=" << table->band()
           << " rate_bound=" << table->rate_bound();
        break;
    case ModelKind::line: os << "line " << line->name(); break;
    }
    os << " r=" << metric.r();
    return os.str();
}

LoadedModel load_model(std::string_view text) {
    const auto cfg = ConfigFile::parse(text);
    std::string kind = "queue";
    if (const auto* m = find(cfg.values, "model")) kind = m->scalar("model");
    if (kind == "queue") return load_queue(cfg);
    if (kind == "table") return load_table(cfg);
    if (kind == "line") return load_line(cfg);
    throw ModelError("unknown model kind '" + kind + "' (queue, table, line)");
}

LoadedModel load_model_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ModelError("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return load_model(buf.str());
}

LoadedModel line_example(int which) {
    LoadedModel m;
    m.kind = ModelKind::line;
    if (which == 1) m.line = LineChainModel::example1();
    else if (which == 2) m.line = LineChainModel::example2();
    else throw ModelError("line example must be 1 or 2");
    return m;
}

} // namespace cmdp
