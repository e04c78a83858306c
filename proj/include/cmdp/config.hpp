#pragma once

#include "cmdp/evaluator.hpp"
#include "cmdp/generic_ctmdp.hpp"
#include "cmdp/line_chain.hpp"
#include "cmdp/queue_model.hpp"

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cmdp {

/// A scalar word or a bracketed list of words.
struct ConfigValue {
    std::vector<std::string> items;
    bool is_list = false;
    int line = 0;

    const std::string& scalar(std::string_view key) const;
    double number(std::string_view key) const;
    long integer(std::string_view key) const;
    std::vector<double> numbers(std::string_view key) const;
};

struct ConfigSection {
    std::string name;
    std::map<std::string, ConfigValue> values;
    int line = 0;
};

/**
 * Sectioned key-value text:
 *
 *   # comment
 *   lambda = 0.5
 *   group { m = 1, mu = 1, c = 0 }
 *   holding { kind = polynomial, coeffs = [0, 1] }
 *
 * Sections may repeat and may span lines.
 */
struct ConfigFile {
    std::map<std::string, ConfigValue> values;
    std::vector<ConfigSection> sections;

    static ConfigFile parse(std::string_view text);
};

enum class ModelKind { queue, table, line };
enum class Engine { analytic, generic };

struct LoadedModel {
    ModelKind kind = ModelKind::queue;
    std::optional<GroupServerModel> queue;
    std::shared_ptr<const TableCtmdpModel> table;
    std::optional<LineChainModel> line;
    MetricParams metric;

    const ActionSpace& space() const;
    /// queue: all-on everywhere; table: constant first action; line: constant(1).
    Policy default_policy() const;
    Policy parse_policy(std::string_view literal) const;
    /// Default tail for searches: all-on, constant first action, constant(1).
    TailRule default_tail() const;
    std::unique_ptr<PolicyEvaluator> evaluator(Engine engine = Engine::analytic, SolveOptions opts = {}) const;
    std::string describe() const;
};

/// Builds a model from config text. Unknown keys and sections are errors.
LoadedModel load_model(std::string_view text);
LoadedModel load_model_file(const std::string& path);
LoadedModel line_example(int which);

} // namespace cmdp
