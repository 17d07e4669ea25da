#pragma once
/// \file
/// Basic Parallel Processes: process descriptions, multiset configurations,
/// the one-step semantics and norms.

#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace bpp {

/// Base class of all errors raised by the toolkit.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Syntax or validation error in a textual input, with a 1-based position.
class ParseError : public Error {
public:
    ParseError(std::size_t line, std::size_t column, const std::string& msg);
    std::size_t line() const { return line_; }
    std::size_t column() const { return column_; }
    const std::string& detail() const { return detail_; }

private:
    std::size_t line_;
    std::size_t column_;
    std::string detail_;
};

struct VariableId {
    std::uint32_t index = 0;
    auto operator<=>(const VariableId&) const = default;
};

struct ActionId {
    std::uint32_t index = 0;
    bool silent() const { return index == 0; }
    auto operator<=>(const ActionId&) const = default;
};

inline constexpr ActionId kSilent{0};
inline constexpr std::string_view kSilentName = "tau";

/// A finite multiset over the variables of a description.
///
/// Counts are stored densely by variable index with trailing zeros trimmed,
/// so equality and ordering do not depend on the description's size.
class Configuration {
public:
    Configuration() = default;
    explicit Configuration(std::vector<std::uint32_t> counts);

    static Configuration singleton(VariableId v, std::uint32_t k = 1);

    std::uint32_t count(VariableId v) const {
        return v.index < counts_.size() ? counts_[v.index] : 0;
    }
    std::uint64_t size() const;
    bool empty() const { return counts_.empty(); }
    /// One past the largest variable index with a nonzero count.
    std::size_t extent() const { return counts_.size(); }
    std::span<const std::uint32_t> counts() const { return counts_; }

    void add(VariableId v, std::uint32_t k = 1);
    /// Removes k copies of v; throws if fewer are present.
    void remove(VariableId v, std::uint32_t k = 1);
    void add(const Configuration& other);

    Configuration operator+(const Configuration& other) const;
    /// Multiset inclusion (count-wise <=).
    bool included_in(const Configuration& other) const;

    std::size_t hash() const;

    bool operator==(const Configuration&) const = default;
    auto operator<=>(const Configuration&) const = default;

private:
    void trim();
    std::vector<std::uint32_t> counts_;
};

struct ConfigurationHash {
    std::size_t operator()(const Configuration& c) const { return c.hash(); }
};

/// Natural number or infinity; addition absorbs infinity.
class NormValue {
public:
    constexpr NormValue() = default;
    constexpr explicit NormValue(std::uint64_t v) : value_(v) {}
    static constexpr NormValue infinite() {
        NormValue n;
        n.infinite_ = true;
        return n;
    }

    bool is_infinite() const { return infinite_; }
    std::uint64_t value() const { return value_; }

    NormValue operator+(const NormValue& o) const;
    NormValue& operator+=(const NormValue& o) { return *this = *this + o; }
    bool operator==(const NormValue& o) const {
        return infinite_ == o.infinite_ && (infinite_ || value_ == o.value_);
    }
    bool operator<(const NormValue& o) const {
        if (infinite_) return false;
        return o.infinite_ || value_ < o.value_;
    }
    std::string to_string() const;

private:
    std::uint64_t value_ = 0;
    bool infinite_ = false;
};

struct Rule {
    VariableId lhs;
    ActionId action;
    Configuration rhs;
    bool operator==(const Rule&) const = default;
};

/// A validated, immutable BPP process description.
///
/// Action 0 is always the silent action "tau". Variables without rules are
/// allowed and behave as deadlocks.
class ProcessDescription {
public:
    class Builder;

    std::size_t variable_count() const { return variables_.size(); }
    std::size_t action_count() const { return actions_.size(); }

    const std::string& variable_name(VariableId v) const { return variables_.at(v.index); }
    const std::string& action_name(ActionId a) const { return actions_.at(a.index); }
    std::optional<VariableId> find_variable(std::string_view name) const;
    std::optional<ActionId> find_action(std::string_view name) const;

    std::span<const Rule> rules() const { return rules_; }
    const Rule& rule(std::size_t i) const { return rules_.at(i); }
    /// Indices into rules() of the rules rewriting v.
    std::span<const std::size_t> rules_of(VariableId v) const { return by_lhs_.at(v.index); }
    bool has_visible_rule(VariableId v) const { return visible_.at(v.index); }

    /// Per-variable norms (see norms()).
    NormValue norm_of(VariableId v) const { return norms_.at(v.index); }
    std::span<const NormValue> norm_table() const { return norms_; }

    const std::vector<std::string>& warnings() const { return warnings_; }

    bool operator==(const ProcessDescription& o) const {
        return variables_ == o.variables_ && actions_ == o.actions_ && rules_ == o.rules_;
    }

private:
    ProcessDescription() = default;

    std::vector<std::string> variables_;
    std::vector<std::string> actions_;
    std::vector<Rule> rules_;
    std::vector<std::vector<std::size_t>> by_lhs_;
    std::vector<bool> visible_;
    std::vector<NormValue> norms_;
    std::vector<std::string> warnings_;
    std::unordered_map<std::string, std::uint32_t> variable_index_;
    std::unordered_map<std::string, std::uint32_t> action_index_;
};

/// Incremental construction of a description. Used by the parser and by the
/// corpus constructors.
class ProcessDescription::Builder {
public:
    Builder();

    /// Declares a variable; re-declaring an existing name returns its id.
    VariableId variable(std::string_view name);
    /// Declares a visible action; "tau" maps to the silent action.
    ActionId action(std::string_view name);

    std::optional<VariableId> find_variable(std::string_view name) const;
    std::optional<ActionId> find_action(std::string_view name) const;

    /// Adds a rule. Returns false (and records a warning) for duplicates.
    bool rule(VariableId lhs, ActionId action, Configuration rhs);
    /// Convenience form used by constructors: rhs is a list of variable names,
    /// repeated names accumulate; every name is declared on demand.
    bool rule(std::string_view lhs, std::string_view action,
              std::initializer_list<std::string_view> rhs);

    void warn(std::string msg) { desc_.warnings_.push_back(std::move(msg)); }

    ProcessDescription build() &&;

private:
    ProcessDescription desc_;
};

/// Shortest-word-to-deadlock norms, counting visible actions only.
std::vector<NormValue> norms(const ProcessDescription& desc);
NormValue norm(const ProcessDescription& desc, const Configuration& c);

/// True iff no variable of c has a rule with a visible action.
bool is_deadlock(const ProcessDescription& desc, const Configuration& c);

struct Step {
    ActionId action;
    Configuration target;
    bool operator==(const Step&) const = default;
};

/// All one-step successors of c, deduplicated, in rule order.
std::vector<Step> strong_steps(const ProcessDescription& desc, const Configuration& c);

/// Applies rule `r` to c; c must contain the rule's left-hand side.
Configuration apply_rule(const Rule& r, const Configuration& c);

ProcessDescription parse_description(std::string_view text);
Configuration parse_process(std::string_view text, const ProcessDescription& desc);

/// Canonical rendering: declaration order, `^k` for k >= 2, `0` for the empty
/// configuration.
std::string render(const ProcessDescription& desc, const Configuration& c);
/// Renders a description in the text format accepted by parse_description.
std::string render(const ProcessDescription& desc);

/// All configurations over `variables` variables with total size <= max_size,
/// in size-then-lexicographic order.
std::vector<Configuration> configurations_up_to(std::size_t variables, std::size_t max_size);

} // namespace bpp

template <>
struct std::hash<bpp::Configuration> {
    std::size_t operator()(const bpp::Configuration& c) const noexcept { return c.hash(); }
};
