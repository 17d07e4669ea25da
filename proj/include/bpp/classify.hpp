#pragma once
// Structural analyses: norm-preserving silent closure, redundant variables,
// generators, the variable order behind the finite-classes argument,
// subclass membership and the inequivalence semi-decision driver.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bpp/approx.hpp"

namespace bpp {

enum class Purity { Pure, Impure, Unknown };
std::string_view to_string(Purity p);

/// True iff X -tau-> alpha keeps the norm (|alpha| = |X|).
bool norm_preserving(const ProcessDescription& desc, const Rule& r);

/// Configurations reachable from c by silent norm-preserving steps, c
/// included. Sizes are capped at max(K, |c|).
Bounded succ0(const ProcessDescription& desc, const Configuration& c, const StepCaps& caps = {});

struct Unification {
    ProcessDescription desc;
    /// Old variable index -> variable of `desc`.
    std::vector<VariableId> representative;
    /// Classes of mutually succ0-reachable singletons, in declaration order.
    std::vector<std::vector<VariableId>> classes;
    bool pruned = false;
};
Unification unify_redundant(const ProcessDescription& desc, const StepCaps& caps = {});

struct GeneratorReport {
    std::map<VariableId, Purity> purity; // generators only
    bool pruned = false;
};
/// Exact on normed descriptions; otherwise a caps-bounded search where a
/// purity verdict that depends on pruned states is Unknown.
GeneratorReport generators(const ProcessDescription& desc, const StepCaps& caps = {});

struct VariableOrder {
    std::vector<VariableId> order; // greatest first; empty on failure
    std::vector<VariableId> cycle; // witness on failure
    bool ok() const { return cycle.empty(); }
};
/// Linear order with every non-generating norm-preserving silent rule
/// X -> alpha putting alpha strictly below X. Ties keep declaration order.
VariableOrder variable_order(const ProcessDescription& desc);

/// Exact set of derivatives of X by non-generating norm-preserving silent
/// rules, sorted. Throws Error when no order exists.
std::vector<Configuration> nongenerating_succ0(const ProcessDescription& desc, VariableId x);
/// d * c^l + 1 for X, with c the largest nongenerating_succ0 count among
/// variables below X (1 if none).
std::uint64_t finite_classes_bound(const ProcessDescription& desc, VariableId x);

/// Every strongly connected component of the production graph is a single
/// variable (self-loops allowed).
bool decreasing(const ProcessDescription& desc);

struct ClassReport {
    bool normed = false;
    std::vector<std::string> zero_norm_vars;
    std::size_t visible_action_count = 0;
    std::vector<std::vector<std::string>> redundant_classes;
    std::map<std::string, Purity> generators;
    std::optional<bool> stirling_member; // nullopt: unknown within caps
    bool stribrna_member = false;
    std::string stribrna_reason;
    bool decreasing = false;
    std::optional<std::vector<std::string>> variable_order;
    bool pruned = false;
};
ClassReport classify(const ProcessDescription& desc, const StepCaps& caps = {});

struct SemidecideBudget {
    unsigned max_level = 4;
    unsigned schedule_steps = 3; // default caps, then S, K += 2 and W += 1 per step
    std::optional<Regime> regime; // overrides the class-based choice
};
struct SemidecideResult {
    Verdict verdict;
    Regime regime = Regime::Word;
    std::vector<std::string> warnings;
};
/// Regime from the class report (LongLong for the pure-generator class,
/// Parikh for the one-action class, Word otherwise), then
/// distinguishing_level over a growing caps schedule. A Distinguished
/// verdict reached with Duplicator pruning is only accepted once the next
/// schedule step confirms it.
SemidecideResult semidecide_inequivalence(const ProcessDescription& desc, const Configuration& a,
                                          const Configuration& b, const SemidecideBudget& budget = {});
std::vector<StepCaps> caps_schedule(unsigned steps);

} // namespace bpp
