#pragma once
/// \file
/// Approximant games in four regimes: a caps-bounded explicit solver, an
/// exact symbolic backend via Presburger formulas, strategy certificates and
/// candidate-bisimulation checking.

#include <atomic>
#include <memory>
#include <mutex>
#include <optional>
#include <string_view>
#include <unordered_map>

#include "bpp/reach.hpp"

namespace bpp {

enum class Regime { ShortLong, LongLong, Word, Parikh };
enum class Side { Left, Right };
enum class Outcome { Related, Distinguished, Inconclusive };
enum class Backend { Bounded, Symbolic };

std::string_view to_string(Regime r);
std::string_view to_string(Side s);
std::string_view to_string(Outcome o);
std::string_view to_string(Backend b);
/// Accepts sl/ll/word/parikh and the full names.
std::optional<Regime> parse_regime(std::string_view s);
std::optional<Backend> parse_backend(std::string_view s);
inline Side other(Side s) { return s == Side::Left ? Side::Right : Side::Left; }

/// A Spoiler move. For Word and Parikh the label holds visible letters only
/// and may be empty (a purely silent weak move).
struct Move {
    Side side = Side::Left;
    std::vector<ActionId> label;
    Configuration target;
    bool operator==(const Move&) const = default;
};

/// Spoiler strategy. A node with no responses is a win: Duplicator is stuck.
struct StrategyNode {
    unsigned level = 0;
    Move move;
    std::vector<std::pair<Configuration, std::shared_ptr<const StrategyNode>>> responses;
};

struct Verdict {
    Outcome outcome = Outcome::Related;
    unsigned level = 0;
    std::shared_ptr<const StrategyNode> strategy;
    StepCaps caps;
    Backend backend = Backend::Bounded;
    bool caps_relative = true;
    bool spoiler_pruned = false;
    bool duplicator_pruned = false;
    std::optional<bool> stable; // stability mode only
};

struct GameOptions {
    bool stability = false; // rerun at K, K+2, K+4
    bool parallel = false;  // fan out Spoiler's root moves with OpenMP
};

/// Spoiler's moves from c, ordered visible first, then norm-changing first.
/// The silent stay is never a move. `pruned` is or-ed with the cap status.
std::vector<Move> spoiler_moves(const ProcessDescription& desc, const Configuration& c, Regime regime,
                                const StepCaps& caps, Side side = Side::Left, bool* pruned = nullptr);
/// Duplicator's answers from c to m, sorted. Duplicator's silent steps are
/// bounded by the size cap only.
std::vector<Configuration> duplicator_responses(const ProcessDescription& desc, const Configuration& c,
                                                const Move& m, Regime regime, const StepCaps& caps,
                                                bool* pruned = nullptr);

/// Bounded game solver. Owns its memo (per regime and caps); not shareable
/// across threads except through its own parallel root fan-out.
class Solver {
public:
    Solver(const ProcessDescription& desc, Regime regime, StepCaps caps, bool parallel = false);

    /// Distinguished at level n (Spoiler wins n rounds).
    bool distinguished(const Configuration& a, const Configuration& b, unsigned n);
    /// Smallest level <= max at which the pair is distinguished.
    std::optional<unsigned> first_level(const Configuration& a, const Configuration& b, unsigned max);
    /// Certificate at the smallest distinguishing level <= n.
    std::shared_ptr<const StrategyNode> strategy(const Configuration& a, const Configuration& b, unsigned n);

    /// Cached move and response sets.
    std::vector<Move> moves(const Configuration& c, Side side);
    const std::vector<Configuration>& responses(const Configuration& c, const Move& m);

    bool spoiler_pruned() const { return spoiler_pruned_; }
    bool duplicator_pruned() const { return duplicator_pruned_; }
    const ProcessDescription& description() const { return desc_; }
    Regime regime() const { return regime_; }
    const StepCaps& caps() const { return caps_; }
    std::size_t memo_size() const;

private:
    struct PairHash {
        std::size_t operator()(const std::pair<Configuration, Configuration>& p) const;
    };
    struct Entry {
        unsigned related_upto = 0;
        unsigned distinguished_at = ~0u;
    };
    struct LabelKey {
        Configuration c;
        std::vector<ActionId> label;
        bool operator==(const LabelKey&) const = default;
    };
    struct LabelHash {
        std::size_t operator()(const LabelKey& k) const;
    };

    bool solve(const Configuration& a, const Configuration& b, unsigned n);
    bool move_wins(const Configuration& a, const Configuration& b, const Move& m, unsigned n);
    std::optional<bool> lookup(const std::pair<Configuration, Configuration>& key, unsigned n) const;
    void store(const std::pair<Configuration, Configuration>& key, unsigned n, bool d);

    const ProcessDescription& desc_;
    Regime regime_;
    StepCaps caps_;
    bool parallel_;
    std::atomic<bool> spoiler_pruned_{false}, duplicator_pruned_{false};

    mutable std::mutex mu_;
    std::unordered_map<std::pair<Configuration, Configuration>, Entry, PairHash> memo_;
    std::unordered_map<Configuration, std::vector<Move>> moves_;
    std::unordered_map<LabelKey, std::vector<Configuration>, LabelHash> responses_;
    std::unordered_map<std::pair<Configuration, Configuration>, std::shared_ptr<const StrategyNode>, PairHash>
        strategies_;
};

/// Level-n check. Level 0 and identical pairs are Related. The symbolic
/// backend rejects the Word regime.
Verdict check_level(const ProcessDescription& desc, const Configuration& a, const Configuration& b,
                    Regime regime, unsigned n, Backend backend = Backend::Bounded, const StepCaps& caps = {},
                    const GameOptions& opts = {});

/// Smallest distinguishing level up to max_level. Without one the pair is
/// Related, or Inconclusive when Spoiler's moves were cut by the caps.
Verdict distinguishing_level(const ProcessDescription& desc, const Configuration& a, const Configuration& b,
                             Regime regime, const StepCaps& caps, unsigned max_level,
                             const GameOptions& opts = {});

/// Psi_n over the free variables alpha_X, beta_X, quantifier-free. Results
/// are cached per (description, regime, n).
pa::Formula approximant_formula(const ProcessDescription& desc, Regime regime, unsigned n);
/// The same relation written out directly, with all quantifiers in place.
pa::Formula approximant_formula_raw(const ProcessDescription& desc, Regime regime, unsigned n);
/// Decide Psi_n at a pair. `qo` bounds the per-pair fallback.
bool symbolic_related(const ProcessDescription& desc, const Configuration& a, const Configuration& b,
                      Regime regime, unsigned n, const pa::QeOptions& qo = {});

/// R over alpha_X, beta_X. True iff R is symmetric and every strong a-step
/// from the left is matched by a weak a-step on the right into R.
bool check_candidate_bisimulation(const ProcessDescription& desc, const pa::Formula& r);
/// The identity relation alpha = beta.
pa::Formula identity_relation(const ProcessDescription& desc);

} // namespace bpp
