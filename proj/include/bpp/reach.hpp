#pragma once
/// \file
/// Parikh-image reachability, bounded weak-successor enumeration and the
/// Presburger encodings of Reach, Step and WStep.

#include <set>
#include <span>
#include <vector>

#include "bpp/model.hpp"
#include "bpp/presburger.hpp"

namespace bpp {

/// Count per action, indexed by ActionId (the silent action included).
class ParikhVector {
public:
    ParikhVector() = default;
    explicit ParikhVector(std::size_t actions) : counts_(actions, 0) {}
    explicit ParikhVector(std::vector<std::uint32_t> counts) : counts_(std::move(counts)) {}

    std::uint32_t count(ActionId a) const { return a.index < counts_.size() ? counts_[a.index] : 0; }
    void add(ActionId a, std::uint32_t k = 1);
    void set(ActionId a, std::uint32_t k);
    std::uint64_t total() const;
    std::span<const std::uint32_t> counts() const { return counts_; }

    bool operator==(const ParikhVector& o) const;
    bool operator<(const ParikhVector& o) const;

private:
    std::vector<std::uint32_t> counts_;
};

/// Firing counts per rule index.
using FiringVector = std::vector<std::uint32_t>;

/// A silent budget of kUnbudgeted leaves silent steps bounded only by the
/// size cap.
inline constexpr std::uint32_t kUnbudgeted = ~0u;

struct StepCaps {
    std::uint32_t silent_budget = 4; // S: silent steps per move, in total
    std::uint32_t size_cap = 6;      // K: largest configuration visited
    std::uint32_t word_cap = 4;      // W: longest Spoiler word (visible letters)
    bool operator==(const StepCaps&) const = default;
};

/// Result of a caps-bounded enumeration. `pruned` is set when some successor
/// was cut off by the size cap or the silent budget.
struct Bounded {
    std::vector<Configuration> targets;
    bool pruned = false;
};

/// First firing vector (lexicographic over rule index) that moves alpha to
/// beta with Parikh image mu and satisfies the connectivity condition.
std::optional<FiringVector> parikh_witness(const ProcessDescription& desc, const Configuration& alpha,
                                           const ParikhVector& mu, const Configuration& beta);
bool parikh_reachable(const ProcessDescription& desc, const Configuration& alpha,
                      const ParikhVector& mu, const Configuration& beta);
/// Every beta with parikh_reachable(alpha, mu, beta), sorted.
std::vector<Configuration> parikh_targets(const ProcessDescription& desc, const Configuration& alpha,
                                          const ParikhVector& mu);
/// True iff the rules used by x are all enabled from alpha in the graph of
/// used rules (edges from a rule's lhs to its rhs variables).
bool connected_from(const ProcessDescription& desc, const Configuration& alpha, const FiringVector& x);

/// All (mu, beta) realized by firing sequences of length <= budget.
std::set<std::pair<ParikhVector, Configuration>> reach_oracle_bfs(const ProcessDescription& desc,
                                                                  const Configuration& alpha,
                                                                  std::size_t budget);

/// beta with alpha =a=> beta (a may be silent), using at most S silent steps
/// and never leaving configurations of size <= K (alpha itself is exempt).
Bounded enumerate_weak_successors(const ProcessDescription& desc, const Configuration& alpha,
                                  ActionId a, const StepCaps& caps);
/// Endpoints of the weak word w (visible letters) with at most S silent
/// steps across the whole word.
Bounded weak_word_successors(const ProcessDescription& desc, const Configuration& alpha,
                             std::span<const ActionId> word, const StepCaps& caps);

/// Endpoints of any weak word whose visible Parikh image is `visible` (silent
/// counts in `visible` are ignored).
Bounded weak_parikh_successors(const ProcessDescription& desc, const Configuration& alpha,
                               const ParikhVector& visible, const StepCaps& caps);
/// Every weak word of visible length <= W (the empty word first) that some
/// path from alpha realizes, paired with its endpoints. The silent budget is
/// shared across each word. Words at the cap that extend further are marked
/// pruned.
std::vector<std::pair<std::vector<ActionId>, Bounded>> weak_words(const ProcessDescription& desc,
                                                                 const Configuration& alpha,
                                                                 const StepCaps& caps);

// --- Presburger encodings --------------------------------------------------

/// Free variables of the standard encodings: alpha_X, mu_a, beta_X.
struct ReachVariables {
    std::vector<pa::Var> alpha, mu, beta;
};
ReachVariables reach_variables(const ProcessDescription& desc);

std::vector<pa::Term> as_terms(std::span<const pa::Var> vs);
std::vector<pa::Term> as_terms(const Configuration& c, std::size_t variables);

/// Reach(alpha, mu, beta) over arbitrary terms. Firing counts and level
/// variables are fresh and existentially bound.
pa::Formula reach_formula(const ProcessDescription& desc, std::span<const pa::Term> alpha,
                          std::span<const pa::Term> mu, std::span<const pa::Term> beta);
pa::Formula reach_formula(const ProcessDescription& desc);

/// alpha =a=> beta: exists k. Reach(alpha, mu, beta), mu(a) = 1, mu(tau) = k.
pa::Formula wstep_formula(const ProcessDescription& desc, ActionId a,
                          std::span<const pa::Term> alpha, std::span<const pa::Term> beta);
pa::Formula wstep_formula(const ProcessDescription& desc, ActionId a);

/// alpha -a-> beta by a single rule.
pa::Formula step_formula(const ProcessDescription& desc, ActionId a,
                         std::span<const pa::Term> alpha, std::span<const pa::Term> beta);
pa::Formula step_formula(const ProcessDescription& desc, ActionId a);

} // namespace bpp
