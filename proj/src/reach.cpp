#include "bpp/reach.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <map>
#include <numeric>
#include <unordered_map>

namespace bpp {

using pa::Formula;
using pa::Term;
using pa::Var;

// ---------------------------------------------------------------------------
// ParikhVector

void ParikhVector::add(ActionId a, std::uint32_t k) {
    if (counts_.size() <= a.index) counts_.resize(a.index + 1, 0);
    counts_[a.index] += k;
}

void ParikhVector::set(ActionId a, std::uint32_t k) {
    if (counts_.size() <= a.index) counts_.resize(a.index + 1, 0);
    counts_[a.index] = k;
}

std::uint64_t ParikhVector::total() const {
    return std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0});
}

namespace {

std::vector<std::uint32_t> trimmed(std::span<const std::uint32_t> v) {
    std::vector<std::uint32_t> r(v.begin(), v.end());
    while (!r.empty() && r.back() == 0) r.pop_back();
    return r;
}

} // namespace

bool ParikhVector::operator==(const ParikhVector& o) const { return trimmed(counts_) == trimmed(o.counts_); }
bool ParikhVector::operator<(const ParikhVector& o) const { return trimmed(counts_) < trimmed(o.counts_); }

// ---------------------------------------------------------------------------
// Firing-vector enumeration

bool connected_from(const ProcessDescription& desc, const Configuration& alpha, const FiringVector& x) {
    const auto n = desc.variable_count();
    std::vector<char> seen(n, 0);
    std::vector<std::uint32_t> stack;
    for (std::uint32_t v = 0; v < n; ++v)
        if (alpha.count(VariableId{v}) > 0) {
            seen[v] = 1;
            stack.push_back(v);
        }
    while (!stack.empty()) {
        auto v = stack.back();
        stack.pop_back();
        for (auto ri : desc.rules_of(VariableId{v})) {
            if (x[ri] == 0) continue;
            const auto rhs = desc.rule(ri).rhs.counts();
            for (std::uint32_t w = 0; w < rhs.size(); ++w)
                if (rhs[w] > 0 && !seen[w]) {
                    seen[w] = 1;
                    stack.push_back(w);
                }
        }
    }
    for (std::size_t ri = 0; ri < x.size(); ++ri)
        if (x[ri] > 0 && !seen[desc.rule(ri).lhs.index]) return false;
    return true;
}

namespace {

// Depth-first walk of the firing box in lexicographic order over rule index.
// Each action's total is split exactly across its rules.
class FiringBox {
public:
    FiringBox(const ProcessDescription& desc, const Configuration& alpha, const ParikhVector& mu)
        : desc_(desc), x_(desc.rules().size(), 0),
          remaining_(desc.action_count(), 0), marking_(desc.variable_count(), 0),
          last_of_action_(desc.action_count(), -1) {
        for (std::uint32_t a = 0; a < desc.action_count(); ++a) remaining_[a] = mu.count(ActionId{a});
        for (std::size_t i = 0; i < desc.rules().size(); ++i)
            last_of_action_[desc.rule(i).action.index] = static_cast<long>(i);
        for (std::uint32_t v = 0; v < desc.variable_count(); ++v)
            marking_[v] = alpha.count(VariableId{v});
        // Letters with no rule cannot be fired at all.
        for (std::uint32_t a = 0; a < desc.action_count(); ++a)
            if (last_of_action_[a] < 0 && remaining_[a] > 0) infeasible_ = true;
        for (std::size_t a = desc.action_count(); a < mu.counts().size(); ++a)
            if (mu.counts()[a] > 0) infeasible_ = true;
    }

    // Calls leaf(x, marking) for every complete vector; stops when it returns true.
    template <class Leaf>
    bool run(Leaf&& leaf) {
        if (infeasible_) return false;
        return walk(0, leaf);
    }

private:
    template <class Leaf>
    bool walk(std::size_t i, Leaf& leaf) {
        if (i == x_.size()) return leaf(x_, marking_);
        const auto& r = desc_.rule(i);
        const auto a = r.action.index;
        const auto rem = remaining_[a];
        const bool last = last_of_action_[a] == static_cast<long>(i);
        const std::uint32_t lo = last ? rem : 0;
        for (std::uint32_t k = lo; k <= rem; ++k) {
            apply(r, static_cast<std::int64_t>(k));
            x_[i] = k;
            remaining_[a] = rem - k;
            bool stop = walk(i + 1, leaf);
            apply(r, -static_cast<std::int64_t>(k));
            x_[i] = 0;
            remaining_[a] = rem;
            if (stop) return true;
        }
        return false;
    }

    void apply(const Rule& r, std::int64_t k) {
        if (k == 0) return;
        marking_[r.lhs.index] -= k;
        const auto rhs = r.rhs.counts();
        for (std::size_t v = 0; v < rhs.size(); ++v) marking_[v] += k * rhs[v];
    }

    const ProcessDescription& desc_;
    FiringVector x_;
    std::vector<std::uint32_t> remaining_;
    std::vector<std::int64_t> marking_;
    std::vector<long> last_of_action_;
    bool infeasible_ = false;
};

bool matches(const std::vector<std::int64_t>& marking, const Configuration& beta) {
    for (std::uint32_t v = 0; v < marking.size(); ++v)
        if (marking[v] != static_cast<std::int64_t>(beta.count(VariableId{v}))) return false;
    return beta.extent() <= marking.size();
}

} // namespace

std::optional<FiringVector> parikh_witness(const ProcessDescription& desc, const Configuration& alpha,
                                           const ParikhVector& mu, const Configuration& beta) {
    std::optional<FiringVector> found;
    FiringBox box(desc, alpha, mu);
    box.run([&](const FiringVector& x, const std::vector<std::int64_t>& marking) {
        if (!matches(marking, beta) || !connected_from(desc, alpha, x)) return false;
        found = x;
        return true;
    });
    return found;
}

bool parikh_reachable(const ProcessDescription& desc, const Configuration& alpha,
                      const ParikhVector& mu, const Configuration& beta) {
    return parikh_witness(desc, alpha, mu, beta).has_value();
}

std::vector<Configuration> parikh_targets(const ProcessDescription& desc, const Configuration& alpha,
                                          const ParikhVector& mu) {
    std::set<Configuration> out;
    FiringBox box(desc, alpha, mu);
    box.run([&](const FiringVector& x, const std::vector<std::int64_t>& marking) {
        std::vector<std::uint32_t> counts(marking.size());
        for (std::size_t v = 0; v < marking.size(); ++v) {
            if (marking[v] < 0) return false;
            counts[v] = static_cast<std::uint32_t>(marking[v]);
        }
        if (connected_from(desc, alpha, x)) out.insert(Configuration(std::move(counts)));
        return false;
    });
    return {out.begin(), out.end()};
}

std::set<std::pair<ParikhVector, Configuration>> reach_oracle_bfs(const ProcessDescription& desc,
                                                                  const Configuration& alpha,
                                                                  std::size_t budget) {
    std::set<std::pair<ParikhVector, Configuration>> seen;
    std::vector<std::pair<ParikhVector, Configuration>> frontier{{ParikhVector(desc.action_count()), alpha}};
    seen.insert(frontier.front());
    for (std::size_t step = 0; step < budget && !frontier.empty(); ++step) {
        std::vector<std::pair<ParikhVector, Configuration>> next;
        for (const auto& [mu, c] : frontier) {
            for (const auto& s : strong_steps(desc, c)) {
                auto m2 = mu;
                m2.add(s.action);
                std::pair<ParikhVector, Configuration> item{std::move(m2), s.target};
                if (seen.insert(item).second) next.push_back(std::move(item));
            }
        }
        frontier = std::move(next);
    }
    return seen;
}

// ---------------------------------------------------------------------------
// Bounded weak closures

namespace {

using SilentMap = std::unordered_map<Configuration, std::uint32_t>;

// Extends `found` (configuration -> fewest silent steps used) by silent steps,
// staying within the budget and the size cap.
void silent_closure(const ProcessDescription& desc, SilentMap& found, const StepCaps& caps, bool& pruned) {
    const auto S = caps.silent_budget;
    if (S == kUnbudgeted) {
        std::vector<Configuration> todo;
        for (const auto& [c, used] : found) todo.push_back(c);
        while (!todo.empty()) {
            Configuration c = std::move(todo.back());
            todo.pop_back();
            for (const auto& r : desc.rules()) {
                if (!r.action.silent() || c.count(r.lhs) == 0) continue;
                auto t = apply_rule(r, c);
                if (t.size() > caps.size_cap) {
                    pruned = true;
                    continue;
                }
                if (found.try_emplace(t, 0).second) todo.push_back(std::move(t));
            }
        }
        return;
    }
    std::vector<std::vector<Configuration>> buckets(S + 1);
    for (const auto& [c, used] : found) buckets[std::min(used, S)].push_back(c);
    for (std::uint32_t used = 0; used <= S; ++used) {
        for (std::size_t i = 0; i < buckets[used].size(); ++i) {
            const Configuration c = buckets[used][i];
            if (found.at(c) != used) continue;
            for (const auto& r : desc.rules()) {
                if (!r.action.silent() || c.count(r.lhs) == 0) continue;
                auto t = apply_rule(r, c);
                auto it = found.find(t);
                if (it != found.end() && it->second <= used + 1) continue;
                if (used == S || t.size() > caps.size_cap) {
                    pruned = true;
                    continue;
                }
                found[t] = used + 1;
                buckets[used + 1].push_back(std::move(t));
            }
        }
    }
}

SilentMap letter_step(const ProcessDescription& desc, const SilentMap& from, ActionId a,
                      const StepCaps& caps, bool& pruned) {
    SilentMap next;
    for (const auto& [c, used] : from) {
        for (const auto& r : desc.rules()) {
            if (r.action != a || c.count(r.lhs) == 0) continue;
            auto t = apply_rule(r, c);
            if (t.size() > caps.size_cap) {
                pruned = true;
                continue;
            }
            auto it = next.find(t);
            if (it == next.end() || it->second > used) next[t] = used;
        }
    }
    return next;
}

// The size cap never binds below the start configuration.
StepCaps above_start(StepCaps caps, const Configuration& alpha) {
    caps.size_cap = std::max<std::uint32_t>(caps.size_cap, static_cast<std::uint32_t>(alpha.size()));
    return caps;
}

Bounded collect(const SilentMap& m, bool pruned) {
    Bounded b;
    b.pruned = pruned;
    b.targets.reserve(m.size());
    for (const auto& [c, used] : m) b.targets.push_back(c);
    std::sort(b.targets.begin(), b.targets.end());
    return b;
}

} // namespace

Bounded enumerate_weak_successors(const ProcessDescription& desc, const Configuration& alpha,
                                  ActionId a, const StepCaps& caps) {
    if (a.silent()) return weak_word_successors(desc, alpha, {}, caps);
    ActionId w[1] = {a};
    return weak_word_successors(desc, alpha, w, caps);
}

Bounded weak_word_successors(const ProcessDescription& desc, const Configuration& alpha,
                             std::span<const ActionId> word, const StepCaps& given) {
    const StepCaps caps = above_start(given, alpha);
    bool pruned = false;
    SilentMap cur{{alpha, 0}};
    silent_closure(desc, cur, caps, pruned);
    for (ActionId a : word) {
        cur = letter_step(desc, cur, a, caps, pruned);
        if (cur.empty()) break;
        silent_closure(desc, cur, caps, pruned);
    }
    return collect(cur, pruned);
}

Bounded weak_parikh_successors(const ProcessDescription& desc, const Configuration& alpha,
                               const ParikhVector& visible, const StepCaps& given) {
    const StepCaps caps = above_start(given, alpha);
    // 0-1 search over (configuration, letters still owed); silent steps cost 1.
    using State = std::pair<Configuration, std::vector<std::uint32_t>>;
    std::vector<std::uint32_t> owed(desc.action_count(), 0);
    for (std::uint32_t a = 1; a < desc.action_count(); ++a) owed[a] = visible.count(ActionId{a});
    std::map<State, std::uint32_t> best;
    std::deque<std::pair<State, std::uint32_t>> q;
    best[{alpha, owed}] = 0;
    q.push_back({{alpha, owed}, 0});
    bool pruned = false;
    std::set<Configuration> out;
    while (!q.empty()) {
        auto [st, used] = std::move(q.front());
        q.pop_front();
        if (best.at(st) < used) continue;
        const auto& [c, rest] = st;
        if (std::all_of(rest.begin(), rest.end(), [](std::uint32_t k) { return k == 0; })) out.insert(c);
        for (const auto& r : desc.rules()) {
            if (c.count(r.lhs) == 0) continue;
            const bool silent = r.action.silent();
            if (!silent && rest[r.action.index] == 0) continue;
            auto t = apply_rule(r, c);
            if (t.size() > caps.size_cap || (silent && caps.silent_budget != kUnbudgeted && used == caps.silent_budget)) {
                pruned = true;
                continue;
            }
            auto rest2 = rest;
            if (!silent) --rest2[r.action.index];
            const std::uint32_t u = silent && caps.silent_budget != kUnbudgeted ? used + 1 : used;
            State next{std::move(t), std::move(rest2)};
            auto it = best.find(next);
            if (it != best.end() && it->second <= u) continue;
            best[next] = u;
            if (u == used)
                q.push_front({std::move(next), u});
            else
                q.push_back({std::move(next), u});
        }
    }
    return {{out.begin(), out.end()}, pruned};
}

std::vector<std::pair<std::vector<ActionId>, Bounded>> weak_words(const ProcessDescription& desc,
                                                                 const Configuration& alpha,
                                                                 const StepCaps& given) {
    const StepCaps caps = above_start(given, alpha);
    std::vector<std::pair<std::vector<ActionId>, Bounded>> out;
    std::vector<ActionId> word;
    std::function<void(const SilentMap&, bool)> go = [&](const SilentMap& cur, bool pruned) {
        out.emplace_back(word, collect(cur, pruned));
        if (word.size() >= caps.word_cap) {
            // A longer word exists: the word cap cut it off.
            for (std::uint32_t a = 1; a < desc.action_count() && !out.back().second.pruned; ++a) {
                bool p = false;
                if (!letter_step(desc, cur, ActionId{a}, caps, p).empty() || p) out.back().second.pruned = true;
            }
            return;
        }
        for (std::uint32_t a = 1; a < desc.action_count(); ++a) {
            bool p = pruned;
            auto next = letter_step(desc, cur, ActionId{a}, caps, p);
            if (next.empty()) continue;
            silent_closure(desc, next, caps, p);
            word.push_back(ActionId{a});
            go(next, p);
            word.pop_back();
        }
    };
    bool pruned = false;
    SilentMap start{{alpha, 0}};
    silent_closure(desc, start, caps, pruned);
    go(start, pruned);
    return out;
}

// ---------------------------------------------------------------------------
// Presburger encodings

ReachVariables reach_variables(const ProcessDescription& desc) {
    ReachVariables rv;
    for (std::uint32_t v = 0; v < desc.variable_count(); ++v) {
        rv.alpha.push_back(pa::var("alpha_" + desc.variable_name(VariableId{v})));
        rv.beta.push_back(pa::var("beta_" + desc.variable_name(VariableId{v})));
    }
    for (std::uint32_t a = 0; a < desc.action_count(); ++a)
        rv.mu.push_back(pa::var("mu_" + desc.action_name(ActionId{a})));
    return rv;
}

std::vector<Term> as_terms(std::span<const Var> vs) { return {vs.begin(), vs.end()}; }

std::vector<Term> as_terms(const Configuration& c, std::size_t variables) {
    std::vector<Term> t;
    for (std::uint32_t v = 0; v < variables; ++v) t.emplace_back(static_cast<std::int64_t>(c.count(VariableId{v})));
    return t;
}

Formula reach_formula(const ProcessDescription& desc, std::span<const Term> alpha,
                      std::span<const Term> mu, std::span<const Term> beta) {
    const auto nv = desc.variable_count();
    const auto nr = desc.rules().size();
    if (alpha.size() != nv || beta.size() != nv || mu.size() != desc.action_count())
        throw Error("reach_formula: argument arity does not match the description");

    std::vector<Var> x, d;
    for (std::size_t r = 0; r < nr; ++r) x.push_back(pa::fresh("x" + std::to_string(r)));
    for (std::uint32_t v = 0; v < nv; ++v) d.push_back(pa::fresh("d_" + desc.variable_name(VariableId{v})));

    std::vector<Formula> parts;
    // Parikh image: per action, the firings of its rules sum to mu(a).
    for (std::uint32_t a = 0; a < desc.action_count(); ++a) {
        Term sum;
        for (std::size_t r = 0; r < nr; ++r) {
            if (desc.rule(r).action.index != a) continue;
            sum += Term(x[r]);
            parts.push_back(Formula::le(x[r], mu[a]));
        }
        parts.push_back(Formula::eq(sum, mu[a]));
    }
    // Marking equation.
    for (std::uint32_t v = 0; v < nv; ++v) {
        Term rhs = alpha[v];
        for (std::size_t r = 0; r < nr; ++r) {
            const auto& rule = desc.rule(r);
            std::int64_t delta = rule.rhs.count(VariableId{v});
            if (rule.lhs.index == v) delta -= 1;
            if (delta != 0) rhs += Term::scaled(x[r], delta);
        }
        parts.push_back(Formula::eq(beta[v], rhs));
    }
    // Connectivity by levels: d_X >= 1 marks X as activated, either from
    // alpha or from a used rule whose lhs sits on a strictly lower level.
    const auto top = static_cast<std::int64_t>(nv);
    for (std::uint32_t v = 0; v < nv; ++v) parts.push_back(Formula::le(d[v], top));
    for (std::size_t r = 0; r < nr; ++r)
        parts.push_back(Formula::disj({Formula::eq(x[r], 0), Formula::le(1, d[desc.rule(r).lhs.index])}));
    for (std::uint32_t v = 0; v < nv; ++v) {
        std::vector<Formula> why{Formula::le(1, alpha[v])};
        for (std::size_t r = 0; r < nr; ++r) {
            const auto& rule = desc.rule(r);
            if (rule.rhs.count(VariableId{v}) == 0 || rule.lhs.index == v) continue;
            const Var dl = d[rule.lhs.index];
            why.push_back(Formula::conj({Formula::le(1, x[r]), Formula::le(1, dl),
                                         Formula::lt(dl, d[v])}));
        }
        parts.push_back(Formula::disj({Formula::eq(d[v], 0), Formula::disj(std::move(why))}));
    }

    std::vector<Var> bound = x;
    bound.insert(bound.end(), d.begin(), d.end());
    return Formula::exists(bound, Formula::conj(std::move(parts)));
}

Formula reach_formula(const ProcessDescription& desc) {
    auto rv = reach_variables(desc);
    auto a = as_terms(rv.alpha), m = as_terms(rv.mu), b = as_terms(rv.beta);
    return reach_formula(desc, a, m, b);
}

Formula wstep_formula(const ProcessDescription& desc, ActionId a, std::span<const Term> alpha,
                      std::span<const Term> beta) {
    Var k = pa::fresh("k");
    std::vector<Term> mu(desc.action_count(), Term(0));
    mu[kSilent.index] = Term(k);
    if (!a.silent()) mu.at(a.index) = Term(1);
    return Formula::exists(k, reach_formula(desc, alpha, mu, beta));
}

Formula wstep_formula(const ProcessDescription& desc, ActionId a) {
    auto rv = reach_variables(desc);
    auto al = as_terms(rv.alpha), be = as_terms(rv.beta);
    return wstep_formula(desc, a, al, be);
}

Formula step_formula(const ProcessDescription& desc, ActionId a, std::span<const Term> alpha,
                     std::span<const Term> beta) {
    std::vector<Formula> alts;
    for (const auto& r : desc.rules()) {
        if (r.action != a) continue;
        std::vector<Formula> conj{Formula::le(1, alpha[r.lhs.index])};
        for (std::uint32_t v = 0; v < desc.variable_count(); ++v) {
            std::int64_t delta = r.rhs.count(VariableId{v});
            if (r.lhs.index == v) delta -= 1;
            conj.push_back(Formula::eq(beta[v], alpha[v] + delta));
        }
        alts.push_back(Formula::conj(std::move(conj)));
    }
    if (alts.empty()) return Formula::falsity();
    return alts.size() == 1 ? alts.front() : Formula::disj(std::move(alts));
}

Formula step_formula(const ProcessDescription& desc, ActionId a) {
    auto rv = reach_variables(desc);
    auto al = as_terms(rv.alpha), be = as_terms(rv.beta);
    return step_formula(desc, a, al, be);
}

} // namespace bpp
