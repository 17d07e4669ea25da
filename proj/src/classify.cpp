#include "bpp/classify.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <set>
#include <unordered_set>

namespace bpp {

std::string_view to_string(Purity p) {
    switch (p) {
    case Purity::Pure: return "pure";
    case Purity::Impure: return "impure";
    case Purity::Unknown: return "unknown";
    }
    return "?";
}

bool norm_preserving(const ProcessDescription& desc, const Rule& r) {
    return r.action.silent() && norm(desc, r.rhs) == desc.norm_of(r.lhs);
}

Bounded succ0(const ProcessDescription& desc, const Configuration& c, const StepCaps& caps) {
    const std::uint64_t cap = std::max<std::uint64_t>(caps.size_cap, c.size());
    Bounded out;
    std::unordered_set<Configuration, ConfigurationHash> seen{c};
    std::deque<Configuration> todo{c};
    while (!todo.empty()) {
        auto x = std::move(todo.front());
        todo.pop_front();
        const auto nx = norm(desc, x);
        for (const auto& r : desc.rules()) {
            if (!r.action.silent() || x.count(r.lhs) == 0) continue;
            auto y = apply_rule(r, x);
            if (!(norm(desc, y) == nx)) continue;
            if (y.size() > cap) {
                out.pruned = true;
                continue;
            }
            if (seen.insert(y).second) todo.push_back(std::move(y));
        }
    }
    out.targets.assign(seen.begin(), seen.end());
    std::sort(out.targets.begin(), out.targets.end());
    return out;
}

namespace {

std::vector<std::vector<bool>> closure(std::vector<std::vector<bool>> m) {
    const auto n = m.size();
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t i = 0; i < n; ++i)
            if (m[i][k])
                for (std::size_t j = 0; j < n; ++j)
                    if (m[k][j]) m[i][j] = true;
    return m;
}

} // namespace

Unification unify_redundant(const ProcessDescription& desc, const StepCaps& caps) {
    const auto nv = desc.variable_count();
    std::vector<std::vector<bool>> reach(nv, std::vector<bool>(nv, false));
    Unification u{desc, {}, {}, false};
    for (std::uint32_t x = 0; x < nv; ++x) {
        auto s = succ0(desc, Configuration::singleton(VariableId{x}), caps);
        u.pruned = u.pruned || s.pruned;
        for (const auto& c : s.targets)
            if (c.size() == 1)
                for (std::uint32_t y = 0; y < nv; ++y)
                    if (c.count(VariableId{y})) reach[x][y] = true;
    }
    std::vector<std::int64_t> cls(nv, -1);
    for (std::uint32_t x = 0; x < nv; ++x) {
        if (cls[x] >= 0) continue;
        cls[x] = static_cast<std::int64_t>(u.classes.size());
        u.classes.push_back({VariableId{x}});
        for (std::uint32_t y = x + 1; y < nv; ++y)
            if (cls[y] < 0 && reach[x][y] && reach[y][x]) {
                cls[y] = cls[x];
                u.classes.back().push_back(VariableId{y});
            }
    }
    if (u.classes.size() == nv) {
        for (std::uint32_t x = 0; x < nv; ++x) u.representative.push_back(VariableId{x});
        return u;
    }

    ProcessDescription::Builder b;
    std::vector<VariableId> rep_new;
    for (const auto& c : u.classes) rep_new.push_back(b.variable(desc.variable_name(c.front())));
    for (std::uint32_t a = 1; a < desc.action_count(); ++a) b.action(desc.action_name(ActionId{a}));
    u.representative.resize(nv);
    for (std::uint32_t x = 0; x < nv; ++x) u.representative[x] = rep_new[static_cast<std::size_t>(cls[x])];
    std::set<std::tuple<std::uint32_t, std::uint32_t, Configuration>> rules;
    for (const auto& r : desc.rules()) {
        Configuration rhs;
        for (std::uint32_t y = 0; y < nv; ++y)
            if (auto k = r.rhs.count(VariableId{y})) rhs.add(u.representative[y], k);
        auto lhs = u.representative[r.lhs.index];
        if (r.action.silent() && rhs == Configuration::singleton(lhs)) continue;
        if (rules.emplace(lhs.index, r.action.index, rhs).second) b.rule(lhs, r.action, rhs);
    }
    u.desc = std::move(b).build();
    return u;
}

namespace {

bool all_finite(const ProcessDescription& desc) {
    auto t = desc.norm_table();
    return std::none_of(t.begin(), t.end(), [](const NormValue& n) { return n.is_infinite(); });
}

// Exact analysis for a finite-norm X: every derivative has the same finite
// norm, so a step is norm-preserving exactly when its rule is.
Purity finite_generator(const ProcessDescription& desc, VariableId x, bool& generator) {
    const auto nv = desc.variable_count();
    std::vector<const Rule*> np;
    for (const auto& r : desc.rules())
        if (norm_preserving(desc, r)) np.push_back(&r);
    // reaches[y]: y =>0 something containing x.
    std::vector<bool> reaches(nv, false), grows(nv, false);
    reaches[x.index] = true;
    auto any_in = [&](const Configuration& c, const std::vector<bool>& s) {
        for (std::uint32_t v = 0; v < nv; ++v)
            if (c.count(VariableId{v}) && s[v]) return true;
        return false;
    };
    for (bool changed = true; changed;) {
        changed = false;
        for (const Rule* r : np) {
            auto l = r->lhs.index;
            if (!reaches[l] && any_in(r->rhs, reaches)) reaches[l] = changed = true;
            if (!grows[l] && ((r->rhs.size() >= 2 && any_in(r->rhs, reaches)) || any_in(r->rhs, grows)))
                grows[l] = changed = true;
        }
    }
    generator = grows[x.index];
    for (const Rule* r : np)
        if (r->lhs == x && r->rhs.count(x) == 0) return Purity::Impure;
    return Purity::Pure;
}

} // namespace

GeneratorReport generators(const ProcessDescription& desc, const StepCaps& caps) {
    GeneratorReport rep;
    for (std::uint32_t i = 0; i < desc.variable_count(); ++i) {
        VariableId x{i};
        if (!desc.norm_of(x).is_infinite()) {
            bool gen = false;
            auto p = finite_generator(desc, x, gen);
            if (gen) rep.purity[x] = p;
            continue;
        }
        auto s = succ0(desc, Configuration::singleton(x), caps);
        rep.pruned = rep.pruned || s.pruned;
        bool gen = false, vanish = false;
        for (const auto& c : s.targets) {
            if (c.count(x) && c.size() >= 2) gen = true;
            if (!c.count(x)) vanish = true;
        }
        if (gen) rep.purity[x] = vanish ? Purity::Impure : s.pruned ? Purity::Unknown : Purity::Pure;
    }
    return rep;
}

namespace {

// above[x] holds the variables that non-generating norm-preserving rules of x
// push strictly below x.
std::vector<std::set<std::uint32_t>> order_constraints(const ProcessDescription& desc) {
    std::vector<std::set<std::uint32_t>> below(desc.variable_count());
    for (const auto& r : desc.rules()) {
        if (!norm_preserving(desc, r) || r.rhs.count(r.lhs)) continue;
        for (std::uint32_t v = 0; v < desc.variable_count(); ++v)
            if (r.rhs.count(VariableId{v})) below[r.lhs.index].insert(v);
    }
    return below;
}

} // namespace

VariableOrder variable_order(const ProcessDescription& desc) {
    const auto nv = desc.variable_count();
    auto below = order_constraints(desc);
    std::vector<std::size_t> indeg(nv, 0);
    for (const auto& s : below)
        for (auto v : s) ++indeg[v];
    VariableOrder out;
    std::vector<bool> placed(nv, false);
    for (std::size_t step = 0; step < nv; ++step) {
        std::optional<std::uint32_t> next;
        for (std::uint32_t v = 0; v < nv && !next; ++v)
            if (!placed[v] && indeg[v] == 0) next = v;
        if (!next) break;
        placed[*next] = true;
        out.order.push_back(VariableId{*next});
        for (auto w : below[*next]) --indeg[w];
    }
    if (out.order.size() == nv) return out;

    // Every unplaced variable has an unplaced one above it; walk upwards
    // until a variable repeats.
    std::vector<std::vector<std::uint32_t>> above(nv);
    for (std::uint32_t x = 0; x < nv; ++x)
        for (auto y : below[x])
            if (!placed[x]) above[y].push_back(x);
    std::uint32_t cur = 0;
    while (placed[cur]) ++cur;
    std::vector<std::int64_t> pos(nv, -1);
    std::vector<std::uint32_t> path;
    while (pos[cur] < 0) {
        pos[cur] = static_cast<std::int64_t>(path.size());
        path.push_back(cur);
        cur = above[cur].front();
    }
    for (auto it = path.rbegin(); it != path.rend(); ++it) {
        out.cycle.push_back(VariableId{*it});
        if (*it == cur) break;
    }
    out.order.clear();
    return out;
}

namespace {

std::vector<Configuration> minkowski(const std::vector<Configuration>& a, const std::vector<Configuration>& b) {
    std::set<Configuration> out;
    for (const auto& x : a)
        for (const auto& y : b) out.insert(x + y);
    return {out.begin(), out.end()};
}

struct NongeneratingTable {
    VariableOrder order;
    std::vector<std::vector<Configuration>> sets;
};

NongeneratingTable nongenerating_table(const ProcessDescription& desc) {
    NongeneratingTable t{variable_order(desc), {}};
    if (!t.order.ok()) {
        std::string cyc;
        for (auto v : t.order.cycle) cyc += (cyc.empty() ? "" : " ") + desc.variable_name(v);
        throw Error("no variable order: cycle " + cyc);
    }
    const auto nv = desc.variable_count();
    t.sets.assign(nv, {});
    // Bottom-up: everything a rule of x produces is already done.
    for (auto it = t.order.order.rbegin(); it != t.order.order.rend(); ++it) {
        VariableId x = *it;
        std::set<Configuration> s{Configuration::singleton(x)};
        for (auto ri : desc.rules_of(x)) {
            const auto& r = desc.rule(ri);
            if (!norm_preserving(desc, r) || r.rhs.count(x)) continue;
            std::vector<Configuration> acc{Configuration{}};
            for (std::uint32_t v = 0; v < nv; ++v)
                for (std::uint32_t k = 0; k < r.rhs.count(VariableId{v}); ++k) acc = minkowski(acc, t.sets[v]);
            s.insert(acc.begin(), acc.end());
        }
        t.sets[x.index].assign(s.begin(), s.end());
    }
    return t;
}

} // namespace

std::vector<Configuration> nongenerating_succ0(const ProcessDescription& desc, VariableId x) {
    return nongenerating_table(desc).sets.at(x.index);
}

std::uint64_t finite_classes_bound(const ProcessDescription& desc, VariableId x) {
    auto t = nongenerating_table(desc);
    auto at = std::find(t.order.order.begin(), t.order.order.end(), x);
    std::uint64_t c = 1;
    for (auto it = at + 1; it != t.order.order.end(); ++it) c = std::max<std::uint64_t>(c, t.sets[it->index].size());
    std::uint64_t d = desc.rules_of(x).size(), l = 0;
    for (auto ri : desc.rules_of(x)) l = std::max<std::uint64_t>(l, desc.rule(ri).rhs.size());
    constexpr std::uint64_t kMax = ~std::uint64_t{0};
    std::uint64_t p = 1;
    for (std::uint64_t i = 0; i < l; ++i) p = p > kMax / c ? kMax : p * c;
    std::uint64_t dp = d != 0 && p > kMax / d ? kMax : d * p;
    return dp == kMax ? kMax : dp + 1;
}

bool decreasing(const ProcessDescription& desc) {
    const auto nv = desc.variable_count();
    std::vector<std::vector<bool>> m(nv, std::vector<bool>(nv, false));
    for (const auto& r : desc.rules())
        for (std::uint32_t v = 0; v < nv; ++v)
            if (r.rhs.count(VariableId{v})) m[r.lhs.index][v] = true;
    m = closure(std::move(m));
    for (std::uint32_t x = 0; x < nv; ++x)
        for (std::uint32_t y = x + 1; y < nv; ++y)
            if (m[x][y] && m[y][x]) return false;
    return true;
}

ClassReport classify(const ProcessDescription& desc, const StepCaps& caps) {
    ClassReport rep;
    rep.normed = all_finite(desc);
    bool any_zero = false, all_zero = desc.variable_count() > 0;
    for (std::uint32_t v = 0; v < desc.variable_count(); ++v) {
        if (desc.norm_of(VariableId{v}) == NormValue(0)) {
            rep.zero_norm_vars.push_back(desc.variable_name(VariableId{v}));
            any_zero = true;
        } else {
            all_zero = false;
        }
    }
    rep.visible_action_count = desc.action_count() - 1;

    auto u = unify_redundant(desc, caps);
    for (const auto& c : u.classes) {
        std::vector<std::string> names;
        for (auto v : c) names.push_back(desc.variable_name(v));
        rep.redundant_classes.push_back(std::move(names));
    }
    auto g = generators(u.desc, caps);
    rep.pruned = u.pruned || g.pruned;
    bool impure = false, unknown = false;
    for (const auto& [v, p] : g.purity) {
        rep.generators[u.desc.variable_name(v)] = p;
        impure = impure || p == Purity::Impure;
        unknown = unknown || p == Purity::Unknown;
    }
    if (!rep.normed || impure)
        rep.stirling_member = false;
    else if (!unknown)
        rep.stirling_member = true;

    if (rep.visible_action_count > 1) {
        rep.stribrna_reason = std::to_string(rep.visible_action_count) + " visible actions";
    } else if (all_zero) {
        rep.stribrna_reason = "all variables have zero norm";
    } else if (any_zero) {
        std::string names;
        for (const auto& n : rep.zero_norm_vars) names += (names.empty() ? "" : " ") + n;
        rep.stribrna_reason = "zero-norm variables: " + names;
    } else if (rep.visible_action_count == 0) {
        rep.stribrna_reason = "no visible action";
    } else {
        rep.stribrna_member = true;
        rep.stribrna_reason = "one visible action, every norm positive or infinite";
    }

    rep.decreasing = decreasing(desc);
    auto ord = variable_order(u.desc);
    if (ord.ok()) {
        std::vector<std::string> names;
        for (auto v : ord.order) names.push_back(u.desc.variable_name(v));
        rep.variable_order = std::move(names);
    }
    return rep;
}

std::vector<StepCaps> caps_schedule(unsigned steps) {
    std::vector<StepCaps> out;
    StepCaps c{};
    for (unsigned i = 0; i < steps; ++i) {
        out.push_back(c);
        c.silent_budget += 2;
        c.size_cap += 2;
        c.word_cap += 1;
    }
    return out;
}

SemidecideResult semidecide_inequivalence(const ProcessDescription& desc, const Configuration& a,
                                          const Configuration& b, const SemidecideBudget& budget) {
    SemidecideResult res;
    auto rep = classify(desc);
    if (budget.regime) {
        res.regime = *budget.regime;
    } else if (rep.stirling_member == true) {
        res.regime = Regime::LongLong;
    } else if (rep.stribrna_member) {
        res.regime = Regime::Parikh;
    } else {
        res.regime = Regime::Word;
        res.warnings.push_back("outside both decidable subclasses: word approximants need not converge, so "
                               "Inconclusive says nothing about equivalence");
    }
    auto schedule = caps_schedule(budget.schedule_steps);
    std::optional<Verdict> pending;
    for (const auto& caps : schedule) {
        auto v = distinguishing_level(desc, a, b, res.regime, caps, budget.max_level);
        if (v.outcome == Outcome::Distinguished) {
            if (!v.duplicator_pruned || (pending && v.level <= pending->level)) {
                res.verdict = v;
                return res;
            }
            pending = v;
        } else {
            pending.reset();
        }
        res.verdict = v;
    }
    res.verdict.outcome = Outcome::Inconclusive;
    res.verdict.level = budget.max_level;
    res.verdict.strategy.reset();
    if (pending) res.warnings.push_back("Distinguished only with Duplicator pruning at the largest caps");
    return res;
}

} // namespace bpp
