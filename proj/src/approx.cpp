#include "bpp/approx.hpp"

#include <algorithm>
#include <map>

namespace bpp {

using pa::Formula;
using pa::Term;
using pa::Var;

std::string_view to_string(Regime r) {
    switch (r) {
    case Regime::ShortLong: return "short-long";
    case Regime::LongLong: return "long-long";
    case Regime::Word: return "word";
    case Regime::Parikh: return "parikh";
    }
    return "?";
}

std::string_view to_string(Side s) { return s == Side::Left ? "left" : "right"; }

std::string_view to_string(Outcome o) {
    switch (o) {
    case Outcome::Related: return "Related";
    case Outcome::Distinguished: return "Distinguished";
    case Outcome::Inconclusive: return "Inconclusive";
    }
    return "?";
}

std::string_view to_string(Backend b) { return b == Backend::Bounded ? "bounded" : "symbolic"; }

std::optional<Regime> parse_regime(std::string_view s) {
    if (s == "sl" || s == "short-long" || s == "shortlong") return Regime::ShortLong;
    if (s == "ll" || s == "long-long" || s == "longlong") return Regime::LongLong;
    if (s == "word" || s == "w") return Regime::Word;
    if (s == "parikh" || s == "p") return Regime::Parikh;
    return std::nullopt;
}

std::optional<Backend> parse_backend(std::string_view s) {
    if (s == "bounded") return Backend::Bounded;
    if (s == "symbolic") return Backend::Symbolic;
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Moves

namespace {

bool silent_label(const std::vector<ActionId>& label) {
    return std::all_of(label.begin(), label.end(), [](ActionId a) { return a.silent(); });
}

void order_moves(const ProcessDescription& desc, const Configuration& c, std::vector<Move>& ms) {
    auto n0 = norm(desc, c);
    auto key = [&](const Move& m) {
        return std::pair{silent_label(m.label) ? 1 : 0, norm(desc, m.target) == n0 ? 1 : 0};
    };
    std::stable_sort(ms.begin(), ms.end(), [&](const Move& x, const Move& y) { return key(x) < key(y); });
}

} // namespace

std::vector<Move> spoiler_moves(const ProcessDescription& desc, const Configuration& c, Regime regime,
                                const StepCaps& caps, Side side, bool* pruned) {
    std::vector<Move> out;
    bool p = false;
    switch (regime) {
    case Regime::ShortLong:
        for (auto& st : strong_steps(desc, c)) {
            if (st.action.silent() && st.target == c) continue;
            out.push_back({side, {st.action}, std::move(st.target)});
        }
        break;
    case Regime::LongLong:
        for (std::uint32_t a = 0; a < desc.action_count(); ++a) {
            auto b = enumerate_weak_successors(desc, c, ActionId{a}, caps);
            p = p || b.pruned;
            for (auto& t : b.targets) {
                if (a == 0 && t == c) continue;
                out.push_back({side, {ActionId{a}}, std::move(t)});
            }
        }
        break;
    case Regime::Word:
    case Regime::Parikh:
        for (auto& [w, b] : weak_words(desc, c, caps)) {
            p = p || b.pruned;
            for (auto& t : b.targets) {
                if (w.empty() && t == c) continue;
                out.push_back({side, w, std::move(t)});
            }
        }
        break;
    }
    order_moves(desc, c, out);
    if (pruned) *pruned = *pruned || p;
    return out;
}

std::vector<Configuration> duplicator_responses(const ProcessDescription& desc, const Configuration& c,
                                                const Move& m, Regime regime, const StepCaps& caps,
                                                bool* pruned) {
    StepCaps dc = caps;
    dc.silent_budget = kUnbudgeted;
    Bounded b;
    switch (regime) {
    case Regime::ShortLong:
    case Regime::LongLong:
        b = enumerate_weak_successors(desc, c, m.label.empty() ? kSilent : m.label.front(), dc);
        break;
    case Regime::Word:
        b = weak_word_successors(desc, c, m.label, dc);
        break;
    case Regime::Parikh: {
        ParikhVector mu(desc.action_count());
        for (auto a : m.label)
            if (!a.silent()) mu.add(a);
        b = weak_parikh_successors(desc, c, mu, dc);
        break;
    }
    }
    if (pruned) *pruned = *pruned || b.pruned;
    return std::move(b.targets);
}

// ---------------------------------------------------------------------------
// Bounded solver

std::size_t Solver::PairHash::operator()(const std::pair<Configuration, Configuration>& p) const {
    return p.first.hash() * 0x9e3779b97f4a7c15ULL ^ p.second.hash();
}

std::size_t Solver::LabelHash::operator()(const LabelKey& k) const {
    std::size_t h = k.c.hash();
    for (auto a : k.label) h = h * 31 + a.index + 1;
    return h;
}

Solver::Solver(const ProcessDescription& desc, Regime regime, StepCaps caps, bool parallel)
    : desc_(desc), regime_(regime), caps_(caps), parallel_(parallel) {}

std::size_t Solver::memo_size() const {
    std::lock_guard lock(mu_);
    return memo_.size();
}

std::vector<Move> Solver::moves(const Configuration& c, Side side) {
    const std::vector<Move>* slot = nullptr;
    {
        std::lock_guard lock(mu_);
        auto it = moves_.find(c);
        if (it != moves_.end()) slot = &it->second;
    }
    if (!slot) {
        bool p = false;
        auto ms = spoiler_moves(desc_, c, regime_, caps_, Side::Left, &p);
        if (p) spoiler_pruned_ = true;
        std::lock_guard lock(mu_);
        slot = &moves_.try_emplace(c, std::move(ms)).first->second;
    }
    std::vector<Move> out(*slot);
    for (auto& m : out) m.side = side;
    return out;
}

const std::vector<Configuration>& Solver::responses(const Configuration& c, const Move& m) {
    LabelKey key{c, m.label};
    {
        std::lock_guard lock(mu_);
        auto it = responses_.find(key);
        if (it != responses_.end()) return it->second;
    }
    bool p = false;
    auto rs = duplicator_responses(desc_, c, m, regime_, caps_, &p);
    if (p) duplicator_pruned_ = true;
    std::lock_guard lock(mu_);
    return responses_.try_emplace(std::move(key), std::move(rs)).first->second;
}

std::optional<bool> Solver::lookup(const std::pair<Configuration, Configuration>& key, unsigned n) const {
    std::lock_guard lock(mu_);
    auto it = memo_.find(key);
    if (it == memo_.end()) return std::nullopt;
    if (n >= it->second.distinguished_at) return true;
    if (n <= it->second.related_upto) return false;
    return std::nullopt;
}

void Solver::store(const std::pair<Configuration, Configuration>& key, unsigned n, bool d) {
    std::lock_guard lock(mu_);
    auto& e = memo_[key];
    if (d)
        e.distinguished_at = std::min(e.distinguished_at, n);
    else
        e.related_upto = std::max(e.related_upto, n);
}

namespace {

std::pair<Configuration, Configuration> canonical(const Configuration& a, const Configuration& b) {
    return b < a ? std::pair{b, a} : std::pair{a, b};
}

} // namespace

bool Solver::move_wins(const Configuration& a, const Configuration& b, const Move& m, unsigned n) {
    const Configuration& other = m.side == Side::Left ? b : a;
    // Copy: the response cache may rehash while children are solved.
    auto rs = responses(other, m);
    for (const auto& r : rs) {
        bool d = m.side == Side::Left ? solve(m.target, r, n - 1) : solve(r, m.target, n - 1);
        if (!d) return false;
    }
    return true;
}

bool Solver::solve(const Configuration& a, const Configuration& b, unsigned n) {
    if (n == 0 || a == b) return false;
    auto key = canonical(a, b);
    if (auto hit = lookup(key, n)) return *hit;
    bool d = false;
    for (Side side : {Side::Left, Side::Right}) {
        auto ms = moves(side == Side::Left ? a : b, side);
        for (const auto& m : ms)
            if (move_wins(a, b, m, n)) {
                d = true;
                break;
            }
        if (d) break;
    }
    store(key, n, d);
    return d;
}

bool Solver::distinguished(const Configuration& a, const Configuration& b, unsigned n) {
    if (!parallel_ || n == 0 || a == b) return solve(a, b, n);
    auto key = canonical(a, b);
    if (auto hit = lookup(key, n)) return *hit;
    std::vector<Move> all = moves(a, Side::Left);
    const auto& right = moves(b, Side::Right);
    all.insert(all.end(), right.begin(), right.end());
    std::atomic<bool> found{false};
#pragma omp parallel for schedule(dynamic)
    for (std::size_t i = 0; i < all.size(); ++i) {
        if (found.load(std::memory_order_relaxed)) continue;
        if (move_wins(a, b, all[i], n)) found = true;
    }
    store(key, n, found);
    return found;
}

std::optional<unsigned> Solver::first_level(const Configuration& a, const Configuration& b, unsigned max) {
    if (!distinguished(a, b, max)) return std::nullopt;
    unsigned lo = 1;
    while (lo < max && !distinguished(a, b, lo)) ++lo;
    return lo;
}

std::shared_ptr<const StrategyNode> Solver::strategy(const Configuration& a, const Configuration& b,
                                                     unsigned n) {
    auto level = first_level(a, b, n);
    if (!level) return nullptr;
    {
        std::lock_guard lock(mu_);
        auto it = strategies_.find({a, b});
        if (it != strategies_.end()) return it->second;
    }
    auto node = std::make_shared<StrategyNode>();
    node->level = *level;
    for (Side side : {Side::Left, Side::Right}) {
        auto ms = moves(side == Side::Left ? a : b, side);
        for (const auto& m : ms) {
            if (!move_wins(a, b, m, *level)) continue;
            node->move = m;
            auto rs = responses(side == Side::Left ? b : a, m);
            for (const auto& r : rs) {
                auto child = side == Side::Left ? strategy(m.target, r, *level - 1)
                                                : strategy(r, m.target, *level - 1);
                node->responses.emplace_back(r, std::move(child));
            }
            std::lock_guard lock(mu_);
            strategies_[{a, b}] = node;
            return node;
        }
    }
    throw Error("strategy extraction found no winning move");
}

// ---------------------------------------------------------------------------
// Verdicts

namespace {

Verdict bounded_check(const ProcessDescription& desc, const Configuration& a, const Configuration& b,
                      Regime regime, unsigned n, const StepCaps& caps, bool parallel) {
    Verdict v;
    v.caps = caps;
    v.level = n;
    Solver s(desc, regime, caps, parallel);
    if (s.distinguished(a, b, n)) {
        v.outcome = Outcome::Distinguished;
        v.strategy = s.strategy(a, b, n);
    }
    v.spoiler_pruned = s.spoiler_pruned();
    v.duplicator_pruned = s.duplicator_pruned();
    return v;
}

template <class F>
void add_stability(Verdict& v, const StepCaps& caps, F&& rerun) {
    bool same = true;
    for (std::uint32_t extra : {2u, 4u}) {
        StepCaps c = caps;
        c.size_cap += extra;
        if (rerun(c) != v.outcome) same = false;
    }
    v.stable = same;
}

} // namespace

Verdict check_level(const ProcessDescription& desc, const Configuration& a, const Configuration& b,
                    Regime regime, unsigned n, Backend backend, const StepCaps& caps, const GameOptions& opts) {
    if (backend == Backend::Symbolic) {
        if (regime == Regime::Word) throw Error("the symbolic backend does not support the word regime");
        Verdict v;
        v.backend = Backend::Symbolic;
        v.caps = caps;
        v.caps_relative = false;
        v.level = n;
        v.outcome = symbolic_related(desc, a, b, regime, n) ? Outcome::Related : Outcome::Distinguished;
        return v;
    }
    Verdict v = bounded_check(desc, a, b, regime, n, caps, opts.parallel);
    if (opts.stability)
        add_stability(v, caps, [&](const StepCaps& c) {
            return bounded_check(desc, a, b, regime, n, c, opts.parallel).outcome;
        });
    return v;
}

namespace {

Verdict bounded_search(const ProcessDescription& desc, const Configuration& a, const Configuration& b,
                       Regime regime, const StepCaps& caps, unsigned max_level, bool parallel) {
    Verdict v;
    v.caps = caps;
    Solver s(desc, regime, caps, parallel);
    if (auto lvl = s.first_level(a, b, max_level)) {
        v.outcome = Outcome::Distinguished;
        v.level = *lvl;
        v.strategy = s.strategy(a, b, *lvl);
    } else {
        v.level = max_level;
        v.outcome = s.spoiler_pruned() ? Outcome::Inconclusive : Outcome::Related;
    }
    v.spoiler_pruned = s.spoiler_pruned();
    v.duplicator_pruned = s.duplicator_pruned();
    return v;
}

} // namespace

Verdict distinguishing_level(const ProcessDescription& desc, const Configuration& a, const Configuration& b,
                             Regime regime, const StepCaps& caps, unsigned max_level, const GameOptions& opts) {
    Verdict v = bounded_search(desc, a, b, regime, caps, max_level, opts.parallel);
    if (opts.stability) {
        bool same = true;
        for (std::uint32_t extra : {2u, 4u}) {
            StepCaps c = caps;
            c.size_cap += extra;
            auto w = bounded_search(desc, a, b, regime, c, max_level, opts.parallel);
            if (w.outcome != v.outcome || w.level != v.level) same = false;
        }
        v.stable = same;
    }
    return v;
}

// ---------------------------------------------------------------------------
// Symbolic backend

namespace {

struct SymbolicCache {
    std::mutex mu;
    std::map<std::string, Formula> formulas;
    std::map<std::string, std::size_t> failed; // key -> node limit that was exceeded
};

SymbolicCache& cache() {
    static SymbolicCache c;
    return c;
}

template <class F>
Formula cached(const std::string& key, const pa::QeOptions& qo, F&& build) {
    {
        std::lock_guard lock(cache().mu);
        auto it = cache().formulas.find(key);
        if (it != cache().formulas.end()) return it->second;
        auto f = cache().failed.find(key);
        if (f != cache().failed.end() && f->second >= qo.node_limit)
            throw pa::ResourceExhausted("symbolic backend resource exhausted: " + key.substr(key.rfind('|') + 1));
    }
    try {
        Formula f = build();
        std::lock_guard lock(cache().mu);
        return cache().formulas.emplace(key, f).first->second;
    } catch (const pa::ResourceExhausted&) {
        std::lock_guard lock(cache().mu);
        auto& lim = cache().failed[key];
        lim = std::max(lim, qo.node_limit);
        throw;
    }
}

std::vector<Var> fresh_vars(std::size_t n, std::string_view hint) {
    std::vector<Var> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(pa::fresh(hint));
    return out;
}

std::map<Var, Term> rename(std::span<const Var> from, std::span<const Var> to) {
    std::map<Var, Term> m;
    for (std::size_t i = 0; i < from.size(); ++i) m[from[i]] = Term(to[i]);
    return m;
}

// Quantifier-free alpha =a=> beta over the standard variables.
Formula wstep_qf(const ProcessDescription& desc, ActionId a, const pa::QeOptions& qo = {}) {
    return cached(render(desc) + "|wstep|" + std::to_string(a.index), qo,
                  [&] { return pa::simplify(pa::eliminate_quantifiers(wstep_formula(desc, a), qo)); });
}

Formula reach_qf(const ProcessDescription& desc, const pa::QeOptions& qo) {
    return cached(render(desc) + "|reach", qo,
                  [&] { return pa::simplify(pa::eliminate_quantifiers(reach_formula(desc), qo)); });
}

// Instantiates a formula over (alpha, beta) at two vectors of variables.
Formula at(const Formula& f, const ReachVariables& rv, std::span<const Var> x, std::span<const Var> y) {
    auto m = rename(rv.alpha, x);
    for (auto& [k, t] : rename(rv.beta, y)) m[k] = t;
    return pa::substitute(f, m);
}

// One half of the successor clause: Spoiler moves from the x-side.
Formula attack(const ProcessDescription& desc, Regime regime, const Formula& psi, bool from_left,
               const pa::QeOptions& qo) {
    auto rv = reach_variables(desc);
    const std::size_t nv = desc.variable_count();
    std::span<const Var> X = from_left ? std::span<const Var>(rv.alpha) : std::span<const Var>(rv.beta);
    std::span<const Var> Y = from_left ? std::span<const Var>(rv.beta) : std::span<const Var>(rv.alpha);
    std::vector<Formula> clauses;
    auto pair_psi = [&](std::span<const Var> xs, std::span<const Var> ys) {
        return from_left ? at(psi, rv, xs, ys) : at(psi, rv, ys, xs);
    };
    if (regime == Regime::Parikh) {
        auto R = reach_qf(desc, qo);
        auto xp = fresh_vars(nv, "a'"), yp = fresh_vars(nv, "b'");
        auto mu = fresh_vars(desc.action_count(), "m");
        auto t = pa::fresh("t");
        auto spoiler_map = rename(rv.alpha, X);
        for (auto& [k, v] : rename(rv.mu, mu)) spoiler_map[k] = v;
        for (auto& [k, v] : rename(rv.beta, xp)) spoiler_map[k] = v;
        auto dup_map = rename(rv.alpha, Y);
        for (auto& [k, v] : rename(rv.mu, mu)) dup_map[k] = v;
        dup_map[rv.mu[0]] = Term(t);
        for (auto& [k, v] : rename(rv.beta, yp)) dup_map[k] = v;
        std::vector<Var> inner_vars(yp);
        inner_vars.push_back(t);
        auto reply = Formula::exists(inner_vars, Formula::conj({pa::substitute(R, dup_map), pair_psi(xp, yp)}));
        std::vector<Var> outer_vars(mu);
        outer_vars.insert(outer_vars.end(), xp.begin(), xp.end());
        clauses.push_back(Formula::negate(
            Formula::exists(outer_vars, Formula::conj({pa::substitute(R, spoiler_map), Formula::negate(reply)}))));
        return Formula::conj(std::move(clauses));
    }
    for (std::uint32_t ai = 0; ai < desc.action_count(); ++ai) {
        ActionId a{ai};
        auto xp = fresh_vars(nv, "a'"), yp = fresh_vars(nv, "b'");
        Formula W = wstep_qf(desc, a, qo);
        Formula S = regime == Regime::ShortLong ? step_formula(desc, a) : W;
        auto reply = Formula::exists(yp, Formula::conj({at(W, rv, Y, yp), pair_psi(xp, yp)}));
        clauses.push_back(
            Formula::negate(Formula::exists(xp, Formula::conj({at(S, rv, X, xp), Formula::negate(reply)}))));
    }
    return Formula::conj(std::move(clauses));
}

Formula successor(const ProcessDescription& desc, Regime regime, const Formula& psi, const pa::QeOptions& qo) {
    return Formula::conj({attack(desc, regime, psi, true, qo), attack(desc, regime, psi, false, qo)});
}

void require_symbolic(Regime regime) {
    if (regime == Regime::Word) throw Error("the symbolic backend does not support the word regime");
}

std::vector<Term> var_terms(std::span<const Var> vs) { return {vs.begin(), vs.end()}; }

std::optional<Configuration> constant_configuration(std::span<const Term> xs) {
    std::vector<std::uint32_t> counts;
    for (const auto& t : xs) {
        if (!t.is_constant() || t.constant() < 0) return std::nullopt;
        counts.push_back(static_cast<std::uint32_t>(t.constant()));
    }
    return Configuration(std::move(counts));
}

// Psi_n(X, Y) over arbitrary terms, with every quantifier in place. Strong
// steps from a constant side are enumerated; from a symbolic side they become
// one substitution per rule.
Formula psi_terms(const ProcessDescription& desc, Regime regime, unsigned n, std::span<const Term> X,
                  std::span<const Term> Y);

Formula attack_terms(const ProcessDescription& desc, Regime regime, unsigned n, std::span<const Term> X,
                     std::span<const Term> Y, bool from_left) {
    const std::size_t nv = desc.variable_count();
    auto next = [&](std::span<const Term> xs, std::span<const Term> ys) {
        return from_left ? psi_terms(desc, regime, n - 1, xs, ys) : psi_terms(desc, regime, n - 1, ys, xs);
    };
    std::vector<Formula> clauses;
    if (regime == Regime::ShortLong) {
        auto reply = [&](ActionId a, std::span<const Term> target) {
            auto yp = fresh_vars(nv, "b'");
            auto yt = var_terms(yp);
            return Formula::exists(yp, Formula::conj({wstep_formula(desc, a, Y, yt), next(target, yt)}));
        };
        if (auto c = constant_configuration(X)) {
            for (const auto& st : strong_steps(desc, *c))
                clauses.push_back(reply(st.action, as_terms(st.target, nv)));
        } else {
            for (const auto& r : desc.rules()) {
                std::vector<Term> target(X.begin(), X.end());
                target[r.lhs.index] = target[r.lhs.index] - 1;
                for (std::uint32_t v = 0; v < nv; ++v)
                    target[v] = target[v] + static_cast<std::int64_t>(r.rhs.count(VariableId{v}));
                clauses.push_back(Formula::implies(Formula::ge(X[r.lhs.index], 1), reply(r.action, target)));
            }
        }
        return Formula::conj(std::move(clauses));
    }
    if (regime == Regime::LongLong) {
        for (std::uint32_t ai = 0; ai < desc.action_count(); ++ai) {
            ActionId a{ai};
            auto xp = fresh_vars(nv, "a'"), yp = fresh_vars(nv, "b'");
            auto xt = var_terms(xp), yt = var_terms(yp);
            auto reply = Formula::exists(yp, Formula::conj({wstep_formula(desc, a, Y, yt), next(xt, yt)}));
            clauses.push_back(Formula::forall(xp, Formula::implies(wstep_formula(desc, a, X, xt), reply)));
        }
        return Formula::conj(std::move(clauses));
    }
    // Parikh: Spoiler fixes the image mu; Duplicator keeps the visible part.
    auto xp = fresh_vars(nv, "a'"), yp = fresh_vars(nv, "b'");
    auto mu = fresh_vars(desc.action_count(), "m");
    auto t = pa::fresh("t");
    auto xt = var_terms(xp), yt = var_terms(yp), mt = var_terms(mu);
    auto nu = mt;
    nu[0] = Term(t);
    std::vector<Var> inner(yp);
    inner.push_back(t);
    auto reply = Formula::exists(inner, Formula::conj({reach_formula(desc, Y, nu, yt), next(xt, yt)}));
    std::vector<Var> outer(mu);
    outer.insert(outer.end(), xp.begin(), xp.end());
    return Formula::forall(outer, Formula::implies(reach_formula(desc, X, mt, xt), reply));
}

Formula psi_terms(const ProcessDescription& desc, Regime regime, unsigned n, std::span<const Term> X,
                  std::span<const Term> Y) {
    if (n == 0) return Formula::truth();
    return Formula::conj(
        {attack_terms(desc, regime, n, X, Y, true), attack_terms(desc, regime, n, Y, X, false)});
}

Formula generic_psi(const ProcessDescription& desc, Regime regime, unsigned n, const pa::QeOptions& qo) {
    if (n == 0) return Formula::truth();
    auto key = render(desc) + "|psi|" + std::string(to_string(regime)) + "|" + std::to_string(n);
    return cached(key, qo, [&] {
        auto prev = generic_psi(desc, regime, n - 1, qo);
        return pa::simplify(pa::eliminate_quantifiers(successor(desc, regime, prev, qo), qo));
    });
}

} // namespace

Formula approximant_formula(const ProcessDescription& desc, Regime regime, unsigned n) {
    require_symbolic(regime);
    return generic_psi(desc, regime, n, {});
}

Formula approximant_formula_raw(const ProcessDescription& desc, Regime regime, unsigned n) {
    require_symbolic(regime);
    auto rv = reach_variables(desc);
    return psi_terms(desc, regime, n, as_terms(rv.alpha), as_terms(rv.beta));
}

namespace {
constexpr std::size_t kGenericBudget = 300'000;
}

bool symbolic_related(const ProcessDescription& desc, const Configuration& a, const Configuration& b,
                      Regime regime, unsigned n, const pa::QeOptions& qo) {
    require_symbolic(regime);
    // The closed-form Psi_n is cheap on small systems and reusable across
    // pairs; past a modest budget fall back to deciding the pair directly.
    try {
        auto psi = generic_psi(desc, regime, n, pa::QeOptions{kGenericBudget});
        auto rv = reach_variables(desc);
        pa::Assignment g;
        for (std::uint32_t v = 0; v < desc.variable_count(); ++v) {
            g[rv.alpha[v]] = a.count(VariableId{v});
            g[rv.beta[v]] = b.count(VariableId{v});
        }
        return pa::evaluate(psi, g);
    } catch (const pa::ResourceExhausted&) {
    }
    const auto nv = desc.variable_count();
    return pa::decide(psi_terms(desc, regime, n, as_terms(a, nv), as_terms(b, nv)), qo);
}

Formula identity_relation(const ProcessDescription& desc) {
    auto rv = reach_variables(desc);
    std::vector<Formula> eqs;
    for (std::size_t i = 0; i < rv.alpha.size(); ++i) eqs.push_back(Formula::eq(rv.alpha[i], rv.beta[i]));
    return Formula::conj(std::move(eqs));
}

namespace {

std::vector<Formula> top_disjuncts(const Formula& f) {
    if (f.kind() == pa::Kind::Or) return {f.children().begin(), f.children().end()};
    return {f};
}

// Solves the unit-coefficient equalities of a conjunction for variables in
// `vars`, one at a time. Returns the composed substitution.
std::map<Var, Term> solved_equalities(Formula d, std::span<const Var> vars) {
    std::map<Var, Term> sol;
    for (bool progress = true; progress;) {
        progress = false;
        std::vector<Formula> parts = d.kind() == pa::Kind::And
                                         ? std::vector<Formula>(d.children().begin(), d.children().end())
                                         : std::vector<Formula>{d};
        for (const auto& p : parts) {
            if (p.kind() != pa::Kind::Eq) continue;
            Term t = p.lhs() - p.rhs();
            for (Var v : vars) {
                std::int64_t c = t.coefficient(v);
                if (c != 1 && c != -1) continue;
                Term by = t.without(v) * -c;
                for (auto& [k, img] : sol) img = img.substitute(v, by);
                sol[v] = by;
                d = pa::simplify(pa::substitute(d, v, by));
                progress = true;
                break;
            }
            if (progress) break;
        }
    }
    return sol;
}

} // namespace

bool check_candidate_bisimulation(const ProcessDescription& desc, const Formula& r) {
    auto rv = reach_variables(desc);
    std::vector<Var> both(rv.alpha);
    both.insert(both.end(), rv.beta.begin(), rv.beta.end());
    auto swapped = at(r, rv, rv.beta, rv.alpha);
    if (!pa::decide(Formula::forall(both, Formula::implies(r, swapped)))) return false;
    const std::size_t nv = desc.variable_count();
    // Per disjunct D of R and per rule X -a-> g: for all (alpha, beta) in D
    // with X in alpha, some weak a-step of beta lands in R(alpha - X + g, .).
    // Equalities of D are substituted up front so most checks are pointwise.
    for (const auto& d : top_disjuncts(r)) {
        auto sol = solved_equalities(d, both);
        auto hyp = pa::simplify(pa::substitute(d, sol));
        if (hyp.is_false()) continue;
        std::vector<Term> alpha, beta;
        for (std::size_t v = 0; v < nv; ++v) {
            auto ia = sol.find(rv.alpha[v]), ib = sol.find(rv.beta[v]);
            alpha.push_back(ia != sol.end() ? ia->second : Term(rv.alpha[v]));
            beta.push_back(ib != sol.end() ? ib->second : Term(rv.beta[v]));
        }
        for (const auto& rule : desc.rules()) {
            auto yp = fresh_vars(nv, "y'");
            std::map<Var, Term> into_w, into_r;
            for (std::uint32_t v = 0; v < nv; ++v) {
                std::int64_t delta = rule.rhs.count(VariableId{v});
                if (rule.lhs.index == v) delta -= 1;
                into_w[rv.alpha[v]] = beta[v];
                into_w[rv.beta[v]] = Term(yp[v]);
                into_r[rv.alpha[v]] = alpha[v] + delta;
                into_r[rv.beta[v]] = Term(yp[v]);
            }
            auto reply = Formula::exists(yp, pa::simplify(Formula::conj(
                                                 {pa::substitute(wstep_qf(desc, rule.action), into_w),
                                                  pa::substitute(r, into_r)})));
            auto body = Formula::implies(Formula::conj({hyp, Formula::le(1, alpha[rule.lhs.index])}), reply);
            std::vector<Var> rest;
            for (Var v : both)
                if (!sol.contains(v)) rest.push_back(v);
            if (!pa::decide(Formula::forall(rest, body))) return false;
        }
    }
    return true;
}

} // namespace bpp
