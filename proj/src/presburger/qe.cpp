// Quantifier elimination for Presburger arithmetic over the naturals.
//
// Cooper's method on negation normal form, with the eliminated variable
// constrained to be nonnegative. Equalities are eliminated by substitution
// first, and existentials are pushed through disjunctions.

#include <algorithm>
#include <limits>
#include <optional>
#include <unordered_set>

#include "bpp/presburger.hpp"
#include "presburger/internal.hpp"

namespace bpp::pa {

using namespace detail;

namespace {

Formula negate_nnf(const Formula& f) {
    switch (f.kind()) {
    case Kind::True:
        return Formula::falsity();
    case Kind::False:
        return Formula::truth();
    case Kind::Eq: {
        Term t = f.lhs() - f.rhs();
        return mk_or({le0(t + 1), le0(-t + 1)});
    }
    case Kind::Le:
        return le0(-(f.lhs() - f.rhs()) + 1);
    case Kind::Divides:
        return Formula::negate(f);
    case Kind::Not:
        return f.child();
    case Kind::And:
    case Kind::Or: {
        std::vector<Formula> cs;
        cs.reserve(f.children().size());
        for (const auto& c : f.children()) cs.push_back(negate_nnf(c));
        return f.kind() == Kind::And ? mk_or(std::move(cs)) : mk_and(std::move(cs));
    }
    default:
        throw Error("internal: quantifier under negation normal form");
    }
}

// Applies fn to every atom (Not(Divides) counts as an atom of its own).
template <class Fn>
void for_each_atom(const Formula& f, Fn&& fn) {
    switch (f.kind()) {
    case Kind::And:
    case Kind::Or:
        for (const auto& c : f.children()) for_each_atom(c, fn);
        return;
    case Kind::Not:
        fn(f.child(), true);
        return;
    case Kind::True:
    case Kind::False:
        return;
    default:
        fn(f, false);
    }
}

// Rebuilds f with every atom mapped through fn(atom, negated) -> Formula.
template <class Fn>
Formula map_atoms(const Formula& f, Fn&& fn) {
    switch (f.kind()) {
    case Kind::And:
    case Kind::Or: {
        std::vector<Formula> cs;
        cs.reserve(f.children().size());
        for (const auto& c : f.children()) cs.push_back(map_atoms(c, fn));
        return f.kind() == Kind::And ? mk_and(std::move(cs)) : mk_or(std::move(cs));
    }
    case Kind::Not:
        return fn(f.child(), true);
    case Kind::True:
    case Kind::False:
        return f;
    default:
        return fn(f, false);
    }
}

// Atom term of a normalized atom (rhs is 0 after simplify).
Term atom_term(const Formula& a) {
    return a.kind() == Kind::Divides ? a.lhs() : a.lhs() - a.rhs();
}

Formula rebuild(const Formula& a, bool negated, const Term& t, std::int64_t modulus) {
    switch (a.kind()) {
    case Kind::Eq:
        return eq0(t);
    case Kind::Le:
        return le0(t);
    default: {
        auto d = dvd(modulus, t);
        if (!negated) return d;
        if (d.is_true()) return Formula::falsity();
        if (d.is_false()) return Formula::truth();
        return Formula::negate(d);
    }
    }
}

// Eliminates x from a conjunction using the equality c*x + t = 0.
Formula eliminate_by_equality(Var x, const Formula& eq, std::span<const Formula> others) {
    Term full = atom_term(eq);
    std::int64_t c = full.coefficient(x);
    Term t = full.without(x);
    if (c < 0) {
        c = -c;
        t = -t;
    }
    // c*x = -t, so x = u / c with u = -t >= 0 and c | u.
    Term u = -t;
    std::vector<Formula> out;
    out.push_back(le0(t));
    if (c > 1) out.push_back(dvd(c, t));
    for (const auto& o : others) {
        if (c == 1) {
            out.push_back(substitute(o, x, u));
            continue;
        }
        out.push_back(map_atoms(o, [&](const Formula& a, bool negated) -> Formula {
            Term at = atom_term(a);
            auto ax = at.coefficient(x);
            if (ax == 0) return negated ? Formula::negate(a) : a;
            // c * (ax*x + s) = ax*u + c*s
            Term nt = u * ax + at.without(x) * c;
            std::int64_t m = a.kind() == Kind::Divides ? checked_mul(a.modulus(), c) : 0;
            return rebuild(a, negated, nt, m);
        }));
    }
    return simplify(mk_and(std::move(out)));
}

struct CooperSets {
    std::vector<Term> lower; // B: x = b + j
    std::vector<Term> upper; // A: x = a - j
    std::int64_t delta = 1;
};

void add_unique(std::vector<Term>& v, Term t) {
    if (std::find(v.begin(), v.end(), t) == v.end()) v.push_back(std::move(t));
}

Formula cooper(Var x, const Formula& body) {
    // Kept raw: the folding normalizer would turn -x <= 0 into true.
    Formula f = mk_and({body, Formula::le(-Term(x), 0)});

    std::int64_t L = 1;
    for_each_atom(f, [&](const Formula& a, bool) {
        auto c = atom_term(a).coefficient(x);
        if (c != 0) L = lcm(L, c);
    });

    // Normalize every coefficient of x to +-1 by scaling, substituting x for L*x.
    f = map_atoms(f, [&](const Formula& a, bool negated) -> Formula {
        Term t = atom_term(a);
        auto c = t.coefficient(x);
        if (c == 0) return negated ? Formula::negate(a) : a;
        auto k = L / (c < 0 ? -c : c);
        Term nt = t.without(x) * k + Term::scaled(x, c < 0 ? -1 : 1);
        std::int64_t m = a.kind() == Kind::Divides ? checked_mul(a.modulus(), k) : 0;
        if (a.kind() == Kind::Divides) return rebuild(a, negated, nt, m);
        // Build directly: le0/eq0 would keep the unit coefficient anyway.
        return a.kind() == Kind::Eq ? Formula::eq(nt, 0) : Formula::le(nt, 0);
    });
    if (L > 1) f = mk_and({f, dvd(L, Term(x))});

    CooperSets sets;
    for_each_atom(f, [&](const Formula& a, bool) {
        Term t = atom_term(a);
        auto c = t.coefficient(x);
        if (c == 0) return;
        Term s = t.without(x);
        switch (a.kind()) {
        case Kind::Divides:
            sets.delta = lcm(sets.delta, a.modulus());
            break;
        case Kind::Le:
            if (c > 0) add_unique(sets.upper, -s + 1); // x <= -s
            else add_unique(sets.lower, s - 1);        // x >= s
            break;
        case Kind::Eq: {
            Term v = c > 0 ? -s : s;
            add_unique(sets.lower, v - 1);
            add_unique(sets.upper, v + 1);
            break;
        }
        default:
            break;
        }
    });

    std::vector<Formula> out;
    bool use_lower = sets.lower.size() <= sets.upper.size() + 1;
    if (use_lower) {
        // The nonnegativity conjunct makes the -infinity projection false.
        for (std::int64_t j = 1; j <= sets.delta; ++j)
            for (const auto& b : sets.lower) {
                auto g = simplify(substitute(f, x, b + j));
                if (g.is_true()) return g;
                out.push_back(std::move(g));
            }
    } else {
        Formula inf = map_atoms(f, [&](const Formula& a, bool negated) -> Formula {
            auto c = atom_term(a).coefficient(x);
            if (c == 0 || a.kind() == Kind::Divides) return negated ? Formula::negate(a) : a;
            if (a.kind() == Kind::Eq) return Formula::falsity();
            return Formula::boolean(c < 0);
        });
        for (std::int64_t j = 1; j <= sets.delta; ++j) {
            auto g = simplify(substitute(inf, x, Term(-j)));
            if (g.is_true()) return g;
            out.push_back(std::move(g));
            for (const auto& a : sets.upper) {
                auto h = simplify(substitute(f, x, a - j));
                if (h.is_true()) return h;
                out.push_back(std::move(h));
            }
        }
    }
    return simplify(mk_or(std::move(out)));
}

// How to eliminate one variable from a conjunction, with a rough size estimate.
struct Plan {
    enum Method { Equality, Range, Cooper } method = Cooper;
    std::size_t cost = std::numeric_limits<std::size_t>::max();
    Formula equality;
    std::int64_t lo = 0, hi = 0;
};

constexpr std::int64_t kMaxRange = 64;

Plan plan(Var x, const Formula& f, std::span<const Var> block) {
    Plan p;
    std::span<const Formula> top = f.kind() == Kind::And ? f.children() : std::span<const Formula>(&f, 1);

    // Top-level equality, preferring unit coefficients and ones that do not
    // drag free variables into the rest of the formula.
    for (const auto& c : top) {
        if (c.kind() != Kind::Eq) continue;
        Term t = atom_term(c);
        auto k = t.coefficient(x);
        if (k == 0) continue;
        std::size_t cost = (k == 1 || k == -1) ? 1 : 2;
        for (const auto& [v, coeff] : t.coefficients())
            if (v != x && std::find(block.begin(), block.end(), v) == block.end()) {
                cost += 8;
                break;
            }
        if (cost < p.cost) {
            p.method = Plan::Equality;
            p.cost = cost;
            p.equality = c;
        }
    }

    // Constant range from single-variable bounds.
    std::int64_t lo = 0;
    std::optional<std::int64_t> hi;
    for (const auto& c : top) {
        if (c.kind() != Kind::Le) continue;
        Term t = atom_term(c);
        if (t.coefficients().size() != 1 || t.coefficients()[0].first != x) continue;
        auto k = t.coefficients()[0].second;
        if (k == 1) hi = hi ? std::min(*hi, -t.constant()) : -t.constant();
        if (k == -1) lo = std::max(lo, t.constant());
    }
    if (hi) {
        auto width = *hi < lo ? 0 : *hi - lo + 1;
        if (width <= kMaxRange && static_cast<std::size_t>(width) + 1 < p.cost) {
            p.method = Plan::Range;
            p.cost = static_cast<std::size_t>(width) + 1;
            p.lo = lo;
            p.hi = *hi;
        }
    }

    std::size_t lower = 1, upper = 0, divs = 0;
    for_each_atom(f, [&](const Formula& a, bool) {
        auto c = atom_term(a).coefficient(x);
        if (c == 0) return;
        if (a.kind() == Kind::Divides) ++divs;
        else if (a.kind() == Kind::Eq) ++lower, ++upper;
        else if (c > 0) ++upper;
        else ++lower;
    });
    std::size_t cooper_cost = std::min(lower, upper + 1) * (divs + 1) + 2;
    if (cooper_cost < p.cost) {
        p.method = Plan::Cooper;
        p.cost = cooper_cost;
    }
    return p;
}

Formula eliminate_one(Var x, const Formula& f, std::span<const Var> block) {
    if (!f.mentions(x)) return f;
    if (f.kind() == Kind::Or) {
        std::vector<Formula> cs;
        for (const auto& c : f.children()) {
            auto e = eliminate_one(x, c, block);
            if (e.is_true()) return e;
            cs.push_back(std::move(e));
        }
        return simplify(mk_or(std::move(cs)));
    }
    std::vector<Formula> rest, inner;
    if (f.kind() == Kind::And) {
        for (const auto& c : f.children()) (c.mentions(x) ? inner : rest).push_back(c);
    } else {
        inner.push_back(f);
    }
    Formula body = mk_and(inner);
    Plan p = plan(x, body, block);
    Formula elim;
    switch (p.method) {
    case Plan::Equality: {
        std::vector<Formula> others;
        for (const auto& c : inner)
            if (!c.same(p.equality)) others.push_back(c);
        elim = eliminate_by_equality(x, p.equality, others);
        break;
    }
    case Plan::Range: {
        std::vector<Formula> alts;
        for (std::int64_t v = p.lo; v <= p.hi; ++v) {
            auto g = simplify(substitute(body, x, Term(v)));
            if (g.is_true()) {
                alts = {g};
                break;
            }
            alts.push_back(std::move(g));
        }
        elim = simplify(mk_or(std::move(alts)));
        break;
    }
    case Plan::Cooper:
        elim = cooper(x, body);
        break;
    }
    if (rest.empty()) return elim;
    rest.push_back(std::move(elim));
    return simplify(mk_and(std::move(rest)));
}

Formula eliminate_block(std::vector<Var> vars, const Formula& f) {
    std::erase_if(vars, [&](Var v) { return !f.mentions(v); });
    if (vars.empty()) return f;
    if (f.kind() == Kind::Or) {
        std::vector<Formula> cs;
        for (const auto& c : f.children()) {
            auto e = eliminate_block(vars, c);
            if (e.is_true()) return e;
            cs.push_back(std::move(e));
        }
        return simplify(mk_or(std::move(cs)));
    }
    std::size_t pick = 0;
    std::size_t best = std::numeric_limits<std::size_t>::max();
    for (std::size_t i = 0; i < vars.size(); ++i) {
        auto c = plan(vars[i], f, vars).cost;
        if (c < best) {
            best = c;
            pick = i;
        }
    }
    Var x = vars[pick];
    auto g = eliminate_one(x, f, vars);
    vars.erase(vars.begin() + static_cast<std::ptrdiff_t>(pick));
    return eliminate_block(std::move(vars), g);
}

Formula qe(const Formula& f) {
    switch (f.kind()) {
    case Kind::True:
    case Kind::False:
    case Kind::Eq:
    case Kind::Le:
    case Kind::Divides:
        return to_nnf(f);
    case Kind::Not:
        return simplify(negate_nnf(qe(f.child())));
    case Kind::And:
    case Kind::Or: {
        std::vector<Formula> cs;
        bool conj = f.kind() == Kind::And;
        for (const auto& c : f.children()) {
            auto e = qe(c);
            if (conj && e.is_false()) return e;
            if (!conj && e.is_true()) return e;
            cs.push_back(std::move(e));
        }
        return simplify(conj ? mk_and(std::move(cs)) : mk_or(std::move(cs)));
    }
    case Kind::Exists:
    case Kind::Forall: {
        Kind k = f.kind();
        std::vector<Var> block;
        Formula body = f;
        while (body.kind() == k) {
            block.push_back(body.bound());
            body = body.child();
        }
        auto inner = qe(body);
        if (k == Kind::Exists) return eliminate_block(std::move(block), inner);
        return simplify(negate_nnf(eliminate_block(std::move(block), simplify(negate_nnf(inner)))));
    }
    }
    return f;
}

} // namespace

Formula eliminate_quantifiers(const Formula& f, const QeOptions& opts) {
    NodeBudget budget(opts.node_limit);
    return qe(f);
}

bool decide(const Formula& f, const QeOptions& opts) {
    auto fv = free_variables(f);
    if (!fv.empty()) throw Error("decide requires a closed formula; '" + name(fv.front()) + "' is free");
    auto r = eliminate_quantifiers(f, opts);
    if (r.is_true()) return true;
    if (r.is_false()) return false;
    // Closed atoms always fold; anything left is evaluated directly.
    return evaluate(r, {});
}

} // namespace bpp::pa
