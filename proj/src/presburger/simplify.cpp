#include <algorithm>
#include <map>
#include <numeric>
#include <optional>
#include <unordered_set>

#include "bpp/presburger.hpp"
#include "presburger/internal.hpp"

namespace bpp::pa {

namespace detail {

namespace {

std::int64_t coeff_gcd(const Term& t) {
    std::int64_t g = 0;
    for (const auto& [v, c] : t.coefficients()) g = std::gcd(g, c < 0 ? -c : c);
    return g;
}

// Rebuilds t with coefficients divided by g and constant replaced.
Term divide_coeffs(const Term& t, std::int64_t g, std::int64_t constant) {
    Term r(constant);
    for (const auto& [v, c] : t.coefficients()) r += Term::scaled(v, c / g);
    return r;
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    auto q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return -floor_div(-a, b); }

std::int64_t floor_mod(std::int64_t a, std::int64_t m) {
    auto r = a % m;
    return r < 0 ? r + m : r;
}

// Sign of the coefficients: +1 all positive, -1 all negative, 0 mixed.
int uniform_sign(const Term& t) {
    int s = 0;
    for (const auto& [v, c] : t.coefficients()) {
        int cs = c > 0 ? 1 : -1;
        if (s == 0) s = cs;
        else if (s != cs) return 0;
    }
    return s;
}

Formula all_zero(const Term& t) {
    std::vector<Formula> parts;
    for (const auto& [v, c] : t.coefficients()) parts.push_back(Formula::eq(Term(v), 0));
    return parts.size() == 1 ? parts.front() : Formula::conj(std::move(parts));
}

} // namespace

Formula eq0(const Term& t0) {
    if (t0.is_constant()) return Formula::boolean(t0.constant() == 0);
    auto g = coeff_gcd(t0);
    if (t0.constant() % g != 0) return Formula::falsity();
    Term t = divide_coeffs(t0, g, t0.constant() / g);
    if (t.coefficients().front().second < 0) t = -t;
    int s = uniform_sign(t);
    if (s > 0) {
        if (t.constant() > 0) return Formula::falsity();
        if (t.constant() == 0) return all_zero(t);
    }
    return Formula::eq(t, 0);
}

Formula le0(const Term& t0) {
    if (t0.is_constant()) return Formula::boolean(t0.constant() <= 0);
    auto g = coeff_gcd(t0);
    Term t = divide_coeffs(t0, g, ceil_div(t0.constant(), g));
    int s = uniform_sign(t);
    if (s < 0 && t.constant() <= 0) return Formula::truth();
    if (s > 0) {
        if (t.constant() > 0) return Formula::falsity();
        if (t.constant() == 0) return all_zero(t);
    }
    return Formula::le(t, 0);
}

Formula dvd(std::int64_t m, const Term& t0) {
    if (m == 1) return Formula::truth();
    Term t(floor_mod(t0.constant(), m));
    for (const auto& [v, c] : t0.coefficients()) t += Term::scaled(v, floor_mod(c, m));
    if (t.is_constant()) return Formula::boolean(t.constant() == 0);
    auto g = std::gcd(coeff_gcd(t), m);
    if (t.constant() % g != 0) return Formula::falsity();
    if (g > 1) {
        m /= g;
        if (m == 1) return Formula::truth();
        t = divide_coeffs(t, g, t.constant() / g);
    }
    return Formula::divides(m, t);
}

Formula mk_and(std::vector<Formula> fs) {
    if (fs.empty()) return Formula::truth();
    if (fs.size() == 1) return fs.front();
    return Formula::conj(std::move(fs));
}

Formula mk_or(std::vector<Formula> fs) {
    if (fs.empty()) return Formula::falsity();
    if (fs.size() == 1) return fs.front();
    return Formula::disj(std::move(fs));
}

} // namespace detail

using namespace detail;

namespace {

Formula not_dvd(const Formula& d) {
    if (d.is_true()) return Formula::falsity();
    if (d.is_false()) return Formula::truth();
    return Formula::negate(d);
}

Formula nnf(const Formula& f, bool neg) {
    switch (f.kind()) {
    case Kind::True:
        return Formula::boolean(!neg);
    case Kind::False:
        return Formula::boolean(neg);
    case Kind::Eq: {
        Term t = f.lhs() - f.rhs();
        if (!neg) return eq0(t);
        return simplify(mk_or({le0(t + 1), le0(-t + 1)}));
    }
    case Kind::Le: {
        Term t = f.lhs() - f.rhs();
        return neg ? le0(-t + 1) : le0(t);
    }
    case Kind::Divides: {
        auto d = dvd(f.modulus(), f.lhs());
        return neg ? not_dvd(d) : d;
    }
    case Kind::Not:
        return nnf(f.child(), !neg);
    case Kind::And:
    case Kind::Or: {
        std::vector<Formula> cs;
        for (const auto& c : f.children()) cs.push_back(nnf(c, neg));
        bool conj = (f.kind() == Kind::And) != neg;
        return conj ? mk_and(std::move(cs)) : mk_or(std::move(cs));
    }
    case Kind::Exists:
    case Kind::Forall:
        throw Error("negation normal form requires a quantifier-free formula");
    }
    return f;
}

struct Bounds {
    std::int64_t lo = 0;
    std::optional<std::int64_t> hi;
};

// Single-variable atom after normalization: returns (var, coefficient sign).
std::optional<std::pair<Var, std::int64_t>> single(const Formula& f) {
    if (f.kind() != Kind::Eq && f.kind() != Kind::Le) return std::nullopt;
    if (!f.rhs().is_constant() || f.rhs().constant() != 0) return std::nullopt;
    auto cs = f.lhs().coefficients();
    if (cs.size() != 1 || (cs[0].second != 1 && cs[0].second != -1)) return std::nullopt;
    return cs[0];
}

void flatten_into(Kind k, const Formula& f, std::vector<Formula>& out) {
    if (f.kind() == k) {
        for (const auto& c : f.children()) flatten_into(k, c, out);
    } else {
        out.push_back(f);
    }
}

void dedupe(std::vector<Formula>& fs) {
    std::unordered_set<Formula, FormulaHash> seen;
    std::vector<Formula> out;
    out.reserve(fs.size());
    for (auto& f : fs)
        if (seen.insert(f).second) out.push_back(std::move(f));
    fs = std::move(out);
}

bool complementary(const std::vector<Formula>& fs) {
    std::unordered_set<Formula, FormulaHash> pos;
    for (const auto& f : fs)
        if (f.kind() == Kind::Divides) pos.insert(f);
    if (pos.empty()) return false;
    for (const auto& f : fs)
        if (f.kind() == Kind::Not && pos.count(f.child())) return true;
    return false;
}

Formula simplify_and(std::span<const Formula> input);
Formula simplify_or(std::span<const Formula> input);

Formula simplify_atom(const Formula& f) {
    switch (f.kind()) {
    case Kind::Eq:
        return eq0(f.lhs() - f.rhs());
    case Kind::Le:
        return le0(f.lhs() - f.rhs());
    case Kind::Divides:
        return dvd(f.modulus(), f.lhs());
    default:
        return f;
    }
}

Formula simplify_rec(const Formula& f) {
    switch (f.kind()) {
    case Kind::True:
    case Kind::False:
        return f;
    case Kind::Eq:
    case Kind::Le:
    case Kind::Divides:
        return simplify_atom(f);
    case Kind::Not:
        if (f.child().kind() == Kind::Divides) return not_dvd(simplify_atom(f.child()));
        return simplify_rec(nnf(f.child(), true));
    case Kind::And:
        return simplify_and(f.children());
    case Kind::Or:
        return simplify_or(f.children());
    case Kind::Exists:
    case Kind::Forall:
        throw Error("simplify requires a quantifier-free formula");
    }
    return f;
}

Formula simplify_and(std::span<const Formula> input) {
    std::vector<Formula> work(input.begin(), input.end());
    for (int round = 0;; ++round) {
        std::vector<Formula> flat;
        for (const auto& c : work) {
            auto s = simplify_rec(c);
            if (s.is_false()) return s;
            if (s.is_true()) continue;
            flatten_into(Kind::And, s, flat);
        }

        std::map<Var, Bounds> bounds;
        std::vector<Formula> rest;
        for (auto& c : flat) {
            auto sv = single(c);
            if (!sv) {
                rest.push_back(std::move(c));
                continue;
            }
            auto [v, a] = *sv;
            auto k = c.lhs().constant();
            auto& b = bounds[v];
            if (c.kind() == Kind::Eq) {
                // x + k = 0 (or -x + k = 0)
                std::int64_t val = a > 0 ? -k : k;
                b.lo = std::max(b.lo, val);
                b.hi = b.hi ? std::min(*b.hi, val) : val;
            } else if (a > 0) {
                b.hi = b.hi ? std::min(*b.hi, -k) : -k;
            } else {
                b.lo = std::max(b.lo, k);
            }
        }

        std::map<Var, Term> fixed;
        for (const auto& [v, b] : bounds) {
            if (b.hi && b.lo > *b.hi) return Formula::falsity();
            if (b.hi && b.lo == *b.hi) fixed.emplace(v, Term(b.lo));
        }

        bool resubstitute = false;
        if (!fixed.empty()) {
            for (auto& c : rest) {
                bool hit = false;
                for (const auto& [v, t] : fixed)
                    if (c.mentions(v)) hit = true;
                if (hit) {
                    c = substitute(c, fixed);
                    resubstitute = true;
                }
            }
        }

        std::vector<Formula> out;
        for (const auto& [v, b] : bounds) {
            if (b.hi && b.lo == *b.hi) {
                out.push_back(Formula::eq(Term(v) - b.lo, 0));
                continue;
            }
            if (b.lo > 0) out.push_back(Formula::le(Term(b.lo) - Term(v), 0));
            if (b.hi) out.push_back(Formula::le(Term(v) - *b.hi, 0));
        }
        for (auto& c : rest) out.push_back(std::move(c));

        if (resubstitute && round < 64) {
            work = std::move(out);
            continue;
        }
        dedupe(out);
        if (complementary(out)) return Formula::falsity();
        std::sort(out.begin(), out.end(),
                  [](const Formula& a, const Formula& b) { return a.hash() < b.hash(); });
        return mk_and(std::move(out));
    }
}

// Conjunct set view of a formula for absorption.
std::vector<Formula> conjuncts(const Formula& f) {
    if (f.kind() == Kind::And) return {f.children().begin(), f.children().end()};
    return {f};
}

bool subset(const std::vector<Formula>& a, const std::unordered_set<Formula, FormulaHash>& b) {
    for (const auto& x : a)
        if (!b.count(x)) return false;
    return true;
}

Formula simplify_or(std::span<const Formula> input) {
    std::vector<Formula> flat;
    for (const auto& c : input) {
        auto s = simplify_rec(c);
        if (s.is_true()) return s;
        if (s.is_false()) continue;
        flatten_into(Kind::Or, s, flat);
    }
    dedupe(flat);
    if (flat.size() > 1 && flat.size() <= 256) {
        // Drop any disjunct implied by a smaller one (A or (A and B) = A).
        std::vector<std::vector<Formula>> sets;
        sets.reserve(flat.size());
        for (const auto& f : flat) sets.push_back(conjuncts(f));
        std::vector<bool> dropped(flat.size(), false);
        for (std::size_t i = 0; i < flat.size(); ++i) {
            if (sets[i].size() < 2) continue;
            std::unordered_set<Formula, FormulaHash> si(sets[i].begin(), sets[i].end());
            for (std::size_t j = 0; j < flat.size(); ++j) {
                if (i == j || dropped[j] || sets[j].size() >= sets[i].size()) continue;
                if (subset(sets[j], si)) {
                    dropped[i] = true;
                    break;
                }
            }
        }
        std::vector<Formula> kept;
        for (std::size_t i = 0; i < flat.size(); ++i)
            if (!dropped[i]) kept.push_back(std::move(flat[i]));
        flat = std::move(kept);
    }
    std::sort(flat.begin(), flat.end(),
              [](const Formula& a, const Formula& b) { return a.hash() < b.hash(); });
    return mk_or(std::move(flat));
}

} // namespace

Formula to_nnf(const Formula& f) { return nnf(f, false); }

Formula simplify(const Formula& f) { return simplify_rec(f); }

} // namespace bpp::pa
