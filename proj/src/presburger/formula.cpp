#include <algorithm>
#include <deque>
#include <mutex>
#include <numeric>
#include <set>
#include <unordered_map>

#include "bpp/presburger.hpp"
#include "presburger/internal.hpp"

namespace bpp::pa {

// ---------------------------------------------------------------------------
// Variable table

namespace {

struct VarTable {
    std::mutex mu;
    std::deque<std::string> names;
    std::unordered_map<std::string, std::uint32_t> index;
    std::uint64_t fresh_counter = 0;
};

VarTable& table() {
    static VarTable t;
    return t;
}

} // namespace

Var var(std::string_view n) {
    auto& t = table();
    std::lock_guard lock(t.mu);
    std::string key(n);
    if (auto it = t.index.find(key); it != t.index.end()) return Var{it->second};
    auto id = static_cast<std::uint32_t>(t.names.size());
    t.names.push_back(key);
    t.index.emplace(std::move(key), id);
    return Var{id};
}

Var fresh(std::string_view hint) {
    auto& t = table();
    std::lock_guard lock(t.mu);
    while (true) {
        std::string key = std::string(hint) + "!" + std::to_string(t.fresh_counter++);
        if (t.index.count(key)) continue;
        auto id = static_cast<std::uint32_t>(t.names.size());
        t.names.push_back(key);
        t.index.emplace(std::move(key), id);
        return Var{id};
    }
}

const std::string& name(Var v) {
    auto& t = table();
    std::lock_guard lock(t.mu);
    return t.names.at(v.id);
}

// ---------------------------------------------------------------------------
// Checked arithmetic

namespace detail {

std::int64_t checked_add(std::int64_t a, std::int64_t b) {
    std::int64_t r;
    if (__builtin_add_overflow(a, b, &r)) throw ResourceExhausted("coefficient overflow");
    return r;
}

std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
    std::int64_t r;
    if (__builtin_mul_overflow(a, b, &r)) throw ResourceExhausted("coefficient overflow");
    return r;
}

std::int64_t lcm(std::int64_t a, std::int64_t b) {
    a = a < 0 ? -a : a;
    b = b < 0 ? -b : b;
    if (a == 0 || b == 0) return std::max(a, b);
    return checked_mul(a / std::gcd(a, b), b);
}

thread_local std::uint64_t nodes_created = 0;
thread_local std::uint64_t node_limit = 0;

NodeBudget::NodeBudget(std::uint64_t limit)
    : saved_created_(nodes_created), saved_limit_(node_limit) {
    nodes_created = 0;
    node_limit = limit;
}

NodeBudget::~NodeBudget() {
    nodes_created = saved_created_;
    node_limit = saved_limit_;
}

} // namespace detail

using detail::checked_add;
using detail::checked_mul;

// ---------------------------------------------------------------------------
// Term

Term Term::scaled(Var v, std::int64_t k) {
    Term t;
    if (k != 0) t.coeffs_.push_back({v, k});
    return t;
}

std::int64_t Term::coefficient(Var v) const {
    auto it = std::lower_bound(coeffs_.begin(), coeffs_.end(), v,
                               [](const auto& p, Var x) { return p.first < x; });
    return (it != coeffs_.end() && it->first == v) ? it->second : 0;
}

Term Term::operator+(const Term& o) const {
    Term r;
    r.constant_ = checked_add(constant_, o.constant_);
    r.coeffs_.reserve(coeffs_.size() + o.coeffs_.size());
    auto i = coeffs_.begin();
    auto j = o.coeffs_.begin();
    while (i != coeffs_.end() || j != o.coeffs_.end()) {
        if (j == o.coeffs_.end() || (i != coeffs_.end() && i->first < j->first)) {
            r.coeffs_.push_back(*i++);
        } else if (i == coeffs_.end() || j->first < i->first) {
            r.coeffs_.push_back(*j++);
        } else {
            auto c = checked_add(i->second, j->second);
            if (c != 0) r.coeffs_.push_back({i->first, c});
            ++i;
            ++j;
        }
    }
    return r;
}

Term Term::operator-(const Term& o) const { return *this + o * -1; }

Term Term::operator*(std::int64_t k) const {
    Term r;
    if (k == 0) return r;
    r.constant_ = checked_mul(constant_, k);
    r.coeffs_.reserve(coeffs_.size());
    for (const auto& [v, c] : coeffs_) r.coeffs_.push_back({v, checked_mul(c, k)});
    return r;
}

Term Term::without(Var v) const {
    Term r = *this;
    std::erase_if(r.coeffs_, [v](const auto& p) { return p.first == v; });
    return r;
}

Term Term::substitute(Var v, const Term& by) const {
    auto c = coefficient(v);
    if (c == 0) return *this;
    return without(v) + by * c;
}

std::size_t Term::hash() const {
    std::size_t h = std::hash<std::int64_t>{}(constant_) * 31 + 7;
    for (const auto& [v, c] : coeffs_) {
        h ^= (std::hash<std::uint32_t>{}(v.id) + 0x9e3779b9 + (h << 6) + (h >> 2));
        h ^= (std::hash<std::int64_t>{}(c) + 0x7f4a7c15 + (h << 6) + (h >> 2));
    }
    return h;
}

// ---------------------------------------------------------------------------
// Formula construction

namespace {

std::size_t mix(std::size_t h, std::size_t v) {
    return h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
}

std::uint64_t term_mask(const Term& t) {
    std::uint64_t m = 0;
    for (const auto& [v, c] : t.coefficients()) m |= 1ULL << (v.id % 64);
    return m;
}

} // namespace

Formula Formula::make(Node n) {
    if (detail::node_limit != 0 && ++detail::nodes_created > detail::node_limit)
        throw ResourceExhausted("node limit of " + std::to_string(detail::node_limit) +
                                " exceeded");
    std::size_t h = static_cast<std::size_t>(n.kind) * 1000003;
    std::uint64_t mask = 0;
    std::size_t size = 1;
    switch (n.kind) {
    case Kind::True:
    case Kind::False:
        break;
    case Kind::Eq:
    case Kind::Le:
        h = mix(mix(h, n.lhs.hash()), n.rhs.hash());
        mask = term_mask(n.lhs) | term_mask(n.rhs);
        break;
    case Kind::Divides:
        h = mix(mix(h, n.lhs.hash()), std::hash<std::int64_t>{}(n.modulus));
        mask = term_mask(n.lhs);
        break;
    case Kind::Exists:
    case Kind::Forall:
        h = mix(h, n.bound.id);
        mask |= 1ULL << (n.bound.id % 64);
        [[fallthrough]];
    default:
        for (const auto& c : n.children) {
            h = mix(h, c.hash());
            mask |= c.node().var_mask;
            size += c.size();
        }
    }
    n.hash = h;
    n.var_mask = mask;
    n.size = size;
    return Formula(std::make_shared<const Node>(std::move(n)));
}

Formula::Formula() : Formula(truth()) {}

Formula Formula::truth() {
    static const std::shared_ptr<const Node> node = [] {
        Node n{Kind::True, {}, {}, 0, {}, {}, 0, 0, 1};
        n.hash = 1000003;
        return std::make_shared<const Node>(std::move(n));
    }();
    return Formula(node);
}

Formula Formula::falsity() {
    static const std::shared_ptr<const Node> node = [] {
        Node n{Kind::False, {}, {}, 0, {}, {}, 0, 0, 1};
        n.hash = 2000006;
        return std::make_shared<const Node>(std::move(n));
    }();
    return Formula(node);
}

Formula Formula::eq(const Term& a, const Term& b) {
    return make(Node{Kind::Eq, a, b, 0, {}, {}, 0, 0, 0});
}

Formula Formula::le(const Term& a, const Term& b) {
    return make(Node{Kind::Le, a, b, 0, {}, {}, 0, 0, 0});
}

Formula Formula::divides(std::int64_t modulus, const Term& t) {
    if (modulus < 2) throw Error("divisibility modulus must be at least 2");
    return make(Node{Kind::Divides, t, {}, modulus, {}, {}, 0, 0, 0});
}

Formula Formula::negate(const Formula& f) {
    return make(Node{Kind::Not, {}, {}, 0, {}, {f}, 0, 0, 0});
}

Formula Formula::conj(std::vector<Formula> fs) {
    return make(Node{Kind::And, {}, {}, 0, {}, std::move(fs), 0, 0, 0});
}

Formula Formula::disj(std::vector<Formula> fs) {
    return make(Node{Kind::Or, {}, {}, 0, {}, std::move(fs), 0, 0, 0});
}

Formula Formula::exists(Var v, const Formula& f) {
    return make(Node{Kind::Exists, {}, {}, 0, v, {f}, 0, 0, 0});
}

Formula Formula::forall(Var v, const Formula& f) {
    return make(Node{Kind::Forall, {}, {}, 0, v, {f}, 0, 0, 0});
}

Formula Formula::exists(std::span<const Var> vs, Formula f) {
    for (auto it = vs.rbegin(); it != vs.rend(); ++it) f = exists(*it, f);
    return f;
}

Formula Formula::forall(std::span<const Var> vs, Formula f) {
    for (auto it = vs.rbegin(); it != vs.rend(); ++it) f = forall(*it, f);
    return f;
}

bool Formula::is_atom() const {
    switch (kind()) {
    case Kind::Eq:
    case Kind::Le:
    case Kind::Divides:
        return true;
    default:
        return false;
    }
}

bool Formula::is_quantifier_free() const {
    if (kind() == Kind::Exists || kind() == Kind::Forall) return false;
    for (const auto& c : children())
        if (!c.is_quantifier_free()) return false;
    return true;
}

bool Formula::mentions(Var v) const {
    if (!may_mention(v)) return false;
    switch (kind()) {
    case Kind::True:
    case Kind::False:
        return false;
    case Kind::Eq:
    case Kind::Le:
        return lhs().mentions(v) || rhs().mentions(v);
    case Kind::Divides:
        return lhs().mentions(v);
    default:
        if ((kind() == Kind::Exists || kind() == Kind::Forall) && bound() == v) return false;
        for (const auto& c : children())
            if (c.mentions(v)) return true;
        return false;
    }
}

bool Formula::operator==(const Formula& o) const {
    if (node_ == o.node_) return true;
    const Node& a = *node_;
    const Node& b = *o.node_;
    if (a.hash != b.hash || a.kind != b.kind || a.size != b.size) return false;
    switch (a.kind) {
    case Kind::True:
    case Kind::False:
        return true;
    case Kind::Eq:
    case Kind::Le:
        return a.lhs == b.lhs && a.rhs == b.rhs;
    case Kind::Divides:
        return a.modulus == b.modulus && a.lhs == b.lhs;
    case Kind::Exists:
    case Kind::Forall:
        if (a.bound != b.bound) return false;
        [[fallthrough]];
    default:
        return a.children == b.children;
    }
}

// ---------------------------------------------------------------------------
// Free variables and substitution

namespace {

void collect_free(const Formula& f, std::vector<Var>& bound, std::set<Var>& out) {
    auto add_term = [&](const Term& t) {
        for (const auto& [v, c] : t.coefficients())
            if (std::find(bound.begin(), bound.end(), v) == bound.end()) out.insert(v);
    };
    switch (f.kind()) {
    case Kind::True:
    case Kind::False:
        return;
    case Kind::Eq:
    case Kind::Le:
        add_term(f.lhs());
        add_term(f.rhs());
        return;
    case Kind::Divides:
        add_term(f.lhs());
        return;
    case Kind::Exists:
    case Kind::Forall:
        bound.push_back(f.bound());
        collect_free(f.child(), bound, out);
        bound.pop_back();
        return;
    default:
        for (const auto& c : f.children()) collect_free(c, bound, out);
    }
}

} // namespace

std::vector<Var> free_variables(const Formula& f) {
    std::vector<Var> bound;
    std::set<Var> out;
    collect_free(f, bound, out);
    return {out.begin(), out.end()};
}

bool is_closed(const Formula& f) { return free_variables(f).empty(); }

Formula substitute(const Formula& f, const std::map<Var, Term>& by) {
    if (by.empty()) return f;
    bool touched = false;
    for (const auto& [v, t] : by)
        if (f.may_mention(v)) touched = true;
    if (!touched) return f;

    // Simultaneous: images are never substituted again.
    auto sub_term = [&](const Term& t) {
        Term r(t.constant());
        for (const auto& [v, c] : t.coefficients()) {
            auto it = by.find(v);
            r += it != by.end() ? it->second * c : Term::scaled(v, c);
        }
        return r;
    };
    switch (f.kind()) {
    case Kind::True:
    case Kind::False:
        return f;
    case Kind::Eq: {
        auto l = sub_term(f.lhs()), r = sub_term(f.rhs());
        return (l == f.lhs() && r == f.rhs()) ? f : Formula::eq(l, r);
    }
    case Kind::Le: {
        auto l = sub_term(f.lhs()), r = sub_term(f.rhs());
        return (l == f.lhs() && r == f.rhs()) ? f : Formula::le(l, r);
    }
    case Kind::Divides: {
        auto l = sub_term(f.lhs());
        return l == f.lhs() ? f : Formula::divides(f.modulus(), l);
    }
    case Kind::Not: {
        auto c = substitute(f.child(), by);
        return c.same(f.child()) ? f : Formula::negate(c);
    }
    case Kind::And:
    case Kind::Or: {
        std::vector<Formula> cs;
        cs.reserve(f.children().size());
        bool changed = false;
        for (const auto& c : f.children()) {
            cs.push_back(substitute(c, by));
            changed = changed || !cs.back().same(c);
        }
        if (!changed) return f;
        return f.kind() == Kind::And ? Formula::conj(std::move(cs)) : Formula::disj(std::move(cs));
    }
    case Kind::Exists:
    case Kind::Forall: {
        std::map<Var, Term> inner = by;
        inner.erase(f.bound());
        // Rename the bound variable if a replacement term would be captured.
        Var b = f.bound();
        Formula body = f.child();
        for (const auto& [v, t] : inner) {
            if (t.mentions(b) && body.mentions(v)) {
                Var nb = fresh(name(b));
                body = substitute(body, b, Term(nb));
                b = nb;
                break;
            }
        }
        auto c = substitute(body, inner);
        if (c.same(f.child()) && b == f.bound()) return f;
        return f.kind() == Kind::Exists ? Formula::exists(b, c) : Formula::forall(b, c);
    }
    }
    return f;
}

Formula substitute(const Formula& f, Var v, const Term& by) {
    return substitute(f, std::map<Var, Term>{{v, by}});
}

// ---------------------------------------------------------------------------
// Evaluation

namespace {

std::int64_t eval_term(const Term& t, const Assignment& a) {
    std::int64_t r = t.constant();
    for (const auto& [v, c] : t.coefficients()) {
        auto it = a.find(v);
        if (it == a.end()) throw Error("unbound free variable '" + name(v) + "' in evaluation");
        r = checked_add(r, checked_mul(c, it->second));
    }
    return r;
}

std::int64_t floor_mod(std::int64_t a, std::int64_t m) {
    auto r = a % m;
    return r < 0 ? r + m : r;
}

} // namespace

bool evaluate(const Formula& f, const Assignment& a) {
    switch (f.kind()) {
    case Kind::True:
        return true;
    case Kind::False:
        return false;
    case Kind::Eq:
        return eval_term(f.lhs(), a) == eval_term(f.rhs(), a);
    case Kind::Le:
        return eval_term(f.lhs(), a) <= eval_term(f.rhs(), a);
    case Kind::Divides:
        return floor_mod(eval_term(f.lhs(), a), f.modulus()) == 0;
    case Kind::Not:
        return !evaluate(f.child(), a);
    case Kind::And:
        for (const auto& c : f.children())
            if (!evaluate(c, a)) return false;
        return true;
    case Kind::Or:
        for (const auto& c : f.children())
            if (evaluate(c, a)) return true;
        return false;
    case Kind::Exists:
    case Kind::Forall:
        throw Error("evaluate requires a quantifier-free formula");
    }
    return false;
}

std::vector<char> evaluate_batch(const Formula& f, std::span<const Assignment> as, bool parallel) {
    std::vector<char> out(as.size(), 0);
    const auto n = static_cast<std::int64_t>(as.size());
    if (parallel) {
#pragma omp parallel for schedule(dynamic, 64)
        for (std::int64_t i = 0; i < n; ++i) out[i] = evaluate(f, as[i]) ? 1 : 0;
    } else {
        for (std::int64_t i = 0; i < n; ++i) out[i] = evaluate(f, as[i]) ? 1 : 0;
    }
    return out;
}

} // namespace bpp::pa
