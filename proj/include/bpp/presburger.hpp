#pragma once
/// \file
/// Presburger arithmetic over the naturals: terms, formulas, evaluation,
/// quantifier elimination and decision, and text export.
///
/// Every variable, free or bound, ranges over the naturals. Internally the
/// engine works over the integers and conjoins nonnegativity where needed.

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "bpp/model.hpp"

namespace bpp::pa {

/// Raised when quantifier elimination exceeds its node budget or an
/// intermediate coefficient overflows.
class ResourceExhausted : public Error {
public:
    ResourceExhausted() : Error("symbolic backend resource exhausted") {}
    explicit ResourceExhausted(const std::string& why)
        : Error("symbolic backend resource exhausted: " + why) {}
};

/// Interned formula variable.
struct Var {
    std::uint32_t id = 0;
    auto operator<=>(const Var&) const = default;
};

Var var(std::string_view name);
/// A variable with a name that has never been handed out before.
Var fresh(std::string_view hint);
const std::string& name(Var v);

/// Linear term: constant + sum of coefficient * variable.
/// Coefficients are kept sorted by variable with zeros dropped.
class Term {
public:
    Term() = default;
    Term(std::int64_t constant) : constant_(constant) {} // NOLINT(implicit)
    Term(Var v) : coeffs_{{v, 1}} {}                     // NOLINT(implicit)
    static Term scaled(Var v, std::int64_t k);

    std::int64_t constant() const { return constant_; }
    std::span<const std::pair<Var, std::int64_t>> coefficients() const { return coeffs_; }
    std::int64_t coefficient(Var v) const;
    bool is_constant() const { return coeffs_.empty(); }
    bool mentions(Var v) const { return coefficient(v) != 0; }

    Term operator+(const Term& o) const;
    Term operator-(const Term& o) const;
    Term operator-() const { return *this * -1; }
    Term operator*(std::int64_t k) const;
    Term& operator+=(const Term& o) { return *this = *this + o; }

    /// Replaces v by `by`.
    Term substitute(Var v, const Term& by) const;
    /// Drops the v component (returns the rest).
    Term without(Var v) const;

    std::size_t hash() const;
    bool operator==(const Term&) const = default;

private:
    std::int64_t constant_ = 0;
    std::vector<std::pair<Var, std::int64_t>> coeffs_;
};

enum class Kind { True, False, Eq, Le, Divides, Not, And, Or, Exists, Forall };

class Formula;

struct Node {
    Kind kind;
    Term lhs;              // Eq, Le, Divides
    Term rhs;              // Eq, Le
    std::int64_t modulus;  // Divides
    Var bound;             // Exists, Forall
    std::vector<Formula> children;
    std::size_t hash;
    std::uint64_t var_mask; // bit (id % 64) for every variable occurring
    std::size_t size;       // nodes in this subtree
};

/// Immutable formula handle. Copies share structure.
class Formula {
public:
    Formula(); // True

    static Formula truth();
    static Formula falsity();
    static Formula boolean(bool b) { return b ? truth() : falsity(); }
    static Formula eq(const Term& a, const Term& b);
    static Formula le(const Term& a, const Term& b);
    static Formula lt(const Term& a, const Term& b) { return le(a + 1, b); }
    static Formula ge(const Term& a, const Term& b) { return le(b, a); }
    /// modulus >= 2 divides t.
    static Formula divides(std::int64_t modulus, const Term& t);
    static Formula negate(const Formula& f);
    static Formula conj(std::vector<Formula> fs);
    static Formula disj(std::vector<Formula> fs);
    static Formula implies(const Formula& a, const Formula& b) { return disj({negate(a), b}); }
    static Formula exists(Var v, const Formula& f);
    static Formula forall(Var v, const Formula& f);
    static Formula exists(std::span<const Var> vs, Formula f);
    static Formula forall(std::span<const Var> vs, Formula f);

    Kind kind() const { return node_->kind; }
    const Node& node() const { return *node_; }
    const Term& lhs() const { return node_->lhs; }
    const Term& rhs() const { return node_->rhs; }
    std::int64_t modulus() const { return node_->modulus; }
    Var bound() const { return node_->bound; }
    std::span<const Formula> children() const { return node_->children; }
    const Formula& child() const { return node_->children.front(); }

    std::size_t hash() const { return node_->hash; }
    std::size_t size() const { return node_->size; }
    /// May return true for variables that do not occur; never false for ones that do.
    bool may_mention(Var v) const { return (node_->var_mask >> (v.id % 64)) & 1U; }
    bool mentions(Var v) const;
    bool same(const Formula& o) const { return node_ == o.node_; }

    bool is_true() const { return kind() == Kind::True; }
    bool is_false() const { return kind() == Kind::False; }
    bool is_atom() const;
    bool is_quantifier_free() const;

    bool operator==(const Formula& o) const;

private:
    explicit Formula(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
    static Formula make(Node n);
    std::shared_ptr<const Node> node_;
};

struct FormulaHash {
    std::size_t operator()(const Formula& f) const { return f.hash(); }
};

std::vector<Var> free_variables(const Formula& f);
bool is_closed(const Formula& f);

/// Capture-avoiding substitution of a term for a free variable.
Formula substitute(const Formula& f, Var v, const Term& by);
Formula substitute(const Formula& f, const std::map<Var, Term>& by);

using Assignment = std::map<Var, std::int64_t>;

/// Truth of a quantifier-free formula. Throws Error on an unbound variable or
/// a quantifier.
bool evaluate(const Formula& f, const Assignment& a);
/// Evaluates f at every assignment. Uses OpenMP when `parallel`.
std::vector<char> evaluate_batch(const Formula& f, std::span<const Assignment> as,
                                 bool parallel = true);

struct QeOptions {
    /// Ceiling on formula nodes created during one call; 0 disables it.
    std::uint64_t node_limit = 5'000'000;
};

/// Equivalent quantifier-free formula (over the naturals) in negation normal
/// form. Free variables are preserved.
Formula eliminate_quantifiers(const Formula& f, const QeOptions& opts = {});
/// Truth of a closed formula. Throws Error if free variables remain.
bool decide(const Formula& f, const QeOptions& opts = {});

/// Constant folding, flattening and bound propagation on a quantifier-free
/// formula in negation normal form. Exposed mainly for tests.
Formula simplify(const Formula& f);
/// Negation normal form of a quantifier-free formula, atoms normalized to
/// `t = 0`, `t <= 0`, `m | t`.
Formula to_nnf(const Formula& f);

enum class ExportFormat { Internal, SmtLib2 };

std::string export_formula(const Formula& f, ExportFormat format = ExportFormat::Internal);
/// Parses the internal s-expression format (`;` comments allowed).
Formula parse_formula(std::string_view text);
std::string render_term(const Term& t);

} // namespace bpp::pa
