#include <cctype>
#include <charconv>
#include <limits>
#include <sstream>

#include "bpp/presburger.hpp"

namespace bpp::pa {

namespace {

bool plain_smt_symbol(const std::string& s) {
    if (s.empty() || std::isdigit(static_cast<unsigned char>(s[0]))) return false;
    for (char ch : s) {
        auto c = static_cast<unsigned char>(ch);
        if (!std::isalnum(c) && ch != '_' && ch != '.') return false;
    }
    return true;
}

std::string smt_name(Var v) {
    const auto& n = name(v);
    return plain_smt_symbol(n) ? n : "|" + n + "|";
}

std::string smt_int(std::int64_t k) {
    if (k >= 0) return std::to_string(k);
    if (k == std::numeric_limits<std::int64_t>::min()) return "(- 9223372036854775808)";
    return "(- " + std::to_string(-k) + ")";
}

std::string smt_term(const Term& t) {
    std::vector<std::string> parts;
    for (const auto& [v, c] : t.coefficients())
        parts.push_back(c == 1 ? smt_name(v) : "(* " + smt_int(c) + " " + smt_name(v) + ")");
    if (t.constant() != 0 || parts.empty()) parts.push_back(smt_int(t.constant()));
    if (parts.size() == 1) return parts.front();
    std::string s = "(+";
    for (const auto& p : parts) s += " " + p;
    return s + ")";
}

void smt_formula(const Formula& f, std::ostream& os) {
    switch (f.kind()) {
    case Kind::True:
        os << "true";
        return;
    case Kind::False:
        os << "false";
        return;
    case Kind::Eq:
        os << "(= " << smt_term(f.lhs()) << " " << smt_term(f.rhs()) << ")";
        return;
    case Kind::Le:
        os << "(<= " << smt_term(f.lhs()) << " " << smt_term(f.rhs()) << ")";
        return;
    case Kind::Divides:
        os << "(= (mod " << smt_term(f.lhs()) << " " << f.modulus() << ") 0)";
        return;
    case Kind::Not:
        os << "(not ";
        smt_formula(f.child(), os);
        os << ")";
        return;
    case Kind::And:
    case Kind::Or:
        if (f.children().empty()) {
            os << (f.kind() == Kind::And ? "true" : "false");
            return;
        }
        os << (f.kind() == Kind::And ? "(and" : "(or");
        for (const auto& c : f.children()) {
            os << " ";
            smt_formula(c, os);
        }
        os << ")";
        return;
    case Kind::Exists:
    case Kind::Forall: {
        bool ex = f.kind() == Kind::Exists;
        std::vector<Var> block;
        Formula body = f;
        while (body.kind() == f.kind()) {
            block.push_back(body.bound());
            body = body.child();
        }
        os << (ex ? "(exists (" : "(forall (");
        for (std::size_t i = 0; i < block.size(); ++i)
            os << (i ? " " : "") << "(" << smt_name(block[i]) << " Int)";
        os << ") (" << (ex ? "and" : "=>");
        if (block.size() == 1) {
            os << " (>= " << smt_name(block[0]) << " 0)";
        } else {
            os << " (and";
            for (Var v : block) os << " (>= " << smt_name(v) << " 0)";
            os << ")";
        }
        os << " ";
        smt_formula(body, os);
        os << "))";
        return;
    }
    }
}

void internal_formula(const Formula& f, std::ostream& os) {
    switch (f.kind()) {
    case Kind::True:
        os << "true";
        return;
    case Kind::False:
        os << "false";
        return;
    case Kind::Eq:
        os << "(= " << render_term(f.lhs()) << " " << render_term(f.rhs()) << ")";
        return;
    case Kind::Le:
        os << "(<= " << render_term(f.lhs()) << " " << render_term(f.rhs()) << ")";
        return;
    case Kind::Divides:
        os << "(divides " << f.modulus() << " " << render_term(f.lhs()) << ")";
        return;
    case Kind::Not:
        os << "(not ";
        internal_formula(f.child(), os);
        os << ")";
        return;
    case Kind::And:
    case Kind::Or:
        os << (f.kind() == Kind::And ? "(and" : "(or");
        for (const auto& c : f.children()) {
            os << " ";
            internal_formula(c, os);
        }
        os << ")";
        return;
    case Kind::Exists:
    case Kind::Forall:
        os << (f.kind() == Kind::Exists ? "(exists (" : "(forall (") << name(f.bound()) << ") ";
        internal_formula(f.child(), os);
        os << ")";
        return;
    }
}

// --- parser ---------------------------------------------------------------

struct Sexp {
    bool atom = false;
    std::string text;
    std::vector<Sexp> items;
    std::size_t line = 1, column = 1;
};

class Reader {
public:
    explicit Reader(std::string_view s) : s_(s) {}

    Sexp read() {
        skip();
        if (pos_ >= s_.size()) fail("unexpected end of input");
        Sexp e;
        e.line = line_;
        e.column = col_;
        if (s_[pos_] == '(') {
            advance();
            while (true) {
                skip();
                if (pos_ >= s_.size()) fail("unterminated list");
                if (s_[pos_] == ')') {
                    advance();
                    return e;
                }
                e.items.push_back(read());
            }
        }
        if (s_[pos_] == ')') fail("unexpected ')'");
        e.atom = true;
        if (s_[pos_] == '|') {
            advance();
            while (pos_ < s_.size() && s_[pos_] != '|') e.text += s_[pos_], advance();
            if (pos_ >= s_.size()) fail("unterminated quoted symbol");
            advance();
            return e;
        }
        while (pos_ < s_.size() && !std::isspace(static_cast<unsigned char>(s_[pos_])) &&
               s_[pos_] != '(' && s_[pos_] != ')' && s_[pos_] != ';') {
            e.text += s_[pos_];
            advance();
        }
        return e;
    }

    void expect_end() {
        skip();
        if (pos_ < s_.size()) fail("trailing input after formula");
    }

    [[noreturn]] void fail(const std::string& msg) const { throw ParseError(line_, col_, msg); }

private:
    void advance() {
        if (s_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }
    void skip() {
        while (pos_ < s_.size()) {
            if (s_[pos_] == ';') {
                while (pos_ < s_.size() && s_[pos_] != '\n') advance();
            } else if (std::isspace(static_cast<unsigned char>(s_[pos_]))) {
                advance();
            } else {
                break;
            }
        }
    }

    std::string_view s_;
    std::size_t pos_ = 0, line_ = 1, col_ = 1;
};

[[noreturn]] void fail_at(const Sexp& e, const std::string& msg) {
    throw ParseError(e.line, e.column, msg);
}

std::optional<std::int64_t> as_int(const Sexp& e) {
    if (!e.atom || e.text.empty()) return std::nullopt;
    std::int64_t v = 0;
    auto [p, ec] = std::from_chars(e.text.data(), e.text.data() + e.text.size(), v);
    if (ec != std::errc() || p != e.text.data() + e.text.size()) return std::nullopt;
    return v;
}

Term parse_term(const Sexp& e) {
    if (e.atom) {
        if (auto k = as_int(e)) return Term(*k);
        if (e.text == "true" || e.text == "false") fail_at(e, "expected a term");
        return Term(var(e.text));
    }
    if (e.items.empty() || !e.items[0].atom) fail_at(e, "expected a term");
    const auto& op = e.items[0].text;
    if (op == "+") {
        Term t;
        for (std::size_t i = 1; i < e.items.size(); ++i) t += parse_term(e.items[i]);
        return t;
    }
    if (op == "-") {
        if (e.items.size() == 2) return -parse_term(e.items[1]);
        if (e.items.size() < 2) fail_at(e, "'-' needs an argument");
        Term t = parse_term(e.items[1]);
        for (std::size_t i = 2; i < e.items.size(); ++i) t = t - parse_term(e.items[i]);
        return t;
    }
    if (op == "*") {
        if (e.items.size() != 3) fail_at(e, "'*' takes two arguments");
        auto a = parse_term(e.items[1]);
        auto b = parse_term(e.items[2]);
        if (a.is_constant()) return b * a.constant();
        if (b.is_constant()) return a * b.constant();
        fail_at(e, "nonlinear product");
    }
    fail_at(e, "unknown term operator '" + op + "'");
}

Formula parse_sexp_formula(const Sexp& e) {
    if (e.atom) {
        if (e.text == "true") return Formula::truth();
        if (e.text == "false") return Formula::falsity();
        fail_at(e, "expected a formula, found '" + e.text + "'");
    }
    if (e.items.empty() || !e.items[0].atom) fail_at(e, "expected a formula");
    const auto& op = e.items[0].text;
    auto n = e.items.size();
    auto need = [&](std::size_t k) {
        if (n != k + 1) fail_at(e, "'" + op + "' takes " + std::to_string(k) + " arguments");
    };
    if (op == "=" || op == "<=" || op == "<" || op == ">=" || op == ">") {
        need(2);
        auto a = parse_term(e.items[1]);
        auto b = parse_term(e.items[2]);
        if (op == "=") return Formula::eq(a, b);
        if (op == "<=") return Formula::le(a, b);
        if (op == "<") return Formula::lt(a, b);
        if (op == ">=") return Formula::ge(a, b);
        return Formula::lt(b, a);
    }
    if (op == "divides") {
        need(2);
        auto m = as_int(e.items[1]);
        if (!m || *m < 2) fail_at(e.items[1], "modulus must be an integer >= 2");
        return Formula::divides(*m, parse_term(e.items[2]));
    }
    if (op == "not") {
        need(1);
        return Formula::negate(parse_sexp_formula(e.items[1]));
    }
    if (op == "and" || op == "or") {
        std::vector<Formula> cs;
        for (std::size_t i = 1; i < n; ++i) cs.push_back(parse_sexp_formula(e.items[i]));
        return op == "and" ? Formula::conj(std::move(cs)) : Formula::disj(std::move(cs));
    }
    if (op == "=>") {
        need(2);
        return Formula::implies(parse_sexp_formula(e.items[1]), parse_sexp_formula(e.items[2]));
    }
    if (op == "exists" || op == "forall") {
        need(2);
        const auto& vs = e.items[1];
        if (vs.atom || vs.items.empty()) fail_at(vs, "expected a nonempty variable list");
        std::vector<Var> bound;
        for (const auto& v : vs.items) {
            if (!v.atom || as_int(v)) fail_at(v, "expected a variable name");
            bound.push_back(var(v.text));
        }
        auto body = parse_sexp_formula(e.items[2]);
        return op == "exists" ? Formula::exists(bound, body) : Formula::forall(bound, body);
    }
    fail_at(e, "unknown formula operator '" + op + "'");
}

} // namespace

std::string render_term(const Term& t) {
    std::vector<std::string> parts;
    for (const auto& [v, c] : t.coefficients())
        parts.push_back(c == 1 ? name(v) : "(* " + std::to_string(c) + " " + name(v) + ")");
    if (t.constant() != 0 || parts.empty()) parts.push_back(std::to_string(t.constant()));
    if (parts.size() == 1) return parts.front();
    std::string s = "(+";
    for (const auto& p : parts) s += " " + p;
    return s + ")";
}

std::string export_formula(const Formula& f, ExportFormat format) {
    std::ostringstream os;
    if (format == ExportFormat::Internal) {
        internal_formula(f, os);
        os << "\n";
        return os.str();
    }
    os << "; divisibility m | t is written (= (mod t m) 0)\n";
    os << "; every variable ranges over the naturals\n";
    os << "(set-logic LIA)\n";
    for (Var v : free_variables(f)) {
        os << "(declare-fun " << smt_name(v) << " () Int)\n";
        os << "(assert (>= " << smt_name(v) << " 0))\n";
    }
    os << "(assert ";
    smt_formula(f, os);
    os << ")\n(check-sat)\n";
    return os.str();
}

Formula parse_formula(std::string_view text) {
    Reader r(text);
    auto e = r.read();
    r.expect_end();
    return parse_sexp_formula(e);
}

} // namespace bpp::pa
