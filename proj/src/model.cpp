#include "bpp/model.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <numeric>
#include <sstream>

namespace bpp {

ParseError::ParseError(std::size_t line, std::size_t column, const std::string& msg)
    : Error(std::to_string(line) + ":" + std::to_string(column) + ": " + msg),
      line_(line), column_(column), detail_(msg) {}

// ---------------------------------------------------------------------------
// Configuration

Configuration::Configuration(std::vector<std::uint32_t> counts) : counts_(std::move(counts)) {
    trim();
}

Configuration Configuration::singleton(VariableId v, std::uint32_t k) {
    Configuration c;
    c.add(v, k);
    return c;
}

std::uint64_t Configuration::size() const {
    return std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0});
}

void Configuration::add(VariableId v, std::uint32_t k) {
    if (k == 0) return;
    if (counts_.size() <= v.index) counts_.resize(v.index + 1, 0);
    counts_[v.index] += k;
}

void Configuration::remove(VariableId v, std::uint32_t k) {
    if (count(v) < k) throw Error("configuration does not contain enough copies of variable");
    counts_[v.index] -= k;
    trim();
}

void Configuration::add(const Configuration& other) {
    if (counts_.size() < other.counts_.size()) counts_.resize(other.counts_.size(), 0);
    for (std::size_t i = 0; i < other.counts_.size(); ++i) counts_[i] += other.counts_[i];
}

Configuration Configuration::operator+(const Configuration& other) const {
    Configuration r = *this;
    r.add(other);
    return r;
}

bool Configuration::included_in(const Configuration& other) const {
    if (counts_.size() > other.counts_.size()) return false;
    for (std::size_t i = 0; i < counts_.size(); ++i)
        if (counts_[i] > other.counts_[i]) return false;
    return true;
}

std::size_t Configuration::hash() const {
    std::size_t h = 0x9e3779b97f4a7c15ULL;
    for (auto c : counts_) h = (h ^ c) * 0x100000001b3ULL + (h >> 29);
    return h;
}

void Configuration::trim() {
    while (!counts_.empty() && counts_.back() == 0) counts_.pop_back();
}

// ---------------------------------------------------------------------------
// NormValue

NormValue NormValue::operator+(const NormValue& o) const {
    if (infinite_ || o.infinite_) return infinite();
    return NormValue(value_ + o.value_);
}

std::string NormValue::to_string() const {
    return infinite_ ? std::string("inf") : std::to_string(value_);
}

// ---------------------------------------------------------------------------
// ProcessDescription

std::optional<VariableId> ProcessDescription::find_variable(std::string_view name) const {
    auto it = variable_index_.find(std::string(name));
    if (it == variable_index_.end()) return std::nullopt;
    return VariableId{it->second};
}

std::optional<ActionId> ProcessDescription::find_action(std::string_view name) const {
    auto it = action_index_.find(std::string(name));
    if (it == action_index_.end()) return std::nullopt;
    return ActionId{it->second};
}

ProcessDescription::Builder::Builder() {
    desc_.actions_.emplace_back(kSilentName);
    desc_.action_index_.emplace(std::string(kSilentName), 0);
}

VariableId ProcessDescription::Builder::variable(std::string_view name) {
    std::string key(name);
    if (auto it = desc_.variable_index_.find(key); it != desc_.variable_index_.end())
        return VariableId{it->second};
    auto id = static_cast<std::uint32_t>(desc_.variables_.size());
    desc_.variables_.push_back(key);
    desc_.variable_index_.emplace(std::move(key), id);
    return VariableId{id};
}

ActionId ProcessDescription::Builder::action(std::string_view name) {
    std::string key(name);
    if (auto it = desc_.action_index_.find(key); it != desc_.action_index_.end())
        return ActionId{it->second};
    auto id = static_cast<std::uint32_t>(desc_.actions_.size());
    desc_.actions_.push_back(key);
    desc_.action_index_.emplace(std::move(key), id);
    return ActionId{id};
}

std::optional<VariableId> ProcessDescription::Builder::find_variable(std::string_view name) const {
    return desc_.find_variable(name);
}

std::optional<ActionId> ProcessDescription::Builder::find_action(std::string_view name) const {
    return desc_.find_action(name);
}

bool ProcessDescription::Builder::rule(VariableId lhs, ActionId action, Configuration rhs) {
    Rule r{lhs, action, std::move(rhs)};
    if (std::find(desc_.rules_.begin(), desc_.rules_.end(), r) != desc_.rules_.end()) {
        warn("duplicate rule " + desc_.variables_.at(lhs.index) + " " +
             desc_.actions_.at(action.index) + " -> ... dropped");
        return false;
    }
    desc_.rules_.push_back(std::move(r));
    return true;
}

bool ProcessDescription::Builder::rule(std::string_view lhs, std::string_view action,
                                       std::initializer_list<std::string_view> rhs) {
    Configuration c;
    for (auto name : rhs) c.add(variable(name));
    return rule(variable(lhs), this->action(action), std::move(c));
}

ProcessDescription ProcessDescription::Builder::build() && {
    auto& d = desc_;
    const auto n = d.variables_.size();
    for (const auto& r : d.rules_) {
        if (r.lhs.index >= n || r.rhs.extent() > n || r.action.index >= d.actions_.size())
            throw Error("rule refers to an undeclared identifier");
    }
    d.by_lhs_.assign(n, {});
    d.visible_.assign(n, false);
    for (std::size_t i = 0; i < d.rules_.size(); ++i) {
        const auto& r = d.rules_[i];
        d.by_lhs_[r.lhs.index].push_back(i);
        if (!r.action.silent()) d.visible_[r.lhs.index] = true;
    }
    d.norms_ = norms(d);
    return std::move(d);
}

// ---------------------------------------------------------------------------
// Semantics

std::vector<NormValue> norms(const ProcessDescription& desc) {
    const auto n = desc.variable_count();
    std::vector<NormValue> norm(n, NormValue::infinite());
    for (std::uint32_t v = 0; v < n; ++v)
        if (!desc.has_visible_rule(VariableId{v})) norm[v] = NormValue(0);

    // Bellman-Ford relaxation over the rule hypergraph. Every round either
    // lowers some entry or stops; entries are bounded below by zero.
    bool changed = true;
    while (changed) {
        changed = false;
        for (const auto& r : desc.rules()) {
            NormValue cand(r.action.silent() ? 0 : 1);
            const auto counts = r.rhs.counts();
            for (std::size_t i = 0; i < counts.size() && !cand.is_infinite(); ++i) {
                if (counts[i] == 0) continue;
                const auto& vn = norm[i];
                if (vn.is_infinite()) cand = NormValue::infinite();
                else cand += NormValue(vn.value() * counts[i]);
            }
            if (cand < norm[r.lhs.index]) {
                norm[r.lhs.index] = cand;
                changed = true;
            }
        }
    }
    return norm;
}

NormValue norm(const ProcessDescription& desc, const Configuration& c) {
    NormValue total(0);
    const auto counts = c.counts();
    for (std::uint32_t i = 0; i < counts.size(); ++i) {
        if (counts[i] == 0) continue;
        auto vn = desc.norm_of(VariableId{i});
        if (vn.is_infinite()) return NormValue::infinite();
        total += NormValue(vn.value() * counts[i]);
    }
    return total;
}

bool is_deadlock(const ProcessDescription& desc, const Configuration& c) {
    const auto counts = c.counts();
    for (std::uint32_t i = 0; i < counts.size(); ++i)
        if (counts[i] > 0 && desc.has_visible_rule(VariableId{i})) return false;
    return true;
}

Configuration apply_rule(const Rule& r, const Configuration& c) {
    Configuration next = c;
    next.remove(r.lhs);
    next.add(r.rhs);
    return next;
}

std::vector<Step> strong_steps(const ProcessDescription& desc, const Configuration& c) {
    std::vector<Step> ordered;
    for (const auto& r : desc.rules()) {
        if (c.count(r.lhs) == 0) continue;
        Step s{r.action, apply_rule(r, c)};
        if (std::find(ordered.begin(), ordered.end(), s) == ordered.end())
            ordered.push_back(std::move(s));
    }
    return ordered;
}

// ---------------------------------------------------------------------------
// Text format

namespace {

enum class Tok { Ident, Number, Arrow, Caret, End };

struct Token {
    Tok kind;
    std::string text;
    std::size_t column;
};

bool ident_start(char ch) { return std::isalpha(static_cast<unsigned char>(ch)) || ch == '_'; }
bool ident_char(char ch) {
    return std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '\'';
}

std::vector<Token> tokenize(std::string_view line, std::size_t lineno) {
    std::vector<Token> toks;
    std::size_t i = 0;
    while (i < line.size()) {
        char ch = line[i];
        if (ch == '#') break;
        if (std::isspace(static_cast<unsigned char>(ch))) { ++i; continue; }
        const std::size_t col = i + 1;
        if (ident_start(ch)) {
            std::size_t j = i;
            while (j < line.size() && ident_char(line[j])) ++j;
            toks.push_back({Tok::Ident, std::string(line.substr(i, j - i)), col});
            i = j;
        } else if (std::isdigit(static_cast<unsigned char>(ch))) {
            std::size_t j = i;
            while (j < line.size() && std::isdigit(static_cast<unsigned char>(line[j]))) ++j;
            toks.push_back({Tok::Number, std::string(line.substr(i, j - i)), col});
            i = j;
        } else if (ch == '-' && i + 1 < line.size() && line[i + 1] == '>') {
            toks.push_back({Tok::Arrow, "->", col});
            i += 2;
        } else if (ch == '^') {
            toks.push_back({Tok::Caret, "^", col});
            ++i;
        } else {
            throw ParseError(lineno, col, std::string("unexpected character '") + ch + "'");
        }
    }
    toks.push_back({Tok::End, "", line.size() + 1});
    return toks;
}

std::uint32_t parse_count(const Token& t, std::size_t lineno) {
    std::uint32_t k = 0;
    auto [p, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), k);
    if (ec != std::errc() || p != t.text.data() + t.text.size())
        throw ParseError(lineno, t.column, "multiplicity out of range");
    if (k == 0) throw ParseError(lineno, t.column, "multiplicity must be positive");
    return k;
}

// Parses `0` or a list of `id[^k]` atoms starting at toks[pos] up to End.
template <typename Lookup>
Configuration parse_atoms(const std::vector<Token>& toks, std::size_t pos, std::size_t lineno,
                          Lookup&& lookup) {
    Configuration c;
    if (toks[pos].kind == Tok::Number && toks[pos].text == "0" && toks[pos + 1].kind == Tok::End)
        return c;
    if (toks[pos].kind == Tok::End) throw ParseError(lineno, toks[pos].column, "expected process");
    while (toks[pos].kind != Tok::End) {
        const auto& t = toks[pos];
        if (t.kind != Tok::Ident)
            throw ParseError(lineno, t.column, "expected variable, found '" + t.text + "'");
        auto v = lookup(t);
        std::uint32_t k = 1;
        ++pos;
        if (toks[pos].kind == Tok::Caret) {
            ++pos;
            if (toks[pos].kind != Tok::Number)
                throw ParseError(lineno, toks[pos].column, "expected multiplicity after '^'");
            k = parse_count(toks[pos], lineno);
            ++pos;
        }
        c.add(v, k);
    }
    return c;
}

std::vector<std::string_view> split_lines(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        auto line = text.substr(start, end - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        lines.push_back(line);
        start = end + 1;
    }
    return lines;
}

} // namespace

ProcessDescription parse_description(std::string_view text) {
    ProcessDescription::Builder b;
    const auto lines = split_lines(text);
    for (std::size_t ln = 0; ln < lines.size(); ++ln) {
        const std::size_t lineno = ln + 1;
        auto toks = tokenize(lines[ln], lineno);
        if (toks.front().kind == Tok::End) continue;
        const auto& head = toks.front();
        if (head.kind == Tok::Ident && (head.text == "vars" || head.text == "act") &&
            toks[1].kind != Tok::Arrow) {
            const bool vars = head.text == "vars";
            if (toks[1].kind == Tok::End)
                throw ParseError(lineno, toks[1].column, "expected at least one identifier");
            for (std::size_t i = 1; toks[i].kind != Tok::End; ++i) {
                const auto& t = toks[i];
                if (t.kind != Tok::Ident)
                    throw ParseError(lineno, t.column, "expected identifier, found '" + t.text + "'");
                if (vars) {
                    if (b.find_variable(t.text)) b.warn("variable " + t.text + " declared twice");
                    b.variable(t.text);
                } else {
                    if (t.text == kSilentName)
                        throw ParseError(lineno, t.column, "'tau' is reserved for the silent action");
                    if (b.find_action(t.text)) b.warn("action " + t.text + " declared twice");
                    b.action(t.text);
                }
            }
            continue;
        }
        // Rule line: <id> <action> -> <rhs>
        if (head.kind != Tok::Ident)
            throw ParseError(lineno, head.column, "expected declaration or rule");
        auto lhs = b.find_variable(head.text);
        if (!lhs) throw ParseError(lineno, head.column, "unknown variable '" + head.text + "'");
        const auto& act = toks[1];
        if (act.kind != Tok::Ident) throw ParseError(lineno, act.column, "expected action");
        auto action = b.find_action(act.text);
        if (!action) throw ParseError(lineno, act.column, "unknown action '" + act.text + "'");
        if (toks[2].kind != Tok::Arrow) throw ParseError(lineno, toks[2].column, "expected '->'");
        auto rhs = parse_atoms(toks, 3, lineno, [&](const Token& t) {
            auto v = b.find_variable(t.text);
            if (!v) throw ParseError(lineno, t.column, "unknown variable '" + t.text + "'");
            return *v;
        });
        b.rule(*lhs, *action, std::move(rhs));
    }
    return std::move(b).build();
}

Configuration parse_process(std::string_view text, const ProcessDescription& desc) {
    auto toks = tokenize(text, 1);
    return parse_atoms(toks, 0, 1, [&](const Token& t) {
        auto v = desc.find_variable(t.text);
        if (!v) throw ParseError(1, t.column, "unknown variable '" + t.text + "'");
        return *v;
    });
}

std::string render(const ProcessDescription& desc, const Configuration& c) {
    if (c.empty()) return "0";
    std::string out;
    const auto counts = c.counts();
    for (std::uint32_t i = 0; i < counts.size(); ++i) {
        if (counts[i] == 0) continue;
        if (!out.empty()) out += ' ';
        out += desc.variable_name(VariableId{i});
        if (counts[i] >= 2) out += '^' + std::to_string(counts[i]);
    }
    return out;
}

std::string render(const ProcessDescription& desc) {
    std::ostringstream os;
    os << "vars";
    for (std::uint32_t i = 0; i < desc.variable_count(); ++i)
        os << ' ' << desc.variable_name(VariableId{i});
    os << '\n';
    if (desc.action_count() > 1) {
        os << "act";
        for (std::uint32_t i = 1; i < desc.action_count(); ++i)
            os << ' ' << desc.action_name(ActionId{i});
        os << '\n';
    }
    for (const auto& r : desc.rules())
        os << desc.variable_name(r.lhs) << ' ' << desc.action_name(r.action) << " -> "
           << render(desc, r.rhs) << '\n';
    return os.str();
}

std::vector<Configuration> configurations_up_to(std::size_t variables, std::size_t max_size) {
    std::vector<Configuration> out;
    std::vector<std::uint32_t> counts(variables, 0);
    for (std::size_t total = 0; total <= max_size; ++total) {
        if (variables == 0) {
            if (total == 0) out.emplace_back();
            continue;
        }
        // Compositions of `total` into `variables` parts, lexicographically
        // descending in the first coordinate.
        std::fill(counts.begin(), counts.end(), 0);
        counts[0] = static_cast<std::uint32_t>(total);
        while (true) {
            out.emplace_back(counts);
            // Next composition: find rightmost non-last position with a
            // positive count, move one unit right and gather the tail.
            std::size_t i = variables - 1;
            std::uint32_t tail = counts[i];
            counts[i] = 0;
            std::size_t j = i;
            while (j > 0 && counts[j - 1] == 0) --j;
            if (j == 0) break;
            --counts[j - 1];
            counts[j] = tail + 1;
        }
    }
    return out;
}

} // namespace bpp
