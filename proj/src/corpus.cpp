#include "bpp/corpus.hpp"

#include <array>

namespace bpp::corpus {

namespace {

using B = ProcessDescription::Builder;

void add_a(B& b) {
    b.rule("A", "tau", {});
    b.rule("A", "a", {});
}

// X Y Z plus the A-producing loops of the guessing game.
void guessing_game(B& b, const std::string& s, bool x_loop) {
    auto X = "X" + s, Y = "Y" + s, Z = "Z" + s;
    b.rule(X, "tau", {Y});
    b.rule(X, "b", {Z});
    b.rule(Y, "b", {});
    if (x_loop) b.rule(X, "tau", {X, "A"});
    b.rule(Y, "tau", {Y, "A"});
    b.rule(Z, "tau", {Z, "A"});
    b.rule(Z, "tau", {});
}

ProcessDescription example1(bool extended) {
    B b;
    for (auto v : {"X", "Y", "Z", "A"}) b.variable(v);
    b.action("a");
    b.action("b");
    b.rule("X", "tau", {"Y"});
    b.rule("X", "b", {"Z"});
    b.rule("Y", "b", {});
    b.rule("Y", "tau", {"Y", "A"});
    b.rule("Z", "tau", {});
    b.rule("Z", "tau", {"Z", "A"});
    if (extended) b.rule("X", "tau", {"X", "A"});
    add_a(b);
    return std::move(b).build();
}

ProcessDescription example2() {
    B b;
    for (auto v : {"X", "Y", "Z", "Y'"}) b.variable(v);
    b.action("a");
    b.action("b");
    b.rule("Y", "tau", {"X"});
    b.rule("Y", "tau", {"Z"});
    b.rule("Y", "tau", {"Y'"});
    b.rule("Y'", "a", {});
    b.rule("Y'", "b", {});
    b.rule("X", "a", {"X"});
    b.rule("Z", "b", {"Z"});
    return std::move(b).build();
}

ProcessDescription stacked_gadget(unsigned k) {
    B b;
    for (unsigned i = k; i >= 1; --i)
        for (auto v : {"X", "Y", "Z", "W", "S"}) b.variable(v + std::to_string(i));
    for (auto v : {"X0", "Y0", "Z0", "A"}) b.variable(v);
    b.action("a");
    b.action("b");
    b.action("c");
    for (unsigned i = k; i >= 1; --i) {
        auto n = std::to_string(i), p = std::to_string(i - 1);
        auto X = "X" + n, Y = "Y" + n, Z = "Z" + n, W = "W" + n, S = "S" + n;
        b.rule(X, "tau", {Y});
        b.rule(X, "b", {Z});
        b.rule(Y, "b", {W});
        b.rule(Y, "tau", {Y, "A"});
        b.rule(Z, "tau", {W});
        b.rule(Z, "tau", {Z, "A"});
        b.rule(W, "a", {S});
        b.rule(S, "tau", {S, "A"});
        b.rule(W, "c", {"X" + p});
        b.rule(S, "c", {"Y" + p});
    }
    guessing_game(b, "0", true);
    add_a(b);
    return std::move(b).build();
}

void word_cex_rules(B& b, const std::string& x, const std::string& y) {
    for (const auto& v : {x, y, std::string("Z"), std::string("L"), std::string("R"), std::string("Q")})
        b.variable(v);
    b.action("a");
    b.rule(x, "a", {"Z"});
    b.rule(x, "tau", {y});
    b.rule(y, "a", {});
    b.rule(y, "tau", {y, "L"});
    b.rule(y, "tau", {"R"});
    b.rule("Z", "tau", {"Z", "L"});
    b.rule("Z", "tau", {});
    b.rule("L", "a", {"R"});
    b.rule("L", "tau", {});
    b.rule("L", "tau", {"L", "Q"});
    b.rule("R", "tau", {});
    b.rule("R", "a", {"R"});
    b.rule("Q", "a", {});
    b.rule("Q", "tau", {});
}

ProcessDescription word_cex() {
    B b;
    word_cex_rules(b, "X", "Y");
    return std::move(b).build();
}

ProcessDescription ladder(unsigned k) {
    B b;
    word_cex_rules(b, "X0", "Y0");
    for (unsigned i = 1; i <= k; ++i) {
        auto n = std::to_string(i), p = std::to_string(i - 1);
        auto X = "X" + n, Y = "Y" + n, Z = "Z" + n, Zp = "Z" + n + "'", W = "W" + n, Wp = "W" + n + "'";
        b.rule(X, "a", {Z});
        b.rule(Z, "a", {Zp});
        b.rule(Zp, "a", {"X" + p});
        b.rule(Y, "a", {W});
        b.rule(W, "a", {Wp});
        b.rule(Wp, "a", {"Y" + p});
        b.rule(X, "tau", {Y});
        b.rule(W, "a", {Zp});
    }
    return std::move(b).build();
}

constexpr std::array kNames{"example1", "example1_extended", "example2", "stacked_gadget", "word_cex", "ladder"};

} // namespace

std::vector<std::string> names() { return {kNames.begin(), kNames.end()}; }

bool parameterized(std::string_view name) { return name == "stacked_gadget" || name == "ladder"; }

ProcessDescription build(std::string_view name, unsigned k) {
    if (parameterized(name) && k == 0) throw Error("corpus: k must be at least 1");
    if (name == "example1") return example1(false);
    if (name == "example1_extended") return example1(true);
    if (name == "example2") return example2();
    if (name == "stacked_gadget") return stacked_gadget(k);
    if (name == "word_cex") return word_cex();
    if (name == "ladder") return ladder(k);
    throw Error("corpus: unknown system '" + std::string(name) + "'");
}

std::vector<Fixture> fixtures() {
    using enum Regime;
    constexpr auto R = Outcome::Related, D = Outcome::Distinguished;
    std::vector<Fixture> fs{
        {"example2", 1, "X", "Y", ShortLong, 1, R, "X ~1 Y"},
        {"example2", 1, "Y", "Z", ShortLong, 1, R, "Y ~1 Z"},
        {"example2", 1, "X", "Z", ShortLong, 1, D, "Z !~1 X"},
        {"word_cex", 1, "Z", "L", Word, 3, R, "Z ~W_{2n+1} L^n at n=1"},
        {"word_cex", 1, "Z", "L", Word, 4, D, "Z !~W_{2n+2} L^n at n=1"},
        {"word_cex", 1, "R L", "Q", Word, 1, D, "R L^n !~W_1 Q^m, m=1"},
        {"word_cex", 1, "R L", "Q^2", Word, 1, D, "R L^n !~W_1 Q^m, m=2"},
        {"word_cex", 1, "R L", "Q^3", Word, 1, D, "R L^n !~W_1 Q^m, m=3"},
        {"word_cex", 1, "L", "R", Word, 2, D, "L^n !~W_2 R"},
        {"word_cex", 1, "R", "Z", Word, 2, D, "R !~W_2 Z"},
        {"word_cex", 1, "Z", "R L", Word, 3, D, "Z !~W_3 R L^i"},
        {"word_cex", 1, "R L", "L", Word, 3, D, "R L^i !~W_3 L^j"},
        {"word_cex", 1, "X", "Y", Word, 4, R, "X ~W_omega Y, finite shadow"},
        {"example1", 1, "X", "Y", ShortLong, 3, R, "Z A^i ~j A^j"},
        {"example1", 1, "X", "Y", Word, 1, R, "bounded search, word level 1"},
        {"example1", 1, "X", "Y", Word, 2, D, "bounded search, word level 2"},
        {"stacked_gadget", 1, "X1", "Y1", LongLong, 4, R, "X1 ~L_{omega*2} Y1, finite shadow"},
    };
    // Identity pairs are related at every level and in every regime.
    const std::array<std::pair<const char*, const char*>, 5> ident{{
        {"example1", "X Z A"}, {"example2", "Y X"}, {"word_cex", "Z L^2"},
        {"stacked_gadget", "W1 A"}, {"ladder", "X1 Y0"}}};
    for (auto [sys, c] : ident)
        for (Regime r : {ShortLong, LongLong, Parikh, Word})
            fs.push_back({sys, 1, c, c, r, 3, R, "identity"});
    return fs;
}

} // namespace bpp::corpus
