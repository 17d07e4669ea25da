#include <doctest.h>

#include <functional>
#include <random>
#include <set>

#include "bpp/approx.hpp"
#include "bpp/corpus.hpp"
#include "oracles.hpp"

using namespace bpp;
using pa::Formula;

namespace {

Configuration P(const ProcessDescription& d, const char* s) { return parse_process(s, d); }

const char* kSmall = "vars A B C\nact a\nA a -> 0\nB tau -> B C\nC a -> B\n";

// Naive game for the single-letter regimes: no memo, moves from scratch.
// Spoiler's closures are bounded by S and K, Duplicator's by K alone; the
// size cap never binds below the starting size.
struct NaiveGame {
    const ProcessDescription& d;
    bool strong;
    StepCaps caps;

    std::set<Configuration> closure(const Configuration& c, std::uint32_t budget, std::uint32_t cap) const {
        std::set<Configuration> seen{c};
        std::vector<std::pair<Configuration, std::uint32_t>> todo{{c, 0}};
        std::map<Configuration, std::uint32_t> best{{c, 0}};
        while (!todo.empty()) {
            auto [x, used] = todo.back();
            todo.pop_back();
            if (used == budget) continue;
            for (const auto& r : d.rules()) {
                if (!r.action.silent() || x.count(r.lhs) == 0) continue;
                auto y = apply_rule(r, x);
                if (y.size() > cap) continue;
                auto it = best.find(y);
                if (it != best.end() && it->second <= used + 1) continue;
                best[y] = used + 1;
                seen.insert(y);
                todo.push_back({y, used + 1});
            }
        }
        return seen;
    }

    // tau* a tau*, or tau+ for the silent letter, with the budget shared.
    std::set<Configuration> weak(const Configuration& c, ActionId a, std::uint32_t budget) const {
        const std::uint32_t cap = std::max<std::uint32_t>(caps.size_cap, c.size());
        std::set<Configuration> out;
        std::function<void(const Configuration&, std::uint32_t, bool)> go = [&](const Configuration& x,
                                                                                 std::uint32_t used, bool done) {
            if (done) out.insert(x);
            for (const auto& r : d.rules()) {
                if (x.count(r.lhs) == 0) continue;
                auto y = apply_rule(r, x);
                if (y.size() > cap) continue;
                if (r.action.silent()) {
                    if (used < budget) go(y, used + 1, done || a.silent());
                } else if (!done && r.action == a) {
                    go(y, used, true);
                }
            }
        };
        if (budget == kUnbudgeted) {
            // Unbounded silent steps: close over the finite capped space.
            for (const auto& x : closure(c, kUnbudgeted, cap)) {
                if (a.silent()) {
                    out.insert(x);
                    continue;
                }
                for (const auto& r : d.rules())
                    if (r.action == a && x.count(r.lhs) > 0) {
                        auto y = apply_rule(r, x);
                        if (y.size() <= cap)
                            for (const auto& z : closure(y, kUnbudgeted, cap)) out.insert(z);
                    }
            }
            return out;
        }
        go(c, 0, false);
        return out;
    }

    std::vector<std::pair<ActionId, Configuration>> spoiler(const Configuration& c) const {
        std::vector<std::pair<ActionId, Configuration>> ms;
        if (strong) {
            for (const auto& r : d.rules())
                if (c.count(r.lhs) > 0) ms.push_back({r.action, apply_rule(r, c)});
        } else {
            for (std::uint32_t a = 0; a < d.action_count(); ++a)
                for (const auto& t : weak(c, ActionId{a}, caps.silent_budget)) ms.push_back({ActionId{a}, t});
        }
        return ms;
    }

    bool dist(const Configuration& a, const Configuration& b, unsigned n) const {
        if (n == 0) return false;
        for (int side = 0; side < 2; ++side) {
            const auto& me = side == 0 ? a : b;
            const auto& you = side == 0 ? b : a;
            for (const auto& [act, t] : spoiler(me)) {
                bool all = true;
                auto rs = weak(you, act, kUnbudgeted);
                if (act.silent()) rs.insert(you);
                for (const auto& r : rs)
                    if (!(side == 0 ? dist(t, r, n - 1) : dist(r, t, n - 1))) {
                        all = false;
                        break;
                    }
                if (all) return true;
            }
        }
        return false;
    }
};

bool replay(const ProcessDescription& d, Regime g, const StepCaps& caps, const StrategyNode& node,
            const Configuration& a, const Configuration& b) {
    const auto& m = node.move;
    const auto& me = m.side == Side::Left ? a : b;
    const auto& you = m.side == Side::Left ? b : a;
    auto legal = spoiler_moves(d, me, g, caps, m.side);
    if (std::find(legal.begin(), legal.end(), m) == legal.end()) return false;
    auto rs = duplicator_responses(d, you, m, g, caps);
    if (rs.size() != node.responses.size()) return false;
    if (node.level == 1) return rs.empty();
    for (const auto& r : rs) {
        auto it = std::find_if(node.responses.begin(), node.responses.end(),
                               [&](const auto& p) { return p.first == r; });
        if (it == node.responses.end() || !it->second || it->second->level >= node.level) return false;
        bool ok = m.side == Side::Left ? replay(d, g, caps, *it->second, m.target, r)
                                       : replay(d, g, caps, *it->second, r, m.target);
        if (!ok) return false;
    }
    return true;
}

std::vector<Configuration> small_configs(const ProcessDescription& d, std::size_t k) {
    return configurations_up_to(d.variable_count(), k);
}

constexpr std::array kRegimes{Regime::ShortLong, Regime::LongLong, Regime::Parikh, Regime::Word};

} // namespace

TEST_CASE("regime and backend names") {
    for (Regime r : kRegimes) CHECK(parse_regime(to_string(r)) == r);
    CHECK(parse_regime("sl") == Regime::ShortLong);
    CHECK(parse_regime("ll") == Regime::LongLong);
    CHECK(parse_regime("p") == Regime::Parikh);
    CHECK_FALSE(parse_regime("strong"));
    CHECK(parse_backend("symbolic") == Backend::Symbolic);
    CHECK_FALSE(parse_backend("exact"));
}

TEST_CASE("spoiler moves") {
    auto d = parse_description(oracle::kExample1);
    auto ms = spoiler_moves(d, P(d, "X"), Regime::ShortLong, {});
    REQUIRE(ms.size() == 2);
    // Visible first.
    CHECK(ms[0] == Move{Side::Left, {*d.find_action("b")}, P(d, "Z")});
    CHECK(ms[1] == Move{Side::Left, {kSilent}, P(d, "Y")});
    for (Regime g : kRegimes) CHECK(spoiler_moves(d, Configuration{}, g, {}).empty());

    auto w = spoiler_moves(d, P(d, "X"), Regime::Word, StepCaps{2, 8, 3});
    Move ba{Side::Left, {*d.find_action("b"), *d.find_action("a")}, P(d, "Z")};
    CHECK(std::find(w.begin(), w.end(), ba) != w.end());
    // The silent stay is never offered.
    for (Regime g : kRegimes)
        for (const auto& m : spoiler_moves(d, P(d, "Y A"), g, {}))
            CHECK_FALSE((m.target == P(d, "Y A") &&
                         std::all_of(m.label.begin(), m.label.end(), [](ActionId a) { return a.silent(); })));
}

TEST_CASE("duplicator responses") {
    auto d = parse_description(oracle::kExample1);
    const auto b = *d.find_action("b"), a = *d.find_action("a");
    // Y can pile up A's before b; the size cap K = 3 stops at two.
    auto rs = duplicator_responses(d, P(d, "Y"), Move{Side::Left, {b}, {}}, Regime::LongLong, StepCaps{2, 3, 4});
    CHECK(rs == std::vector<Configuration>{P(d, "0"), P(d, "A"), P(d, "A^2")});
    for (Regime g : kRegimes) {
        Move stay{Side::Left, g == Regime::Word || g == Regime::Parikh ? std::vector<ActionId>{}
                                                                       : std::vector<ActionId>{kSilent},
                  {}};
        auto s = duplicator_responses(d, P(d, "Z A"), stay, g, {});
        CHECK(std::find(s.begin(), s.end(), P(d, "Z A")) != s.end());
    }
    auto p = duplicator_responses(d, P(d, "A^2"), Move{Side::Left, {a, a}, {}}, Regime::Parikh, {});
    CHECK(p == std::vector<Configuration>{P(d, "0")});
}

TEST_CASE("example 2 level-1 table") {
    auto d = parse_description(oracle::kExample2);
    auto X = P(d, "X"), Y = P(d, "Y"), Z = P(d, "Z");
    for (Backend be : {Backend::Bounded, Backend::Symbolic}) {
        CHECK(check_level(d, X, Y, Regime::ShortLong, 1, be).outcome == Outcome::Related);
        CHECK(check_level(d, Y, Z, Regime::ShortLong, 1, be).outcome == Outcome::Related);
        CHECK(check_level(d, X, Z, Regime::ShortLong, 1, be).outcome == Outcome::Distinguished);
    }
    auto v = distinguishing_level(d, X, Z, Regime::ShortLong, {}, 4);
    CHECK(v.outcome == Outcome::Distinguished);
    CHECK(v.level == 1);
    CHECK(v.caps_relative);
    REQUIRE(v.strategy);
    CHECK(v.strategy->responses.empty());
}

TEST_CASE("level zero and identical pairs are related") {
    auto d = parse_description(oracle::kWordCex);
    for (Regime g : kRegimes) {
        CHECK(check_level(d, P(d, "Z"), P(d, "R"), g, 0).outcome == Outcome::Related);
        auto v = distinguishing_level(d, P(d, "Z L"), P(d, "Z L"), g, {}, 3);
        CHECK(v.outcome == Outcome::Related);
        CHECK(v.level == 3);
    }
}

TEST_CASE("symbolic verdicts are not caps-relative") {
    auto d = parse_description(oracle::kExample2);
    auto v = check_level(d, P(d, "X"), P(d, "Z"), Regime::ShortLong, 1, Backend::Symbolic);
    CHECK_FALSE(v.caps_relative);
    CHECK(v.backend == Backend::Symbolic);
    CHECK_THROWS_AS(check_level(d, P(d, "X"), P(d, "Z"), Regime::Word, 1, Backend::Symbolic), Error);
    CHECK_THROWS_AS(approximant_formula(d, Regime::Word, 1), Error);
}

TEST_CASE("solver agrees with a naive game") {
    const StepCaps caps{2, 4, 2};
    for (const char* src : {oracle::kExample1, oracle::kExample2, kSmall}) {
        auto d = parse_description(src);
        auto cs = small_configs(d, 2);
        for (bool strong : {true, false}) {
            NaiveGame ng{d, strong, caps};
            Solver s(d, strong ? Regime::ShortLong : Regime::LongLong, caps);
            for (std::size_t i = 0; i < cs.size(); ++i)
                for (std::size_t j = i + 1; j < cs.size(); ++j)
                    for (unsigned n = 1; n <= 2; ++n) {
                        CAPTURE(render(d, cs[i]));
                        CAPTURE(render(d, cs[j]));
                        CAPTURE(n);
                        CHECK(s.distinguished(cs[i], cs[j], n) == ng.dist(cs[i], cs[j], n));
                    }
        }
    }
}

TEST_CASE("parallel root agrees with the serial solver") {
    auto d = parse_description(oracle::kWordCex);
    auto cs = small_configs(d, 2);
    for (Regime g : {Regime::LongLong, Regime::Word}) {
        Solver ser(d, g, {}), par(d, g, {}, true);
        for (std::size_t i = 0; i < cs.size(); i += 3)
            for (std::size_t j = i + 1; j < cs.size(); j += 2)
                CHECK(ser.distinguished(cs[i], cs[j], 3) == par.distinguished(cs[i], cs[j], 3));
    }
}

TEST_CASE("level monotonicity") {
    for (const char* src : {oracle::kExample1, oracle::kWordCex}) {
        auto d = parse_description(src);
        auto cs = small_configs(d, 2);
        for (Regime g : kRegimes) {
            Solver s(d, g, {});
            for (std::size_t i = 0; i < cs.size(); ++i)
                for (std::size_t j = i + 1; j < cs.size(); j += 3)
                    for (unsigned n = 1; n < 3; ++n)
                        if (s.distinguished(cs[i], cs[j], n)) CHECK(s.distinguished(cs[i], cs[j], n + 1));
        }
    }
}

TEST_CASE("regime chain on corpus systems") {
    // Distinguished in a weaker regime implies distinguished in the stronger
    // ones at the same level.
    for (const char* name : {"example1", "example1_extended", "example2", "word_cex"}) {
        auto d = corpus::build(name);
        auto cs = small_configs(d, 2);
        std::vector<std::unique_ptr<Solver>> ss;
        for (Regime g : kRegimes) ss.push_back(std::make_unique<Solver>(d, g, StepCaps{}));
        for (std::size_t i = 0; i < cs.size(); ++i)
            for (std::size_t j = i + 1; j < cs.size(); ++j)
                for (unsigned n = 1; n <= 3; ++n)
                    for (std::size_t k = 0; k + 1 < ss.size(); ++k)
                        if (ss[k]->distinguished(cs[i], cs[j], n)) {
                            CAPTURE(name);
                            CAPTURE(render(d, cs[i]));
                            CAPTURE(render(d, cs[j]));
                            CAPTURE(k);
                            CHECK(ss[k + 1]->distinguished(cs[i], cs[j], n));
                        }
    }
}

TEST_CASE("short-long transitivity fails on example 2, long-long holds") {
    auto d = parse_description(oracle::kExample2);
    auto X = P(d, "X"), Y = P(d, "Y"), Z = P(d, "Z");
    Solver sl(d, Regime::ShortLong, {});
    CHECK_FALSE(sl.distinguished(X, Y, 1));
    CHECK_FALSE(sl.distinguished(Y, Z, 1));
    CHECK(sl.distinguished(X, Z, 1));
    // Weak regimes are equivalences at each level on sampled triples.
    auto cs = small_configs(d, 2);
    for (Regime g : {Regime::LongLong, Regime::Parikh, Regime::Word}) {
        Solver s(d, g, {});
        for (unsigned n = 1; n <= 2; ++n)
            for (const auto& a : cs)
                for (const auto& b : cs) {
                    if (s.distinguished(a, b, n)) continue;
                    CHECK_FALSE(s.distinguished(b, a, n));
                    for (const auto& c : cs)
                        if (!s.distinguished(b, c, n)) CHECK_FALSE(s.distinguished(a, c, n));
                }
    }
}

TEST_CASE("congruence") {
    std::mt19937 rng(7);
    for (const char* name : {"example1", "example2", "word_cex"}) {
        auto d = corpus::build(name);
        auto cs = small_configs(d, 2);
        std::uniform_int_distribution<std::size_t> pick(0, cs.size() - 1);
        for (Regime g : {Regime::LongLong, Regime::Parikh, Regime::Word}) {
            Solver s(d, g, {});
            for (int t = 0; t < 30; ++t) {
                auto a = cs[pick(rng)], b = cs[pick(rng)], c = cs[pick(rng)];
                for (unsigned n = 1; n <= 2; ++n)
                    if (!s.distinguished(a, b, n)) {
                        CAPTURE(name);
                        CAPTURE(render(d, a));
                        CAPTURE(render(d, b));
                        CAPTURE(render(d, c));
                        CHECK_FALSE(s.distinguished(a + c, b + c, n));
                    }
            }
        }
    }
}

TEST_CASE("unequal finite norms are told apart by parikh in two rounds") {
    for (const char* src : {oracle::kExample1, oracle::kExample2}) {
        auto d = parse_description(src);
        auto cs = small_configs(d, 2);
        Solver s(d, Regime::Parikh, {});
        for (const auto& a : cs)
            for (const auto& b : cs) {
                auto na = norm(d, a), nb = norm(d, b);
                if (na.is_infinite() || nb.is_infinite() || na == nb) continue;
                CHECK(s.distinguished(a, b, 2));
            }
    }
}

TEST_CASE("strategies replay against the response sets") {
    struct Case {
        const char* src;
        const char *a, *b;
        Regime g;
        unsigned n;
    };
    for (const auto& c : {Case{oracle::kExample2, "X", "Z", Regime::ShortLong, 1},
                          Case{oracle::kExample1, "X", "Y", Regime::Word, 3},
                          Case{oracle::kWordCex, "L", "R", Regime::Word, 2},
                          Case{oracle::kWordCex, "R L", "L", Regime::Word, 3},
                          Case{oracle::kWordCex, "Z", "R", Regime::Parikh, 3}}) {
        auto d = parse_description(c.src);
        auto a = P(d, c.a), b = P(d, c.b);
        auto v = check_level(d, a, b, c.g, c.n);
        REQUIRE(v.outcome == Outcome::Distinguished);
        REQUIRE(v.strategy);
        CHECK(v.strategy->level <= c.n);
        CHECK(replay(d, c.g, v.caps, *v.strategy, a, b));
    }
}

TEST_CASE("word-regime fixtures at the default caps") {
    auto d = parse_description(oracle::kWordCex);
    auto lvl = [&](const char* a, const char* b) {
        auto v = distinguishing_level(d, P(d, a), P(d, b), Regime::Word, {}, 6);
        return v.outcome == Outcome::Distinguished ? v.level : 0;
    };
    CHECK(lvl("R L", "Q") == 1);
    CHECK(lvl("R L", "Q^3") == 1);
    CHECK(lvl("L", "R") == 2);
    CHECK(lvl("R", "Z") == 2);
    CHECK(lvl("R L", "L") == 3);
    auto e1 = parse_description(oracle::kExample1);
    auto v = distinguishing_level(e1, P(e1, "X"), P(e1, "Y"), Regime::Word, {}, 4);
    CHECK(v.outcome == Outcome::Distinguished);
    CHECK(v.level == 2);
}

TEST_CASE("stability reruns") {
    auto d = parse_description(oracle::kExample2);
    auto v = check_level(d, P(d, "X"), P(d, "Z"), Regime::ShortLong, 1, Backend::Bounded, {}, {.stability = true});
    REQUIRE(v.stable);
    CHECK(*v.stable);
    auto w = check_level(d, P(d, "X"), P(d, "Z"), Regime::ShortLong, 1);
    CHECK_FALSE(w.stable);
}

TEST_CASE("approximant formulas") {
    auto one = parse_description("vars A\nact a\nA a -> 0\n");
    CHECK(approximant_formula(one, Regime::ShortLong, 0).is_true());
    CHECK_FALSE(symbolic_related(one, P(one, "A"), P(one, "0"), Regime::ShortLong, 1));
    CHECK(symbolic_related(one, P(one, "A"), P(one, "A"), Regime::ShortLong, 1));
    auto psi = approximant_formula(one, Regime::ShortLong, 1);
    CHECK(psi.is_quantifier_free());
    auto rv = reach_variables(one);
    CHECK_FALSE(pa::evaluate(psi, {{rv.alpha[0], 1}, {rv.beta[0], 0}}));
    CHECK(pa::evaluate(psi, {{rv.alpha[0], 2}, {rv.beta[0], 2}}));
}

TEST_CASE("quantifier-free and raw formulas agree") {
    auto d = parse_description(kSmall);
    auto rv = reach_variables(d);
    auto cs = small_configs(d, 2);
    for (Regime g : {Regime::ShortLong, Regime::LongLong}) {
        auto qf = approximant_formula(d, g, 2);
        auto raw = approximant_formula_raw(d, g, 2);
        CHECK_FALSE(raw.is_quantifier_free());
        for (const auto& a : cs)
            for (const auto& b : cs) {
                std::map<pa::Var, pa::Term> at;
                pa::Assignment g0;
                for (std::uint32_t v = 0; v < d.variable_count(); ++v) {
                    at[rv.alpha[v]] = static_cast<std::int64_t>(a.count(VariableId{v}));
                    at[rv.beta[v]] = static_cast<std::int64_t>(b.count(VariableId{v}));
                    g0[rv.alpha[v]] = a.count(VariableId{v});
                    g0[rv.beta[v]] = b.count(VariableId{v});
                }
                CHECK(pa::evaluate(qf, g0) == pa::decide(pa::substitute(raw, at)));
            }
    }
}

TEST_CASE("symbolic and bounded backends agree on small systems") {
    // Generous caps; any disagreement must come with recorded pruning.
    const StepCaps caps{6, 8, 4};
    for (const char* src : {kSmall, "vars A B\nact a b\nA a -> B\nB tau -> 0\nB b -> A\n",
                            "vars P Q\nact a\nP tau -> Q\nQ a -> P Q\nP a -> 0\n"}) {
        auto d = parse_description(src);
        auto cs = small_configs(d, 2);
        for (Regime g : {Regime::ShortLong, Regime::LongLong}) {
            for (unsigned n = 1; n <= 2; ++n)
                for (std::size_t i = 0; i < cs.size(); ++i)
                    for (std::size_t j = i; j < cs.size(); ++j) {
                        auto bv = check_level(d, cs[i], cs[j], g, n, Backend::Bounded, caps);
                        bool sym = symbolic_related(d, cs[i], cs[j], g, n);
                        if ((bv.outcome == Outcome::Related) != sym) {
                            CAPTURE(render(d, cs[i]));
                            CAPTURE(render(d, cs[j]));
                            CHECK((bv.spoiler_pruned || bv.duplicator_pruned));
                        }
                    }
        }
    }
}

TEST_CASE("candidate bisimulations") {
    auto d = parse_description(oracle::kExample1);
    auto rv = reach_variables(d);
    CHECK(check_candidate_bisimulation(d, identity_relation(d)));
    CHECK_FALSE(check_candidate_bisimulation(d, Formula::truth()));
    // {(Z A^i, Z A^j)} plus the identity.
    std::vector<Formula> za;
    const auto Z = d.find_variable("Z")->index, A = d.find_variable("A")->index;
    for (std::uint32_t v = 0; v < d.variable_count(); ++v) {
        if (v == A) continue;
        za.push_back(Formula::eq(rv.alpha[v], v == Z ? 1 : 0));
        za.push_back(Formula::eq(rv.beta[v], v == Z ? 1 : 0));
    }
    auto r = Formula::disj({identity_relation(d), Formula::conj(za)});
    CHECK(check_candidate_bisimulation(d, r));
    // Dropping the symmetric half of a pair breaks symmetry.
    auto one_way = Formula::disj({identity_relation(d), Formula::conj({Formula::eq(rv.alpha[Z], 1),
                                                                        Formula::eq(rv.beta[A], 1)})});
    CHECK_FALSE(check_candidate_bisimulation(d, one_way));
}
