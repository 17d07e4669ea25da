// Serial vs OpenMP: the solver's root fan-out and batch formula evaluation.
// Run with OMP_NUM_THREADS set to compare thread counts.

#include <benchmark/benchmark.h>

#include "bpp/corpus.hpp"

using namespace bpp;

namespace {

struct Game {
    const char* system;
    const char* left;
    const char* right;
    Regime regime;
    unsigned level;
};

constexpr Game kGames[] = {
    {"word_cex", "Z", "L", Regime::Word, 4},
    {"stacked_gadget", "X1", "Y1", Regime::LongLong, 3},
    {"ladder", "X1", "Y1", Regime::LongLong, 4},
};

void solver_root(benchmark::State& st) {
    const auto& g = kGames[st.range(0)];
    const bool parallel = st.range(1) != 0;
    auto d = corpus::build(g.system);
    auto a = parse_process(g.left, d), b = parse_process(g.right, d);
    st.SetLabel(std::string(g.system) + (parallel ? " parallel" : " serial"));
    for (auto _ : st) {
        Solver s(d, g.regime, {}, parallel);
        benchmark::DoNotOptimize(s.distinguished(a, b, g.level));
    }
}

void batch_evaluate(benchmark::State& st) {
    const bool parallel = st.range(0) != 0;
    auto d = corpus::build("word_cex");
    auto rv = reach_variables(d);
    auto alpha = parse_process("Z L R", d);
    std::map<pa::Var, pa::Term> sub;
    for (std::uint32_t v = 0; v < d.variable_count(); ++v) sub[rv.alpha[v]] = pa::Term(alpha.count(VariableId{v}));
    for (std::uint32_t x = 0; x < d.action_count(); ++x) sub[rv.mu[x]] = pa::Term(2);
    auto reach = pa::eliminate_quantifiers(pa::substitute(reach_formula(d), sub));
    std::vector<pa::Assignment> points;
    for (const auto& b : configurations_up_to(d.variable_count(), 8)) {
        pa::Assignment g;
        for (std::uint32_t v = 0; v < d.variable_count(); ++v) g[rv.beta[v]] = b.count(VariableId{v});
        points.push_back(std::move(g));
    }
    st.SetLabel(parallel ? "parallel" : "serial");
    for (auto _ : st) benchmark::DoNotOptimize(pa::evaluate_batch(reach, points, parallel));
    st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(points.size()));
}

} // namespace

BENCHMARK(solver_root)->ArgsProduct({{0, 1, 2}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(batch_evaluate)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
