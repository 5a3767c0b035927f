#include <benchmark/benchmark.h>

#include <memory>
#include <random>

#include "kba/benchkit.hpp"
#include "kba/orchestrator.hpp"
#include "kba/semantic_cache.hpp"

using namespace kba;

namespace {

const EmbedderSpec kSpec{256, 42};

Embedding random_unit(std::mt19937_64& rng, std::size_t d) {
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> v(d);
    for (auto& c : v) c = normal(rng);
    return Embedding::normalized(std::move(v));
}

SemanticCache filled_cache(std::size_t entries) {
    SemanticCache cache(CacheConfig{0.9, std::nullopt, 0.95});
    std::mt19937_64 rng(7);
    for (std::size_t i = 0; i < entries; ++i) {
        cache.store(random_unit(rng, 256), "agent" + std::to_string(i % 7), 0.0);
    }
    return cache;
}

}  // namespace

static void BM_Embed(benchmark::State& state) {
    const std::string text =
        "how do i request a replacement badge for the east office building";
    for (auto _ : state) {
        benchmark::DoNotOptimize(embed(text, kSpec));
    }
}
BENCHMARK(BM_Embed);

static void BM_CacheFindSimilar(benchmark::State& state) {
    SemanticCache cache = filled_cache(state.range(0));
    std::mt19937_64 rng(13);
    const Embedding query = random_unit(rng, 256);
    for (auto _ : state) {
        benchmark::DoNotOptimize(cache.find_similar(query, 1.0));
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_CacheFindSimilar)->RangeMultiplier(4)->Range(64, 4096)->Complexity();

static void BM_InvalidateSphere(benchmark::State& state) {
    std::mt19937_64 rng(17);
    const Embedding centroid = random_unit(rng, 256);
    for (auto _ : state) {
        state.PauseTiming();
        SemanticCache cache = filled_cache(state.range(0));
        state.ResumeTiming();
        benchmark::DoNotOptimize(cache.invalidate_sphere({centroid, 0.9}, 1.0));
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_InvalidateSphere)->RangeMultiplier(4)->Range(64, 1024)->Complexity();

static void BM_ParallelProbe(benchmark::State& state) {
    bench::GenSpec spec;
    spec.agents = static_cast<std::size_t>(state.range(0));
    spec.docs_per_agent = 8;
    spec.questions_per_agent = 1;
    spec.overlap = 0.3;
    spec.seed = 3;
    const auto suite = bench::generate_synthetic_suite(spec);

    bench::BenchConfig cfg;
    cfg.seed = 3;
    cfg.embedder = kSpec;
    cfg.network = {0, 0, 3, 0.0};
    bench::BenchEnv env(suite.corpus, &suite.descriptions, cfg,
                        bench::RouterMode::Kba);

    auto probers = env.orchestrator().pool().probers();
    SimulatedBus& bus = env.orchestrator().bus();
    const ProbeRequest req{suite.testset.front().question, "orchestrator", 1000};
    for (auto _ : state) {
        benchmark::DoNotOptimize(bus.parallel_probe(req, probers));
    }
}
BENCHMARK(BM_ParallelProbe)->Arg(2)->Arg(7)->Arg(16);

static void BM_RouteRequestColdVsWarm(benchmark::State& state) {
    bench::GenSpec spec;
    spec.agents = 7;
    spec.docs_per_agent = 8;
    spec.questions_per_agent = 2;
    spec.overlap = 0.3;
    spec.seed = 5;
    const auto suite = bench::generate_synthetic_suite(spec);

    bench::BenchConfig cfg;
    cfg.seed = 5;
    cfg.embedder = kSpec;
    cfg.network = {0, 0, 5, 0.0};
    bench::BenchEnv env(suite.corpus, &suite.descriptions, cfg,
                        bench::RouterMode::Kba);

    std::size_t i = 0;
    double now = 0.0;
    for (auto _ : state) {
        const auto& q = suite.testset[i++ % suite.testset.size()].question;
        benchmark::DoNotOptimize(env.orchestrator().route_request(q, now += 1.0));
    }
}
BENCHMARK(BM_RouteRequestColdVsWarm);

BENCHMARK_MAIN();
