#include "doctest.h"

#include <atomic>
#include <cmath>
#include <random>
#include <thread>

#include "kba/semantic_cache.hpp"
#include "test_support.hpp"

using namespace kba;
using test::at_similarity;

TEST_SUITE("semantic_cache") {

TEST_CASE("empty cache misses") {
    SemanticCache cache;
    CHECK_FALSE(cache.find_similar(at_similarity(1.0), 0.0).has_value());
}

TEST_CASE("identity lookup hits with similarity 1.0") {
    SemanticCache cache;
    const Embedding e = at_similarity(1.0);
    cache.store(e, "hr_agent", 0.0);
    const auto hit = cache.find_similar(e, 0.0);
    REQUIRE(hit.has_value());
    CHECK(hit->payload == "hr_agent");
    CHECK(hit->similarity == doctest::Approx(1.0));
}

TEST_CASE("entries below the lookup threshold stay invisible") {
    // hand-computed dot product: [1,0] . [0.85, sqrt(1-0.85^2)] = 0.85 < 0.9
    SemanticCache cache(CacheConfig{0.90, std::nullopt, 0.95});
    cache.store(at_similarity(0.85), "it_agent", 0.0);
    CHECK_FALSE(cache.find_similar(at_similarity(1.0), 0.0).has_value());

    SemanticCache looser(CacheConfig{0.80, std::nullopt, 0.95});
    looser.store(at_similarity(0.85), "it_agent", 0.0);
    CHECK(looser.find_similar(at_similarity(1.0), 0.0).has_value());
}

TEST_CASE("find_similar never returns hits below threshold nor dead entries") {
    std::mt19937_64 rng(21);
    SemanticCache cache(CacheConfig{0.6, std::nullopt, 0.95});
    for (int i = 0; i < 64; ++i) {
        const auto ttl = (rng() % 2) ? std::optional<double>(double(rng() % 20)) : std::nullopt;
        cache.store(test::random_unit(rng, 8), "agent" + std::to_string(i % 5), 0.0, ttl);
    }
    for (int trial = 0; trial < 100; ++trial) {
        const Embedding q = test::random_unit(rng, 8);
        const double now = double(rng() % 40);
        const auto hit = cache.find_similar(q, now);
        if (!hit) continue;
        CHECK(hit->similarity >= 0.6);
        bool found_live_match = false;
        for (const auto& e : cache.entries()) {
            if (e.payload == hit->payload && e.live(now) &&
                cosine_similarity(q, e.embedding) == doctest::Approx(hit->similarity)) {
                found_live_match = true;
            }
        }
        CHECK(found_live_match);
    }
}

TEST_CASE("identical embedding store replaces payload") {
    SemanticCache cache;
    const Embedding e = at_similarity(0.95);
    cache.store(e, "first", 0.0);
    cache.store(e, "second", 1.0);
    CHECK(cache.size() == 1);
    const auto hit = cache.find_similar(e, 1.0);
    REQUIRE(hit.has_value());
    CHECK(hit->payload == "second");
}

TEST_CASE("ttl expiry with an injected clock") {
    SemanticCache cache;
    const Embedding e = at_similarity(1.0);
    cache.store(e, "hr_agent", 0.0, 10.0);
    CHECK(cache.find_similar(e, 9.9).has_value());
    CHECK_FALSE(cache.find_similar(e, 11.0).has_value());
    CHECK(cache.live_count(11.0) == 0);
    CHECK(cache.purge_expired(11.0) == 1);
    CHECK(cache.size() == 0);
}

TEST_CASE("default ttl comes from config") {
    SemanticCache cache(CacheConfig{0.9, 5.0, 0.95});
    cache.store(at_similarity(1.0), "x", 0.0);
    CHECK(cache.live_count(4.0) == 1);
    CHECK(cache.live_count(6.0) == 0);
}

TEST_CASE("lookup ties break by recency then payload") {
    SemanticCache cache(CacheConfig{0.5, std::nullopt, 0.95});
    const Embedding q = test::basis(3, 0);
    // two entries equidistant from q: cos = 1/sqrt(2) each
    cache.store(Embedding::normalized({1.0, 1.0, 0.0}), "older", 0.0);
    cache.store(Embedding::normalized({1.0, 0.0, 1.0}), "newer", 5.0);
    auto hit = cache.find_similar(q, 6.0);
    REQUIRE(hit.has_value());
    CHECK(hit->payload == "newer");

    SemanticCache same_time(CacheConfig{0.5, std::nullopt, 0.95});
    same_time.store(Embedding::normalized({1.0, 1.0, 0.0}), "bbb", 0.0);
    same_time.store(Embedding::normalized({1.0, 0.0, 1.0}), "aaa", 0.0);
    hit = same_time.find_similar(q, 1.0);
    REQUIRE(hit.has_value());
    CHECK(hit->payload == "aaa");
}

TEST_CASE("invalidation radius follows r = sqrt(2(1 - theta))") {
    CHECK(invalidation_radius(1.0) == doctest::Approx(0.0));
    CHECK(invalidation_radius(0.95) == doctest::Approx(0.316228).epsilon(1e-6));
    CHECK(invalidation_radius(0.5) == doctest::Approx(1.0));
    CHECK(invalidation_radius(-1.0) == doctest::Approx(2.0));
    CHECK_THROWS_AS(invalidation_radius(1.5), std::invalid_argument);
    CHECK_THROWS_AS(invalidation_radius(-1.01), std::invalid_argument);
    // monotone decreasing
    double prev = invalidation_radius(0.0);
    for (double theta = 0.1; theta <= 1.0; theta += 0.1) {
        const double r = invalidation_radius(theta);
        CHECK(r < prev);
        prev = r;
    }
}

TEST_CASE("invalidate_sphere removes entries at or above the threshold") {
    SemanticCache cache;
    CHECK(cache.invalidate_sphere({at_similarity(1.0), 0.9}, 0.0) == 0);

    // similarities to the centroid e1: 0.96, 0.91, 0.80
    cache.store(at_similarity(0.96), "a", 0.0);
    cache.store(at_similarity(0.91), "b", 0.0);
    cache.store(at_similarity(0.80), "c", 0.0);
    CHECK(cache.invalidate_sphere({at_similarity(1.0), 0.90}, 0.0) == 2);
    CHECK(cache.size() == 1);
    CHECK(cache.entries()[0].payload == "c");
}

TEST_CASE("theta = 1 removes only identical embeddings") {
    SemanticCache cache;
    cache.store(at_similarity(1.0), "same", 0.0);
    cache.store(at_similarity(0.9999), "near", 0.0);
    CHECK(cache.invalidate_sphere({at_similarity(1.0), 1.0}, 0.0) == 1);
    CHECK(cache.entries()[0].payload == "near");
}

TEST_CASE("invalidation threshold falls back to config") {
    SemanticCache cache(CacheConfig{0.9, std::nullopt, 0.95});
    cache.store(at_similarity(0.96), "a", 0.0);
    cache.store(at_similarity(0.90), "b", 0.0);
    CHECK(cache.invalidate_sphere({at_similarity(1.0), std::nullopt}, 0.0) == 1);
}

TEST_CASE("post-invalidation emptiness under randomized states") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        SemanticCache cache(CacheConfig{0.9, std::nullopt, 0.95});
        const std::size_t n = rng() % 32;
        for (std::size_t i = 0; i < n; ++i) {
            cache.store(test::random_unit(rng, 8), "p" + std::to_string(i), 0.0);
        }
        const Embedding centroid = test::random_unit(rng, 8);
        const double theta = 0.3 + 0.65 * (double(rng() % 100) / 100.0);
        cache.invalidate_sphere({centroid, theta}, 0.0);
        for (const auto& e : cache.entries()) {
            CHECK(cosine_similarity(centroid, e.embedding) < theta);
        }
    }
}

TEST_CASE("removed count is non-increasing in theta") {
    std::mt19937_64 rng(9);
    SemanticCache snapshot(CacheConfig{0.9, std::nullopt, 0.95});
    for (int i = 0; i < 40; ++i) {
        snapshot.store(test::random_unit(rng, 8), "p" + std::to_string(i), 0.0);
    }
    const Embedding centroid = test::random_unit(rng, 8);
    std::size_t prev = snapshot.size() + 1;
    for (double theta : {0.3, 0.5, 0.7, 0.9, 1.0}) {
        SemanticCache copy = snapshot;  // same snapshot per threshold
        const std::size_t removed = copy.invalidate_sphere({centroid, theta}, 0.0);
        CHECK(removed <= prev);
        prev = removed;
    }
}

TEST_CASE("euclidean ball membership agrees with cosine threshold") {
    std::mt19937_64 rng(13);
    for (double theta : {0.5, 0.8, 0.9, 0.95, 1.0}) {
        const double radius = invalidation_radius(theta);
        for (int i = 0; i < 400; ++i) {
            const Embedding c = test::random_unit(rng, 12);
            const Embedding x = test::random_unit(rng, 12);
            const bool in_ball = test::euclidean_distance(c, x) <= radius;
            const bool in_cap = cosine_similarity(c, x) >= theta;
            if (std::abs(cosine_similarity(c, x) - theta) > 1e-9) {
                CHECK(in_ball == in_cap);
            }
        }
    }
}

TEST_CASE("adapt_threshold holds inside the dead-band") {
    const auto policy = ThresholdPolicy::general();
    CHECK(adapt_threshold(0.0, 0.0, 0.82, policy) == doctest::Approx(0.82));
    CHECK(adapt_threshold(0.01, 0.0, 0.82, policy) == doctest::Approx(0.82));
}

TEST_CASE("profile bands match the guidance values") {
    CHECK(ThresholdPolicy::general().floor == doctest::Approx(0.80));
    CHECK(ThresholdPolicy::general().ceiling == doctest::Approx(0.85));
    CHECK(ThresholdPolicy::precision_critical().floor == doctest::Approx(0.90));
    CHECK(ThresholdPolicy::precision_critical().ceiling == doctest::Approx(0.95));
}

TEST_CASE("adapt_threshold moves against the dominant error and clamps") {
    const auto policy = ThresholdPolicy::precision_critical();
    CHECK(adapt_threshold(0.2, 0.0, 0.92, policy) == doctest::Approx(0.93));
    CHECK(adapt_threshold(0.0, 0.2, 0.92, policy) == doctest::Approx(0.91));
    CHECK(adapt_threshold(0.5, 0.0, 0.95, policy) == doctest::Approx(0.95));
    CHECK(adapt_threshold(0.0, 0.5, 0.90, policy) == doctest::Approx(0.90));
    CHECK_THROWS_AS(adapt_threshold(1.5, 0.0, 0.9, policy), std::invalid_argument);
}

TEST_CASE("adapt_threshold output always lies inside the band") {
    std::mt19937_64 rng(31);
    const auto policy = ThresholdPolicy::general();
    for (int i = 0; i < 200; ++i) {
        const double fp = double(rng() % 101) / 100.0;
        const double fn = double(rng() % 101) / 100.0;
        const double current = double(rng() % 101) / 100.0;
        const double next = adapt_threshold(fp, fn, current, policy);
        CHECK(next >= policy.floor);
        CHECK(next <= policy.ceiling);
    }
}

TEST_CASE("jsonl export/import round-trips entries") {
    SemanticCache cache(CacheConfig{0.8, std::nullopt, 0.95});
    cache.store(at_similarity(1.0), "hr_agent", 1.5, 30.0);
    cache.store(at_similarity(0.9), "it_agent", 2.5);
    const std::string snapshot = cache.export_jsonl();

    const SemanticCache restored =
        SemanticCache::import_jsonl(snapshot, CacheConfig{0.8, std::nullopt, 0.95});
    REQUIRE(restored.size() == 2);
    const auto entries = restored.entries();
    CHECK(entries[0].payload == "hr_agent");
    CHECK(entries[0].stored_at == doctest::Approx(1.5));
    REQUIRE(entries[0].ttl.has_value());
    CHECK(*entries[0].ttl == doctest::Approx(30.0));
    CHECK_FALSE(entries[1].ttl.has_value());
    CHECK(SemanticCache::import_jsonl("", {}).size() == 0);
    CHECK_THROWS(SemanticCache::import_jsonl("{not json", {}));
}

TEST_CASE("concurrent readers with a serialized invalidator stay consistent") {
    SemanticCache cache(CacheConfig{0.5, std::nullopt, 0.95});
    std::mt19937_64 rng(17);
    for (int i = 0; i < 128; ++i) {
        cache.store(test::random_unit(rng, 8), "p" + std::to_string(i), 0.0);
    }
    std::atomic<int> violations{0};
    std::vector<std::thread> workers;
    for (int t = 0; t < 4; ++t) {
        workers.emplace_back([&, t] {
            std::mt19937_64 local(100 + t);
            for (int i = 0; i < 500; ++i) {
                const auto hit = cache.find_similar(test::random_unit(local, 8), 0.0);
                if (hit && hit->similarity < 0.5) violations.fetch_add(1);
            }
        });
    }
    workers.emplace_back([&] {
        std::mt19937_64 inv_rng(55);
        for (int i = 0; i < 25; ++i) {
            cache.invalidate_sphere({test::random_unit(inv_rng, 8), 0.8}, 0.0);
            cache.store(test::random_unit(inv_rng, 8), "r" + std::to_string(i), 0.0);
        }
    });
    for (auto& t : workers) t.join();
    CHECK(violations.load() == 0);
}

TEST_CASE("config validation") {
    CHECK_THROWS_AS(SemanticCache(CacheConfig{0.0, std::nullopt, 0.95}),
                    std::invalid_argument);
    CHECK_THROWS_AS(SemanticCache(CacheConfig{0.9, std::nullopt, 1.0001}),
                    std::invalid_argument);
}

}  // TEST_SUITE
