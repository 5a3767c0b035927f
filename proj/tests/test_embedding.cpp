#include "doctest.h"

#include <random>
#include <string>
#include <vector>

#include "kba/embedding.hpp"
#include "test_support.hpp"

using namespace kba;

namespace {
const EmbedderSpec kSpec{256, 42};
}

TEST_SUITE("embedding") {

TEST_CASE("tokenize lowercases and splits on non-alphanumerics") {
    CHECK(tokenize("Badge  ACCESS ") == std::vector<std::string>{"badge", "access"});
    CHECK(tokenize("badge access") == std::vector<std::string>{"badge", "access"});
    CHECK(tokenize("") == std::vector<std::string>{});
    CHECK(tokenize("a1-b2_c3") == std::vector<std::string>{"a1", "b2", "c3"});
}

TEST_CASE("empty text maps to the canonical basis vector") {
    const Embedding e = embed("", kSpec);
    REQUIRE(e.dimension() == kSpec.dimension);
    CHECK(e.components()[0] == doctest::Approx(1.0));
    for (std::size_t i = 1; i < e.dimension(); ++i) {
        CHECK(e.components()[i] == 0.0);
    }
    CHECK(embed("!!! --- !!!", kSpec) == e);
}

TEST_CASE("embed is deterministic and normalization-insensitive") {
    CHECK(embed("badge access", kSpec) == embed("badge access", kSpec));
    // token-normalization rule applied by hand: both normalize to
    // ["badge", "access"], so the vectors must be identical
    CHECK(embed("badge access", kSpec) == embed("Badge  ACCESS ", kSpec));
}

TEST_CASE("embed is referentially transparent over random strings") {
    std::mt19937_64 rng(7);
    const std::string charset = "abcdefghij KLMNOP.?-0123";
    for (int i = 0; i < 200; ++i) {
        std::string text;
        const std::size_t len = rng() % 40;
        for (std::size_t k = 0; k < len; ++k) text += charset[rng() % charset.size()];
        const Embedding a = embed(text, kSpec);
        const Embedding b = embed(text, kSpec);
        REQUIRE(a == b);  // byte-equal components
        CHECK(cosine_similarity(a, a) == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("embeddings are unit-norm within 1e-9") {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 100; ++i) {
        std::string text = "w" + std::to_string(rng() % 1000) + " x" +
                           std::to_string(rng() % 1000);
        const Embedding e = embed(text, kSpec);
        double norm_sq = 0.0;
        for (double c : e.components()) norm_sq += c * c;
        CHECK(std::abs(std::sqrt(norm_sq) - 1.0) < 1e-9);
    }
}

TEST_CASE("different seeds change the embedding") {
    const EmbedderSpec other{256, 43};
    CHECK(embed("badge access", kSpec) != embed("badge access", other));
}

TEST_CASE("dimension below 2 is rejected") {
    CHECK_THROWS_AS(embed("x", EmbedderSpec{1, 0}), std::invalid_argument);
}

TEST_CASE("cosine similarity basics") {
    const Embedding ex = Embedding::normalized({1.0, 0.0});
    const Embedding ey = Embedding::normalized({0.0, 1.0});
    CHECK(cosine_similarity(ex, ex) == doctest::Approx(1.0));
    CHECK(cosine_similarity(ex, ey) == doctest::Approx(0.0));

    // hand dot product: 0.6*0.8 + 0.8*0.6 = 0.96
    const Embedding a = Embedding::normalized({0.6, 0.8});
    const Embedding b = Embedding::normalized({0.8, 0.6});
    CHECK(cosine_similarity(a, b) == doctest::Approx(0.96).epsilon(1e-12));
    CHECK(cosine_similarity(b, a) == doctest::Approx(0.96).epsilon(1e-12));
}

TEST_CASE("cosine similarity rejects dimension mismatch") {
    const Embedding a = Embedding::normalized({1.0, 0.0});
    const Embedding b = Embedding::normalized({1.0, 0.0, 0.0});
    CHECK_THROWS_AS(cosine_similarity(a, b), std::invalid_argument);
}

TEST_CASE("squared distance identity: ||a-b||^2 = 2(1 - cos)") {
    std::mt19937_64 rng(3);
    for (int i = 0; i < 500; ++i) {
        const Embedding a = test::random_unit(rng, 16);
        const Embedding b = test::random_unit(rng, 16);
        const double d = test::euclidean_distance(a, b);
        const double cos = cosine_similarity(a, b);
        CHECK(std::abs(d * d - 2.0 * (1.0 - cos)) < 1e-9);
    }
}

TEST_CASE("embedder spec JSON round-trip") {
    const EmbedderSpec spec{128, 99};
    const EmbedderSpec parsed = embedder_spec_from_json(to_json(spec));
    CHECK(parsed == spec);
    CHECK_THROWS(embedder_spec_from_json("{\"dimension\": 1, \"seed\": 0}"));
}

TEST_CASE("normalized of all-zero input falls back to e1") {
    const Embedding z = Embedding::normalized({0.0, 0.0, 0.0});
    CHECK(z.components()[0] == 1.0);
    CHECK(z.components()[1] == 0.0);
}

}  // TEST_SUITE
