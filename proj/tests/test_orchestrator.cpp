#include "doctest.h"

#include <memory>

#include "kba/orchestrator.hpp"
#include "test_support.hpp"

using namespace kba;
using test::FixedClassifier;
using test::ScriptedProber;

namespace {

const EmbedderSpec kSpec{256, 42};

std::vector<AgentCard> cards3() {
    return {
        {"finance_agent", "invoices expenses reimbursement budget", {}},
        {"hr_agent", "vacation leave benefits payroll", {}},
        {"it_agent", "laptop network password vpn", {}},
    };
}

struct Fixture {
    std::vector<std::unique_ptr<ScriptedProber>> probers;
    AgentPool pool;

    Fixture(std::vector<std::pair<std::string, ProbeResponse>> scripts) {
        for (auto& [description, response] : scripts) {
            probers.push_back(std::make_unique<ScriptedProber>(
                response.agent_id, response.verdict, response.confidence));
            pool.add({response.agent_id, description, {}}, probers.back().get());
        }
    }
};

Orchestrator make_orchestrator(Fixture& fx, std::map<std::string, double> scores,
                               RouterConfig cfg = {},
                               InteractiveChooser chooser = nullptr) {
    return Orchestrator(std::move(fx.pool), cfg, kSpec,
                        std::make_shared<FixedClassifier>(std::move(scores)),
                        NetworkModel{0, 0, 1, 0.0}, std::move(chooser));
}

}  // namespace

TEST_SUITE("classifier") {

TEST_CASE("disjoint vocabulary scores 1.0 on the only matching card") {
    const LexicalOverlapClassifier clf;
    const auto cards = cards3();
    const ConfidenceReport report =
        classify("vacation leave payroll", cards, 0.7, clf);
    CHECK(report.scores.at("hr_agent") == doctest::Approx(1.0));
    CHECK(report.scores.at("finance_agent") == doctest::Approx(0.0));
    CHECK(report.scores.at("it_agent") == doctest::Approx(0.0));
    CHECK(report.best == "hr_agent");
    CHECK_FALSE(report.use_probing);

    // 1.0 < tau is false even at tau = 1
    CHECK_FALSE(classify("vacation leave payroll", cards, 1.0, clf).use_probing);
}

TEST_CASE("no lexical overlap scores zero everywhere and escalates") {
    const LexicalOverlapClassifier clf;
    const ConfidenceReport report =
        classify("quantum beekeeping certificate", cards3(), 0.7, clf);
    for (const auto& [id, score] : report.scores) {
        CHECK(score == doctest::Approx(0.0));
    }
    CHECK(report.use_probing);
    CHECK(report.best == "finance_agent");  // lexicographic among all-zero ties
}

TEST_CASE("identical descriptions tie and break lexicographically") {
    const LexicalOverlapClassifier clf;
    const std::vector<AgentCard> cards = {
        {"beta_agent", "shared words here", {}},
        {"alpha_agent", "shared words here", {}},
    };
    const ConfidenceReport report = classify("shared words", cards, 0.7, clf);
    CHECK(report.scores.at("alpha_agent") ==
          doctest::Approx(report.scores.at("beta_agent")));
    CHECK(report.best == "alpha_agent");
}

TEST_CASE("rare tokens outweigh ubiquitous ones") {
    const LexicalOverlapClassifier clf;
    const std::vector<AgentCard> cards = {
        {"a", "support badge", {}},
        {"b", "support network", {}},
        {"c", "support printers", {}},
    };
    // "support" appears in every card, "badge" only in one: the idf weighting
    // must put agent a well above the others
    const auto scores = clf.score("support badge", cards);
    CHECK(scores.at("a") == doctest::Approx(1.0));
    CHECK(scores.at("b") > 0.0);
    CHECK(scores.at("b") < 0.5);
    CHECK(scores.at("b") == doctest::Approx(scores.at("c")));
}

TEST_CASE("empty query scores zero and empty cards are rejected") {
    const LexicalOverlapClassifier clf;
    const ConfidenceReport report = classify("", cards3(), 0.7, clf);
    CHECK(report.scores.at("hr_agent") == doctest::Approx(0.0));
    CHECK(report.use_probing);
    CHECK_THROWS_AS(classify("q", {}, 0.7, clf), std::invalid_argument);
}

}  // TEST_SUITE

TEST_SUITE("orchestrator") {

TEST_CASE("cache hit returns instantly without classify or probes") {
    Fixture fx({{"one", {"a_agent", Verdict::Ok, 0.9}},
                {"two", {"b_agent", Verdict::Ok, 0.9}}});
    Orchestrator orch = make_orchestrator(fx, {{"a_agent", 0.9}, {"b_agent", 0.1}});
    orch.cache().store(embed("badge access", kSpec), "b_agent", 0.0);

    const RoutingDecision d = orch.route_request("badge access", 1.0);
    CHECK(d.agent == "b_agent");
    CHECK(d.path == RoutePath::CacheHit);
    CHECK(d.cost.cache_hits == 1);
    CHECK(d.cost.classifier_calls == 0);
    CHECK(d.cost.probes_sent == 0);
    CHECK(orch.cache().size() == 1);  // hit does not re-store
}

TEST_CASE("high confidence routes direct and populates the cache") {
    Fixture fx({{"one", {"a_agent", Verdict::Ko, 0.1}},
                {"two", {"b_agent", Verdict::Ko, 0.1}}});
    Orchestrator orch = make_orchestrator(fx, {{"a_agent", 0.9}, {"b_agent", 0.2}});

    const RoutingDecision d = orch.route_request("pay invoice", 0.0);
    CHECK(d.agent == "a_agent");
    CHECK(d.path == RoutePath::Direct);
    CHECK(d.cost.classifier_calls == 1);
    CHECK(d.cost.probes_sent == 0);
    CHECK(d.cost.simulated_input_tokens > 0);

    const auto hit = orch.cache().find_similar(embed("pay invoice", kSpec), 0.0);
    REQUIRE(hit.has_value());
    CHECK(hit->payload == "a_agent");
}

TEST_CASE("uncertain classification probes; a unique OK wins") {
    Fixture fx({{"one", {"a_agent", Verdict::Ko, 0.1}},
                {"two", {"b_agent", Verdict::Ok, 0.8}},
                {"three", {"c_agent", Verdict::Partial, 0.5}}});
    Orchestrator orch = make_orchestrator(
        fx, {{"a_agent", 0.3}, {"b_agent", 0.2}, {"c_agent", 0.1}});

    const RoutingDecision d = orch.route_request("mystery question", 0.0);
    CHECK(d.agent == "b_agent");
    CHECK(d.path == RoutePath::ProbedUnique);
    CHECK(d.capable_set == std::vector<std::string>{"b_agent"});
    CHECK_FALSE(d.partial_only);
    CHECK(d.cost.probes_sent == 3);
    const auto hit = orch.cache().find_similar(embed("mystery question", kSpec), 0.0);
    REQUIRE(hit.has_value());
    CHECK(hit->payload == "b_agent");
}

TEST_CASE("multiple OKs resolve by highest confidence") {
    Fixture fx({{"one", {"a_agent", Verdict::Ok, 0.6}},
                {"two", {"b_agent", Verdict::Ok, 0.9}},
                {"three", {"c_agent", Verdict::Ko, 0.1}}});
    Orchestrator orch = make_orchestrator(
        fx, {{"a_agent", 0.3}, {"b_agent", 0.2}, {"c_agent", 0.1}});

    const RoutingDecision d = orch.route_request("mystery question", 0.0);
    CHECK(d.agent == "b_agent");
    CHECK(d.path == RoutePath::ProbedResolved);
    CHECK(d.capable_set == std::vector<std::string>{"a_agent", "b_agent"});
}

TEST_CASE("partial answers form the capable set only when no OK exists") {
    Fixture fx({{"one", {"a_agent", Verdict::Ko, 0.1}},
                {"two", {"b_agent", Verdict::Partial, 0.5}}});
    Orchestrator orch = make_orchestrator(fx, {{"a_agent", 0.1}, {"b_agent", 0.1}});

    const RoutingDecision d = orch.route_request("mystery question", 0.0);
    CHECK(d.agent == "b_agent");
    CHECK(d.path == RoutePath::ProbedUnique);
    CHECK(d.partial_only);
}

TEST_CASE("no capable agent fails with the exact message and caches nothing") {
    Fixture fx({{"one", {"a_agent", Verdict::Ko, 0.1}},
                {"two", {"b_agent", Verdict::Ko, 0.0}}});
    Orchestrator orch = make_orchestrator(fx, {{"a_agent", 0.1}, {"b_agent", 0.1}});

    const RoutingDecision d = orch.route_request("mystery question", 0.0);
    CHECK(d.failed());
    CHECK(d.failure == "No capable agent found.");
    CHECK(d.path == RoutePath::Failed);
    CHECK(d.capable_set.empty());
    CHECK(orch.cache().size() == 0);
}

TEST_CASE("total probe loss behaves like an empty capable set") {
    Fixture fx({{"one", {"a_agent", Verdict::Ok, 0.9}},
                {"two", {"b_agent", Verdict::Ok, 0.9}}});
    Orchestrator orch(std::move(fx.pool), {}, kSpec,
                      std::make_shared<FixedClassifier>(
                          std::map<std::string, double>{{"a_agent", 0.1},
                                                        {"b_agent", 0.1}}),
                      NetworkModel{0, 0, 1, 1.0});
    const RoutingDecision d = orch.route_request("mystery question", 0.0);
    CHECK(d.failed());
    CHECK(d.failure == "No capable agent found.");
}

TEST_CASE("routing the same query twice is idempotent and free") {
    Fixture fx({{"one", {"a_agent", Verdict::Ok, 0.9}},
                {"two", {"b_agent", Verdict::Ko, 0.1}}});
    Orchestrator orch = make_orchestrator(fx, {{"a_agent", 0.1}, {"b_agent", 0.1}});

    const RoutingDecision first = orch.route_request("mystery question", 0.0);
    const RoutingDecision second = orch.route_request("mystery question", 1.0);
    CHECK(first.agent == second.agent);
    CHECK(second.path == RoutePath::CacheHit);
    CHECK(second.cost.probes_sent == 0);
    CHECK(second.cost.classifier_calls == 0);
}

TEST_CASE("baseline mode never probes, even when uncertain") {
    Fixture fx({{"one", {"a_agent", Verdict::Ko, 0.1}},
                {"two", {"b_agent", Verdict::Ok, 0.9}}});
    RouterConfig cfg;
    cfg.probing_enabled = false;
    Orchestrator orch =
        make_orchestrator(fx, {{"a_agent", 0.2}, {"b_agent", 0.1}}, cfg);

    const RoutingDecision d = orch.route_request("mystery question", 0.0);
    CHECK(d.agent == "a_agent");  // best by score, not by probing
    CHECK(d.path == RoutePath::Direct);
    CHECK(d.cost.probes_sent == 0);
}

TEST_CASE("every handoff leaves exactly one cache entry; failures none") {
    struct Case {
        ProbeResponse a, b;
        std::map<std::string, double> scores;
    };
    const std::vector<Case> cases = {
        {{"a_agent", Verdict::Ok, 0.9}, {"b_agent", Verdict::Ko, 0.1},
         {{"a_agent", 0.1}, {"b_agent", 0.1}}},
        {{"a_agent", Verdict::Ok, 0.9}, {"b_agent", Verdict::Ok, 0.8},
         {{"a_agent", 0.1}, {"b_agent", 0.1}}},
        {{"a_agent", Verdict::Ko, 0.1}, {"b_agent", Verdict::Ko, 0.1},
         {{"a_agent", 0.9}, {"b_agent", 0.1}}},
        {{"a_agent", Verdict::Ko, 0.1}, {"b_agent", Verdict::Ko, 0.1},
         {{"a_agent", 0.1}, {"b_agent", 0.1}}},
    };
    for (const auto& c : cases) {
        Fixture fx({{"one", c.a}, {"two", c.b}});
        Orchestrator orch = make_orchestrator(fx, c.scores);
        const RoutingDecision d = orch.route_request("q", 0.0);
        if (d.failed()) {
            CHECK(orch.cache().size() == 0);
        } else {
            REQUIRE(orch.cache().size() == 1);
            CHECK(orch.cache().entries()[0].payload == *d.agent);
        }
    }
}

TEST_CASE("argmax is invariant under positive scaling of scores") {
    const std::map<std::string, double> base = {
        {"a_agent", 0.5}, {"b_agent", 0.8}, {"c_agent", 0.2}};
    const std::vector<AgentCard> cards = cards3();
    for (double scale : {1.0, 0.5, 0.125}) {
        const FixedClassifier clf(base, scale);
        const ConfidenceReport report = classify("q", cards, 0.7, clf);
        CHECK(report.best == "b_agent");
    }
}

TEST_CASE("resolve_ambiguity policies") {
    const std::vector<CapableAgent> capable = {{"a", 0.9}, {"b", 0.7}};
    CHECK(resolve_ambiguity(capable, ResolverPolicy::HighestConfidence) == "a");

    const std::vector<CapableAgent> tied = {{"b", 0.8}, {"a", 0.8}};
    CHECK(resolve_ambiguity(tied, ResolverPolicy::HighestConfidence) == "a");
    CHECK(resolve_ambiguity(tied, ResolverPolicy::FirstListed) == "b");

    bool fell_back = false;
    const InteractiveChooser pick_b =
        [](const std::vector<CapableAgent>&) -> std::optional<std::string> {
        return "b";
    };
    CHECK(resolve_ambiguity(tied, ResolverPolicy::InteractivePrompt, pick_b,
                            &fell_back) == "b");
    CHECK_FALSE(fell_back);

    CHECK(resolve_ambiguity(tied, ResolverPolicy::InteractivePrompt, nullptr,
                            &fell_back) == "a");
    CHECK(fell_back);

    const std::vector<CapableAgent> missing_conf = {{"x", std::nullopt}, {"y", 0.1}};
    CHECK(resolve_ambiguity(missing_conf, ResolverPolicy::HighestConfidence) == "y");

    CHECK_THROWS_AS(resolve_ambiguity({{"only", 0.5}}, ResolverPolicy::FirstListed),
                    std::invalid_argument);
    const InteractiveChooser bad =
        [](const std::vector<CapableAgent>&) -> std::optional<std::string> {
        return "nonexistent";
    };
    CHECK_THROWS_AS(
        resolve_ambiguity(tied, ResolverPolicy::InteractivePrompt, bad, nullptr),
        std::invalid_argument);
}

TEST_CASE("interactive resolver flows through route_request") {
    Fixture fx({{"one", {"a_agent", Verdict::Ok, 0.6}},
                {"two", {"b_agent", Verdict::Ok, 0.9}}});
    RouterConfig cfg;
    cfg.resolver = ResolverPolicy::InteractivePrompt;
    const InteractiveChooser chooser =
        [](const std::vector<CapableAgent>& capable) -> std::optional<std::string> {
        return capable.front().agent_id;  // scripted selection
    };
    Orchestrator orch = make_orchestrator(fx, {{"a_agent", 0.1}, {"b_agent", 0.1}},
                                          cfg, chooser);
    const RoutingDecision d = orch.route_request("q", 0.0);
    CHECK(d.agent == "a_agent");
    CHECK_FALSE(d.resolver_fallback);

    Fixture fx2({{"one", {"a_agent", Verdict::Ok, 0.6}},
                 {"two", {"b_agent", Verdict::Ok, 0.9}}});
    Orchestrator no_channel =
        make_orchestrator(fx2, {{"a_agent", 0.1}, {"b_agent", 0.1}}, cfg);
    const RoutingDecision fallback = no_channel.route_request("q", 0.0);
    CHECK(fallback.agent == "b_agent");  // highest confidence
    CHECK(fallback.resolver_fallback);
}

TEST_CASE("router config JSON round-trip") {
    RouterConfig cfg;
    cfg.tau = 0.65;
    cfg.cache.lookup_threshold = 0.88;
    cfg.cache.invalidation_threshold = 0.93;
    cfg.resolver = ResolverPolicy::FirstListed;
    const RouterConfig parsed = router_config_from_json(to_json(cfg));
    CHECK(parsed.tau == doctest::Approx(0.65));
    CHECK(parsed.cache.lookup_threshold == doctest::Approx(0.88));
    CHECK(parsed.cache.invalidation_threshold == doctest::Approx(0.93));
    CHECK(parsed.resolver == ResolverPolicy::FirstListed);

    // out-of-range tau clamps down to 1.0, per the sweep convention
    const RouterConfig clamped = router_config_from_json(
        R"({"tau":1.01,"theta_cache":0.9,"theta_inv":0.95,"resolver":"interactive"})");
    CHECK(clamped.tau == doctest::Approx(1.0));
    CHECK_THROWS(router_config_from_json(
        R"({"tau":0.7,"theta_cache":0.9,"theta_inv":0.95,"resolver":"coin_flip"})"));
}

TEST_CASE("pool rejects duplicates and empty descriptions") {
    ScriptedProber p("a_agent", Verdict::Ok, 0.9);
    AgentPool pool;
    pool.add({"a_agent", "desc", {}}, &p);
    CHECK_THROWS_AS(pool.add({"a_agent", "other", {}}, &p), std::invalid_argument);
    CHECK_THROWS_AS(pool.add({"b_agent", "", {}}, &p), std::invalid_argument);
}

}  // TEST_SUITE
