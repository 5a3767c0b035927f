#include "kba/orchestrator.hpp"

#include <algorithm>
#include <stdexcept>

#include "json.hpp"

namespace kba {

namespace {

// Simulated cost model: latency per step and flat output-token charges per
// response kind. Input tokens are whitespace counts of the material the step
// would send.
constexpr double kCacheLookupLatencyMs = 0.5;
constexpr double kClassifyLatencyMs = 15.0;
constexpr std::int64_t kClassifyOutputTokens = 12;
constexpr std::int64_t kProbeOutputTokens = 4;

constexpr std::string_view kOrchestratorRequestor = "orchestrator";

std::int64_t whitespace_tokens(std::string_view text) {
    std::int64_t count = 0;
    bool in_token = false;
    for (char c : text) {
        const bool space = (c == ' ' || c == '\t' || c == '\n' || c == '\r');
        if (!space && !in_token) ++count;
        in_token = !space;
    }
    return count;
}

}  // namespace

std::string_view resolver_name(ResolverPolicy p) {
    switch (p) {
        case ResolverPolicy::HighestConfidence: return "highest_confidence";
        case ResolverPolicy::InteractivePrompt: return "interactive";
        case ResolverPolicy::FirstListed: return "first_listed";
    }
    return "highest_confidence";
}

std::optional<ResolverPolicy> resolver_from_name(std::string_view name) {
    if (name == "highest_confidence") return ResolverPolicy::HighestConfidence;
    if (name == "interactive") return ResolverPolicy::InteractivePrompt;
    if (name == "first_listed") return ResolverPolicy::FirstListed;
    return std::nullopt;
}

std::string_view path_name(RoutePath p) {
    switch (p) {
        case RoutePath::CacheHit: return "cache_hit";
        case RoutePath::Direct: return "direct";
        case RoutePath::ProbedUnique: return "probed_unique";
        case RoutePath::ProbedResolved: return "probed_resolved";
        case RoutePath::Failed: return "failed";
    }
    return "failed";
}

std::string to_json(const RouterConfig& cfg) {
    nlohmann::json j;
    j["tau"] = cfg.tau;
    j["theta_cache"] = cfg.cache.lookup_threshold;
    j["theta_inv"] = cfg.cache.invalidation_threshold;
    j["resolver"] = resolver_name(cfg.resolver);
    return j.dump();
}

RouterConfig router_config_from_json(std::string_view text) {
    const auto j = nlohmann::json::parse(text);
    RouterConfig cfg;
    cfg.tau = std::min(j.at("tau").get<double>(), 1.0);
    cfg.cache.lookup_threshold = j.at("theta_cache").get<double>();
    cfg.cache.invalidation_threshold = j.at("theta_inv").get<double>();
    const auto resolver = resolver_from_name(j.at("resolver").get<std::string>());
    if (!resolver) {
        throw std::invalid_argument("unknown resolver: " +
                                    j.at("resolver").get<std::string>());
    }
    cfg.resolver = *resolver;
    if (cfg.tau < 0.0) {
        throw std::invalid_argument("tau must be in [0, 1]");
    }
    return cfg;
}

CostCounters& CostCounters::operator+=(const CostCounters& other) {
    classifier_calls += other.classifier_calls;
    probes_sent += other.probes_sent;
    cache_hits += other.cache_hits;
    simulated_input_tokens += other.simulated_input_tokens;
    simulated_output_tokens += other.simulated_output_tokens;
    wall_time_ms += other.wall_time_ms;
    return *this;
}

std::string resolve_ambiguity(const std::vector<CapableAgent>& capable,
                              ResolverPolicy policy,
                              const InteractiveChooser& chooser, bool* fell_back) {
    if (capable.size() < 2) {
        throw std::invalid_argument("resolve_ambiguity: need at least two candidates");
    }
    if (fell_back) *fell_back = false;

    switch (policy) {
        case ResolverPolicy::FirstListed:
            return capable.front().agent_id;
        case ResolverPolicy::InteractivePrompt:
            if (chooser) {
                if (auto choice = chooser(capable)) {
                    for (const auto& c : capable) {
                        if (c.agent_id == *choice) return *choice;
                    }
                    throw std::invalid_argument("interactive choice '" + *choice +
                                                "' is not in the capable set");
                }
            }
            if (fell_back) *fell_back = true;
            [[fallthrough]];
        case ResolverPolicy::HighestConfidence: {
            const CapableAgent* best = &capable.front();
            for (const auto& c : capable) {
                const double cv = c.confidence.value_or(0.0);
                const double bv = best->confidence.value_or(0.0);
                if (cv > bv || (cv == bv && c.agent_id < best->agent_id)) best = &c;
            }
            return best->agent_id;
        }
    }
    return capable.front().agent_id;
}

void AgentPool::add(AgentCard card, Prober* prober) {
    if (card.agent_id.empty() || card.description.empty()) {
        throw std::invalid_argument("pool entries need an id and a description");
    }
    if (prober == nullptr) {
        throw std::invalid_argument("pool entry has no prober");
    }
    for (const auto& entry : entries_) {
        if (entry.card.agent_id == card.agent_id) {
            throw std::invalid_argument("duplicate agent_id in pool: " + card.agent_id);
        }
    }
    entries_.push_back({std::move(card), prober});
}

std::vector<AgentCard> AgentPool::cards() const {
    std::vector<AgentCard> out;
    out.reserve(entries_.size());
    for (const auto& e : entries_) out.push_back(e.card);
    return out;
}

std::vector<Prober*> AgentPool::probers() const {
    std::vector<Prober*> out;
    out.reserve(entries_.size());
    for (const auto& e : entries_) out.push_back(e.prober);
    return out;
}

Orchestrator::Orchestrator(AgentPool pool, RouterConfig cfg, EmbedderSpec embedder,
                           std::shared_ptr<const Classifier> classifier,
                           NetworkModel network, InteractiveChooser chooser)
    : pool_(std::move(pool)),
      cfg_(cfg),
      embedder_(embedder),
      classifier_(std::move(classifier)),
      cache_(cfg.cache),
      bus_(network),
      chooser_(std::move(chooser)) {
    if (pool_.empty()) {
        throw std::invalid_argument("orchestrator needs a non-empty agent pool");
    }
    if (!classifier_) {
        throw std::invalid_argument("orchestrator needs a classifier");
    }
    // tau = 0 is the degenerate "never probe" setting used by threshold sweeps
    if (cfg_.tau < 0.0 || cfg_.tau > 1.0) {
        throw std::invalid_argument("tau must be in [0, 1]");
    }
}

RoutingDecision Orchestrator::route_request(std::string_view query, double now) {
    RoutingDecision decision;
    const Embedding query_embedding = embed(query, embedder_);

    decision.cost.wall_time_ms += kCacheLookupLatencyMs;
    if (auto hit = cache_.find_similar(query_embedding, now)) {
        decision.agent = hit->payload;
        decision.path = RoutePath::CacheHit;
        decision.cost.cache_hits = 1;
        return decision;
    }

    const auto cards = pool_.cards();
    const ConfidenceReport report = classify(query, cards, cfg_.tau, *classifier_);
    decision.cost.classifier_calls = 1;
    decision.cost.wall_time_ms += kClassifyLatencyMs;
    for (const auto& card : cards) {
        decision.cost.simulated_input_tokens += whitespace_tokens(card.agent_id);
        decision.cost.simulated_input_tokens += whitespace_tokens(card.description);
    }
    decision.cost.simulated_input_tokens += whitespace_tokens(query);
    decision.cost.simulated_output_tokens += kClassifyOutputTokens;

    if (!report.use_probing || !cfg_.probing_enabled) {
        cache_.store(query_embedding, report.best, now);
        decision.agent = report.best;
        decision.path = RoutePath::Direct;
        return decision;
    }

    ProbeRequest probe{std::string(query), std::string(kOrchestratorRequestor),
                       cfg_.probe_deadline_ms};
    const auto probers = pool_.probers();
    const FanOutResult fan_out = bus_.parallel_probe(probe, probers);
    decision.cost.probes_sent = static_cast<std::int64_t>(probers.size());
    decision.cost.simulated_input_tokens +=
        static_cast<std::int64_t>(probers.size()) * whitespace_tokens(query);
    decision.cost.simulated_output_tokens +=
        static_cast<std::int64_t>(fan_out.ok_count()) * kProbeOutputTokens;
    decision.cost.wall_time_ms += fan_out.completion_ms;

    // Capable = agents answering OK; when none did, Partial answers stand in.
    std::vector<CapableAgent> capable;
    for (Verdict tier : {Verdict::Ok, Verdict::Partial}) {
        for (const auto& entry : pool_.entries()) {
            const auto& outcome = fan_out.outcomes.at(entry.card.agent_id);
            if (outcome.timed_out()) continue;
            if (outcome.response->verdict == tier) {
                capable.push_back({entry.card.agent_id, outcome.response->confidence});
            }
        }
        if (!capable.empty()) {
            decision.partial_only = (tier == Verdict::Partial);
            break;
        }
    }
    for (const auto& c : capable) decision.capable_set.push_back(c.agent_id);

    if (capable.empty()) {
        decision.failure = "No capable agent found.";
        decision.path = RoutePath::Failed;
        return decision;
    }
    if (capable.size() == 1) {
        cache_.store(query_embedding, capable.front().agent_id, now);
        decision.agent = capable.front().agent_id;
        decision.path = RoutePath::ProbedUnique;
        return decision;
    }

    bool fell_back = false;
    const std::string chosen =
        resolve_ambiguity(capable, cfg_.resolver, chooser_, &fell_back);
    cache_.store(query_embedding, chosen, now);
    decision.agent = chosen;
    decision.path = RoutePath::ProbedResolved;
    decision.resolver_fallback = fell_back;
    return decision;
}

}  // namespace kba
