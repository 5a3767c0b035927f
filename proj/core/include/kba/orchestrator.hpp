#pragma once
// End-to-end request routing: semantic-cache lookup, confidence-based
// classification, parallel knowledge probing on low confidence, ambiguity
// resolution, and cache population on every successful handoff.

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kba/classifier.hpp"
#include "kba/semantic_cache.hpp"
#include "kba/transport.hpp"

namespace kba {

enum class ResolverPolicy { HighestConfidence, InteractivePrompt, FirstListed };
enum class RoutePath { CacheHit, Direct, ProbedUnique, ProbedResolved, Failed };

std::string_view resolver_name(ResolverPolicy p);
std::optional<ResolverPolicy> resolver_from_name(std::string_view name);
std::string_view path_name(RoutePath p);

struct RouterConfig {
    double tau = 0.7;  // (0, 1]
    CacheConfig cache;
    ResolverPolicy resolver = ResolverPolicy::HighestConfidence;
    std::int64_t probe_deadline_ms = 1000;
    /// false = classify-only baseline: the report's best agent is always
    /// handed off, probing never runs.
    bool probing_enabled = true;
};

/// Normative JSON subset: {"tau": float, "theta_cache": float,
/// "theta_inv": float, "resolver": "highest_confidence"|"interactive"|
/// "first_listed"}. Extra keys are rejected here; file-level configs with
/// more structure live in benchkit.
std::string to_json(const RouterConfig& cfg);
RouterConfig router_config_from_json(std::string_view text);

struct CostCounters {
    std::int64_t classifier_calls = 0;
    std::int64_t probes_sent = 0;
    std::int64_t cache_hits = 0;
    std::int64_t simulated_input_tokens = 0;
    std::int64_t simulated_output_tokens = 0;
    double wall_time_ms = 0.0;  // simulated

    CostCounters& operator+=(const CostCounters& other);
};

struct CapableAgent {
    std::string agent_id;
    std::optional<double> confidence;
};

struct RoutingDecision {
    std::optional<std::string> agent;  // handoff target; nullopt = failure
    std::string failure;               // message when failed
    RoutePath path = RoutePath::Failed;
    std::vector<std::string> capable_set;  // pool order
    CostCounters cost;
    bool partial_only = false;        // capable set fell back to Partial answers
    bool resolver_fallback = false;   // interactive resolver was unavailable

    bool failed() const { return !agent.has_value(); }
};

/// Used by the InteractivePrompt resolver; returns the chosen agent_id or
/// nullopt when no channel is available.
using InteractiveChooser =
    std::function<std::optional<std::string>(const std::vector<CapableAgent>&)>;

/// Pick one agent from a capable set of two or more. HighestConfidence takes
/// the max confidence (missing = 0) with lexicographic tie-break;
/// FirstListed takes the first entry as given (pool order);
/// InteractivePrompt asks the chooser and falls back to HighestConfidence
/// when the channel is unavailable or declines (sets *fell_back).
std::string resolve_ambiguity(const std::vector<CapableAgent>& capable,
                              ResolverPolicy policy,
                              const InteractiveChooser& chooser = nullptr,
                              bool* fell_back = nullptr);

struct PoolEntry {
    AgentCard card;
    Prober* prober;
};

/// Routing pool: agent cards plus their probe endpoints. Ids are unique;
/// entry order is the pool order used for deterministic fallbacks.
class AgentPool {
  public:
    void add(AgentCard card, Prober* prober);

    std::span<const PoolEntry> entries() const { return entries_; }
    std::vector<AgentCard> cards() const;
    std::vector<Prober*> probers() const;
    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }

  private:
    std::vector<PoolEntry> entries_;
};

class Orchestrator {
  public:
    Orchestrator(AgentPool pool, RouterConfig cfg, EmbedderSpec embedder,
                 std::shared_ptr<const Classifier> classifier,
                 NetworkModel network = {}, InteractiveChooser chooser = nullptr);

    /// One query end to end. `now` is injected simulated time (seconds) used
    /// for cache liveness and population.
    RoutingDecision route_request(std::string_view query, double now);

    SemanticCache& cache() { return cache_; }
    const RouterConfig& config() const { return cfg_; }
    const AgentPool& pool() const { return pool_; }
    SimulatedBus& bus() { return bus_; }

  private:
    AgentPool pool_;
    RouterConfig cfg_;
    EmbedderSpec embedder_;
    std::shared_ptr<const Classifier> classifier_;
    SemanticCache cache_;
    SimulatedBus bus_;
    InteractiveChooser chooser_;
};

}  // namespace kba
