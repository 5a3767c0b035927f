#pragma once
// Agent runtime: authorization check, agent-side semantic cache of verdicts,
// knowledge-base retrieval, and the three-tier acknowledgment. Also a
// composite agent that aggregates its children's verdicts recursively.

#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "kba/embedding.hpp"
#include "kba/knowledge_base.hpp"
#include "kba/probe.hpp"
#include "kba/semantic_cache.hpp"

namespace kba {

enum class DescriptionLength { Basic, Balanced, Detailed };
enum class DescriptionSource { Generic, FineTuned };

struct DescriptionVariant {
    DescriptionLength length = DescriptionLength::Basic;
    DescriptionSource source = DescriptionSource::Generic;

    friend bool operator==(const DescriptionVariant&, const DescriptionVariant&) = default;
};

/// "basic_generic", "balanced_fine_tuned", ...
std::string variant_name(DescriptionVariant v);
std::optional<DescriptionVariant> variant_from_name(std::string_view name);
std::vector<DescriptionVariant> all_description_variants();

struct AgentCard {
    std::string agent_id;
    std::string description;  // non-empty
    DescriptionVariant variant;
};

/// Leaf agent. Probe handling follows the agent-side retrieval flow exactly:
///   1. unauthorized requestor -> NotAuthorized (never cached);
///   2. cache hit on the query embedding -> replay the cached verdict with no
///      retrieval;
///   3. otherwise search the KB; empty store -> KO;
///   4. otherwise the ack band decides OK / Partial / KO.
/// Every non-NotAuthorized verdict is cached. Responses carry only the
/// verdict, a scalar confidence, and the agent id: KB content never leaves
/// the agent.
class Agent final : public Prober {
  public:
    Agent(AgentCard card, EmbedderSpec embedder, KbConfig kb_cfg = {},
          CacheConfig cache_cfg = {}, AclPolicy acl = AclPolicy::allow_all());

    const std::string& agent_id() const override { return card_.agent_id; }
    ProbeResponse handle_probe(const ProbeRequest& req) override;

    /// Ingest clears the probe cache: cached verdicts may be stale once the
    /// knowledge base changes.
    std::size_t ingest(std::span<const std::pair<std::string, std::string>> docs);

    const AgentCard& card() const { return card_; }
    void set_card(AgentCard card);

    const KnowledgeBase& kb() const { return kb_; }
    SemanticCache& probe_cache() { return cache_; }
    void clear_probe_cache() { cache_.clear(); }

    /// Number of KB searches performed so far (probe-cache hits skip the KB).
    std::uint64_t kb_search_count() const { return kb_searches_.load(); }

    /// Replace the injected clock used to timestamp cache entries. The
    /// default clock is a per-agent monotonic tick.
    void set_clock(std::function<double()> clock);

  private:
    double now();

    AgentCard card_;
    EmbedderSpec embedder_;
    KnowledgeBase kb_;
    SemanticCache cache_;
    AclPolicy acl_;
    std::function<double()> clock_;
    std::atomic<std::uint64_t> kb_searches_{0};
    std::atomic<std::uint64_t> tick_{0};
};

/// Pure aggregation rule for a parent node: any child OK wins, else any
/// Partial, else KO; NotAuthorized children count as KO. Confidence is the
/// max over children holding the winning verdict.
ProbeResponse aggregate_responses(std::string agent_id,
                                  std::span<const ProbeResponse> children);

/// Parent node that fans a probe out to its children (same deadline budget)
/// and answers upstream with the aggregated acknowledgment. Children may be
/// leaf agents or further composites.
class CompositeAgent final : public Prober {
  public:
    CompositeAgent(std::string agent_id, std::vector<Prober*> children);

    const std::string& agent_id() const override { return id_; }
    ProbeResponse handle_probe(const ProbeRequest& req) override;

  private:
    std::string id_;
    std::vector<Prober*> children_;
};

}  // namespace kba
