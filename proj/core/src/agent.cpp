#include "kba/agent.hpp"

#include <algorithm>
#include <stdexcept>

namespace kba {

std::string variant_name(DescriptionVariant v) {
    std::string name;
    switch (v.length) {
        case DescriptionLength::Basic: name = "basic"; break;
        case DescriptionLength::Balanced: name = "balanced"; break;
        case DescriptionLength::Detailed: name = "detailed"; break;
    }
    name += (v.source == DescriptionSource::Generic) ? "_generic" : "_fine_tuned";
    return name;
}

std::optional<DescriptionVariant> variant_from_name(std::string_view name) {
    for (const auto v : all_description_variants()) {
        if (variant_name(v) == name) return v;
    }
    return std::nullopt;
}

std::vector<DescriptionVariant> all_description_variants() {
    std::vector<DescriptionVariant> out;
    for (auto length : {DescriptionLength::Basic, DescriptionLength::Balanced,
                        DescriptionLength::Detailed}) {
        for (auto source : {DescriptionSource::Generic, DescriptionSource::FineTuned}) {
            out.push_back({length, source});
        }
    }
    return out;
}

Agent::Agent(AgentCard card, EmbedderSpec embedder, KbConfig kb_cfg,
             CacheConfig cache_cfg, AclPolicy acl)
    : card_(std::move(card)),
      embedder_(embedder),
      kb_(embedder, kb_cfg),
      cache_(cache_cfg),
      acl_(std::move(acl)) {
    if (card_.agent_id.empty()) {
        throw std::invalid_argument("agent_id must be non-empty");
    }
}

void Agent::set_card(AgentCard card) {
    if (card.agent_id != card_.agent_id) {
        throw std::invalid_argument("set_card: agent_id is immutable");
    }
    card_ = std::move(card);
}

void Agent::set_clock(std::function<double()> clock) {
    clock_ = std::move(clock);
}

double Agent::now() {
    if (clock_) return clock_();
    return static_cast<double>(tick_.fetch_add(1));
}

std::size_t Agent::ingest(std::span<const std::pair<std::string, std::string>> docs) {
    const std::size_t count = kb_.ingest(docs);
    cache_.clear();
    return count;
}

ProbeResponse Agent::handle_probe(const ProbeRequest& req) {
    if (!acl_.is_authorized(req.requestor_id)) {
        return {card_.agent_id, Verdict::NotAuthorized, std::nullopt};
    }

    const Embedding query = embed(req.query, embedder_);
    const double t = now();

    if (auto hit = cache_.find_similar(query, t)) {
        if (auto cached = verdict_from_name(hit->payload)) {
            return {card_.agent_id, *cached, std::nullopt};
        }
    }

    kb_searches_.fetch_add(1);
    const RetrievalResult result = kb_.search_embedding(query);
    const Verdict verdict = ack_decision(result, kb_.config());
    cache_.store(query, std::string(verdict_name(verdict)), t);

    const double confidence = std::clamp(result.s_star, 0.0, 1.0);
    return {card_.agent_id, verdict, confidence};
}

ProbeResponse aggregate_responses(std::string agent_id,
                                  std::span<const ProbeResponse> children) {
    auto effective = [](Verdict v) {
        return v == Verdict::NotAuthorized ? Verdict::Ko : v;
    };

    Verdict winner = Verdict::Ko;
    for (const auto& child : children) {
        const Verdict v = effective(child.verdict);
        if (v == Verdict::Ok) {
            winner = Verdict::Ok;
            break;
        }
        if (v == Verdict::Partial) winner = Verdict::Partial;
    }

    std::optional<double> confidence;
    for (const auto& child : children) {
        if (effective(child.verdict) != winner || !child.confidence) continue;
        if (!confidence || *child.confidence > *confidence) {
            confidence = child.confidence;
        }
    }
    return {std::move(agent_id), winner, confidence};
}

CompositeAgent::CompositeAgent(std::string agent_id, std::vector<Prober*> children)
    : id_(std::move(agent_id)), children_(std::move(children)) {
    if (children_.empty()) {
        throw std::invalid_argument("CompositeAgent requires at least one child");
    }
}

ProbeResponse CompositeAgent::handle_probe(const ProbeRequest& req) {
    std::vector<ProbeResponse> responses;
    responses.reserve(children_.size());
    for (Prober* child : children_) {
        responses.push_back(child->handle_probe(req));
    }
    return aggregate_responses(id_, responses);
}

}  // namespace kba
