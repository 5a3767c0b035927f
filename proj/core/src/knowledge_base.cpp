#include "kba/knowledge_base.hpp"

#include <algorithm>
#include <stdexcept>

namespace kba {

RetrievalResult rank_documents(const Embedding& query,
                               std::span<const Document> docs,
                               std::size_t top_k) {
    RetrievalResult result;
    result.hits.reserve(docs.size());
    for (const auto& doc : docs) {
        result.hits.push_back({doc.doc_id, cosine_similarity(query, doc.embedding)});
    }
    std::sort(result.hits.begin(), result.hits.end(),
              [](const RetrievalHit& a, const RetrievalHit& b) {
                  if (a.similarity != b.similarity) return a.similarity > b.similarity;
                  return a.doc_id < b.doc_id;
              });
    if (result.hits.size() > top_k) result.hits.resize(top_k);
    result.s_star = result.hits.empty() ? -1.0 : result.hits.front().similarity;
    return result;
}

Verdict ack_decision(const RetrievalResult& result, const KbConfig& cfg) {
    if (result.s_star >= cfg.ack_threshold) return Verdict::Ok;
    if (result.s_star >= cfg.partial_threshold) return Verdict::Partial;
    return Verdict::Ko;
}

KnowledgeBase::KnowledgeBase(EmbedderSpec embedder, KbConfig cfg)
    : embedder_(embedder), cfg_(cfg) {
    if (!(cfg_.partial_threshold > 0.0 && cfg_.partial_threshold < cfg_.ack_threshold &&
          cfg_.ack_threshold <= 1.0)) {
        throw std::invalid_argument("KbConfig requires 0 < partial < ack <= 1");
    }
    if (cfg_.top_k == 0) {
        throw std::invalid_argument("KbConfig requires top_k >= 1");
    }
}

std::size_t KnowledgeBase::ingest(
    std::span<const std::pair<std::string, std::string>> docs) {
    for (const auto& [doc_id, text] : docs) {
        auto existing = std::find_if(docs_.begin(), docs_.end(),
                                     [&](const Document& d) { return d.doc_id == doc_id; });
        if (existing != docs_.end()) {
            if (existing->text != text) {
                throw std::invalid_argument("ingest: doc_id '" + doc_id +
                                            "' already exists with different text");
            }
            continue;  // idempotent re-ingest
        }
        docs_.push_back({doc_id, text, embed(text, embedder_)});
    }
    return docs_.size();
}

RetrievalResult KnowledgeBase::search(std::string_view query) const {
    return search_embedding(embed(query, embedder_));
}

RetrievalResult KnowledgeBase::search_embedding(const Embedding& query) const {
    return rank_documents(query, docs_, cfg_.top_k);
}

}  // namespace kba
