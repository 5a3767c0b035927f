#pragma once
// Per-agent private document store with cosine retrieval and the ACK rule:
// OK when the best hit clears the ack threshold, PartialContent inside the
// [partial, ack) band, KO below (or when the store is empty).

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "kba/embedding.hpp"
#include "kba/probe.hpp"

namespace kba {

struct Document {
    std::string doc_id;
    std::string text;
    Embedding embedding;  // embed(text, system spec) for ingested documents
};

struct KbConfig {
    double ack_threshold = 0.60;      // theta
    double partial_threshold = 0.40;  // theta_partial, 0 < partial < ack <= 1
    std::size_t top_k = 5;
};

struct RetrievalHit {
    std::string doc_id;
    double similarity = 0.0;
};

struct RetrievalResult {
    std::vector<RetrievalHit> hits;  // descending similarity, at most top_k
    double s_star = -1.0;            // max similarity; -1 when the KB is empty
};

/// Rank `docs` by cosine similarity to `query`, keeping the best `top_k`.
/// Equal similarities order by ascending doc_id.
RetrievalResult rank_documents(const Embedding& query,
                               std::span<const Document> docs,
                               std::size_t top_k);

/// OK iff s_star >= ack (inclusive); Partial iff partial <= s_star < ack;
/// KO otherwise, including the empty-KB sentinel s_star = -1.
Verdict ack_decision(const RetrievalResult& result, const KbConfig& cfg);

class KnowledgeBase {
  public:
    explicit KnowledgeBase(EmbedderSpec embedder, KbConfig cfg = {});

    /// Embeds and indexes documents. Re-ingesting an identical (doc_id, text)
    /// pair is a no-op; the same doc_id with different text is an error.
    /// Returns the total number of searchable documents.
    std::size_t ingest(std::span<const std::pair<std::string, std::string>> docs);

    RetrievalResult search(std::string_view query) const;
    RetrievalResult search_embedding(const Embedding& query) const;

    std::size_t size() const { return docs_.size(); }
    bool empty() const { return docs_.empty(); }
    std::span<const Document> documents() const { return docs_; }
    const KbConfig& config() const { return cfg_; }
    const EmbedderSpec& embedder() const { return embedder_; }

  private:
    EmbedderSpec embedder_;
    KbConfig cfg_;
    std::vector<Document> docs_;
};

}  // namespace kba
