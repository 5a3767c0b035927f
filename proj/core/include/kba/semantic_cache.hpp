#pragma once
// Similarity-keyed cache of routing outcomes. Lookups return the best live
// entry above a cosine threshold; invalidation carves a hypersphere out of
// the embedding space (radius r = sqrt(2(1 - theta)) for cosine thresholds).
//
// Time never comes from the ambient clock: every operation takes `now` in
// seconds, so TTL behavior is fully deterministic under test.

#include <cstdint>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include "kba/embedding.hpp"

namespace kba {

struct CacheConfig {
    double lookup_threshold = 0.90;        // theta_cache, in (0, 1]
    std::optional<double> default_ttl;     // seconds; nullopt = never expires
    double invalidation_threshold = 0.95;  // theta_inv, in (0, 1]
};

struct CacheEntry {
    Embedding embedding;
    std::string payload;
    double stored_at = 0.0;
    std::optional<double> ttl;
    std::uint64_t id = 0;

    bool live(double now) const { return !ttl || (now - stored_at) < *ttl; }
};

struct CacheHit {
    std::string payload;
    double similarity = 0.0;
};

struct InvalidationRequest {
    Embedding centroid;               // unit-norm
    std::optional<double> threshold;  // overrides config when present
};

/// Euclidean radius of the invalidation sphere for a cosine threshold:
/// r = sqrt(2(1 - theta)). Throws std::invalid_argument outside [-1, 1].
double invalidation_radius(double theta_inv);

/// Band-clamped threshold update policy. Precision-critical domains run the
/// [0.90, 0.95] band, general-purpose deployments [0.80, 0.85]; step and
/// dead-band are deployment knobs, not constants.
struct ThresholdPolicy {
    double floor = 0.80;
    double ceiling = 0.85;
    double step = 0.01;
    double dead_band = 0.02;

    static ThresholdPolicy general() { return {0.80, 0.85, 0.01, 0.02}; }
    static ThresholdPolicy precision_critical() { return {0.90, 0.95, 0.01, 0.02}; }
};

/// Raise the threshold when false positives dominate, lower it when false
/// negatives dominate, hold inside the dead-band; always clamped to the
/// policy band. Rates must be in [0, 1].
double adapt_threshold(double false_positive_rate, double false_negative_rate,
                       double current, const ThresholdPolicy& policy);

/// Exact linear-scan cache. Concurrent readers share the structure; writers
/// (store, invalidate, import) are exclusive, so a lookup observes the cache
/// entirely before or entirely after a sphere deletion.
class SemanticCache {
  public:
    explicit SemanticCache(CacheConfig cfg = {});
    SemanticCache(const SemanticCache& other);
    SemanticCache& operator=(const SemanticCache& other);

    /// Best live entry with similarity >= lookup_threshold, or miss. Ties
    /// break toward the most recent stored_at, then the lexicographically
    /// smallest payload. Never returns an expired entry.
    std::optional<CacheHit> find_similar(const Embedding& query, double now) const;

    /// Inserts a live entry with the config's default TTL. A store whose
    /// embedding matches an existing live entry at similarity 1 (within 1e-9)
    /// replaces that entry's payload and refreshes its stored_at.
    std::uint64_t store(const Embedding& query, std::string payload, double now);
    std::uint64_t store(const Embedding& query, std::string payload, double now,
                        std::optional<double> ttl);

    /// Removes every live entry with cosine_similarity(centroid, entry) >=
    /// theta (inclusive boundary). Returns the number of live entries removed;
    /// expired entries are dropped as a side effect but not counted.
    std::size_t invalidate_sphere(const InvalidationRequest& req, double now);

    std::size_t purge_expired(double now);
    void clear();

    std::size_t size() const;  // stored entries, including not-yet-purged dead ones
    std::size_t live_count(double now) const;
    std::vector<CacheEntry> entries() const;
    const CacheConfig& config() const { return cfg_; }

    /// One entry per line:
    /// {"embedding":[...],"payload":str,"stored_at":sec,"ttl":sec|null}
    std::string export_jsonl() const;
    static SemanticCache import_jsonl(std::string_view text, CacheConfig cfg = {});

  private:
    std::size_t invalidate_locked(const Embedding& centroid, double theta, double now);
    void purge_locked(double now);

    mutable std::shared_mutex mutex_;
    CacheConfig cfg_;
    std::vector<CacheEntry> entries_;
    std::uint64_t next_id_ = 1;
};

}  // namespace kba
