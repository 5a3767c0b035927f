#include "kba/semantic_cache.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace kba {

namespace {
constexpr double kIdentitySlack = 1e-9;
}

double invalidation_radius(double theta_inv) {
    if (theta_inv < -1.0 || theta_inv > 1.0) {
        throw std::invalid_argument("invalidation_radius: threshold outside [-1, 1]");
    }
    return std::sqrt(2.0 * (1.0 - theta_inv));
}

double adapt_threshold(double false_positive_rate, double false_negative_rate,
                       double current, const ThresholdPolicy& policy) {
    if (false_positive_rate < 0.0 || false_positive_rate > 1.0 ||
        false_negative_rate < 0.0 || false_negative_rate > 1.0) {
        throw std::invalid_argument("adapt_threshold: rates must be in [0, 1]");
    }
    double next = current;
    const double imbalance = false_positive_rate - false_negative_rate;
    if (imbalance > policy.dead_band) {
        next += policy.step;
    } else if (imbalance < -policy.dead_band) {
        next -= policy.step;
    }
    return std::clamp(next, policy.floor, policy.ceiling);
}

SemanticCache::SemanticCache(CacheConfig cfg) : cfg_(cfg) {
    if (cfg_.lookup_threshold <= 0.0 || cfg_.lookup_threshold > 1.0) {
        throw std::invalid_argument("cache lookup_threshold must be in (0, 1]");
    }
    if (cfg_.invalidation_threshold <= 0.0 || cfg_.invalidation_threshold > 1.0) {
        throw std::invalid_argument("cache invalidation_threshold must be in (0, 1]");
    }
}

SemanticCache::SemanticCache(const SemanticCache& other) : cfg_(other.cfg_) {
    std::shared_lock lock(other.mutex_);
    entries_ = other.entries_;
    next_id_ = other.next_id_;
}

SemanticCache& SemanticCache::operator=(const SemanticCache& other) {
    if (this == &other) return *this;
    std::vector<CacheEntry> copy;
    std::uint64_t next;
    CacheConfig cfg;
    {
        std::shared_lock lock(other.mutex_);
        copy = other.entries_;
        next = other.next_id_;
        cfg = other.cfg_;
    }
    std::unique_lock lock(mutex_);
    entries_ = std::move(copy);
    next_id_ = next;
    cfg_ = cfg;
    return *this;
}

std::optional<CacheHit> SemanticCache::find_similar(const Embedding& query,
                                                    double now) const {
    std::shared_lock lock(mutex_);
    const CacheEntry* best = nullptr;
    double best_sim = 0.0;
    for (const auto& entry : entries_) {
        if (!entry.live(now)) continue;
        const double sim = cosine_similarity(query, entry.embedding);
        if (sim < cfg_.lookup_threshold) continue;
        if (best == nullptr || sim > best_sim ||
            (sim == best_sim && (entry.stored_at > best->stored_at ||
                                 (entry.stored_at == best->stored_at &&
                                  entry.payload < best->payload)))) {
            best = &entry;
            best_sim = sim;
        }
    }
    if (best == nullptr) return std::nullopt;
    return CacheHit{best->payload, best_sim};
}

std::uint64_t SemanticCache::store(const Embedding& query, std::string payload,
                                   double now) {
    return store(query, std::move(payload), now, cfg_.default_ttl);
}

std::uint64_t SemanticCache::store(const Embedding& query, std::string payload,
                                   double now, std::optional<double> ttl) {
    std::unique_lock lock(mutex_);
    purge_locked(now);
    for (auto& entry : entries_) {
        if (cosine_similarity(query, entry.embedding) >= 1.0 - kIdentitySlack) {
            entry.payload = std::move(payload);
            entry.stored_at = now;
            entry.ttl = ttl;
            return entry.id;
        }
    }
    CacheEntry entry{query, std::move(payload), now, ttl, next_id_++};
    entries_.push_back(std::move(entry));
    return entries_.back().id;
}

std::size_t SemanticCache::invalidate_sphere(const InvalidationRequest& req,
                                             double now) {
    const double theta = req.threshold.value_or(cfg_.invalidation_threshold);
    if (theta <= 0.0 || theta > 1.0) {
        throw std::invalid_argument("invalidate_sphere: threshold must be in (0, 1]");
    }
    std::unique_lock lock(mutex_);
    return invalidate_locked(req.centroid, theta, now);
}

std::size_t SemanticCache::invalidate_locked(const Embedding& centroid,
                                             double theta, double now) {
    std::size_t removed = 0;
    auto keep = std::vector<CacheEntry>();
    keep.reserve(entries_.size());
    for (auto& entry : entries_) {
        if (!entry.live(now)) continue;  // dropped, not counted
        if (cosine_similarity(centroid, entry.embedding) >= theta) {
            ++removed;
            continue;
        }
        keep.push_back(std::move(entry));
    }
    entries_ = std::move(keep);
    return removed;
}

void SemanticCache::purge_locked(double now) {
    std::erase_if(entries_, [now](const CacheEntry& e) { return !e.live(now); });
}

std::size_t SemanticCache::purge_expired(double now) {
    std::unique_lock lock(mutex_);
    const std::size_t before = entries_.size();
    purge_locked(now);
    return before - entries_.size();
}

void SemanticCache::clear() {
    std::unique_lock lock(mutex_);
    entries_.clear();
}

std::size_t SemanticCache::size() const {
    std::shared_lock lock(mutex_);
    return entries_.size();
}

std::size_t SemanticCache::live_count(double now) const {
    std::shared_lock lock(mutex_);
    return static_cast<std::size_t>(std::count_if(
        entries_.begin(), entries_.end(),
        [now](const CacheEntry& e) { return e.live(now); }));
}

std::vector<CacheEntry> SemanticCache::entries() const {
    std::shared_lock lock(mutex_);
    return entries_;
}

std::string SemanticCache::export_jsonl() const {
    std::shared_lock lock(mutex_);
    std::ostringstream out;
    for (const auto& entry : entries_) {
        nlohmann::json j;
        j["embedding"] = std::vector<double>(entry.embedding.components().begin(),
                                             entry.embedding.components().end());
        j["payload"] = entry.payload;
        j["stored_at"] = entry.stored_at;
        if (entry.ttl) {
            j["ttl"] = *entry.ttl;
        } else {
            j["ttl"] = nullptr;
        }
        out << j.dump() << '\n';
    }
    return out.str();
}

SemanticCache SemanticCache::import_jsonl(std::string_view text, CacheConfig cfg) {
    SemanticCache cache(cfg);
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw std::runtime_error("cache snapshot line " + std::to_string(line_no) +
                                     ": " + e.what());
        }
        CacheEntry entry;
        entry.embedding =
            Embedding::normalized(j.at("embedding").get<std::vector<double>>());
        entry.payload = j.at("payload").get<std::string>();
        entry.stored_at = j.at("stored_at").get<double>();
        const auto& ttl = j.at("ttl");
        if (!ttl.is_null()) entry.ttl = ttl.get<double>();
        entry.id = cache.next_id_++;
        cache.entries_.push_back(std::move(entry));
    }
    return cache;
}

}  // namespace kba
