#include "kba/embedding.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>

#include "json.hpp"

namespace kba {

namespace {

// splitmix64 finalizer; stable across platforms for identical inputs.
std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace

std::string to_json(const EmbedderSpec& spec) {
    nlohmann::json j;
    j["dimension"] = spec.dimension;
    j["seed"] = spec.seed;
    return j.dump();
}

EmbedderSpec embedder_spec_from_json(std::string_view text) {
    const auto j = nlohmann::json::parse(text);
    EmbedderSpec spec;
    spec.dimension = j.at("dimension").get<std::size_t>();
    spec.seed = j.at("seed").get<std::uint64_t>();
    if (spec.dimension < 2) {
        throw std::invalid_argument("embedder dimension must be >= 2");
    }
    return spec;
}

Embedding Embedding::normalized(std::vector<double> components) {
    double sum_sq = 0.0;
    for (double c : components) sum_sq += c * c;
    if (sum_sq <= 0.0) {
        std::fill(components.begin(), components.end(), 0.0);
        if (!components.empty()) components[0] = 1.0;
        return Embedding(std::move(components));
    }
    const double inv = 1.0 / std::sqrt(sum_sq);
    for (double& c : components) c *= inv;
    return Embedding(std::move(components));
}

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    for (unsigned char c : text) {
        if (std::isalnum(c)) {
            current.push_back(static_cast<char>(std::tolower(c)));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

Embedding embed(std::string_view text, const EmbedderSpec& spec) {
    if (spec.dimension < 2) {
        throw std::invalid_argument("embedder dimension must be >= 2");
    }
    std::vector<double> acc(spec.dimension, 0.0);
    for (const auto& token : tokenize(text)) {
        const std::uint64_t h = mix64(spec.seed ^ fnv1a(token));
        const std::size_t index = h % spec.dimension;
        const double sign = (mix64(h) & 1ULL) ? 1.0 : -1.0;
        acc[index] += sign;
    }
    return Embedding::normalized(std::move(acc));
}

double cosine_similarity(const Embedding& a, const Embedding& b) {
    if (a.dimension() != b.dimension()) {
        throw std::invalid_argument("cosine_similarity: dimension mismatch");
    }
    double dot = 0.0;
    const auto av = a.components();
    const auto bv = b.components();
    for (std::size_t i = 0; i < av.size(); ++i) dot += av[i] * bv[i];
    return std::clamp(dot, -1.0, 1.0);
}

}  // namespace kba
