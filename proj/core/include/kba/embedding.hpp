#pragma once
// Embedding primitives: a unit-norm vector type, a deterministic feature-hash
// embedder, and cosine similarity. Everything here is pure and immutable, so
// values can be shared freely across threads.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace kba {

/// Parameters of the deterministic reference embedder. Two calls with the
/// same text and the same spec produce bit-identical vectors.
struct EmbedderSpec {
    std::size_t dimension = 256;
    std::uint64_t seed = 0;

    friend bool operator==(const EmbedderSpec&, const EmbedderSpec&) = default;
};

/// JSON form: {"dimension": int, "seed": int}
std::string to_json(const EmbedderSpec& spec);
EmbedderSpec embedder_spec_from_json(std::string_view text);

/// Unit-norm point in d-dimensional space. Construct through `normalized`
/// (or `embed`), which rescales to L2 norm 1; an all-zero input maps to the
/// first canonical basis vector.
class Embedding {
  public:
    Embedding() = default;

    static Embedding normalized(std::vector<double> components);

    std::size_t dimension() const { return components_.size(); }
    std::span<const double> components() const { return components_; }
    bool empty() const { return components_.empty(); }

    friend bool operator==(const Embedding&, const Embedding&) = default;

  private:
    explicit Embedding(std::vector<double> components)
        : components_(std::move(components)) {}

    std::vector<double> components_;
};

/// Lowercase + alphanumeric split. "Badge  ACCESS " -> {"badge", "access"}.
std::vector<std::string> tokenize(std::string_view text);

/// Deterministic feature-hash embedding of `text`. Each token's seeded hash
/// picks a component index and a sign; accumulated counts are L2-normalized.
/// Empty text (or all-separator text) maps to the canonical basis vector e1.
/// Requires spec.dimension >= 2.
Embedding embed(std::string_view text, const EmbedderSpec& spec);

/// Dot product of two unit vectors, clamped to [-1, 1] against rounding.
/// Throws std::invalid_argument on dimension mismatch.
double cosine_similarity(const Embedding& a, const Embedding& b);

}  // namespace kba
