#pragma once
// Confidence-based initial routing. The classifier is pluggable; the
// reference implementation scores agents by idf-weighted lexical overlap
// between the query and each agent card, which naturally yields low scores
// (and therefore escalation to probing) when descriptions don't cover the
// query's vocabulary.

#include <map>
#include <span>
#include <string>
#include <string_view>

#include "kba/agent.hpp"

namespace kba {

struct ConfidenceReport {
    std::map<std::string, double> scores;  // agent_id -> [0, 1]
    std::string best;                      // argmax, lexicographic tie-break
    bool use_probing = false;              // scores[best] < tau
};

class Classifier {
  public:
    virtual ~Classifier() = default;
    virtual std::map<std::string, double> score(
        std::string_view query, std::span<const AgentCard> cards) const = 0;
};

/// score(card) = sum of idf over query tokens found in the description,
/// normalized by the idf mass of the whole query. A query whose tokens all
/// appear in exactly one description scores 1.0 there and 0.0 elsewhere; a
/// query sharing nothing with any description scores 0.0 everywhere.
class LexicalOverlapClassifier final : public Classifier {
  public:
    std::map<std::string, double> score(
        std::string_view query, std::span<const AgentCard> cards) const override;
};

/// Run the classifier and fold in the threshold rule. Throws on empty cards.
ConfidenceReport classify(std::string_view query, std::span<const AgentCard> cards,
                          double tau, const Classifier& classifier);

}  // namespace kba
