#include "kba/classifier.hpp"

#include <cmath>
#include <set>
#include <stdexcept>

namespace kba {

std::map<std::string, double> LexicalOverlapClassifier::score(
    std::string_view query, std::span<const AgentCard> cards) const {
    std::vector<std::set<std::string>> card_tokens;
    card_tokens.reserve(cards.size());
    for (const auto& card : cards) {
        const auto tokens = tokenize(card.description);
        card_tokens.emplace_back(tokens.begin(), tokens.end());
    }

    const auto query_token_list = tokenize(query);
    const std::set<std::string> query_tokens(query_token_list.begin(),
                                             query_token_list.end());

    // idf by token rarity across cards; tokens found nowhere weigh the most.
    const double n = static_cast<double>(cards.size());
    auto idf = [&](const std::string& token) {
        double df = 0.0;
        for (const auto& tokens : card_tokens) {
            if (tokens.count(token)) df += 1.0;
        }
        return std::log(1.0 + n / (1.0 + df));
    };

    double query_mass = 0.0;
    std::map<std::string, double> token_weight;
    for (const auto& token : query_tokens) {
        const double w = idf(token);
        token_weight[token] = w;
        query_mass += w;
    }

    std::map<std::string, double> scores;
    for (std::size_t i = 0; i < cards.size(); ++i) {
        double overlap = 0.0;
        if (query_mass > 0.0) {
            for (const auto& [token, weight] : token_weight) {
                if (card_tokens[i].count(token)) overlap += weight;
            }
            overlap /= query_mass;
        }
        scores[cards[i].agent_id] = overlap;
    }
    return scores;
}

ConfidenceReport classify(std::string_view query, std::span<const AgentCard> cards,
                          double tau, const Classifier& classifier) {
    if (cards.empty()) {
        throw std::invalid_argument("classify: agent card list is empty");
    }
    ConfidenceReport report;
    report.scores = classifier.score(query, cards);

    // argmax with lexicographic tie-break; std::map iterates ids in order,
    // so strictly-greater keeps the smallest id among ties.
    double best_score = -1.0;
    for (const auto& [agent_id, score] : report.scores) {
        if (score > best_score) {
            best_score = score;
            report.best = agent_id;
        }
    }
    report.use_probing = best_score < tau;
    return report;
}

}  // namespace kba
