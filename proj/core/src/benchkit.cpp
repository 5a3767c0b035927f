#include "kba/benchkit.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace kba::bench {

namespace {

using json = nlohmann::json;

// --- synthetic vocabulary ----------------------------------------------------

std::string make_word(std::mt19937_64& rng) {
    static constexpr std::string_view onsets = "bdfgklmnprstvz";
    static constexpr std::string_view vowels = "aeiou";
    static constexpr std::string_view codas = "lmnrst";
    std::string word;
    const int syllables = 2 + static_cast<int>(rng() % 2);
    for (int s = 0; s < syllables; ++s) {
        word += onsets[rng() % onsets.size()];
        word += vowels[rng() % vowels.size()];
    }
    word += codas[rng() % codas.size()];
    return word;
}

std::vector<std::string> make_vocabulary(std::mt19937_64& rng, std::size_t count,
                                         std::set<std::string>& taken) {
    std::vector<std::string> words;
    words.reserve(count);
    while (words.size() < count) {
        std::string w = make_word(rng);
        if (taken.insert(w).second) words.push_back(std::move(w));
    }
    return words;
}

double unit_draw(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

constexpr std::size_t kSharedPoolSize = 60;
constexpr std::size_t kCoreVocabSize = 40;
constexpr std::size_t kDocWords = 24;
constexpr std::size_t kQuestionWords = 14;

const std::vector<std::string>& question_prefixes() {
    static const std::vector<std::string> prefixes = {
        "how do", "what about", "where is", "when does"};
    return prefixes;
}

struct DomainInfo {
    std::string agent_id;
    std::string domain;
};

DomainInfo domain_for_index(std::size_t i) {
    static const std::vector<DomainInfo> named = {
        {"accounting_agent", "accounting and finance"},
        {"hr_agent", "human resources"},
        {"it_agent", "information technology"},
        {"legal_agent", "legal and compliance"},
        {"marketing_agent", "marketing and brand"},
        {"research_agent", "research and development"},
        {"sales_agent", "sales operations"},
    };
    if (i < named.size()) return named[i];
    char buf[32];
    std::snprintf(buf, sizeof(buf), "domain%02zu_agent", i + 1);
    return {buf, "domain " + std::to_string(i + 1) + " operations"};
}

std::string generic_description(const std::string& domain, DescriptionLength length) {
    switch (length) {
        case DescriptionLength::Basic:
            return "Helps employees with " + domain +
                   " questions, routine requests, and everyday policy guidance.";
        case DescriptionLength::Balanced:
            return "Supports the organization on " + domain +
                   " topics. Typical requests include clarifying internal policies, "
                   "walking through standard procedures, explaining who approves "
                   "what, and pointing people to the right forms and systems. The "
                   "assistant answers routine questions end to end and escalates "
                   "unusual cases to the responsible team, keeping guidance "
                   "consistent with current company rules.";
        case DescriptionLength::Detailed:
            return "Primary contact for " + domain +
                   " matters across the company. Responsibilities include: "
                   "interpreting internal policies and explaining how they apply to "
                   "specific situations; guiding employees step by step through "
                   "standard procedures and request workflows; clarifying approval "
                   "chains, deadlines, and documentation requirements; helping with "
                   "common forms, portals, and tracking systems; summarizing rules "
                   "for new joiners and managers; flagging exceptions that need "
                   "review by the responsible team; and keeping answers aligned "
                   "with the latest published guidance. The assistant handles "
                   "recurring questions directly, provides checklists for "
                   "multi-step processes, explains terminology in plain language, "
                   "and routes genuinely ambiguous or sensitive cases to a human "
                   "owner. It aims for accurate, current, and actionable answers "
                   "grounded in company policy rather than general advice.";
    }
    return {};
}

std::vector<std::string> top_tokens(std::span<const CorpusDoc> docs,
                                    std::size_t limit) {
    std::map<std::string, std::size_t> freq;
    for (const auto& doc : docs) {
        for (const auto& token : tokenize(doc.text)) ++freq[token];
    }
    std::vector<std::pair<std::string, std::size_t>> ranked(freq.begin(), freq.end());
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (ranked.size() > limit) ranked.resize(limit);
    std::vector<std::string> out;
    out.reserve(ranked.size());
    for (auto& [token, count] : ranked) out.push_back(std::move(token));
    return out;
}

std::string join(std::span<const std::string> words, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < words.size(); ++i) {
        if (i) out += sep;
        out += words[i];
    }
    return out;
}

std::string fine_tuned_description(const std::string& domain,
                                   std::span<const CorpusDoc> docs,
                                   DescriptionLength length) {
    switch (length) {
        case DescriptionLength::Basic: {
            const auto tokens = top_tokens(docs, 8);
            return "Covers " + domain + " topics such as " + join(tokens, ", ") + ".";
        }
        case DescriptionLength::Balanced: {
            const auto tokens = top_tokens(docs, 28);
            return "Handles questions grounded in the team's internal "
                   "documentation on " +
                   domain + ". Frequent topics include " + join(tokens, ", ") + ".";
        }
        case DescriptionLength::Detailed: {
            const auto tokens = top_tokens(docs, 64);
            return "Primary contact for questions answered by the team's internal "
                   "documentation on " +
                   domain + ". Topic index: " + join(tokens, ", ") +
                   ". Also assists with related procedures, approvals, and "
                   "follow-ups documented in the knowledge base.";
        }
    }
    return {};
}

std::vector<CorpusDoc> docs_of_agent(std::span<const CorpusDoc> corpus,
                                     const std::string& agent_id) {
    std::vector<CorpusDoc> out;
    for (const auto& doc : corpus) {
        if (doc.agent == agent_id) out.push_back(doc);
    }
    return out;
}

std::vector<std::string> agent_order(std::span<const CorpusDoc> corpus) {
    std::vector<std::string> order;
    for (const auto& doc : corpus) {
        if (std::find(order.begin(), order.end(), doc.agent) == order.end()) {
            order.push_back(doc.agent);
        }
    }
    return order;
}

double percentile(std::vector<double> values, double q) {
    if (values.empty()) return 0.0;
    std::sort(values.begin(), values.end());
    const double pos = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(pos);
    const auto hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return values[lo] * (1.0 - frac) + values[hi] * frac;
}

json cost_to_json(const CostCounters& c) {
    json j;
    j["classifier_calls"] = c.classifier_calls;
    j["probes_sent"] = c.probes_sent;
    j["cache_hits"] = c.cache_hits;
    j["simulated_input_tokens"] = c.simulated_input_tokens;
    j["simulated_output_tokens"] = c.simulated_output_tokens;
    j["wall_time_ms"] = c.wall_time_ms;
    return j;
}

json confusion_to_json(const ConfusionMatrix& m) {
    json j;
    j["labels"] = m.labels;
    j["rows"] = m.counts;
    return j;
}

}  // namespace

const std::string& DescriptionSet::find(const std::string& agent_id,
                                        const std::string& variant) const {
    auto agent_it = by_agent.find(agent_id);
    if (agent_it == by_agent.end()) {
        throw std::out_of_range("no descriptions for agent '" + agent_id + "'");
    }
    auto variant_it = agent_it->second.find(variant);
    if (variant_it == agent_it->second.end()) {
        throw std::out_of_range("agent '" + agent_id + "' has no variant '" +
                                variant + "'");
    }
    return variant_it->second;
}

SyntheticSuite generate_synthetic_suite(const GenSpec& spec) {
    if (spec.overlap < 0.0 || spec.overlap >= 1.0) {
        throw std::invalid_argument("overlap must be in [0, 1)");
    }
    if (spec.agents < 1 || spec.docs_per_agent < 1 || spec.questions_per_agent < 1) {
        throw std::invalid_argument("agents, docs, and questions must be >= 1");
    }

    std::mt19937_64 rng(spec.seed);
    std::set<std::string> taken;
    const auto shared_pool = make_vocabulary(rng, kSharedPoolSize, taken);
    std::vector<std::vector<std::string>> core;
    core.reserve(spec.agents);
    for (std::size_t i = 0; i < spec.agents; ++i) {
        core.push_back(make_vocabulary(rng, kCoreVocabSize, taken));
    }

    SyntheticSuite suite;
    for (std::size_t i = 0; i < spec.agents; ++i) {
        const DomainInfo info = domain_for_index(i);

        std::vector<std::vector<std::string>> doc_words(spec.docs_per_agent);
        for (std::size_t d = 0; d < spec.docs_per_agent; ++d) {
            std::set<std::string> used;
            auto& words = doc_words[d];
            while (words.size() < kDocWords) {
                const bool from_shared = spec.overlap > 0.0 && unit_draw(rng) < spec.overlap;
                const auto& pool = from_shared ? shared_pool : core[i];
                const auto& w = pool[rng() % pool.size()];
                if (used.insert(w).second) words.push_back(w);
            }
            char doc_id[64];
            std::snprintf(doc_id, sizeof(doc_id), "%s_doc_%03zu", info.agent_id.c_str(),
                          d);
            suite.corpus.push_back({info.agent_id, doc_id, join(words, " ")});
        }

        for (std::size_t q = 0; q < spec.questions_per_agent; ++q) {
            const auto& words = doc_words[q % spec.docs_per_agent];
            std::vector<std::size_t> order(words.size());
            for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
            for (std::size_t k = order.size(); k > 1; --k) {
                std::swap(order[k - 1], order[rng() % k]);
            }
            std::vector<std::string> picked;
            for (std::size_t k = 0; k < kQuestionWords && k < order.size(); ++k) {
                picked.push_back(words[order[k]]);
            }
            const auto& prefix = question_prefixes()[rng() % question_prefixes().size()];
            suite.testset.push_back({prefix + " " + join(picked, " "), info.agent_id});
        }
    }

    for (std::size_t i = 0; i < spec.agents; ++i) {
        const DomainInfo info = domain_for_index(i);
        const auto agent_docs = docs_of_agent(suite.corpus, info.agent_id);
        auto& slot = suite.descriptions.by_agent[info.agent_id];
        for (const auto variant : all_description_variants()) {
            const std::string text =
                variant.source == DescriptionSource::Generic
                    ? generic_description(info.domain, variant.length)
                    : fine_tuned_description(info.domain, agent_docs, variant.length);
            slot[variant_name(variant)] = text;
        }
    }
    return suite;
}

// --- file formats ------------------------------------------------------------

namespace {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
}

}  // namespace

std::vector<CorpusDoc> load_corpus_file(const std::filesystem::path& path) {
    std::vector<CorpusDoc> corpus;
    std::istringstream in(read_file(path));
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                                     ": " + e.what());
        }
        corpus.push_back({j.at("agent").get<std::string>(),
                          j.at("doc_id").get<std::string>(),
                          j.at("text").get<std::string>()});
    }
    return corpus;
}

void write_corpus_file(const std::filesystem::path& path,
                       std::span<const CorpusDoc> corpus) {
    std::ostringstream out;
    for (const auto& doc : corpus) {
        json j;
        j["agent"] = doc.agent;
        j["doc_id"] = doc.doc_id;
        j["text"] = doc.text;
        out << j.dump() << '\n';
    }
    write_file(path, out.str());
}

std::vector<TestCase> load_testset_file(const std::filesystem::path& path) {
    std::vector<TestCase> testset;
    std::istringstream in(read_file(path));
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                                     ": " + e.what());
        }
        testset.push_back({j.at("question").get<std::string>(),
                           j.at("expected_agent").get<std::string>()});
    }
    return testset;
}

void write_testset_file(const std::filesystem::path& path,
                        std::span<const TestCase> testset) {
    std::ostringstream out;
    for (const auto& tc : testset) {
        json j;
        j["question"] = tc.question;
        j["expected_agent"] = tc.expected_agent;
        out << j.dump() << '\n';
    }
    write_file(path, out.str());
}

DescriptionSet load_descriptions_file(const std::filesystem::path& path) {
    const json j = json::parse(read_file(path));
    DescriptionSet set;
    for (const auto& [agent_id, variants] : j.items()) {
        for (const auto& [variant, text] : variants.items()) {
            if (!variant_from_name(variant)) {
                throw std::runtime_error("unknown description variant '" + variant +
                                         "' for agent '" + agent_id + "'");
            }
            set.by_agent[agent_id][variant] = text.get<std::string>();
        }
    }
    return set;
}

void write_descriptions_file(const std::filesystem::path& path,
                             const DescriptionSet& descriptions) {
    json j = json::object();
    for (const auto& [agent_id, variants] : descriptions.by_agent) {
        for (const auto& [variant, text] : variants) {
            j[agent_id][variant] = text;
        }
    }
    write_file(path, j.dump(2) + "\n");
}

// --- config ------------------------------------------------------------------

BenchConfig config_from_json(std::string_view text) {
    const json j = json::parse(text);
    if (!j.contains("seed")) {
        throw std::invalid_argument("config requires an explicit \"seed\"");
    }
    BenchConfig cfg;
    cfg.seed = j.at("seed").get<std::uint64_t>();
    cfg.embedder.seed = cfg.seed;
    cfg.network.seed = cfg.seed;

    if (j.contains("tau")) cfg.router.tau = std::min(j.at("tau").get<double>(), 1.0);
    if (j.contains("theta_cache")) {
        cfg.router.cache.lookup_threshold = j.at("theta_cache").get<double>();
    }
    if (j.contains("theta_inv")) {
        cfg.router.cache.invalidation_threshold = j.at("theta_inv").get<double>();
    }
    if (j.contains("resolver")) {
        const auto r = resolver_from_name(j.at("resolver").get<std::string>());
        if (!r) {
            throw std::invalid_argument("unknown resolver: " +
                                        j.at("resolver").get<std::string>());
        }
        cfg.router.resolver = *r;
    }
    if (j.contains("deadline_ms")) {
        cfg.router.probe_deadline_ms = j.at("deadline_ms").get<std::int64_t>();
    }
    if (j.contains("embedder")) {
        const auto& e = j.at("embedder");
        if (e.contains("dimension")) {
            cfg.embedder.dimension = e.at("dimension").get<std::size_t>();
        }
        if (e.contains("seed")) cfg.embedder.seed = e.at("seed").get<std::uint64_t>();
    }
    if (j.contains("kb")) {
        const auto& k = j.at("kb");
        if (k.contains("ack_threshold")) {
            cfg.kb.ack_threshold = k.at("ack_threshold").get<double>();
        }
        if (k.contains("partial_threshold")) {
            cfg.kb.partial_threshold = k.at("partial_threshold").get<double>();
        }
        if (k.contains("top_k")) cfg.kb.top_k = k.at("top_k").get<std::size_t>();
    }
    if (j.contains("network")) {
        const auto& n = j.at("network");
        if (n.contains("base_ms")) cfg.network.base_ms = n.at("base_ms").get<std::int64_t>();
        if (n.contains("jitter_ms")) {
            cfg.network.jitter_ms = n.at("jitter_ms").get<std::int64_t>();
        }
        if (n.contains("seed")) cfg.network.seed = n.at("seed").get<std::uint64_t>();
        if (n.contains("drop_prob")) cfg.network.drop_prob = n.at("drop_prob").get<double>();
    }
    if (j.contains("variant")) {
        cfg.variant = j.at("variant").get<std::string>();
        if (!variant_from_name(cfg.variant)) {
            throw std::invalid_argument("unknown description variant: " + cfg.variant);
        }
    }
    if (j.contains("descriptions")) {
        cfg.descriptions_path = j.at("descriptions").get<std::string>();
    }
    if (j.contains("mode")) cfg.mode = j.at("mode").get<std::string>();
    if (j.contains("gen")) {
        const auto& g = j.at("gen");
        GenSpec gen;
        gen.seed = cfg.seed;
        if (g.contains("agents")) gen.agents = g.at("agents").get<std::size_t>();
        if (g.contains("docs")) gen.docs_per_agent = g.at("docs").get<std::size_t>();
        if (g.contains("questions")) {
            gen.questions_per_agent = g.at("questions").get<std::size_t>();
        }
        if (g.contains("overlap")) gen.overlap = g.at("overlap").get<double>();
        if (g.contains("seed")) gen.seed = g.at("seed").get<std::uint64_t>();
        cfg.gen = gen;
    }
    return cfg;
}

BenchConfig load_config_file(const std::filesystem::path& path) {
    return config_from_json(read_file(path));
}

std::string config_to_json(const BenchConfig& cfg) {
    json j;
    j["seed"] = cfg.seed;
    j["tau"] = cfg.router.tau;
    j["theta_cache"] = cfg.router.cache.lookup_threshold;
    j["theta_inv"] = cfg.router.cache.invalidation_threshold;
    j["resolver"] = resolver_name(cfg.router.resolver);
    j["deadline_ms"] = cfg.router.probe_deadline_ms;
    j["embedder"] = {{"dimension", cfg.embedder.dimension}, {"seed", cfg.embedder.seed}};
    j["kb"] = {{"ack_threshold", cfg.kb.ack_threshold},
               {"partial_threshold", cfg.kb.partial_threshold},
               {"top_k", cfg.kb.top_k}};
    j["network"] = {{"base_ms", cfg.network.base_ms},
                    {"jitter_ms", cfg.network.jitter_ms},
                    {"seed", cfg.network.seed},
                    {"drop_prob", cfg.network.drop_prob}};
    j["variant"] = cfg.variant;
    if (!cfg.descriptions_path.empty()) j["descriptions"] = cfg.descriptions_path;
    j["mode"] = cfg.mode;
    if (cfg.gen) {
        j["gen"] = {{"agents", cfg.gen->agents},
                    {"docs", cfg.gen->docs_per_agent},
                    {"questions", cfg.gen->questions_per_agent},
                    {"overlap", cfg.gen->overlap},
                    {"seed", cfg.gen->seed}};
    }
    return j.dump(2);
}

// --- running -----------------------------------------------------------------

std::string_view router_mode_name(RouterMode m) {
    switch (m) {
        case RouterMode::Baseline: return "baseline";
        case RouterMode::Kba: return "kba";
        case RouterMode::Oracle: return "oracle";
    }
    return "kba";
}

std::optional<RouterMode> router_mode_from_name(std::string_view name) {
    if (name == "baseline") return RouterMode::Baseline;
    if (name == "kba") return RouterMode::Kba;
    if (name == "oracle") return RouterMode::Oracle;
    return std::nullopt;
}

std::string_view cache_mode_name(CacheMode m) {
    return m == CacheMode::Cold ? "cold" : "warm";
}

std::optional<CacheMode> cache_mode_from_name(std::string_view name) {
    if (name == "cold") return CacheMode::Cold;
    if (name == "warm") return CacheMode::Warm;
    return std::nullopt;
}

BenchEnv::BenchEnv(std::span<const CorpusDoc> corpus,
                   const DescriptionSet* descriptions, const BenchConfig& cfg,
                   RouterMode mode, InteractiveChooser chooser)
    : mode_(mode) {
    agent_ids_ = agent_order(corpus);
    if (agent_ids_.empty()) {
        throw std::invalid_argument("corpus has no documents");
    }

    const CacheConfig agent_cache{cfg.router.cache.lookup_threshold, std::nullopt,
                                  cfg.router.cache.invalidation_threshold};
    AgentPool pool;
    for (const auto& agent_id : agent_ids_) {
        std::string description;
        DescriptionVariant variant;
        if (descriptions && !descriptions->empty()) {
            description = descriptions->find(agent_id, cfg.variant);
            variant = *variant_from_name(cfg.variant);
        } else {
            description = agent_id;
            std::replace(description.begin(), description.end(), '_', ' ');
        }
        AgentCard card{agent_id, description, variant};

        auto agent = std::make_unique<Agent>(card, cfg.embedder, cfg.kb, agent_cache,
                                             AclPolicy::allow_all());
        agent->set_clock([now = clock_now_] { return *now; });

        std::vector<std::pair<std::string, std::string>> docs;
        for (const auto& doc : corpus) {
            if (doc.agent == agent_id) docs.emplace_back(doc.doc_id, doc.text);
        }
        agent->ingest(docs);

        pool.add(std::move(card), agent.get());
        agents_.push_back(std::move(agent));
    }

    RouterConfig router = cfg.router;
    router.probing_enabled = (mode != RouterMode::Baseline);
    orchestrator_ = std::make_unique<Orchestrator>(
        std::move(pool), router, cfg.embedder,
        std::make_shared<LexicalOverlapClassifier>(), cfg.network,
        std::move(chooser));
}

void BenchEnv::reset_caches() {
    orchestrator_->cache().clear();
    orchestrator_->bus().reset();
    for (auto& agent : agents_) agent->clear_probe_cache();
}

void validate_testset(std::span<const TestCase> testset,
                      std::span<const std::string> agent_ids) {
    std::set<std::string> known(agent_ids.begin(), agent_ids.end());
    std::set<std::string> offenders;
    for (const auto& tc : testset) {
        if (!known.count(tc.expected_agent)) offenders.insert(tc.expected_agent);
    }
    if (!offenders.empty()) {
        std::string message = "test set references unknown agents:";
        for (const auto& name : offenders) message += " " + name;
        throw std::invalid_argument(message);
    }
}

RunReport make_report(std::vector<QuestionOutcome> outcomes,
                      std::span<const std::string> agent_ids) {
    RunReport report;
    report.confusion.labels.assign(agent_ids.begin(), agent_ids.end());
    report.confusion.labels.push_back("fail");
    const std::size_t n_agents = agent_ids.size();
    const std::size_t fail_col = n_agents;
    report.confusion.counts.assign(n_agents,
                                   std::vector<std::int64_t>(n_agents + 1, 0));

    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < n_agents; ++i) index[agent_ids[i]] = i;

    for (const auto& outcome : outcomes) {
        const auto row = index.find(outcome.expected);
        if (row == index.end()) continue;  // validate_testset prevents this
        std::size_t col = fail_col;
        if (outcome.routed) {
            const auto it = index.find(*outcome.routed);
            if (it != index.end()) col = it->second;
        }
        ++report.confusion.counts[row->second][col];
    }

    const double total = static_cast<double>(outcomes.size());
    double correct = 0.0;
    double w_precision = 0.0, w_recall = 0.0, w_f1 = 0.0;
    for (std::size_t c = 0; c < n_agents; ++c) {
        const double tp = static_cast<double>(report.confusion.counts[c][c]);
        double support = 0.0, predicted = 0.0;
        for (std::size_t k = 0; k <= n_agents; ++k) {
            support += static_cast<double>(report.confusion.counts[c][k]);
        }
        for (std::size_t r = 0; r < n_agents; ++r) {
            predicted += static_cast<double>(report.confusion.counts[r][c]);
        }
        correct += tp;
        if (support <= 0.0 || total <= 0.0) continue;
        const double weight = support / total;
        const double precision = predicted > 0.0 ? tp / predicted : 0.0;
        const double recall = tp / support;
        const double f1 =
            (precision + recall) > 0.0 ? 2.0 * precision * recall / (precision + recall)
                                       : 0.0;
        w_precision += weight * precision;
        w_recall += weight * recall;
        w_f1 += weight * f1;
    }
    report.accuracy = total > 0.0 ? correct / total : 0.0;
    report.weighted_precision = w_precision;
    report.weighted_recall = w_recall;
    report.weighted_f1 = w_f1;
    report.decisions = std::move(outcomes);
    return report;
}

RunReport run_benchmark(BenchEnv& env, std::span<const TestCase> testset,
                        CacheMode cache_mode) {
    validate_testset(testset, env.agent_ids());
    env.reset_caches();

    const int passes = cache_mode == CacheMode::Warm ? 2 : 1;
    std::vector<QuestionOutcome> outcomes;
    CostCounters totals;
    for (int pass = 0; pass < passes; ++pass) {
        outcomes.clear();
        totals = {};
        for (const auto& tc : testset) {
            QuestionOutcome outcome;
            outcome.question = tc.question;
            outcome.expected = tc.expected_agent;
            if (env.mode() == RouterMode::Oracle) {
                outcome.routed = tc.expected_agent;
                outcome.path = RoutePath::Direct;
            } else {
                const RoutingDecision decision =
                    env.orchestrator().route_request(tc.question, env.next_now());
                outcome.routed = decision.agent;
                outcome.path = decision.path;
                totals += decision.cost;
            }
            outcomes.push_back(std::move(outcome));
        }
    }

    RunReport report = make_report(std::move(outcomes), env.agent_ids());
    report.totals = totals;
    return report;
}

namespace {

json report_body_to_json(const RunReport& report) {
    json j;
    j["metrics"] = {{"accuracy", report.accuracy},
                    {"weighted_precision", report.weighted_precision},
                    {"weighted_recall", report.weighted_recall},
                    {"weighted_f1", report.weighted_f1}};
    j["totals"] = cost_to_json(report.totals);
    j["confusion"] = confusion_to_json(report.confusion);
    json decisions = json::array();
    for (const auto& d : report.decisions) {
        json row;
        row["question"] = d.question;
        row["expected"] = d.expected;
        if (d.routed) {
            row["routed"] = *d.routed;
        } else {
            row["routed"] = nullptr;
        }
        row["path"] = path_name(d.path);
        decisions.push_back(std::move(row));
    }
    j["decisions"] = std::move(decisions);
    return j;
}

}  // namespace

std::string report_to_json(const RunReport& report, const BenchConfig& cfg,
                           RouterMode mode, CacheMode cache_mode) {
    json j = report_body_to_json(report);
    j["mode"] = router_mode_name(mode);
    j["cache_mode"] = cache_mode_name(cache_mode);
    j["config"] = json::parse(config_to_json(cfg));
    return j.dump(2);
}

std::string confusion_to_csv(const ConfusionMatrix& confusion) {
    std::ostringstream out;
    out << "expected";
    for (const auto& label : confusion.labels) out << ',' << label;
    out << '\n';
    for (std::size_t r = 0; r < confusion.counts.size(); ++r) {
        out << confusion.labels[r];
        for (const auto count : confusion.counts[r]) out << ',' << count;
        out << '\n';
    }
    return out.str();
}

// --- sweeps ------------------------------------------------------------------

SweepResult sweep(const std::string& param, std::span<const std::string> values,
                  std::span<const CorpusDoc> corpus,
                  std::span<const TestCase> testset,
                  const DescriptionSet* descriptions, const BenchConfig& cfg,
                  RouterMode mode, CacheMode cache_mode) {
    if (values.empty()) {
        throw std::invalid_argument("sweep needs at least one value");
    }
    SweepResult result;
    result.param = param;
    for (const auto& value : values) {
        result.values.push_back(value);
        BenchConfig run_cfg = cfg;
        if (param == "tau") {
            run_cfg.router.tau = std::clamp(std::stod(value), 0.0, 1.0);
        } else if (param == "theta") {
            const double theta = std::stod(value);
            const double ratio = cfg.kb.partial_threshold / cfg.kb.ack_threshold;
            run_cfg.kb.ack_threshold = theta;
            run_cfg.kb.partial_threshold = theta * ratio;
        } else if (param == "theta_cache") {
            run_cfg.router.cache.lookup_threshold = std::stod(value);
        } else if (param == "description_variant") {
            if (!variant_from_name(value)) {
                throw std::invalid_argument("unknown description variant: " + value);
            }
            run_cfg.variant = value;
        } else if (param == "overlap") {
            if (!cfg.gen) {
                throw std::invalid_argument(
                    "overlap sweep requires a \"gen\" block in the config");
            }
        } else {
            throw std::invalid_argument(
                "unknown sweep parameter '" + param +
                "' (expected tau|theta|theta_cache|overlap|description_variant)");
        }

        if (param == "overlap") {
            GenSpec gen = *cfg.gen;
            gen.overlap = std::stod(value);
            const SyntheticSuite suite = generate_synthetic_suite(gen);
            BenchEnv env(suite.corpus, &suite.descriptions, run_cfg, mode);
            result.reports.push_back(run_benchmark(env, suite.testset, cache_mode));
        } else {
            BenchEnv env(corpus, descriptions, run_cfg, mode);
            result.reports.push_back(run_benchmark(env, testset, cache_mode));
        }
    }
    return result;
}

std::string sweep_to_json(const SweepResult& result, const BenchConfig& cfg,
                          RouterMode mode) {
    json j;
    j["param"] = result.param;
    j["values"] = result.values;
    j["mode"] = router_mode_name(mode);
    j["config"] = json::parse(config_to_json(cfg));
    json reports = json::array();
    for (const auto& report : result.reports) {
        reports.push_back(report_body_to_json(report));
    }
    j["reports"] = std::move(reports);
    return j.dump(2);
}

// --- calibration ---------------------------------------------------------------

CalibrationResult calibrate(std::span<const CorpusDoc> corpus,
                            const EmbedderSpec& embedder, std::uint64_t seed) {
    const auto agents = agent_order(corpus);
    if (agents.empty()) {
        throw std::invalid_argument("calibrate: corpus has no documents");
    }

    std::map<std::string, KnowledgeBase> kbs;
    for (const auto& agent_id : agents) {
        KnowledgeBase kb(embedder);
        std::vector<std::pair<std::string, std::string>> docs;
        for (const auto& doc : corpus) {
            if (doc.agent == agent_id) docs.emplace_back(doc.doc_id, doc.text);
        }
        kb.ingest(docs);
        kbs.emplace(agent_id, std::move(kb));
    }

    std::mt19937_64 rng(seed);
    std::vector<double> positives, negatives;
    for (const auto& doc : corpus) {
        auto tokens = tokenize(doc.text);
        if (tokens.empty()) continue;
        for (std::size_t k = tokens.size(); k > 1; --k) {
            std::swap(tokens[k - 1], tokens[rng() % k]);
        }
        const std::size_t take = std::max<std::size_t>(1, (tokens.size() * 3) / 5);
        tokens.resize(take);
        const Embedding query = embed(join(tokens, " "), embedder);

        for (const auto& [agent_id, kb] : kbs) {
            const double s_star = kb.search_embedding(query).s_star;
            if (agent_id == doc.agent) {
                positives.push_back(s_star);
            } else {
                negatives.push_back(s_star);
            }
        }
    }

    CalibrationResult result;
    result.positives = positives.size();
    result.negatives = negatives.size();
    result.positive_p05 = percentile(positives, 0.05);
    result.negative_p95 = percentile(std::move(negatives), 0.95);

    double ack = result.positive_p05 - 0.05;
    double partial = result.negative_p95 + 0.05;
    if (partial >= ack) {  // populations overlap; split the gap evenly
        const double mid = (result.positive_p05 + result.negative_p95) / 2.0;
        ack = mid;
        partial = mid / 2.0;
    }
    result.recommended.ack_threshold = std::clamp(ack, 0.02, 1.0);
    result.recommended.partial_threshold =
        std::clamp(partial, 0.01, result.recommended.ack_threshold - 0.01);
    return result;
}

std::string calibration_to_json(const CalibrationResult& result) {
    json j;
    j["recommended"] = {{"ack_threshold", result.recommended.ack_threshold},
                        {"partial_threshold", result.recommended.partial_threshold},
                        {"top_k", result.recommended.top_k}};
    j["positive_p05"] = result.positive_p05;
    j["negative_p95"] = result.negative_p95;
    j["positives"] = result.positives;
    j["negatives"] = result.negatives;
    return j.dump(2);
}

}  // namespace kba::bench
