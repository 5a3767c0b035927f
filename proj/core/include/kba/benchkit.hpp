#pragma once
// Benchmark harness: seeded synthetic corpora with a controllable vocabulary
// overlap, description variants on the length x content-source grid,
// baseline-vs-KBA runs over cold and warm caches, classification metrics
// with a confusion matrix, parameter sweeps, and an ack-threshold
// calibration sweep. Reports are machine-readable JSON.

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kba/agent.hpp"
#include "kba/orchestrator.hpp"

namespace kba::bench {

struct TestCase {
    std::string question;
    std::string expected_agent;
};

struct CorpusDoc {
    std::string agent;
    std::string doc_id;
    std::string text;
};

/// agent_id -> variant name ("basic_generic", ...) -> description text.
struct DescriptionSet {
    std::map<std::string, std::map<std::string, std::string>> by_agent;

    const std::string& find(const std::string& agent_id,
                            const std::string& variant) const;
    bool empty() const { return by_agent.empty(); }
};

struct GenSpec {
    std::size_t agents = 7;
    std::size_t docs_per_agent = 20;
    std::size_t questions_per_agent = 20;
    double overlap = 0.0;  // shared-vocabulary fraction, [0, 1)
    std::uint64_t seed = 0;
};

struct SyntheticSuite {
    std::vector<CorpusDoc> corpus;
    std::vector<TestCase> testset;
    DescriptionSet descriptions;
};

/// Deterministic synthetic environment: per-agent disjoint core vocabularies
/// plus a shared pool mixed in at the overlap rate; each question paraphrases
/// exactly one document, so exactly one agent's KB can answer it; six
/// description variants per agent (basic/balanced/detailed x
/// generic/fine-tuned, the fine-tuned ones summarizing that agent's actual
/// documents). Same spec + seed, same bytes.
SyntheticSuite generate_synthetic_suite(const GenSpec& spec);

// --- file formats -----------------------------------------------------------

/// Corpus: JSONL, {"agent": str, "doc_id": str, "text": str} per line.
std::vector<CorpusDoc> load_corpus_file(const std::filesystem::path& path);
void write_corpus_file(const std::filesystem::path& path,
                       std::span<const CorpusDoc> corpus);

/// Test set: JSONL, {"question": str, "expected_agent": str} per line.
std::vector<TestCase> load_testset_file(const std::filesystem::path& path);
void write_testset_file(const std::filesystem::path& path,
                        std::span<const TestCase> testset);

/// Descriptions: one JSON object, agent_id -> variant -> text.
DescriptionSet load_descriptions_file(const std::filesystem::path& path);
void write_descriptions_file(const std::filesystem::path& path,
                             const DescriptionSet& descriptions);

/// Run configuration. `seed` is mandatory in config files; everything else
/// has defaults. The router fields use the normative RouterConfig JSON names.
struct BenchConfig {
    std::uint64_t seed = 0;
    EmbedderSpec embedder{256, 0};
    RouterConfig router;
    KbConfig kb;
    NetworkModel network{20, 10, 0, 0.0};
    std::string variant = "basic_generic";
    std::string descriptions_path;  // empty: look next to the corpus file
    std::string mode = "kba";
    std::optional<GenSpec> gen;  // enables overlap sweeps
};

BenchConfig config_from_json(std::string_view text);
BenchConfig load_config_file(const std::filesystem::path& path);
std::string config_to_json(const BenchConfig& cfg);

// --- running ----------------------------------------------------------------

enum class RouterMode { Baseline, Kba, Oracle };
enum class CacheMode { Cold, Warm };

std::string_view router_mode_name(RouterMode m);
std::optional<RouterMode> router_mode_from_name(std::string_view name);
std::string_view cache_mode_name(CacheMode m);
std::optional<CacheMode> cache_mode_from_name(std::string_view name);

struct QuestionOutcome {
    std::string question;
    std::string expected;
    std::optional<std::string> routed;  // nullopt = Fail
    RoutePath path = RoutePath::Failed;
};

/// Rows: expected agent (pool order). Columns: agents in pool order plus a
/// final "fail" column for routing failures.
struct ConfusionMatrix {
    std::vector<std::string> labels;
    std::vector<std::vector<std::int64_t>> counts;
};

struct RunReport {
    std::vector<QuestionOutcome> decisions;
    double accuracy = 0.0;
    double weighted_precision = 0.0;
    double weighted_recall = 0.0;
    double weighted_f1 = 0.0;
    ConfusionMatrix confusion;
    CostCounters totals;
};

/// Compute metrics from per-question outcomes. `agent_ids` fixes label order.
RunReport make_report(std::vector<QuestionOutcome> outcomes,
                      std::span<const std::string> agent_ids);

/// Agents with ingested KBs plus the orchestrator wired over them, sharing
/// one embedder spec and one injected simulated clock.
class BenchEnv {
  public:
    BenchEnv(std::span<const CorpusDoc> corpus, const DescriptionSet* descriptions,
             const BenchConfig& cfg, RouterMode mode,
             InteractiveChooser chooser = nullptr);

    Orchestrator& orchestrator() { return *orchestrator_; }
    RouterMode mode() const { return mode_; }
    std::span<const std::string> agent_ids() const { return agent_ids_; }

    void reset_caches();
    double next_now() { return now_ += 1.0; }

  private:
    RouterMode mode_;
    std::vector<std::unique_ptr<Agent>> agents_;
    std::vector<std::string> agent_ids_;
    std::unique_ptr<Orchestrator> orchestrator_;
    std::shared_ptr<double> clock_now_ = std::make_shared<double>(0.0);
    double now_ = 0.0;
};

/// Throws when a test case names an agent missing from `agent_ids`,
/// listing every offender.
void validate_testset(std::span<const TestCase> testset,
                      std::span<const std::string> agent_ids);

/// Route every question and tally. Cold clears all caches and runs once;
/// warm clears, runs the suite twice, and reports the second pass.
RunReport run_benchmark(BenchEnv& env, std::span<const TestCase> testset,
                        CacheMode cache_mode);

std::string report_to_json(const RunReport& report, const BenchConfig& cfg,
                           RouterMode mode, CacheMode cache_mode);
std::string confusion_to_csv(const ConfusionMatrix& confusion);

// --- sweeps -----------------------------------------------------------------

struct SweepResult {
    std::string param;
    std::vector<std::string> values;
    std::vector<RunReport> reports;
};

/// param is one of "tau", "theta", "theta_cache", "overlap",
/// "description_variant". Seeds stay fixed across runs; each value gets a
/// fresh environment. "overlap" regenerates the suite and requires cfg.gen.
SweepResult sweep(const std::string& param, std::span<const std::string> values,
                  std::span<const CorpusDoc> corpus,
                  std::span<const TestCase> testset,
                  const DescriptionSet* descriptions, const BenchConfig& cfg,
                  RouterMode mode, CacheMode cache_mode = CacheMode::Cold);

std::string sweep_to_json(const SweepResult& result, const BenchConfig& cfg,
                          RouterMode mode);

// --- calibration ------------------------------------------------------------

struct CalibrationResult {
    KbConfig recommended;
    double positive_p05 = 0.0;  // in-KB pseudo-query similarity floor
    double negative_p95 = 0.0;  // cross-KB similarity ceiling
    std::size_t positives = 0;
    std::size_t negatives = 0;
};

/// Sweep ack/partial thresholds against pseudo-queries sampled from each
/// document: positives score against the owning KB, negatives against every
/// other KB. Recommends a band separating the two populations.
CalibrationResult calibrate(std::span<const CorpusDoc> corpus,
                            const EmbedderSpec& embedder, std::uint64_t seed);

std::string calibration_to_json(const CalibrationResult& result);

}  // namespace kba::bench
