// kba: synthetic suite generation, benchmark runs, parameter sweeps,
// ack-threshold calibration, and one-shot routing from the command line.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "kba/benchkit.hpp"

namespace fs = std::filesystem;
using namespace kba;
using namespace kba::bench;

namespace {

void write_text(const fs::path& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
}

std::vector<std::string> split_csv(const std::string& csv) {
    std::vector<std::string> values;
    std::string item;
    std::istringstream in(csv);
    while (std::getline(in, item, ',')) {
        if (!item.empty()) values.push_back(item);
    }
    return values;
}

/// Resolve the description set for a run: explicit config path first
/// (relative to the config file), then descriptions.json next to the corpus.
std::optional<DescriptionSet> find_descriptions(const BenchConfig& cfg,
                                                const fs::path& config_path,
                                                const fs::path& corpus_path) {
    if (!cfg.descriptions_path.empty()) {
        fs::path p = cfg.descriptions_path;
        if (p.is_relative()) p = config_path.parent_path() / p;
        return load_descriptions_file(p);
    }
    const fs::path sibling = corpus_path.parent_path() / "descriptions.json";
    if (fs::exists(sibling)) return load_descriptions_file(sibling);
    return std::nullopt;
}

RouterMode parse_mode(const std::string& name) {
    const auto mode = router_mode_from_name(name);
    if (!mode) throw std::runtime_error("unknown mode: " + name);
    return *mode;
}

InteractiveChooser stdin_chooser() {
    return [](const std::vector<CapableAgent>& capable)
               -> std::optional<std::string> {
        std::cerr << "multiple agents can handle this request:\n";
        for (std::size_t i = 0; i < capable.size(); ++i) {
            std::cerr << "  " << (i + 1) << ") " << capable[i].agent_id;
            if (capable[i].confidence) {
                std::cerr << " (confidence " << *capable[i].confidence << ")";
            }
            std::cerr << "\n";
        }
        std::cerr << "choose [1-" << capable.size() << " or agent id]: " << std::flush;
        std::string line;
        if (!std::getline(std::cin, line)) return std::nullopt;
        try {
            const std::size_t index = std::stoul(line);
            if (index >= 1 && index <= capable.size()) {
                return capable[index - 1].agent_id;
            }
        } catch (...) {
        }
        for (const auto& c : capable) {
            if (c.agent_id == line) return c.agent_id;
        }
        return std::nullopt;
    };
}

void print_run_summary(const RunReport& report, RouterMode mode, CacheMode cache) {
    std::cout << "mode=" << router_mode_name(mode)
              << " cache=" << cache_mode_name(cache) << " accuracy=" << report.accuracy
              << " weighted_f1=" << report.weighted_f1
              << " probes=" << report.totals.probes_sent
              << " cache_hits=" << report.totals.cache_hits
              << " wall_ms=" << report.totals.wall_time_ms << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Knowledge base-aware multi-agent router and benchmark harness"};
    app.require_subcommand(1);

    // gen -------------------------------------------------------------------
    auto* gen_cmd = app.add_subcommand(
        "gen", "Generate a seeded synthetic corpus, test set, and descriptions");
    std::size_t gen_agents = 7, gen_docs = 20, gen_questions = 20;
    double gen_overlap = 0.3;
    std::uint64_t gen_seed = 0;
    std::string gen_out;
    gen_cmd->add_option("--agents", gen_agents, "Number of agents");
    gen_cmd->add_option("--docs", gen_docs, "Documents per agent");
    gen_cmd->add_option("--questions", gen_questions, "Questions per agent");
    gen_cmd->add_option("--overlap", gen_overlap, "Shared-vocabulary fraction [0,1)");
    gen_cmd->add_option("--seed", gen_seed, "Generator seed")->required();
    gen_cmd->add_option("--out", gen_out, "Output directory")->required();

    // run -------------------------------------------------------------------
    auto* run_cmd = app.add_subcommand("run", "Run a benchmark over a test set");
    std::string run_corpus, run_testset, run_mode = "kba", run_config;
    std::string run_cache = "cold", run_report, run_confusion_csv;
    run_cmd->add_option("--corpus", run_corpus, "Corpus JSONL")->required();
    run_cmd->add_option("--testset", run_testset, "Test set JSONL")->required();
    run_cmd->add_option("--mode", run_mode, "baseline|kba");
    run_cmd->add_option("--config", run_config, "Run config JSON")->required();
    run_cmd->add_option("--cache", run_cache, "cold|warm");
    run_cmd->add_option("--report", run_report, "Report JSON output path");
    run_cmd->add_option("--confusion-csv", run_confusion_csv,
                        "Optional confusion matrix CSV output path");

    // sweep -----------------------------------------------------------------
    auto* sweep_cmd = app.add_subcommand("sweep", "Run one benchmark per value");
    std::string sweep_param, sweep_values, sweep_corpus, sweep_testset;
    std::string sweep_config, sweep_report, sweep_mode;
    sweep_cmd
        ->add_option("--param", sweep_param,
                     "tau|theta|theta_cache|overlap|description_variant")
        ->required();
    sweep_cmd->add_option("--values", sweep_values, "Comma-separated values")
        ->required();
    sweep_cmd->add_option("--corpus", sweep_corpus, "Corpus JSONL");
    sweep_cmd->add_option("--testset", sweep_testset, "Test set JSONL");
    sweep_cmd->add_option("--config", sweep_config, "Run config JSON")->required();
    sweep_cmd->add_option("--report", sweep_report, "Report JSON output path");
    sweep_cmd->add_option("--mode", sweep_mode, "baseline|kba (default from config)");

    // calibrate ---------------------------------------------------------------
    auto* cal_cmd = app.add_subcommand(
        "calibrate", "Sweep ack/partial thresholds for a corpus");
    std::string cal_corpus;
    std::uint64_t cal_seed = 0;
    std::size_t cal_dimension = 256;
    cal_cmd->add_option("--corpus", cal_corpus, "Corpus JSONL")->required();
    cal_cmd->add_option("--seed", cal_seed, "Pseudo-query sampling seed")->required();
    cal_cmd->add_option("--dimension", cal_dimension, "Embedding dimension");

    // route -------------------------------------------------------------------
    auto* route_cmd = app.add_subcommand("route", "Route a single query");
    std::string route_corpus, route_config, route_query;
    bool route_interactive = false;
    route_cmd->add_option("--corpus", route_corpus, "Corpus JSONL")->required();
    route_cmd->add_option("--config", route_config, "Run config JSON")->required();
    route_cmd->add_option("--query", route_query, "Query text")->required();
    route_cmd->add_flag("--interactive", route_interactive,
                        "Resolve ambiguity via an interactive prompt");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen_cmd->parsed()) {
            GenSpec spec;
            spec.agents = gen_agents;
            spec.docs_per_agent = gen_docs;
            spec.questions_per_agent = gen_questions;
            spec.overlap = gen_overlap;
            spec.seed = gen_seed;
            const SyntheticSuite suite = generate_synthetic_suite(spec);

            const fs::path out_dir(gen_out);
            fs::create_directories(out_dir);
            write_corpus_file(out_dir / "corpus.jsonl", suite.corpus);
            write_testset_file(out_dir / "testset.jsonl", suite.testset);
            write_descriptions_file(out_dir / "descriptions.json", suite.descriptions);

            BenchConfig cfg;
            cfg.seed = gen_seed;
            cfg.embedder.seed = gen_seed;
            cfg.network.seed = gen_seed;
            cfg.descriptions_path = "descriptions.json";
            cfg.gen = spec;
            write_text(out_dir / "config.json", config_to_json(cfg) + "\n");

            std::cout << "wrote " << suite.corpus.size() << " documents, "
                      << suite.testset.size() << " questions, "
                      << suite.descriptions.by_agent.size()
                      << " description sets to " << out_dir.string() << "\n";
        } else if (run_cmd->parsed()) {
            const BenchConfig cfg = load_config_file(run_config);
            const auto corpus = load_corpus_file(run_corpus);
            const auto testset = load_testset_file(run_testset);
            const auto descriptions = find_descriptions(cfg, run_config, run_corpus);

            const RouterMode mode = parse_mode(run_mode);
            const auto cache = cache_mode_from_name(run_cache);
            if (!cache) throw std::runtime_error("unknown cache mode: " + run_cache);

            BenchEnv env(corpus, descriptions ? &*descriptions : nullptr, cfg, mode);
            const RunReport report = run_benchmark(env, testset, *cache);

            if (!run_report.empty()) {
                write_text(run_report, report_to_json(report, cfg, mode, *cache) + "\n");
            }
            if (!run_confusion_csv.empty()) {
                write_text(run_confusion_csv, confusion_to_csv(report.confusion));
            }
            print_run_summary(report, mode, *cache);
        } else if (sweep_cmd->parsed()) {
            const BenchConfig cfg = load_config_file(sweep_config);
            const RouterMode mode =
                parse_mode(sweep_mode.empty() ? cfg.mode : sweep_mode);
            const auto values = split_csv(sweep_values);

            std::vector<CorpusDoc> corpus;
            std::vector<TestCase> testset;
            std::optional<DescriptionSet> descriptions;
            if (sweep_param != "overlap") {
                if (sweep_corpus.empty() || sweep_testset.empty()) {
                    throw std::runtime_error(
                        "sweep over " + sweep_param + " needs --corpus and --testset");
                }
                corpus = load_corpus_file(sweep_corpus);
                testset = load_testset_file(sweep_testset);
                descriptions = find_descriptions(cfg, sweep_config, sweep_corpus);
            }

            const SweepResult result =
                sweep(sweep_param, values, corpus, testset,
                      descriptions ? &*descriptions : nullptr, cfg, mode);
            if (!sweep_report.empty()) {
                write_text(sweep_report, sweep_to_json(result, cfg, mode) + "\n");
            }
            for (std::size_t i = 0; i < result.values.size(); ++i) {
                std::cout << sweep_param << "=" << result.values[i]
                          << " accuracy=" << result.reports[i].accuracy
                          << " weighted_f1=" << result.reports[i].weighted_f1
                          << " probes=" << result.reports[i].totals.probes_sent
                          << "\n";
            }
        } else if (cal_cmd->parsed()) {
            const auto corpus = load_corpus_file(cal_corpus);
            const EmbedderSpec spec{cal_dimension, cal_seed};
            const CalibrationResult result = calibrate(corpus, spec, cal_seed);
            std::cout << calibration_to_json(result) << "\n";
        } else if (route_cmd->parsed()) {
            BenchConfig cfg = load_config_file(route_config);
            if (route_interactive) {
                cfg.router.resolver = ResolverPolicy::InteractivePrompt;
            }
            const auto corpus = load_corpus_file(route_corpus);
            const auto descriptions = find_descriptions(cfg, route_config, route_corpus);

            const RouterMode mode =
                cfg.mode == "baseline" ? RouterMode::Baseline : RouterMode::Kba;
            BenchEnv env(corpus, descriptions ? &*descriptions : nullptr, cfg, mode,
                         route_interactive ? stdin_chooser() : nullptr);
            const RoutingDecision d =
                env.orchestrator().route_request(route_query, env.next_now());

            nlohmann::json j;
            j["query"] = route_query;
            if (d.agent) {
                j["agent"] = *d.agent;
            } else {
                j["agent"] = nullptr;
                j["failure"] = d.failure;
            }
            j["path"] = path_name(d.path);
            j["capable"] = d.capable_set;
            j["partial_only"] = d.partial_only;
            j["resolver_fallback"] = d.resolver_fallback;
            j["cost"] = {{"classifier_calls", d.cost.classifier_calls},
                         {"probes_sent", d.cost.probes_sent},
                         {"cache_hits", d.cost.cache_hits},
                         {"simulated_input_tokens", d.cost.simulated_input_tokens},
                         {"simulated_output_tokens", d.cost.simulated_output_tokens},
                         {"wall_time_ms", d.cost.wall_time_ms}};
            std::cout << j.dump(2) << "\n";
            return d.failed() ? 2 : 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
