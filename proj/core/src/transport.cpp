#include "kba/transport.hpp"

#include <algorithm>
#include <future>
#include <stdexcept>
#include <vector>

#include "json.hpp"

#include "kba/wire.hpp"

namespace kba {

namespace {

std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

double unit_double(std::uint64_t x) {
    return static_cast<double>(x >> 11) * 0x1.0p-53;
}

}  // namespace

std::string to_json(const NetworkModel& model) {
    nlohmann::json j;
    j["base_ms"] = model.base_ms;
    j["jitter_ms"] = model.jitter_ms;
    j["seed"] = model.seed;
    j["drop_prob"] = model.drop_prob;
    return j.dump();
}

NetworkModel network_model_from_json(std::string_view text) {
    const auto j = nlohmann::json::parse(text);
    NetworkModel model;
    model.base_ms = j.at("base_ms").get<std::int64_t>();
    model.jitter_ms = j.at("jitter_ms").get<std::int64_t>();
    model.seed = j.at("seed").get<std::uint64_t>();
    model.drop_prob = j.at("drop_prob").get<double>();
    if (model.base_ms < 0 || model.jitter_ms < 0) {
        throw std::invalid_argument("network latency must be non-negative");
    }
    if (model.drop_prob < 0.0 || model.drop_prob > 1.0) {
        throw std::invalid_argument("drop_prob must be in [0, 1]");
    }
    return model;
}

std::size_t FanOutResult::ok_count() const {
    std::size_t n = 0;
    for (const auto& [id, outcome] : outcomes) {
        if (!outcome.timed_out()) ++n;
    }
    return n;
}

std::size_t FanOutResult::timeout_count() const {
    return outcomes.size() - ok_count();
}

SimulatedBus::SimulatedBus(NetworkModel model) : model_(model) {
    if (model_.drop_prob < 0.0 || model_.drop_prob > 1.0) {
        throw std::invalid_argument("drop_prob must be in [0, 1]");
    }
    if (model_.base_ms < 0 || model_.jitter_ms < 0) {
        throw std::invalid_argument("network latency must be non-negative");
    }
}

FanOutResult SimulatedBus::parallel_probe(const ProbeRequest& req,
                                          std::span<Prober* const> agents) {
    if (agents.empty()) {
        throw std::invalid_argument("parallel_probe: need at least one agent");
    }
    if (req.deadline_ms <= 0) {
        throw std::invalid_argument("parallel_probe: deadline must be > 0");
    }
    const double deadline = static_cast<double>(req.deadline_ms);
    const std::uint64_t seq = call_seq_.fetch_add(1);
    const std::string request_bytes = encode_probe_request(req);

    struct Branch {
        Prober* agent;
        double latency;
        bool dropped;
        std::future<std::string> response_bytes;
    };
    std::vector<Branch> branches;
    branches.reserve(agents.size());

    for (std::size_t i = 0; i < agents.size(); ++i) {
        const std::uint64_t h = mix64(model_.seed ^ mix64(seq ^ mix64(i)));
        const bool dropped = unit_double(h) < model_.drop_prob;
        const double jitter =
            model_.jitter_ms > 0
                ? unit_double(mix64(h)) * static_cast<double>(model_.jitter_ms)
                : 0.0;
        const double latency = static_cast<double>(model_.base_ms) + jitter;

        Branch branch{agents[i], latency, dropped, {}};
        if (!dropped) {
            branch.response_bytes =
                std::async(std::launch::async, [agent = agents[i], request_bytes] {
                    const ProbeRequest decoded = decode_probe_request(request_bytes);
                    return encode_probe_response(agent->handle_probe(decoded));
                });
        }
        branches.push_back(std::move(branch));
    }

    FanOutResult result;
    double slowest = 0.0;
    for (auto& branch : branches) {
        ProbeOutcome outcome;
        if (branch.dropped) {
            outcome.latency_ms = deadline;
            slowest = std::max(slowest, deadline);
        } else {
            const std::string bytes = branch.response_bytes.get();
            outcome.latency_ms = branch.latency;
            slowest = std::max(slowest, branch.latency);
            if (branch.latency <= deadline) {
                outcome.response = decode_probe_response(bytes);
            }
            // late responses are discarded: the agent ran, the caller moved on
        }
        result.outcomes.emplace(branch.agent->agent_id(), std::move(outcome));
    }
    if (result.outcomes.size() != agents.size()) {
        throw std::invalid_argument("parallel_probe: duplicate agent ids in pool");
    }
    result.completion_ms = std::min(slowest, deadline);
    return result;
}

}  // namespace kba
