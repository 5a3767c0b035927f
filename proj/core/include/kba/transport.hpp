#pragma once
// Simulated message layer. Probes fan out to all agents concurrently; each
// branch gets a latency drawn from a seeded model, and branches that exceed
// the deadline (or are dropped) surface as timeouts. Latency is simulated,
// so the same seed replays the same schedule regardless of host load.

#include <atomic>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "kba/probe.hpp"

namespace kba {

struct NetworkModel {
    std::int64_t base_ms = 0;
    std::int64_t jitter_ms = 0;    // uniform in [0, jitter_ms)
    std::uint64_t seed = 0;
    double drop_prob = 0.0;        // [0, 1); dropped probes never reach the agent
};

/// JSON form: {"base_ms": int, "jitter_ms": int, "seed": int, "drop_prob": float}
std::string to_json(const NetworkModel& model);
NetworkModel network_model_from_json(std::string_view text);

struct ProbeOutcome {
    std::optional<ProbeResponse> response;  // nullopt = timeout
    double latency_ms = 0.0;                // simulated; deadline when dropped

    bool timed_out() const { return !response.has_value(); }
};

struct FanOutResult {
    /// One outcome per agent, keyed by agent id; timeouts are values.
    std::map<std::string, ProbeOutcome> outcomes;
    /// Simulated completion of the join: max of branch latencies, capped at
    /// the deadline.
    double completion_ms = 0.0;

    std::size_t ok_count() const;
    std::size_t timeout_count() const;
};

/// In-process bus. Requests and responses cross the wire codec on every hop,
/// so agents and callers only ever exchange schema-conformant bytes.
class SimulatedBus {
  public:
    explicit SimulatedBus(NetworkModel model = {});

    /// Probe every agent in parallel under one shared deadline
    /// (req.deadline_ms). The result map always contains every agent.
    FanOutResult parallel_probe(const ProbeRequest& req,
                                std::span<Prober* const> agents);

    const NetworkModel& model() const { return model_; }

    /// Restart the latency/drop sequence from the seed.
    void reset() { call_seq_.store(0); }

  private:
    NetworkModel model_;
    std::atomic<std::uint64_t> call_seq_{0};
};

}  // namespace kba
