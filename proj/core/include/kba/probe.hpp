#pragma once
// Probe protocol types shared by agents, the orchestrator, and the transport.
// A probe asks an agent "can your knowledge base handle this query?" and the
// agent answers with a lightweight verdict only: no document content ever
// rides along with the acknowledgment.

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace kba {

enum class Verdict {
    Ok,
    Partial,
    Ko,
    NotAuthorized,
};

/// Wire spelling: "OK" | "PARTIAL" | "KO" | "NOT_AUTHORIZED".
std::string_view verdict_name(Verdict v);
std::optional<Verdict> verdict_from_name(std::string_view name);

struct ProbeRequest {
    std::string query;
    std::string requestor_id;
    std::int64_t deadline_ms = 1000;  // must be > 0
};

struct ProbeResponse {
    std::string agent_id;
    Verdict verdict = Verdict::Ko;
    /// s_star clamped to [0, 1]; absent for NotAuthorized and for verdicts
    /// replayed from the agent-side cache (no retrieval ran).
    std::optional<double> confidence;
};

/// Per-agent authorization: either everyone, or an explicit requestor set.
class AclPolicy {
  public:
    static AclPolicy allow_all() { return AclPolicy(true, {}); }
    static AclPolicy allow_only(std::vector<std::string> requestors);

    bool is_authorized(std::string_view requestor) const;

  private:
    AclPolicy(bool open, std::set<std::string, std::less<>> allowed)
        : open_(open), allowed_(std::move(allowed)) {}

    bool open_;
    std::set<std::string, std::less<>> allowed_;
};

/// Anything that can answer a probe: a leaf agent, a composite of agents, or
/// a test double.
class Prober {
  public:
    virtual ~Prober() = default;
    virtual const std::string& agent_id() const = 0;
    virtual ProbeResponse handle_probe(const ProbeRequest& req) = 0;
};

}  // namespace kba
