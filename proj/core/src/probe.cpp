#include "kba/probe.hpp"

namespace kba {

std::string_view verdict_name(Verdict v) {
    switch (v) {
        case Verdict::Ok: return "OK";
        case Verdict::Partial: return "PARTIAL";
        case Verdict::Ko: return "KO";
        case Verdict::NotAuthorized: return "NOT_AUTHORIZED";
    }
    return "KO";
}

std::optional<Verdict> verdict_from_name(std::string_view name) {
    if (name == "OK") return Verdict::Ok;
    if (name == "PARTIAL") return Verdict::Partial;
    if (name == "KO") return Verdict::Ko;
    if (name == "NOT_AUTHORIZED") return Verdict::NotAuthorized;
    return std::nullopt;
}

AclPolicy AclPolicy::allow_only(std::vector<std::string> requestors) {
    std::set<std::string, std::less<>> allowed;
    for (auto& r : requestors) allowed.insert(std::move(r));
    return AclPolicy(false, std::move(allowed));
}

bool AclPolicy::is_authorized(std::string_view requestor) const {
    return open_ || allowed_.find(requestor) != allowed_.end();
}

}  // namespace kba
