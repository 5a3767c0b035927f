#include "kba/wire.hpp"

#include <initializer_list>

#include "json.hpp"

namespace kba {

namespace {

using json = nlohmann::json;

json parse_or_throw(std::string_view bytes) {
    json j = json::parse(bytes, nullptr, false);
    if (j.is_discarded()) throw WireError("json", "malformed JSON document");
    if (!j.is_object()) throw WireError("json", "top-level value must be an object");
    return j;
}

void reject_unknown_fields(const json& j, std::initializer_list<std::string_view> known) {
    for (const auto& item : j.items()) {
        bool ok = false;
        for (auto k : known) {
            if (item.key() == k) {
                ok = true;
                break;
            }
        }
        if (!ok) throw WireError(item.key(), "unknown field '" + item.key() + "'");
    }
}

const json& require_field(const json& j, const char* name) {
    auto it = j.find(name);
    if (it == j.end()) {
        throw WireError(name, std::string("missing field '") + name + "'");
    }
    return *it;
}

std::string require_string(const json& j, const char* name) {
    const json& v = require_field(j, name);
    if (!v.is_string()) {
        throw WireError(name, std::string("field '") + name + "' must be a string");
    }
    return v.get<std::string>();
}

}  // namespace

std::string encode_probe_request(const ProbeRequest& req) {
    if (req.deadline_ms <= 0) {
        throw WireError("deadline_ms", "deadline_ms must be > 0");
    }
    json j;
    j["type"] = "probe";
    j["query"] = req.query;
    j["requestor"] = req.requestor_id;
    j["deadline_ms"] = req.deadline_ms;
    return j.dump();
}

ProbeRequest decode_probe_request(std::string_view bytes) {
    const json j = parse_or_throw(bytes);
    reject_unknown_fields(j, {"type", "query", "requestor", "deadline_ms"});

    if (require_string(j, "type") != "probe") {
        throw WireError("type", "type must be \"probe\"");
    }
    ProbeRequest req;
    req.query = require_string(j, "query");
    req.requestor_id = require_string(j, "requestor");
    const json& deadline = require_field(j, "deadline_ms");
    if (!deadline.is_number_integer()) {
        throw WireError("deadline_ms", "deadline_ms must be an integer");
    }
    req.deadline_ms = deadline.get<std::int64_t>();
    if (req.deadline_ms <= 0) {
        throw WireError("deadline_ms", "deadline_ms must be > 0");
    }
    return req;
}

std::string encode_probe_response(const ProbeResponse& resp) {
    if (resp.verdict == Verdict::NotAuthorized && resp.confidence) {
        throw WireError("confidence", "NOT_AUTHORIZED carries no confidence");
    }
    if (resp.confidence && (*resp.confidence < 0.0 || *resp.confidence > 1.0)) {
        throw WireError("confidence", "confidence must be in [0, 1]");
    }
    json j;
    j["type"] = "ack";
    j["agent_id"] = resp.agent_id;
    j["verdict"] = verdict_name(resp.verdict);
    if (resp.confidence) {
        j["confidence"] = *resp.confidence;
    } else {
        j["confidence"] = nullptr;
    }
    return j.dump();
}

ProbeResponse decode_probe_response(std::string_view bytes) {
    const json j = parse_or_throw(bytes);
    reject_unknown_fields(j, {"type", "agent_id", "verdict", "confidence"});

    if (require_string(j, "type") != "ack") {
        throw WireError("type", "type must be \"ack\"");
    }
    ProbeResponse resp;
    resp.agent_id = require_string(j, "agent_id");

    const std::string verdict = require_string(j, "verdict");
    const auto parsed = verdict_from_name(verdict);
    if (!parsed) {
        throw WireError("verdict", "unknown verdict '" + verdict + "'");
    }
    resp.verdict = *parsed;

    const json& confidence = require_field(j, "confidence");
    if (confidence.is_null()) {
        resp.confidence = std::nullopt;
    } else if (confidence.is_number()) {
        const double value = confidence.get<double>();
        if (value < 0.0 || value > 1.0) {
            throw WireError("confidence", "confidence must be in [0, 1]");
        }
        resp.confidence = value;
    } else {
        throw WireError("confidence", "confidence must be a number or null");
    }
    if (resp.verdict == Verdict::NotAuthorized && resp.confidence) {
        throw WireError("confidence", "NOT_AUTHORIZED carries no confidence");
    }
    return resp;
}

}  // namespace kba
