#pragma once
// Canonical JSON wire encoding for probe messages (sorted keys, no
// insignificant whitespace). Decoding is strict: unknown fields, unknown
// verdict spellings, missing fields, and out-of-range values are all
// rejected with the offending field named.
//
//   request:  {"deadline_ms":int,"query":str,"requestor":str,"type":"probe"}
//   response: {"agent_id":str,"confidence":float|null,"type":"ack",
//              "verdict":"OK"|"PARTIAL"|"KO"|"NOT_AUTHORIZED"}

#include <stdexcept>
#include <string>
#include <string_view>

#include "kba/probe.hpp"

namespace kba {

class WireError : public std::runtime_error {
  public:
    WireError(std::string field, const std::string& message)
        : std::runtime_error(message), field_(std::move(field)) {}

    /// Name of the failing field; "json" when the document itself is malformed.
    const std::string& field() const { return field_; }

  private:
    std::string field_;
};

std::string encode_probe_request(const ProbeRequest& req);
ProbeRequest decode_probe_request(std::string_view bytes);

std::string encode_probe_response(const ProbeResponse& resp);
ProbeResponse decode_probe_response(std::string_view bytes);

}  // namespace kba
