#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "octerm/approx.hpp"
#include "octerm/oracle.hpp"

namespace octerm {

using Json = nlohmann::ordered_json;

/// Version tag written into every document.
inline constexpr const char* kSchemaVersion = "1";

Json to_json(const Rational& value);
Json to_json(const std::vector<Diagnostic>& diagnostics);
Json to_json(const OcSsg& model, const CounterlessStrategy& strategy);
Json to_json(const OcSsg& model, const LiminfResult& result);
Json to_json(const Certificate& cert);
Json to_json(const DecayCertificate& cert);
Json to_json(const OcSsg& model, const TailBound& bound, const Rational& epsilon);
Json to_json(const OcSsg& model, const ModeSwitchStrategy& strategy);
Json to_json(const OcSsg& model, const ApproxReport& report);
Json to_json(const OcSsg& model, const Config& start, std::int64_t horizon, const BoundPair& bounds);
Json to_json(const OcSsg& model, const Config& start, const SimReport& report);

/// Two-space indented text with a trailing newline.
std::string dump(const Json& doc);

}  // namespace octerm
