// SPDX-License-Identifier: Apache-2.0
//
// Structured-text (JSON) encoding of the shared model types, plus the
// field accessors every document parser uses. Field order is the declaration
// order of the C++ types and is stable across runs.
#pragma once

#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "tsnfv/error.hpp"
#include "tsnfv/model.hpp"
#include "tsnfv/topology.hpp"

namespace tsnfv::io {

using Json = nlohmann::ordered_json;

/// Member lookup that throws ParseError naming the missing field.
const Json& field(const Json& obj, std::string_view key, std::string_view context);

template <class T>
T get(const Json& obj, std::string_view key, std::string_view context) {
  const Json& v = field(obj, key, context);
  try {
    return v.get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ParseError(std::string(context) + ": field '" + std::string(key) +
                     "' has the wrong type");
  }
}

template <class T>
std::optional<T> get_optional(const Json& obj, std::string_view key, std::string_view context) {
  if (!obj.is_object()) throw ParseError(std::string(context) + ": expected an object");
  const auto it = obj.find(std::string(key));
  if (it == obj.end() || it->is_null()) return std::nullopt;
  return get<T>(obj, key, context);
}

const Json& array_field(const Json& obj, std::string_view key, std::string_view context);

/// Parses text, mapping syntax errors to ParseError.
Json parse_text(std::string_view text, std::string_view context);
Json read_file(const std::string& path);
/// Pretty-printed document with a trailing newline.
std::string dump_document(const Json& doc);

Json to_json(const TrafficSpec& v);
Json to_json(const DataFrameSpec& v);
Json to_json(const EndpointRef& v);
Json to_json(const StreamRequirement& v);
Json to_json(const GclEntry& v);
Json to_json(const GateControlList& v);
Json to_json(const HopReservation& v);
Json to_json(const StreamSchedule& v);
Json to_json(const CapabilitySet& v);
Json to_json(const PortRef& v);
Json to_json(const Hop& v);
Json to_json(const PathSegment& v);

TrafficSpec traffic_from_json(const Json& j);
DataFrameSpec frame_from_json(const Json& j);
EndpointRef endpoint_from_json(const Json& j);
StreamRequirement stream_from_json(const Json& j);
GateControlList gcl_from_json(const Json& j);
HopReservation reservation_from_json(const Json& j);
StreamSchedule schedule_from_json(const Json& j);
CapabilitySet capabilities_from_json(const Json& j);
PortRef port_from_json(const Json& j);
Hop hop_from_json(const Json& j);
PathSegment segment_from_json(const Json& j);

}  // namespace tsnfv::io
