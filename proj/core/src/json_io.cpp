// SPDX-License-Identifier: Apache-2.0
#include "tsnfv/json_io.hpp"

#include <fstream>
#include <sstream>

namespace tsnfv::io {

const Json& field(const Json& obj, std::string_view key, std::string_view context) {
  if (!obj.is_object()) throw ParseError(std::string(context) + ": expected an object");
  const auto it = obj.find(std::string(key));
  if (it == obj.end())
    throw ParseError(std::string(context) + ": missing field '" + std::string(key) + "'");
  return *it;
}

const Json& array_field(const Json& obj, std::string_view key, std::string_view context) {
  const Json& v = field(obj, key, context);
  if (!v.is_array())
    throw ParseError(std::string(context) + ": field '" + std::string(key) + "' must be a list");
  return v;
}

Json parse_text(std::string_view text, std::string_view context) {
  try {
    return Json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string(context) + ": " + e.what());
  }
}

Json read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_text(buf.str(), path);
}

std::string dump_document(const Json& doc) { return doc.dump(2) + "\n"; }

Json to_json(const TrafficSpec& v) {
  return Json{{"period_ns", v.period_ns},
              {"max_frame_bytes", v.max_frame_bytes},
              {"frames_per_period", v.frames_per_period},
              {"max_latency_ns", v.max_latency_ns}};
}

Json to_json(const DataFrameSpec& v) {
  Json j{{"src_mac", v.src_mac.to_string()}, {"dst_mac", v.dst_mac.to_string()}};
  j["src_ip"] = v.src_ip ? Json(*v.src_ip) : Json(nullptr);
  j["dst_ip"] = v.dst_ip ? Json(*v.dst_ip) : Json(nullptr);
  j["vlan_id"] = v.vlan_id;
  j["pcp"] = v.pcp;
  return j;
}

Json to_json(const EndpointRef& v) {
  return Json{{"station_id", v.station_id}, {"interface", v.interface}, {"node_id", v.node_id}};
}

Json to_json(const StreamRequirement& v) {
  return Json{{"stream_id", v.stream_id},
              {"talker", to_json(v.talker)},
              {"listener", to_json(v.listener)},
              {"frame", to_json(v.frame)},
              {"traffic", to_json(v.traffic)}};
}

Json to_json(const GclEntry& v) {
  return Json{{"gate_states", v.gate_states}, {"interval_ns", v.interval_ns}};
}

Json to_json(const GateControlList& v) {
  Json entries = Json::array();
  for (const auto& e : v.entries) entries.push_back(to_json(e));
  return Json{{"port_id", v.port_id},
              {"cycle_ns", v.cycle_ns},
              {"base_time_ns", v.base_time_ns},
              {"entries", std::move(entries)}};
}

Json to_json(const HopReservation& v) {
  return Json{{"port_id", v.port_id},
              {"stream_id", v.stream_id},
              {"instance", v.instance},
              {"traffic_class", v.traffic_class},
              {"window_start_ns", v.window_start_ns},
              {"window_end_ns", v.window_end_ns},
              {"ready_first_ns", v.ready_first_ns},
              {"ready_last_ns", v.ready_last_ns}};
}

Json to_json(const StreamSchedule& v) {
  Json res = Json::array();
  for (const auto& r : v.reservations) res.push_back(to_json(r));
  return Json{{"stream_id", v.stream_id},
              {"period_ns", v.period_ns},
              {"pattern_ns", v.pattern_ns},
              {"entry_first_ns", v.entry_first_ns},
              {"entry_last_ns", v.entry_last_ns},
              {"hop_count", v.hop_count},
              {"reservations", std::move(res)},
              {"e2e_latency_ns", v.e2e_latency_ns},
              {"exit_first_ns", v.exit_first_ns},
              {"exit_last_ns", v.exit_last_ns}};
}

Json to_json(const CapabilitySet& v) {
  return Json{{"time_sync", v.time_sync},
              {"qbv_shaping", v.qbv_shaping},
              {"rt_scheduling_policy", v.rt_scheduling_policy},
              {"rt_kernel_or_hypervisor", v.rt_kernel_or_hypervisor},
              {"hw_isolation", v.hw_isolation}};
}

Json to_json(const PortRef& v) { return Json{{"node_id", v.node_id}, {"port_id", v.port_id}}; }

Json to_json(const Hop& v) {
  return Json{{"egress", to_json(v.egress)}, {"link_id", v.link_id}, {"ingress", to_json(v.ingress)}};
}

TrafficSpec traffic_from_json(const Json& j) {
  constexpr std::string_view ctx = "traffic spec";
  TrafficSpec t;
  t.period_ns = get<Nanos>(j, "period_ns", ctx);
  t.max_frame_bytes = get<int>(j, "max_frame_bytes", ctx);
  t.frames_per_period = get<int>(j, "frames_per_period", ctx);
  t.max_latency_ns = get<Nanos>(j, "max_latency_ns", ctx);
  return t;
}

DataFrameSpec frame_from_json(const Json& j) {
  constexpr std::string_view ctx = "data frame spec";
  DataFrameSpec f;
  f.src_mac = MacAddress::parse(get<std::string>(j, "src_mac", ctx));
  f.dst_mac = MacAddress::parse(get<std::string>(j, "dst_mac", ctx));
  f.src_ip = get_optional<std::string>(j, "src_ip", ctx);
  f.dst_ip = get_optional<std::string>(j, "dst_ip", ctx);
  f.vlan_id = get<int>(j, "vlan_id", ctx);
  f.pcp = get<int>(j, "pcp", ctx);
  return f;
}

EndpointRef endpoint_from_json(const Json& j) {
  constexpr std::string_view ctx = "endpoint";
  return EndpointRef{get<std::string>(j, "station_id", ctx), get<std::string>(j, "interface", ctx),
                     get<std::string>(j, "node_id", ctx)};
}

StreamRequirement stream_from_json(const Json& j) {
  constexpr std::string_view ctx = "stream requirement";
  StreamRequirement s;
  s.stream_id = get<std::string>(j, "stream_id", ctx);
  s.talker = endpoint_from_json(field(j, "talker", ctx));
  s.listener = endpoint_from_json(field(j, "listener", ctx));
  s.frame = frame_from_json(field(j, "frame", ctx));
  s.traffic = traffic_from_json(field(j, "traffic", ctx));
  return s;
}

GateControlList gcl_from_json(const Json& j) {
  constexpr std::string_view ctx = "gate control list";
  GateControlList g;
  g.port_id = get<std::string>(j, "port_id", ctx);
  g.cycle_ns = get<Nanos>(j, "cycle_ns", ctx);
  g.base_time_ns = get<Nanos>(j, "base_time_ns", ctx);
  for (const auto& e : array_field(j, "entries", ctx)) {
    const int mask = get<int>(e, "gate_states", ctx);
    if (mask < 0 || mask > 0xFF) throw ParseError("gate_states outside 8-bit range");
    g.entries.push_back(GclEntry{static_cast<std::uint8_t>(mask), get<Nanos>(e, "interval_ns", ctx)});
  }
  return g;
}

HopReservation reservation_from_json(const Json& j) {
  constexpr std::string_view ctx = "hop reservation";
  HopReservation r;
  r.port_id = get<std::string>(j, "port_id", ctx);
  r.stream_id = get<std::string>(j, "stream_id", ctx);
  r.instance = get<int>(j, "instance", ctx);
  r.traffic_class = get<int>(j, "traffic_class", ctx);
  r.window_start_ns = get<Nanos>(j, "window_start_ns", ctx);
  r.window_end_ns = get<Nanos>(j, "window_end_ns", ctx);
  r.ready_first_ns = get<Nanos>(j, "ready_first_ns", ctx);
  r.ready_last_ns = get<Nanos>(j, "ready_last_ns", ctx);
  return r;
}

StreamSchedule schedule_from_json(const Json& j) {
  constexpr std::string_view ctx = "stream schedule";
  StreamSchedule s;
  s.stream_id = get<std::string>(j, "stream_id", ctx);
  s.period_ns = get<Nanos>(j, "period_ns", ctx);
  s.pattern_ns = get<Nanos>(j, "pattern_ns", ctx);
  s.entry_first_ns = get<Nanos>(j, "entry_first_ns", ctx);
  s.entry_last_ns = get<Nanos>(j, "entry_last_ns", ctx);
  s.hop_count = get<int>(j, "hop_count", ctx);
  for (const auto& r : array_field(j, "reservations", ctx))
    s.reservations.push_back(reservation_from_json(r));
  s.e2e_latency_ns = get<Nanos>(j, "e2e_latency_ns", ctx);
  s.exit_first_ns = get<Nanos>(j, "exit_first_ns", ctx);
  s.exit_last_ns = get<Nanos>(j, "exit_last_ns", ctx);
  return s;
}

CapabilitySet capabilities_from_json(const Json& j) {
  constexpr std::string_view ctx = "capabilities";
  CapabilitySet c;
  c.time_sync = get_optional<bool>(j, "time_sync", ctx).value_or(false);
  c.qbv_shaping = get_optional<bool>(j, "qbv_shaping", ctx).value_or(false);
  c.rt_scheduling_policy = get_optional<bool>(j, "rt_scheduling_policy", ctx).value_or(false);
  c.rt_kernel_or_hypervisor = get_optional<bool>(j, "rt_kernel_or_hypervisor", ctx).value_or(false);
  c.hw_isolation = get_optional<bool>(j, "hw_isolation", ctx).value_or(false);
  return c;
}

PortRef port_from_json(const Json& j) {
  constexpr std::string_view ctx = "port";
  return PortRef{get<std::string>(j, "node_id", ctx), get<std::string>(j, "port_id", ctx)};
}

Hop hop_from_json(const Json& j) {
  constexpr std::string_view ctx = "hop";
  return Hop{port_from_json(field(j, "egress", ctx)), get<std::string>(j, "link_id", ctx),
             port_from_json(field(j, "ingress", ctx))};
}

Json to_json(const PathSegment& seg) {
  Json hops = Json::array();
  for (const auto& h : seg.hops) hops.push_back(to_json(h));
  Json j{{"domain_id", seg.domain_id}, {"controller_id", seg.controller_id}, {"hops", std::move(hops)}};
  j["entry_port"] = seg.entry_port ? to_json(*seg.entry_port) : Json(nullptr);
  return j;
}

PathSegment segment_from_json(const Json& j) {
  constexpr std::string_view ctx = "path segment";
  PathSegment seg;
  seg.domain_id = get<std::string>(j, "domain_id", ctx);
  seg.controller_id = get<std::string>(j, "controller_id", ctx);
  for (const auto& h : array_field(j, "hops", ctx)) seg.hops.push_back(hop_from_json(h));
  if (auto p = j.find("entry_port"); p != j.end() && !p->is_null()) seg.entry_port = port_from_json(*p);
  return seg;
}

}  // namespace tsnfv::io
