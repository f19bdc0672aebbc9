// SPDX-License-Identifier: Apache-2.0
#include "tsnfv/cuc.hpp"

#include <algorithm>
#include <numeric>
#include <tuple>

#include "tsnfv/cnc.hpp"
#include "tsnfv/error.hpp"
#include "tsnfv/json_io.hpp"

namespace tsnfv {

using io::Json;

std::string to_string(InstanceStatus status) {
  switch (status) {
    case InstanceStatus::active:
      return "active";
    case InstanceStatus::failed:
      return "failed";
    case InstanceStatus::terminated:
      return "terminated";
  }
  return "failed";
}

std::string to_string(SchedulingPolicy policy) {
  return policy == SchedulingPolicy::deadline ? "deadline" : "fifo_rt";
}

const StreamRecord* NsInstance::find_stream(const std::string& stream_id) const {
  for (const auto& s : streams)
    if (s.requirement.stream_id == stream_id) return &s;
  return nullptr;
}

std::vector<Nanos> partition_latency_budget(Nanos max_latency_ns, const std::vector<int>& hop_counts) {
  if (hop_counts.empty()) throw ValidationError("budget partition needs at least one segment");
  if (max_latency_ns <= 0) throw ValidationError("latency budget must be positive");
  Nanos total = 0;
  for (int h : hop_counts) {
    if (h <= 0) throw ValidationError("segment hop count must be positive");
    total += h;
  }
  std::vector<Nanos> out;
  Nanos used = 0;
  for (int h : hop_counts) {
    // floor(max * h / total) without overflowing the product
    const Nanos part = (max_latency_ns / total) * h + (max_latency_ns % total) * h / total;
    out.push_back(part);
    used += part;
  }
  out.back() += max_latency_ns - used;
  return out;
}

namespace {

std::vector<Nanos> first_hop_offsets(const StreamSchedule& s) {
  std::vector<Nanos> out;
  if (s.hop_count <= 0) return out;
  for (std::size_t i = 0; i < s.reservations.size(); i += static_cast<std::size_t>(s.hop_count))
    out.push_back(s.reservations[i].window_start_ns);
  return out;
}

void merge_into(EndStationConfig& into, const EndStationConfig& from) {
  for (const auto& v : from.vlans)
    if (std::find(into.vlans.begin(), into.vlans.end(), v) == into.vlans.end()) into.vlans.push_back(v);
  std::sort(into.vlans.begin(), into.vlans.end());
  for (const auto& [k, v] : from.socket_priority_map) into.socket_priority_map[k] = v;
  if (!into.tas_schedule) into.tas_schedule = from.tas_schedule;
  into.txtime_offsets.insert(into.txtime_offsets.end(), from.txtime_offsets.begin(), from.txtime_offsets.end());
  std::sort(into.txtime_offsets.begin(), into.txtime_offsets.end(),
            [](const auto& a, const auto& b) { return a.stream_id < b.stream_id; });
}

}  // namespace

std::optional<EndStationConfig> generate_endstation_config(const StreamRecord& stream, StreamRole role,
                                                           const Node& station_node,
                                                           const std::optional<TasSchedule>& tas) {
  if (station_node.kind == NodeKind::external_station && !station_node.managed) return std::nullopt;
  const StreamRequirement& req = stream.requirement;
  const EndpointRef& ep = role == StreamRole::talker ? req.talker : req.listener;
  EndStationConfig c;
  c.station_id = ep.station_id;
  c.node_id = ep.node_id;
  c.interface = ep.interface;
  c.sync_daemon = station_node.capabilities.time_sync;
  c.vlans.push_back(VlanTag{req.frame.vlan_id, req.frame.pcp});
  c.socket_priority_map[req.frame.pcp] = req.frame.pcp;
  c.scheduling_policy = station_node.capabilities.rt_scheduling_policy ? SchedulingPolicy::deadline
                                                                       : SchedulingPolicy::fifo_rt;
  if (role == StreamRole::talker && !stream.segments.empty()) {
    const StreamSchedule& first = stream.segments.front().schedule;
    c.tas_schedule = tas;
    c.txtime_offsets.push_back(TxTimeOffsets{req.stream_id, first.pattern_ns, first_hop_offsets(first)});
  }
  return c;
}

Cuc::Cuc(std::shared_ptr<const Topology> topology, UniDispatcher& dispatcher)
    : topology_(std::move(topology)), dispatcher_(&dispatcher) {}

const NsInstance& Cuc::instance(const std::string& instance_id) const {
  const auto it = instances_.find(instance_id);
  if (it == instances_.end()) throw UnknownInstance("unknown instance " + instance_id);
  return it->second;
}

void Cuc::restore(std::map<std::string, NsInstance> instances, std::uint64_t next_sequence,
                  std::size_t configs_emitted) {
  instances_ = std::move(instances);
  next_sequence_ = next_sequence;
  configs_emitted_ = configs_emitted;
}

Cuc::Prepared Cuc::prepare(const std::string& instance_id, const Nsd& nsd, const Placement& placement) const {
  const Topology& topo = *topology_;
  validate_placement(nsd, placement, topo);
  for (const auto& v : nsd.vnfds) {
    const Node& host = topo.node(placement.at(v.vnf_id).node_id);
    const CapabilitySet& need = v.required_capabilities;
    const CapabilitySet& have = host.capabilities;
    const std::string who = "host " + host.node_id;
    if (need.time_sync && !have.time_sync) throw CapabilityError(who, "time_sync");
    if (need.qbv_shaping && !have.qbv_shaping) throw CapabilityError(who, "qbv_shaping");
    if (need.rt_scheduling_policy && !have.rt_scheduling_policy) throw CapabilityError(who, "rt_scheduling_policy");
    if (need.rt_kernel_or_hypervisor && !have.rt_kernel_or_hypervisor)
      throw CapabilityError(who, "rt_kernel_or_hypervisor");
    if (need.hw_isolation && !have.hw_isolation) throw CapabilityError(who, "hw_isolation");
  }

  Prepared p;
  p.streams = derive_streams(nsd, placement);
  for (auto& s : p.streams) {
    validate_capabilities(s, topo.node(s.talker.node_id).capabilities, topo.node(s.listener.node_id).capabilities);
    s.stream_id = instance_id + "/" + s.stream_id;
  }
  std::sort(p.streams.begin(), p.streams.end(), [](const auto& a, const auto& b) {
    return std::tie(a.traffic.period_ns, a.traffic.max_latency_ns, a.stream_id) <
           std::tie(b.traffic.period_ns, b.traffic.max_latency_ns, b.stream_id);
  });
  for (const auto& s : p.streams) {
    auto segs = topo.split_by_domain(topo.shortest_path(s.talker.node_id, s.listener.node_id));
    for (const auto& seg : segs) {
      if (!dispatcher_->registry().contains(seg.domain_id))
        throw UnknownDomain("no CNC registered for domain " + seg.domain_id);
    }
    p.segments.push_back(std::move(segs));
  }
  return p;
}

void Cuc::admit(NsInstance& out, const Prepared& prepared) {
  std::vector<std::pair<std::string, std::string>> held;  // (domain, stream) in admission order
  auto rollback = [&] {
    for (auto it = held.rbegin(); it != held.rend(); ++it) {
      try {
        dispatcher_->dispatch(RemoveStream{dispatcher_->next_request_id(), it->second}, it->first);
      } catch (const Error&) {
        // best effort: the controller is unreachable, nothing more to undo here
      }
    }
  };
  auto fail = [&](const std::string& stream, const std::string& domain, const std::string& cause,
                  const std::string& detail) {
    rollback();
    out.streams.clear();
    out.status = InstanceStatus::failed;
    out.failure = FailureInfo{stream, domain, cause, detail};
  };

  out.streams.clear();
  out.failure.reset();
  for (std::size_t i = 0; i < prepared.streams.size(); ++i) {
    const StreamRequirement& s = prepared.streams[i];
    const auto& segs = prepared.segments[i];
    std::vector<int> hops;
    for (const auto& seg : segs) hops.push_back(static_cast<int>(seg.hops.size()));
    const auto budgets = partition_latency_budget(s.traffic.max_latency_ns, hops);

    StreamRecord rec{s, {}, 0};
    SegmentEntry entry;
    for (std::size_t j = 0; j < segs.size(); ++j) {
      const PathSegment& seg = segs[j];
      StreamRequest req{dispatcher_->next_request_id(), s, seg.hops, seg.entry_port, budgets[j], entry};
      UniResponse resp;
      try {
        resp = dispatcher_->dispatch(req, seg.domain_id);
      } catch (const Error& e) {
        fail(s.stream_id, seg.domain_id, "transport", e.what());
        throw;
      }
      if (!resp.ok || !resp.schedule) {
        const std::string cause = resp.cause ? to_string(*resp.cause) : "malformed";
        fail(s.stream_id, seg.domain_id, cause, resp.detail);
        throw AdmissionFailed(out.instance_id, s.stream_id, seg.domain_id, cause, resp.detail);
      }
      held.emplace_back(seg.domain_id, s.stream_id);
      rec.segments.push_back(DomainSchedule{seg.domain_id, seg, budgets[j], *resp.schedule});
      entry = SegmentEntry{resp.schedule->exit_first_ns, resp.schedule->exit_last_ns};
    }
    rec.e2e_latency_ns = rec.segments.back().schedule.exit_last_ns;
    out.streams.push_back(std::move(rec));
  }
  out.status = InstanceStatus::active;
}

void Cuc::release(const NsInstance& instance) {
  for (auto s = instance.streams.rbegin(); s != instance.streams.rend(); ++s) {
    for (auto seg = s->segments.rbegin(); seg != s->segments.rend(); ++seg) {
      const UniResponse resp = dispatcher_->dispatch(
          RemoveStream{dispatcher_->next_request_id(), s->requirement.stream_id}, seg->domain_id);
      if (!resp.ok)
        throw Error("domain " + seg->domain_id + " refused to remove " + s->requirement.stream_id + ": " +
                    resp.detail);
    }
  }
}

std::optional<TasSchedule> Cuc::talker_tas(const std::string& port_id, const NsInstance& pending) const {
  // Every first-hop window on this host port, across all active instances.
  std::vector<const StreamSchedule*> scheds;
  auto collect = [&](const NsInstance& inst) {
    for (const auto& s : inst.streams) {
      if (s.segments.empty() || s.segments.front().segment.hops.empty()) continue;
      if (s.segments.front().segment.hops.front().egress.key() == port_id)
        scheds.push_back(&s.segments.front().schedule);
    }
  };
  for (const auto& [id, inst] : instances_)
    if (id != pending.instance_id && inst.status == InstanceStatus::active) collect(inst);
  collect(pending);
  if (scheds.empty()) return std::nullopt;

  std::vector<Nanos> patterns;
  for (const auto* s : scheds) patterns.push_back(s->pattern_ns);
  const Nanos cycle = hyperperiod(patterns);
  std::vector<ClassWindow> windows;
  for (const auto* s : scheds) {
    for (Nanos base = 0; base < cycle; base += s->pattern_ns) {
      for (std::size_t i = 0; i < s->reservations.size(); i += static_cast<std::size_t>(s->hop_count)) {
        const HopReservation& r = s->reservations[i];
        const Nanos start = mod_floor(base + r.window_start_ns, cycle);
        windows.push_back(ClassWindow{start, start + r.length(), r.traffic_class});
      }
    }
  }
  const GateControlList g = build_port_gcl(port_id, cycle, windows, topology_->port_speed(port_id), std::nullopt);
  return TasSchedule{g.port_id, g.cycle_ns, g.base_time_ns, g.entries};
}

std::vector<EndStationConfig> Cuc::build_configs(const NsInstance& instance) const {
  std::map<std::pair<std::string, std::string>, EndStationConfig> by_endpoint;
  auto add = [&](std::optional<EndStationConfig> c) {
    if (!c) return;
    auto key = std::make_pair(c->station_id, c->interface);
    auto it = by_endpoint.find(key);
    if (it == by_endpoint.end()) {
      by_endpoint.emplace(std::move(key), std::move(*c));
    } else {
      merge_into(it->second, *c);
    }
  };
  for (const auto& s : instance.streams) {
    const Node& talker = topology_->node(s.requirement.talker.node_id);
    const Node& listener = topology_->node(s.requirement.listener.node_id);
    std::optional<TasSchedule> tas;
    if (!(talker.kind == NodeKind::external_station && !talker.managed))
      tas = talker_tas(s.segments.front().segment.hops.front().egress.key(), instance);
    add(generate_endstation_config(s, StreamRole::talker, talker, tas));
    add(generate_endstation_config(s, StreamRole::listener, listener, std::nullopt));
  }
  std::vector<EndStationConfig> out;
  for (auto& [key, c] : by_endpoint) out.push_back(std::move(c));
  return out;
}

const NsInstance& Cuc::instantiate(const Nsd& nsd, const Placement& placement) {
  const std::string id = "ns-" + std::to_string(next_sequence_);
  const Prepared prepared = prepare(id, nsd, placement);
  ++next_sequence_;
  NsInstance inst;
  inst.instance_id = id;
  inst.nsd = nsd;
  inst.placement = placement;
  try {
    admit(inst, prepared);
  } catch (const Error&) {
    instances_[id] = std::move(inst);
    throw;
  }
  inst.configs = build_configs(inst);
  configs_emitted_ += inst.configs.size();
  return instances_[id] = std::move(inst);
}

const NsInstance& Cuc::terminate(const std::string& instance_id) {
  const auto it = instances_.find(instance_id);
  if (it == instances_.end()) throw UnknownInstance("unknown instance " + instance_id);
  NsInstance& inst = it->second;
  if (inst.status == InstanceStatus::terminated) throw AlreadyTerminated(instance_id + " is already terminated");
  if (inst.status != InstanceStatus::active) throw InstanceNotActive(instance_id + " is not active");
  release(inst);
  inst.status = InstanceStatus::terminated;
  return inst;
}

const NsInstance& Cuc::update(const std::string& instance_id, const Nsd& nsd, const Placement& placement) {
  const auto it = instances_.find(instance_id);
  if (it == instances_.end() || it->second.status != InstanceStatus::active)
    throw UnknownInstance("no active instance " + instance_id);
  const NsInstance original = it->second;

  Prepared prepared;
  try {
    prepared = prepare(instance_id, nsd, placement);
  } catch (const Error& e) {
    throw UpdateFailed("update of " + instance_id + " rejected: " + e.what());
  }

  release(original);
  NsInstance fresh;
  fresh.instance_id = instance_id;
  fresh.nsd = nsd;
  fresh.placement = placement;
  try {
    admit(fresh, prepared);
  } catch (const Error& e) {
    const std::string why = e.what();
    NsInstance restored;
    restored.instance_id = instance_id;
    restored.nsd = original.nsd;
    restored.placement = original.placement;
    try {
      admit(restored, prepare(instance_id, original.nsd, original.placement));
    } catch (const Error& e2) {
      instances_[instance_id] = std::move(restored);
      throw UpdateFailed("update of " + instance_id + " failed (" + why +
                         ") and the original could not be re-admitted: " + e2.what());
    }
    restored.configs = build_configs(restored);
    configs_emitted_ += restored.configs.size();
    instances_[instance_id] = std::move(restored);
    throw UpdateFailed("update of " + instance_id + " failed, original re-admitted: " + why);
  }
  fresh.configs = build_configs(fresh);
  configs_emitted_ += fresh.configs.size();
  return instances_[instance_id] = std::move(fresh);
}

Json to_json(const EndStationConfig& c) {
  Json vlans = Json::array();
  for (const auto& v : c.vlans) vlans.push_back(Json{{"vlan_id", v.vlan_id}, {"pcp", v.pcp}});
  Json prio = Json::array();
  for (const auto& [p, pcp] : c.socket_priority_map) prio.push_back(Json{{"priority", p}, {"pcp", pcp}});
  Json j{{"station_id", c.station_id},
         {"node_id", c.node_id},
         {"interface", c.interface},
         {"sync_daemon", c.sync_daemon},
         {"vlans", std::move(vlans)},
         {"socket_priority_map", std::move(prio)},
         {"scheduling_policy", to_string(c.scheduling_policy)}};
  if (c.tas_schedule || !c.txtime_offsets.empty()) {
    if (c.tas_schedule) {
      const auto& t = *c.tas_schedule;
      j["tas_schedule"] = io::to_json(GateControlList{t.port_id, t.cycle_ns, t.base_time_ns, t.entries});
    } else {
      j["tas_schedule"] = nullptr;
    }
    Json tx = Json::array();
    for (const auto& o : c.txtime_offsets)
      tx.push_back(Json{{"stream_id", o.stream_id}, {"pattern_ns", o.pattern_ns}, {"offsets_ns", o.offsets_ns}});
    j["txtime_offsets"] = std::move(tx);
  }
  return j;
}

EndStationConfig endstation_config_from_json(const Json& j) {
  constexpr std::string_view ctx = "end-station config";
  EndStationConfig c;
  c.station_id = io::get<std::string>(j, "station_id", ctx);
  c.node_id = io::get<std::string>(j, "node_id", ctx);
  c.interface = io::get<std::string>(j, "interface", ctx);
  c.sync_daemon = io::get<bool>(j, "sync_daemon", ctx);
  for (const auto& v : io::array_field(j, "vlans", ctx))
    c.vlans.push_back(VlanTag{io::get<int>(v, "vlan_id", ctx), io::get<int>(v, "pcp", ctx)});
  for (const auto& p : io::array_field(j, "socket_priority_map", ctx))
    c.socket_priority_map[io::get<int>(p, "priority", ctx)] = io::get<int>(p, "pcp", ctx);
  const auto policy = io::get<std::string>(j, "scheduling_policy", ctx);
  if (policy == "deadline") {
    c.scheduling_policy = SchedulingPolicy::deadline;
  } else if (policy == "fifo_rt") {
    c.scheduling_policy = SchedulingPolicy::fifo_rt;
  } else {
    throw ParseError("unknown scheduling policy " + policy);
  }
  if (auto t = j.find("tas_schedule"); t != j.end() && !t->is_null()) {
    const GateControlList g = io::gcl_from_json(*t);
    c.tas_schedule = TasSchedule{g.port_id, g.cycle_ns, g.base_time_ns, g.entries};
  }
  if (j.contains("txtime_offsets")) {
    for (const auto& o : io::array_field(j, "txtime_offsets", ctx)) {
      c.txtime_offsets.push_back(TxTimeOffsets{io::get<std::string>(o, "stream_id", ctx),
                                               io::get<Nanos>(o, "pattern_ns", ctx),
                                               io::get<std::vector<Nanos>>(o, "offsets_ns", ctx)});
    }
  }
  return c;
}

Json to_json(const NsInstance& inst) {
  Json streams = Json::array();
  for (const auto& s : inst.streams) {
    Json segs = Json::array();
    for (const auto& d : s.segments) {
      segs.push_back(Json{{"domain_id", d.domain_id},
                          {"segment", io::to_json(d.segment)},
                          {"latency_budget_ns", d.latency_budget_ns},
                          {"schedule", io::to_json(d.schedule)}});
    }
    streams.push_back(Json{{"requirement", io::to_json(s.requirement)},
                           {"e2e_latency_ns", s.e2e_latency_ns},
                           {"segments", std::move(segs)}});
  }
  Json configs = Json::array();
  for (const auto& c : inst.configs) configs.push_back(to_json(c));
  Json j{{"instance_id", inst.instance_id},
         {"status", to_string(inst.status)},
         {"nsd", to_json(inst.nsd)},
         {"placement", to_json(inst.placement)},
         {"streams", std::move(streams)},
         {"configs", std::move(configs)}};
  if (inst.failure) {
    j["failure"] = Json{{"stream_id", inst.failure->stream_id},
                        {"domain_id", inst.failure->domain_id},
                        {"cause", inst.failure->cause},
                        {"detail", inst.failure->detail}};
  } else {
    j["failure"] = nullptr;
  }
  return j;
}

NsInstance instance_from_json(const Json& j) {
  constexpr std::string_view ctx = "instance";
  NsInstance inst;
  inst.instance_id = io::get<std::string>(j, "instance_id", ctx);
  const auto status = io::get<std::string>(j, "status", ctx);
  if (status == "active") {
    inst.status = InstanceStatus::active;
  } else if (status == "failed") {
    inst.status = InstanceStatus::failed;
  } else if (status == "terminated") {
    inst.status = InstanceStatus::terminated;
  } else {
    throw ParseError("unknown instance status " + status);
  }
  inst.nsd = parse_nsd(io::field(j, "nsd", ctx));
  inst.placement = parse_placement(io::field(j, "placement", ctx));
  for (const auto& js : io::array_field(j, "streams", ctx)) {
    StreamRecord s;
    s.requirement = io::stream_from_json(io::field(js, "requirement", ctx));
    s.e2e_latency_ns = io::get<Nanos>(js, "e2e_latency_ns", ctx);
    for (const auto& jd : io::array_field(js, "segments", ctx)) {
      s.segments.push_back(DomainSchedule{io::get<std::string>(jd, "domain_id", ctx),
                                          io::segment_from_json(io::field(jd, "segment", ctx)),
                                          io::get<Nanos>(jd, "latency_budget_ns", ctx),
                                          io::schedule_from_json(io::field(jd, "schedule", ctx))});
    }
    inst.streams.push_back(std::move(s));
  }
  for (const auto& c : io::array_field(j, "configs", ctx)) inst.configs.push_back(endstation_config_from_json(c));
  if (auto f = j.find("failure"); f != j.end() && !f->is_null()) {
    inst.failure = FailureInfo{io::get<std::string>(*f, "stream_id", ctx), io::get<std::string>(*f, "domain_id", ctx),
                               io::get<std::string>(*f, "cause", ctx), io::get<std::string>(*f, "detail", ctx)};
  }
  return inst;
}

}  // namespace tsnfv
