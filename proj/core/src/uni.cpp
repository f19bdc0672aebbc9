// SPDX-License-Identifier: Apache-2.0
#include "tsnfv/uni.hpp"

#include "tsnfv/error.hpp"
#include "tsnfv/json_io.hpp"

namespace tsnfv {

using io::Json;

std::string to_string(ControllerKind kind) { return kind == ControllerKind::vim ? "vim" : "wim"; }

std::string to_string(ReferencePoint point) { return point == ReferencePoint::or_vi ? "Or-Vi" : "Or-Wi"; }

std::string to_string(UniCause cause) {
  switch (cause) {
    case UniCause::infeasible_budget:
      return "infeasible_budget";
    case UniCause::no_free_window:
      return "no_free_window";
    case UniCause::capability:
      return "capability";
    case UniCause::unknown_stream:
      return "unknown_stream";
    case UniCause::malformed:
      return "malformed";
    case UniCause::gcl_overflow:
      return "gcl_overflow";
    case UniCause::hyperperiod_overflow:
      return "hyperperiod_overflow";
  }
  return "malformed";
}

UniCause parse_uni_cause(std::string_view text) {
  for (auto c : {UniCause::infeasible_budget, UniCause::no_free_window, UniCause::capability,
                 UniCause::unknown_stream, UniCause::malformed, UniCause::gcl_overflow,
                 UniCause::hyperperiod_overflow}) {
    if (to_string(c) == text) return c;
  }
  throw DecodeError("unknown cause code '" + std::string(text) + "'");
}

RequestId request_id_of(const UniRequest& request) {
  return std::visit([](const auto& m) { return m.request_id; }, request);
}

std::string kind_of(const UniRequest& request) {
  switch (request.index()) {
    case 0:
      return "stream_request";
    case 1:
      return "remove_stream";
    default:
      return "capability_query";
  }
}

Json to_json(const UniRequest& request) {
  Json j{{"kind", kind_of(request)}, {"request_id", request_id_of(request)}};
  if (const auto* sr = std::get_if<StreamRequest>(&request)) {
    j["requirement"] = io::to_json(sr->requirement);
    Json hops = Json::array();
    for (const auto& h : sr->hops) hops.push_back(io::to_json(h));
    j["hops"] = std::move(hops);
    j["entry_port"] = sr->entry_port ? io::to_json(*sr->entry_port) : Json(nullptr);
    j["latency_budget_ns"] = sr->latency_budget_ns;
    j["entry_first_ns"] = sr->entry.first_ns;
    j["entry_last_ns"] = sr->entry.last_ns;
  } else if (const auto* rm = std::get_if<RemoveStream>(&request)) {
    j["stream_id"] = rm->stream_id;
  }
  return j;
}

UniRequest request_from_json(const Json& j) {
  constexpr std::string_view ctx = "uni request";
  const auto kind = io::get<std::string>(j, "kind", ctx);
  const auto id = io::get<RequestId>(j, "request_id", ctx);
  if (kind == "stream_request") {
    StreamRequest sr;
    sr.request_id = id;
    sr.requirement = io::stream_from_json(io::field(j, "requirement", ctx));
    for (const auto& h : io::array_field(j, "hops", ctx)) sr.hops.push_back(io::hop_from_json(h));
    if (!io::field(j, "entry_port", ctx).is_null()) sr.entry_port = io::port_from_json(j.at("entry_port"));
    sr.latency_budget_ns = io::get<Nanos>(j, "latency_budget_ns", ctx);
    sr.entry.first_ns = io::get<Nanos>(j, "entry_first_ns", ctx);
    sr.entry.last_ns = io::get<Nanos>(j, "entry_last_ns", ctx);
    return sr;
  }
  if (kind == "remove_stream") return RemoveStream{id, io::get<std::string>(j, "stream_id", ctx)};
  if (kind == "capability_query") return CapabilityQuery{id};
  throw DecodeError("unknown message kind '" + kind + "'");
}

std::string encode(const UniRequest& request) { return to_json(request).dump() + "\n"; }

std::string encode(const UniResponse& r) {
  Json j{{"request_id", r.request_id}, {"status", r.ok ? "ok" : "failed"}};
  j["cause"] = r.cause ? Json(to_string(*r.cause)) : Json(nullptr);
  j["detail"] = r.detail;
  j["schedule"] = r.schedule ? io::to_json(*r.schedule) : Json(nullptr);
  j["domain_id"] = r.domain_id ? Json(*r.domain_id) : Json(nullptr);
  Json bridges = Json::array();
  for (const auto& b : r.bridges) {
    bridges.push_back(Json{{"bridge_id", b.bridge_id},
                           {"supports_qbv", b.supports_qbv},
                           {"gcl_max_entries", b.gcl_max_entries},
                           {"processing_delay_ns", b.processing_delay_ns}});
  }
  j["bridges"] = std::move(bridges);
  return j.dump() + "\n";
}

namespace {

Json parse_line(std::string_view bytes) {
  if (!bytes.empty() && bytes.back() == '\n') bytes.remove_suffix(1);
  if (bytes.find('\n') != std::string_view::npos) throw DecodeError("more than one line in a message");
  try {
    Json j = Json::parse(bytes.begin(), bytes.end());
    if (!j.is_object()) throw DecodeError("message is not an object");
    return j;
  } catch (const nlohmann::json::exception& e) {
    throw DecodeError(std::string("malformed message: ") + e.what());
  }
}

}  // namespace

UniRequest decode_request(std::string_view bytes) {
  const Json j = parse_line(bytes);
  try {
    return request_from_json(j);
  } catch (const DecodeError&) {
    throw;
  } catch (const Error& e) {
    throw DecodeError(e.what());
  }
}

UniResponse decode_response(std::string_view bytes) {
  const Json j = parse_line(bytes);
  constexpr std::string_view ctx = "uni response";
  try {
    UniResponse r;
    r.request_id = io::get<RequestId>(j, "request_id", ctx);
    const auto status = io::get<std::string>(j, "status", ctx);
    if (status != "ok" && status != "failed") throw DecodeError("unknown status '" + status + "'");
    r.ok = status == "ok";
    if (auto c = io::get_optional<std::string>(j, "cause", ctx)) r.cause = parse_uni_cause(*c);
    r.detail = io::get<std::string>(j, "detail", ctx);
    if (!io::field(j, "schedule", ctx).is_null()) r.schedule = io::schedule_from_json(j.at("schedule"));
    r.domain_id = io::get_optional<std::string>(j, "domain_id", ctx);
    for (const auto& b : io::array_field(j, "bridges", ctx)) {
      r.bridges.push_back(BridgeCapability{io::get<std::string>(b, "bridge_id", ctx),
                                           io::get<bool>(b, "supports_qbv", ctx),
                                           io::get<int>(b, "gcl_max_entries", ctx),
                                           io::get<Nanos>(b, "processing_delay_ns", ctx)});
    }
    return r;
  } catch (const DecodeError&) {
    throw;
  } catch (const Error& e) {
    throw DecodeError(e.what());
  }
}

std::string encode_envelope(const std::string& domain_id, const UniRequest& request) {
  return Json{{"domain_id", domain_id}, {"message", to_json(request)}}.dump() + "\n";
}

UniResponse handle_request(CncState& state, const UniRequest& request) {
  UniResponse resp;
  resp.request_id = request_id_of(request);
  auto fail = [&](UniCause cause, const std::string& detail) {
    resp.ok = false;
    resp.cause = cause;
    resp.detail = detail;
    return resp;
  };
  try {
    if (const auto* sr = std::get_if<StreamRequest>(&request)) {
      const Domain& d = state.topology().domain(state.domain_id());
      PathSegment seg{d.domain_id, d.controller_id, sr->hops, sr->entry_port};
      resp.schedule = state.admit_stream(sr->requirement, seg, sr->latency_budget_ns, sr->entry);
    } else if (const auto* rm = std::get_if<RemoveStream>(&request)) {
      state.remove_stream(rm->stream_id);
    } else {
      resp.domain_id = state.domain_id();
      for (const auto& [id, n] : state.topology().nodes()) {
        if (!n.is_bridge() || n.domain_id != state.domain_id()) continue;
        resp.bridges.push_back(
            {id, n.bridge->supports_qbv, n.bridge->gcl_max_entries, n.bridge->processing_delay_ns});
      }
    }
    resp.ok = true;
    return resp;
  } catch (const InfeasibleError& e) {
    switch (e.cause()) {
      case InfeasibleCause::exceeds_budget:
        return fail(UniCause::infeasible_budget, e.what());
      case InfeasibleCause::no_free_window:
        return fail(UniCause::no_free_window, e.what());
      case InfeasibleCause::gcl_overflow:
        return fail(UniCause::gcl_overflow, e.what());
    }
    return fail(UniCause::no_free_window, e.what());
  } catch (const CapabilityError& e) {
    return fail(UniCause::capability, e.what());
  } catch (const UnknownStream& e) {
    return fail(UniCause::unknown_stream, e.what());
  } catch (const HyperperiodOverflow& e) {
    return fail(UniCause::hyperperiod_overflow, e.what());
  } catch (const Error& e) {
    return fail(UniCause::malformed, e.what());
  }
}

UniResponse InProcessChannel::exchange(const std::string& domain_id, const UniRequest& request) {
  if (domain_id != state_->domain_id())
    throw TransportError("in-process CNC of " + state_->domain_id() + " addressed as " + domain_id);
  return handle_request(*state_, request);
}

void CncRegistry::register_domain(const std::string& domain_id, RegistryEntry entry) {
  entries_[domain_id] = std::move(entry);
}

const RegistryEntry& CncRegistry::at(const std::string& domain_id) const {
  const auto it = entries_.find(domain_id);
  if (it == entries_.end()) throw UnknownDomain("no CNC registered for domain " + domain_id);
  return it->second;
}

void CncRegistry::validate_against(const Topology& topology) const {
  for (const auto& [id, d] : topology.domains()) {
    const auto it = entries_.find(id);
    if (it == entries_.end()) throw ValidationError("domain " + id + " has no registered CNC");
    if (it->second.kind != kind_for(d.kind))
      throw ValidationError("domain " + id + " (" + to_string(d.kind) + ") registered on a " +
                            to_string(it->second.kind) + " controller");
  }
}

UniResponse UniDispatcher::dispatch(const UniRequest& request, const std::string& domain_id) {
  const RegistryEntry& entry = registry_->at(domain_id);
  const RequestId id = request_id_of(request);
  log_.push_back(AuditRecord{id, domain_id, reference_point_for(entry.kind), kind_of(request)});
  if (!entry.channel) throw TransportError("domain " + domain_id + " has no channel");
  UniResponse resp = entry.channel->exchange(domain_id, request);
  if (resp.request_id != id)
    throw TransportError("response " + std::to_string(resp.request_id) + " does not answer request " +
                         std::to_string(id));
  return resp;
}

Json to_json(const AuditRecord& record) {
  return Json{{"request_id", record.request_id},
              {"domain_id", record.domain_id},
              {"reference_point", to_string(record.reference_point)},
              {"message_kind", record.message_kind}};
}

AuditRecord audit_from_json(const Json& j) {
  constexpr std::string_view ctx = "audit record";
  AuditRecord r;
  r.request_id = io::get<RequestId>(j, "request_id", ctx);
  r.domain_id = io::get<std::string>(j, "domain_id", ctx);
  const auto rp = io::get<std::string>(j, "reference_point", ctx);
  if (rp == "Or-Vi") {
    r.reference_point = ReferencePoint::or_vi;
  } else if (rp == "Or-Wi") {
    r.reference_point = ReferencePoint::or_wi;
  } else {
    throw ParseError("unknown reference point " + rp);
  }
  r.message_kind = io::get<std::string>(j, "message_kind", ctx);
  return r;
}

}  // namespace tsnfv
