// SPDX-License-Identifier: Apache-2.0
#include "tsnfv/descriptors.hpp"

#include <set>

#include "tsnfv/error.hpp"
#include "tsnfv/json_io.hpp"
#include "tsnfv/topology.hpp"

namespace tsnfv {

using io::Json;

const ConnectionPoint* Nsd::find_cp(const std::string& member, const std::string& cp) const {
  auto search = [&](const std::vector<ConnectionPoint>& cps) -> const ConnectionPoint* {
    for (const auto& c : cps)
      if (c.cp_id == cp) return &c;
    return nullptr;
  };
  for (const auto& v : vnfds)
    if (v.vnf_id == member) return search(v.connection_points);
  for (const auto& p : pnfs)
    if (p.pnf_id == member) return search(p.connection_points);
  return nullptr;
}

bool Nsd::is_pnf(const std::string& member) const {
  for (const auto& p : pnfs)
    if (p.pnf_id == member) return true;
  return false;
}

const Vnfd* Nsd::find_vnfd(const std::string& member) const {
  for (const auto& v : vnfds)
    if (v.vnf_id == member) return &v;
  return nullptr;
}

std::size_t Nsd::tsn_link_count() const {
  std::size_t n = 0;
  for (const auto& vl : virtual_links) n += vl.tsn.has_value();
  return n;
}

const MemberPlacement& Placement::at(const std::string& member_id) const {
  const auto it = members.find(member_id);
  if (it == members.end()) throw UnplacedMember("member " + member_id + " has no placement");
  return it->second;
}

namespace {

std::vector<ConnectionPoint> parse_cps(const Json& j, const std::string& ctx) {
  std::vector<ConnectionPoint> cps;
  std::set<std::string> seen;
  for (const auto& jc : io::array_field(j, "connection_points", ctx)) {
    ConnectionPoint cp{io::get<std::string>(jc, "cp_id", ctx), io::get<std::string>(jc, "interface", ctx)};
    if (!seen.insert(cp.cp_id).second) throw ValidationError(ctx + ": duplicate cp " + cp.cp_id);
    cps.push_back(std::move(cp));
  }
  return cps;
}

Json cps_to_json(const std::vector<ConnectionPoint>& cps) {
  Json out = Json::array();
  for (const auto& c : cps) out.push_back(Json{{"cp_id", c.cp_id}, {"interface", c.interface}});
  return out;
}

}  // namespace

Nsd parse_nsd(const Json& doc) {
  Nsd nsd;
  nsd.ns_id = io::get<std::string>(doc, "ns_id", "nsd");
  const std::string ctx = "nsd " + nsd.ns_id;
  std::set<std::string> members;
  if (doc.contains("vnfds")) {
    for (const auto& jv : io::array_field(doc, "vnfds", ctx)) {
      Vnfd v;
      v.vnf_id = io::get<std::string>(jv, "vnf_id", ctx);
      v.connection_points = parse_cps(jv, "vnfd " + v.vnf_id);
      if (jv.contains("required_capabilities"))
        v.required_capabilities = io::capabilities_from_json(jv.at("required_capabilities"));
      if (!members.insert(v.vnf_id).second) throw ValidationError(ctx + ": duplicate member " + v.vnf_id);
      nsd.vnfds.push_back(std::move(v));
    }
  }
  if (doc.contains("pnfs")) {
    for (const auto& jp : io::array_field(doc, "pnfs", ctx)) {
      PnfRef p;
      p.pnf_id = io::get<std::string>(jp, "pnf_id", ctx);
      p.connection_points = parse_cps(jp, "pnf " + p.pnf_id);
      if (!members.insert(p.pnf_id).second) throw ValidationError(ctx + ": duplicate member " + p.pnf_id);
      nsd.pnfs.push_back(std::move(p));
    }
  }
  std::set<std::string> vl_ids;
  for (const auto& jl : io::array_field(doc, "virtual_links", ctx)) {
    VirtualLink vl;
    vl.vl_id = io::get<std::string>(jl, "vl_id", ctx);
    const std::string vctx = "virtual link " + vl.vl_id;
    if (!vl_ids.insert(vl.vl_id).second) throw ValidationError(ctx + ": duplicate vl " + vl.vl_id);
    for (const auto& je : io::array_field(jl, "endpoints", vctx)) {
      VlEndpoint ep{io::get<std::string>(je, "member_id", vctx), io::get<std::string>(je, "cp_id", vctx)};
      if (nsd.find_cp(ep.member_id, ep.cp_id) == nullptr)
        throw ValidationError(vctx + ": endpoint " + ep.member_id + ":" + ep.cp_id +
                              " does not resolve to a declared connection point");
      vl.endpoints.push_back(std::move(ep));
    }
    if (jl.contains("tsn") && !jl.at("tsn").is_null()) {
      const Json& jt = jl.at("tsn");
      TsnVlExtension ext;
      ext.vlan_id = io::get<int>(jt, "vlan_id", vctx);
      ext.pcp = io::get<int>(jt, "pcp", vctx);
      ext.traffic_fwd = io::traffic_from_json(io::field(jt, "traffic_fwd", vctx));
      ext.traffic_rev = io::traffic_from_json(io::field(jt, "traffic_rev", vctx));
      if (ext.vlan_id < 1 || ext.vlan_id > 4094)
        throw ValidationError(vctx + ": vlan_id " + std::to_string(ext.vlan_id) + " outside 1..4094");
      if (ext.pcp < 0 || ext.pcp > 7)
        throw ValidationError(vctx + ": pcp " + std::to_string(ext.pcp) + " outside 0..7");
      ext.traffic_fwd.validate();
      ext.traffic_rev.validate();
      if (vl.endpoints.size() != 2)
        throw ValidationError(vctx + ": a TSN virtual link needs exactly two endpoints, got " +
                              std::to_string(vl.endpoints.size()));
      vl.tsn = ext;
    } else if (vl.endpoints.size() < 2) {
      throw ValidationError(vctx + ": a virtual link needs at least two endpoints");
    }
    nsd.virtual_links.push_back(std::move(vl));
  }
  return nsd;
}

Json to_json(const Nsd& nsd) {
  Json vnfds = Json::array();
  for (const auto& v : nsd.vnfds) {
    vnfds.push_back(Json{{"vnf_id", v.vnf_id},
                         {"connection_points", cps_to_json(v.connection_points)},
                         {"required_capabilities", io::to_json(v.required_capabilities)}});
  }
  Json pnfs = Json::array();
  for (const auto& p : nsd.pnfs)
    pnfs.push_back(Json{{"pnf_id", p.pnf_id}, {"connection_points", cps_to_json(p.connection_points)}});
  Json vls = Json::array();
  for (const auto& vl : nsd.virtual_links) {
    Json eps = Json::array();
    for (const auto& e : vl.endpoints) eps.push_back(Json{{"member_id", e.member_id}, {"cp_id", e.cp_id}});
    Json jl{{"vl_id", vl.vl_id}, {"endpoints", std::move(eps)}};
    if (vl.tsn) {
      jl["tsn"] = Json{{"vlan_id", vl.tsn->vlan_id},
                       {"pcp", vl.tsn->pcp},
                       {"traffic_fwd", io::to_json(vl.tsn->traffic_fwd)},
                       {"traffic_rev", io::to_json(vl.tsn->traffic_rev)}};
    }
    vls.push_back(std::move(jl));
  }
  return Json{{"ns_id", nsd.ns_id}, {"vnfds", std::move(vnfds)}, {"pnfs", std::move(pnfs)},
              {"virtual_links", std::move(vls)}};
}

Placement parse_placement(const Json& doc) {
  Placement p;
  for (const auto& jm : io::array_field(doc, "placements", "placement")) {
    MemberPlacement m;
    m.member_id = io::get<std::string>(jm, "member_id", "placement");
    const std::string ctx = "placement of " + m.member_id;
    m.node_id = io::get<std::string>(jm, "node_id", ctx);
    m.interface = io::get<std::string>(jm, "interface", ctx);
    m.mac = MacAddress::parse(io::get<std::string>(jm, "mac", ctx));
    m.ip = io::get_optional<std::string>(jm, "ip", ctx);
    if (m.node_id.empty() || m.interface.empty()) throw ValidationError(ctx + ": empty node or interface");
    if (!p.members.emplace(m.member_id, m).second)
      throw ValidationError("member " + m.member_id + " placed twice");
  }
  return p;
}

Json to_json(const Placement& placement) {
  Json list = Json::array();
  for (const auto& [id, m] : placement.members) {
    Json j{{"member_id", id}, {"node_id", m.node_id}, {"interface", m.interface}, {"mac", m.mac.to_string()}};
    j["ip"] = m.ip ? Json(*m.ip) : Json(nullptr);
    list.push_back(std::move(j));
  }
  return Json{{"placements", std::move(list)}};
}

void validate_placement(const Nsd& nsd, const Placement& placement, const Topology& topology) {
  auto check = [&](const std::string& member, bool pnf) {
    const MemberPlacement& m = placement.at(member);
    if (!topology.has_node(m.node_id))
      throw ValidationError("member " + member + " placed on unknown node " + m.node_id);
    const Node& n = topology.node(m.node_id);
    if (n.is_bridge()) throw ValidationError("member " + member + " placed on bridge " + m.node_id);
    if (!pnf && n.kind != NodeKind::compute_host)
      throw ValidationError("VNF " + member + " must be placed on a compute host");
    if (pnf && n.kind != NodeKind::external_station)
      throw ValidationError("PNF " + member + " must be placed on an external station");
  };
  for (const auto& v : nsd.vnfds) check(v.vnf_id, false);
  for (const auto& p : nsd.pnfs) check(p.pnf_id, true);
}

std::vector<StreamRequirement> derive_streams(const Nsd& nsd, const Placement& placement) {
  std::vector<StreamRequirement> streams;
  for (const auto& vl : nsd.virtual_links) {
    if (!vl.tsn) continue;
    const VlEndpoint& a = vl.endpoints.at(0);
    const VlEndpoint& b = vl.endpoints.at(1);
    const MemberPlacement& pa = placement.at(a.member_id);
    const MemberPlacement& pb = placement.at(b.member_id);
    const ConnectionPoint* cpa = nsd.find_cp(a.member_id, a.cp_id);
    const ConnectionPoint* cpb = nsd.find_cp(b.member_id, b.cp_id);
    if (cpa == nullptr || cpb == nullptr)
      throw ValidationError("virtual link " + vl.vl_id + " has a dangling connection point");

    auto make = [&](const std::string& suffix, const MemberPlacement& talker, const ConnectionPoint& tcp,
                    const MemberPlacement& listener, const ConnectionPoint& lcp, const TrafficSpec& traffic) {
      StreamRequirement s;
      s.stream_id = vl.vl_id + suffix;
      s.talker = EndpointRef{talker.member_id, tcp.interface, talker.node_id};
      s.listener = EndpointRef{listener.member_id, lcp.interface, listener.node_id};
      s.frame.src_mac = talker.mac;
      s.frame.dst_mac = listener.mac;
      s.frame.src_ip = talker.ip;
      s.frame.dst_ip = listener.ip;
      s.frame.vlan_id = vl.tsn->vlan_id;
      s.frame.pcp = vl.tsn->pcp;
      s.traffic = traffic;
      s.validate();
      return s;
    };
    streams.push_back(make("~fwd", pa, *cpa, pb, *cpb, vl.tsn->traffic_fwd));
    streams.push_back(make("~rev", pb, *cpb, pa, *cpa, vl.tsn->traffic_rev));
  }
  return streams;
}

void validate_capabilities(const StreamRequirement& stream, const CapabilitySet& talker_caps,
                           const CapabilitySet& listener_caps) {
  auto check = [](const std::string& who, const CapabilitySet& caps) {
    if (!caps.time_sync) throw CapabilityError(who, "time_sync");
    if (!caps.qbv_shaping) throw CapabilityError(who, "qbv_shaping");
  };
  check("talker " + stream.talker.station_id, talker_caps);
  check("listener " + stream.listener.station_id, listener_caps);
}

}  // namespace tsnfv
