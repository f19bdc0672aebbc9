// SPDX-License-Identifier: Apache-2.0
#include "tsnfv/topology.hpp"

#include <algorithm>
#include <deque>
#include <set>

#include "tsnfv/error.hpp"
#include "tsnfv/json_io.hpp"

namespace tsnfv {

using io::Json;

std::string to_string(NodeKind kind) {
  switch (kind) {
    case NodeKind::bridge:
      return "bridge";
    case NodeKind::compute_host:
      return "compute_host";
    case NodeKind::external_station:
      return "external_station";
  }
  return "unknown";
}

std::string to_string(DomainKind kind) {
  return kind == DomainKind::nfvi_pop ? "nfvi_pop" : "wan_segment";
}

namespace {

NodeKind parse_node_kind(const std::string& s) {
  if (s == "bridge") return NodeKind::bridge;
  if (s == "compute_host") return NodeKind::compute_host;
  if (s == "external_station") return NodeKind::external_station;
  throw ParseError("unknown node kind '" + s + "'");
}

DomainKind parse_domain_kind(const std::string& s) {
  if (s == "nfvi_pop") return DomainKind::nfvi_pop;
  if (s == "wan_segment") return DomainKind::wan_segment;
  throw ParseError("unknown domain kind '" + s + "'");
}

constexpr const char* kBridgeFields[] = {"processing_delay_ns", "gcl_max_entries", "supports_qbv"};

}  // namespace

Topology Topology::from_json(const Json& doc) {
  Topology t;
  for (const auto& jn : io::array_field(doc, "nodes", "topology")) {
    Node n;
    n.node_id = io::get<std::string>(jn, "node_id", "node");
    const std::string ctx = "node " + n.node_id;
    n.kind = parse_node_kind(io::get<std::string>(jn, "kind", ctx));
    n.domain_id = io::get<std::string>(jn, "domain_id", ctx);
    if (n.kind == NodeKind::bridge) {
      BridgeParams b;
      b.processing_delay_ns = io::get<Nanos>(jn, "processing_delay_ns", ctx);
      b.gcl_max_entries = io::get<int>(jn, "gcl_max_entries", ctx);
      b.supports_qbv = io::get<bool>(jn, "supports_qbv", ctx);
      n.bridge = b;
    } else {
      for (const char* f : kBridgeFields) {
        if (jn.contains(f))
          throw ValidationError(ctx + " is not a bridge but declares '" + f + "'");
      }
      if (jn.contains("capabilities"))
        n.capabilities = io::capabilities_from_json(jn.at("capabilities"));
    }
    if (auto managed = io::get_optional<bool>(jn, "managed", ctx)) {
      if (n.kind != NodeKind::external_station)
        throw ValidationError(ctx + ": only external stations carry 'managed'");
      n.managed = *managed;
    }
    if (!t.nodes_.emplace(n.node_id, n).second)
      throw ValidationError("duplicate node id " + n.node_id);
  }
  for (const auto& jl : io::array_field(doc, "links", "topology")) {
    Link l;
    l.link_id = io::get<std::string>(jl, "link_id", "link");
    const std::string ctx = "link " + l.link_id;
    l.a = io::port_from_json(io::field(jl, "a", ctx));
    l.b = io::port_from_json(io::field(jl, "b", ctx));
    l.speed_bps = io::get<BitsPerSecond>(jl, "speed_bps", ctx);
    l.propagation_ns = io::get<Nanos>(jl, "propagation_ns", ctx);
    if (!t.links_.emplace(l.link_id, l).second)
      throw ValidationError("duplicate link id " + l.link_id);
  }
  for (const auto& jd : io::array_field(doc, "domains", "topology")) {
    Domain d;
    d.domain_id = io::get<std::string>(jd, "domain_id", "domain");
    const std::string ctx = "domain " + d.domain_id;
    d.kind = parse_domain_kind(io::get<std::string>(jd, "kind", ctx));
    d.controller_id = io::get<std::string>(jd, "controller_id", ctx);
    if (!t.domains_.emplace(d.domain_id, d).second)
      throw ValidationError("duplicate domain id " + d.domain_id);
  }
  t.validate();
  t.index();
  return t;
}

Topology Topology::load(const std::filesystem::path& file) {
  return from_json(io::read_file(file.string()));
}

void Topology::validate() const {
  for (const auto& [id, n] : nodes_) {
    if (id.empty()) throw ValidationError("empty node id");
    if (!domains_.count(n.domain_id))
      throw ValidationError("node " + id + " references unknown domain " + n.domain_id);
    if (n.bridge) {
      if (n.bridge->processing_delay_ns < 0)
        throw ValidationError("bridge " + id + " has negative processing delay");
      if (n.bridge->gcl_max_entries < 2)
        throw ValidationError("bridge " + id + " must support at least 2 GCL entries");
    }
  }
  std::set<std::string> ports;
  for (const auto& [id, l] : links_) {
    if (l.a.node_id == l.b.node_id) throw ValidationError("link " + id + " is a self-loop");
    for (const PortRef* p : {&l.a, &l.b}) {
      if (!nodes_.count(p->node_id))
        throw ValidationError("link " + id + " references unknown node " + p->node_id);
      if (p->port_id.empty()) throw ValidationError("link " + id + " has an empty port id");
      if (!ports.insert(p->key()).second)
        throw ValidationError("port " + p->key() + " is used by more than one link");
    }
    if (l.speed_bps <= 0) throw ValidationError("link " + id + " speed must be positive");
    if (l.propagation_ns < 0) throw ValidationError("link " + id + " has negative propagation");
  }
  std::set<std::string> pop_controllers;
  for (const auto& [id, d] : domains_) {
    if (d.controller_id.empty()) throw ValidationError("domain " + id + " has no controller");
    if (d.kind == DomainKind::nfvi_pop && !pop_controllers.insert(d.controller_id).second)
      throw ValidationError("controller " + d.controller_id + " manages more than one NFVI-PoP");
  }
}

void Topology::index() {
  adjacency_.clear();
  port_links_.clear();
  for (const auto& [id, l] : links_) {
    adjacency_[l.a.node_id].push_back({l.a.port_id, id, l.b});
    adjacency_[l.b.node_id].push_back({l.b.port_id, id, l.a});
    port_links_[l.a.key()] = id;
    port_links_[l.b.key()] = id;
  }
  for (auto& [node, adj] : adjacency_) {
    std::sort(adj.begin(), adj.end(), [](const Adjacent& x, const Adjacent& y) {
      return std::tie(x.peer.node_id, x.port_id) < std::tie(y.peer.node_id, y.port_id);
    });
  }
}

Json Topology::to_json() const {
  Json nodes = Json::array();
  for (const auto& [id, n] : nodes_) {
    Json j{{"node_id", id}, {"kind", to_string(n.kind)}, {"domain_id", n.domain_id}};
    if (n.bridge) {
      j["processing_delay_ns"] = n.bridge->processing_delay_ns;
      j["gcl_max_entries"] = n.bridge->gcl_max_entries;
      j["supports_qbv"] = n.bridge->supports_qbv;
    } else {
      j["capabilities"] = io::to_json(n.capabilities);
    }
    if (n.kind == NodeKind::external_station) j["managed"] = n.managed;
    nodes.push_back(std::move(j));
  }
  Json links = Json::array();
  for (const auto& [id, l] : links_) {
    links.push_back(Json{{"link_id", id},
                         {"a", io::to_json(l.a)},
                         {"b", io::to_json(l.b)},
                         {"speed_bps", l.speed_bps},
                         {"propagation_ns", l.propagation_ns}});
  }
  Json domains = Json::array();
  for (const auto& [id, d] : domains_) {
    domains.push_back(
        Json{{"domain_id", id}, {"kind", to_string(d.kind)}, {"controller_id", d.controller_id}});
  }
  return Json{{"nodes", std::move(nodes)}, {"links", std::move(links)}, {"domains", std::move(domains)}};
}

const Node& Topology::node(const std::string& id) const {
  const auto it = nodes_.find(id);
  if (it == nodes_.end()) throw ValidationError("unknown node " + id);
  return it->second;
}

const Link& Topology::link(const std::string& id) const {
  const auto it = links_.find(id);
  if (it == links_.end()) throw ValidationError("unknown link " + id);
  return it->second;
}

const Domain& Topology::domain(const std::string& id) const {
  const auto it = domains_.find(id);
  if (it == domains_.end()) throw UnmappedDomain("domain " + id + " is not in the domain map");
  return it->second;
}

const Link& Topology::link_at(const PortRef& port) const {
  const auto it = port_links_.find(port.key());
  if (it == port_links_.end()) throw ValidationError("port " + port.key() + " has no link");
  return link(it->second);
}

BitsPerSecond Topology::port_speed(const std::string& port_key) const {
  const auto it = port_links_.find(port_key);
  if (it == port_links_.end()) throw ValidationError("port " + port_key + " has no link");
  return link(it->second).speed_bps;
}

Path Topology::shortest_path(const std::string& src_node, const std::string& dst_node) const {
  node(src_node);
  node(dst_node);
  if (src_node == dst_node) throw NoPath("source and destination are the same node " + src_node);

  // Hop distance to dst; only bridges forward traffic, so only they are expanded.
  std::map<std::string, int> dist{{dst_node, 0}};
  std::deque<std::string> queue{dst_node};
  while (!queue.empty()) {
    const std::string u = queue.front();
    queue.pop_front();
    const auto adj = adjacency_.find(u);
    if (adj == adjacency_.end()) continue;
    for (const auto& a : adj->second) {
      if (dist.count(a.peer.node_id)) continue;
      dist[a.peer.node_id] = dist[u] + 1;
      if (node(a.peer.node_id).is_bridge()) queue.push_back(a.peer.node_id);
    }
  }
  const auto src_dist = dist.find(src_node);
  if (src_dist == dist.end()) throw NoPath("no route from " + src_node + " to " + dst_node);

  Path path;
  std::string at = src_node;
  int remaining = src_dist->second;
  while (at != dst_node) {
    const Adjacent* best = nullptr;
    for (const auto& a : adjacency_.at(at)) {
      const auto d = dist.find(a.peer.node_id);
      if (d == dist.end() || d->second != remaining - 1) continue;
      if (a.peer.node_id != dst_node && !node(a.peer.node_id).is_bridge()) continue;
      best = &a;  // adjacency is sorted by (peer, port): first match is smallest
      break;
    }
    if (best == nullptr) throw NoPath("no route from " + src_node + " to " + dst_node);
    path.hops.push_back(Hop{PortRef{at, best->port_id}, best->link_id, best->peer});
    at = best->peer.node_id;
    --remaining;
  }
  return path;
}

std::vector<PathSegment> Topology::split_by_domain(const Path& path) const {
  std::vector<PathSegment> segments;
  for (std::size_t i = 0; i < path.hops.size(); ++i) {
    const Hop& hop = path.hops[i];
    const auto n = nodes_.find(hop.egress.node_id);
    if (n == nodes_.end()) throw ValidationError("path references unknown node " + hop.egress.node_id);
    const auto d = domains_.find(n->second.domain_id);
    if (d == domains_.end())
      throw UnmappedDomain("domain " + n->second.domain_id + " of node " + n->first + " is unmapped");
    if (segments.empty() || segments.back().domain_id != d->first) {
      PathSegment seg{d->first, d->second.controller_id, {}, std::nullopt};
      if (i > 0) seg.entry_port = path.hops[i - 1].ingress;
      segments.push_back(std::move(seg));
    }
    segments.back().hops.push_back(hop);
  }
  return segments;
}

}  // namespace tsnfv
