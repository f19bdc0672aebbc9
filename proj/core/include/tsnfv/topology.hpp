// SPDX-License-Identifier: Apache-2.0
//
// Physical substrate: bridges, hosts, external stations, full-duplex links,
// and the TSN domains (NFVI-PoPs and WAN segments) they belong to.
#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "tsnfv/model.hpp"

namespace tsnfv {

enum class NodeKind { bridge, compute_host, external_station };
enum class DomainKind { nfvi_pop, wan_segment };

std::string to_string(NodeKind kind);
std::string to_string(DomainKind kind);

struct BridgeParams {
  Nanos processing_delay_ns = 0;
  int gcl_max_entries = 0;
  bool supports_qbv = false;

  bool operator==(const BridgeParams&) const = default;
};

struct Node {
  std::string node_id;
  NodeKind kind = NodeKind::compute_host;
  std::string domain_id;
  std::optional<BridgeParams> bridge;  // present iff kind == bridge
  bool managed = true;                 // external stations only
  CapabilitySet capabilities;          // end stations only

  bool is_bridge() const { return kind == NodeKind::bridge; }
  Nanos processing_delay_ns() const { return bridge ? bridge->processing_delay_ns : 0; }
  bool operator==(const Node&) const = default;
};

struct PortRef {
  std::string node_id;
  std::string port_id;

  /// Network-wide port key, "node.port".
  std::string key() const { return node_id + "." + port_id; }
  bool operator==(const PortRef&) const = default;
  auto operator<=>(const PortRef&) const = default;
};

struct Link {
  std::string link_id;
  PortRef a;
  PortRef b;
  BitsPerSecond speed_bps = 0;
  Nanos propagation_ns = 0;

  bool operator==(const Link&) const = default;
};

struct Domain {
  std::string domain_id;
  DomainKind kind = DomainKind::nfvi_pop;
  std::string controller_id;

  bool operator==(const Domain&) const = default;
};

/// One link traversal: egress port on one node, ingress port on the next.
struct Hop {
  PortRef egress;
  std::string link_id;
  PortRef ingress;

  bool operator==(const Hop&) const = default;
};

struct Path {
  std::vector<Hop> hops;

  bool operator==(const Path&) const = default;
};

/// Maximal run of path hops whose egress nodes share a domain.
struct PathSegment {
  std::string domain_id;
  std::string controller_id;
  std::vector<Hop> hops;
  /// Port the stream enters the segment's first node through; empty when the
  /// segment starts at the talker.
  std::optional<PortRef> entry_port;

  bool operator==(const PathSegment&) const = default;
};

class Topology {
 public:
  Topology() = default;

  /// Parses and validates. Throws ParseError on missing/ill-typed fields and
  /// ValidationError on structural problems.
  static Topology from_json(const nlohmann::ordered_json& doc);
  static Topology load(const std::filesystem::path& file);
  nlohmann::ordered_json to_json() const;

  const std::map<std::string, Node>& nodes() const { return nodes_; }
  const std::map<std::string, Link>& links() const { return links_; }
  const std::map<std::string, Domain>& domains() const { return domains_; }

  bool has_node(const std::string& id) const { return nodes_.count(id) != 0; }
  const Node& node(const std::string& id) const;
  const Link& link(const std::string& id) const;
  const Domain& domain(const std::string& id) const;

  /// Link attached to a port; throws ValidationError when the port is unused.
  const Link& link_at(const PortRef& port) const;
  /// Egress speed of a port key ("node.port").
  BitsPerSecond port_speed(const std::string& port_key) const;

  /// Minimum-hop route that transits bridges only. Among equal-length routes
  /// the lexicographically smallest sequence of (next node, egress port) wins.
  Path shortest_path(const std::string& src_node, const std::string& dst_node) const;

  std::vector<PathSegment> split_by_domain(const Path& path) const;

  bool operator==(const Topology&) const = default;

 private:
  void validate() const;
  void index();

  struct Adjacent {
    std::string port_id;
    std::string link_id;
    PortRef peer;
    bool operator==(const Adjacent&) const = default;
  };

  std::map<std::string, Node> nodes_;
  std::map<std::string, Link> links_;
  std::map<std::string, Domain> domains_;
  std::map<std::string, std::vector<Adjacent>> adjacency_;
  std::map<std::string, std::string> port_links_;  // port key -> link id
};

}  // namespace tsnfv
