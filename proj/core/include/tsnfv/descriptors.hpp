// SPDX-License-Identifier: Apache-2.0
//
// Network-service descriptors with TSN virtual-link extensions, placement
// documents, and derivation of the unidirectional streams the CUC submits.
#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "tsnfv/model.hpp"

namespace tsnfv {

class Topology;

struct ConnectionPoint {
  std::string cp_id;
  std::string interface;

  bool operator==(const ConnectionPoint&) const = default;
};

struct Vnfd {
  std::string vnf_id;
  std::vector<ConnectionPoint> connection_points;
  CapabilitySet required_capabilities;

  bool operator==(const Vnfd&) const = default;
};

/// Physical network function taking part in the service.
struct PnfRef {
  std::string pnf_id;
  std::vector<ConnectionPoint> connection_points;

  bool operator==(const PnfRef&) const = default;
};

struct TsnVlExtension {
  int vlan_id = 0;
  int pcp = 0;
  TrafficSpec traffic_fwd;  // endpoint 0 -> endpoint 1
  TrafficSpec traffic_rev;  // endpoint 1 -> endpoint 0

  bool operator==(const TsnVlExtension&) const = default;
};

struct VlEndpoint {
  std::string member_id;
  std::string cp_id;

  bool operator==(const VlEndpoint&) const = default;
};

struct VirtualLink {
  std::string vl_id;
  std::vector<VlEndpoint> endpoints;
  std::optional<TsnVlExtension> tsn;

  bool operator==(const VirtualLink&) const = default;
};

struct Nsd {
  std::string ns_id;
  std::vector<Vnfd> vnfds;
  std::vector<PnfRef> pnfs;
  std::vector<VirtualLink> virtual_links;

  const ConnectionPoint* find_cp(const std::string& member, const std::string& cp) const;
  bool is_pnf(const std::string& member) const;
  const Vnfd* find_vnfd(const std::string& member) const;
  std::size_t tsn_link_count() const;

  bool operator==(const Nsd&) const = default;
};

struct MemberPlacement {
  std::string member_id;
  std::string node_id;
  std::string interface;
  MacAddress mac;
  std::optional<std::string> ip;

  bool operator==(const MemberPlacement&) const = default;
};

struct Placement {
  std::map<std::string, MemberPlacement> members;

  const MemberPlacement& at(const std::string& member_id) const;
  bool operator==(const Placement&) const = default;
};

/// Throws ParseError / ValidationError (dangling cp, TSN VL without exactly
/// two endpoints, invalid VLAN/PCP or traffic spec).
Nsd parse_nsd(const nlohmann::ordered_json& doc);
nlohmann::ordered_json to_json(const Nsd& nsd);

Placement parse_placement(const nlohmann::ordered_json& doc);
nlohmann::ordered_json to_json(const Placement& placement);

/// Every member placed on an existing node of a suitable kind.
void validate_placement(const Nsd& nsd, const Placement& placement, const Topology& topology);

/// Two streams per TSN virtual link, in declaration order, "~fwd" before
/// "~rev". Plain virtual links yield nothing. Throws UnplacedMember.
std::vector<StreamRequirement> derive_streams(const Nsd& nsd, const Placement& placement);

/// Both stations must be 802.1AS- and Qbv-capable. Throws CapabilityError
/// naming the station ("talker <id>" / "listener <id>") and the flag.
void validate_capabilities(const StreamRequirement& stream, const CapabilitySet& talker_caps,
                           const CapabilitySet& listener_caps);

}  // namespace tsnfv
