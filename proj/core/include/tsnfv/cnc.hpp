// SPDX-License-Identifier: Apache-2.0
//
// Per-domain Centralized Network Configuration: incremental admission of
// stream segments, 802.1Qbv gate control list synthesis, and bridge
// configuration documents.
#pragma once

#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "tsnfv/model.hpp"
#include "tsnfv/topology.hpp"

namespace tsnfv {

/// Arrival bounds of a stream's burst at the segment entry node, relative
/// to the talker's nominal release. Both zero for the talker segment.
struct SegmentEntry {
  Nanos first_ns = 0;  // earliest first-frame arrival
  Nanos last_ns = 0;   // latest last-frame arrival

  bool operator==(const SegmentEntry&) const = default;
};

struct AdmittedStream {
  StreamRequirement requirement;
  PathSegment segment;
  Nanos latency_budget_ns = 0;
  SegmentEntry entry;
  StreamSchedule schedule;

  bool operator==(const AdmittedStream&) const = default;
};

struct VlanMembership {
  int vlan_id = 0;
  std::vector<std::string> ports;  // sorted port keys

  bool operator==(const VlanMembership&) const = default;
};

struct BridgeConfig {
  std::string bridge_id;
  std::vector<GateControlList> gcls;  // sorted by port
  std::vector<VlanMembership> vlans;  // sorted by vlan id

  bool operator==(const BridgeConfig&) const = default;
};

/// Cyclic window [start, end) of one traffic class, start in [0, cycle).
struct ClassWindow {
  Nanos start_ns = 0;
  Nanos end_ns = 0;
  int traffic_class = 0;
};

/// Builds the gate control list of one port. Windows of the same class that
/// touch are merged; each window gets an all-closed guard of
/// wire_occupancy(1522, speed) before it (clipped to the free gap, wrapping
/// modulo the cycle); remaining time keeps every class open except those
/// owning a window on the port. Throws GclOverflow above max_entries
/// (unbounded when nullopt).
GateControlList build_port_gcl(const std::string& port_id, Nanos cycle_ns,
                               std::span<const ClassWindow> windows, BitsPerSecond speed_bps,
                               std::optional<int> max_entries);

class CncState {
 public:
  CncState(std::string domain_id, std::shared_ptr<const Topology> topology);

  const std::string& domain_id() const { return domain_id_; }
  const Topology& topology() const { return *topology_; }
  /// Schedule cycle shared by every port of the domain; 0 when empty.
  Nanos hyperperiod() const { return hyperperiod_; }
  const std::map<std::string, AdmittedStream>& admitted() const { return admitted_; }

  /// Greedy as-soon-as-possible admission of every period instance over the
  /// new hyperperiod. Existing reservations never move. On error the state
  /// is unchanged. Throws InfeasibleError, CapabilityError,
  /// HyperperiodOverflow, ValidationError (duplicate id / foreign segment).
  const StreamSchedule& admit_stream(const StreamRequirement& req, const PathSegment& segment,
                                     Nanos latency_budget_ns, SegmentEntry entry = {});

  /// Throws UnknownStream.
  void remove_stream(const std::string& stream_id);

  /// Reservations of a port expanded over the current hyperperiod, sorted by
  /// window start.
  std::vector<HopReservation> reservations(const std::string& port_id) const;
  std::vector<std::string> reserved_ports() const;

  /// One list per port with at least one reservation, keyed by port.
  std::map<std::string, GateControlList> synthesize_gcls() const;

  /// One document per configured bridge, sorted by bridge id.
  std::vector<BridgeConfig> bridge_config() const;

  nlohmann::ordered_json to_json() const;
  static CncState from_json(const nlohmann::ordered_json& doc, std::shared_ptr<const Topology> topology);

  /// Deep equality of the domain state; the topology is compared by identity
  /// of content only through the admitted segments.
  bool operator==(const CncState& other) const {
    return domain_id_ == other.domain_id_ && hyperperiod_ == other.hyperperiod_ &&
           admitted_ == other.admitted_;
  }

 private:
  std::map<std::string, GateControlList> synthesize_ports(const std::vector<std::string>& ports,
                                                          const std::map<std::string, AdmittedStream>& admitted,
                                                          Nanos cycle) const;

  std::string domain_id_;
  std::shared_ptr<const Topology> topology_;
  std::map<std::string, AdmittedStream> admitted_;
  Nanos hyperperiod_ = 0;
};

nlohmann::ordered_json to_json(const BridgeConfig& config);

}  // namespace tsnfv
