// SPDX-License-Identifier: Apache-2.0
//
// Centralized User Configuration hosted by the orchestrator (NFVO + VNFM):
// network-service lifecycle, cross-domain latency budgets, saga-style
// admission over the UNI, and end-station configuration directives.
#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "tsnfv/descriptors.hpp"
#include "tsnfv/model.hpp"
#include "tsnfv/topology.hpp"
#include "tsnfv/uni.hpp"

namespace tsnfv {

enum class InstanceStatus { active, failed, terminated };
enum class SchedulingPolicy { deadline, fifo_rt };
enum class StreamRole { talker, listener };

std::string to_string(InstanceStatus status);
std::string to_string(SchedulingPolicy policy);

struct TasSchedule {
  std::string port_id;
  Nanos cycle_ns = 0;
  Nanos base_time_ns = 0;
  std::vector<GclEntry> entries;

  bool operator==(const TasSchedule&) const = default;
};

struct TxTimeOffsets {
  std::string stream_id;
  Nanos pattern_ns = 0;
  std::vector<Nanos> offsets_ns;  // first-hop window starts within the pattern

  bool operator==(const TxTimeOffsets&) const = default;
};

struct VlanTag {
  int vlan_id = 0;
  int pcp = 0;

  bool operator==(const VlanTag&) const = default;
  auto operator<=>(const VlanTag&) const = default;
};

struct EndStationConfig {
  std::string station_id;  // NSD member id
  std::string node_id;
  std::string interface;
  bool sync_daemon = true;
  std::vector<VlanTag> vlans;
  std::map<int, int> socket_priority_map;  // internal priority -> PCP
  SchedulingPolicy scheduling_policy = SchedulingPolicy::fifo_rt;
  std::optional<TasSchedule> tas_schedule;  // talkers only
  std::vector<TxTimeOffsets> txtime_offsets;  // talkers only

  bool operator==(const EndStationConfig&) const = default;
};

/// Schedule of one stream inside one domain.
struct DomainSchedule {
  std::string domain_id;
  PathSegment segment;
  Nanos latency_budget_ns = 0;
  StreamSchedule schedule;

  bool operator==(const DomainSchedule&) const = default;
};

struct StreamRecord {
  StreamRequirement requirement;  // stream_id qualified with the instance id
  std::vector<DomainSchedule> segments;  // talker -> listener order
  /// Worst last-frame arrival at the listener after the nominal release.
  Nanos e2e_latency_ns = 0;

  bool operator==(const StreamRecord&) const = default;
};

struct FailureInfo {
  std::string stream_id;
  std::string domain_id;
  std::string cause;
  std::string detail;

  bool operator==(const FailureInfo&) const = default;
};

struct NsInstance {
  std::string instance_id;
  Nsd nsd;
  Placement placement;
  std::vector<StreamRecord> streams;  // admission order
  std::vector<EndStationConfig> configs;
  InstanceStatus status = InstanceStatus::failed;
  std::optional<FailureInfo> failure;

  const StreamRecord* find_stream(const std::string& stream_id) const;
  bool operator==(const NsInstance&) const = default;
};

/// budget_i = floor(max * hops_i / total); the remainder goes to the last
/// segment so the parts sum to max.
std::vector<Nanos> partition_latency_budget(Nanos max_latency_ns, const std::vector<int>& hop_counts);

/// Directive for one station's role in one admitted stream, or nullopt for
/// unmanaged external stations. Listeners carry no TAS/txtime fields.
std::optional<EndStationConfig> generate_endstation_config(const StreamRecord& stream, StreamRole role,
                                                           const Node& station_node,
                                                           const std::optional<TasSchedule>& tas);

class Cuc {
 public:
  Cuc(std::shared_ptr<const Topology> topology, UniDispatcher& dispatcher);

  /// On admission failure every reservation already made is removed with
  /// compensating RemoveStream requests, the instance is recorded as failed
  /// and AdmissionFailed is thrown. Input problems (CapabilityError, NoPath,
  /// UnplacedMember, ValidationError) are thrown before any UNI traffic.
  const NsInstance& instantiate(const Nsd& nsd, const Placement& placement);

  /// Throws UnknownInstance, AlreadyTerminated, InstanceNotActive.
  const NsInstance& terminate(const std::string& instance_id);

  /// Terminate + instantiate under the same id. When the new descriptors
  /// cannot be admitted the original requirements are re-admitted and
  /// UpdateFailed is thrown.
  const NsInstance& update(const std::string& instance_id, const Nsd& nsd, const Placement& placement);

  const std::map<std::string, NsInstance>& instances() const { return instances_; }
  /// Throws UnknownInstance.
  const NsInstance& instance(const std::string& instance_id) const;

  /// Number of end-station configuration documents handed out so far.
  std::size_t configs_emitted() const { return configs_emitted_; }

  void restore(std::map<std::string, NsInstance> instances, std::uint64_t next_sequence,
               std::size_t configs_emitted);
  std::uint64_t next_sequence() const { return next_sequence_; }

 private:
  struct Prepared {
    std::vector<StreamRequirement> streams;  // qualified, admission order
    std::vector<std::vector<PathSegment>> segments;
  };

  Prepared prepare(const std::string& instance_id, const Nsd& nsd, const Placement& placement) const;
  /// Admits a prepared instance; fills `out` and throws AdmissionFailed after
  /// rolling back.
  void admit(NsInstance& out, const Prepared& prepared);
  void release(const NsInstance& instance);
  std::vector<EndStationConfig> build_configs(const NsInstance& instance) const;
  std::optional<TasSchedule> talker_tas(const std::string& port_id, const NsInstance& pending) const;

  std::shared_ptr<const Topology> topology_;
  UniDispatcher* dispatcher_;
  std::map<std::string, NsInstance> instances_;
  std::uint64_t next_sequence_ = 1;
  std::size_t configs_emitted_ = 0;
};

nlohmann::ordered_json to_json(const EndStationConfig& config);
EndStationConfig endstation_config_from_json(const nlohmann::ordered_json& j);
nlohmann::ordered_json to_json(const NsInstance& instance);
NsInstance instance_from_json(const nlohmann::ordered_json& j);

}  // namespace tsnfv
