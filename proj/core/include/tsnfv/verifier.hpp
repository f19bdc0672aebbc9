// SPDX-License-Identifier: Apache-2.0
//
// Discrete-event replay of admitted streams through the topology under the
// installed gate control lists, with saturating best-effort background
// traffic, plus structural checks on the lists themselves.
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "tsnfv/cuc.hpp"
#include "tsnfv/model.hpp"
#include "tsnfv/topology.hpp"

namespace tsnfv {

struct SimConfig {
  int duration_cycles = 3;
  double bg_load = 1.0;  // fraction of free gate time offered as best effort
  std::uint64_t seed = 1;
  Nanos release_jitter_ns = 0;  // reserved; must be 0

  /// Throws SimConfigError.
  void validate() const;
};

/// A scheduled stream as the simulator sees it: the full talker-to-listener
/// path and the talker's transmit offsets.
struct SimStream {
  std::string stream_id;
  std::vector<Hop> hops;
  int traffic_class = 0;
  int frame_bytes = 0;
  int frames_per_period = 0;
  Nanos period_ns = 0;
  Nanos pattern_ns = 0;
  std::vector<Nanos> txtime_offsets_ns;  // one per instance in the pattern
  Nanos max_latency_ns = 0;
  Nanos expected_latency_ns = 0;  // scheduler-computed worst case
};

struct StreamReport {
  std::string stream_id;
  Nanos observed_worst_latency_ns = 0;
  std::int64_t observed_frame_count = 0;
  std::int64_t dropped_frames = 0;

  bool operator==(const StreamReport&) const = default;
};

struct PortReport {
  std::string port_id;
  std::int64_t gate_violations = 0;
  std::int64_t scheduled_frames = 0;
  std::int64_t best_effort_frames = 0;
  std::int64_t best_effort_dropped = 0;

  bool operator==(const PortReport&) const = default;
};

struct SimReport {
  std::vector<StreamReport> streams;  // input order
  std::vector<PortReport> ports;      // ports that carried traffic, sorted
  Nanos horizon_ns = 0;

  const StreamReport* find(const std::string& stream_id) const;
  std::int64_t total_drops() const;
  std::int64_t total_gate_violations() const;
  bool operator==(const SimReport&) const = default;
};

/// Ports without a list keep every gate open. Throws SimConfigError.
SimReport simulate(const Topology& topology, const std::map<std::string, GateControlList>& gcls,
                   const std::vector<SimStream>& streams, const SimConfig& cfg);

enum class GclViolationKind { sum_mismatch, zero_length, multi_gate_window, guard_too_short };

std::string to_string(GclViolationKind kind);

struct GclViolation {
  GclViolationKind kind = GclViolationKind::sum_mismatch;
  int entry_index = -1;
  Nanos needed_ns = 0;  // guard_too_short: required guard length
  std::string detail;
};

/// Empty when the list is well formed.
std::vector<GclViolation> check_gcl_wellformed(const GateControlList& gcl, BitsPerSecond link_speed_bps);

/// Streams of an instance in simulator form.
std::vector<SimStream> sim_streams(const NsInstance& instance);

struct VerifyResult {
  bool pass = false;
  std::vector<std::string> failures;
  /// bg_load = 0 latencies that differ from the scheduler's value.
  std::vector<std::string> oracle_mismatches;
  std::map<std::string, std::vector<GclViolation>> gcl_violations;
  SimReport quiet;   // bg_load = 0
  SimReport loaded;  // bg_load = cfg.bg_load
};

/// Simulates the instance together with every other active instance sharing
/// the network. Throws PreconditionError unless the instance is active and
/// SimConfigError on a bad configuration.
VerifyResult verify_ns(const NsInstance& instance, const std::vector<const NsInstance*>& co_resident,
                       const Topology& topology, const std::map<std::string, GateControlList>& gcls,
                       const SimConfig& cfg);

nlohmann::ordered_json to_json(const SimReport& report);
nlohmann::ordered_json to_json(const VerifyResult& result);

}  // namespace tsnfv
