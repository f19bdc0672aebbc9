// SPDX-License-Identifier: Apache-2.0
//
// Core value types shared by every module. All times are integer
// nanoseconds on one network-wide clock whose epoch is the start of every
// gate cycle.
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tsnfv {

using Nanos = std::int64_t;
using BitsPerSecond = std::int64_t;

inline constexpr Nanos kHyperperiodCap = 1'000'000'000;
inline constexpr int kMinFrameBytes = 64;
inline constexpr int kMaxFrameBytes = 1522;
/// Preamble + SFD (8 B) and inter-frame gap (12 B).
inline constexpr int kWireOverheadBytes = 20;
inline constexpr int kTrafficClasses = 8;

struct TrafficSpec {
  Nanos period_ns = 0;
  int max_frame_bytes = 0;
  int frames_per_period = 0;
  Nanos max_latency_ns = 0;

  /// Throws ValidationError when an invariant does not hold.
  void validate() const;

  bool operator==(const TrafficSpec&) const = default;
};

class MacAddress {
 public:
  constexpr MacAddress() = default;
  constexpr explicit MacAddress(std::uint64_t value) : value_(value & 0xFFFF'FFFF'FFFFULL) {}

  /// Accepts "aa:bb:cc:dd:ee:ff" (':' or '-' separated).
  static MacAddress parse(std::string_view text);
  std::string to_string() const;
  constexpr std::uint64_t value() const { return value_; }

  bool operator==(const MacAddress&) const = default;
  auto operator<=>(const MacAddress&) const = default;

 private:
  std::uint64_t value_ = 0;
};

struct DataFrameSpec {
  MacAddress src_mac;
  MacAddress dst_mac;
  std::optional<std::string> src_ip;
  std::optional<std::string> dst_ip;
  int vlan_id = 0;
  int pcp = 0;

  void validate() const;
  bool operator==(const DataFrameSpec&) const = default;
};

struct EndpointRef {
  std::string station_id;
  std::string interface;
  std::string node_id;

  bool operator==(const EndpointRef&) const = default;
};

/// One unidirectional talker-to-listener stream.
struct StreamRequirement {
  std::string stream_id;
  EndpointRef talker;
  EndpointRef listener;
  DataFrameSpec frame;
  TrafficSpec traffic;

  void validate() const;
  /// PCP is mapped one-to-one onto the traffic class.
  int traffic_class() const { return frame.pcp; }
  bool operator==(const StreamRequirement&) const = default;
};

struct GclEntry {
  std::uint8_t gate_states = 0;  // bit i set: class i may transmit
  Nanos interval_ns = 0;

  bool operator==(const GclEntry&) const = default;
};

struct GateControlList {
  std::string port_id;
  Nanos cycle_ns = 0;
  Nanos base_time_ns = 0;
  std::vector<GclEntry> entries;

  bool operator==(const GateControlList&) const = default;
};

/// Transmission window reserved for one period instance of a stream on one
/// egress port. Times are absolute within the owning schedule's pattern and
/// are not normalized: window_start_ns may exceed the cycle.
///
/// [ready_first_ns, ready_last_ns] bounds when the first and the last frame
/// of the burst are enqueued at the port; the window never opens before
/// ready_last_ns.
struct HopReservation {
  std::string port_id;
  std::string stream_id;
  int instance = 0;
  int traffic_class = 0;
  Nanos window_start_ns = 0;
  Nanos window_end_ns = 0;
  Nanos ready_first_ns = 0;
  Nanos ready_last_ns = 0;

  Nanos length() const { return window_end_ns - window_start_ns; }
  bool operator==(const HopReservation&) const = default;
};

/// Result of admitting one stream onto one domain segment.
///
/// The reservations repeat every pattern_ns (a multiple of the stream
/// period). Offsets are measured from the talker's nominal release of the
/// instance; entry_* are the arrival bounds at the segment entry handed in
/// by the CUC (zero for the talker segment).
struct StreamSchedule {
  std::string stream_id;
  Nanos period_ns = 0;
  Nanos pattern_ns = 0;
  Nanos entry_first_ns = 0;
  Nanos entry_last_ns = 0;
  int hop_count = 0;
  /// Instance-major, path order within an instance.
  std::vector<HopReservation> reservations;
  /// Worst segment latency: last bit at segment exit minus (release + entry_last).
  Nanos e2e_latency_ns = 0;
  /// Earliest first-frame and latest last-frame arrival at the segment exit.
  Nanos exit_first_ns = 0;
  Nanos exit_last_ns = 0;

  int instance_count() const {
    return pattern_ns > 0 ? static_cast<int>(pattern_ns / period_ns) : 0;
  }
  bool operator==(const StreamSchedule&) const = default;
};

struct CapabilitySet {
  bool time_sync = false;
  bool qbv_shaping = false;
  bool rt_scheduling_policy = false;
  bool rt_kernel_or_hypervisor = false;
  bool hw_isolation = false;

  bool operator==(const CapabilitySet&) const = default;
};

/// Least common multiple of the periods. Throws HyperperiodOverflow above
/// kHyperperiodCap and ValidationError on empty or non-positive input.
Nanos hyperperiod(std::span<const Nanos> periods);

/// ceil((frame_bytes + 20) * 8e9 / link_speed_bps).
Nanos wire_occupancy(int frame_bytes, BitsPerSecond link_speed_bps);

/// Back-to-back burst of frames_per_period maximum-size frames.
Nanos burst_occupancy(const TrafficSpec& spec, BitsPerSecond link_speed_bps);

/// Euclidean modulo for possibly negative time offsets.
constexpr Nanos mod_floor(Nanos value, Nanos modulus) {
  const Nanos r = value % modulus;
  return r < 0 ? r + modulus : r;
}

}  // namespace tsnfv
