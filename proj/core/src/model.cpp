// SPDX-License-Identifier: Apache-2.0
#include "tsnfv/model.hpp"

#include <cctype>
#include <cstdio>
#include <numeric>

#include "tsnfv/error.hpp"

namespace tsnfv {

std::string to_string(InfeasibleCause cause) {
  switch (cause) {
    case InfeasibleCause::exceeds_budget:
      return "exceeds_budget";
    case InfeasibleCause::no_free_window:
      return "no_free_window";
    case InfeasibleCause::gcl_overflow:
      return "gcl_overflow";
  }
  return "unknown";
}

void TrafficSpec::validate() const {
  if (period_ns <= 0) throw ValidationError("traffic period must be positive");
  if (max_frame_bytes < kMinFrameBytes || max_frame_bytes > kMaxFrameBytes)
    throw ValidationError("max_frame_bytes " + std::to_string(max_frame_bytes) +
                          " outside 64..1522");
  if (frames_per_period < 1) throw ValidationError("frames_per_period must be >= 1");
  if (max_latency_ns <= 0) throw ValidationError("max_latency_ns must be positive");
}

MacAddress MacAddress::parse(std::string_view text) {
  std::uint64_t value = 0;
  int octets = 0;
  std::size_t i = 0;
  auto hex = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    return -1;
  };
  while (i < text.size()) {
    if (i + 2 > text.size()) break;
    const int hi = hex(text[i]);
    const int lo = hex(text[i + 1]);
    if (hi < 0 || lo < 0) break;
    value = (value << 8) | static_cast<std::uint64_t>(hi * 16 + lo);
    ++octets;
    i += 2;
    if (i == text.size()) break;
    if (text[i] != ':' && text[i] != '-') break;
    ++i;
  }
  if (octets != 6 || i != text.size())
    throw ValidationError("malformed MAC address '" + std::string(text) + "'");
  return MacAddress(value);
}

std::string MacAddress::to_string() const {
  char buf[18];
  std::snprintf(buf, sizeof buf, "%02x:%02x:%02x:%02x:%02x:%02x",
                static_cast<unsigned>((value_ >> 40) & 0xFF),
                static_cast<unsigned>((value_ >> 32) & 0xFF),
                static_cast<unsigned>((value_ >> 24) & 0xFF),
                static_cast<unsigned>((value_ >> 16) & 0xFF),
                static_cast<unsigned>((value_ >> 8) & 0xFF),
                static_cast<unsigned>(value_ & 0xFF));
  return buf;
}

void DataFrameSpec::validate() const {
  if (vlan_id < 1 || vlan_id > 4094)
    throw ValidationError("vlan_id " + std::to_string(vlan_id) + " outside 1..4094");
  if (pcp < 0 || pcp > 7) throw ValidationError("pcp " + std::to_string(pcp) + " outside 0..7");
  if (src_mac == dst_mac) throw ValidationError("source and destination MAC are equal");
}

void StreamRequirement::validate() const {
  if (stream_id.empty()) throw ValidationError("stream_id is empty");
  for (const EndpointRef* ep : {&talker, &listener}) {
    if (ep->station_id.empty() || ep->interface.empty() || ep->node_id.empty())
      throw ValidationError("stream " + stream_id + " has an incomplete endpoint");
  }
  if (talker.node_id == listener.node_id && talker.interface == listener.interface)
    throw ValidationError("stream " + stream_id + " talks to its own interface");
  frame.validate();
  traffic.validate();
}

Nanos hyperperiod(std::span<const Nanos> periods) {
  if (periods.empty()) throw ValidationError("hyperperiod of an empty period set");
  Nanos h = 1;
  for (Nanos p : periods) {
    if (p <= 0) throw ValidationError("hyperperiod: non-positive period");
    const Nanos g = std::gcd(h, p);
    // h / g * p without overflowing int64: both factors are bounded by the cap.
    const Nanos q = h / g;
    if (q > kHyperperiodCap / p)
      throw HyperperiodOverflow("hyperperiod exceeds " + std::to_string(kHyperperiodCap) + " ns");
    h = q * p;
  }
  if (h > kHyperperiodCap)
    throw HyperperiodOverflow("hyperperiod " + std::to_string(h) + " exceeds cap");
  return h;
}

Nanos wire_occupancy(int frame_bytes, BitsPerSecond link_speed_bps) {
  const std::int64_t bits = static_cast<std::int64_t>(frame_bytes + kWireOverheadBytes) * 8;
  const std::int64_t scaled = bits * 1'000'000'000LL;
  return (scaled + link_speed_bps - 1) / link_speed_bps;
}

Nanos burst_occupancy(const TrafficSpec& spec, BitsPerSecond link_speed_bps) {
  return spec.frames_per_period * wire_occupancy(spec.max_frame_bytes, link_speed_bps);
}

}  // namespace tsnfv
