// SPDX-License-Identifier: Apache-2.0
//
// User/Network Interface between the CUC and the per-domain CNCs. Messages
// travel as one JSON object per line; the dispatcher routes each request to
// the CNC owning the target domain and records the NFV reference point
// (Or-Vi towards a VIM, Or-Wi towards a WIM) it was carried over.
#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "tsnfv/cnc.hpp"
#include "tsnfv/model.hpp"
#include "tsnfv/topology.hpp"

namespace tsnfv {

using RequestId = std::uint64_t;

enum class ControllerKind { vim, wim };
enum class ReferencePoint { or_vi, or_wi };

enum class UniCause {
  infeasible_budget,
  no_free_window,
  capability,
  unknown_stream,
  malformed,
  gcl_overflow,
  hyperperiod_overflow,
};

std::string to_string(ControllerKind kind);
std::string to_string(ReferencePoint point);
std::string to_string(UniCause cause);
UniCause parse_uni_cause(std::string_view text);

/// Reference point is a pure function of the controller kind.
constexpr ReferencePoint reference_point_for(ControllerKind kind) {
  return kind == ControllerKind::vim ? ReferencePoint::or_vi : ReferencePoint::or_wi;
}

struct StreamRequest {
  RequestId request_id = 0;
  StreamRequirement requirement;
  std::vector<Hop> hops;
  std::optional<PortRef> entry_port;
  Nanos latency_budget_ns = 0;
  SegmentEntry entry;

  bool operator==(const StreamRequest&) const = default;
};

struct RemoveStream {
  RequestId request_id = 0;
  std::string stream_id;

  bool operator==(const RemoveStream&) const = default;
};

struct CapabilityQuery {
  RequestId request_id = 0;

  bool operator==(const CapabilityQuery&) const = default;
};

using UniRequest = std::variant<StreamRequest, RemoveStream, CapabilityQuery>;

RequestId request_id_of(const UniRequest& request);
std::string kind_of(const UniRequest& request);

struct BridgeCapability {
  std::string bridge_id;
  bool supports_qbv = false;
  int gcl_max_entries = 0;
  Nanos processing_delay_ns = 0;

  bool operator==(const BridgeCapability&) const = default;
};

struct UniResponse {
  RequestId request_id = 0;
  bool ok = false;
  std::optional<UniCause> cause;
  std::string detail;
  std::optional<StreamSchedule> schedule;   // ok StreamRequest
  std::optional<std::string> domain_id;     // CapabilityQuery
  std::vector<BridgeCapability> bridges;    // CapabilityQuery

  bool operator==(const UniResponse&) const = default;
};

/// One line, terminated by '\n'.
std::string encode(const UniRequest& request);
std::string encode(const UniResponse& response);
/// Throws DecodeError on malformed or truncated input or an unknown kind.
UniRequest decode_request(std::string_view bytes);
UniResponse decode_response(std::string_view bytes);

nlohmann::ordered_json to_json(const UniRequest& request);
UniRequest request_from_json(const nlohmann::ordered_json& j);

/// Routing envelope used on a shared service socket: the target domain plus
/// the request. One line.
std::string encode_envelope(const std::string& domain_id, const UniRequest& request);

/// CNC side of the interface: applies the request to the state and maps
/// every failure onto a cause code. Never throws for domain errors.
UniResponse handle_request(CncState& state, const UniRequest& request);

class UniChannel {
 public:
  virtual ~UniChannel() = default;
  /// Throws TransportError when the controller cannot be reached.
  virtual UniResponse exchange(const std::string& domain_id, const UniRequest& request) = 0;
};

/// Direct call into a CNC living in this process.
class InProcessChannel final : public UniChannel {
 public:
  explicit InProcessChannel(CncState& state) : state_(&state) {}
  UniResponse exchange(const std::string& domain_id, const UniRequest& request) override;

 private:
  CncState* state_;
};

struct RegistryEntry {
  std::string controller_id;
  ControllerKind kind = ControllerKind::vim;
  std::string address;  // "in-process" or "host:port"
  std::shared_ptr<UniChannel> channel;
};

class CncRegistry {
 public:
  void register_domain(const std::string& domain_id, RegistryEntry entry);
  /// Throws UnknownDomain.
  const RegistryEntry& at(const std::string& domain_id) const;
  bool contains(const std::string& domain_id) const { return entries_.count(domain_id) != 0; }
  const std::map<std::string, RegistryEntry>& entries() const { return entries_; }

  /// Every topology domain registered; PoPs on VIMs, WAN segments on WIMs.
  /// Throws ValidationError.
  void validate_against(const Topology& topology) const;

  /// Controller kind implied by the domain kind.
  static ControllerKind kind_for(DomainKind kind) {
    return kind == DomainKind::nfvi_pop ? ControllerKind::vim : ControllerKind::wim;
  }

 private:
  std::map<std::string, RegistryEntry> entries_;
};

struct AuditRecord {
  RequestId request_id = 0;
  std::string domain_id;
  ReferencePoint reference_point = ReferencePoint::or_vi;
  std::string message_kind;

  bool operator==(const AuditRecord&) const = default;
};

class UniDispatcher {
 public:
  explicit UniDispatcher(const CncRegistry& registry) : registry_(&registry) {}

  RequestId next_request_id() { return next_id_++; }
  const CncRegistry& registry() const { return *registry_; }

  /// Delivers the request to the owning CNC and returns its response. The
  /// audit record is appended before delivery. Throws UnknownDomain and
  /// TransportError (also on a response whose id does not match).
  UniResponse dispatch(const UniRequest& request, const std::string& domain_id);

  const std::vector<AuditRecord>& log() const { return log_; }
  void restore(std::vector<AuditRecord> log, RequestId next_id) {
    log_ = std::move(log);
    next_id_ = next_id;
  }
  RequestId peek_next_id() const { return next_id_; }

 private:
  const CncRegistry* registry_;
  std::vector<AuditRecord> log_;
  RequestId next_id_ = 1;
};

nlohmann::ordered_json to_json(const AuditRecord& record);
AuditRecord audit_from_json(const nlohmann::ordered_json& j);

}  // namespace tsnfv
