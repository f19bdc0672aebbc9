// SPDX-License-Identifier: Apache-2.0
//
// File-backed workspace: topology, one in-process CNC per domain, the CUC
// with its instances, the UNI audit log, and the gate control lists
// installed on every port.
#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "tsnfv/cnc.hpp"
#include "tsnfv/cuc.hpp"
#include "tsnfv/topology.hpp"
#include "tsnfv/uni.hpp"
#include "tsnfv/verifier.hpp"

namespace tsnfv {

class Workspace {
 public:
  explicit Workspace(Topology topology);
  Workspace(const Workspace&) = delete;
  Workspace& operator=(const Workspace&) = delete;

  /// Throws ParseError / ValidationError.
  static std::unique_ptr<Workspace> from_json(const nlohmann::ordered_json& doc);
  static std::unique_ptr<Workspace> load(const std::filesystem::path& state_file);
  nlohmann::ordered_json to_json() const;
  /// Serialized state, byte-stable.
  std::string dump() const;
  void save(const std::filesystem::path& state_file) const;

  const Topology& topology() const { return *topology_; }
  std::shared_ptr<const Topology> shared_topology() const { return topology_; }
  Cuc& cuc() { return *cuc_; }
  const Cuc& cuc() const { return *cuc_; }
  UniDispatcher& dispatcher() { return *dispatcher_; }
  const UniDispatcher& dispatcher() const { return *dispatcher_; }
  const CncRegistry& registry() const { return registry_; }
  /// Throws UnknownDomain.
  CncState& cnc(const std::string& domain_id);
  const CncState& cnc(const std::string& domain_id) const;
  const std::map<std::string, std::unique_ptr<CncState>>& cncs() const { return cncs_; }

  /// Lists as installed on the ports; refreshed after every lifecycle
  /// operation, but read back verbatim from a state file.
  const std::map<std::string, GateControlList>& installed_gcls() const { return installed_; }
  void install_gcl(const GateControlList& gcl) { installed_[gcl.port_id] = gcl; }
  void refresh_gcls();

  const NsInstance& instantiate(const Nsd& nsd, const Placement& placement);
  const NsInstance& terminate(const std::string& instance_id);
  const NsInstance& update(const std::string& instance_id, const Nsd& nsd, const Placement& placement);
  /// Raw UNI request to one domain's CNC, as a remote CUC would send it.
  UniResponse dispatch(const UniRequest& request, const std::string& domain_id);

  /// Throws UnknownInstance, PreconditionError, SimConfigError.
  VerifyResult verify(const std::string& instance_id, const SimConfig& cfg) const;

  std::vector<BridgeConfig> bridge_configs() const;

 private:
  std::shared_ptr<const Topology> topology_;
  std::map<std::string, std::unique_ptr<CncState>> cncs_;
  CncRegistry registry_;
  std::unique_ptr<UniDispatcher> dispatcher_;
  std::unique_ptr<Cuc> cuc_;
  std::map<std::string, GateControlList> installed_;
};

/// Exit-code contract for failed lifecycle operations: 2 when the network
/// refused the service (admission, capabilities, update), 1 otherwise.
int exit_code_of(const std::exception& e);

// Deterministic text renderings for the `show` command. Throw
// ValidationError on an unknown port.
std::string render_streams(const Workspace& ws);
std::string render_gcl(const Workspace& ws, const std::string& port_id);
std::string render_config(const Workspace& ws, const std::string& station);
std::string render_audit(const Workspace& ws);
std::string render_instance(const NsInstance& instance);
std::string render_verify(const VerifyResult& result);

}  // namespace tsnfv
