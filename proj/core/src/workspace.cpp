// SPDX-License-Identifier: Apache-2.0
#include "tsnfv/workspace.hpp"

#include <bitset>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "tsnfv/error.hpp"
#include "tsnfv/json_io.hpp"

namespace tsnfv {

using io::Json;

namespace {

constexpr const char* kFormat = "tsnfv-state/1";

}  // namespace

Workspace::Workspace(Topology topology) : topology_(std::make_shared<const Topology>(std::move(topology))) {
  for (const auto& [id, d] : topology_->domains()) {
    auto state = std::make_unique<CncState>(id, topology_);
    registry_.register_domain(id, RegistryEntry{d.controller_id, CncRegistry::kind_for(d.kind), "in-process",
                                                std::make_shared<InProcessChannel>(*state)});
    cncs_.emplace(id, std::move(state));
  }
  registry_.validate_against(*topology_);
  dispatcher_ = std::make_unique<UniDispatcher>(registry_);
  cuc_ = std::make_unique<Cuc>(topology_, *dispatcher_);
}

CncState& Workspace::cnc(const std::string& domain_id) {
  const auto it = cncs_.find(domain_id);
  if (it == cncs_.end()) throw UnknownDomain("no CNC for domain " + domain_id);
  return *it->second;
}

const CncState& Workspace::cnc(const std::string& domain_id) const {
  const auto it = cncs_.find(domain_id);
  if (it == cncs_.end()) throw UnknownDomain("no CNC for domain " + domain_id);
  return *it->second;
}

void Workspace::refresh_gcls() {
  installed_.clear();
  for (const auto& [id, state] : cncs_)
    for (auto& [port, gcl] : state->synthesize_gcls()) installed_[port] = std::move(gcl);
}

const NsInstance& Workspace::instantiate(const Nsd& nsd, const Placement& placement) {
  try {
    const NsInstance& inst = cuc_->instantiate(nsd, placement);
    refresh_gcls();
    return inst;
  } catch (...) {
    refresh_gcls();
    throw;
  }
}

const NsInstance& Workspace::terminate(const std::string& instance_id) {
  const NsInstance& inst = cuc_->terminate(instance_id);
  refresh_gcls();
  return inst;
}

const NsInstance& Workspace::update(const std::string& instance_id, const Nsd& nsd, const Placement& placement) {
  try {
    const NsInstance& inst = cuc_->update(instance_id, nsd, placement);
    refresh_gcls();
    return inst;
  } catch (...) {
    refresh_gcls();
    throw;
  }
}

UniResponse Workspace::dispatch(const UniRequest& request, const std::string& domain_id) {
  UniResponse resp = dispatcher_->dispatch(request, domain_id);
  refresh_gcls();
  return resp;
}

VerifyResult Workspace::verify(const std::string& instance_id, const SimConfig& cfg) const {
  const NsInstance& inst = cuc_->instance(instance_id);
  std::vector<const NsInstance*> others;
  for (const auto& [id, other] : cuc_->instances())
    if (id != instance_id) others.push_back(&other);
  return verify_ns(inst, others, *topology_, installed_, cfg);
}

std::vector<BridgeConfig> Workspace::bridge_configs() const {
  std::vector<BridgeConfig> out;
  for (const auto& [id, state] : cncs_) {
    auto part = state->bridge_config();
    out.insert(out.end(), part.begin(), part.end());
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.bridge_id < b.bridge_id; });
  return out;
}

Json Workspace::to_json() const {
  Json cncs = Json::array();
  for (const auto& [id, state] : cncs_) cncs.push_back(state->to_json());
  Json gcls = Json::array();
  for (const auto& [port, g] : installed_) gcls.push_back(io::to_json(g));
  Json instances = Json::array();
  for (const auto& [id, inst] : cuc_->instances()) instances.push_back(tsnfv::to_json(inst));
  Json audit = Json::array();
  for (const auto& r : dispatcher_->log()) audit.push_back(tsnfv::to_json(r));
  return Json{{"format", kFormat},
              {"topology", topology_->to_json()},
              {"cncs", std::move(cncs)},
              {"installed_gcls", std::move(gcls)},
              {"instances", std::move(instances)},
              {"audit", std::move(audit)},
              {"next_request_id", dispatcher_->peek_next_id()},
              {"next_instance", cuc_->next_sequence()},
              {"configs_emitted", cuc_->configs_emitted()}};
}

std::unique_ptr<Workspace> Workspace::from_json(const Json& doc) {
  constexpr std::string_view ctx = "state file";
  const auto format = io::get<std::string>(doc, "format", ctx);
  if (format != kFormat) throw ParseError("unsupported state format " + format);
  auto ws = std::make_unique<Workspace>(Topology::from_json(io::field(doc, "topology", ctx)));
  for (const auto& jc : io::array_field(doc, "cncs", ctx)) {
    const auto domain = io::get<std::string>(jc, "domain_id", ctx);
    CncState& target = ws->cnc(domain);
    target = CncState::from_json(jc, ws->topology_);
  }
  for (const auto& jg : io::array_field(doc, "installed_gcls", ctx)) ws->install_gcl(io::gcl_from_json(jg));
  std::map<std::string, NsInstance> instances;
  for (const auto& ji : io::array_field(doc, "instances", ctx)) {
    NsInstance inst = instance_from_json(ji);
    const std::string id = inst.instance_id;
    instances.emplace(id, std::move(inst));
  }
  ws->cuc_->restore(std::move(instances), io::get<std::uint64_t>(doc, "next_instance", ctx),
                    io::get<std::size_t>(doc, "configs_emitted", ctx));
  std::vector<AuditRecord> log;
  for (const auto& ja : io::array_field(doc, "audit", ctx)) log.push_back(audit_from_json(ja));
  ws->dispatcher_->restore(std::move(log), io::get<RequestId>(doc, "next_request_id", ctx));
  return ws;
}

std::unique_ptr<Workspace> Workspace::load(const std::filesystem::path& state_file) {
  return from_json(io::read_file(state_file.string()));
}

std::string Workspace::dump() const { return io::dump_document(to_json()); }

void Workspace::save(const std::filesystem::path& state_file) const {
  const std::string text = dump();
  const auto tmp = state_file.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp);
    out << text;
    if (!out) throw Error("cannot write " + tmp);
  }
  std::filesystem::rename(tmp, state_file);
}

int exit_code_of(const std::exception& e) {
  if (dynamic_cast<const AdmissionFailed*>(&e) != nullptr || dynamic_cast<const CapabilityError*>(&e) != nullptr ||
      dynamic_cast<const UpdateFailed*>(&e) != nullptr)
    return 2;
  return 1;
}

std::string render_instance(const NsInstance& inst) {
  std::ostringstream os;
  os << "instance " << inst.instance_id << " " << to_string(inst.status) << "\n";
  for (const auto& s : inst.streams) {
    os << "  stream " << s.requirement.stream_id << "  period " << s.requirement.traffic.period_ns
       << " ns  max " << s.requirement.traffic.max_latency_ns << " ns  latency " << s.e2e_latency_ns << " ns  via";
    for (const auto& seg : s.segments) os << " " << seg.domain_id;
    os << "\n";
  }
  if (inst.failure) {
    os << "  failed stream " << inst.failure->stream_id << " in domain " << inst.failure->domain_id << ": "
       << inst.failure->cause << "\n";
  }
  return os.str();
}

std::string render_streams(const Workspace& ws) {
  std::ostringstream os;
  os << std::left << std::setw(28) << "stream" << std::setw(12) << "instance" << std::setw(12) << "status"
     << std::right << std::setw(12) << "period_ns" << std::setw(12) << "max_ns" << std::setw(12) << "latency_ns"
     << "  domains\n";
  for (const auto& [id, inst] : ws.cuc().instances()) {
    for (const auto& s : inst.streams) {
      os << std::left << std::setw(28) << s.requirement.stream_id << std::setw(12) << id << std::setw(12)
         << to_string(inst.status) << std::right << std::setw(12) << s.requirement.traffic.period_ns
         << std::setw(12) << s.requirement.traffic.max_latency_ns << std::setw(12) << s.e2e_latency_ns << " ";
      for (const auto& seg : s.segments) os << " " << seg.domain_id;
      os << "\n";
    }
  }
  return os.str();
}

std::string render_gcl(const Workspace& ws, const std::string& port_id) {
  const auto& gcls = ws.installed_gcls();
  const auto it = gcls.find(port_id);
  if (it == gcls.end()) {
    ws.topology().port_speed(port_id);  // unknown ports raise here
    return "port " + port_id + ": no gate control list (all gates open)\n";
  }
  const GateControlList& g = it->second;
  std::ostringstream os;
  os << "port " << g.port_id << "  cycle " << g.cycle_ns << " ns  base " << g.base_time_ns << " ns  entries "
     << g.entries.size() << "\n";
  os << std::right << std::setw(4) << "#" << std::setw(12) << "start_ns" << std::setw(12) << "end_ns"
     << std::setw(12) << "interval" << "  gates(7..0)\n";
  Nanos t = 0;
  for (std::size_t i = 0; i < g.entries.size(); ++i) {
    const auto& e = g.entries[i];
    os << std::setw(4) << i << std::setw(12) << t << std::setw(12) << t + e.interval_ns << std::setw(12)
       << e.interval_ns << "  " << std::bitset<8>(e.gate_states) << "\n";
    t += e.interval_ns;
  }
  return os.str();
}

std::string render_config(const Workspace& ws, const std::string& station) {
  std::string out;
  for (const auto& [id, inst] : ws.cuc().instances()) {
    if (inst.status != InstanceStatus::active) continue;
    for (const auto& c : inst.configs)
      if (c.station_id == station || c.node_id == station) out += io::dump_document(to_json(c));
  }
  if (!out.empty()) return out;

  auto unmanaged = [&](const std::string& node_id) {
    if (!ws.topology().has_node(node_id)) return false;
    const Node& n = ws.topology().node(node_id);
    return n.kind == NodeKind::external_station && !n.managed;
  };
  bool known = ws.topology().has_node(station);
  bool is_unmanaged = unmanaged(station);
  for (const auto& [id, inst] : ws.cuc().instances()) {
    if (const auto m = inst.placement.members.find(station); m != inst.placement.members.end()) {
      known = true;
      is_unmanaged = is_unmanaged || unmanaged(m->second.node_id);
    }
  }
  if (is_unmanaged) return "no config (unmanaged PNF)\n";
  if (known) return "no config for " + station + "\n";
  throw ValidationError("unknown station " + station);
}

std::string render_audit(const Workspace& ws) {
  std::ostringstream os;
  for (const auto& r : ws.dispatcher().log()) {
    os << std::right << std::setw(6) << r.request_id << "  " << std::left << std::setw(6)
       << to_string(r.reference_point) << std::setw(16) << r.domain_id << r.message_kind << "\n";
  }
  return os.str();
}

std::string render_verify(const VerifyResult& r) {
  std::ostringstream os;
  os << (r.pass ? "PASS" : "FAIL") << "\n";
  os << std::left << std::setw(28) << "stream" << std::right << std::setw(14) << "quiet_ns" << std::setw(14)
     << "loaded_ns" << std::setw(10) << "frames" << std::setw(8) << "drops" << "\n";
  for (std::size_t i = 0; i < r.quiet.streams.size(); ++i) {
    const auto& q = r.quiet.streams[i];
    const auto& l = r.loaded.streams[i];
    os << std::left << std::setw(28) << q.stream_id << std::right << std::setw(14) << q.observed_worst_latency_ns
       << std::setw(14) << l.observed_worst_latency_ns << std::setw(10) << l.observed_frame_count << std::setw(8)
       << q.dropped_frames + l.dropped_frames << "\n";
  }
  os << "gate violations: " << r.quiet.total_gate_violations() + r.loaded.total_gate_violations() << "\n";
  for (const auto& f : r.failures) os << "failure: " << f << "\n";
  for (const auto& m : r.oracle_mismatches) os << "oracle mismatch: " << m << "\n";
  return os.str();
}

}  // namespace tsnfv
