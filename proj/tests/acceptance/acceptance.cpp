// SPDX-License-Identifier: Apache-2.0
//
// Acceptance run: one PASS/FAIL line per criterion, exit status 1 when any
// criterion fails. Scenario counts and oracle statistics go to stdout too.
#include <algorithm>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "scenarios.hpp"
#include "tsnfv/cnc.hpp"
#include "tsnfv/error.hpp"
#include "tsnfv/json_io.hpp"
#include "tsnfv/verifier.hpp"
#include "tsnfv/workspace.hpp"

namespace {

using namespace tsnfv;
using testing::pick;
using testing::traffic;

constexpr std::uint64_t kScenarios = 250;
constexpr std::uint64_t kDeterminismScenarios = 60;
constexpr int kDescriptorSamples = 400;
constexpr int kBruteForceSets = 400;

/// Collects the failures of one criterion; the first few are printed.
class Check {
 public:
  void fail(const std::string& why) {
    if (failures_++ < 5) notes_.push_back(why);
  }
  void expect(bool ok, const std::function<std::string()>& why) {
    if (!ok) fail(why());
  }
  bool ok() const { return failures_ == 0; }
  void stat(const std::string& s) { stats_.push_back(s); }

  void report(int id, const std::string& name, bool& all_ok) const {
    std::cout << "criterion " << id << " " << name << ": " << (ok() ? "PASS" : "FAIL");
    for (const auto& s : stats_) std::cout << " [" << s << "]";
    std::cout << "\n";
    for (const auto& n : notes_) std::cout << "    " << n << "\n";
    if (failures_ > static_cast<int>(notes_.size()))
      std::cout << "    ... " << failures_ - static_cast<int>(notes_.size()) << " more\n";
    all_ok = all_ok && ok();
  }

 private:
  int failures_ = 0;
  std::vector<std::string> notes_;
  std::vector<std::string> stats_;
};

std::string seed_tag(std::uint64_t seed) { return "seed " + std::to_string(seed) + ": "; }

struct Outcome {
  int admitted = 0;
  int refused = 0;
  std::vector<std::string> errors;  // anything other than a refusal
};

/// Instantiates one service; refusals by the network are expected.
bool try_instantiate(Workspace& ws, const testing::ServiceSpec& svc, Outcome& out) {
  try {
    ws.instantiate(svc.nsd, svc.placement);
    ++out.admitted;
    return true;
  } catch (const AdmissionFailed&) {
    ++out.refused;
  } catch (const CapabilityError&) {
    ++out.refused;
  } catch (const std::exception& e) {
    out.errors.push_back(e.what());
  }
  return false;
}

std::vector<SimStream> active_streams(const Workspace& ws) {
  std::vector<SimStream> all;
  for (const auto& [id, inst] : ws.cuc().instances()) {
    if (inst.status != InstanceStatus::active) continue;
    const auto s = sim_streams(inst);
    all.insert(all.end(), s.begin(), s.end());
  }
  return all;
}

SimConfig sim_config(double load, std::uint64_t seed) {
  SimConfig c;
  c.bg_load = load;
  c.seed = seed;
  return c;
}

std::string cnc_snapshot(const Workspace& ws) {
  std::string s;
  for (const auto& [id, state] : ws.cncs()) s += state->to_json().dump() + "\n";
  io::Json gcls = io::Json::object();
  for (const auto& [port, g] : ws.installed_gcls()) gcls[port] = g.entries.size();
  return s + gcls.dump();
}

std::string reference_point_of(const Topology& t, const std::string& domain_id) {
  return to_string(reference_point_for(CncRegistry::kind_for(t.domain(domain_id).kind)));
}

/// Reference points the audit log must show for an instance admitted from
/// scratch: one StreamRequest per segment, streams in admission order.
std::vector<std::string> expected_points(const Topology& t, const NsInstance& inst) {
  std::vector<std::string> out;
  for (const auto& s : inst.streams)
    for (const auto& seg : s.segments) out.push_back(reference_point_of(t, seg.domain_id));
  return out;
}

std::vector<std::string> logged_points(const Workspace& ws, std::size_t from) {
  std::vector<std::string> out;
  const auto& log = ws.dispatcher().log();
  for (std::size_t i = from; i < log.size(); ++i) out.push_back(to_string(log[i].reference_point));
  return out;
}

std::string join(const std::vector<std::string>& v) {
  std::string s;
  for (const auto& x : v) s += (s.empty() ? "" : ",") + x;
  return s;
}

void check_lists(const Workspace& ws, Check& c, const std::string& tag) {
  auto check_one = [&](const GateControlList& g) {
    for (const auto& v : check_gcl_wellformed(g, ws.topology().port_speed(g.port_id)))
      c.fail(tag + g.port_id + " " + to_string(v.kind) + " at entry " + std::to_string(v.entry_index));
  };
  for (const auto& [port, g] : ws.installed_gcls()) check_one(g);
  for (const auto& [id, inst] : ws.cuc().instances())
    for (const auto& cfg : inst.configs)
      if (cfg.tas_schedule)
        check_one(GateControlList{cfg.tas_schedule->port_id, cfg.tas_schedule->cycle_ns,
                                  cfg.tas_schedule->base_time_ns, cfg.tas_schedule->entries});
}

// Criteria 1, 2, 3, 7 and 10 over the random scenarios.
void random_scenarios(Check& sound, Check& oracle, Check& isolation, Check& audit, Check& lists) {
  int admitted = 0, refused = 0, streams = 0, frames = 0;
  for (std::uint64_t seed = 1; seed <= kScenarios; ++seed) {
    const auto sc = testing::random_scenario(seed);
    Workspace ws(Topology::from_json(sc.topology));
    Outcome out;
    for (const auto& svc : sc.services) {
      const std::size_t before = ws.dispatcher().log().size();
      if (!try_instantiate(ws, svc, out)) continue;
      const NsInstance& inst = std::prev(ws.cuc().instances().end())->second;
      const auto want = expected_points(ws.topology(), inst);
      const auto got = logged_points(ws, before);
      audit.expect(got == want, [&] { return seed_tag(seed) + inst.instance_id + " logged " + join(got); });
    }
    for (const auto& e : out.errors) sound.fail(seed_tag(seed) + "unexpected error: " + e);
    admitted += out.admitted;
    refused += out.refused;

    const auto sim = active_streams(ws);
    streams += static_cast<int>(sim.size());
    const SimReport quiet = simulate(ws.topology(), ws.installed_gcls(), sim, sim_config(0.0, seed));
    const SimReport loaded = simulate(ws.topology(), ws.installed_gcls(), sim, sim_config(1.0, seed));
    sound.expect(loaded.total_drops() == 0, [&] { return seed_tag(seed) + "stream frames dropped"; });
    sound.expect(loaded.total_gate_violations() == 0, [&] { return seed_tag(seed) + "gate violations"; });
    for (std::size_t i = 0; i < sim.size(); ++i) {
      const auto& s = sim[i];
      const auto& q = quiet.streams[i];
      const auto& l = loaded.streams[i];
      frames += static_cast<int>(l.observed_frame_count);
      sound.expect(l.observed_frame_count > 0, [&] { return seed_tag(seed) + s.stream_id + " never delivered"; });
      sound.expect(l.observed_worst_latency_ns <= s.max_latency_ns, [&] {
        return seed_tag(seed) + s.stream_id + " observed " + std::to_string(l.observed_worst_latency_ns) + " > max " +
               std::to_string(s.max_latency_ns);
      });
      oracle.expect(q.observed_worst_latency_ns == s.expected_latency_ns, [&] {
        return seed_tag(seed) + s.stream_id + " simulated " + std::to_string(q.observed_worst_latency_ns) +
               " vs scheduled " + std::to_string(s.expected_latency_ns);
      });
      isolation.expect(q.observed_worst_latency_ns == l.observed_worst_latency_ns, [&] {
        return seed_tag(seed) + s.stream_id + " quiet " + std::to_string(q.observed_worst_latency_ns) + " loaded " +
               std::to_string(l.observed_worst_latency_ns);
      });
    }
    check_lists(ws, lists, seed_tag(seed));
  }
  sound.expect(streams > 0, [] { return std::string("no stream was admitted in any scenario"); });
  const std::string summary = std::to_string(kScenarios) + " scenarios, " + std::to_string(admitted) +
                              " services admitted, " + std::to_string(refused) + " refused, " +
                              std::to_string(streams) + " streams";
  sound.stat(summary + ", " + std::to_string(frames) + " frames at bg 1.0");
  oracle.stat(std::to_string(streams) + " streams");
  isolation.stat(std::to_string(streams) + " streams");
}

// Criterion 2, hand-trace part: scheduler, simulator and hand trace agree.
void hand_trace(Check& oracle) {
  const TrafficSpec spec = traffic(250'000, 500, 1, 100'000);
  Workspace ws(testing::hand_trace_topology().build());
  const NsInstance& inst =
      ws.instantiate(testing::two_vnf_nsd(spec).build(), testing::two_vnf_placement("h1", "h2").build());
  const Nanos scheduled = inst.streams.at(0).e2e_latency_ns;
  const auto sim = sim_streams(inst);
  const SimReport quiet = simulate(ws.topology(), ws.installed_gcls(), sim, sim_config(0.0, 1));
  const Nanos simulated = quiet.streams.at(0).observed_worst_latency_ns;
  const Nanos traced =
      testing::hand_trace_latency(ws.topology(), ws.topology().shortest_path("h1", "h2"), spec);
  oracle.expect(scheduled == 10'320 && simulated == 10'320 && traced == 10'320, [&] {
    return "hand trace: scheduler " + std::to_string(scheduled) + ", simulator " + std::to_string(simulated) +
           ", hand trace " + std::to_string(traced) + ", expected 10320";
  });
  oracle.stat("hand trace 10320 ns");
}

// Criterion 4.
void stream_mapping(Check& c) {
  std::mt19937_64 rng(0x5eed);
  int vls = 0;
  for (int i = 0; i < kDescriptorSamples; ++i) {
    const auto [nsd, placement] = testing::random_descriptors(rng, i);
    const auto streams = derive_streams(nsd, placement);
    std::map<std::string, const StreamRequirement*> by_id;
    for (const auto& s : streams) by_id[s.stream_id] = &s;
    int tsn = 0;
    for (const auto& vl : nsd.virtual_links) {
      if (!vl.tsn) continue;
      ++tsn;
      const auto f = by_id.find(vl.vl_id + "~fwd");
      const auto r = by_id.find(vl.vl_id + "~rev");
      if (f == by_id.end() || r == by_id.end()) {
        c.fail("sample " + std::to_string(i) + ": " + vl.vl_id + " lacks a direction");
        continue;
      }
      const auto& a = *f->second;
      const auto& b = *r->second;
      c.expect(a.talker == b.listener && a.listener == b.talker && a.frame.src_mac == b.frame.dst_mac &&
                   a.frame.dst_mac == b.frame.src_mac && a.frame.vlan_id == b.frame.vlan_id &&
                   a.frame.pcp == b.frame.pcp,
               [&] { return "sample " + std::to_string(i) + ": " + vl.vl_id + " pair is not swapped"; });
    }
    vls += tsn;
    c.expect(streams.size() == static_cast<std::size_t>(2 * tsn), [&] {
      return "sample " + std::to_string(i) + ": " + std::to_string(streams.size()) + " streams for " +
             std::to_string(tsn) + " TSN links";
    });
  }
  c.stat(std::to_string(kDescriptorSamples) + " NSDs, " + std::to_string(vls) + " TSN links");
}

// Criterion 5.
void terminate_restores(Check& c) {
  int cases = 0;
  for (std::uint64_t seed = 1; seed <= kScenarios; ++seed) {
    const auto sc = testing::random_scenario(seed);
    if (sc.services.empty()) continue;
    Workspace ws(Topology::from_json(sc.topology));
    Outcome out;
    for (std::size_t i = 0; i + 1 < sc.services.size(); ++i) try_instantiate(ws, sc.services[i], out);
    const std::string before = cnc_snapshot(ws);
    std::vector<CncState> states;
    for (const auto& [id, s] : ws.cncs()) states.push_back(*s);
    if (!try_instantiate(ws, sc.services.back(), out)) continue;
    const std::string id = std::prev(ws.cuc().instances().end())->first;
    const std::size_t emitted = ws.cuc().configs_emitted();
    ws.terminate(id);
    ++cases;
    c.expect(cnc_snapshot(ws) == before, [&] { return seed_tag(seed) + "snapshot differs after terminate"; });
    std::size_t k = 0;
    for (const auto& [d, s] : ws.cncs())
      c.expect(*s == states[k++], [&] { return seed_tag(seed) + "CNC " + d + " not deep-equal"; });
    c.expect(ws.cuc().configs_emitted() == emitted, [&] { return seed_tag(seed) + "configs emitted on terminate"; });
  }
  c.expect(cases > 0, [] { return std::string("no instance to terminate"); });
  c.stat(std::to_string(cases) + " instantiate/terminate pairs");
}

/// The fixed rollback case: B2 (last segment) holds at most two entries.
void fixed_rollback(Check& c) {
  auto topo_doc = testing::cross_pop_topology().json();
  for (auto& n : topo_doc["nodes"])
    if (n["node_id"] == "B2") n["gcl_max_entries"] = 2;
  Workspace ws(Topology::from_json(topo_doc));
  const std::string before = cnc_snapshot(ws);
  const std::size_t log_before = ws.dispatcher().log().size();
  try {
    ws.instantiate(testing::two_vnf_nsd(traffic(250'000, 500, 1, 100'000)).build(),
                   testing::two_vnf_placement("h1", "h2").build());
    c.fail("cross-PoP service admitted although B2 cannot hold a list");
    return;
  } catch (const AdmissionFailed& e) {
    c.expect(e.domain_id() == "pop2", [&] { return "fixed case failed in " + e.domain_id(); });
  }
  const NsInstance& inst = ws.cuc().instance("ns-1");
  c.expect(inst.status == InstanceStatus::failed, [] { return std::string("fixed case not reported failed"); });
  c.expect(inst.streams.empty(), [] { return std::string("fixed case keeps streams"); });
  c.expect(cnc_snapshot(ws) == before, [] { return std::string("fixed case did not return to baseline"); });
  std::vector<std::string> kinds;
  const auto& log = ws.dispatcher().log();
  for (std::size_t i = log_before; i < log.size(); ++i) kinds.push_back(log[i].domain_id + ":" + log[i].message_kind);
  const std::vector<std::string> want{"pop1:stream_request", "wan1:stream_request", "pop2:stream_request",
                                      "wan1:remove_stream", "pop1:remove_stream"};
  c.expect(kinds == want, [&] { return "fixed case exchange " + join(kinds); });
}

// Criterion 6: fixed case plus random multi-domain scenarios whose final
// domain cannot hold a gate control list.
void rollback(Check& c) {
  fixed_rollback(c);
  int cases = 0, skipped = 0;
  for (std::uint64_t seed = 1; seed <= kScenarios; ++seed) {
    const auto sc = testing::random_scenario(seed);
    for (std::size_t t = 0; t < sc.services.size(); ++t) {
      // find where the first admitted stream ends on an unconstrained network
      Workspace probe(Topology::from_json(sc.topology));
      Outcome ignore;
      if (!try_instantiate(probe, sc.services[t], ignore)) continue;
      const auto& first = probe.cuc().instances().begin()->second.streams.front();
      if (first.segments.size() < 2) continue;
      const std::string last = first.segments.back().domain_id;

      auto doc = sc.topology;
      for (auto& n : doc["nodes"])
        if (n["kind"] == "bridge" && n["domain_id"] == last) n["gcl_max_entries"] = 2;
      Workspace ws(Topology::from_json(doc));
      Outcome out;
      for (std::size_t i = 0; i < sc.services.size(); ++i)
        if (i != t) try_instantiate(ws, sc.services[i], out);
      const std::string before = cnc_snapshot(ws);
      const std::size_t instances = ws.cuc().instances().size();
      const std::size_t emitted = ws.cuc().configs_emitted();
      try {
        ws.instantiate(sc.services[t].nsd, sc.services[t].placement);
        c.fail(seed_tag(seed) + "admitted although " + last + " cannot hold a list");
        continue;
      } catch (const AdmissionFailed& e) {
        if (e.domain_id() != last) {
          ++skipped;  // an earlier segment failed first on this baseline
        } else {
          ++cases;
        }
      } catch (const std::exception& e) {
        c.fail(seed_tag(seed) + "unexpected error " + e.what());
        continue;
      }
      const NsInstance& inst = std::prev(ws.cuc().instances().end())->second;
      c.expect(ws.cuc().instances().size() == instances + 1 && inst.status == InstanceStatus::failed,
               [&] { return seed_tag(seed) + "instance not reported failed"; });
      c.expect(inst.streams.empty(), [&] { return seed_tag(seed) + "failed instance keeps streams"; });
      c.expect(cnc_snapshot(ws) == before, [&] { return seed_tag(seed) + "not back to baseline"; });
      c.expect(ws.cuc().configs_emitted() == emitted, [&] { return seed_tag(seed) + "configs emitted"; });
      break;  // one target per scenario
    }
  }
  c.expect(cases > 0, [] { return std::string("no random case failed in the final segment"); });
  c.stat("fixed case plus " + std::to_string(cases) + " random final-segment failures, " + std::to_string(skipped) +
         " earlier-segment failures also rolled back");
}

// Criterion 7, fixed part.
void audit_fixed(Check& c) {
  const TrafficSpec spec = traffic(250'000, 500, 1, 100'000);
  {
    Workspace ws(testing::hand_trace_topology().build());
    ws.instantiate(testing::two_vnf_nsd(spec).build(), testing::two_vnf_placement("h1", "h2").build());
    const auto got = logged_points(ws, 0);
    c.expect(got == std::vector<std::string>{"Or-Vi", "Or-Vi"}, [&] { return "intra-PoP logged " + join(got); });
  }
  {
    Workspace ws(testing::cross_pop_topology().build());
    ws.instantiate(testing::two_vnf_nsd(spec).build(), testing::two_vnf_placement("h1", "h2").build());
    const auto got = logged_points(ws, 0);
    const std::vector<std::string> want{"Or-Vi", "Or-Wi", "Or-Vi", "Or-Vi", "Or-Wi", "Or-Vi"};
    c.expect(got == want, [&] { return "cross-PoP logged " + join(got); });
  }
}

/// a1 a2 -- B1 -- B2 -- B3, with host hN on each BN; one domain.
testing::TopoBuilder chain() {
  testing::TopoBuilder b;
  b.domain("pop1", DomainKind::nfvi_pop, "vim-1");
  b.bridge("B1", "pop1", 1000).bridge("B2", "pop1", 700).bridge("B3", "pop1", 1200);
  for (const char* h : {"a1", "a2", "h2", "h3"}) b.host(h, "pop1");
  b.link("a1", "eth0", "B1", "p1").link("a2", "eth0", "B1", "p2");
  b.link("B1", "p0", "B2", "p0", 1'000'000'000, 800).link("B2", "p1", "B3", "p0", 1'000'000'000, 300);
  b.link("h2", "eth0", "B2", "p2").link("h3", "eth0", "B3", "p1");
  return b;
}

// Criterion 8. With one shared class the search is a relaxation: it may
// let a later arrival overtake an earlier one in the same FIFO queue.
void brute_force(Check& c, bool distinct_classes) {
  const auto topo = std::make_shared<const Topology>(chain().build());
  std::mt19937_64 rng(0xbf);
  constexpr Nanos kPeriods[] = {125'000, 250'000, 500'000, 1'000'000};
  const std::vector<std::pair<std::string, std::string>> routes{
      {"a1", "h2"}, {"a2", "h2"}, {"a1", "h3"}, {"a2", "h3"}, {"h2", "h3"}};
  int greedy_yes = 0, both_no = 0, incomplete = 0, reordered = 0;
  std::int64_t nodes = 0;
  for (int n = 0; n < kBruteForceSets; ++n) {
    const Nanos period = kPeriods[pick(rng, 0, 3)];
    const auto count = static_cast<int>(pick(rng, 1, 3));
    std::vector<StreamRequirement> reqs;
    std::vector<testing::BfStream> bf;
    for (int i = 0; i < count; ++i) {
      const auto& [from, to] = routes[static_cast<std::size_t>(pick(rng, 0, 4))];
      TrafficSpec spec = traffic(period, static_cast<int>(pick(rng, 64, 1500)), static_cast<int>(pick(rng, 1, 3)), 0);
      const Path path = topo->shortest_path(from, to);
      // deadlines between the uncontended latency and four times it
      Nanos floor = 0;
      for (const auto& h : testing::to_bf_stream(*topo, path, spec).hops) floor += h.burst_ns + h.after_ns;
      spec.max_latency_ns = floor + pick(rng, 0, 3 * floor);
      const int pcp = distinct_classes ? 5 + i : 7;
      auto s = derive_streams(testing::two_vnf_nsd(spec, pcp).build(), testing::two_vnf_placement(from, to).build())
                   .front();
      s.stream_id = "s" + std::to_string(i);
      reqs.push_back(s);
      bf.push_back(testing::to_bf_stream(*topo, path, spec));
    }

    auto greedy_in = [&](const std::vector<int>& order, CncState& state) {
      for (const int i : order) {
        const auto& s = reqs[static_cast<std::size_t>(i)];
        try {
          state.admit_stream(s, topo->split_by_domain(topo->shortest_path(s.talker.node_id, s.listener.node_id)).front(),
                             s.traffic.max_latency_ns);
        } catch (const InfeasibleError&) {
          return false;
        }
      }
      return true;
    };
    std::vector<int> order(reqs.size());
    std::iota(order.begin(), order.end(), 0);
    CncState state("pop1", topo);
    const bool greedy = greedy_in(order, state);
    testing::BfStats stats;
    const bool exhaustive = testing::brute_force_feasible(bf, period, &stats);
    nodes += stats.nodes;
    if (greedy) {
      ++greedy_yes;
      c.expect(exhaustive, [&] { return "set " + std::to_string(n) + ": greedy accepted an infeasible set"; });
      for (const auto& [id, a] : state.admitted())
        c.expect(a.schedule.e2e_latency_ns <= a.requirement.traffic.max_latency_ns,
                 [&] { return "set " + std::to_string(n) + ": " + id + " over its deadline"; });
    } else if (exhaustive) {
      ++incomplete;
      bool other_order = false;
      while (!other_order && std::next_permutation(order.begin(), order.end())) {
        CncState again("pop1", topo);
        other_order = greedy_in(order, again);
      }
      if (other_order) ++reordered;
    } else {
      ++both_no;
    }
  }
  c.stat(std::string(distinct_classes ? "one class per stream, " : "shared class, ") +
         std::to_string(kBruteForceSets) + " sets: greedy feasible " + std::to_string(greedy_yes) +
         ", both infeasible " + std::to_string(both_no) + ", greedy missed a feasible set " +
         std::to_string(incomplete) + " (" + std::to_string(reordered) + " of them in another admission order)" +
         ", search nodes " + std::to_string(nodes));
}

struct RunOutput {
  std::string state;
  std::string gcls;
  std::string configs;
  std::string quiet;
  std::string loaded;
};

RunOutput run_once(std::uint64_t seed) {
  const auto sc = testing::random_scenario(seed);
  Workspace ws(Topology::from_json(sc.topology));
  Outcome out;
  for (const auto& svc : sc.services) try_instantiate(ws, svc, out);
  for (const auto& [id, inst] : ws.cuc().instances()) {
    if (inst.status != InstanceStatus::active) continue;
    ws.terminate(id);
    break;
  }
  RunOutput r;
  r.state = ws.dump();
  io::Json gcls = io::Json::object();
  for (const auto& [port, g] : ws.installed_gcls()) {
    io::Json entries = io::Json::array();
    for (const auto& e : g.entries) entries.push_back(io::Json::array({e.gate_states, e.interval_ns}));
    gcls[port] = io::Json{{"cycle_ns", g.cycle_ns}, {"entries", entries}};
  }
  r.gcls = gcls.dump();
  io::Json configs = io::Json::array();
  for (const auto& b : ws.bridge_configs()) configs.push_back(to_json(b));
  for (const auto& [id, inst] : ws.cuc().instances())
    for (const auto& cfg : inst.configs) configs.push_back(to_json(cfg));
  r.configs = configs.dump();
  const auto sim = active_streams(ws);
  r.quiet = to_json(simulate(ws.topology(), ws.installed_gcls(), sim, sim_config(0.0, seed))).dump();
  r.loaded = to_json(simulate(ws.topology(), ws.installed_gcls(), sim, sim_config(1.0, seed))).dump();
  return r;
}

// Criterion 9.
void determinism(Check& c) {
  for (std::uint64_t seed = 1; seed <= kDeterminismScenarios; ++seed) {
    const RunOutput a = run_once(seed), b = run_once(seed);
    c.expect(a.state == b.state, [&] { return seed_tag(seed) + "state differs"; });
    c.expect(a.gcls == b.gcls, [&] { return seed_tag(seed) + "gate control lists differ"; });
    c.expect(a.configs == b.configs, [&] { return seed_tag(seed) + "config documents differ"; });
    c.expect(a.quiet == b.quiet && a.loaded == b.loaded, [&] { return seed_tag(seed) + "simulation differs"; });
    // a reloaded state serializes to the same bytes
    c.expect(Workspace::from_json(io::parse_text(a.state, "state"))->dump() == a.state,
             [&] { return seed_tag(seed) + "state does not survive a reload"; });
  }
  c.stat(std::to_string(kDeterminismScenarios) + " scenarios run twice");
}

}  // namespace

int main() {
  Check sound, oracle, isolation, mapping, restore, rollback_check, audit, exhaustive, determinism_check, lists;
  try {
    random_scenarios(sound, oracle, isolation, audit, lists);
    hand_trace(oracle);
    stream_mapping(mapping);
    terminate_restores(restore);
    rollback(rollback_check);
    audit_fixed(audit);
    brute_force(exhaustive, false);
    brute_force(exhaustive, true);
    determinism(determinism_check);
  } catch (const std::exception& e) {
    std::cout << "acceptance run aborted: " << e.what() << "\n";
    return 1;
  }
  bool all = true;
  sound.report(1, "soundness", all);
  oracle.report(2, "oracle agreement", all);
  isolation.report(3, "isolation", all);
  mapping.report(4, "VL to stream mapping", all);
  restore.report(5, "terminate restores CNC state", all);
  rollback_check.report(6, "rollback", all);
  audit.report(7, "reference point audit", all);
  exhaustive.report(8, "exhaustive search oracle", all);
  determinism_check.report(9, "determinism", all);
  lists.report(10, "gate control lists well formed", all);
  std::cout << (all ? "ALL PASS" : "SOME CRITERIA FAILED") << "\n";
  return all ? 0 : 1;
}
