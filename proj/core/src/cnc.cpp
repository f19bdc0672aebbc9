// SPDX-License-Identifier: Apache-2.0
#include "tsnfv/cnc.hpp"

#include <algorithm>
#include <set>

#include "tsnfv/error.hpp"
#include "tsnfv/json_io.hpp"

namespace tsnfv {

using io::Json;

namespace {

Nanos floor_div(Nanos a, Nanos b) {
  Nanos q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

Nanos ceil_div(Nanos a, Nanos b) { return -floor_div(-a, b); }

/// Largest m such that [s + m*cycle, e + m*cycle) intersects [lo, hi), or
/// nullopt when no copy does. Both intervals are shorter than the cycle.
std::optional<Nanos> last_overlapping_copy(Nanos lo, Nanos hi, Nanos s, Nanos e, Nanos cycle) {
  const Nanos m_lo = floor_div(lo - e, cycle) + 1;
  const Nanos m_hi = ceil_div(hi - s, cycle) - 1;
  if (m_lo > m_hi) return std::nullopt;
  return m_hi;
}

struct Busy {
  Nanos start = 0;
  Nanos end = 0;
  Nanos ready_first = 0;
  Nanos ready_last = 0;
  int traffic_class = 0;
};

/// Reservations of one stream repeated over `cycle`, with start normalized
/// into [0, cycle).
void expand_into(const StreamSchedule& sched, Nanos cycle,
                 std::map<std::string, std::vector<HopReservation>>& out) {
  if (sched.pattern_ns <= 0) return;
  const Nanos reps = cycle / sched.pattern_ns;
  const int per_pattern = sched.instance_count();
  for (Nanos m = 0; m < reps; ++m) {
    for (const auto& r : sched.reservations) {
      HopReservation x = r;
      const Nanos shift = m * sched.pattern_ns;
      const Nanos norm = mod_floor(r.window_start_ns + shift, cycle) - (r.window_start_ns + shift);
      x.instance = r.instance + static_cast<int>(m) * per_pattern;
      x.window_start_ns += shift + norm;
      x.window_end_ns += shift + norm;
      x.ready_first_ns += shift + norm;
      x.ready_last_ns += shift + norm;
      out[r.port_id].push_back(std::move(x));
    }
  }
}

struct HopPlan {
  std::string port_id;
  bool txtime = false;  // talker egress: frames released exactly at window start
  Nanos processing_ns = 0;
  Nanos propagation_ns = 0;
  Nanos burst_ns = 0;
  Nanos first_frame_ns = 0;
  Nanos tail_ns = 0;  // lower bound from this hop's window start to segment exit
};

enum class SearchFail { none, budget, window };

struct SearchResult {
  Nanos start = 0;
  SearchFail fail = SearchFail::none;
  // Queue-order conflict: how much later the burst would have to arrive to
  // queue behind the other one (0 when that would not help).
  Nanos arrive_later_by = 0;
};

/// Earliest start >= earliest for a window of `burst` ns on a port, such that
/// the window is disjoint (mod cycle) from every busy window and the queue of
/// its traffic class stays FIFO-consistent: whenever two bursts of one class
/// can be queued together, the one fully enqueued first is also served first.
SearchResult find_window(const std::vector<Busy>& busy, Nanos earliest, Nanos ready_first,
                         Nanos ready_last, bool txtime, Nanos burst, int cls, Nanos cycle,
                         Nanos latest_start) {
  // Past the latest start the search goes on, so that a port without any
  // fitting window is told apart from a window that comes too late.
  Nanos t = earliest;
  for (;;) {
    if (t - earliest > cycle) return {t, SearchFail::window};
    const Nanos qf = txtime ? t : ready_first;
    const Nanos ql = txtime ? t : ready_last;
    if (t + burst - qf >= cycle) return {t, SearchFail::window};

    bool moved = false;
    for (const Busy& x : busy) {
      if (auto m = last_overlapping_copy(t, t + burst, x.start, x.end, cycle)) {
        t = x.end + *m * cycle;
        moved = true;
        break;
      }
    }
    if (moved) continue;

    for (const Busy& x : busy) {
      if (x.traffic_class != cls) continue;
      const auto m_hi = last_overlapping_copy(qf, t + burst, x.ready_first, x.end, cycle);
      if (!m_hi) continue;
      const Nanos m_lo = floor_div(qf - x.end, cycle) + 1;
      for (Nanos m = m_lo; m <= *m_hi && !moved; ++m) {
        const Nanos shift = m * cycle;
        const Nanos xs = x.start + shift;
        const Nanos xrf = x.ready_first + shift;
        const Nanos xrl = x.ready_last + shift;
        if (xrl < qf) {
          // The other burst is ahead in the queue; it must be served first.
          if (xs >= t) {
            t = x.end + shift;
            moved = true;
          }
        } else if (ql < xrf) {
          // We are ahead in the queue; the other window must come later.
          if (xs < t) return {t, SearchFail::window, xrl + 1 - qf};
        } else if (txtime) {
          t = xrl + 1;
          moved = true;
        } else {
          return {t, SearchFail::window, xrl + 1 - qf};
        }
      }
      if (moved) break;
    }
    if (!moved) return {t, t > latest_start ? SearchFail::budget : SearchFail::none};
  }
}

}  // namespace

GateControlList build_port_gcl(const std::string& port_id, Nanos cycle_ns,
                               std::span<const ClassWindow> windows, BitsPerSecond speed_bps,
                               std::optional<int> max_entries) {
  struct Piece {
    Nanos s, e;
    int mask;
  };
  const Nanos guard = wire_occupancy(kMaxFrameBytes, speed_bps);

  std::vector<Piece> pieces;
  std::uint8_t owned = 0;
  for (const auto& w : windows) {
    const Nanos s = mod_floor(w.start_ns, cycle_ns);
    const Nanos e = s + (w.end_ns - w.start_ns);
    owned |= static_cast<std::uint8_t>(1u << w.traffic_class);
    const int mask = 1 << w.traffic_class;
    if (e <= cycle_ns) {
      pieces.push_back({s, e, mask});
    } else {
      pieces.push_back({s, cycle_ns, mask});
      pieces.push_back({0, e - cycle_ns, mask});
    }
  }
  std::sort(pieces.begin(), pieces.end(), [](const Piece& a, const Piece& b) { return a.s < b.s; });
  std::vector<Piece> merged;
  for (const auto& p : pieces) {
    if (!merged.empty() && merged.back().e == p.s && merged.back().mask == p.mask) {
      merged.back().e = p.e;
    } else {
      merged.push_back(p);
    }
  }

  // Guards before each window, clipped to the free gap that precedes it.
  std::vector<Piece> closed;
  for (std::size_t i = 0; i < merged.size(); ++i) {
    const Piece& prev = merged[(i + merged.size() - 1) % merged.size()];
    Nanos gap = merged[i].s - prev.e;
    if (i == 0) gap += cycle_ns;
    if (merged.size() == 1) gap = cycle_ns - (merged[i].e - merged[i].s);
    const Nanos len = std::min(guard, gap);
    if (len <= 0) continue;
    const Nanos gs = merged[i].s - len;
    if (gs >= 0) {
      closed.push_back({gs, merged[i].s, 0});
    } else {
      closed.push_back({gs + cycle_ns, cycle_ns, 0});
      if (merged[i].s > 0) closed.push_back({0, merged[i].s, 0});
    }
  }

  std::vector<Piece> timeline = merged;
  timeline.insert(timeline.end(), closed.begin(), closed.end());
  std::sort(timeline.begin(), timeline.end(), [](const Piece& a, const Piece& b) { return a.s < b.s; });

  const int others = 0xFF & ~owned;
  GateControlList gcl{port_id, cycle_ns, 0, {}};
  auto emit = [&](int mask, Nanos len) {
    if (len <= 0) return;
    if (!gcl.entries.empty() && gcl.entries.back().gate_states == mask) {
      gcl.entries.back().interval_ns += len;
    } else {
      gcl.entries.push_back(GclEntry{static_cast<std::uint8_t>(mask), len});
    }
  };
  Nanos at = 0;
  for (const auto& p : timeline) {
    emit(others, p.s - at);
    emit(p.mask, p.e - p.s);
    at = p.e;
  }
  emit(others, cycle_ns - at);

  if (max_entries && static_cast<int>(gcl.entries.size()) > *max_entries)
    throw GclOverflow(port_id, gcl.entries.size(), *max_entries);
  return gcl;
}

CncState::CncState(std::string domain_id, std::shared_ptr<const Topology> topology)
    : domain_id_(std::move(domain_id)), topology_(std::move(topology)) {}

const StreamSchedule& CncState::admit_stream(const StreamRequirement& req, const PathSegment& segment,
                                             Nanos latency_budget_ns, SegmentEntry entry) {
  req.validate();
  if (segment.domain_id != domain_id_)
    throw ValidationError("segment of domain " + segment.domain_id + " sent to CNC of " + domain_id_);
  if (segment.hops.empty()) throw ValidationError("empty segment for stream " + req.stream_id);
  if (admitted_.count(req.stream_id)) throw ValidationError("stream " + req.stream_id + " already admitted");
  if (latency_budget_ns <= 0) throw InfeasibleError(InfeasibleCause::exceeds_budget, "non-positive budget");
  if (entry.first_ns > entry.last_ns || entry.first_ns < 0)
    throw ValidationError("inconsistent segment entry offsets");

  const Topology& topo = *topology_;
  const Nanos period = req.traffic.period_ns;
  const int cls = req.traffic_class();

  std::vector<HopPlan> plan;
  for (std::size_t h = 0; h < segment.hops.size(); ++h) {
    const Hop& hop = segment.hops[h];
    const Node& n = topo.node(hop.egress.node_id);
    if (n.domain_id != domain_id_)
      throw ValidationError("hop egressing " + n.node_id + " is outside domain " + domain_id_);
    if (n.is_bridge() && !n.bridge->supports_qbv) throw CapabilityError("bridge " + n.node_id, "qbv");
    if (h > 0 && !n.is_bridge())
      throw ValidationError("segment transits non-bridge node " + n.node_id);
    const Link& link = topo.link_at(hop.egress);
    HopPlan p;
    p.port_id = hop.egress.key();
    p.txtime = (h == 0 && !n.is_bridge());
    p.processing_ns = n.processing_delay_ns();
    p.propagation_ns = link.propagation_ns;
    p.burst_ns = burst_occupancy(req.traffic, link.speed_bps);
    p.first_frame_ns = wire_occupancy(req.traffic.max_frame_bytes, link.speed_bps);
    plan.push_back(p);
  }
  Nanos tail = 0;
  for (std::size_t h = plan.size(); h-- > 0;) {
    tail += plan[h].burst_ns + plan[h].propagation_ns;
    plan[h].tail_ns = tail;
    tail += plan[h].processing_ns;
  }

  std::vector<Nanos> periods{period};
  for (const auto& [id, a] : admitted_) periods.push_back(a.schedule.pattern_ns);
  const Nanos cycle = tsnfv::hyperperiod(periods);

  std::map<std::string, std::vector<HopReservation>> expanded;
  for (const auto& [id, a] : admitted_) expand_into(a.schedule, cycle, expanded);
  std::map<std::string, std::vector<Busy>> busy;
  for (const auto& p : plan) {
    auto& list = busy[p.port_id];
    for (const auto& r : expanded[p.port_id])
      list.push_back({r.window_start_ns, r.window_end_ns, r.ready_first_ns, r.ready_last_ns, r.traffic_class});
  }

  const int instances = static_cast<int>(cycle / period);
  std::vector<HopReservation> all;
  all.reserve(static_cast<std::size_t>(instances) * plan.size());
  Nanos worst_latency = 0;
  Nanos exit_first = 0;
  Nanos exit_last = 0;
  for (int k = 0; k < instances; ++k) {
    const Nanos release = k * period;
    Nanos prev_start = 0;
    // A talker segment may hold its transmission back so that a burst that
    // would tie with another one in a downstream queue arrives behind it.
    Nanos hold = 0;
    std::map<std::string, std::size_t> busy_mark;
    for (const auto& p : plan) busy_mark[p.port_id] = busy[p.port_id].size();
    for (std::size_t h = 0; h < plan.size(); ++h) {
      const HopPlan& p = plan[h];
      Nanos ready_first = 0;
      Nanos ready_last = 0;
      if (p.txtime) {
        ready_first = ready_last = release + entry.last_ns + hold;
      } else if (h == 0) {
        ready_first = release + entry.first_ns + p.processing_ns;
        ready_last = release + entry.last_ns + p.processing_ns;
      } else {
        const HopPlan& q = plan[h - 1];
        ready_first = prev_start + q.first_frame_ns + q.propagation_ns + p.processing_ns;
        ready_last = prev_start + q.burst_ns + q.propagation_ns + p.processing_ns;
      }
      const Nanos latest = release + entry.last_ns + latency_budget_ns - p.tail_ns;
      const SearchResult found = find_window(busy[p.port_id], ready_last, ready_first, ready_last, p.txtime,
                                             p.burst_ns, cls, cycle, latest);
      if (found.fail == SearchFail::window && h > 0 && plan.front().txtime && found.arrive_later_by > 0 &&
          hold + found.arrive_later_by < cycle) {
        hold += found.arrive_later_by;
        for (const auto& [port, n] : busy_mark) busy[port].resize(n);
        all.resize(static_cast<std::size_t>(k) * plan.size());
        h = static_cast<std::size_t>(-1);  // restart this instance at the talker
        continue;
      }
      if (found.fail == SearchFail::budget)
        throw InfeasibleError(InfeasibleCause::exceeds_budget,
                              "stream " + req.stream_id + " cannot meet its " +
                                  std::to_string(latency_budget_ns) + " ns budget on " + p.port_id);
      if (found.fail == SearchFail::window)
        throw InfeasibleError(InfeasibleCause::no_free_window,
                              "no free window for stream " + req.stream_id + " on " + p.port_id);
      const Nanos start = found.start;
      HopReservation r;
      r.port_id = p.port_id;
      r.stream_id = req.stream_id;
      r.instance = k;
      r.traffic_class = cls;
      r.window_start_ns = start;
      r.window_end_ns = start + p.burst_ns;
      r.ready_first_ns = p.txtime ? start : ready_first;
      r.ready_last_ns = p.txtime ? start : ready_last;
      busy[p.port_id].push_back({r.window_start_ns, r.window_end_ns, r.ready_first_ns, r.ready_last_ns, cls});
      all.push_back(std::move(r));
      prev_start = start;
    }
    const HopPlan& last = plan.back();
    const Nanos first_out = prev_start + last.first_frame_ns + last.propagation_ns - release;
    const Nanos last_out = prev_start + last.burst_ns + last.propagation_ns - release;
    const Nanos latency = last_out - entry.last_ns;
    if (latency > latency_budget_ns)
      throw InfeasibleError(InfeasibleCause::exceeds_budget,
                            "stream " + req.stream_id + " latency " + std::to_string(latency) +
                                " ns exceeds budget " + std::to_string(latency_budget_ns) + " ns");
    worst_latency = std::max(worst_latency, latency);
    exit_first = k == 0 ? first_out : std::min(exit_first, first_out);
    exit_last = std::max(exit_last, last_out);
  }

  // Shortest repetition of the per-instance offsets.
  const std::size_t hops = plan.size();
  auto same_offsets = [&](int k, int j) {
    for (std::size_t h = 0; h < hops; ++h) {
      const auto& a = all[static_cast<std::size_t>(k) * hops + h];
      const auto& b = all[static_cast<std::size_t>(j) * hops + h];
      const Nanos shift = static_cast<Nanos>(k - j) * period;
      if (a.window_start_ns - shift != b.window_start_ns || a.ready_first_ns - shift != b.ready_first_ns ||
          a.ready_last_ns - shift != b.ready_last_ns)
        return false;
    }
    return true;
  };
  int pattern_instances = instances;
  for (int m = 1; m < instances; ++m) {
    if (instances % m != 0) continue;
    bool repeats = true;
    for (int k = m; k < instances && repeats; ++k) repeats = same_offsets(k, k % m);
    if (repeats) {
      pattern_instances = m;
      break;
    }
  }
  all.resize(static_cast<std::size_t>(pattern_instances) * hops);

  AdmittedStream admitted;
  admitted.requirement = req;
  admitted.segment = segment;
  admitted.latency_budget_ns = latency_budget_ns;
  admitted.entry = entry;
  StreamSchedule& s = admitted.schedule;
  s.stream_id = req.stream_id;
  s.period_ns = period;
  s.pattern_ns = pattern_instances * period;
  s.entry_first_ns = entry.first_ns;
  s.entry_last_ns = entry.last_ns;
  s.hop_count = static_cast<int>(hops);
  s.reservations = std::move(all);
  s.e2e_latency_ns = worst_latency;
  s.exit_first_ns = exit_first;
  s.exit_last_ns = exit_last;

  auto next = admitted_;
  next.emplace(req.stream_id, std::move(admitted));
  std::vector<Nanos> patterns;
  for (const auto& [id, a] : next) patterns.push_back(a.schedule.pattern_ns);
  const Nanos next_cycle = tsnfv::hyperperiod(patterns);

  std::set<std::string> ports;
  for (const auto& [id, a] : next)
    for (const auto& r : a.schedule.reservations) ports.insert(r.port_id);
  try {
    synthesize_ports({ports.begin(), ports.end()}, next, next_cycle);
  } catch (const GclOverflow& e) {
    throw InfeasibleError(InfeasibleCause::gcl_overflow, e.what());
  }

  admitted_ = std::move(next);
  hyperperiod_ = next_cycle;
  return admitted_.at(req.stream_id).schedule;
}

void CncState::remove_stream(const std::string& stream_id) {
  if (admitted_.erase(stream_id) == 0) throw UnknownStream("stream " + stream_id + " is not admitted in " + domain_id_);
  if (admitted_.empty()) {
    hyperperiod_ = 0;
    return;
  }
  std::vector<Nanos> patterns;
  for (const auto& [id, a] : admitted_) patterns.push_back(a.schedule.pattern_ns);
  hyperperiod_ = tsnfv::hyperperiod(patterns);
}

std::vector<HopReservation> CncState::reservations(const std::string& port_id) const {
  if (hyperperiod_ == 0) return {};
  std::map<std::string, std::vector<HopReservation>> expanded;
  for (const auto& [id, a] : admitted_) {
    bool touches = false;
    for (const auto& r : a.schedule.reservations) touches |= (r.port_id == port_id);
    if (touches) expand_into(a.schedule, hyperperiod_, expanded);
  }
  auto out = std::move(expanded[port_id]);
  std::sort(out.begin(), out.end(), [](const HopReservation& a, const HopReservation& b) {
    return std::tie(a.window_start_ns, a.stream_id, a.instance) < std::tie(b.window_start_ns, b.stream_id, b.instance);
  });
  return out;
}

std::vector<std::string> CncState::reserved_ports() const {
  std::set<std::string> ports;
  for (const auto& [id, a] : admitted_)
    for (const auto& r : a.schedule.reservations) ports.insert(r.port_id);
  return {ports.begin(), ports.end()};
}

std::map<std::string, GateControlList> CncState::synthesize_ports(
    const std::vector<std::string>& ports, const std::map<std::string, AdmittedStream>& admitted,
    Nanos cycle) const {
  std::map<std::string, std::vector<HopReservation>> expanded;
  for (const auto& [id, a] : admitted) expand_into(a.schedule, cycle, expanded);
  std::map<std::string, GateControlList> out;
  for (const auto& port : ports) {
    const auto& res = expanded[port];
    if (res.empty()) continue;
    std::vector<ClassWindow> windows;
    windows.reserve(res.size());
    for (const auto& r : res) windows.push_back({r.window_start_ns, r.window_end_ns, r.traffic_class});
    const auto dot = port.rfind('.');
    const Node& node = topology_->node(port.substr(0, dot));
    std::optional<int> limit;
    if (node.is_bridge()) limit = node.bridge->gcl_max_entries;
    out.emplace(port, build_port_gcl(port, cycle, windows, topology_->port_speed(port), limit));
  }
  return out;
}

std::map<std::string, GateControlList> CncState::synthesize_gcls() const {
  if (hyperperiod_ == 0) return {};
  return synthesize_ports(reserved_ports(), admitted_, hyperperiod_);
}

std::vector<BridgeConfig> CncState::bridge_config() const {
  const auto gcls = synthesize_gcls();
  std::map<std::string, BridgeConfig> bridges;
  for (const auto& [port, gcl] : gcls) {
    const std::string node = port.substr(0, port.rfind('.'));
    if (!topology_->node(node).is_bridge()) continue;
    auto& cfg = bridges[node];
    cfg.bridge_id = node;
    cfg.gcls.push_back(gcl);
  }
  std::map<std::string, std::map<int, std::set<std::string>>> vlans;
  for (const auto& [id, a] : admitted_) {
    const auto& hops = a.segment.hops;
    for (std::size_t h = 0; h < hops.size(); ++h) {
      const std::string& node = hops[h].egress.node_id;
      if (!bridges.count(node)) continue;
      auto& ports = vlans[node][a.requirement.frame.vlan_id];
      ports.insert(hops[h].egress.key());
      if (h > 0) {
        ports.insert(hops[h - 1].ingress.key());
      } else if (a.segment.entry_port) {
        ports.insert(a.segment.entry_port->key());
      }
    }
  }
  std::vector<BridgeConfig> out;
  for (auto& [node, cfg] : bridges) {
    for (const auto& [vid, ports] : vlans[node]) cfg.vlans.push_back({vid, {ports.begin(), ports.end()}});
    out.push_back(std::move(cfg));
  }
  return out;
}

Json to_json(const BridgeConfig& config) {
  Json gcls = Json::array();
  for (const auto& g : config.gcls) gcls.push_back(io::to_json(g));
  Json vlans = Json::array();
  for (const auto& v : config.vlans) vlans.push_back(Json{{"vlan_id", v.vlan_id}, {"ports", v.ports}});
  return Json{{"bridge_id", config.bridge_id}, {"gcls", std::move(gcls)}, {"vlans", std::move(vlans)}};
}

Json CncState::to_json() const {
  Json admitted = Json::array();
  for (const auto& [id, a] : admitted_) {
    admitted.push_back(Json{{"requirement", io::to_json(a.requirement)},
                            {"segment", io::to_json(a.segment)},
                            {"latency_budget_ns", a.latency_budget_ns},
                            {"entry", Json{{"first_ns", a.entry.first_ns}, {"last_ns", a.entry.last_ns}}},
                            {"schedule", io::to_json(a.schedule)}});
  }
  return Json{{"domain_id", domain_id_}, {"hyperperiod_ns", hyperperiod_}, {"admitted", std::move(admitted)}};
}

CncState CncState::from_json(const Json& doc, std::shared_ptr<const Topology> topology) {
  constexpr std::string_view ctx = "cnc state";
  CncState s(io::get<std::string>(doc, "domain_id", ctx), std::move(topology));
  s.hyperperiod_ = io::get<Nanos>(doc, "hyperperiod_ns", ctx);
  for (const auto& ja : io::array_field(doc, "admitted", ctx)) {
    AdmittedStream a;
    a.requirement = io::stream_from_json(io::field(ja, "requirement", ctx));
    a.segment = io::segment_from_json(io::field(ja, "segment", ctx));
    a.latency_budget_ns = io::get<Nanos>(ja, "latency_budget_ns", ctx);
    const Json& je = io::field(ja, "entry", ctx);
    a.entry = SegmentEntry{io::get<Nanos>(je, "first_ns", ctx), io::get<Nanos>(je, "last_ns", ctx)};
    a.schedule = io::schedule_from_json(io::field(ja, "schedule", ctx));
    const std::string id = a.requirement.stream_id;
    s.admitted_.emplace(id, std::move(a));
  }
  return s;
}

}  // namespace tsnfv
