// SPDX-License-Identifier: Apache-2.0
#include "tsnfv/verifier.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <deque>
#include <limits>
#include <queue>
#include <random>
#include <set>

#include "tsnfv/error.hpp"
#include "tsnfv/json_io.hpp"

namespace tsnfv {

using io::Json;

namespace {

constexpr Nanos kNever = std::numeric_limits<Nanos>::max();
constexpr std::size_t kBestEffortQueueCap = 64;

Nanos entries_sum(const GateControlList& g) {
  Nanos sum = 0;
  for (const auto& e : g.entries) sum += e.interval_ns;
  return sum;
}

// Gate state lookup. The list repeats with the sum of its intervals so that
// a corrupted list still yields a defined timeline; no list means all open.
class GateView {
 public:
  GateView() = default;
  explicit GateView(const GateControlList* g) {
    if (g == nullptr || g->entries.empty()) return;
    Nanos acc = 0;
    for (const auto& e : g->entries) {
      if (e.interval_ns <= 0) continue;
      starts_.push_back(acc);
      masks_.push_back(e.gate_states);
      acc += e.interval_ns;
    }
    period_ = acc;
    base_ = g->base_time_ns;
    if (period_ <= 0) starts_.clear();
  }

  std::uint8_t state_at(Nanos t) const {
    if (starts_.empty()) return 0xFF;
    return masks_[locate(t).first];
  }

  Nanos next_change(Nanos t) const {
    if (starts_.size() < 2) return kNever;
    const auto [i, pos] = locate(t);
    return t + (end_of(i) - pos);
  }

  /// Earliest time >= t at which the class gate is closed.
  Nanos close_time(int cls, Nanos t) const {
    if (starts_.empty()) return kNever;
    const auto [i, pos] = locate(t);
    const auto bit = static_cast<std::uint8_t>(1u << cls);
    if ((masks_[i] & bit) == 0) return t;
    Nanos acc = end_of(i) - pos;
    const std::size_t n = starts_.size();
    for (std::size_t step = 1; step <= n; ++step) {
      const std::size_t j = (i + step) % n;
      if ((masks_[j] & bit) == 0) return t + acc;
      acc += end_of(j) - starts_[j];
    }
    return kNever;
  }

 private:
  std::pair<std::size_t, Nanos> locate(Nanos t) const {
    const Nanos pos = mod_floor(t - base_, period_);
    const auto it = std::upper_bound(starts_.begin(), starts_.end(), pos);
    return {static_cast<std::size_t>(it - starts_.begin()) - 1, pos};
  }
  Nanos end_of(std::size_t i) const { return i + 1 < starts_.size() ? starts_[i + 1] : period_; }

  std::vector<Nanos> starts_;
  std::vector<std::uint8_t> masks_;
  Nanos period_ = 0;
  Nanos base_ = 0;
};

// Independent walk over the list, used to audit every transmission.
bool open_throughout(const GateControlList& g, int cls, Nanos start, Nanos end) {
  const Nanos period = entries_sum(g);
  if (g.entries.empty() || period <= 0) return true;
  Nanos cursor = start;
  while (cursor < end) {
    Nanos pos = mod_floor(cursor - g.base_time_ns, period);
    for (const auto& e : g.entries) {
      if (e.interval_ns <= 0) continue;
      if (pos < e.interval_ns) {
        if (((e.gate_states >> cls) & 1u) == 0) return false;
        cursor += e.interval_ns - pos;
        break;
      }
      pos -= e.interval_ns;
    }
  }
  return true;
}

struct Frame {
  int stream = -1;  // -1: best effort
  int hop = 0;
  Nanos release_ns = 0;
  int bytes = 0;
};

enum class EventKind { enqueue, best_effort, transmit };

struct Event {
  Nanos t = 0;
  int phase = 0;  // arrivals before transmit decisions at the same instant
  std::uint64_t seq = 0;
  EventKind kind = EventKind::enqueue;
  int port = 0;
  Frame frame;

  bool operator>(const Event& o) const {
    if (t != o.t) return t > o.t;
    if (phase != o.phase) return phase > o.phase;
    return seq > o.seq;
  }
};

struct PortSim {
  std::string key;
  BitsPerSecond speed = 0;
  Nanos propagation_ns = 0;
  std::string peer_node;
  const GateControlList* gcl = nullptr;
  GateView gate;
  std::array<std::deque<Frame>, kTrafficClasses> queues;
  Nanos busy_until = 0;
  std::uint8_t owned = 0;
  bool scheduled = false;
  int be_class = -1;
  Nanos be_mean_gap = 0;
  std::mt19937_64 rng;
  PortReport report;
};

double unit_interval(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

class Simulation {
 public:
  Simulation(const Topology& topology, const std::map<std::string, GateControlList>& gcls,
             const std::vector<SimStream>& streams, const SimConfig& cfg)
      : topo_(topology), streams_(streams), cfg_(cfg) {
    for (const auto& [id, link] : topology.links()) {
      add_port(link.a, link.b.node_id, link, gcls);
      add_port(link.b, link.a.node_id, link, gcls);
    }
    for (const auto& s : streams) {
      for (const auto& h : s.hops) {
        PortSim& p = ports_[port_index(h.egress.key())];
        p.owned |= static_cast<std::uint8_t>(1u << s.traffic_class);
        p.scheduled = true;
      }
    }
    std::vector<Nanos> cycles;
    for (const auto& p : ports_)
      if (p.gcl != nullptr && p.gcl->cycle_ns > 0) cycles.push_back(p.gcl->cycle_ns);
    for (const auto& s : streams) cycles.push_back(s.pattern_ns);
    cycle_ = hyperperiod(cycles);
    horizon_ = cycle_ * cfg.duration_cycles;
    Nanos worst = 0;
    for (const auto& s : streams) worst = std::max({worst, s.max_latency_ns, s.expected_latency_ns});
    end_ = horizon_ + cycle_ + worst;

    for (std::size_t i = 0; i < ports_.size(); ++i) {
      PortSim& p = ports_[i];
      if (!(p.scheduled || p.gcl != nullptr)) continue;
      for (int c = 0; c < kTrafficClasses; ++c) {
        if (((p.owned >> c) & 1u) == 0) {
          p.be_class = c;
          break;
        }
      }
      p.rng.seed(cfg.seed * 0x9E3779B97F4A7C15ULL + i);
      if (cfg.bg_load > 0.0 && p.be_class >= 0) {
        p.be_mean_gap = wire_occupancy(kMaxFrameBytes, p.speed);
        push(Event{next_be_gap(p), 0, 0, EventKind::best_effort, static_cast<int>(i), {}});
      }
    }
  }

  SimReport run() {
    std::vector<std::int64_t> expected(streams_.size(), 0);
    for (std::size_t s = 0; s < streams_.size(); ++s) {
      const SimStream& st = streams_[s];
      const int port = port_index(st.hops.front().egress.key());
      for (Nanos base = 0; base < horizon_; base += st.pattern_ns) {
        for (std::size_t k = 0; k < st.txtime_offsets_ns.size(); ++k) {
          const Nanos nominal = base + static_cast<Nanos>(k) * st.period_ns;
          for (int f = 0; f < st.frames_per_period; ++f) {
            push(Event{base + st.txtime_offsets_ns[k], 0, 0, EventKind::enqueue, port,
                       Frame{static_cast<int>(s), 0, nominal, st.frame_bytes}});
            ++expected[s];
          }
        }
      }
    }
    report_.streams.resize(streams_.size());
    for (std::size_t s = 0; s < streams_.size(); ++s) report_.streams[s].stream_id = streams_[s].stream_id;

    while (!events_.empty()) {
      Event ev = events_.top();
      events_.pop();
      if (ev.t > end_) break;
      PortSim& p = ports_[ev.port];
      switch (ev.kind) {
        case EventKind::enqueue:
          p.queues[streams_[ev.frame.stream].traffic_class].push_back(ev.frame);
          push(Event{ev.t, 1, 0, EventKind::transmit, ev.port, {}});
          break;
        case EventKind::best_effort: {
          auto& q = p.queues[p.be_class];
          if (q.size() < kBestEffortQueueCap) {
            q.push_back(Frame{-1, 0, ev.t, kMaxFrameBytes});
          } else {
            ++p.report.best_effort_dropped;
          }
          const Nanos next = ev.t + next_be_gap(p);
          if (next < horizon_) push(Event{next, 0, 0, EventKind::best_effort, ev.port, {}});
          push(Event{ev.t, 1, 0, EventKind::transmit, ev.port, {}});
          break;
        }
        case EventKind::transmit:
          try_transmit(ev.port, ev.t);
          break;
      }
    }

    for (std::size_t s = 0; s < streams_.size(); ++s)
      report_.streams[s].dropped_frames = expected[s] - report_.streams[s].observed_frame_count;
    for (const auto& p : ports_)
      if (p.scheduled || p.gcl != nullptr) report_.ports.push_back(p.report);
    std::sort(report_.ports.begin(), report_.ports.end(),
              [](const auto& a, const auto& b) { return a.port_id < b.port_id; });
    report_.horizon_ns = horizon_;
    return report_;
  }

 private:
  void add_port(const PortRef& ref, const std::string& peer, const Link& link,
                const std::map<std::string, GateControlList>& gcls) {
    PortSim p;
    p.key = ref.key();
    p.speed = link.speed_bps;
    p.propagation_ns = link.propagation_ns;
    p.peer_node = peer;
    if (auto it = gcls.find(p.key); it != gcls.end()) p.gcl = &it->second;
    p.gate = GateView(p.gcl);
    p.report.port_id = p.key;
    index_[p.key] = static_cast<int>(ports_.size());
    ports_.push_back(std::move(p));
  }

  int port_index(const std::string& key) const {
    const auto it = index_.find(key);
    if (it == index_.end()) throw ValidationError("stream uses unknown port " + key);
    return it->second;
  }

  Nanos next_be_gap(PortSim& p) {
    const double u = 0.5 + unit_interval(p.rng);
    const auto gap = static_cast<Nanos>(std::ceil(static_cast<double>(p.be_mean_gap) / cfg_.bg_load * u));
    return std::max<Nanos>(gap, 1);
  }

  void push(Event ev) {
    ev.seq = seq_++;
    events_.push(std::move(ev));
  }

  void try_transmit(int index, Nanos t) {
    PortSim& p = ports_[index];
    if (p.busy_until > t) return;
    const std::uint8_t open = p.gate.state_at(t);
    bool waiting = false;
    for (int c = kTrafficClasses - 1; c >= 0; --c) {
      auto& q = p.queues[c];
      if (q.empty()) continue;
      waiting = true;
      if (((open >> c) & 1u) == 0) continue;
      const Nanos occ = wire_occupancy(q.front().bytes, p.speed);
      if (t + occ > p.gate.close_time(c, t)) continue;

      const Frame f = q.front();
      q.pop_front();
      p.busy_until = t + occ;
      push(Event{t + occ, 1, 0, EventKind::transmit, index, {}});
      if (p.gcl != nullptr && !open_throughout(*p.gcl, c, t, t + occ)) ++p.report.gate_violations;
      if (f.stream < 0) {
        ++p.report.best_effort_frames;
        return;
      }
      ++p.report.scheduled_frames;
      const SimStream& s = streams_[f.stream];
      const Nanos arrival = t + occ + p.propagation_ns;
      if (static_cast<std::size_t>(f.hop) + 1 == s.hops.size()) {
        StreamReport& r = report_.streams[f.stream];
        r.observed_worst_latency_ns = std::max(r.observed_worst_latency_ns, arrival - f.release_ns);
        ++r.observed_frame_count;
      } else {
        const Nanos ready = arrival + topo_.node(p.peer_node).processing_delay_ns();
        push(Event{ready, 0, 0, EventKind::enqueue, port_index(s.hops[f.hop + 1].egress.key()),
                   Frame{f.stream, f.hop + 1, f.release_ns, f.bytes}});
      }
      return;
    }
    if (waiting) {
      const Nanos next = p.gate.next_change(t);
      if (next != kNever) push(Event{next, 1, 0, EventKind::transmit, index, {}});
    }
  }

  const Topology& topo_;
  const std::vector<SimStream>& streams_;
  SimConfig cfg_;
  std::vector<PortSim> ports_;
  std::map<std::string, int> index_;
  std::priority_queue<Event, std::vector<Event>, std::greater<>> events_;
  std::uint64_t seq_ = 0;
  Nanos cycle_ = 0;
  Nanos horizon_ = 0;
  Nanos end_ = 0;
  SimReport report_;
};

}  // namespace

void SimConfig::validate() const {
  if (duration_cycles < 1) throw SimConfigError("duration_cycles must be at least 1");
  if (!(bg_load >= 0.0 && bg_load <= 1.0)) throw SimConfigError("bg_load must lie in [0, 1]");
  if (release_jitter_ns != 0) throw SimConfigError("release jitter is not modeled and must be 0");
}

const StreamReport* SimReport::find(const std::string& stream_id) const {
  for (const auto& s : streams)
    if (s.stream_id == stream_id) return &s;
  return nullptr;
}

std::int64_t SimReport::total_drops() const {
  std::int64_t n = 0;
  for (const auto& s : streams) n += s.dropped_frames;
  return n;
}

std::int64_t SimReport::total_gate_violations() const {
  std::int64_t n = 0;
  for (const auto& p : ports) n += p.gate_violations;
  return n;
}

SimReport simulate(const Topology& topology, const std::map<std::string, GateControlList>& gcls,
                   const std::vector<SimStream>& streams, const SimConfig& cfg) {
  cfg.validate();
  if (streams.empty()) return {};
  for (const auto& s : streams) {
    if (s.hops.empty() || s.period_ns <= 0 || s.pattern_ns <= 0 || s.txtime_offsets_ns.empty())
      throw SimConfigError("stream " + s.stream_id + " has no usable schedule");
    if (s.traffic_class < 0 || s.traffic_class >= kTrafficClasses)
      throw SimConfigError("stream " + s.stream_id + " has an invalid traffic class");
  }
  return Simulation(topology, gcls, streams, cfg).run();
}

std::string to_string(GclViolationKind kind) {
  switch (kind) {
    case GclViolationKind::sum_mismatch:
      return "sum_mismatch";
    case GclViolationKind::zero_length:
      return "zero_length";
    case GclViolationKind::multi_gate_window:
      return "multi_gate_window";
    case GclViolationKind::guard_too_short:
      return "guard_too_short";
  }
  return "sum_mismatch";
}

std::vector<GclViolation> check_gcl_wellformed(const GateControlList& gcl, BitsPerSecond link_speed_bps) {
  std::vector<GclViolation> out;
  const auto& es = gcl.entries;
  const Nanos sum = entries_sum(gcl);
  if (sum != gcl.cycle_ns || gcl.cycle_ns <= 0) {
    out.push_back({GclViolationKind::sum_mismatch, -1, 0,
                   "intervals sum to " + std::to_string(sum) + ", cycle is " + std::to_string(gcl.cycle_ns)});
  }
  for (std::size_t i = 0; i < es.size(); ++i) {
    if (es[i].interval_ns <= 0)
      out.push_back({GclViolationKind::zero_length, static_cast<int>(i), 0, "entry has no duration"});
  }

  // The best-effort state: the widest open mask, ties broken by total time.
  // It opens at least two classes; when windows and guards fill the whole
  // cycle there is none, and no window needs a guard.
  std::map<std::uint8_t, Nanos> time_by_mask;
  for (const auto& e : es)
    if (e.gate_states != 0) time_by_mask[e.gate_states] += e.interval_ns;
  if (time_by_mask.empty()) return out;
  std::uint8_t others = 0;
  int best_pop = -1;
  Nanos best_time = -1;
  for (const auto& [mask, t] : time_by_mask) {
    const int pop = std::popcount(mask);
    if (pop > best_pop || (pop == best_pop && t > best_time)) {
      others = mask;
      best_pop = pop;
      best_time = t;
    }
  }
  if (best_pop < 2) others = 0;

  const Nanos guard = wire_occupancy(kMaxFrameBytes, link_speed_bps);
  const std::size_t n = es.size();
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint8_t m = es[i].gate_states;
    if (m == 0 || m == others) continue;
    if (std::popcount(m) != 1 || (m & others) != 0) {
      out.push_back({GclViolationKind::multi_gate_window, static_cast<int>(i), 0,
                     "scheduled window opens mask " + std::to_string(m)});
    }
    // Closed time between the preceding best-effort state and this window.
    const std::size_t prev = (i + n - 1) % n;
    if (es[prev].gate_states == m) continue;  // continuation across the cycle start
    Nanos closed = 0;
    for (std::size_t step = 1; step < n; ++step) {
      const auto& e = es[(i + n - step) % n];
      if (e.gate_states == 0) {
        closed += e.interval_ns;
        continue;
      }
      if (e.gate_states == others && closed < guard) {
        out.push_back({GclViolationKind::guard_too_short, static_cast<int>(i), guard,
                       "guard of " + std::to_string(closed) + " ns, need " + std::to_string(guard)});
      }
      break;
    }
  }
  return out;
}

std::vector<SimStream> sim_streams(const NsInstance& instance) {
  std::vector<SimStream> out;
  for (const auto& rec : instance.streams) {
    if (rec.segments.empty()) continue;
    const StreamSchedule& first = rec.segments.front().schedule;
    SimStream s;
    s.stream_id = rec.requirement.stream_id;
    for (const auto& seg : rec.segments) s.hops.insert(s.hops.end(), seg.segment.hops.begin(), seg.segment.hops.end());
    s.traffic_class = rec.requirement.traffic_class();
    s.frame_bytes = rec.requirement.traffic.max_frame_bytes;
    s.frames_per_period = rec.requirement.traffic.frames_per_period;
    s.period_ns = rec.requirement.traffic.period_ns;
    s.pattern_ns = first.pattern_ns;
    for (std::size_t i = 0; first.hop_count > 0 && i < first.reservations.size();
         i += static_cast<std::size_t>(first.hop_count))
      s.txtime_offsets_ns.push_back(first.reservations[i].window_start_ns);
    s.max_latency_ns = rec.requirement.traffic.max_latency_ns;
    s.expected_latency_ns = rec.e2e_latency_ns;
    out.push_back(std::move(s));
  }
  return out;
}

VerifyResult verify_ns(const NsInstance& instance, const std::vector<const NsInstance*>& co_resident,
                       const Topology& topology, const std::map<std::string, GateControlList>& gcls,
                       const SimConfig& cfg) {
  if (instance.status != InstanceStatus::active)
    throw PreconditionError("instance " + instance.instance_id + " is " + to_string(instance.status));
  cfg.validate();

  std::vector<SimStream> streams = sim_streams(instance);
  const std::size_t own = streams.size();
  for (const NsInstance* other : co_resident) {
    if (other == nullptr || other->instance_id == instance.instance_id) continue;
    if (other->status != InstanceStatus::active) continue;
    auto more = sim_streams(*other);
    streams.insert(streams.end(), more.begin(), more.end());
  }

  VerifyResult r;
  for (const auto& [port, gcl] : gcls) {
    auto v = check_gcl_wellformed(gcl, topology.port_speed(port));
    if (v.empty()) continue;
    for (const auto& x : v) r.failures.push_back("gcl " + port + ": " + to_string(x.kind) + " (" + x.detail + ")");
    r.gcl_violations[port] = std::move(v);
  }

  SimConfig quiet = cfg;
  quiet.bg_load = 0.0;
  r.quiet = simulate(topology, gcls, streams, quiet);
  r.loaded = simulate(topology, gcls, streams, cfg);

  for (std::size_t i = 0; i < own; ++i) {
    const SimStream& s = streams[i];
    const StreamReport& q = r.quiet.streams[i];
    const StreamReport& l = r.loaded.streams[i];
    if (q.dropped_frames > 0 || l.dropped_frames > 0)
      r.failures.push_back(s.stream_id + ": " + std::to_string(std::max(q.dropped_frames, l.dropped_frames)) +
                           " scheduled frames dropped");
    const Nanos worst = std::max(q.observed_worst_latency_ns, l.observed_worst_latency_ns);
    if (worst > s.max_latency_ns)
      r.failures.push_back(s.stream_id + ": worst latency " + std::to_string(worst) + " ns exceeds " +
                           std::to_string(s.max_latency_ns));
    if (q.observed_worst_latency_ns != l.observed_worst_latency_ns)
      r.failures.push_back(s.stream_id + ": latency changes under load (" +
                           std::to_string(q.observed_worst_latency_ns) + " vs " +
                           std::to_string(l.observed_worst_latency_ns) + ")");
    if (q.observed_worst_latency_ns != s.expected_latency_ns)
      r.oracle_mismatches.push_back(s.stream_id + ": simulated " + std::to_string(q.observed_worst_latency_ns) +
                                    " ns, scheduled " + std::to_string(s.expected_latency_ns));
  }
  const auto violations = r.quiet.total_gate_violations() + r.loaded.total_gate_violations();
  if (violations > 0) r.failures.push_back(std::to_string(violations) + " gate violations");
  r.pass = r.failures.empty();
  return r;
}

Json to_json(const SimReport& report) {
  Json streams = Json::array();
  for (const auto& s : report.streams) {
    streams.push_back(Json{{"stream_id", s.stream_id},
                           {"observed_worst_latency_ns", s.observed_worst_latency_ns},
                           {"observed_frame_count", s.observed_frame_count},
                           {"dropped_frames", s.dropped_frames}});
  }
  Json ports = Json::array();
  for (const auto& p : report.ports) {
    ports.push_back(Json{{"port_id", p.port_id},
                         {"gate_violations", p.gate_violations},
                         {"scheduled_frames", p.scheduled_frames},
                         {"best_effort_frames", p.best_effort_frames},
                         {"best_effort_dropped", p.best_effort_dropped}});
  }
  return Json{{"horizon_ns", report.horizon_ns}, {"streams", std::move(streams)}, {"ports", std::move(ports)}};
}

Json to_json(const VerifyResult& result) {
  Json gcl = Json::object();
  for (const auto& [port, vs] : result.gcl_violations) {
    Json list = Json::array();
    for (const auto& v : vs) {
      list.push_back(Json{{"kind", to_string(v.kind)},
                          {"entry_index", v.entry_index},
                          {"needed_ns", v.needed_ns},
                          {"detail", v.detail}});
    }
    gcl[port] = std::move(list);
  }
  return Json{{"pass", result.pass},
              {"failures", result.failures},
              {"oracle_mismatches", result.oracle_mismatches},
              {"gcl_violations", std::move(gcl)},
              {"quiet", to_json(result.quiet)},
              {"loaded", to_json(result.loaded)}};
}

}  // namespace tsnfv
