// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

#include "scenarios.hpp"
#include "tsnfv/cnc.hpp"
#include "tsnfv/uni.hpp"
#include "tsnfv/verifier.hpp"
#include "tsnfv/workspace.hpp"

namespace {

using namespace tsnfv;

/// h0..h{n-1} on B1, all streams to hx on B2 over one shared link.
std::shared_ptr<const Topology> fan_in(int hosts) {
  testing::TopoBuilder b;
  b.domain("pop1", DomainKind::nfvi_pop, "vim-1").bridge("B1", "pop1").bridge("B2", "pop1");
  b.host("hx", "pop1").link("B2", "p0", "hx", "eth0");
  b.link("B1", "p0", "B2", "p1");
  for (int i = 0; i < hosts; ++i) {
    const std::string h = "h" + std::to_string(i);
    b.host(h, "pop1").link(h, "eth0", "B1", "p" + std::to_string(i + 1));
  }
  return std::make_shared<const Topology>(b.build());
}

std::vector<StreamRequirement> fan_in_streams(int n) {
  constexpr Nanos kPeriods[] = {125'000, 250'000, 500'000, 1'000'000};
  std::vector<StreamRequirement> out;
  for (int i = 0; i < n; ++i) {
    const auto spec = testing::traffic(kPeriods[i % 4], 200, 1, 1'000'000);
    auto s = derive_streams(testing::two_vnf_nsd(spec).build(),
                            testing::two_vnf_placement("h" + std::to_string(i), "hx",
                                                       0x020000000000ULL + 0x10ULL * static_cast<unsigned>(i))
                                .build())
                 .front();
    s.stream_id = "s" + std::to_string(i);
    out.push_back(s);
  }
  return out;
}

void BM_AdmitStreams(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto topo = fan_in(n);
  const auto streams = fan_in_streams(n);
  for (auto _ : state) {
    CncState cnc("pop1", topo);
    for (const auto& s : streams)
      cnc.admit_stream(s, topo->split_by_domain(topo->shortest_path(s.talker.node_id, "hx")).front(), 1'000'000);
    benchmark::DoNotOptimize(cnc.hyperperiod());
  }
  state.SetComplexityN(n);
}
BENCHMARK(BM_AdmitStreams)->RangeMultiplier(2)->Range(2, 32)->Complexity();

void BM_SynthesizeGcls(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto topo = fan_in(n);
  CncState cnc("pop1", topo);
  for (const auto& s : fan_in_streams(n))
    cnc.admit_stream(s, topo->split_by_domain(topo->shortest_path(s.talker.node_id, "hx")).front(), 1'000'000);
  for (auto _ : state) benchmark::DoNotOptimize(cnc.synthesize_gcls());
}
BENCHMARK(BM_SynthesizeGcls)->RangeMultiplier(2)->Range(2, 32);

void BM_Simulate(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto topo = fan_in(n);
  Workspace ws(*topo);
  for (int i = 0; i < n; ++i)
    ws.instantiate(testing::two_vnf_nsd(testing::traffic(250'000, 200, 1, 1'000'000), 7, 10 + i).build(),
                   testing::two_vnf_placement("h" + std::to_string(i), "hx",
                                              0x020000000000ULL + 0x10ULL * static_cast<unsigned>(i))
                       .build());
  std::vector<SimStream> streams;
  for (const auto& [id, inst] : ws.cuc().instances()) {
    const auto s = sim_streams(inst);
    streams.insert(streams.end(), s.begin(), s.end());
  }
  SimConfig cfg;
  cfg.bg_load = 1.0;
  for (auto _ : state) benchmark::DoNotOptimize(simulate(ws.topology(), ws.installed_gcls(), streams, cfg));
}
BENCHMARK(BM_Simulate)->RangeMultiplier(2)->Range(2, 16);

void BM_InstantiateCrossPop(benchmark::State& state) {
  const auto topo = testing::cross_pop_topology().build();
  const auto nsd = testing::two_vnf_nsd(testing::traffic(250'000, 500, 1, 100'000)).build();
  const auto placement = testing::two_vnf_placement("h1", "h2").build();
  for (auto _ : state) {
    Workspace ws(topo);
    benchmark::DoNotOptimize(ws.instantiate(nsd, placement).streams.size());
  }
}
BENCHMARK(BM_InstantiateCrossPop);

void BM_UniCodec(benchmark::State& state) {
  const auto topo = fan_in(1);
  const auto s = fan_in_streams(1).front();
  const auto seg = topo->split_by_domain(topo->shortest_path(s.talker.node_id, "hx")).front();
  const UniRequest req = StreamRequest{1, s, seg.hops, std::nullopt, 100'000, {}};
  for (auto _ : state) benchmark::DoNotOptimize(decode_request(encode(req)));
}
BENCHMARK(BM_UniCodec);

}  // namespace
BENCHMARK_MAIN();
