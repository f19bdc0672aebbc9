// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <random>

#include "scenarios.hpp"
#include "tsnfv/error.hpp"
#include "tsnfv/topology.hpp"

namespace tsnfv {
namespace {

using testing::TopoBuilder;

TEST(LoadTopology, TwoHostsOneBridge) {
  const Topology t = testing::hand_trace_topology().build();
  EXPECT_EQ(t.nodes().size(), 3u);
  EXPECT_EQ(t.links().size(), 2u);
  EXPECT_TRUE(t.node("B1").is_bridge());
  EXPECT_EQ(t.node("B1").bridge->processing_delay_ns, 1000);
  EXPECT_EQ(t.port_speed("B1.p1"), 1'000'000'000);
}

TEST(LoadTopology, PortUsedTwiceIsRejected) {
  TopoBuilder b = testing::hand_trace_topology();
  b.host("h3", "pop1").link("h3", "p0", "B1", "p1");
  EXPECT_THROW(b.build(), ValidationError);
}

TEST(LoadTopology, BridgeWithoutProcessingDelayIsParseError) {
  io::Json doc = testing::hand_trace_topology().json();
  for (auto& n : doc["nodes"])
    if (n["node_id"] == "B1") n.erase("processing_delay_ns");
  EXPECT_THROW(Topology::from_json(doc), ParseError);
}

TEST(LoadTopology, HostWithBridgeFieldsIsRejected) {
  io::Json doc = testing::hand_trace_topology().json();
  for (auto& n : doc["nodes"])
    if (n["node_id"] == "h1") n["gcl_max_entries"] = 8;
  EXPECT_THROW(Topology::from_json(doc), ValidationError);
}

TEST(LoadTopology, DanglingDomainIsRejected) {
  TopoBuilder b = testing::hand_trace_topology();
  b.host("h3", "elsewhere");
  EXPECT_THROW(b.build(), ValidationError);
}

TEST(LoadTopology, ControllerOwningTwoPopsIsRejected) {
  TopoBuilder b;
  b.domain("pop1", DomainKind::nfvi_pop, "vim-1").domain("pop2", DomainKind::nfvi_pop, "vim-1");
  EXPECT_THROW(b.build(), ValidationError);
}

TEST(LoadTopology, SyntaxErrorIsParseError) {
  EXPECT_THROW(io::parse_text("{\"nodes\": [", "topology"), ParseError);
}

TEST(LoadTopology, RoundTripsToIdenticalStructure) {
  const Topology t = testing::cross_pop_topology().build();
  const Topology again = Topology::from_json(t.to_json());
  EXPECT_EQ(t, again);
  EXPECT_EQ(t.to_json().dump(), again.to_json().dump());
}

TEST(ShortestPath, UniquePathThroughOneBridge) {
  const Topology t = testing::hand_trace_topology().build();
  const Path p = t.shortest_path("h1", "h2");
  ASSERT_EQ(p.hops.size(), 2u);
  EXPECT_EQ(p.hops[0].egress.key(), "h1.p0");
  EXPECT_EQ(p.hops[0].ingress.node_id, "B1");
  EXPECT_EQ(p.hops[1].egress.key(), "B1.p1");
  EXPECT_EQ(p.hops[1].ingress.node_id, "h2");
}

TEST(ShortestPath, SameNodeIsNoPath) {
  const Topology t = testing::hand_trace_topology().build();
  EXPECT_THROW(t.shortest_path("h1", "h1"), NoPath);
}

TEST(ShortestPath, DisconnectedIsNoPath) {
  TopoBuilder b = testing::hand_trace_topology();
  b.host("h3", "pop1");
  EXPECT_THROW(b.build().shortest_path("h1", "h3"), NoPath);
}

TEST(ShortestPath, DiamondTieBreaksOnSmallerBridge) {
  TopoBuilder b;
  b.domain("pop1", DomainKind::nfvi_pop, "vim-1")
      .bridge("B2", "pop1")
      .bridge("B1", "pop1")
      .host("A", "pop1")
      .host("C", "pop1")
      .link("A", "p0", "B2", "p0")
      .link("A", "p1", "B1", "p0")
      .link("B2", "p1", "C", "p0")
      .link("B1", "p1", "C", "p1");
  const Path p = b.build().shortest_path("A", "C");
  ASSERT_EQ(p.hops.size(), 2u);
  EXPECT_EQ(p.hops[0].ingress.node_id, "B1");
  EXPECT_EQ(p.hops[0].egress.port_id, "p1");
}

TEST(ShortestPath, HostsDoNotForward) {
  // h1 - h2 - h3 where h2 would be a shortcut; only bridges forward.
  TopoBuilder b;
  b.domain("pop1", DomainKind::nfvi_pop, "vim-1")
      .bridge("B1", "pop1")
      .host("h1", "pop1")
      .host("h2", "pop1")
      .host("h3", "pop1")
      .link("h1", "p0", "h2", "p0")
      .link("h2", "p1", "h3", "p0");
  EXPECT_THROW(b.build().shortest_path("h1", "h3"), NoPath);
}

TEST(SplitByDomain, SingleDomainIsOneSegment) {
  const Topology t = testing::hand_trace_topology().build();
  const auto segs = t.split_by_domain(t.shortest_path("h1", "h2"));
  ASSERT_EQ(segs.size(), 1u);
  EXPECT_EQ(segs[0].domain_id, "pop1");
  EXPECT_EQ(segs[0].controller_id, "vim-1");
  EXPECT_FALSE(segs[0].entry_port.has_value());
}

TEST(SplitByDomain, PopWanPopGivesThreeSegments) {
  const Topology t = testing::cross_pop_topology().build();
  const Path p = t.shortest_path("h1", "h2");
  ASSERT_EQ(p.hops.size(), 4u);
  const auto segs = t.split_by_domain(p);
  ASSERT_EQ(segs.size(), 3u);
  EXPECT_EQ(segs[0].domain_id, "pop1");
  EXPECT_EQ(segs[1].domain_id, "wan1");
  EXPECT_EQ(segs[2].domain_id, "pop2");
  EXPECT_EQ(segs[0].hops.size(), 2u);  // h1 and B1 both in pop1
  EXPECT_EQ(segs[1].controller_id, "wim-1");
  ASSERT_TRUE(segs[1].entry_port.has_value());
  EXPECT_EQ(segs[1].entry_port->key(), "W1.p0");
}

TEST(TopologyProperties, PathSymmetryAndSegmentConcatenation) {
  for (std::uint64_t seed = 1; seed <= 60; ++seed) {
    const Topology t = Topology::from_json(testing::random_scenario(seed).topology);
    std::vector<std::string> hosts;
    for (const auto& [id, n] : t.nodes())
      if (n.kind == NodeKind::compute_host) hosts.push_back(id);
    for (const auto& a : hosts) {
      for (const auto& b : hosts) {
        if (a == b) continue;
        const Path ab = t.shortest_path(a, b);
        const Path ba = t.shortest_path(b, a);
        EXPECT_EQ(ab.hops.size(), ba.hops.size());
        // Causal chaining of hops.
        EXPECT_EQ(ab.hops.front().egress.node_id, a);
        EXPECT_EQ(ab.hops.back().ingress.node_id, b);
        for (std::size_t i = 1; i < ab.hops.size(); ++i)
          EXPECT_EQ(ab.hops[i].egress.node_id, ab.hops[i - 1].ingress.node_id);
        const auto segs = t.split_by_domain(ab);
        std::vector<Hop> joined;
        for (std::size_t i = 0; i < segs.size(); ++i) {
          if (i > 0) { EXPECT_NE(segs[i].domain_id, segs[i - 1].domain_id); }
          joined.insert(joined.end(), segs[i].hops.begin(), segs[i].hops.end());
        }
        EXPECT_EQ(joined, ab.hops);
        // Deterministic.
        EXPECT_EQ(t.shortest_path(a, b), ab);
      }
    }
  }
}

}  // namespace
}  // namespace tsnfv
