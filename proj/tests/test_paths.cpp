/* Copyright 2026 The flexsched Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <gtest/gtest.h>

#include <random>
#include <string>
#include <vector>

#include "flexsched.hpp"
#include "oracles.hpp"

namespace flexsched {
namespace {

std::vector<std::string> ids(const Network& net, const Path& p) {
  std::vector<std::string> out;
  for (auto v : p.nodes) out.push_back(net.node(v).id);
  return out;
}

using Names = std::vector<std::string>;

TEST(ShortestPath, SourceEqualsDestinationIsEmpty) {
  const Network net = oracle::make_network({"A", "B"}, {{"A", "B", 1, 1}});
  const Path p = shortest_path(net, 0, 0, HopWeight{});
  EXPECT_TRUE(p.empty());
  EXPECT_EQ(p.weight, Cost::zero());
}

TEST(ShortestPath, ChainHasUniquePath) {
  const Network net = oracle::make_network({"A", "B", "C", "D"},
                                           {{"A", "B", 1, 1}, {"B", "C", 1, 1}, {"C", "D", 1, 1}});
  const Path p = shortest_path(net, net.index_of("A"), net.index_of("D"), HopWeight{});
  EXPECT_EQ(ids(net, p), (Names{"A", "B", "C", "D"}));
  EXPECT_EQ(p.weight, cost(3));
  EXPECT_EQ(p.hops(), 3u);
}

TEST(ShortestPath, EqualWeightsBreakOnHopsThenIds) {
  // A->E: A-C-E and A-B-E weigh 2, A-D-B-E weighs 2 with three hops.
  const Network net = oracle::make_network(
      {"E", "D", "C", "B", "A"},
      {{"A", "C", 1, 0}, {"C", "E", 1, 0}, {"A", "B", 1, 0}, {"B", "E", 1, 0}, {"A", "D", 1, 0}, {"D", "B", 1, 0}});
  oracle::TableWeight w{{cost(1), cost(1), cost(1), cost(1), cost(0.5), cost(0.5)}, {}};
  const Path p = shortest_path(net, net.index_of("A"), net.index_of("E"), w);
  EXPECT_EQ(ids(net, p), (Names{"A", "B", "E"}));
  const auto all = oracle::all_simple_paths(net, net.index_of("A"), net.index_of("E"), w);
  ASSERT_FALSE(all.empty());
  EXPECT_EQ(p, all.front());
}

TEST(ShortestPath, DisconnectedAndNegativeAreErrors) {
  Network net = oracle::make_network({"A", "B", "C"}, {{"A", "B", 1, 1}});
  EXPECT_THROW(shortest_path(net, 0, 2, HopWeight{}), NoPath);
  oracle::TableWeight neg{{cost(-1)}, {}};
  EXPECT_THROW(shortest_path(net, 0, 1, neg), NegativeWeight);
}

TEST(ShortestPath, SkipsFailedLinks) {
  Network net = oracle::make_network({"A", "B", "C"}, {{"A", "B", 1, 1}, {"B", "C", 1, 1}, {"A", "C", 1, 5}});
  net.fail_link(2);
  const Path p = shortest_path(net, 0, 2, HopWeight{});
  EXPECT_EQ(ids(net, p), (Names{"A", "B", "C"}));
}

TEST(KShortestPaths, KOneIsTheShortestPath) {
  const Network net = oracle::ring10();
  const auto list = k_shortest_paths(net, 0, 5, 1, LatencyWeight{});
  ASSERT_EQ(list.size(), 1u);
  EXPECT_EQ(list.front(), shortest_path(net, 0, 5, LatencyWeight{}));
}

TEST(KShortestPaths, CycleYieldsBothTwoHopRoutesInIdOrder) {
  const Network net = oracle::make_network({"A", "B", "C", "D"},
                                           {{"A", "B", 1, 1}, {"B", "C", 1, 1}, {"C", "D", 1, 1}, {"D", "A", 1, 1}});
  const auto list = k_shortest_paths(net, net.index_of("A"), net.index_of("C"), 2, HopWeight{});
  ASSERT_EQ(list.size(), 2u);
  EXPECT_EQ(ids(net, list[0]), (Names{"A", "B", "C"}));
  EXPECT_EQ(ids(net, list[1]), (Names{"A", "D", "C"}));
  EXPECT_EQ(list[1].weight, cost(2));
}

TEST(KShortestPaths, FewerPathsThanRequested) {
  const Network net = oracle::make_network({"A", "B", "C"}, {{"A", "B", 1, 1}, {"B", "C", 1, 1}});
  EXPECT_EQ(k_shortest_paths(net, 0, 2, 5, HopWeight{}).size(), 1u);
  EXPECT_THROW(k_shortest_paths(net, 0, 2, 0, HopWeight{}), ValidationError);
}

TEST(KShortestPaths, NoPathWhenDisconnected) {
  const Network net = oracle::make_network({"A", "B", "C"}, {{"A", "B", 1, 1}});
  EXPECT_THROW(k_shortest_paths(net, 0, 2, 3, HopWeight{}), NoPath);
}

// Every instance: the full k-shortest list equals exhaustive enumeration,
// shorter lists are prefixes, and calls are repeatable.
TEST(PathProperties, AgreeWithExhaustiveEnumeration) {
  std::mt19937_64 rng(2024);
  for (int instance = 0; instance < 300; ++instance) {
    const std::size_t n = 2 + rng() % 6;
    auto [net, w] = oracle::random_graph(rng, n, 0.4, 3);
    const NodeIndex src = rng() % n;
    const NodeIndex dst = rng() % n;
    const auto expected = oracle::all_simple_paths(net, src, dst, w);
    const Path best = shortest_path(net, src, dst, w);
    ASSERT_EQ(best, expected.front()) << "instance " << instance;
    const auto all = k_shortest_paths(net, src, dst, expected.size() + 2, w);
    ASSERT_EQ(all, expected) << "instance " << instance;
    for (std::size_t k = 1; k <= expected.size(); ++k) {
      const auto prefix = k_shortest_paths(net, src, dst, k, w);
      ASSERT_TRUE(std::equal(prefix.begin(), prefix.end(), all.begin())) << "k=" << k;
    }
    for (const auto& p : all) {
      std::set<NodeIndex> seen(p.nodes.begin(), p.nodes.end());
      ASSERT_EQ(seen.size(), p.nodes.size());
      for (std::size_t i = 0; i < p.links.size(); ++i) {
        ASSERT_EQ(net.tail(p.links[i]), p.nodes[i]);
        ASSERT_EQ(net.head(p.links[i]), p.nodes[i + 1]);
      }
    }
    ASSERT_EQ(shortest_path(net, src, dst, w), best);
  }
}

TEST(PathProperties, AsymmetricWeightsAreDirectional) {
  const Network net = oracle::make_network({"A", "B", "C"}, {{"A", "B", 1, 1}, {"B", "C", 1, 1}, {"A", "C", 1, 1}});
  oracle::TableWeight w{{cost(1), cost(1), cost(5)}, {cost(1), cost(1), cost(1)}};
  EXPECT_EQ(ids(net, shortest_path(net, 0, 2, w)), (Names{"A", "B", "C"}));
  EXPECT_EQ(ids(net, shortest_path(net, 2, 0, w)), (Names{"C", "A"}));
}

}  // namespace
}  // namespace flexsched
