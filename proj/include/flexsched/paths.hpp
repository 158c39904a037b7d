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

#pragma once

// Shortest and k-shortest loopless paths.
//
// Paths are totally ordered by (weight, hop count, node-id sequence). The
// order is preserved by appending a common suffix, so label-setting search
// and Yen's deviation scheme both return the exact minima under it.

#include <algorithm>
#include <concepts>
#include <cstddef>
#include <optional>
#include <set>
#include <vector>

#include "flexsched/error.hpp"
#include "flexsched/topology.hpp"
#include "flexsched/units.hpp"

namespace flexsched {

/// Per-directed-link cost. std::nullopt removes the link from consideration.
template <typename F>
concept WeightFunction = std::invocable<const F&, const Network&, DirectedLink> &&
    std::convertible_to<std::invoke_result_t<const F&, const Network&, DirectedLink>,
                        std::optional<Cost>>;

/// beta * latency_ms on every link that is up.
struct LatencyWeight {
  double beta = 1.0;
  std::optional<Cost> operator()(const Network& net, DirectedLink dl) const {
    return cost(beta * to_ms(net.link(dl.link).latency));
  }
};

/// One unit per hop.
struct HopWeight {
  std::optional<Cost> operator()(const Network&, DirectedLink) const {
    return cost(1.0);
  }
};

/// Three-way comparison of two paths under the (weight, hops, ids) order.
inline std::strong_ordering compare_paths(const Network& net, const Path& x,
                                          const Path& y) {
  if (auto c = x.weight <=> y.weight; c != 0) return c;
  if (auto c = x.links.size() <=> y.links.size(); c != 0) return c;
  const std::size_t n = std::min(x.nodes.size(), y.nodes.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (auto c = net.rank(x.nodes[i]) <=> net.rank(y.nodes[i]); c != 0) return c;
  }
  return x.nodes.size() <=> y.nodes.size();
}

namespace detail {

struct SearchLimits {
  std::vector<bool> banned_nodes;
  std::set<DirectedLink> banned_links;
};

template <WeightFunction W>
std::optional<Cost> checked_weight(const Network& net, DirectedLink dl, const W& weight) {
  if (!net.link(dl.link).up) return std::nullopt;
  std::optional<Cost> w = weight(net, dl);
  if (w && *w < Cost::zero()) {
    throw NegativeWeight("negative weight on " + net.describe(dl));
  }
  return w;
}

// Label-setting search. Labels carry whole paths; graphs here are small
// enough that the O(V^2 * path length) cost is irrelevant.
template <WeightFunction W>
std::optional<Path> best_path(const Network& net, NodeIndex src, NodeIndex dst,
                              const W& weight, const SearchLimits* limits) {
  const std::size_t n = net.nodes().size();
  std::vector<std::optional<Path>> label(n);
  std::vector<bool> settled(n, false);
  label[src] = Path{{src}, {}, Cost::zero()};

  for (;;) {
    std::optional<NodeIndex> u;
    for (NodeIndex v = 0; v < n; ++v) {
      if (settled[v] || !label[v]) continue;
      if (!u || compare_paths(net, *label[v], *label[*u]) < 0) u = v;
    }
    if (!u) return std::nullopt;
    if (*u == dst) {
      Path p = std::move(*label[*u]);
      if (p.links.empty()) p.nodes.clear();
      return p;
    }
    settled[*u] = true;
    for (const DirectedLink& dl : net.outgoing(*u)) {
      const NodeIndex v = net.head(dl);
      if (settled[v]) continue;
      if (limits) {
        if (limits->banned_nodes[v] || limits->banned_links.contains(dl)) continue;
      }
      const auto w = checked_weight(net, dl, weight);
      if (!w) continue;
      Path cand = *label[*u];
      cand.nodes.push_back(v);
      cand.links.push_back(dl);
      cand.weight += *w;
      if (!label[v] || compare_paths(net, cand, *label[v]) < 0) {
        label[v] = std::move(cand);
      }
    }
  }
}

}  // namespace detail

/// Minimum path from `src` to `dst` under (weight, hops, node ids).
/// An empty path (weight 0) is returned when src == dst.
template <WeightFunction W>
Path shortest_path(const Network& net, NodeIndex src, NodeIndex dst, const W& weight) {
  if (src >= net.nodes().size() || dst >= net.nodes().size()) {
    throw ValidationError("shortest_path: node index out of range");
  }
  auto p = detail::best_path(net, src, dst, weight, nullptr);
  if (!p) {
    throw NoPath("no path from " + net.node(src).id + " to " + net.node(dst).id);
  }
  return std::move(*p);
}

/// Up to `k` loopless paths in increasing (weight, hops, node ids) order
/// (Yen's algorithm). The result for k is a prefix of the result for k + 1.
template <WeightFunction W>
std::vector<Path> k_shortest_paths(const Network& net, NodeIndex src, NodeIndex dst,
                                   std::size_t k, const W& weight) {
  if (k == 0) throw ValidationError("k_shortest_paths: k must be positive");
  std::vector<Path> accepted;
  accepted.push_back(shortest_path(net, src, dst, weight));
  if (src == dst) return accepted;

  auto less = [&net](const Path& x, const Path& y) {
    return compare_paths(net, x, y) < 0;
  };
  std::set<Path, decltype(less)> candidates(less);

  while (accepted.size() < k) {
    const Path& prev = accepted.back();
    for (std::size_t i = 0; i + 1 < prev.nodes.size(); ++i) {
      const NodeIndex spur = prev.nodes[i];
      detail::SearchLimits limits;
      limits.banned_nodes.assign(net.nodes().size(), false);
      for (std::size_t j = 0; j < i; ++j) limits.banned_nodes[prev.nodes[j]] = true;
      for (const Path& p : accepted) {
        if (p.nodes.size() > i + 1 &&
            std::equal(p.nodes.begin(), p.nodes.begin() + i + 1, prev.nodes.begin())) {
          limits.banned_links.insert(p.links[i]);
        }
      }
      auto tail = detail::best_path(net, spur, dst, weight, &limits);
      if (!tail) continue;

      Path cand;
      cand.nodes.assign(prev.nodes.begin(), prev.nodes.begin() + i);
      cand.links.assign(prev.links.begin(), prev.links.begin() + i);
      for (const auto& dl : cand.links) {
        cand.weight += *detail::checked_weight(net, dl, weight);
      }
      cand.nodes.insert(cand.nodes.end(), tail->nodes.begin(), tail->nodes.end());
      cand.links.insert(cand.links.end(), tail->links.begin(), tail->links.end());
      cand.weight += tail->weight;
      candidates.insert(std::move(cand));
    }
    if (candidates.empty()) break;
    accepted.push_back(std::move(candidates.extract(candidates.begin()).value()));
  }
  return accepted;
}

}  // namespace flexsched
