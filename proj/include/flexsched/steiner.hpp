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

// Kou-Markowsky-Berman Steiner tree construction over the terminal set
// {global} + locals: metric closure, MST of the closure, expansion into
// physical paths, MST of the expanded subgraph, pruning of non-terminal
// leaves. Total cost is within 2x of the optimal Steiner tree.

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <optional>
#include <set>
#include <span>
#include <tuple>
#include <vector>

#include "flexsched/error.hpp"
#include "flexsched/paths.hpp"
#include "flexsched/topology.hpp"

namespace flexsched {

/// Closure edge between terminals[u] and terminals[v] (u < v).
struct ClosureEdge {
  std::size_t u = 0;
  std::size_t v = 0;
  Cost weight;
  Path path;
};

/// Metric closure over the terminals. terminals[0] is the global node.
struct AuxiliaryGraph {
  std::vector<NodeIndex> terminals;
  std::vector<ClosureEdge> edges;
};

/// Undirected physical tree, links sorted by index.
struct SteinerTree {
  std::vector<LinkIndex> links;
  Cost cost;
};

namespace detail {

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent_[std::max(a, b)] = std::min(a, b);
    return true;
  }

 private:
  std::vector<std::size_t> parent_;
};

// Ranks of the two endpoints, smaller first.
inline std::pair<std::size_t, std::size_t> ranked_pair(const Network& net, NodeIndex a,
                                                       NodeIndex b) {
  auto ra = net.rank(a);
  auto rb = net.rank(b);
  return {std::min(ra, rb), std::max(ra, rb)};
}

}  // namespace detail

/// Cost of an undirected link: the forward weight if admissible, else the
/// reverse weight.
template <WeightFunction W>
std::optional<Cost> undirected_weight(const Network& net, LinkIndex l, const W& weight) {
  if (auto w = detail::checked_weight(net, {l, Direction::Forward}, weight)) return w;
  return detail::checked_weight(net, {l, Direction::Reverse}, weight);
}

template <WeightFunction W>
AuxiliaryGraph build_metric_closure(const Network& net, std::span<const NodeIndex> terminals,
                                    const W& weight) {
  if (terminals.size() < 2) {
    throw ValidationError("metric closure needs at least two terminals");
  }
  std::set<NodeIndex> distinct(terminals.begin(), terminals.end());
  if (distinct.size() != terminals.size()) {
    throw ValidationError("metric closure terminals must be distinct");
  }
  AuxiliaryGraph aux;
  aux.terminals.assign(terminals.begin(), terminals.end());
  for (std::size_t i = 0; i < terminals.size(); ++i) {
    for (std::size_t j = i + 1; j < terminals.size(); ++j) {
      try {
        Path p = shortest_path(net, terminals[i], terminals[j], weight);
        aux.edges.push_back({i, j, p.weight, std::move(p)});
      } catch (const NoPath&) {
        if (i == 0) {
          throw DisconnectedTerminals("terminal " + net.node(terminals[j]).id +
                                      " unreachable from " + net.node(terminals[0]).id);
        }
      }
    }
  }
  return aux;
}

/// Kruskal over the closure. Ties are broken by the sorted node-id pair of
/// the edge endpoints. Returns indices into aux.edges.
inline std::vector<std::size_t> minimum_spanning_tree(const Network& net,
                                                      const AuxiliaryGraph& aux) {
  std::vector<std::size_t> order(aux.edges.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto key = [&](std::size_t e) {
    const auto& ce = aux.edges[e];
    return std::tuple(ce.weight, detail::ranked_pair(net, aux.terminals[ce.u],
                                                     aux.terminals[ce.v]));
  };
  std::sort(order.begin(), order.end(),
            [&](std::size_t x, std::size_t y) { return key(x) < key(y); });

  detail::DisjointSets sets(aux.terminals.size());
  std::vector<std::size_t> chosen;
  for (std::size_t e : order) {
    if (sets.unite(aux.edges[e].u, aux.edges[e].v)) chosen.push_back(e);
  }
  if (chosen.size() + 1 != aux.terminals.size()) {
    throw DisconnectedClosure("auxiliary graph does not span all terminals");
  }
  return chosen;
}

/// Kruskal over an undirected link set; ties broken by sorted node-id pair.
template <WeightFunction W>
std::vector<LinkIndex> spanning_forest(const Network& net, std::span<const LinkIndex> links,
                                       const W& weight) {
  std::vector<std::tuple<Cost, std::pair<std::size_t, std::size_t>, LinkIndex>> keyed;
  for (LinkIndex l : links) {
    auto w = undirected_weight(net, l, weight);
    if (!w) continue;
    const auto& link = net.link(l);
    keyed.emplace_back(*w, detail::ranked_pair(net, link.a, link.b), l);
  }
  std::sort(keyed.begin(), keyed.end());
  detail::DisjointSets sets(net.nodes().size());
  std::vector<LinkIndex> chosen;
  for (const auto& [w, pair, l] : keyed) {
    if (sets.unite(net.link(l).a, net.link(l).b)) chosen.push_back(l);
  }
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

/// Removes non-terminal leaves until none remain.
inline std::vector<LinkIndex> prune_leaves(const Network& net, std::vector<LinkIndex> links,
                                           std::span<const NodeIndex> terminals) {
  std::vector<bool> is_terminal(net.nodes().size(), false);
  for (NodeIndex t : terminals) is_terminal[t] = true;
  for (bool changed = true; changed;) {
    changed = false;
    std::vector<std::size_t> degree(net.nodes().size(), 0);
    for (LinkIndex l : links) {
      ++degree[net.link(l).a];
      ++degree[net.link(l).b];
    }
    std::vector<LinkIndex> kept;
    for (LinkIndex l : links) {
      const auto& link = net.link(l);
      const bool leaf_a = degree[link.a] == 1 && !is_terminal[link.a];
      const bool leaf_b = degree[link.b] == 1 && !is_terminal[link.b];
      if (leaf_a || leaf_b) {
        changed = true;
      } else {
        kept.push_back(l);
      }
    }
    links = std::move(kept);
  }
  return links;
}

/// Expands the selected closure edges into their physical paths, re-spans
/// the union and prunes it to a tree over the terminals.
template <WeightFunction W>
SteinerTree expand_and_prune(const Network& net, const AuxiliaryGraph& aux,
                             std::span<const std::size_t> mst_edges, const W& weight) {
  std::set<LinkIndex> used;
  for (std::size_t e : mst_edges) {
    for (const auto& dl : aux.edges.at(e).path.links) used.insert(dl.link);
  }
  const std::vector<LinkIndex> union_links(used.begin(), used.end());
  SteinerTree tree;
  tree.links = prune_leaves(net, spanning_forest(net, union_links, weight), aux.terminals);
  for (LinkIndex l : tree.links) tree.cost += *undirected_weight(net, l, weight);
  return tree;
}

/// Closure, MST and expansion in one call.
template <WeightFunction W>
SteinerTree kmb_steiner_tree(const Network& net, std::span<const NodeIndex> terminals,
                             const W& weight) {
  const auto aux = build_metric_closure(net, terminals, weight);
  const auto mst = minimum_spanning_tree(net, aux);
  return expand_and_prune(net, aux, mst, weight);
}

}  // namespace flexsched
