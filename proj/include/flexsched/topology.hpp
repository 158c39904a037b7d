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

#include <algorithm>
#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "flexsched/detail/document.hpp"
#include "flexsched/error.hpp"
#include "flexsched/units.hpp"

namespace flexsched {

using NodeIndex = std::size_t;
using LinkIndex = std::size_t;
using AllocationId = std::uint64_t;

struct Node {
  std::string id;
  bool can_compute = false;
  bool can_aggregate = false;
  Duration agg_time;
};

/// Orientation of a traversal relative to the link's stored endpoints.
enum class Direction : std::uint8_t { Forward = 0, Reverse = 1 };

constexpr Direction opposite(Direction d) {
  return d == Direction::Forward ? Direction::Reverse : Direction::Forward;
}

struct DirectedLink {
  LinkIndex link = 0;
  Direction dir = Direction::Forward;

  constexpr auto operator<=>(const DirectedLink&) const = default;

  [[nodiscard]] constexpr DirectedLink reversed() const {
    return {link, opposite(dir)};
  }
};

struct Link {
  NodeIndex a = 0;
  NodeIndex b = 0;
  Bandwidth capacity;
  Duration latency;
  /// Remaining capacity, indexed by Direction (a->b, b->a).
  std::array<Bandwidth, 2> residual{};
  bool up = true;

  [[nodiscard]] Bandwidth residual_in(Direction d) const {
    return residual[static_cast<std::size_t>(d)];
  }
};

/// Loopless route. `nodes` has one more element than `links` unless empty.
struct Path {
  std::vector<NodeIndex> nodes;
  std::vector<DirectedLink> links;
  Cost weight;

  [[nodiscard]] bool empty() const { return links.empty(); }
  [[nodiscard]] std::size_t hops() const { return links.size(); }

  bool operator==(const Path&) const = default;
};

struct Allocation {
  std::vector<DirectedLink> links;
  Bandwidth rate;
};

/// Capacitated network with a per-direction bandwidth ledger.
///
/// Residuals are kept in integer Mbit/s, so for every directed link
/// residual == capacity - sum(outstanding allocation rates) holds exactly.
class Network {
 public:
  NodeIndex add_node(Node node) {
    if (node.id.empty()) throw ValidationError("node id must not be empty");
    if (index_.contains(node.id)) {
      throw ValidationError("duplicate node id \"" + node.id + "\"");
    }
    if (node.can_aggregate && !node.can_compute) {
      throw ValidationError("node \"" + node.id +
                            "\": can_aggregate requires can_compute");
    }
    if (node.agg_time < Duration::zero()) {
      throw ValidationError("node \"" + node.id +
                            "\": agg_time_ms must be non-negative");
    }
    const NodeIndex idx = nodes_.size();
    index_.emplace(node.id, idx);
    nodes_.push_back(std::move(node));
    adjacency_.emplace_back();
    refresh_ranks();
    return idx;
  }

  LinkIndex add_link(std::string_view a, std::string_view b, Bandwidth capacity,
                     Duration latency) {
    const std::string where =
        "link " + std::string(a) + "-" + std::string(b);
    auto ia = find_node(a);
    auto ib = find_node(b);
    if (!ia) throw ValidationError(where + ": unknown node \"" + std::string(a) + "\"");
    if (!ib) throw ValidationError(where + ": unknown node \"" + std::string(b) + "\"");
    if (*ia == *ib) throw ValidationError(where + ": self-loop");
    if (find_link(*ia, *ib)) throw ValidationError(where + ": parallel link");
    if (capacity <= Bandwidth::zero()) {
      throw ValidationError(where + ": capacity_gbps must be positive");
    }
    if (latency < Duration::zero()) {
      throw ValidationError(where + ": latency_ms must be non-negative");
    }
    const LinkIndex idx = links_.size();
    links_.push_back(Link{*ia, *ib, capacity, latency, {capacity, capacity}, true});
    insert_adjacent(*ia, {idx, Direction::Forward});
    insert_adjacent(*ib, {idx, Direction::Reverse});
    return idx;
  }

  [[nodiscard]] const std::vector<Node>& nodes() const { return nodes_; }
  [[nodiscard]] const std::vector<Link>& links() const { return links_; }
  [[nodiscard]] const Node& node(NodeIndex i) const { return nodes_.at(i); }
  [[nodiscard]] const Link& link(LinkIndex i) const { return links_.at(i); }

  [[nodiscard]] std::optional<NodeIndex> find_node(std::string_view id) const {
    auto it = index_.find(std::string(id));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  [[nodiscard]] NodeIndex index_of(std::string_view id) const {
    auto i = find_node(id);
    if (!i) throw ValidationError("unknown node \"" + std::string(id) + "\"");
    return *i;
  }

  /// Position of the node in ascending id order; used for tie-breaking.
  [[nodiscard]] std::size_t rank(NodeIndex i) const { return rank_[i]; }

  [[nodiscard]] std::optional<LinkIndex> find_link(NodeIndex u, NodeIndex v) const {
    for (const auto& dl : adjacency_.at(u)) {
      if (head(dl) == v) return dl.link;
    }
    return std::nullopt;
  }

  [[nodiscard]] std::optional<DirectedLink> find_directed(NodeIndex u,
                                                          NodeIndex v) const {
    auto l = find_link(u, v);
    if (!l) return std::nullopt;
    return DirectedLink{*l, links_[*l].a == u ? Direction::Forward
                                              : Direction::Reverse};
  }

  /// Outgoing directed links of `u` (down links included), sorted by the
  /// rank of the far endpoint.
  [[nodiscard]] std::span<const DirectedLink> outgoing(NodeIndex u) const {
    return adjacency_.at(u);
  }

  [[nodiscard]] NodeIndex tail(DirectedLink dl) const {
    const Link& l = links_.at(dl.link);
    return dl.dir == Direction::Forward ? l.a : l.b;
  }
  [[nodiscard]] NodeIndex head(DirectedLink dl) const {
    const Link& l = links_.at(dl.link);
    return dl.dir == Direction::Forward ? l.b : l.a;
  }
  [[nodiscard]] Bandwidth residual(DirectedLink dl) const {
    return links_.at(dl.link).residual_in(dl.dir);
  }

  [[nodiscard]] std::string describe(DirectedLink dl) const {
    return nodes_[tail(dl)].id + "->" + nodes_[head(dl)].id;
  }

  [[nodiscard]] std::size_t compute_node_count() const {
    return static_cast<std::size_t>(std::count_if(
        nodes_.begin(), nodes_.end(), [](const Node& n) { return n.can_compute; }));
  }

  /// Debits `rate` on every listed directed link, or on none of them.
  AllocationId allocate(std::span<const DirectedLink> links, Bandwidth rate) {
    if (rate <= Bandwidth::zero()) {
      throw ValidationError("allocation rate must be positive");
    }
    std::map<DirectedLink, Bandwidth> need;
    for (const auto& dl : links) {
      if (dl.link >= links_.size()) {
        throw UnknownLink("link index " + std::to_string(dl.link));
      }
      need[dl] += rate;
    }
    for (const auto& dl : links) {
      if (!links_[dl.link].up || residual(dl) < need[dl]) {
        throw InsufficientCapacity("insufficient capacity on " + describe(dl));
      }
    }
    for (const auto& [dl, amount] : need) {
      links_[dl.link].residual[static_cast<std::size_t>(dl.dir)] -= amount;
    }
    const AllocationId id = next_id_++;
    ledger_.emplace(id, Allocation{{links.begin(), links.end()}, rate});
    return id;
  }

  void release(AllocationId id) {
    auto it = ledger_.find(id);
    if (it == ledger_.end()) {
      throw UnknownAllocation("unknown allocation " + std::to_string(id));
    }
    for (const auto& dl : it->second.links) {
      links_[dl.link].residual[static_cast<std::size_t>(dl.dir)] += it->second.rate;
    }
    ledger_.erase(it);
  }

  [[nodiscard]] const std::map<AllocationId, Allocation>& allocations() const {
    return ledger_;
  }

  /// Takes a link out of service. Live allocations on it must be released
  /// first.
  void fail_link(LinkIndex l) {
    if (l >= links_.size() || !links_[l].up) {
      throw UnknownLink("link index " + std::to_string(l));
    }
    for (const auto& [id, alloc] : ledger_) {
      for (const auto& dl : alloc.links) {
        if (dl.link == l) {
          throw ValidationError("link " + describe({l, Direction::Forward}) +
                                " still carries allocation " + std::to_string(id));
        }
      }
    }
    links_[l].up = false;
  }

 private:
  void insert_adjacent(NodeIndex u, DirectedLink dl) {
    auto& adj = adjacency_[u];
    auto pos = std::upper_bound(adj.begin(), adj.end(), dl,
                                [&](const DirectedLink& x, const DirectedLink& y) {
                                  return rank_[head(x)] < rank_[head(y)];
                                });
    adj.insert(pos, dl);
  }

  void refresh_ranks() {
    std::vector<NodeIndex> order(nodes_.size());
    for (NodeIndex i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](NodeIndex x, NodeIndex y) {
      return nodes_[x].id < nodes_[y].id;
    });
    rank_.assign(nodes_.size(), 0);
    for (std::size_t r = 0; r < order.size(); ++r) rank_[order[r]] = r;
    for (auto& adj : adjacency_) {
      std::sort(adj.begin(), adj.end(), [&](const DirectedLink& x, const DirectedLink& y) {
        return rank_[head(x)] < rank_[head(y)];
      });
    }
  }

  std::vector<Node> nodes_;
  std::vector<Link> links_;
  std::unordered_map<std::string, NodeIndex> index_;
  std::vector<std::size_t> rank_;
  std::vector<std::vector<DirectedLink>> adjacency_;
  std::map<AllocationId, Allocation> ledger_;
  AllocationId next_id_ = 1;
};

/// Parses a topology document:
/// `{"nodes": [{id, can_compute, can_aggregate, agg_time_ms}],
///   "links": [{a, b, capacity_gbps, latency_ms}]}`.
inline Network load_topology(std::string_view text) {
  using detail::ObjectReader;
  const auto doc = detail::parse_document(text, "topology");
  ObjectReader top(doc, "topology");
  top.allow_only({"nodes", "links"});

  Network net;
  const auto& nodes = top.array("nodes");
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    ObjectReader r(nodes[i], "nodes[" + std::to_string(i) + "]");
    r.allow_only({"id", "can_compute", "can_aggregate", "agg_time_ms"});
    Node n;
    n.id = r.string("id");
    n.can_compute = r.boolean("can_compute");
    n.can_aggregate = r.boolean("can_aggregate");
    const double agg = r.number("agg_time_ms");
    if (agg < 0) {
      throw ValidationError(r.field("agg_time_ms") + ": node \"" + n.id +
                            "\" has negative aggregation time");
    }
    n.agg_time = ms(agg);
    try {
      net.add_node(std::move(n));
    } catch (const ValidationError& e) {
      throw ValidationError(r.path() + ": " + e.what());
    }
  }

  const auto& links = top.array("links");
  for (std::size_t i = 0; i < links.size(); ++i) {
    ObjectReader r(links[i], "links[" + std::to_string(i) + "]");
    r.allow_only({"a", "b", "capacity_gbps", "latency_ms"});
    const auto a = r.string("a");
    const auto b = r.string("b");
    const double cap = r.number("capacity_gbps");
    const double lat = r.number("latency_ms");
    if (!(cap > 0)) {
      throw ValidationError(r.field("capacity_gbps") + ": link " + a + "-" + b +
                            " capacity must be positive");
    }
    if (lat < 0) {
      throw ValidationError(r.field("latency_ms") + ": link " + a + "-" + b +
                            " latency must be non-negative");
    }
    try {
      net.add_link(a, b, gbps(cap), ms(lat));
    } catch (const ValidationError& e) {
      throw ValidationError(r.path() + ": " + e.what());
    }
  }
  return net;
}

/// Serializes a network (capacities only; ledger state is not persisted).
inline std::string dump_topology(const Network& net) {
  detail::json nodes = detail::json::array();
  for (const auto& n : net.nodes()) {
    nodes.push_back({{"id", n.id},
                     {"can_compute", n.can_compute},
                     {"can_aggregate", n.can_aggregate},
                     {"agg_time_ms", to_ms(n.agg_time)}});
  }
  detail::json links = detail::json::array();
  for (const auto& l : net.links()) {
    if (!l.up) continue;
    links.push_back({{"a", net.node(l.a).id},
                     {"b", net.node(l.b).id},
                     {"capacity_gbps", to_gbps(l.capacity)},
                     {"latency_ms", to_ms(l.latency)}});
  }
  detail::json doc = {{"nodes", nodes}, {"links", links}};
  return doc.dump(2) + "\n";
}

}  // namespace flexsched
