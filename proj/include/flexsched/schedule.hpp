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
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "flexsched/error.hpp"
#include "flexsched/paths.hpp"
#include "flexsched/steiner.hpp"
#include "flexsched/topology.hpp"
#include "flexsched/workload.hpp"

namespace flexsched {

enum class Policy : std::uint8_t { Fixed, Flexible };

inline std::string_view policy_name(Policy p) {
  return p == Policy::Fixed ? "fixed" : "flexible";
}

inline Policy parse_policy(std::string_view name) {
  if (name == "fixed") return Policy::Fixed;
  if (name == "flexible") return Policy::Flexible;
  throw ValidationError("unknown scheduler \"" + std::string(name) +
                        "\" (expected fixed or flexible)");
}

struct SchedulerParams {
  double alpha = 1.0;
  double beta = 1.0;
  std::size_t k_candidates = 4;
};

/// Directed tree edge carrying `multiplicity` un-aggregated model copies.
struct TreeEdge {
  DirectedLink link;
  NodeIndex from = 0;
  NodeIndex to = 0;
  std::int64_t multiplicity = 1;

  bool operator==(const TreeEdge&) const = default;
};

/// Routing structure for one procedure. Broadcast edges point away from
/// the root, upload edges toward it.
///
/// `branches` lists, per local model, the directed links from the root to
/// that local (broadcast) or from the local to the root (upload). They are
/// only recorded by the fixed policy, whose per-local paths may overlap
/// without forming a tree.
struct ScheduledTree {
  NodeIndex root = 0;
  std::vector<TreeEdge> edges;
  std::vector<NodeIndex> aggregation_points;
  std::vector<std::vector<DirectedLink>> branches;

  bool operator==(const ScheduledTree&) const = default;

  [[nodiscard]] bool aggregates_at(NodeIndex v) const {
    return std::binary_search(aggregation_points.begin(), aggregation_points.end(), v);
  }
};

struct Reservation {
  AllocationId id = 0;
  std::vector<DirectedLink> links;

  bool operator==(const Reservation&) const = default;
};

struct Schedule {
  std::string task_id;
  Policy policy = Policy::Flexible;
  ScheduledTree broadcast;
  ScheduledTree upload;
  Bandwidth rate;
  std::vector<Reservation> reservations;

  bool operator==(const Schedule&) const = default;

  [[nodiscard]] bool uses_link(LinkIndex l) const {
    for (const auto& r : reservations) {
      for (const auto& dl : r.links) {
        if (dl.link == l) return true;
      }
    }
    return false;
  }
};

/// Flexible-scheduler link cost:
///   alpha * (demand / capacity) * [not already_used] + beta * latency_ms.
/// Links whose residual in `dir` is below the demand are excluded.
inline std::optional<Cost> link_weight(const Link& link, Direction dir, const AITask& task,
                                       const SchedulerParams& params, bool already_used) {
  if (!link.up || link.residual_in(dir) < task.demand_rate) return std::nullopt;
  const double share = static_cast<double>(task.demand_rate.raw()) /
                       static_cast<double>(link.capacity.raw());
  const double bandwidth_term = already_used ? 0.0 : params.alpha * share;
  return cost(bandwidth_term + params.beta * to_ms(link.latency));
}

namespace detail {

struct FlexibleWeight {
  const AITask* task;
  const SchedulerParams* params;
  const std::set<LinkIndex>* excluded;

  std::optional<Cost> operator()(const Network& net, DirectedLink dl) const {
    if (excluded && excluded->contains(dl.link)) return std::nullopt;
    return link_weight(net.link(dl.link), dl.dir, *task, *params, false);
  }
};

inline std::vector<NodeIndex> resolve_terminals(const Network& net, const AITask& task) {
  std::vector<NodeIndex> t;
  t.push_back(net.index_of(task.global_node));
  for (const auto& l : task.local_nodes) t.push_back(net.index_of(l));
  return t;
}

// parent[v] = directed link parent(v) -> v for every node of the tree
// reachable from root.
inline std::map<NodeIndex, DirectedLink> orient_from(const Network& net,
                                                     std::span<const LinkIndex> links,
                                                     NodeIndex root) {
  std::map<NodeIndex, std::vector<LinkIndex>> incident;
  for (LinkIndex l : links) {
    incident[net.link(l).a].push_back(l);
    incident[net.link(l).b].push_back(l);
  }
  std::map<NodeIndex, DirectedLink> parent;
  std::vector<NodeIndex> frontier{root};
  std::set<NodeIndex> seen{root};
  while (!frontier.empty()) {
    const NodeIndex u = frontier.back();
    frontier.pop_back();
    for (LinkIndex l : incident[u]) {
      const auto& link = net.link(l);
      const NodeIndex v = link.a == u ? link.b : link.a;
      if (!seen.insert(v).second) continue;
      parent[v] = DirectedLink{l, link.a == u ? Direction::Forward : Direction::Reverse};
      frontier.push_back(v);
    }
  }
  return parent;
}

inline void sort_edges(const Network& net, std::vector<TreeEdge>& edges) {
  std::sort(edges.begin(), edges.end(), [&](const TreeEdge& x, const TreeEdge& y) {
    return std::pair(net.rank(x.from), net.rank(x.to)) <
           std::pair(net.rank(y.from), net.rank(y.to));
  });
}

}  // namespace detail

/// Orients an undirected tree away from `root`; every edge carries one copy.
inline ScheduledTree orient_broadcast(const Network& net, std::span<const LinkIndex> links,
                                      NodeIndex root) {
  ScheduledTree tree;
  tree.root = root;
  for (const auto& [v, dl] : detail::orient_from(net, links, root)) {
    tree.edges.push_back({dl, net.tail(dl), v, 1});
  }
  detail::sort_edges(net, tree.edges);
  return tree;
}

/// Orients an undirected tree toward the task's global node and places
/// aggregation at every interior node able to aggregate, plus the root.
/// The payload leaving v is one merged copy if v aggregates, otherwise the
/// sum of the copies entering v plus v's own copy when v is a local model.
inline ScheduledTree mark_aggregation_points(const Network& net,
                                             std::span<const LinkIndex> links,
                                             const AITask& task) {
  const NodeIndex root = net.index_of(task.global_node);
  const auto parent = detail::orient_from(net, links, root);

  std::set<NodeIndex> locals;
  for (const auto& l : task.local_nodes) locals.insert(net.index_of(l));
  std::map<NodeIndex, std::vector<NodeIndex>> children;
  for (const auto& [v, dl] : parent) children[net.tail(dl)].push_back(v);

  ScheduledTree tree;
  tree.root = root;
  tree.aggregation_points.push_back(root);
  for (const auto& [v, kids] : children) {
    if (v != root && net.node(v).can_aggregate) tree.aggregation_points.push_back(v);
  }
  std::sort(tree.aggregation_points.begin(), tree.aggregation_points.end());

  // post-order over the oriented tree
  std::map<NodeIndex, std::int64_t> outgoing;
  auto payload = [&](auto&& self, NodeIndex v) -> std::int64_t {
    std::int64_t incoming = 0;
    if (auto it = children.find(v); it != children.end()) {
      for (NodeIndex c : it->second) incoming += self(self, c);
    }
    const std::int64_t own = locals.contains(v) ? 1 : 0;
    const std::int64_t out = tree.aggregates_at(v) ? 1 : incoming + own;
    outgoing[v] = out;
    return out;
  };
  payload(payload, root);

  for (const auto& [v, dl] : parent) {
    const DirectedLink up = dl.reversed();
    tree.edges.push_back({up, v, net.tail(dl), outgoing[v]});
  }
  detail::sort_edges(net, tree.edges);
  return tree;
}

namespace detail {

inline std::vector<DirectedLink> both_directions(std::span<const LinkIndex> links) {
  std::vector<DirectedLink> out;
  for (LinkIndex l : links) {
    out.push_back({l, Direction::Forward});
    out.push_back({l, Direction::Reverse});
  }
  return out;
}

inline std::set<LinkIndex> saturated_links(const Network& net, Bandwidth rate) {
  std::set<LinkIndex> out;
  for (LinkIndex l = 0; l < net.links().size(); ++l) {
    const auto& link = net.link(l);
    if (link.residual_in(Direction::Forward) < rate ||
        link.residual_in(Direction::Reverse) < rate) {
      out.insert(l);
    }
  }
  return out;
}

}  // namespace detail

/// Builds the KMB tree for the task, orients it both ways and reserves the
/// demand rate on both directions of every tree link in one allocation.
/// If that allocation fails, links saturated in either direction are
/// excluded and the pipeline is retried once.
inline Schedule schedule_flexible(Network& net, const AITask& task,
                                  const SchedulerParams& params) {
  validate_task(task, net);
  const auto terminals = detail::resolve_terminals(net, task);
  const NodeIndex root = terminals.front();

  std::set<LinkIndex> excluded;
  for (int attempt = 0; attempt < 2; ++attempt) {
    const detail::FlexibleWeight weight{&task, &params, attempt == 0 ? nullptr : &excluded};
    SteinerTree tree;
    try {
      tree = kmb_steiner_tree(net, terminals, weight);
    } catch (const DisconnectedTerminals& e) {
      throw Blocked("task " + task.id + ": " + e.what());
    } catch (const DisconnectedClosure& e) {
      throw Blocked("task " + task.id + ": " + e.what());
    }
    const auto directed = detail::both_directions(tree.links);
    AllocationId id = 0;
    try {
      id = net.allocate(directed, task.demand_rate);
    } catch (const InsufficientCapacity&) {
      excluded = detail::saturated_links(net, task.demand_rate);
      continue;
    }
    Schedule s;
    s.task_id = task.id;
    s.policy = Policy::Flexible;
    s.broadcast = orient_broadcast(net, tree.links, root);
    s.upload = mark_aggregation_points(net, tree.links, task);
    s.rate = task.demand_rate;
    s.reservations.push_back({id, directed});
    return s;
  }
  throw Blocked("task " + task.id + ": no feasible tree");
}

/// Shortest path + first fit: each local gets its own route to the global
/// node, the first of k latency-ordered candidates with enough residual in
/// both directions. All-or-nothing across the task's locals.
inline Schedule schedule_fixed(Network& net, const AITask& task,
                               const SchedulerParams& params) {
  validate_task(task, net);
  if (params.k_candidates == 0) throw ValidationError("k_candidates must be positive");
  const NodeIndex root = net.index_of(task.global_node);

  Schedule s;
  s.task_id = task.id;
  s.policy = Policy::Fixed;
  s.rate = task.demand_rate;
  std::vector<Path> routes;

  auto rollback = [&] {
    for (auto it = s.reservations.rbegin(); it != s.reservations.rend(); ++it) {
      net.release(it->id);
    }
  };
  auto fits = [&](const Path& p) {
    for (const auto& dl : p.links) {
      if (net.residual(dl) < task.demand_rate ||
          net.residual(dl.reversed()) < task.demand_rate) {
        return false;
      }
    }
    return true;
  };

  for (const auto& local : task.local_nodes) {
    const NodeIndex dst = net.index_of(local);
    std::vector<Path> candidates;
    try {
      candidates = k_shortest_paths(net, root, dst, params.k_candidates,
                                    LatencyWeight{params.beta});
    } catch (const NoPath& e) {
      rollback();
      throw Blocked("task " + task.id + ": " + e.what());
    }
    auto chosen = std::find_if(candidates.begin(), candidates.end(), fits);
    if (chosen == candidates.end()) {
      rollback();
      throw Blocked("task " + task.id + ": no candidate path to " + local + " fits");
    }
    std::vector<DirectedLink> directed;
    for (const auto& dl : chosen->links) {
      directed.push_back(dl);
      directed.push_back(dl.reversed());
    }
    s.reservations.push_back({net.allocate(directed, task.demand_rate), directed});
    routes.push_back(*chosen);
  }

  std::map<DirectedLink, std::int64_t> crossings;
  for (const auto& p : routes) {
    for (const auto& dl : p.links) ++crossings[dl];
  }
  s.broadcast.root = root;
  s.upload.root = root;
  s.upload.aggregation_points = {root};
  for (const auto& [dl, count] : crossings) {
    s.broadcast.edges.push_back({dl, net.tail(dl), net.head(dl), count});
    s.upload.edges.push_back({dl.reversed(), net.head(dl), net.tail(dl), count});
  }
  detail::sort_edges(net, s.broadcast.edges);
  detail::sort_edges(net, s.upload.edges);
  for (const auto& p : routes) {
    s.broadcast.branches.push_back(p.links);
    std::vector<DirectedLink> back;
    for (auto it = p.links.rbegin(); it != p.links.rend(); ++it) back.push_back(it->reversed());
    s.upload.branches.push_back(std::move(back));
  }
  return s;
}

inline Schedule schedule(Network& net, const AITask& task, Policy policy,
                         const SchedulerParams& params) {
  return policy == Policy::Fixed ? schedule_fixed(net, task, params)
                                 : schedule_flexible(net, task, params);
}

/// Returns every allocation held by the schedule to the network.
inline void release_schedule(Network& net, const Schedule& s) {
  for (const auto& r : s.reservations) net.release(r.id);
}

inline LinkIndex resolve_link(const Network& net, std::string_view a, std::string_view b) {
  auto ia = net.find_node(a);
  auto ib = net.find_node(b);
  std::optional<LinkIndex> l;
  if (ia && ib) l = net.find_link(*ia, *ib);
  if (!l || !net.link(*l).up) {
    throw UnknownLink("no link " + std::string(a) + "-" + std::string(b));
  }
  return *l;
}

struct RescheduleOutcome {
  std::vector<std::string> rescheduled;
  std::vector<std::string> blocked;
};

/// Handles a link failure: releases every schedule crossing the link, takes
/// the link down and re-runs each affected task's policy in arrival order.
/// Blocked tasks are dropped from `live`; other schedules are untouched.
inline RescheduleOutcome reschedule(Network& net, std::vector<Schedule>& live,
                                    const std::map<std::string, AITask>& tasks,
                                    LinkIndex failed, const SchedulerParams& params) {
  if (failed >= net.links().size() || !net.link(failed).up) {
    throw UnknownLink("link index " + std::to_string(failed));
  }
  std::vector<Schedule> affected;
  std::vector<Schedule> kept;
  for (auto& s : live) {
    (s.uses_link(failed) ? affected : kept).push_back(std::move(s));
  }
  for (const auto& s : affected) release_schedule(net, s);
  net.fail_link(failed);

  auto task_of = [&](const Schedule& s) -> const AITask& {
    auto it = tasks.find(s.task_id);
    if (it == tasks.end()) throw ValidationError("unknown task \"" + s.task_id + "\"");
    return it->second;
  };
  std::sort(affected.begin(), affected.end(), [&](const Schedule& x, const Schedule& y) {
    const auto& tx = task_of(x);
    const auto& ty = task_of(y);
    return std::pair(tx.arrival, tx.id) < std::pair(ty.arrival, ty.id);
  });

  RescheduleOutcome out;
  for (const auto& s : affected) {
    try {
      kept.push_back(schedule(net, task_of(s), s.policy, params));
      out.rescheduled.push_back(s.task_id);
    } catch (const Blocked&) {
      out.blocked.push_back(s.task_id);
    }
  }
  live = std::move(kept);
  return out;
}

/// Structural check of a scheduled tree. Returns a description of the
/// first defect found, or nothing when the tree is valid: edges oriented
/// consistently with the procedure, connected, acyclic, spanning the
/// terminals and free of non-terminal leaves.
inline std::optional<std::string> tree_defect(const Network& net, const ScheduledTree& tree,
                                              std::span<const NodeIndex> terminals,
                                              bool toward_root) {
  std::set<NodeIndex> touched{tree.root};
  std::map<NodeIndex, int> parents;
  std::map<NodeIndex, int> degree;
  for (const auto& e : tree.edges) {
    if (net.tail(e.link) != e.from || net.head(e.link) != e.to) {
      return "edge endpoints disagree with its link";
    }
    if (e.multiplicity < 1) return "edge multiplicity below one";
    touched.insert(e.from);
    touched.insert(e.to);
    ++degree[e.from];
    ++degree[e.to];
    const NodeIndex child = toward_root ? e.from : e.to;
    if (child == tree.root) return "edge points the wrong way at the root";
    if (++parents[child] > 1) return "node " + net.node(child).id + " has two parents";
  }
  if (tree.edges.size() + 1 != touched.size()) return "edge count does not match a tree";
  // every node reaches the root by following parent edges
  std::map<NodeIndex, NodeIndex> up;
  for (const auto& e : tree.edges) {
    if (toward_root) {
      up[e.from] = e.to;
    } else {
      up[e.to] = e.from;
    }
  }
  for (NodeIndex v : touched) {
    NodeIndex cur = v;
    for (std::size_t steps = 0; cur != tree.root; ++steps) {
      auto it = up.find(cur);
      if (it == up.end() || steps > touched.size()) {
        return "node " + net.node(v).id + " is not connected to the root";
      }
      cur = it->second;
    }
  }
  std::set<NodeIndex> term(terminals.begin(), terminals.end());
  for (NodeIndex t : term) {
    if (!touched.contains(t) && !(terminals.size() == 1 && t == tree.root)) {
      return "terminal " + net.node(t).id + " not spanned";
    }
  }
  for (const auto& [v, d] : degree) {
    if (d == 1 && !term.contains(v)) return "non-terminal leaf " + net.node(v).id;
  }
  return std::nullopt;
}

}  // namespace flexsched
