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
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "flexsched/schedule.hpp"
#include "flexsched/topology.hpp"
#include "flexsched/units.hpp"
#include "flexsched/workload.hpp"

namespace flexsched {

namespace detail {

// True when no node has more than one parent under the given orientation.
inline bool single_parented(const ScheduledTree& tree, bool toward_root) {
  std::set<NodeIndex> children;
  for (const auto& e : tree.edges) {
    if (!children.insert(toward_root ? e.from : e.to).second) return false;
  }
  return true;
}

inline Duration hop_time(const Network& net, const TreeEdge& e, Duration tx) {
  return e.multiplicity * tx + net.link(e.link.link).latency;
}

// Store-and-forward along each recorded branch, for overlapping routes.
inline Duration slowest_branch(const Network& net, const ScheduledTree& tree, Duration tx) {
  std::map<DirectedLink, const TreeEdge*> by_link;
  for (const auto& e : tree.edges) by_link[e.link] = &e;
  Duration worst;
  for (const auto& branch : tree.branches) {
    Duration t;
    for (const auto& dl : branch) t += hop_time(net, *by_link.at(dl), tx);
    worst = std::max(worst, t);
  }
  return worst;
}

}  // namespace detail

/// Time until the last local model holds the broadcast weights, with
/// store-and-forward at every node: each edge costs
/// multiplicity * model_size / demand_rate + propagation latency.
inline Duration broadcast_latency(const Network& net, const ScheduledTree& tree,
                                  const AITask& task) {
  const Duration tx = transmission_time(task.model_size, task.demand_rate);
  if (!detail::single_parented(tree, false)) return detail::slowest_branch(net, tree, tx);

  std::map<NodeIndex, std::vector<const TreeEdge*>> out;
  for (const auto& e : tree.edges) out[e.from].push_back(&e);
  std::map<NodeIndex, Duration> arrival{{tree.root, Duration::zero()}};
  std::vector<NodeIndex> stack{tree.root};
  while (!stack.empty()) {
    const NodeIndex u = stack.back();
    stack.pop_back();
    for (const TreeEdge* e : out[u]) {
      arrival[e->to] = arrival[u] + detail::hop_time(net, *e, tx);
      stack.push_back(e->to);
    }
  }
  Duration worst;
  for (const auto& id : task.local_nodes) {
    auto it = arrival.find(net.index_of(id));
    if (it != arrival.end()) worst = std::max(worst, it->second);
  }
  return worst;
}

/// Time until the global model holds the fully aggregated update. A node is
/// ready once every child payload has arrived, plus its aggregation time if
/// it is an aggregation point.
inline Duration upload_latency(const Network& net, const ScheduledTree& tree,
                               const AITask& task) {
  const Duration tx = transmission_time(task.model_size, task.demand_rate);
  if (!detail::single_parented(tree, true)) {
    return detail::slowest_branch(net, tree, tx) + net.node(tree.root).agg_time;
  }
  std::map<NodeIndex, std::vector<const TreeEdge*>> in;
  for (const auto& e : tree.edges) in[e.to].push_back(&e);
  auto ready = [&](auto&& self, NodeIndex v) -> Duration {
    Duration t;
    for (const TreeEdge* e : in[v]) {
      t = std::max(t, self(self, e->from) + detail::hop_time(net, *e, tx));
    }
    if (tree.aggregates_at(v)) t += net.node(v).agg_time;
    return t;
  };
  return ready(ready, tree.root);
}

inline Duration round_latency(const Network& net, const Schedule& s, const AITask& task) {
  return broadcast_latency(net, s.broadcast, task) + task.local_train +
         upload_latency(net, s.upload, task);
}

/// Reserved bandwidth summed over every directed link allocation of the
/// schedule. Payload multiplicity does not change the reservation.
inline Bandwidth consumed_bandwidth(const Schedule& s) {
  Bandwidth total;
  for (const auto& r : s.reservations) {
    total += static_cast<std::int64_t>(r.links.size()) * s.rate;
  }
  return total;
}

/// Outcome of one task. Latency and bandwidth are absent for blocked tasks.
struct TaskRecord {
  std::string task_id;
  Policy scheduler = Policy::Flexible;
  std::size_t n_locals = 0;
  std::int64_t rounds = 0;
  bool blocked = false;
  std::optional<Duration> round_latency;
  std::optional<Duration> total_latency;
  std::optional<Bandwidth> consumed_bw;
  std::size_t tree_edges = 0;

  bool operator==(const TaskRecord&) const = default;
};

struct LinkFailure {
  Duration time;
  std::string a;
  std::string b;
};

struct SimReport {
  Policy scheduler = Policy::Flexible;
  std::vector<TaskRecord> records;
  std::size_t blocked = 0;
  std::optional<Duration> mean_total_latency;
  Bandwidth total_bandwidth;

  bool operator==(const SimReport&) const = default;
};

namespace detail {

enum class EventKind : std::uint8_t { Arrival = 0, Departure = 1, LinkFailure = 2 };

struct EventKey {
  Duration time;
  EventKind kind;
  std::string subject;  // task id, or failure sequence number
  std::size_t index;

  auto operator<=>(const EventKey&) const = default;
};

inline void fill_record(TaskRecord& r, const Network& net, const Schedule& s,
                        const AITask& task) {
  r.blocked = false;
  r.round_latency = round_latency(net, s, task);
  r.total_latency = task.rounds * *r.round_latency;
  r.consumed_bw = consumed_bandwidth(s);
  r.tree_edges = s.broadcast.edges.size();
}

inline void mark_blocked(TaskRecord& r) {
  r.blocked = true;
  r.round_latency.reset();
  r.total_latency.reset();
  r.consumed_bw.reset();
  r.tree_edges = 0;
}

}  // namespace detail

/// Discrete-event run of one policy over a workload. Events at equal times
/// are ordered arrival, departure, link failure, then by task id. A task
/// holds its reservations for rounds x round latency; blocked tasks are
/// recorded and skipped. A link failure re-routes the tasks crossing it and
/// leaves their departure times unchanged.
inline SimReport run_simulation(Network& net, const Workload& workload, Policy policy,
                                const SchedulerParams& params,
                                const std::vector<LinkFailure>& failures = {}) {
  validate_workload(workload, net);
  std::vector<LinkIndex> failed_links;
  for (const auto& f : failures) failed_links.push_back(resolve_link(net, f.a, f.b));

  std::map<std::string, AITask> tasks;
  std::map<std::string, std::size_t> record_of;
  SimReport report;
  report.scheduler = policy;
  for (const auto& t : workload.tasks) {
    tasks.emplace(t.id, t);
    record_of.emplace(t.id, report.records.size());
    TaskRecord r;
    r.task_id = t.id;
    r.scheduler = policy;
    r.n_locals = t.local_nodes.size();
    r.rounds = t.rounds;
    report.records.push_back(std::move(r));
  }

  std::set<detail::EventKey> queue;
  for (std::size_t i = 0; i < workload.tasks.size(); ++i) {
    const auto& t = workload.tasks[i];
    queue.insert({t.arrival, detail::EventKind::Arrival, t.id, i});
  }
  for (std::size_t i = 0; i < failures.size(); ++i) {
    char seq[24];
    std::snprintf(seq, sizeof seq, "%020zu", i);
    queue.insert({failures[i].time, detail::EventKind::LinkFailure, seq, i});
  }

  std::vector<Schedule> live;
  auto live_index = [&](const std::string& id) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < live.size(); ++i) {
      if (live[i].task_id == id) return i;
    }
    return std::nullopt;
  };

  while (!queue.empty()) {
    const detail::EventKey ev = queue.extract(queue.begin()).value();
    switch (ev.kind) {
      case detail::EventKind::Arrival: {
        const AITask& task = tasks.at(ev.subject);
        TaskRecord& rec = report.records[record_of.at(ev.subject)];
        try {
          Schedule s = schedule(net, task, policy, params);
          detail::fill_record(rec, net, s, task);
          live.push_back(std::move(s));
          queue.insert({ev.time + *rec.total_latency, detail::EventKind::Departure,
                        ev.subject, ev.index});
        } catch (const Blocked&) {
          detail::mark_blocked(rec);
        }
        break;
      }
      case detail::EventKind::Departure: {
        if (auto i = live_index(ev.subject)) {
          release_schedule(net, live[*i]);
          live.erase(live.begin() + static_cast<std::ptrdiff_t>(*i));
        }
        break;
      }
      case detail::EventKind::LinkFailure: {
        const auto outcome = reschedule(net, live, tasks, failed_links[ev.index], params);
        for (const auto& id : outcome.rescheduled) {
          const auto i = live_index(id);
          detail::fill_record(report.records[record_of.at(id)], net, live[*i], tasks.at(id));
        }
        for (const auto& id : outcome.blocked) {
          detail::mark_blocked(report.records[record_of.at(id)]);
        }
        break;
      }
    }
  }

  Duration latency_sum;
  std::int64_t admitted = 0;
  for (const auto& r : report.records) {
    if (r.blocked) {
      ++report.blocked;
      continue;
    }
    latency_sum += *r.total_latency;
    report.total_bandwidth += *r.consumed_bw;
    ++admitted;
  }
  if (admitted > 0) report.mean_total_latency = rounded_mean(latency_sum, admitted);
  return report;
}

}  // namespace flexsched
