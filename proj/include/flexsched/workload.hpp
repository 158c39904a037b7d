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
#include <optional>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "flexsched/detail/document.hpp"
#include "flexsched/error.hpp"
#include "flexsched/topology.hpp"
#include "flexsched/units.hpp"

namespace flexsched {

/// One distributed training job: a global model at `global_node` exchanging
/// weights with every local model for `rounds` iterations.
struct AITask {
  std::string id;
  std::string global_node;
  std::vector<std::string> local_nodes;
  Payload model_size;
  Bandwidth demand_rate;
  std::int64_t rounds = 1;
  Duration local_train;
  Duration arrival;

  bool operator==(const AITask&) const = default;
};

struct GeneratorConfig {
  std::size_t n_tasks = 30;
  std::size_t n_locals = 3;
  double model_size_gbit = 0.1;
  double demand_rate_gbps = 1.0;
  std::int64_t rounds = 10;
  double local_train_ms = 1.0;
  double arrival_max_ms = 1000.0;

  bool operator==(const GeneratorConfig&) const = default;
};

struct Workload {
  std::vector<AITask> tasks;
  std::optional<std::uint64_t> seed;
  std::optional<GeneratorConfig> config;

  bool operator==(const Workload&) const = default;
};

/// Checks the task against its own invariants and against `net`.
inline void validate_task(const AITask& t, const Network& net) {
  const std::string where = "task \"" + t.id + "\"";
  if (t.local_nodes.empty()) throw ValidationError(where + ": no local nodes");
  auto check_node = [&](const std::string& id) {
    auto idx = net.find_node(id);
    if (!idx) throw ValidationError(where + ": unknown node \"" + id + "\"");
    if (!net.node(*idx).can_compute) {
      throw ValidationError(where + ": node \"" + id + "\" cannot compute");
    }
  };
  check_node(t.global_node);
  std::set<std::string> seen;
  for (const auto& l : t.local_nodes) {
    if (l == t.global_node) {
      throw ValidationError(where + ": local node \"" + l + "\" is the global node");
    }
    if (!seen.insert(l).second) {
      throw ValidationError(where + ": duplicate local node \"" + l + "\"");
    }
    check_node(l);
  }
  if (t.model_size <= Payload::zero()) throw ValidationError(where + ": model_size_gbit must be positive");
  if (t.demand_rate <= Bandwidth::zero()) throw ValidationError(where + ": demand_rate_gbps must be positive");
  if (t.rounds <= 0) throw ValidationError(where + ": rounds must be positive");
  if (t.local_train < Duration::zero()) throw ValidationError(where + ": local_train_ms must be non-negative");
  if (t.arrival < Duration::zero()) throw ValidationError(where + ": arrival_ms must be non-negative");
}

inline void validate_workload(const Workload& w, const Network& net) {
  std::set<std::string> ids;
  for (std::size_t i = 0; i < w.tasks.size(); ++i) {
    const auto& t = w.tasks[i];
    if (!ids.insert(t.id).second) {
      throw ValidationError("duplicate task id \"" + t.id + "\"");
    }
    if (i > 0 && t.arrival < w.tasks[i - 1].arrival) {
      throw ValidationError("task \"" + t.id + "\" arrives out of order");
    }
    validate_task(t, net);
  }
}

namespace detail {

// Unbiased draw from [0, bound). std::uniform_int_distribution is not
// specified bit-for-bit across standard libraries, so sampling is done here.
inline std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t limit = std::mt19937_64::max() - std::mt19937_64::max() % bound;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % bound;
}

inline std::string task_id(std::size_t n_locals, std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "L%02zu-t%03zu", n_locals, index);
  return buf;
}

}  // namespace detail

/// Draws `config.n_tasks` tasks. Each task's global and local nodes are
/// sampled without replacement from the compute-capable nodes; arrivals are
/// uniform on [0, arrival_max_ms] at nanosecond resolution.
inline Workload generate_workload(const Network& net, const GeneratorConfig& config,
                                  std::uint64_t seed) {
  if (config.n_tasks < 1) throw InfeasibleConfig("n_tasks must be at least 1");
  if (config.n_locals < 1) throw InfeasibleConfig("n_locals must be at least 1");
  std::vector<NodeIndex> pool;
  for (NodeIndex i = 0; i < net.nodes().size(); ++i) {
    if (net.node(i).can_compute) pool.push_back(i);
  }
  if (config.n_locals + 1 > pool.size()) {
    throw InfeasibleConfig("n_locals=" + std::to_string(config.n_locals) +
                           " needs " + std::to_string(config.n_locals + 1) +
                           " compute nodes, topology has " + std::to_string(pool.size()));
  }
  if (config.arrival_max_ms < 0) throw InfeasibleConfig("arrival_max_ms must be non-negative");

  Workload w;
  w.seed = seed;
  w.config = config;
  std::mt19937_64 rng(seed);
  const auto arrival_span = static_cast<std::uint64_t>(ms(config.arrival_max_ms).raw());

  for (std::size_t t = 0; t < config.n_tasks; ++t) {
    std::vector<NodeIndex> draw = pool;
    for (std::size_t i = 0; i <= config.n_locals; ++i) {
      const auto j = i + detail::uniform_below(rng, draw.size() - i);
      std::swap(draw[i], draw[j]);
    }
    AITask task;
    task.id = detail::task_id(config.n_locals, t);
    task.global_node = net.node(draw[0]).id;
    for (std::size_t i = 1; i <= config.n_locals; ++i) {
      task.local_nodes.push_back(net.node(draw[i]).id);
    }
    task.model_size = gbit(config.model_size_gbit);
    task.demand_rate = gbps(config.demand_rate_gbps);
    task.rounds = config.rounds;
    task.local_train = ms(config.local_train_ms);
    task.arrival = Duration(static_cast<std::int64_t>(
        detail::uniform_below(rng, arrival_span + 1)));
    w.tasks.push_back(std::move(task));
  }
  std::stable_sort(w.tasks.begin(), w.tasks.end(), [](const AITask& a, const AITask& b) {
    return a.arrival < b.arrival;
  });
  return w;
}

namespace detail {

inline json config_to_json(const GeneratorConfig& c) {
  return {{"n_tasks", c.n_tasks},
          {"n_locals", c.n_locals},
          {"model_size_gbit", c.model_size_gbit},
          {"demand_rate_gbps", c.demand_rate_gbps},
          {"rounds", c.rounds},
          {"local_train_ms", c.local_train_ms},
          {"arrival_max_ms", c.arrival_max_ms}};
}

inline GeneratorConfig config_from_json(const json& j, const std::string& path) {
  ObjectReader r(j, path);
  r.allow_only({"n_tasks", "n_locals", "model_size_gbit", "demand_rate_gbps", "rounds",
                "local_train_ms", "arrival_max_ms"});
  GeneratorConfig c;
  c.n_tasks = static_cast<std::size_t>(r.integer("n_tasks"));
  c.n_locals = static_cast<std::size_t>(r.integer("n_locals"));
  c.model_size_gbit = r.number("model_size_gbit");
  c.demand_rate_gbps = r.number("demand_rate_gbps");
  c.rounds = r.integer("rounds");
  c.local_train_ms = r.number("local_train_ms");
  c.arrival_max_ms = r.number("arrival_max_ms");
  return c;
}

}  // namespace detail

inline std::string dump_workload(const Workload& w) {
  using detail::json;
  json tasks = json::array();
  for (const auto& t : w.tasks) {
    tasks.push_back({{"id", t.id},
                     {"global", t.global_node},
                     {"locals", t.local_nodes},
                     {"model_size_gbit", to_gbit(t.model_size)},
                     {"demand_rate_gbps", to_gbps(t.demand_rate)},
                     {"rounds", t.rounds},
                     {"local_train_ms", to_ms(t.local_train)},
                     {"arrival_ms", to_ms(t.arrival)}});
  }
  json doc = json::object();
  if (w.seed) doc["seed"] = *w.seed;
  if (w.config) doc["config"] = detail::config_to_json(*w.config);
  doc["tasks"] = std::move(tasks);
  return doc.dump(2) + "\n";
}

/// Parses a workload document. Structural invariants are checked here;
/// node references are checked by validate_workload against a network.
inline Workload load_workload(std::string_view text) {
  using detail::ObjectReader;
  const auto doc = detail::parse_document(text, "workload");
  ObjectReader top(doc, "workload");
  top.allow_only({"tasks", "seed", "config"});

  Workload w;
  if (top.has("seed")) {
    const auto& s = top.at("seed");
    if (!s.is_number_unsigned()) throw ParseError("workload.seed: expected a non-negative integer");
    w.seed = s.get<std::uint64_t>();
  }
  if (top.has("config")) w.config = detail::config_from_json(top.at("config"), "workload.config");

  const auto& tasks = top.array("tasks");
  if (tasks.empty()) throw ValidationError("workload: empty task list");
  std::set<std::string> ids;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    ObjectReader r(tasks[i], "tasks[" + std::to_string(i) + "]");
    r.allow_only({"id", "global", "locals", "model_size_gbit", "demand_rate_gbps", "rounds",
                  "local_train_ms", "arrival_ms"});
    AITask t;
    t.id = r.string("id");
    t.global_node = r.string("global");
    const auto& locals = r.array("locals");
    for (std::size_t j = 0; j < locals.size(); ++j) {
      if (!locals[j].is_string()) {
        throw ParseError(r.field("locals") + "[" + std::to_string(j) + "]: expected a string");
      }
      t.local_nodes.push_back(locals[j].get<std::string>());
    }
    t.model_size = gbit(r.number("model_size_gbit"));
    t.demand_rate = gbps(r.number("demand_rate_gbps"));
    t.rounds = r.integer("rounds");
    t.local_train = ms(r.number("local_train_ms"));
    t.arrival = ms(r.number("arrival_ms"));

    const std::string where = r.path() + " (\"" + t.id + "\")";
    if (!ids.insert(t.id).second) throw ValidationError(where + ": duplicate task id");
    if (t.local_nodes.empty()) throw ValidationError(where + ": no local nodes");
    std::set<std::string> seen;
    for (const auto& l : t.local_nodes) {
      if (!seen.insert(l).second) {
        throw ValidationError(where + ": duplicate local node \"" + l + "\"");
      }
      if (l == t.global_node) {
        throw ValidationError(where + ": local node \"" + l + "\" is the global node");
      }
    }
    if (t.model_size <= Payload::zero()) throw ValidationError(where + ": model_size_gbit must be positive");
    if (t.demand_rate <= Bandwidth::zero()) throw ValidationError(where + ": demand_rate_gbps must be positive");
    if (t.rounds <= 0) throw ValidationError(where + ": rounds must be positive");
    if (t.local_train < Duration::zero()) throw ValidationError(where + ": local_train_ms must be non-negative");
    if (t.arrival < Duration::zero()) throw ValidationError(where + ": arrival_ms must be non-negative");
    w.tasks.push_back(std::move(t));
  }
  std::stable_sort(w.tasks.begin(), w.tasks.end(), [](const AITask& a, const AITask& b) {
    return a.arrival < b.arrival;
  });
  return w;
}

}  // namespace flexsched
