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

// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "flexsched.hpp"
#include "oracles.hpp"

namespace {

using namespace flexsched;
namespace fs = std::filesystem;

struct Verdict {
  bool pass;
  std::string detail;
};

const std::string kRing = std::string(FLEXSCHED_DATA_DIR) + "/ring10.topo";

RunConfig sweep_config(const fs::path& out, unsigned threads) {
  RunConfig c;
  c.topology_path = kRing;
  c.generate = GenerateSpec{30, {3, 5, 7, 9}, {}};
  c.seed = 42;
  c.out_dir = out.string();
  c.threads = threads;
  return c;
}

const SweepCell& cell(const SweepReport& s, Policy p, std::size_t n) {
  for (const auto& c : s.cells) {
    if (c.scheduler == p && c.n_locals == n) return c;
  }
  throw std::logic_error("missing sweep cell");
}

Verdict latency_direction(const SweepReport& sweep) {
  std::size_t strict = 0;
  bool ok = true;
  std::string detail;
  for (std::size_t n : {3u, 5u, 7u, 9u}) {
    const auto& f = cell(sweep, Policy::Fixed, n);
    const auto& x = cell(sweep, Policy::Flexible, n);
    if (!f.mean_total_latency || !x.mean_total_latency) return {false, "a cell has no admitted task"};
    ok = ok && *x.mean_total_latency <= *f.mean_total_latency;
    strict += *x.mean_total_latency < *f.mean_total_latency;
    detail += " n=" + std::to_string(n) + " " + format_ms(*f.mean_total_latency) + "/" +
              format_ms(*x.mean_total_latency);
  }
  return {ok && strict * 2 >= 4, "fixed/flexible mean total ms:" + detail};
}

Verdict bandwidth_direction(const SweepReport& sweep) {
  bool ok = true;
  std::string detail;
  for (std::size_t n : {3u, 5u, 7u, 9u}) {
    const auto& f = cell(sweep, Policy::Fixed, n);
    const auto& x = cell(sweep, Policy::Flexible, n);
    ok = ok && x.total_bandwidth < f.total_bandwidth;
    detail += " n=" + std::to_string(n) + " " + format_gbps(f.total_bandwidth) + "/" +
              format_gbps(x.total_bandwidth) + " (admitted " + std::to_string(f.tasks - f.blocked) + "/" +
              std::to_string(x.tasks - x.blocked) + ")";
  }
  // 16-leaf star, fixed scheduler, one task per N.
  std::vector<std::string> ids{"G"};
  std::vector<std::tuple<std::string, std::string, double, double>> links;
  for (int i = 1; i <= 16; ++i) {
    ids.push_back("L" + std::to_string(i));
    links.emplace_back("G", ids.back(), 10, 0.05);
  }
  const Network star = oracle::make_network(ids, links);
  bool linear = true;
  for (std::size_t n = 1; n <= 16; ++n) {
    AITask t = oracle::default_task("G", std::vector<std::string>(ids.begin() + 1, ids.begin() + 1 + static_cast<std::ptrdiff_t>(n)));
    Network net = star;
    const auto r = run_simulation(net, {{t}, {}, {}}, Policy::Fixed, {});
    linear = linear && r.total_bandwidth == static_cast<std::int64_t>(2 * n) * t.demand_rate;
  }
  return {ok && linear, "fixed/flexible total Gbps:" + detail + "; star 2*N*rate " + (linear ? "exact" : "violated")};
}

std::vector<NodeIndex> pick_terminals(std::mt19937_64& rng, std::size_t n) {
  std::vector<NodeIndex> all(n);
  for (std::size_t i = 0; i < n; ++i) all[i] = i;
  std::shuffle(all.begin(), all.end(), rng);
  all.resize(2 + rng() % std::min<std::size_t>(3, n - 1));
  return all;
}

Verdict steiner_quality() {
  std::mt19937_64 rng(2024);
  std::size_t violations = 0;
  const std::size_t instances = 600;
  for (std::size_t i = 0; i < instances; ++i) {
    const std::size_t n = 3 + rng() % 5;
    auto [net, w] = oracle::random_graph(rng, n, 0.45, 20);
    const auto terms = pick_terminals(rng, n);
    const auto aux = build_metric_closure(net, terms, w);
    const auto tree = expand_and_prune(net, aux, minimum_spanning_tree(net, aux), w);
    const Cost opt = oracle::optimal_steiner_cost(net, terms, w);
    if (tree.cost.raw() > 2 * opt.raw()) ++violations;
  }
  return {violations == 0, std::to_string(instances) + " instances, " + std::to_string(violations) + " violations"};
}

Verdict path_oracle() {
  std::mt19937_64 rng(4048);
  std::size_t mismatches = 0;
  const std::size_t instances = 1200;
  for (std::size_t i = 0; i < instances; ++i) {
    const std::size_t n = 2 + rng() % 6;
    auto [net, w] = oracle::random_graph(rng, n, 0.4, 3);
    const NodeIndex src = rng() % n;
    const NodeIndex dst = rng() % n;
    const auto expected = oracle::all_simple_paths(net, src, dst, w);
    const bool sp_ok = shortest_path(net, src, dst, w) == expected.front();
    const std::size_t k = 1 + rng() % (expected.size() + 1);
    const auto got = k_shortest_paths(net, src, dst, k, w);
    const std::vector<Path> want(expected.begin(), expected.begin() + static_cast<std::ptrdiff_t>(std::min(k, expected.size())));
    if (!sp_ok || got != want) ++mismatches;
  }
  return {mismatches == 0, std::to_string(instances) + " instances, " + std::to_string(mismatches) + " mismatches"};
}

Verdict latency_oracle() {
  std::mt19937_64 rng(8096);
  std::size_t mismatches = 0;
  const std::size_t trees = 600;
  for (std::size_t i = 0; i < trees; ++i) {
    const std::size_t n = 2 + rng() % 9;
    Network net;
    for (std::size_t v = 0; v < n; ++v) {
      net.add_node(oracle::compute_node("v" + std::to_string(v), rng() % 2 == 0, static_cast<double>(rng() % 50) / 100));
    }
    std::vector<int> degree(n, 0);
    for (std::size_t v = 1; v < n; ++v) {
      const std::size_t p = rng() % v;
      net.add_link("v" + std::to_string(p), "v" + std::to_string(v), gbps(10), ms(static_cast<double>(1 + rng() % 300) / 1000));
      ++degree[p];
      ++degree[v];
    }
    const NodeIndex root = rng() % n;
    AITask task = oracle::default_task(net.node(root).id, {});
    task.model_size = gbit(static_cast<double>(1 + rng() % 500) / 1000);
    task.demand_rate = gbps(static_cast<double>(1 + rng() % 20) / 10);
    for (std::size_t v = 0; v < n; ++v) {
      if (v != root && (degree[v] == 1 || rng() % 3 == 0)) task.local_nodes.push_back(net.node(v).id);
    }
    std::vector<LinkIndex> links(net.links().size());
    for (LinkIndex l = 0; l < links.size(); ++l) links[l] = l;
    const auto down = orient_broadcast(net, links, root);
    const auto up = mark_aggregation_points(net, links, task);
    if (broadcast_latency(net, down, task) != oracle::replay_broadcast(net, down, task) ||
        upload_latency(net, up, task) != oracle::replay_upload(net, up, task)) {
      ++mismatches;
    }
  }
  return {mismatches == 0, std::to_string(trees) + " trees, " + std::to_string(mismatches) + " mismatches"};
}

// Residuals in both directions plus outstanding allocation ids.
std::vector<std::int64_t> ledger_state(const Network& net) {
  std::vector<std::int64_t> out;
  for (const auto& l : net.links()) {
    out.push_back(l.residual[0].raw());
    out.push_back(l.residual[1].raw());
  }
  for (const auto& [id, a] : net.allocations()) out.push_back(static_cast<std::int64_t>(id));
  return out;
}

// Random interleaving of raw allocations, releases, schedules (some
// blocked) and departures; the ledger is replayed after every event.
Verdict conservation_fuzz() {
  Network net = oracle::ring10();
  std::mt19937_64 rng(16192);
  std::vector<AllocationId> raw;
  std::vector<Schedule> live;
  std::size_t violations = 0, blocked = 0, admitted = 0;
  const std::size_t events = 10000;
  for (std::size_t e = 0; e < events; ++e) {
    const auto before = ledger_state(net);
    switch (rng() % 4) {
      case 0: {
        std::vector<DirectedLink> dls;
        for (std::size_t i = 0, m = 1 + rng() % 3; i < m; ++i) {
          dls.push_back({static_cast<LinkIndex>(rng() % net.links().size()), rng() % 2 ? Direction::Forward : Direction::Reverse});
        }
        try {
          raw.push_back(net.allocate(dls, gbps(static_cast<double>(1 + rng() % 40) / 10)));
        } catch (const InsufficientCapacity&) {
          if (ledger_state(net) != before) ++violations;
        }
        break;
      }
      case 1:
        if (!raw.empty()) {
          const std::size_t i = rng() % raw.size();
          net.release(raw[i]);
          raw.erase(raw.begin() + static_cast<std::ptrdiff_t>(i));
        }
        break;
      case 2: {
        GeneratorConfig g;
        g.n_tasks = 1;
        g.n_locals = 1 + rng() % 9;
        g.demand_rate_gbps = static_cast<double>(1 + rng() % 40) / 10;
        AITask t = generate_workload(net, g, rng()).tasks.front();
        t.id = "t" + std::to_string(e);
        try {
          live.push_back(schedule(net, t, rng() % 2 ? Policy::Fixed : Policy::Flexible, {}));
          ++admitted;
        } catch (const Blocked&) {
          ++blocked;
          if (ledger_state(net) != before) ++violations;
        }
        break;
      }
      case 3:
        if (!live.empty()) {
          const std::size_t i = rng() % live.size();
          release_schedule(net, live[i]);
          live.erase(live.begin() + static_cast<std::ptrdiff_t>(i));
        }
        break;
    }
    if (!oracle::ledger_consistent(net)) ++violations;
  }
  for (auto id : raw) net.release(id);
  for (const auto& s : live) release_schedule(net, s);
  if (!oracle::at_capacity(net) || !net.allocations().empty()) ++violations;

  // End-of-simulation residuals, both policies.
  const Network ring = oracle::ring10();
  for (std::size_t n : {3u, 9u}) {
    for (Policy p : {Policy::Fixed, Policy::Flexible}) {
      Network copy = ring;
      run_simulation(copy, generate_workload(ring, {.n_tasks = 30, .n_locals = n}, n), p, {});
      if (!oracle::at_capacity(copy)) ++violations;
    }
  }
  return {violations == 0, std::to_string(events) + " events (" + std::to_string(admitted) + " admitted, " +
                               std::to_string(blocked) + " blocked), " + std::to_string(violations) + " violations"};
}

Verdict relay_scenario() {
  const Network base = oracle::make_network({"G", "L1", "L2", "L3"}, {{"G", "L1", 10, 0.05},
                                                                      {"G", "L2", 10, 0.05},
                                                                      {"L2", "L3", 10, 0.05},
                                                                      {"G", "L3", 1, 0.05}});
  const AITask task = oracle::default_task("G", {"L1", "L2", "L3"});
  auto routes = [&](const Schedule& s, const Network& net) {
    std::set<std::string> out;
    for (const auto& e : s.broadcast.edges) out.insert(net.node(e.from).id + "->" + net.node(e.to).id);
    return out;
  };
  Network a = base, b = base;
  const auto flex = routes(schedule_flexible(a, task, {}), a);
  const auto fixed = routes(schedule_fixed(b, task, {}), b);
  const bool ok = flex == std::set<std::string>{"G->L1", "G->L2", "L2->L3"} &&
                  fixed == std::set<std::string>{"G->L1", "G->L2", "G->L3"};
  auto join = [](const std::set<std::string>& s) {
    std::string out;
    for (const auto& x : s) out += (out.empty() ? "" : " ") + x;
    return out;
  };
  return {ok, "flexible {" + join(flex) + "}, fixed {" + join(fixed) + "}"};
}

Verdict determinism() {
  const fs::path root = fs::temp_directory_path() / "flexsched_acceptance";
  fs::remove_all(root);
  std::ostringstream sink;
  for (auto [dir, threads] : {std::pair{"a", 1u}, {"b", 1u}, {"c", 4u}}) {
    if (run(sweep_config(root / dir, threads), sink, sink) != kExitOk) return {false, sink.str()};
  }
  std::size_t compared = 0;
  for (const auto& entry : fs::directory_iterator(root / "a")) {
    const auto name = entry.path().filename();
    const auto a = oracle::read_text((root / "a" / name).string());
    if (a != oracle::read_text((root / "b" / name).string()) || a != oracle::read_text((root / "c" / name).string())) {
      return {false, name.string() + " differs"};
    }
    ++compared;
  }
  return {compared == 6, std::to_string(compared) + " files identical across 2 runs and 1/4 threads"};
}

}  // namespace

int main() {
  const RunConfig config = sweep_config(fs::temp_directory_path() / "flexsched_acceptance_sweep", 4);
  const SweepReport sweep = execute(config, prepare(config)).sweep;

  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"latency direction (ring10 sweep)", [&] { return latency_direction(sweep); }},
      {"bandwidth direction and star linearity", [&] { return bandwidth_direction(sweep); }},
      {"Steiner tree within twice the optimum", steiner_quality},
      {"path search matches enumeration", path_oracle},
      {"latency matches event replay", latency_oracle},
      {"capacity conservation fuzz", conservation_fuzz},
      {"relay scenario", relay_scenario},
      {"deterministic outputs", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    failed += !v.pass;
    std::printf("[%s] %zu %s: %s\n", v.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), v.detail.c_str());
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
