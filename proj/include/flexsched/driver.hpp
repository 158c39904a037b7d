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

// Experiment driver: loads inputs, runs every (scheduler, sweep point)
// scenario on its own network copy and writes the result files.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "flexsched/detail/document.hpp"
#include "flexsched/error.hpp"
#include "flexsched/report.hpp"
#include "flexsched/schedule.hpp"
#include "flexsched/simulate.hpp"
#include "flexsched/topology.hpp"
#include "flexsched/workload.hpp"

namespace flexsched {

/// Failure to read or write a file. Maps to exit code 2.
class IoError : public Error {
 public:
  using Error::Error;
};

enum ExitCode : int { kExitOk = 0, kExitInvalid = 1, kExitIo = 2 };

struct GenerateSpec {
  std::size_t n_tasks = 30;
  /// n_locals values, one workload per value.
  std::vector<std::size_t> sweep;
  GeneratorConfig defaults;

  bool operator==(const GenerateSpec&) const = default;
};

struct RunConfig {
  std::string topology_path;
  std::optional<std::string> workload_path;
  std::optional<GenerateSpec> generate;
  std::vector<Policy> schedulers{Policy::Fixed, Policy::Flexible};
  SchedulerParams params;
  std::optional<std::uint64_t> seed;
  std::string out_dir = "out";
  unsigned threads = 1;
};

namespace detail {

inline std::vector<std::size_t> parse_count_list(std::string_view text, const std::string& key) {
  std::vector<std::size_t> out;
  for (const auto& item : split(text, ',')) {
    out.push_back(static_cast<std::size_t>(parse_int(item, "--generate " + key)));
  }
  return out;
}

inline double parse_real(const std::string& s, const std::string& key) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty()) {
    throw ParseError("--generate " + key + ": not a number \"" + s + "\"");
  }
  return v;
}

}  // namespace detail

/// Parses `key=value` generator settings: n_tasks, n_locals, sweep
/// (comma list), model_size_gbit, demand_rate_gbps, rounds, local_train_ms,
/// arrival_max_ms.
inline GenerateSpec parse_generate(const std::vector<std::string>& items) {
  GenerateSpec g;
  for (const auto& item : items) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) {
      throw ParseError("--generate: expected key=value, got \"" + item + "\"");
    }
    const std::string key = item.substr(0, eq);
    const std::string value = item.substr(eq + 1);
    if (key == "n_tasks") {
      g.n_tasks = static_cast<std::size_t>(detail::parse_int(value, "--generate n_tasks"));
    } else if (key == "n_locals" || key == "sweep") {
      g.sweep = detail::parse_count_list(value, key);
    } else if (key == "model_size_gbit") {
      g.defaults.model_size_gbit = detail::parse_real(value, key);
    } else if (key == "demand_rate_gbps") {
      g.defaults.demand_rate_gbps = detail::parse_real(value, key);
    } else if (key == "rounds") {
      g.defaults.rounds = detail::parse_int(value, "--generate rounds");
    } else if (key == "local_train_ms") {
      g.defaults.local_train_ms = detail::parse_real(value, key);
    } else if (key == "arrival_max_ms") {
      g.defaults.arrival_max_ms = detail::parse_real(value, key);
    } else {
      throw ParseError("--generate: unknown key \"" + key + "\"");
    }
  }
  return g;
}

/// Checks the structural invariants of a configuration.
inline void check_config(const RunConfig& c) {
  if (c.topology_path.empty()) throw ValidationError("a topology is required");
  if (c.workload_path.has_value() == c.generate.has_value()) {
    throw ValidationError("exactly one of --workload and --generate is required");
  }
  if (c.schedulers.empty()) throw ValidationError("at least one scheduler is required");
  if (c.params.k_candidates == 0) throw ValidationError("--k must be positive");
  if (c.params.alpha < 0 || c.params.beta < 0) {
    throw ValidationError("--alpha and --beta must be non-negative");
  }
  if (c.generate) {
    if (!c.seed) throw ValidationError("--seed is required when generating");
    if (c.generate->n_tasks < 1) throw ValidationError("n_tasks must be at least 1");
    const auto& s = c.generate->sweep;
    if (s.empty()) throw ValidationError("sweep (or n_locals) must be nonempty");
    for (std::size_t i = 1; i < s.size(); ++i) {
      if (s[i] <= s[i - 1]) throw ValidationError("sweep must be strictly increasing");
    }
  }
}

/// Canonical form of the settings that determine the results.
inline std::string canonical_config(const RunConfig& c, const std::string& topology_name) {
  detail::json j;
  j["topology"] = topology_name;
  std::vector<std::string> names;
  for (Policy p : c.schedulers) names.emplace_back(policy_name(p));
  j["schedulers"] = names;
  j["params"] = {{"alpha", c.params.alpha},
                 {"beta", c.params.beta},
                 {"k_candidates", c.params.k_candidates}};
  if (c.seed) j["seed"] = *c.seed;
  if (c.workload_path) j["workload"] = std::filesystem::path(*c.workload_path).filename().string();
  if (c.generate) {
    j["generate"] = {{"n_tasks", c.generate->n_tasks},
                     {"sweep", c.generate->sweep},
                     {"defaults", detail::config_to_json(c.generate->defaults)}};
  }
  return j.dump();
}

/// 64-bit FNV-1a, hex encoded.
inline std::string fnv1a_hex(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : data) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline std::string read_file(const std::string& path, std::string_view what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + std::string(what) + " file \"" + path + "\"");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const std::filesystem::path& path, std::string_view data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write \"" + path.string() + "\"");
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw IoError("write failed for \"" + path.string() + "\"");
}

/// Inputs after loading and cross-validation.
struct PreparedRun {
  Network network;
  std::string topology_name;
  std::vector<Workload> workloads;  // one per sweep point
};

inline PreparedRun prepare(const RunConfig& c) {
  check_config(c);
  PreparedRun run;
  run.network = load_topology(read_file(c.topology_path, "topology"));
  run.topology_name = std::filesystem::path(c.topology_path).stem().string();
  if (c.workload_path) {
    Workload w = load_workload(read_file(*c.workload_path, "workload"));
    validate_workload(w, run.network);
    run.workloads.push_back(std::move(w));
  } else {
    for (std::size_t n : c.generate->sweep) {
      GeneratorConfig g = c.generate->defaults;
      g.n_tasks = c.generate->n_tasks;
      g.n_locals = n;
      run.workloads.push_back(generate_workload(run.network, g, *c.seed + n));
    }
  }
  return run;
}

struct RunResult {
  std::vector<SimReport> reports;  // scheduler-major, then sweep point
  SweepReport sweep;
  std::vector<std::pair<std::string, std::string>> files;  // name, contents
};

/// Runs every scenario. Scenarios are independent and may execute on
/// `threads` workers; results are ordered by scenario, not completion.
inline RunResult execute(const RunConfig& c, const PreparedRun& prepared) {
  const std::size_t points = prepared.workloads.size();
  const std::size_t jobs = c.schedulers.size() * points;
  std::vector<SimReport> reports(jobs);
  std::vector<std::exception_ptr> errors(jobs);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t j; (j = next.fetch_add(1)) < jobs;) {
      try {
        Network net = prepared.network;
        reports[j] = run_simulation(net, prepared.workloads[j % points],
                                    c.schedulers[j / points], c.params);
      } catch (...) {
        errors[j] = std::current_exception();
      }
    }
  };
  const unsigned n_threads = std::max(1u, std::min<unsigned>(c.threads, static_cast<unsigned>(jobs)));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  RunResult result;
  RunMetadata meta;
  meta.seed = c.seed;
  meta.topology = prepared.topology_name;
  meta.config_hash = fnv1a_hex(canonical_config(c, prepared.topology_name));

  std::vector<TaskRecord> all;
  for (std::size_t s = 0; s < c.schedulers.size(); ++s) {
    std::vector<TaskRecord> mine;
    for (std::size_t p = 0; p < points; ++p) {
      const auto& r = reports[s * points + p].records;
      mine.insert(mine.end(), r.begin(), r.end());
    }
    all.insert(all.end(), mine.begin(), mine.end());
    result.files.emplace_back("records_" + std::string(policy_name(c.schedulers[s])) + ".csv",
                              to_csv(mine));
  }
  result.sweep = summarize(all, meta);
  const PlotData plot = emit_plot_data(result.sweep);
  result.files.emplace_back("sweep.csv", to_csv(result.sweep));
  result.files.emplace_back("latency.dat", plot.latency);
  result.files.emplace_back("bandwidth.dat", plot.bandwidth);

  detail::json j;
  if (meta.seed) j["seed"] = *meta.seed;
  j["config_hash"] = meta.config_hash;
  j["topology"] = meta.topology;
  j["config"] = detail::json::parse(canonical_config(c, prepared.topology_name));
  result.files.emplace_back("run_meta.json", j.dump(2) + "\n");
  result.reports = std::move(reports);
  return result;
}

inline void print_summary(std::ostream& out, const SweepReport& sweep) {
  char line[160];
  std::snprintf(line, sizeof line, "%-9s %8s %6s %8s %18s %18s\n", "scheduler", "n_locals",
                "tasks", "blocked", "mean_total_ms", "total_bw_gbps");
  out << line;
  for (const auto& c : sweep.cells) {
    const std::string lat = c.mean_total_latency ? format_ms(*c.mean_total_latency) : "-";
    std::snprintf(line, sizeof line, "%-9s %8zu %6zu %8zu %18s %18s\n",
                  std::string(policy_name(c.scheduler)).c_str(), c.n_locals, c.tasks, c.blocked,
                  lat.c_str(), format_gbps(c.total_bandwidth).c_str());
    out << line;
  }
}

/// `run` subcommand. Exit 0 on success, 1 on invalid input, 2 on I/O errors.
inline int run(const RunConfig& c, std::ostream& out, std::ostream& err) {
  try {
    const PreparedRun prepared = prepare(c);
    const RunResult result = execute(c, prepared);
    std::error_code ec;
    std::filesystem::create_directories(c.out_dir, ec);
    if (ec) throw IoError("cannot create output directory \"" + c.out_dir + "\": " + ec.message());
    for (const auto& [name, data] : result.files) {
      write_file(std::filesystem::path(c.out_dir) / name, data);
    }
    print_summary(out, result.sweep);
    out << "wrote " << result.files.size() << " files to " << c.out_dir << "\n";
    return kExitOk;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const InfeasibleConfig& e) {
    err << "error: InfeasibleConfig: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalid;
  }
}

/// `validate` subcommand: loads and cross-checks every input without
/// running. Exit 0 when valid, 1 otherwise.
inline int validate(const RunConfig& c, std::ostream& out, std::ostream& err) {
  try {
    const PreparedRun prepared = prepare(c);
    std::size_t tasks = 0;
    for (const auto& w : prepared.workloads) tasks += w.tasks.size();
    out << "topology " << prepared.topology_name << ": " << prepared.network.nodes().size()
        << " nodes, " << prepared.network.links().size() << " links\n";
    out << "workload: " << prepared.workloads.size() << " set(s), " << tasks << " tasks\n";
    out << "ok\n";
    return kExitOk;
  } catch (const InfeasibleConfig& e) {
    err << "invalid: InfeasibleConfig: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const Error& e) {
    err << "invalid: " << e.what() << "\n";
    return kExitInvalid;
  }
}

/// Reads a run-config document. Keys mirror the command-line flags:
/// topology, workload, generate {n_tasks, sweep, ...}, scheduler, params
/// {alpha, beta, k_candidates}, seed, out.
inline RunConfig load_run_config(std::string_view text) {
  using detail::ObjectReader;
  const auto doc = detail::parse_document(text, "config");
  ObjectReader r(doc, "config");
  r.allow_only({"topology", "workload", "generate", "scheduler", "params", "seed", "out"});
  RunConfig c;
  if (r.has("topology")) c.topology_path = r.string("topology");
  if (r.has("workload")) c.workload_path = r.string("workload");
  if (r.has("generate")) {
    ObjectReader g(r.at("generate"), "config.generate");
    g.allow_only({"n_tasks", "sweep", "model_size_gbit", "demand_rate_gbps", "rounds",
                  "local_train_ms", "arrival_max_ms"});
    GenerateSpec spec;
    if (g.has("n_tasks")) spec.n_tasks = static_cast<std::size_t>(g.integer("n_tasks"));
    if (g.has("sweep")) {
      for (const auto& v : g.array("sweep")) {
        if (!v.is_number_unsigned()) throw ParseError("config.generate.sweep: expected counts");
        spec.sweep.push_back(v.get<std::size_t>());
      }
    }
    if (g.has("model_size_gbit")) spec.defaults.model_size_gbit = g.number("model_size_gbit");
    if (g.has("demand_rate_gbps")) spec.defaults.demand_rate_gbps = g.number("demand_rate_gbps");
    if (g.has("rounds")) spec.defaults.rounds = g.integer("rounds");
    if (g.has("local_train_ms")) spec.defaults.local_train_ms = g.number("local_train_ms");
    if (g.has("arrival_max_ms")) spec.defaults.arrival_max_ms = g.number("arrival_max_ms");
    c.generate = spec;
  }
  if (r.has("scheduler")) {
    c.schedulers.clear();
    for (const auto& v : r.array("scheduler")) {
      if (!v.is_string()) throw ParseError("config.scheduler: expected names");
      c.schedulers.push_back(parse_policy(v.get<std::string>()));
    }
  }
  if (r.has("params")) {
    ObjectReader p(r.at("params"), "config.params");
    p.allow_only({"alpha", "beta", "k_candidates"});
    if (p.has("alpha")) c.params.alpha = p.number("alpha");
    if (p.has("beta")) c.params.beta = p.number("beta");
    if (p.has("k_candidates")) c.params.k_candidates = static_cast<std::size_t>(p.integer("k_candidates"));
  }
  if (r.has("seed")) c.seed = static_cast<std::uint64_t>(r.integer("seed"));
  if (r.has("out")) c.out_dir = r.string("out");
  return c;
}

}  // namespace flexsched
