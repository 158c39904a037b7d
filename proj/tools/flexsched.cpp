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

// Command-line front end: `flexsched run ...` and `flexsched validate ...`.

#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "flexsched.hpp"

namespace {

struct Flags {
  std::string config;
  std::string topology;
  std::string workload;
  std::vector<std::string> generate;
  std::string scheduler;
  double alpha = 1.0;
  double beta = 1.0;
  std::size_t k = 4;
  std::uint64_t seed = 0;
  std::string out = "out";
  unsigned threads = 1;
};

void add_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "Run-config document (flags override it)");
  cmd->add_option("--topology", f.topology, "Topology document");
  cmd->add_option("--workload", f.workload, "Workload document");
  cmd->add_option("--generate", f.generate, "Generator settings, key=value ...")
      ->expected(1, -1);
  cmd->add_option("--scheduler", f.scheduler, "fixed, flexible or fixed,flexible");
  cmd->add_option("--alpha", f.alpha, "Bandwidth-term weight");
  cmd->add_option("--beta", f.beta, "Latency-term weight");
  cmd->add_option("--k", f.k, "Candidate paths for first fit");
  cmd->add_option("--seed", f.seed, "Generator seed");
  cmd->add_option("--out", f.out, "Output directory");
  cmd->add_option("--threads", f.threads, "Worker threads for independent scenarios");
}

// Returns an exit code on failure.
int build_config(const CLI::App* cmd, const Flags& f, flexsched::RunConfig& c) {
  using namespace flexsched;
  try {
    if (!f.config.empty()) c = load_run_config(read_file(f.config, "config"));
    if (cmd->count("--topology")) c.topology_path = f.topology;
    if (cmd->count("--workload")) c.workload_path = f.workload;
    if (cmd->count("--generate")) c.generate = parse_generate(f.generate);
    if (cmd->count("--scheduler")) {
      c.schedulers.clear();
      for (const auto& name : detail::split(f.scheduler, ',')) {
        c.schedulers.push_back(parse_policy(name));
      }
    }
    if (cmd->count("--alpha")) c.params.alpha = f.alpha;
    if (cmd->count("--beta")) c.params.beta = f.beta;
    if (cmd->count("--k")) c.params.k_candidates = f.k;
    if (cmd->count("--seed")) c.seed = f.seed;
    if (cmd->count("--out")) c.out_dir = f.out;
    c.threads = f.threads;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  }
  return -1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fixed vs flexible scheduling of distributed AI traffic"};
  app.require_subcommand(1);
  Flags run_flags;
  Flags validate_flags;
  auto* run = app.add_subcommand("run", "Simulate and write CSV/plot files");
  auto* validate = app.add_subcommand("validate", "Check inputs without running");
  add_flags(run, run_flags);
  add_flags(validate, validate_flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : flexsched::kExitInvalid;
  }

  flexsched::RunConfig config;
  if (run->parsed()) {
    if (int code = build_config(run, run_flags, config); code >= 0) return code;
    return flexsched::run(config, std::cout, std::cerr);
  }
  if (int code = build_config(validate, validate_flags, config); code >= 0) return code;
  return flexsched::validate(config, std::cout, std::cerr);
}
