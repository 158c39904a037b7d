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
#include <sstream>
#include <string>
#include <vector>

#include "flexsched.hpp"
#include "oracles.hpp"

namespace flexsched {
namespace {

TaskRecord admitted(Policy p, std::string id, std::size_t n, double total_ms, double bw) {
  TaskRecord r;
  r.scheduler = p;
  r.task_id = std::move(id);
  r.n_locals = n;
  r.rounds = 10;
  r.total_latency = ms(total_ms);
  r.round_latency = ms(total_ms / 10);
  r.consumed_bw = gbps(bw);
  r.tree_edges = n;
  return r;
}

TaskRecord blocked(Policy p, std::string id, std::size_t n) {
  TaskRecord r;
  r.scheduler = p;
  r.task_id = std::move(id);
  r.n_locals = n;
  r.rounds = 10;
  r.blocked = true;
  return r;
}

TEST(RecordsCsv, EmptyIsHeaderOnly) {
  EXPECT_EQ(to_csv(std::vector<TaskRecord>{}), std::string(kRecordsHeader) + "\n");
  EXPECT_TRUE(parse_records_csv(to_csv(std::vector<TaskRecord>{})).empty());
}

TEST(RecordsCsv, OneAdmittedAndOneBlockedRow) {
  const std::vector<TaskRecord> rs{blocked(Policy::Fixed, "b", 3), admitted(Policy::Fixed, "a", 3, 2011.1, 6)};
  EXPECT_EQ(to_csv(rs), std::string(kRecordsHeader) +
                            "\nfixed,a,3,10,0,201.110000,2011.100000,6.000000,3"
                            "\nfixed,b,3,10,1,,,,0\n");
}

TEST(RecordsCsv, RoundTripIsByteIdentical) {
  const Network base = oracle::ring10();
  std::vector<TaskRecord> all;
  for (Policy p : {Policy::Fixed, Policy::Flexible}) {
    Network net = base;
    const auto report = run_simulation(net, generate_workload(base, {.n_tasks = 30, .n_locals = 9}, 51), p, {});
    all.insert(all.end(), report.records.begin(), report.records.end());
  }
  const std::string text = to_csv(all);
  const auto parsed = parse_records_csv(text);
  EXPECT_EQ(to_csv(parsed), text);
  EXPECT_EQ(parsed.size(), all.size());
}

TEST(RecordsCsv, MalformedInputIsRejected) {
  EXPECT_THROW(parse_records_csv(""), ParseError);
  EXPECT_THROW(parse_records_csv("a,b\n"), ParseError);
  const std::string h = std::string(kRecordsHeader) + "\n";
  EXPECT_THROW(parse_records_csv(h + "fixed,a,3,10,2,,,,0\n"), ParseError);
  EXPECT_THROW(parse_records_csv(h + "fixed,a,3,10,0,,,,0\n"), ParseError);
  EXPECT_THROW(parse_records_csv(h + "fixed,a,3,10,0,1.0000001,1,1,1\n"), ParseError);
  EXPECT_THROW(parse_records_csv(h + "fixed,a,3\n"), ParseError);
}

TEST(Summarize, AllBlockedHasNoLatency) {
  const auto s = summarize({blocked(Policy::Flexible, "a", 3), blocked(Policy::Flexible, "b", 3)});
  ASSERT_EQ(s.cells.size(), 1u);
  EXPECT_EQ(s.cells[0].blocked, 2u);
  EXPECT_EQ(s.cells[0].mean_total_latency, std::nullopt);
  EXPECT_EQ(s.cells[0].total_bandwidth, gbps(0));
  EXPECT_EQ(to_csv(s), std::string(kSweepHeader) + "\nflexible,3,2,2,,,,,0.000000\n");
}

TEST(Summarize, MeansCoverAdmittedTasksOnly) {
  const auto s = summarize({admitted(Policy::Fixed, "a", 5, 1, 2), admitted(Policy::Fixed, "b", 5, 3, 4),
                            blocked(Policy::Fixed, "c", 5)});
  ASSERT_EQ(s.cells.size(), 1u);
  const auto& c = s.cells[0];
  EXPECT_EQ(c.tasks, 3u);
  EXPECT_EQ(c.blocked, 1u);
  EXPECT_EQ(c.mean_total_latency, ms(2));
  EXPECT_EQ(c.max_total_latency, ms(3));
  EXPECT_EQ(c.mean_round_latency, ms(0.2));
  EXPECT_EQ(c.total_bandwidth, gbps(6));
}

TEST(Summarize, MeanRoundsHalfAwayFromZero) {
  TaskRecord a = admitted(Policy::Fixed, "a", 3, 0, 1);
  TaskRecord b = a;
  b.task_id = "b";
  a.total_latency = Duration(1);
  b.total_latency = Duration(2);
  EXPECT_EQ(summarize({a, b}).cells[0].mean_total_latency, Duration(2));
}

TEST(Summarize, CellsSortedBySchedulerThenLocals) {
  const auto s = summarize({admitted(Policy::Flexible, "a", 5, 1, 1), admitted(Policy::Fixed, "b", 7, 1, 1),
                            admitted(Policy::Fixed, "c", 3, 1, 1)});
  ASSERT_EQ(s.cells.size(), 3u);
  EXPECT_EQ(std::pair(s.cells[0].scheduler, s.cells[0].n_locals), std::pair(Policy::Fixed, std::size_t{3}));
  EXPECT_EQ(std::pair(s.cells[1].scheduler, s.cells[1].n_locals), std::pair(Policy::Fixed, std::size_t{7}));
  EXPECT_EQ(std::pair(s.cells[2].scheduler, s.cells[2].n_locals), std::pair(Policy::Flexible, std::size_t{5}));
}

TEST(PlotData, SingleCell) {
  const auto plot = emit_plot_data(summarize({admitted(Policy::Flexible, "a", 3, 12.5, 4)}));
  EXPECT_EQ(plot.latency, "# n_locals flexible\n3 12.500000\n");
  EXPECT_EQ(plot.bandwidth, "# n_locals flexible\n3 4.000000\n");
}

TEST(PlotData, FixedColumnComesFirstAndGapsAreNan) {
  const auto plot = emit_plot_data(summarize({admitted(Policy::Flexible, "a", 3, 1, 1),
                                              admitted(Policy::Fixed, "b", 3, 2, 2),
                                              blocked(Policy::Fixed, "c", 5)}));
  EXPECT_EQ(plot.latency, "# n_locals fixed flexible\n3 2.000000 1.000000\n5 nan nan\n");
  EXPECT_EQ(plot.bandwidth, "# n_locals fixed flexible\n3 2.000000 1.000000\n5 0.000000 nan\n");
}

TEST(PlotData, AgreesWithTheSweepTable) {
  const Network base = oracle::ring10();
  std::vector<TaskRecord> all;
  for (std::size_t n : {3u, 5u}) {
    const auto w = generate_workload(base, {.n_tasks = 10, .n_locals = n}, 42 + n);
    for (Policy p : {Policy::Fixed, Policy::Flexible}) {
      Network net = base;
      const auto r = run_simulation(net, w, p, {}).records;
      all.insert(all.end(), r.begin(), r.end());
    }
  }
  const auto sweep = summarize(all);
  const auto plot = emit_plot_data(sweep);
  std::istringstream lat(plot.latency), bw(plot.bandwidth);
  std::string line;
  std::getline(lat, line);
  std::getline(bw, line);
  for (std::size_t n : {3u, 5u}) {
    std::string l_n, l_fixed, l_flex, b_n, b_fixed, b_flex;
    lat >> l_n >> l_fixed >> l_flex;
    bw >> b_n >> b_fixed >> b_flex;
    EXPECT_EQ(l_n, std::to_string(n));
    for (const auto& c : sweep.cells) {
      if (c.n_locals != n) continue;
      const bool fixed = c.scheduler == Policy::Fixed;
      EXPECT_EQ(fixed ? l_fixed : l_flex, format_ms(*c.mean_total_latency));
      EXPECT_EQ(fixed ? b_fixed : b_flex, format_gbps(c.total_bandwidth));
    }
  }
}

}  // namespace
}  // namespace flexsched
