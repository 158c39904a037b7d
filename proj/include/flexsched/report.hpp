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

// CSV records, per-(scheduler, n_locals) aggregation and plot series.
// All numbers are rendered from integer-scaled values with six decimals, so
// output is byte-deterministic.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "flexsched/error.hpp"
#include "flexsched/schedule.hpp"
#include "flexsched/simulate.hpp"
#include "flexsched/units.hpp"

namespace flexsched {

inline constexpr std::string_view kRecordsHeader =
    "scheduler,task_id,n_locals,rounds,blocked,round_latency_ms,total_latency_ms,"
    "consumed_bw_gbps,tree_edges";

inline constexpr std::string_view kSweepHeader =
    "scheduler,n_locals,tasks,blocked,mean_round_latency_ms,max_round_latency_ms,"
    "mean_total_latency_ms,max_total_latency_ms,total_consumed_bw_gbps";

/// Rows sorted by (scheduler, task_id); blocked rows leave latency and
/// bandwidth empty.
inline std::string to_csv(std::vector<TaskRecord> records) {
  std::sort(records.begin(), records.end(), [](const TaskRecord& x, const TaskRecord& y) {
    return std::pair(policy_name(x.scheduler), std::string_view(x.task_id)) <
           std::pair(policy_name(y.scheduler), std::string_view(y.task_id));
  });
  std::string out(kRecordsHeader);
  out += '\n';
  for (const auto& r : records) {
    out += policy_name(r.scheduler);
    out += ',' + r.task_id;
    out += ',' + std::to_string(r.n_locals);
    out += ',' + std::to_string(r.rounds);
    out += r.blocked ? ",1" : ",0";
    out += ',' + (r.round_latency ? format_ms(*r.round_latency) : std::string());
    out += ',' + (r.total_latency ? format_ms(*r.total_latency) : std::string());
    out += ',' + (r.consumed_bw ? format_gbps(*r.consumed_bw) : std::string());
    out += ',' + std::to_string(r.tree_edges);
    out += '\n';
  }
  return out;
}

namespace detail {

inline std::vector<std::string> split(std::string_view line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(sep, start);
    out.emplace_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

// Parses a non-negative decimal with at most `decimals` fractional digits
// into an integer count of 10^-decimals units.
inline std::int64_t parse_scaled(const std::string& s, int decimals, const std::string& where) {
  std::int64_t whole = 0;
  std::int64_t frac = 0;
  int frac_digits = 0;
  bool seen_dot = false;
  bool any = false;
  for (char c : s) {
    if (c == '.' && !seen_dot) {
      seen_dot = true;
      continue;
    }
    if (c < '0' || c > '9') throw ParseError(where + ": not a decimal \"" + s + "\"");
    any = true;
    if (seen_dot) {
      if (++frac_digits > decimals) throw ParseError(where + ": too many decimals");
      frac = frac * 10 + (c - '0');
    } else {
      whole = whole * 10 + (c - '0');
    }
  }
  if (!any) throw ParseError(where + ": empty number");
  for (int i = frac_digits; i < decimals; ++i) frac *= 10;
  std::int64_t scale = 1;
  for (int i = 0; i < decimals; ++i) scale *= 10;
  return whole * scale + frac;
}

inline std::int64_t parse_int(const std::string& s, const std::string& where) {
  return parse_scaled(s, 0, where);
}

}  // namespace detail

/// Inverse of to_csv.
inline std::vector<TaskRecord> parse_records_csv(std::string_view text) {
  std::vector<TaskRecord> out;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    const std::string where = "records line " + std::to_string(line_no);
    if (line_no == 1) {
      if (line != kRecordsHeader) throw ParseError(where + ": unexpected header");
      continue;
    }
    const auto f = detail::split(line, ',');
    if (f.size() != 9) throw ParseError(where + ": expected 9 fields");
    TaskRecord r;
    r.scheduler = parse_policy(f[0]);
    r.task_id = f[1];
    r.n_locals = static_cast<std::size_t>(detail::parse_int(f[2], where + " n_locals"));
    r.rounds = detail::parse_int(f[3], where + " rounds");
    if (f[4] != "0" && f[4] != "1") throw ParseError(where + ": blocked must be 0 or 1");
    r.blocked = f[4] == "1";
    if (!f[5].empty()) r.round_latency = Duration(detail::parse_scaled(f[5], 6, where));
    if (!f[6].empty()) r.total_latency = Duration(detail::parse_scaled(f[6], 6, where));
    if (!f[7].empty()) {
      const auto micro = detail::parse_scaled(f[7], 6, where);
      if (micro % 1000 != 0) throw ParseError(where + ": bandwidth finer than 1 Mbps");
      r.consumed_bw = Bandwidth(micro / 1000);
    }
    r.tree_edges = static_cast<std::size_t>(detail::parse_int(f[8], where + " tree_edges"));
    if (r.blocked == r.round_latency.has_value()) {
      throw ParseError(where + ": latency must be present exactly when not blocked");
    }
    out.push_back(std::move(r));
  }
  if (line_no == 0) throw ParseError("records: missing header");
  return out;
}

/// Aggregates for one (scheduler, n_locals) group. Latency statistics
/// cover admitted tasks only and are absent when every task was blocked.
struct SweepCell {
  Policy scheduler = Policy::Flexible;
  std::size_t n_locals = 0;
  std::size_t tasks = 0;
  std::size_t blocked = 0;
  std::optional<Duration> mean_round_latency;
  std::optional<Duration> max_round_latency;
  std::optional<Duration> mean_total_latency;
  std::optional<Duration> max_total_latency;
  Bandwidth total_bandwidth;

  bool operator==(const SweepCell&) const = default;
};

struct RunMetadata {
  std::optional<std::uint64_t> seed;
  std::string config_hash;
  std::string topology;

  bool operator==(const RunMetadata&) const = default;
};

struct SweepReport {
  std::vector<SweepCell> cells;  // sorted by (scheduler, n_locals)
  RunMetadata metadata;

  bool operator==(const SweepReport&) const = default;
};

inline SweepReport summarize(const std::vector<TaskRecord>& records, RunMetadata metadata = {}) {
  struct Acc {
    SweepCell cell;
    Duration round_sum;
    Duration total_sum;
    std::int64_t admitted = 0;
  };
  std::map<std::pair<Policy, std::size_t>, Acc> groups;
  for (const auto& r : records) {
    Acc& a = groups[{r.scheduler, r.n_locals}];
    a.cell.scheduler = r.scheduler;
    a.cell.n_locals = r.n_locals;
    ++a.cell.tasks;
    if (r.blocked) {
      ++a.cell.blocked;
      continue;
    }
    ++a.admitted;
    a.round_sum += *r.round_latency;
    a.total_sum += *r.total_latency;
    a.cell.max_round_latency = std::max(a.cell.max_round_latency.value_or(Duration::zero()),
                                        *r.round_latency);
    a.cell.max_total_latency = std::max(a.cell.max_total_latency.value_or(Duration::zero()),
                                        *r.total_latency);
    a.cell.total_bandwidth += *r.consumed_bw;
  }
  SweepReport report;
  report.metadata = std::move(metadata);
  for (auto& [key, a] : groups) {
    if (a.admitted > 0) {
      a.cell.mean_round_latency = rounded_mean(a.round_sum, a.admitted);
      a.cell.mean_total_latency = rounded_mean(a.total_sum, a.admitted);
    }
    report.cells.push_back(a.cell);
  }
  return report;
}

inline std::string to_csv(const SweepReport& sweep) {
  auto opt = [](const std::optional<Duration>& d) { return d ? format_ms(*d) : std::string(); };
  std::string out(kSweepHeader);
  out += '\n';
  for (const auto& c : sweep.cells) {
    out += policy_name(c.scheduler);
    out += ',' + std::to_string(c.n_locals);
    out += ',' + std::to_string(c.tasks);
    out += ',' + std::to_string(c.blocked);
    out += ',' + opt(c.mean_round_latency);
    out += ',' + opt(c.max_round_latency);
    out += ',' + opt(c.mean_total_latency);
    out += ',' + opt(c.max_total_latency);
    out += ',' + format_gbps(c.total_bandwidth);
    out += '\n';
  }
  return out;
}

struct PlotData {
  std::string latency;
  std::string bandwidth;
};

/// Whitespace-delimited series: one row per n_locals, one column per
/// scheduler present (fixed before flexible). Mean total latency in ms and
/// total consumed bandwidth in Gbps; "nan" marks a cell with no data.
inline PlotData emit_plot_data(const SweepReport& sweep) {
  std::vector<Policy> columns;
  std::map<std::size_t, std::map<Policy, const SweepCell*>> rows;
  for (const auto& c : sweep.cells) {
    if (std::find(columns.begin(), columns.end(), c.scheduler) == columns.end()) {
      columns.push_back(c.scheduler);
    }
    rows[c.n_locals][c.scheduler] = &c;
  }
  std::sort(columns.begin(), columns.end());

  PlotData out;
  std::string head = "# n_locals";
  for (Policy p : columns) head += ' ' + std::string(policy_name(p));
  out.latency = head + '\n';
  out.bandwidth = head + '\n';
  for (const auto& [n, cells] : rows) {
    std::string lat = std::to_string(n);
    std::string bw = lat;
    for (Policy p : columns) {
      auto it = cells.find(p);
      const SweepCell* c = it == cells.end() ? nullptr : it->second;
      lat += ' ' + (c && c->mean_total_latency ? format_ms(*c->mean_total_latency)
                                               : std::string("nan"));
      bw += ' ' + (c ? format_gbps(c->total_bandwidth) : std::string("nan"));
    }
    out.latency += lat + '\n';
    out.bandwidth += bw + '\n';
  }
  return out;
}

}  // namespace flexsched
