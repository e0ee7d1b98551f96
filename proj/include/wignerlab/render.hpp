// Copyright 2026 The wignerlab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


/**
 * @file
 * Table and structured (JSON) rendering for runs, samples, audits and
 * distributions.
 *
 * Table rows read `P(l1,l2) = p` with the columns listed in the header.
 * Probabilities carry 12 significant digits and at least 12 decimals, so
 * 1/12 prints as 0.0833333333333 and 1 as 1.000000000000. Structured
 * output is one JSON document with "schema": "wignerlab/1"; probabilities
 * are rounded to 12 significant digits.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wignerlab/evaluate.hpp"
#include "wignerlab/frlab.hpp"
#include "wignerlab/interference.hpp"
#include "wignerlab/measure.hpp"

namespace wignerlab {

inline constexpr const char* kSchemaVersion = "wignerlab/1";
inline constexpr const char* kUnresolvedLabel = "UNRESOLVED";

enum class OutputMode { kTable, kStructured };

inline std::string format_probability(double p) {
  if (std::abs(p) < 1e-300) p = 0.0;
  int decimals = 12;
  if (p > 0.0) decimals = std::max(12, 11 - static_cast<int>(std::floor(std::log10(p))));
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, p);
  return buf;
}

/// %.12g.
inline std::string format_g(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

/// v rounded to 12 significant digits.
inline double round12(double v) { return std::stod(format_g(v)); }

namespace detail {

inline std::string label_of(const RecordInfo& r, const std::optional<std::size_t>& v) {
  return v ? r.labels.at(*v) : std::string(kUnresolvedLabel);
}

/// Sort key: record order, then label order, unresolved last.
inline std::vector<std::size_t> row_key(const RecordTuple& t) {
  std::vector<std::size_t> k;
  for (const auto& v : t) k.push_back(v ? *v : std::numeric_limits<std::size_t>::max());
  return k;
}

template <class V>
std::vector<std::pair<RecordTuple, V>> ordered_rows(const std::map<RecordTuple, V>& m) {
  std::vector<std::pair<RecordTuple, V>> rows(m.begin(), m.end());
  std::stable_sort(rows.begin(), rows.end(),
                   [](const auto& a, const auto& b) { return row_key(a.first) < row_key(b.first); });
  return rows;
}

inline std::string join(const std::vector<std::string>& xs, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? sep : "") + xs[i];
  return out;
}

/// Records with a value in at least one branch.
inline std::vector<std::size_t> shown_records(const RunResult& r) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < r.records().size(); ++i) {
    bool any = false;
    for (const auto& [t, p] : r.joint) any = any || t[i].has_value();
    if (any) out.push_back(i);
  }
  return out;
}

inline std::string policy_header(Policy p) {
  std::string s = "policy: " + std::string(policy_name(p));
  if (p == Policy::kCollapseOnRecord) s += " (naive)";
  return s;
}

inline nlohmann::json records_json(const CompiledScenario& c, const RecordTuple& t) {
  nlohmann::json j = nlohmann::json::object();
  for (std::size_t i = 0; i < c.records.size(); ++i)
    j[c.records[i].name] = t[i] ? nlohmann::json(c.records[i].labels[*t[i]]) : nlohmann::json(nullptr);
  return j;
}

inline nlohmann::json record_list_json(const CompiledScenario& c) {
  nlohmann::json a = nlohmann::json::array();
  for (const auto& r : c.records)
    a.push_back({{"name", r.name}, {"kind", r.agent ? "agent" : "external"}, {"step", r.step + 1}, {"labels", r.labels}});
  return a;
}

}  // namespace detail

inline std::string render_distribution(const OutcomeDistribution& d, OutputMode mode) {
  if (mode == OutputMode::kStructured) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& e : d.entries()) rows.push_back({{"label", e.label}, {"probability", round12(e.probability)}});
    return nlohmann::json{{"schema", kSchemaVersion}, {"distribution", rows}}.dump(2) + "\n";
  }
  std::string out;
  for (const auto& e : d.entries()) out += "P(" + e.label + ") = " + format_probability(e.probability) + "\n";
  return out;
}

/// Joint over the records resolved somewhere; fully unresolved records are
/// named in the header. No shown records gives a header-only table.
inline std::string render_run(const RunResult& r, OutputMode mode) {
  const CompiledScenario& c = *r.compiled;
  const auto shown = detail::shown_records(r);
  if (mode == OutputMode::kStructured) {
    nlohmann::json joint = nlohmann::json::array();
    for (const auto& [t, p] : detail::ordered_rows(r.joint))
      joint.push_back({{"records", detail::records_json(c, t)}, {"probability", round12(p)}});
    nlohmann::json branches = nlohmann::json::array();
    for (const auto& b : r.branches)
      branches.push_back({{"records", detail::records_json(c, b.records)}, {"weight", round12(b.weight)}});
    nlohmann::json steps = nlohmann::json::array();
    for (const auto& a : r.annotations)
      steps.push_back({{"step", a.step + 1},
                       {"kind", a.kind},
                       {"branches", a.branches_in},
                       {"weight", round12(a.weight_in)},
                       {"pruned", a.pruned}});
    return nlohmann::json{{"schema", kSchemaVersion},
                          {"command", "run"},
                          {"policy", policy_name(r.policy)},
                          {"naive", r.policy == Policy::kCollapseOnRecord},
                          {"records", detail::record_list_json(c)},
                          {"joint", joint},
                          {"branches", branches},
                          {"steps", steps}}
               .dump(2) +
           "\n";
  }
  std::vector<std::string> cols, hidden;
  for (std::size_t i = 0; i < c.records.size(); ++i) {
    if (std::find(shown.begin(), shown.end(), i) != shown.end()) cols.push_back(c.records[i].name);
    else hidden.push_back(c.records[i].name);
  }
  std::string out = "# " + detail::policy_header(r.policy) + "\n";
  out += "# records: " + detail::join(cols, ",") + "\n";
  if (!hidden.empty()) out += "# unresolved: " + detail::join(hidden, ",") + "\n";
  if (shown.empty()) return out;
  for (const auto& [t, p] : detail::ordered_rows(r.marginal(shown))) {
    std::vector<std::string> labels;
    for (std::size_t k = 0; k < shown.size(); ++k) labels.push_back(detail::label_of(c.records[shown[k]], t[k]));
    out += "P(" + detail::join(labels, ",") + ") = " + format_probability(p) + "\n";
  }
  return out;
}

/// One line per external record: its outcome probabilities joined by " / ".
inline std::string render_marginal_summary(const RunResult& r) {
  const CompiledScenario& c = *r.compiled;
  std::string out;
  for (std::size_t i = 0; i < c.records.size(); ++i) {
    if (c.records[i].agent) continue;
    const auto m = r.marginal({i});
    std::vector<std::string> ps;
    for (std::size_t j = 0; j < c.records[i].labels.size(); ++j) {
      auto it = m.find(RecordTuple{j});
      ps.push_back(format_g(it == m.end() ? 0.0 : it->second));
    }
    out += c.records[i].name + ": " + detail::join(c.records[i].labels, " / ") + " = " + detail::join(ps, " / ") + "\n";
  }
  return out;
}

inline std::string render_sample(const SampleResult& s, OutputMode mode) {
  const CompiledScenario& c = *s.compiled;
  if (mode == OutputMode::kStructured) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& [t, n] : detail::ordered_rows(s.counts))
      rows.push_back({{"records", detail::records_json(c, t)},
                      {"count", n},
                      {"frequency", round12(static_cast<double>(n) / static_cast<double>(s.n))}});
    return nlohmann::json{{"schema", kSchemaVersion}, {"command", "sample"},
                          {"policy", policy_name(s.policy)}, {"naive", s.policy == Policy::kCollapseOnRecord},
                          {"n", s.n}, {"seed", s.seed},
                          {"records", detail::record_list_json(c)}, {"counts", rows}}
               .dump(2) +
           "\n";
  }
  std::vector<std::string> names;
  for (const auto& r : c.records) names.push_back(r.name);
  std::string out = "# " + detail::policy_header(s.policy) + "\n";
  out += "# n: " + std::to_string(s.n) + "  seed: " + std::to_string(s.seed) + "\n";
  out += "# records: " + detail::join(names, ",") + "\n";
  for (const auto& [t, n] : detail::ordered_rows(s.counts)) {
    std::vector<std::string> labels;
    for (std::size_t k = 0; k < t.size(); ++k) labels.push_back(detail::label_of(c.records[k], t[k]));
    out += "N(" + detail::join(labels, ",") + ") = " + std::to_string(n) + "  (" +
           format_probability(static_cast<double>(n) / static_cast<double>(s.n)) + ")\n";
  }
  return out;
}

inline std::string render_audit(const AuditReport& a, OutputMode mode) {
  const CompiledScenario& c = *a.compiled;
  if (mode == OutputMode::kStructured) {
    nlohmann::json agents = nlohmann::json::array();
    for (const auto& ag : a.agents) {
      nlohmann::json checks = nlohmann::json::array();
      for (const auto& ch : ag.checks)
        checks.push_back({{"later", c.records[ch.record].name},
                          {"isolated_gap", round12(ch.isolated_gap)},
                          {"cumulative_gap", round12(ch.cumulative_gap)}});
      nlohmann::json unsafe = nlohmann::json::array();
      for (const auto& p : ag.unsafe) unsafe.push_back({{"later", c.records[p.later_record].name}, {"gap", round12(p.gap)}});
      agents.push_back({{"record", c.records[ag.record].name},
                        {"step", c.records[ag.record].step + 1},
                        {"safe", ag.safe()},
                        {"checks", checks},
                        {"unsafe", unsafe}});
    }
    return nlohmann::json{{"schema", kSchemaVersion}, {"command", "audit"}, {"tolerance", a.tolerance},
                          {"all_safe", a.all_safe()}, {"agents", agents}}
               .dump(2) +
           "\n";
  }
  std::string out = "# tolerance: " + format_g(a.tolerance) + "\n";
  for (const auto& ag : a.agents) {
    const RecordInfo& r = c.records[ag.record];
    out += r.name + " (step " + std::to_string(r.step + 1) + "): " + (ag.safe() ? "safe" : "UNSAFE") + "\n";
    for (const auto& ch : ag.checks)
      out += "  vs " + c.records[ch.record].name + " (step " + std::to_string(c.records[ch.record].step + 1) +
             "): isolated gap " + format_g(ch.isolated_gap) + ", cumulative gap " + format_g(ch.cumulative_gap) + "\n";
  }
  const auto pairs = a.unsafe_pairs();
  out += "unsafe pairs: " + std::to_string(pairs.size()) + "\n";
  for (const auto& p : pairs)
    out += "UNSAFE " + c.records[p.agent_record].name + " -> " + c.records[p.later_record].name + " gap " +
           format_g(p.gap) + "\n";
  return out;
}

inline std::string render_interference(const InterferenceReport& r, const std::vector<std::string>& labels) {
  std::string out = "superposition expectation: " + format_g(r.superposition_expectation) + "\n";
  out += "mixture expectation: " + format_g(r.mixture_expectation) + "\n";
  for (const auto& [jk, t] : r.terms)
    out += "term(" + labels.at(jk.first) + "," + labels.at(jk.second) + ") = " + format_g(t) + "\n";
  out += std::string("verdict: ") + (r.safe ? "safe" : "UNSAFE") + " (max |term| " + format_g(r.max_abs_term) + ")\n";
  return out;
}

inline std::string render_statements(const std::array<StatementReport, 3>& reports, OutputMode mode) {
  if (mode == OutputMode::kStructured) {
    nlohmann::json a = nlohmann::json::array();
    for (const auto& r : reports) {
      nlohmann::json nums = nlohmann::json::object();
      for (const auto& [n, v] : r.numbers) nums[n] = round12(v);
      a.push_back({{"id", std::string(1, r.id)}, {"claim", r.claim}, {"verdict", verdict_name(r.verdict)}, {"numbers", nums}});
    }
    return nlohmann::json{{"schema", kSchemaVersion}, {"command", "statements"}, {"statements", a}}.dump(2) + "\n";
  }
  std::string out;
  for (const auto& r : reports) {
    out += "(" + std::string(1, r.id) + ") " + r.claim + ": " + std::string(verdict_name(r.verdict)) + "\n";
    for (const auto& [n, v] : r.numbers) out += "    " + n + " = " + format_g(v) + "\n";
  }
  return out;
}

}  // namespace wignerlab
