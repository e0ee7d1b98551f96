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
 * Scenarios: registers plus an ordered list of steps. Construction validates
 * the structure and compiles every step to an operator on the full layout.
 *
 * Registers start in their first label; agent registers start in their
 * `ready` label. An agent measurement is the unitary
 *
 *   Σ_j P_j ⊗ X^{s_j},   s_j = index(label_j) - index(ready)  (mod d),
 *
 * where P_j projects the measured registers onto outcome j and X shifts the
 * agent register cyclically. Starting from `ready` this writes label_j.
 */

#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <memory>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "wignerlab/amplitude.hpp"
#include "wignerlab/errors.hpp"
#include "wignerlab/measure.hpp"
#include "wignerlab/qcore.hpp"

namespace wignerlab {

/// Amplitudes given in a prepared state are renormalized if they are within
/// this distance of norm 1 and rejected otherwise.
inline constexpr double kPrepareNormTolerance = 1e-6;

/// A record resolves to a label when every vector of a later outcome block
/// keeps at least 1 - this weight on that label.
inline constexpr double kResolutionTolerance = 1e-9;

inline constexpr std::size_t kNoRecord = std::numeric_limits<std::size_t>::max();

struct Register {
  std::string name;
  std::vector<std::string> labels;
  bool agent = false;
  /// Agent registers only: the initial label.
  std::string ready;

  bool operator==(const Register&) const = default;
};

/// One labeled line of a basis or blocks list.
struct SpecEntry {
  std::string label;
  std::vector<Amplitude> amplitudes;

  bool operator==(const SpecEntry&) const = default;
};

/// `basis`: one entry per outcome. `blocks`: entries sharing a label form
/// one block, in order of first appearance.
struct SpecText {
  enum class Kind { kBasis, kBlocks };
  Kind kind = Kind::kBasis;
  std::vector<SpecEntry> entries;

  bool operator==(const SpecText&) const = default;
};

struct Prepare {
  std::string target;
  std::vector<Amplitude> amplitudes;
  bool operator==(const Prepare&) const = default;
};

struct ApplyUnitary {
  std::vector<std::string> targets;
  std::vector<std::vector<Amplitude>> rows;
  bool operator==(const ApplyUnitary&) const = default;
};

struct AgentMeasure {
  std::string agent;
  std::vector<std::string> targets;
  SpecText spec;
  std::string record;
  bool operator==(const AgentMeasure&) const = default;
};

/// Prepares `target` in the state listed for the current label of the agent
/// that wrote `control`. Labels without an entry leave the target alone.
struct ControlledPrepare {
  std::string target;
  std::string control;
  std::vector<SpecEntry> cases;
  bool operator==(const ControlledPrepare&) const = default;
};

struct ExternalMeasure {
  std::vector<std::string> targets;
  SpecText spec;
  std::string record;
  bool operator==(const ExternalMeasure&) const = default;
};

using Step = std::variant<Prepare, ApplyUnitary, AgentMeasure, ControlledPrepare, ExternalMeasure>;

struct RecordInfo {
  std::string name;
  std::size_t step = 0;
  bool agent = false;
  /// The agent register for agent records.
  std::string register_name;
  std::vector<std::string> labels;
};

struct CompiledStep {
  enum class Kind { kUnitary, kAgentMeasure, kExternalMeasure };
  Kind kind = Kind::kUnitary;
  /// Everything except external measurements.
  std::optional<UnitaryMap> unitary;
  /// External: the lifted outcome decomposition. Agent: the lifted
  /// computational decomposition of the agent register (the record).
  std::optional<MeasurementSpec> outcomes;
  /// Agent: the measured decomposition lifted to the full layout.
  std::optional<MeasurementSpec> induced;
  std::size_t record = kNoRecord;
  /// External: for each outcome block, the (record, label) pairs it settles.
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> resolves;
};

struct CompiledScenario {
  LayoutPtr layout;
  StateVector initial;
  std::vector<CompiledStep> steps;
  std::vector<RecordInfo> records;

  std::optional<std::size_t> find_record(std::string_view name) const {
    for (std::size_t r = 0; r < records.size(); ++r)
      if (records[r].name == name) return r;
    return std::nullopt;
  }

  std::size_t record_index(std::string_view name) const {
    if (auto r = find_record(name)) return *r;
    throw ArgumentError("unknown record '" + std::string(name) + "'");
  }

  std::size_t label_index(std::size_t record, std::string_view label) const {
    const auto& ls = records.at(record).labels;
    for (std::size_t j = 0; j < ls.size(); ++j)
      if (ls[j] == label) return j;
    throw ArgumentError("record '" + records[record].name + "' has no label '" + std::string(label) + "'");
  }
};

namespace detail {

inline CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline CVector amplitude_vector(const std::vector<Amplitude>& amps) {
  CVector v(static_cast<Eigen::Index>(amps.size()));
  for (std::size_t i = 0; i < amps.size(); ++i) v(static_cast<Eigen::Index>(i)) = amps[i].value;
  return v;
}

inline std::string step_name(const Step& s) {
  return std::visit(
      [](const auto& x) -> std::string {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Prepare>) return "prepare";
        else if constexpr (std::is_same_v<T, ApplyUnitary>) return "unitary";
        else if constexpr (std::is_same_v<T, AgentMeasure>) return "ameasure";
        else if constexpr (std::is_same_v<T, ControlledPrepare>) return "cprepare";
        else return "xmeasure";
      },
      s);
}

}  // namespace detail

class Scenario {
 public:
  /// Validates and compiles. Throws ScenarioError (with the step index when
  /// a step is at fault) or DimensionError.
  Scenario(std::vector<Register> registers, std::vector<Step> steps)
      : registers_(std::move(registers)), steps_(std::move(steps)) {
    compile();
  }

  const std::vector<Register>& registers() const noexcept { return registers_; }
  const std::vector<Step>& steps() const noexcept { return steps_; }
  const CompiledScenario& compiled() const noexcept { return *compiled_; }
  std::shared_ptr<const CompiledScenario> compiled_ptr() const noexcept { return compiled_; }
  const LayoutPtr& layout() const noexcept { return compiled_->layout; }

  const Register& register_named(std::string_view name) const {
    for (const auto& r : registers_)
      if (r.name == name) return r;
    throw ArgumentError("unknown register '" + std::string(name) + "'");
  }

  /// Structural equality; compiled data follows from it.
  bool operator==(const Scenario& o) const { return registers_ == o.registers_ && steps_ == o.steps_; }

 private:
  [[noreturn]] static void fail(std::size_t step, const std::string& msg) {
    throw ScenarioError("step " + std::to_string(step + 1) + ": " + msg, step);
  }

  const Register& reg(std::size_t step, const std::string& name) const {
    for (const auto& r : registers_)
      if (r.name == name) return r;
    fail(step, "unknown register '" + name + "'");
  }

  void check_registers() const {
    if (registers_.empty()) throw ScenarioError("no registers declared");
    std::set<std::string> names;
    for (const auto& r : registers_) {
      if (!names.insert(r.name).second) throw ScenarioError("register '" + r.name + "' declared twice");
      if (r.labels.empty()) throw ScenarioError("register '" + r.name + "' has no labels");
      if (r.agent) {
        bool found = false;
        for (const auto& l : r.labels) found = found || l == r.ready;
        if (!found) throw ScenarioError("agent '" + r.name + "': ready label '" + r.ready + "' is not a label");
      } else if (!r.ready.empty()) {
        throw ScenarioError("register '" + r.name + "' is not an agent but has a ready label");
      }
    }
  }

  std::vector<std::string> check_targets(std::size_t step, const std::vector<std::string>& targets) const {
    if (targets.empty()) fail(step, "no target registers");
    std::set<std::string> seen;
    for (const auto& t : targets) {
      reg(step, t);
      if (!seen.insert(t).second) fail(step, "register '" + t + "' listed twice");
    }
    return targets;
  }

  /// Local decomposition for a spec over `local`.
  static SubspaceDecomposition local_spec(std::size_t step, const SpecText& spec, const LayoutPtr& local) {
    if (spec.entries.empty()) fail(step, "empty measurement");
    std::vector<SubspaceDecomposition::Block> blocks;
    for (const auto& e : spec.entries) {
      if (e.amplitudes.size() != local->dim())
        fail(step, "outcome '" + e.label + "' has " + std::to_string(e.amplitudes.size()) +
                       " amplitudes, expected " + std::to_string(local->dim()));
      StateVector v(local, detail::amplitude_vector(e.amplitudes));
      auto it = std::find_if(blocks.begin(), blocks.end(), [&](const auto& b) { return b.label == e.label; });
      if (it != blocks.end()) {
        if (spec.kind == SpecText::Kind::kBasis) fail(step, "outcome '" + e.label + "' listed twice");
        it->vectors.push_back(std::move(v));
      } else {
        blocks.push_back({e.label, {std::move(v)}});
      }
    }
    try {
      return SubspaceDecomposition(local, std::move(blocks));
    } catch (const Error& err) {
      fail(step, std::string("invalid measurement: ") + err.what());
    }
  }

  static CVector prepared(std::size_t step, const std::vector<Amplitude>& amps, std::size_t dim,
                          const std::string& what) {
    if (amps.size() != dim)
      fail(step, what + " has " + std::to_string(amps.size()) + " amplitudes, expected " + std::to_string(dim));
    CVector v = detail::amplitude_vector(amps);
    const double n = v.norm();
    if (std::abs(n - 1.0) > kPrepareNormTolerance)
      fail(step, what + " has norm " + std::to_string(n) + ", expected 1");
    return v / n;
  }

  void compile() {
    check_registers();
    std::vector<Factor> factors;
    for (const auto& r : registers_) factors.push_back({r.name, r.labels});
    LayoutPtr layout = make_layout(std::move(factors));
    std::vector<std::size_t> digits;
    for (const auto& r : registers_) digits.push_back(r.agent ? layout->outcome_index(layout->position(r.name), r.ready) : 0);
    auto initial = StateVector::basis_state(layout, layout->index(digits));
    auto out = std::make_shared<CompiledScenario>(CompiledScenario{layout, std::move(initial), {}, {}});

    std::set<std::string> touched;
    std::set<std::string> measured_agents;
    std::set<std::string> record_names;
    for (std::size_t i = 0; i < steps_.size(); ++i) {
      CompiledStep cs;
      std::visit([&](const auto& s) { compile_step(i, s, *out, cs, touched, measured_agents, record_names); },
                 steps_[i]);
      out->steps.push_back(std::move(cs));
    }
    compiled_ = std::move(out);
  }

  void require_fresh_system(std::size_t step, const std::string& target, const std::set<std::string>& touched) const {
    if (reg(step, target).agent) fail(step, "cannot prepare agent register '" + target + "'");
    if (touched.count(target)) fail(step, "register '" + target + "' was already used before this preparation");
  }

  void add_record(std::size_t step, const std::string& name, std::set<std::string>& names) const {
    if (name.empty()) fail(step, "missing record name");
    if (!names.insert(name).second) fail(step, "record '" + name + "' written twice");
  }

  void compile_step(std::size_t i, const Prepare& s, CompiledScenario& out, CompiledStep& cs,
                    std::set<std::string>& touched, std::set<std::string>&, std::set<std::string>&) const {
    require_fresh_system(i, s.target, touched);
    const Embedding emb(out.layout, {s.target});
    const CVector v = prepared(i, s.amplitudes, emb.local()->dim(), "prepared state");
    cs.kind = CompiledStep::Kind::kUnitary;
    cs.unitary.emplace(out.layout, emb.embed_operator(complete_to_unitary(v)));
    touched.insert(s.target);
  }

  void compile_step(std::size_t i, const ApplyUnitary& s, CompiledScenario& out, CompiledStep& cs,
                    std::set<std::string>& touched, std::set<std::string>&, std::set<std::string>&) const {
    check_targets(i, s.targets);
    for (const auto& t : s.targets)
      if (reg(i, t).agent) fail(i, "unitary may not act on agent register '" + t + "'");
    const Embedding emb(out.layout, s.targets);
    const std::size_t d = emb.local()->dim();
    if (s.rows.size() != d) fail(i, "matrix has " + std::to_string(s.rows.size()) + " rows, expected " + std::to_string(d));
    CMatrix m(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    for (std::size_t r = 0; r < d; ++r) {
      if (s.rows[r].size() != d)
        fail(i, "matrix row " + std::to_string(r + 1) + " has " + std::to_string(s.rows[r].size()) +
                    " entries, expected " + std::to_string(d));
      for (std::size_t c = 0; c < d; ++c) m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = s.rows[r][c].value;
    }
    try {
      UnitaryMap local(emb.local(), m);
    } catch (const Error& err) {
      fail(i, err.what());
    }
    cs.kind = CompiledStep::Kind::kUnitary;
    cs.unitary.emplace(out.layout, emb.embed_operator(m));
    touched.insert(s.targets.begin(), s.targets.end());
  }

  void compile_step(std::size_t i, const AgentMeasure& s, CompiledScenario& out, CompiledStep& cs,
                    std::set<std::string>& touched, std::set<std::string>& measured,
                    std::set<std::string>& records) const {
    const Register& agent = reg(i, s.agent);
    if (!agent.agent) fail(i, "register '" + s.agent + "' is not an agent");
    if (!measured.insert(s.agent).second) fail(i, "agent '" + s.agent + "' already measured");
    check_targets(i, s.targets);
    for (const auto& t : s.targets)
      if (t == s.agent) fail(i, "agent '" + s.agent + "' cannot measure its own register");
    add_record(i, s.record, records);

    const LayoutPtr local = sub_layout(*out.layout, s.targets);
    const SubspaceDecomposition d = local_spec(i, s.spec, local);
    const std::size_t apos = out.layout->position(s.agent);
    const std::size_t ad = agent.labels.size();
    const std::size_t ready = out.layout->outcome_index(apos, agent.ready);

    CMatrix op = CMatrix::Zero(static_cast<Eigen::Index>(local->dim() * ad), static_cast<Eigen::Index>(local->dim() * ad));
    for (std::size_t j = 0; j < d.size(); ++j) {
      const auto& label = d.block(j).label;
      auto it = std::find(agent.labels.begin(), agent.labels.end(), label);
      if (it == agent.labels.end()) fail(i, "outcome '" + label + "' is not a label of agent '" + s.agent + "'");
      const std::size_t shift = (static_cast<std::size_t>(it - agent.labels.begin()) + ad - ready) % ad;
      CMatrix x = CMatrix::Zero(static_cast<Eigen::Index>(ad), static_cast<Eigen::Index>(ad));
      for (std::size_t r = 0; r < ad; ++r) x(static_cast<Eigen::Index>((r + shift) % ad), static_cast<Eigen::Index>(r)) = 1.0;
      op += detail::kron(d.projector(j), x);
    }
    std::vector<std::string> local_labels = s.targets;
    local_labels.push_back(s.agent);
    const Embedding emb(out.layout, local_labels);
    cs.kind = CompiledStep::Kind::kAgentMeasure;
    cs.unitary.emplace(out.layout, emb.embed_operator(op));
    cs.induced.emplace(lift_decomposition(d, out.layout));
    const LayoutPtr alayout = sub_layout(*out.layout, std::vector<std::string>{s.agent});
    cs.outcomes.emplace(lift_decomposition(OrthonormalBasis::computational(alayout), out.layout));
    cs.record = out.records.size();
    out.records.push_back({s.record, i, true, s.agent, agent.labels});
    touched.insert(s.targets.begin(), s.targets.end());
    touched.insert(s.agent);
  }

  void compile_step(std::size_t i, const ControlledPrepare& s, CompiledScenario& out, CompiledStep& cs,
                    std::set<std::string>& touched, std::set<std::string>&, std::set<std::string>&) const {
    require_fresh_system(i, s.target, touched);
    const auto r = out.find_record(s.control);
    if (!r || !out.records[*r].agent) fail(i, "control '" + s.control + "' is not an earlier agent record");
    const RecordInfo& rec = out.records[*r];
    const Embedding emb(out.layout, {rec.register_name, s.target});
    const std::size_t ad = rec.labels.size();
    const std::size_t td = emb.local()->dim() / ad;
    std::vector<std::optional<CMatrix>> per_label(ad);
    for (const auto& c : s.cases) {
      auto it = std::find(rec.labels.begin(), rec.labels.end(), c.label);
      if (it == rec.labels.end()) fail(i, "'" + c.label + "' is not a label of record '" + s.control + "'");
      auto& slot = per_label[static_cast<std::size_t>(it - rec.labels.begin())];
      if (slot) fail(i, "case '" + c.label + "' listed twice");
      slot = complete_to_unitary(prepared(i, c.amplitudes, td, "case '" + c.label + "'"));
    }
    // Every label the measurement can write needs a case.
    const auto& am = std::get<AgentMeasure>(steps_[rec.step]);
    for (const auto& e : am.spec.entries) {
      const auto j = static_cast<std::size_t>(std::find(rec.labels.begin(), rec.labels.end(), e.label) - rec.labels.begin());
      if (!per_label[j]) fail(i, "no case for outcome '" + e.label + "' of record '" + s.control + "'");
    }
    CMatrix op = CMatrix::Zero(static_cast<Eigen::Index>(ad * td), static_cast<Eigen::Index>(ad * td));
    for (std::size_t a = 0; a < ad; ++a) {
      CMatrix p = CMatrix::Zero(static_cast<Eigen::Index>(ad), static_cast<Eigen::Index>(ad));
      p(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(a)) = 1.0;
      op += detail::kron(p, per_label[a] ? *per_label[a] : CMatrix::Identity(static_cast<Eigen::Index>(td), static_cast<Eigen::Index>(td)));
    }
    cs.kind = CompiledStep::Kind::kUnitary;
    cs.unitary.emplace(out.layout, emb.embed_operator(op));
    touched.insert(s.target);
  }

  void compile_step(std::size_t i, const ExternalMeasure& s, CompiledScenario& out, CompiledStep& cs,
                    std::set<std::string>& touched, std::set<std::string>&, std::set<std::string>& records) const {
    check_targets(i, s.targets);
    add_record(i, s.record, records);
    const LayoutPtr local = sub_layout(*out.layout, s.targets);
    const SubspaceDecomposition d = local_spec(i, s.spec, local);
    cs.kind = CompiledStep::Kind::kExternalMeasure;
    cs.outcomes.emplace(lift_decomposition(d, out.layout));
    cs.resolves.resize(d.size());
    for (std::size_t r = 0; r < out.records.size(); ++r) {
      const RecordInfo& rec = out.records[r];
      if (!rec.agent) continue;
      auto pos = std::find(s.targets.begin(), s.targets.end(), rec.register_name);
      if (pos == s.targets.end()) continue;
      const std::size_t lp = static_cast<std::size_t>(pos - s.targets.begin());
      for (std::size_t j = 0; j < d.size(); ++j)
        if (auto label = settled_label(d.block(j), *local, lp)) cs.resolves[j].push_back({r, *label});
    }
    cs.record = out.records.size();
    out.records.push_back({s.record, i, false, "", d.labels()});
    touched.insert(s.targets.begin(), s.targets.end());
  }

  /// The label of factor `pos` that every vector of `b` sits on, if any.
  static std::optional<std::size_t> settled_label(const SubspaceDecomposition::Block& b, const SpaceLayout& local,
                                                  std::size_t pos) {
    std::optional<std::size_t> found;
    for (const auto& v : b.vectors) {
      std::vector<double> weight(local.factor(pos).dim(), 0.0);
      for (std::size_t k = 0; k < v.dim(); ++k) weight[local.digits(k)[pos]] += std::norm(v[k]);
      std::optional<std::size_t> here;
      for (std::size_t l = 0; l < weight.size(); ++l)
        if (weight[l] >= 1.0 - kResolutionTolerance) here = l;
      if (!here || (found && *found != *here)) return std::nullopt;
      found = here;
    }
    return found;
  }

  std::vector<Register> registers_;
  std::vector<Step> steps_;
  std::shared_ptr<const CompiledScenario> compiled_;
};

}  // namespace wignerlab
