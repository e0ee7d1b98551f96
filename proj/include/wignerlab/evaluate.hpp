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
 * Exact evaluation of scenarios by depth-first branch enumeration, seeded
 * sampling over the resulting branch tree, conditional probabilities with a
 * validity flag, and the per-agent collapse audit.
 *
 * Under kUnitaryAgents an agent measurement only entangles; its record stays
 * unresolved until an external outcome block pins the agent register to one
 * label. Under kCollapseOnRecord agent measurements also split branches.
 */

#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "wignerlab/errors.hpp"
#include "wignerlab/qcore.hpp"
#include "wignerlab/rng.hpp"
#include "wignerlab/scenario.hpp"

namespace wignerlab {

/// Branches lighter than this are dropped.
inline constexpr double kPruneWeight = 1e-15;

/// Tolerance on total branch weight per step and on policy comparisons.
inline constexpr double kWeightTolerance = 1e-9;

enum class Policy { kUnitaryAgents, kCollapseOnRecord };

inline std::string_view policy_name(Policy p) {
  return p == Policy::kUnitaryAgents ? "unitary-agents" : "collapse-on-record";
}

inline std::optional<Policy> parse_policy(std::string_view s) {
  if (s == "unitary-agents" || s == "unitary") return Policy::kUnitaryAgents;
  if (s == "collapse-on-record" || s == "collapse" || s == "naive") return Policy::kCollapseOnRecord;
  return std::nullopt;
}

/// One entry per record, in record order; nullopt is unresolved.
using RecordTuple = std::vector<std::optional<std::size_t>>;

struct Branch {
  RecordTuple records;
  double weight = 0.0;
  StateVector state;
};

struct StepAnnotation {
  std::size_t step = 0;
  std::string kind;
  std::size_t branches_in = 0;
  double weight_in = 0.0;
  std::size_t pruned = 0;
  double pruned_weight = 0.0;
};

/// A split point. Leaves point into RunResult::branches.
struct BranchNode {
  std::vector<double> probabilities;
  std::vector<std::size_t> children;
  std::size_t leaf = kNoRecord;
};

struct RunResult {
  std::shared_ptr<const CompiledScenario> compiled;
  Policy policy = Policy::kUnitaryAgents;
  /// Per step: whether an agent measurement there collapses.
  std::vector<bool> collapse;
  std::map<RecordTuple, double> joint;
  std::vector<Branch> branches;
  std::vector<StepAnnotation> annotations;
  std::vector<BranchNode> tree;

  const std::vector<RecordInfo>& records() const { return compiled->records; }

  /// Joint probabilities of the records at `indices`, other records summed out.
  std::map<RecordTuple, double> marginal(const std::vector<std::size_t>& indices) const {
    std::map<RecordTuple, double> out;
    for (const auto& [t, p] : joint) {
      RecordTuple k;
      for (std::size_t i : indices) k.push_back(t.at(i));
      out[k] += p;
    }
    return out;
  }

  /// True when `record` has a value in every branch.
  bool resolved(std::size_t record) const {
    for (const auto& [t, p] : joint)
      if (!t.at(record)) return false;
    return true;
  }
};

namespace detail {

class Evaluator {
 public:
  Evaluator(std::shared_ptr<const CompiledScenario> c, std::vector<bool> collapse, std::size_t stop)
      : c_(std::move(c)), collapse_(std::move(collapse)), stop_(std::min(stop, c_->steps.size())) {}

  RunResult run(Policy policy) {
    RunResult r;
    r.compiled = c_;
    r.policy = policy;
    r.collapse = collapse_;
    ann_.resize(stop_ + 1);
    for (std::size_t i = 0; i <= stop_; ++i) {
      ann_[i].step = i;
      ann_[i].kind = i < c_->steps.size() ? kind_name(i) : "end";
    }
    r.tree.emplace_back();
    tree_ = &r.tree;
    branches_ = &r.branches;
    visit(0, Branch{RecordTuple(c_->records.size()), 1.0, c_->initial}, 0);
    for (const auto& a : ann_)
      if (std::abs(a.weight_in + pruned_before(a.step) - 1.0) > kWeightTolerance ||
          std::abs(a.weight_in - 1.0) > kWeightTolerance)
        throw NumericalError("branch weight " + std::to_string(a.weight_in) + " before step " +
                             std::to_string(a.step + 1));
    for (const auto& b : r.branches) r.joint[b.records] += b.weight;
    r.annotations = std::move(ann_);
    return r;
  }

 private:
  std::string kind_name(std::size_t i) const {
    switch (c_->steps[i].kind) {
      case CompiledStep::Kind::kAgentMeasure: return collapse_[i] ? "agent measure (collapse)" : "agent measure";
      case CompiledStep::Kind::kExternalMeasure: return "external measure";
      default: return "unitary";
    }
  }

  double pruned_before(std::size_t step) const {
    double w = 0.0;
    for (std::size_t i = 0; i < step; ++i) w += ann_[i].pruned_weight;
    return w;
  }

  void visit(std::size_t i, Branch b, std::size_t node) {
    ann_[i].branches_in += 1;
    ann_[i].weight_in += b.weight;
    if (i == stop_) {
      (*tree_)[node].leaf = branches_->size();
      branches_->push_back(std::move(b));
      return;
    }
    const CompiledStep& s = c_->steps[i];
    if (s.unitary) b.state = StateVector(b.state.layout_ptr(), s.unitary->matrix() * b.state.amplitudes());
    const bool splits = s.kind == CompiledStep::Kind::kExternalMeasure ||
                        (s.kind == CompiledStep::Kind::kAgentMeasure && collapse_[i]);
    if (!splits) {
      visit(i + 1, std::move(b), node);
      return;
    }
    const SubspaceDecomposition& d = s.outcomes->decomposition();
    std::vector<CVector> parts;
    std::vector<double> probs;
    double total = 0.0;
    for (std::size_t j = 0; j < d.size(); ++j) {
      parts.push_back(d.project(j, b.state.amplitudes()));
      probs.push_back(parts.back().squaredNorm());
      total += probs.back();
    }
    if (std::abs(total - 1.0) > kWeightTolerance)
      throw NumericalError("outcome probabilities sum to " + std::to_string(total) + " at step " +
                           std::to_string(i + 1));
    std::vector<std::size_t> keep;
    std::size_t heaviest = 0;
    for (std::size_t j = 0; j < d.size(); ++j) {
      if (probs[j] > probs[heaviest]) heaviest = j;
      if (b.weight * probs[j] >= kPruneWeight) keep.push_back(j);
    }
    if (keep.empty()) keep.push_back(heaviest);
    double kept = 0.0;
    for (std::size_t j : keep) kept += probs[j];
    for (std::size_t j = 0; j < d.size(); ++j) {
      if (std::find(keep.begin(), keep.end(), j) != keep.end()) continue;
      ann_[i].pruned += 1;
      ann_[i].pruned_weight += b.weight * probs[j];
    }
    for (std::size_t j : keep) {
      Branch child{b.records, b.weight * probs[j], StateVector(b.state.layout_ptr(), parts[j] / std::sqrt(probs[j]))};
      child.records[s.record] = j;
      if (s.kind == CompiledStep::Kind::kExternalMeasure)
        for (const auto& [rec, label] : s.resolves[j])
          if (!child.records[rec]) child.records[rec] = label;
      const std::size_t child_node = tree_->size();
      tree_->emplace_back();
      (*tree_)[node].probabilities.push_back(probs[j] / kept);
      (*tree_)[node].children.push_back(child_node);
      visit(i + 1, std::move(child), child_node);
    }
  }

  std::shared_ptr<const CompiledScenario> c_;
  std::vector<bool> collapse_;
  std::size_t stop_;
  std::vector<StepAnnotation> ann_;
  std::vector<BranchNode>* tree_ = nullptr;
  std::vector<Branch>* branches_ = nullptr;
};

inline std::vector<bool> policy_mask(const CompiledScenario& c, Policy p) {
  std::vector<bool> m(c.steps.size(), false);
  if (p == Policy::kCollapseOnRecord)
    for (std::size_t i = 0; i < m.size(); ++i) m[i] = c.steps[i].kind == CompiledStep::Kind::kAgentMeasure;
  return m;
}

}  // namespace detail

/// Evaluation with an explicit choice of which agent steps collapse, stopped
/// before step `stop` (the branches then hold the pre-step states).
inline RunResult evaluate_with(std::shared_ptr<const CompiledScenario> c, std::vector<bool> collapse,
                               std::size_t stop = kNoRecord) {
  if (collapse.size() != c->steps.size()) throw ArgumentError("collapse mask has the wrong length");
  const bool any = std::find(collapse.begin(), collapse.end(), true) != collapse.end();
  detail::Evaluator e(std::move(c), std::move(collapse), stop);
  return e.run(any ? Policy::kCollapseOnRecord : Policy::kUnitaryAgents);
}

inline RunResult evaluate(const Scenario& s, Policy p) {
  auto r = evaluate_with(s.compiled_ptr(), detail::policy_mask(s.compiled(), p));
  r.policy = p;
  return r;
}

/// Largest absolute difference between the joints of two runs restricted to
/// the records at `indices`.
inline double joint_gap(const RunResult& a, const RunResult& b, const std::vector<std::size_t>& indices) {
  const auto ma = a.marginal(indices);
  const auto mb = b.marginal(indices);
  double g = 0.0;
  for (const auto& [k, p] : ma) {
    auto it = mb.find(k);
    g = std::max(g, std::abs(p - (it == mb.end() ? 0.0 : it->second)));
  }
  for (const auto& [k, p] : mb)
    if (!ma.count(k)) g = std::max(g, p);
  return g;
}

/// External records written at or before `step`.
inline std::vector<std::size_t> external_records_through(const CompiledScenario& c, std::size_t step) {
  std::vector<std::size_t> out;
  for (std::size_t r = 0; r < c.records.size(); ++r)
    if (!c.records[r].agent && c.records[r].step <= step) out.push_back(r);
  return out;
}

// ---------------------------------------------------------------- sampling

struct SampleResult {
  std::shared_ptr<const CompiledScenario> compiled;
  Policy policy = Policy::kUnitaryAgents;
  std::uint64_t n = 0;
  std::uint64_t seed = 0;
  std::map<RecordTuple, std::uint64_t> counts;
};

/// Draws one leaf per repetition by walking the branch tree with the
/// repetition's own stream (see rng.hpp).
inline SampleResult sample(const RunResult& r, std::uint64_t n, std::uint64_t seed) {
  if (n == 0) throw ArgumentError("sample needs n >= 1");
  SampleResult out{r.compiled, r.policy, n, seed, {}};
  for (std::uint64_t rep = 0; rep < n; ++rep) {
    SplitMix64 rng = repetition_stream(seed, rep);
    std::size_t node = 0;
    while (r.tree[node].leaf == kNoRecord) {
      const BranchNode& bn = r.tree[node];
      const double u = rng.uniform();
      double acc = 0.0;
      std::size_t pick = bn.children.size() - 1;
      for (std::size_t j = 0; j < bn.children.size(); ++j) {
        acc += bn.probabilities[j];
        if (u < acc) {
          pick = j;
          break;
        }
      }
      node = bn.children[pick];
    }
    out.counts[r.branches[r.tree[node].leaf].records] += 1;
  }
  return out;
}

inline SampleResult sample(const Scenario& s, Policy p, std::uint64_t n, std::uint64_t seed) {
  return sample(evaluate(s, p), n, seed);
}

// ---------------------------------------------------- conditional queries

/// Conjunction of "record == label" terms.
struct Predicate {
  std::vector<std::pair<std::string, std::string>> terms;
};

inline Predicate record_is(std::string record, std::string label) {
  return Predicate{{{std::move(record), std::move(label)}}};
}

inline Predicate operator&&(Predicate a, const Predicate& b) {
  a.terms.insert(a.terms.end(), b.terms.begin(), b.terms.end());
  return a;
}

struct ConditionalResult {
  bool valid = false;
  /// NaN when invalid.
  double value = std::numeric_limits<double>::quiet_NaN();
  /// Agent records collapsed to answer the query.
  std::vector<std::string> collapsed;
  /// Last step whose record the query mentions.
  std::size_t horizon = 0;
  /// Largest change in the external joint up to the horizon caused by the
  /// collapse; nonzero only matters when invalid.
  double gap = 0.0;
};

namespace detail {

struct ResolvedTerm {
  std::size_t record;
  std::size_t label;
};

inline std::vector<ResolvedTerm> resolve_terms(const CompiledScenario& c, const Predicate& p) {
  std::vector<ResolvedTerm> out;
  for (const auto& [rec, label] : p.terms) {
    const std::size_t r = c.record_index(rec);
    out.push_back({r, c.label_index(r, label)});
  }
  return out;
}

inline bool satisfies(const RecordTuple& t, const std::vector<ResolvedTerm>& terms) {
  for (const auto& term : terms)
    if (!t[term.record] || *t[term.record] != term.label) return false;
  return true;
}

inline double probability_of(const RunResult& r, const std::vector<ResolvedTerm>& terms) {
  double p = 0.0;
  for (const auto& [t, w] : r.joint)
    if (satisfies(t, terms)) p += w;
  return p;
}

}  // namespace detail

/// Probability of `p` in the run's joint; records unresolved in a branch do
/// not satisfy any term.
inline double probability(const RunResult& r, const Predicate& p) {
  return detail::probability_of(r, detail::resolve_terms(*r.compiled, p));
}

/// P(event | given). Agent records the query mentions that are unresolved in
/// some branch are collapsed at their own step; the query is valid iff that
/// leaves the joint of every external record written up to the query horizon
/// unchanged (within `tolerance`). The value is then read from the collapsed
/// run. Throws ZeroProbabilityError when the condition has probability 0.
inline ConditionalResult conditional_probability(const RunResult& r, const Predicate& event, const Predicate& given,
                                                 double tolerance = kWeightTolerance) {
  const CompiledScenario& c = *r.compiled;
  const auto ev = detail::resolve_terms(c, event);
  const auto gv = detail::resolve_terms(c, given);
  ConditionalResult out;
  std::vector<bool> mask = r.collapse;
  bool extra = false;
  for (const auto* list : {&ev, &gv})
    for (const auto& t : *list) {
      const RecordInfo& info = c.records[t.record];
      out.horizon = std::max(out.horizon, info.step);
      if (info.agent && !r.resolved(t.record) && !mask[info.step]) {
        mask[info.step] = true;
        extra = true;
        out.collapsed.push_back(info.name);
      }
    }
  std::optional<RunResult> collapsed;
  if (extra) {
    collapsed = evaluate_with(r.compiled, mask);
    out.gap = joint_gap(r, *collapsed, external_records_through(c, out.horizon));
    if (out.gap > tolerance) return out;
  }
  const RunResult& use = collapsed ? *collapsed : r;
  auto both = ev;
  both.insert(both.end(), gv.begin(), gv.end());
  const double pg = detail::probability_of(use, gv);
  if (pg < kMinCollapseProbability) throw ZeroProbabilityError("conditioning event has probability 0");
  out.valid = true;
  out.value = detail::probability_of(use, both) / pg;
  return out;
}

// -------------------------------------------------------------------- audit

struct LaterCheck {
  std::size_t record = 0;
  /// Gap between the unitary run and the run collapsing only this agent.
  double isolated_gap = 0.0;
  /// Gap between collapsing all earlier agents and collapsing them plus this one.
  double cumulative_gap = 0.0;
};

struct AuditPair {
  std::size_t agent_record = 0;
  std::size_t later_record = 0;
  double gap = 0.0;
};

struct AgentAudit {
  std::size_t record = 0;
  std::vector<LaterCheck> checks;
  std::vector<AuditPair> unsafe;

  bool safe() const { return unsafe.empty(); }
};

struct AuditReport {
  std::shared_ptr<const CompiledScenario> compiled;
  double tolerance = kWeightTolerance;
  std::vector<AgentAudit> agents;

  bool all_safe() const {
    for (const auto& a : agents)
      if (!a.safe()) return false;
    return true;
  }

  std::vector<AuditPair> unsafe_pairs() const {
    std::vector<AuditPair> out;
    for (const auto& a : agents) out.insert(out.end(), a.unsafe.begin(), a.unsafe.end());
    return out;
  }
};

/// For every agent measurement, compares the external joint (cumulative over
/// externals up to each later external step) with and without collapsing the
/// agent's record, once in isolation and once on top of collapsing all
/// earlier agents. The agent is unsafe against the first later external at
/// which either comparison diverges. If no agent is unsafe, both policies
/// give the same external joint.
inline AuditReport audit(const Scenario& s, double tolerance = kWeightTolerance) {
  if (!(tolerance > 0.0)) throw ArgumentError("tolerance must be positive");
  const auto cp = s.compiled_ptr();
  const CompiledScenario& c = *cp;
  std::map<std::vector<bool>, std::shared_ptr<const RunResult>> cache;
  auto run = [&](const std::vector<bool>& mask) {
    auto it = cache.find(mask);
    if (it == cache.end()) it = cache.emplace(mask, std::make_shared<const RunResult>(evaluate_with(cp, mask))).first;
    return it->second;
  };
  AuditReport report{cp, tolerance, {}};
  const std::vector<bool> none(c.steps.size(), false);
  std::vector<bool> earlier = none;
  for (std::size_t r = 0; r < c.records.size(); ++r) {
    if (!c.records[r].agent) continue;
    const std::size_t step = c.records[r].step;
    std::vector<bool> alone = none;
    alone[step] = true;
    std::vector<bool> upto = earlier;
    upto[step] = true;
    const auto base = run(none);
    const auto iso = run(alone);
    const auto before = run(earlier);
    const auto after = run(upto);
    AgentAudit a{r, {}, {}};
    bool iso_hit = false, cum_hit = false;
    for (std::size_t k = 0; k < c.records.size(); ++k) {
      if (c.records[k].agent || c.records[k].step < step) continue;
      const auto idx = external_records_through(c, c.records[k].step);
      LaterCheck chk{k, joint_gap(*base, *iso, idx), joint_gap(*before, *after, idx)};
      if (!iso_hit && chk.isolated_gap > tolerance) {
        iso_hit = true;
        a.unsafe.push_back({r, k, chk.isolated_gap});
      }
      if (!cum_hit && chk.cumulative_gap > tolerance) {
        cum_hit = true;
        const bool same = !a.unsafe.empty() && a.unsafe.back().later_record == k;
        if (!same) a.unsafe.push_back({r, k, chk.cumulative_gap});
      }
      a.checks.push_back(chk);
    }
    report.agents.push_back(std::move(a));
    earlier[step] = true;
  }
  return report;
}

}  // namespace wignerlab
