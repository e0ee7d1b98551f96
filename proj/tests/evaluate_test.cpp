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

#include <gtest/gtest.h>

#include <cmath>

#include "test_support.hpp"

namespace wignerlab {
namespace {

double joint_at(const RunResult& r, const std::vector<std::string>& names, const std::vector<std::string>& labels) {
  std::vector<std::size_t> idx;
  RecordTuple key;
  for (std::size_t k = 0; k < names.size(); ++k) {
    idx.push_back(r.compiled->record_index(names[k]));
    key.push_back(r.compiled->label_index(idx.back(), labels[k]));
  }
  const auto m = r.marginal(idx);
  auto it = m.find(key);
  return it == m.end() ? 0.0 : it->second;
}

double wjoint(const RunResult& r, const char* wbar, const char* w) { return joint_at(r, {"Wbar", "W"}, {wbar, w}); }

TEST(Policy, NamesAndParsing) {
  EXPECT_EQ(policy_name(Policy::kUnitaryAgents), "unitary-agents");
  EXPECT_EQ(policy_name(Policy::kCollapseOnRecord), "collapse-on-record");
  EXPECT_EQ(parse_policy("naive"), Policy::kCollapseOnRecord);
  EXPECT_EQ(parse_policy("unitary-agents"), Policy::kUnitaryAgents);
  EXPECT_FALSE(parse_policy("bogus").has_value());
}

TEST(Evaluate, FrUnitaryJoint) {
  const RunResult r = evaluate(build_fr_scenario(), Policy::kUnitaryAgents);
  EXPECT_NEAR(wjoint(r, "ok", "ok"), 1.0 / 12, 1e-12);
  EXPECT_NEAR(wjoint(r, "ok", "fail"), 1.0 / 12, 1e-12);
  EXPECT_NEAR(wjoint(r, "fail", "ok"), 1.0 / 12, 1e-12);
  EXPECT_NEAR(wjoint(r, "fail", "fail"), 9.0 / 12, 1e-12);
  // The agents' records are never settled by Wbar or W.
  EXPECT_FALSE(r.resolved(r.compiled->record_index("Fbar")));
  EXPECT_FALSE(r.resolved(r.compiled->record_index("F")));
}

TEST(Evaluate, FrStateAfterFIsPsi) {
  const FrStates st = FrStates::make();
  const StateVector psi = state_before(build_fr_scenario(), kFrStepsToPsi);
  EXPECT_LE(max_abs_diff(psi, st.Psi), 1e-12);
}

// Every agent measurement collapses: heads (1/3) leaves φ_h⊗φ_d, tails
// splits on F into φ_t⊗φ_u and φ_t⊗φ_d (1/3 each). Each of the three
// product states gives 1/4 on every (Wbar, W) pair.
TEST(Evaluate, FrCollapseOnRecordJointIsUniform) {
  const RunResult r = evaluate(build_fr_scenario(), Policy::kCollapseOnRecord);
  for (const char* a : {"ok", "fail"})
    for (const char* b : {"ok", "fail"}) EXPECT_NEAR(wjoint(r, a, b), 0.25, 1e-12);
  EXPECT_EQ(r.joint.size(), 12u);
  EXPECT_TRUE(r.resolved(r.compiled->record_index("Fbar")));
  EXPECT_TRUE(r.resolved(r.compiled->record_index("F")));
}

// Collapsing Fbar's record alone (F kept unitary): heads (1/3) gives the
// uniform 1/4, tails (2/3) is φ_t⊗φ_f and gives (0, 1/2, 0, 1/2).
TEST(Evaluate, FrCollapsingOnlyFbarGivesOneFiveOneFive) {
  const Scenario s = build_fr_scenario();
  std::vector<bool> mask(s.steps().size(), false);
  mask[1] = true;
  const RunResult r = evaluate_with(s.compiled_ptr(), mask);
  EXPECT_NEAR(wjoint(r, "ok", "ok"), 1.0 / 12, 1e-12);
  EXPECT_NEAR(wjoint(r, "ok", "fail"), 5.0 / 12, 1e-12);
  EXPECT_NEAR(wjoint(r, "fail", "ok"), 1.0 / 12, 1e-12);
  EXPECT_NEAR(wjoint(r, "fail", "fail"), 5.0 / 12, 1e-12);
  const RunResult u = evaluate(s, Policy::kUnitaryAgents);
  EXPECT_NEAR(wjoint(r, "ok", "ok"), wjoint(u, "ok", "ok"), 1e-12);
  EXPECT_NEAR(std::abs(wjoint(r, "ok", "fail") - wjoint(u, "ok", "fail")), 4.0 / 12, 1e-12);
  EXPECT_NEAR(std::abs(wjoint(r, "fail", "fail") - wjoint(u, "fail", "fail")), 4.0 / 12, 1e-12);
}

TEST(Evaluate, SinglePrepareAndMatchingMeasurementIsIndicator) {
  const Scenario s = parse_scenario(
      "register q labels=a,b,c\n"
      "prepare q : 0, 1, 0\n"
      "xmeasure on q basis { a: 1, 0, 0 ; b: 0, 1, 0 ; c: 0, 0, 1 } record M\n");
  const RunResult r = evaluate(s, Policy::kUnitaryAgents);
  ASSERT_EQ(r.joint.size(), 1u);
  EXPECT_EQ(r.joint.begin()->first, (RecordTuple{1}));
  EXPECT_NEAR(r.joint.begin()->second, 1.0, 1e-15);
  // The two zero-weight outcomes were pruned.
  EXPECT_EQ(r.annotations.at(1).pruned, 2u);
}

TEST(Evaluate, AgentRegisterIsWrittenByTheMeasurement) {
  const Scenario s = parse_scenario(
      "register q labels=0,1\n"
      "agent A ready=r labels=r,x,y\n"
      "prepare q : 0, 1\n"
      "ameasure A on q basis { x: 1, 0 ; y: 0, 1 } record A\n"
      "xmeasure on A basis { r: 1, 0, 0 ; x: 0, 1, 0 ; y: 0, 0, 1 } record Look\n");
  const RunResult r = evaluate(s, Policy::kUnitaryAgents);
  EXPECT_NEAR(joint_at(r, {"Look"}, {"y"}), 1.0, 1e-15);
  // Reading the agent register resolves the agent's record structurally.
  EXPECT_TRUE(r.resolved(r.compiled->record_index("A")));
  EXPECT_NEAR(joint_at(r, {"A"}, {"y"}), 1.0, 1e-15);
}

TEST(Evaluate, WeightConservationProperty) {
  testing::Rng rng(3);
  for (int k = 0; k < 40; ++k) {
    const Scenario s = testing::random_scenario(rng);
    for (Policy p : {Policy::kUnitaryAgents, Policy::kCollapseOnRecord}) {
      const RunResult r = evaluate(s, p);
      ASSERT_EQ(r.annotations.size(), s.steps().size() + 1);
      for (const auto& a : r.annotations) EXPECT_NEAR(a.weight_in, 1.0, 1e-9);
      double total = 0.0;
      for (const auto& [t, w] : r.joint) total += w;
      EXPECT_NEAR(total, 1.0, 1e-9);
      for (const auto& b : r.branches) EXPECT_TRUE(b.state.is_normalized());
    }
  }
}

TEST(Evaluate, StopBeforeStepKeepsPreStepStates) {
  const Scenario s = build_fr_scenario();
  const RunResult r = evaluate_with(s.compiled_ptr(), std::vector<bool>(s.steps().size(), false), 5);
  ASSERT_EQ(r.branches.size(), 2u);  // split by Wbar only
  EXPECT_THROW(evaluate_with(s.compiled_ptr(), std::vector<bool>(2, false)), ArgumentError);
}

TEST(Evaluate, FootnoteBothPolicies) {
  const Scenario s = build_footnote_paradox();
  EXPECT_NEAR(joint_at(evaluate(s, Policy::kUnitaryAgents), {"W1"}, {"plus"}), 1.0, 1e-12);
  EXPECT_NEAR(joint_at(evaluate(s, Policy::kCollapseOnRecord), {"W1"}, {"plus"}), 0.5, 1e-12);
  EXPECT_NEAR(joint_at(evaluate(s, Policy::kCollapseOnRecord), {"W1"}, {"minus"}), 0.5, 1e-12);
}

TEST(Evaluate, FootnoteRepetitionsUnderCollapse) {
  for (std::size_t n = 1; n <= 4; ++n) {
    const Scenario s = build_footnote_paradox(n);
    std::vector<std::string> names, labels;
    for (std::size_t k = 1; k <= n; ++k) {
      names.push_back("W" + std::to_string(k));
      labels.push_back("plus");
    }
    EXPECT_NEAR(joint_at(evaluate(s, Policy::kCollapseOnRecord), names, labels), std::pow(0.5, static_cast<double>(n)),
                1e-12);
    EXPECT_NEAR(joint_at(evaluate(s, Policy::kUnitaryAgents), names, labels), 1.0, 1e-12);
  }
}

TEST(Evaluate, PolicyAgreementWhenAuditIsSafeProperty) {
  testing::Rng rng(4);
  int accepted = 0, rejected = 0;
  while (accepted < 25) {
    const Scenario s = testing::random_scenario(rng);
    if (!audit(s).all_safe()) {
      ++rejected;
      continue;
    }
    ++accepted;
    const RunResult u = evaluate(s, Policy::kUnitaryAgents);
    const RunResult c = evaluate(s, Policy::kCollapseOnRecord);
    EXPECT_LE(testing::joint_distance(testing::external_joint(u), testing::external_joint(c)), 1e-9);
  }
  EXPECT_GT(rejected, 0);
}

}  // namespace
}  // namespace wignerlab
