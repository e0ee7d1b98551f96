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

const double kS2 = 1.0 / std::sqrt(2.0);

TEST(FrStates, HadamardRelationsAndNorms) {
  const FrStates st = FrStates::make();
  EXPECT_LE(max_abs_diff(st.phi_obar, kS2 * (st.phi_h - st.phi_t)), 1e-12);
  EXPECT_LE(max_abs_diff(st.phi_fbar, kS2 * (st.phi_h + st.phi_t)), 1e-12);
  EXPECT_LE(max_abs_diff(st.phi_o, kS2 * (st.phi_d - st.phi_u)), 1e-12);
  EXPECT_LE(max_abs_diff(st.phi_f, kS2 * (st.phi_d + st.phi_u)), 1e-12);
  EXPECT_NEAR(st.Psi.norm(), 1.0, 1e-12);
  EXPECT_NEAR(st.Theta.norm(), 1.0, 1e-12);
  EXPECT_LE(max_abs_diff(tensor(st.psi_t, st.theta_t), st.phi_t), 1e-12);
  EXPECT_LE(max_abs_diff(tensor(st.psi_u, st.theta_u), st.phi_u), 1e-12);
  EXPECT_LE(max_abs_diff(tensor(st.psi_d, st.theta_d), st.phi_d), 1e-12);
}

TEST(FrStates, PsiAsTwoBranchSuperposition) {
  const FrStates st = FrStates::make();
  const StateVector two = (1.0 / std::sqrt(3.0)) * tensor(st.phi_h, st.phi_d) +
                          (std::sqrt(2.0) / std::sqrt(3.0)) * tensor(st.phi_t, st.phi_f);
  EXPECT_LE(max_abs_diff(two, st.Psi), 1e-12);
}

TEST(FrStates, ZeroAmplitudeFacts) {
  const FrStates st = FrStates::make();
  EXPECT_LE(std::abs(inner(st.Psi, tensor(st.phi_h, st.phi_u))), 1e-12);
  EXPECT_LE(std::abs(inner(st.Psi, tensor(st.phi_obar, st.phi_d))), 1e-12);
}

// Hand derivation: Wbar maps φ_o̅ ↦ φ_o̅⊗θ_o̅ and φ_f̅ ↦ φ_f̅⊗θ_f̅ on top of
// Ψ = Σ c (φ̄⊗φ) with c = (1,-1,1,3)/(2√3) over (o̅o, o̅f, f̅o, f̅f). Rewriting
// φ_o, φ_f in terms of φ_u, φ_d:
//   θ_o̅⊗φ_o̅⊗φ_u : (1·(-1) + (-1)·1)/(2√3·√2) = -1/√6
//   θ_o̅⊗φ_o̅⊗φ_d : (1 - 1)/(2√6) = 0
//   θ_f̅⊗φ_f̅⊗φ_u : (1·(-1) + 3·1)/(2√6) = 1/√6
//   θ_f̅⊗φ_f̅⊗φ_d : (1 + 3)/(2√6) = 2/√6
TEST(FrStates, ThetaCoefficientsByHand) {
  const FrStates st = FrStates::make();
  const double r6 = std::sqrt(6.0);
  const std::array<std::pair<StateVector, double>, 4> terms{{
      {tensor(tensor(st.phi_obar, st.phi_u), st.theta_obar), -1.0 / r6},
      {tensor(tensor(st.phi_obar, st.phi_d), st.theta_obar), 0.0},
      {tensor(tensor(st.phi_fbar, st.phi_u), st.theta_fbar), 1.0 / r6},
      {tensor(tensor(st.phi_fbar, st.phi_d), st.theta_fbar), 2.0 / r6},
  }};
  double norm2 = 0.0;
  for (const auto& [v, want] : terms) {
    const Complex c = inner(v, st.Theta);
    EXPECT_NEAR(std::abs(c - Complex{want}), 0.0, 1e-12);
    norm2 += std::norm(c);
  }
  EXPECT_NEAR(norm2, 1.0, 1e-12);
}

TEST(FrScenario, StructureAndOrder) {
  const Scenario s = build_fr_scenario();
  EXPECT_EQ(s.steps().size(), 6u);
  EXPECT_EQ(s.layout()->dim(), 16u);
  EXPECT_TRUE(std::holds_alternative<Prepare>(s.steps()[0]));
  EXPECT_TRUE(std::holds_alternative<AgentMeasure>(s.steps()[1]));
  EXPECT_TRUE(std::holds_alternative<ControlledPrepare>(s.steps()[2]));
  EXPECT_TRUE(std::holds_alternative<AgentMeasure>(s.steps()[3]));
  EXPECT_EQ(std::get<ExternalMeasure>(s.steps()[4]).record, "Wbar");
  EXPECT_EQ(std::get<ExternalMeasure>(s.steps()[5]).record, "W");
  const Scenario r = build_fr_scenario(FrOrder::kWFirst);
  EXPECT_EQ(std::get<ExternalMeasure>(r.steps()[4]).record, "W");
  EXPECT_FALSE(r == s);
}

TEST(FrDecompositions, JointLabelsAndLift) {
  const FrDecompositions dec = FrDecompositions::make();
  EXPECT_EQ(dec.joint.labels(), (std::vector<std::string>{"ok,ok", "ok,fail", "fail,ok", "fail,fail"}));
  EXPECT_EQ(dec.joint.decomposition().block(0).vectors.size(), 1u);
  EXPECT_EQ(dec.wbar.decomposition().block(0).vectors.size(), 4u);
  EXPECT_EQ(dec.htud.labels(), (std::vector<std::string>{"hu", "hd", "tu", "td", "other"}));
}

TEST(FrDecompositions, JointEqualsProductOfWbarAndW) {
  const FrStates st = FrStates::make();
  const FrDecompositions dec = FrDecompositions::make();
  testing::Rng rng(1);
  for (int k = 0; k < 10; ++k) {
    const StateVector psi = testing::random_state(rng, st.Psi.layout_ptr());
    const auto j = born_distribution(psi, dec.joint);
    // P(ok, ok) via sequential projections.
    const CVector v = dec.w.decomposition().project(0, dec.wbar.decomposition().project(0, psi.amplitudes()));
    EXPECT_NEAR(j.probability("ok,ok"), v.squaredNorm(), 1e-12);
  }
}

TEST(Statements, Verdicts) {
  const auto reps = statement_reports();
  EXPECT_EQ(reps[0].verdict, Verdict::kInvalidQuery);
  EXPECT_NEAR(reps[0].number("collapse_safety gap"), 4.0 / 12, 1e-12);
  EXPECT_EQ(reps[1].verdict, Verdict::kHolds);
  EXPECT_LE(reps[1].number("|<phi_h x phi_u, Psi>|"), 1e-12);
  EXPECT_LE(reps[1].number("P(Fbar=heads, F=up)"), 1e-12);
  EXPECT_EQ(reps[2].verdict, Verdict::kHolds);
  EXPECT_LE(reps[2].number("|<theta_obar x phi_obar x phi_d, Theta>|"), 1e-12);
  EXPECT_NEAR(reps[2].number("reversed order query gap"), 4.0 / 12, 1e-12);
  EXPECT_THROW(reps[2].number("nonexistent"), ArgumentError);
  EXPECT_EQ(verdict_name(Verdict::kInvalidQuery), "INVALID_QUERY");
}

TEST(Footnote, StructureAndRejectsZeroRepetitions) {
  const Scenario s = build_footnote_paradox();
  ASSERT_EQ(s.steps().size(), 3u);
  EXPECT_TRUE(std::holds_alternative<AgentMeasure>(s.steps()[1]));
  EXPECT_THROW(build_footnote_paradox(0), ArgumentError);
}

TEST(DoubleSlit, InterferenceAndDetector) {
  const DoubleSlitReport d = build_double_slit();
  EXPECT_NEAR(d.interference.superposition_expectation, 1.0, 1e-12);
  EXPECT_NEAR(d.interference.mixture_expectation, 0.0, 1e-12);
  // Direct formula: 2 Re(ā₁ a₂ ⟨S ψ₁, ψ₂⟩) with a = (1/√2, 1/√2) and S the exchange matrix.
  EXPECT_NEAR(d.interference.terms.at({0, 1}), 2.0 * 0.5 * d.screen.matrix()(1, 0).real(), 1e-12);
  EXPECT_NEAR(d.interference.terms.at({0, 1}), 1.0, 1e-12);
  EXPECT_NEAR(d.plain_expectation, 1.0, 1e-12);
  EXPECT_NEAR(d.detected_unitary_expectation, d.interference.mixture_expectation, 1e-12);
  EXPECT_NEAR(d.detected_collapse_expectation, d.interference.mixture_expectation, 1e-12);
  EXPECT_NEAR(d.readout.probability("upper"), 0.5, 1e-12);
  EXPECT_NEAR(d.readout.probability("lower"), 0.5, 1e-12);
}

TEST(DoubleSlit, DiagonalScreenHasNoInterference) {
  const Scenario plain = build_double_slit_scenario(false);
  const LayoutPtr el = plain.layout();
  const std::vector<double> v{2.0, -3.0};
  const auto s = observable_from(OrthonormalBasis::computational(el), v);
  const auto rep = interference_report(s, OrthonormalBasis::computational(el), state_before(plain, 1));
  EXPECT_LE(rep.max_abs_term, 1e-15);
  EXPECT_THROW(build_double_slit(std::vector<double>{1.0}), ArgumentError);
}

}  // namespace
}  // namespace wignerlab
