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
 * Builders for the extended Wigner's friend protocol, its diagnostic
 * variants, the repeated two-level footnote experiment and the double slit,
 * plus the three statement reports.
 *
 * FR layout: coin (h, t), agent Fbar (heads, tails; ready heads), spin
 * (u, d), agent F (up, down; ready up). Records: Fbar, F, Wbar, W.
 * Each lab is its 2-dimensional span, so the layout is 16-dimensional.
 */

#pragma once

#include <array>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wignerlab/evaluate.hpp"
#include "wignerlab/interference.hpp"
#include "wignerlab/measure.hpp"
#include "wignerlab/qcore.hpp"
#include "wignerlab/scenario.hpp"

namespace wignerlab {

inline std::vector<Amplitude> amps(std::initializer_list<std::string_view> texts) {
  std::vector<Amplitude> out;
  for (auto t : texts) out.push_back(parse_amplitude(t));
  return out;
}

namespace detail {

inline std::vector<Register> fr_registers() {
  return {{"coin", {"h", "t"}, false, ""},
          {"Fbar", {"heads", "tails"}, true, "heads"},
          {"spin", {"u", "d"}, false, ""},
          {"F", {"up", "down"}, true, "up"}};
}

/// Prepare, Fbar, controlled preparation, F: the state afterwards is Ψ.
inline std::vector<Step> fr_lab_steps() {
  return {
      Prepare{"coin", amps({"1/sqrt(3)", "sqrt(2)/sqrt(3)"})},
      AgentMeasure{"Fbar", {"coin"}, {SpecText::Kind::kBasis, {{"heads", amps({"1", "0"})}, {"tails", amps({"0", "1"})}}}, "Fbar"},
      ControlledPrepare{"spin", "Fbar", {{"heads", amps({"0", "1"})}, {"tails", amps({"1/sqrt(2)", "1/sqrt(2)"})}}},
      AgentMeasure{"F", {"spin"}, {SpecText::Kind::kBasis, {{"up", amps({"1", "0"})}, {"down", amps({"0", "1"})}}}, "F"},
  };
}

/// On (coin, Fbar): ok = φ_o̅ = (φ_h - φ_t)/√2; fail = φ_f̅ and the two
/// states outside the lab's span.
inline ExternalMeasure wbar_step() {
  return {{"coin", "Fbar"},
          {SpecText::Kind::kBlocks,
           {{"ok", amps({"1/sqrt(2)", "0", "0", "-1/sqrt(2)"})},
            {"fail", amps({"1/sqrt(2)", "0", "0", "1/sqrt(2)"})},
            {"fail", amps({"0", "1", "0", "0"})},
            {"fail", amps({"0", "0", "1", "0"})}}},
          "Wbar"};
}

/// On (spin, F): ok = φ_o = (φ_d - φ_u)/√2; fail = φ_f and the rest.
inline ExternalMeasure w_step() {
  return {{"spin", "F"},
          {SpecText::Kind::kBlocks,
           {{"ok", amps({"-1/sqrt(2)", "0", "0", "1/sqrt(2)"})},
            {"fail", amps({"1/sqrt(2)", "0", "0", "1/sqrt(2)"})},
            {"fail", amps({"0", "1", "0", "0"})},
            {"fail", amps({"0", "0", "1", "0"})}}},
          "W"};
}

inline std::vector<Amplitude> unit_amps(std::size_t dim, std::size_t at) {
  std::vector<Amplitude> out;
  for (std::size_t i = 0; i < dim; ++i) out.push_back(parse_amplitude(i == at ? "1" : "0"));
  return out;
}

}  // namespace detail

/// Which external measurement comes first.
enum class FrOrder { kWbarFirst, kWFirst };

inline Scenario build_fr_scenario(FrOrder order = FrOrder::kWbarFirst) {
  auto steps = detail::fr_lab_steps();
  if (order == FrOrder::kWbarFirst) {
    steps.push_back(detail::wbar_step());
    steps.push_back(detail::w_step());
  } else {
    steps.push_back(detail::w_step());
    steps.push_back(detail::wbar_step());
  }
  return Scenario(detail::fr_registers(), std::move(steps));
}

/// Index of the step after which the FR state is Ψ.
inline constexpr std::size_t kFrStepsToPsi = 4;

/// FR with a measurement in the basis {φ_h⊗φ_u, φ_h⊗φ_d, φ_t⊗φ_u, φ_t⊗φ_d}
/// (record "diag", outcomes hu, hd, tu, td, and "other" for the 12
/// remaining dimensions) right after F's step, followed by Wbar and W.
inline Scenario build_fr_diagnostic_scenario() {
  auto steps = detail::fr_lab_steps();
  ExternalMeasure diag{{"coin", "Fbar", "spin", "F"}, {SpecText::Kind::kBlocks, {}}, "diag"};
  // Indices in (coin, Fbar, spin, F) order: h,heads = 0 / t,tails = 3 on the
  // first pair, u,up = 0 / d,down = 3 on the second.
  const std::array<std::pair<const char*, std::size_t>, 4> named{{{"hu", 0}, {"hd", 3}, {"tu", 12}, {"td", 15}}};
  for (const auto& [label, index] : named) diag.spec.entries.push_back({label, detail::unit_amps(16, index)});
  for (std::size_t i = 0; i < 16; ++i)
    if (i != 0 && i != 3 && i != 12 && i != 15) diag.spec.entries.push_back({"other", detail::unit_amps(16, i)});
  steps.push_back(std::move(diag));
  steps.push_back(detail::wbar_step());
  steps.push_back(detail::w_step());
  return Scenario(detail::fr_registers(), std::move(steps));
}

/// FR up to Ψ, then Wbar modeled as an agent (register Wbar, ok/fail,
/// ready ok) measuring Fbar's lab. The final state is Θ.
inline Scenario build_fr_theta_scenario() {
  auto regs = detail::fr_registers();
  regs.push_back({"Wbar", {"ok", "fail"}, true, "ok"});
  auto steps = detail::fr_lab_steps();
  const ExternalMeasure wb = detail::wbar_step();
  steps.push_back(AgentMeasure{"Wbar", wb.targets, wb.spec, "Wbar"});
  return Scenario(std::move(regs), std::move(steps));
}

/// The state after the first `steps` steps of a scenario with a single
/// branch there (no external measurement before).
inline StateVector state_before(const Scenario& s, std::size_t steps) {
  const RunResult r = evaluate_with(s.compiled_ptr(), std::vector<bool>(s.steps().size(), false), steps);
  if (r.branches.size() != 1) throw ArgumentError("state_before: more than one branch");
  return r.branches.front().state;
}

/// Named FR states. Single-register states live on that register; φ states
/// on the lab pair; Ψ on the FR layout; Θ on the FR layout plus Wbar.
struct FrStates {
  StateVector psi_h, psi_t, psi_u, psi_d;
  StateVector theta_h, theta_t, theta_u, theta_d;
  StateVector phi_h, phi_t, phi_u, phi_d;
  StateVector phi_obar, phi_fbar, phi_o, phi_f;
  StateVector theta_obar, theta_fbar;
  /// (φ_h⊗φ_d + φ_t⊗φ_u + φ_t⊗φ_d)/√3, built algebraically.
  StateVector Psi;
  /// Final state of build_fr_theta_scenario().
  StateVector Theta;

  static FrStates make() {
    const Scenario theta_scn = build_fr_theta_scenario();
    const LayoutPtr& full = theta_scn.layout();
    auto one = [&](const char* reg, std::size_t k) {
      return StateVector::basis_state(sub_layout(*full, std::vector<std::string>{reg}), k);
    };
    const double s = 1.0 / std::sqrt(2.0);
    auto ph = tensor(one("coin", 0), one("Fbar", 0));
    auto pt = tensor(one("coin", 1), one("Fbar", 1));
    auto pu = tensor(one("spin", 0), one("F", 0));
    auto pd = tensor(one("spin", 1), one("F", 1));
    auto psi = (1.0 / std::sqrt(3.0)) * (tensor(ph, pd) + tensor(pt, pu) + tensor(pt, pd));
    return FrStates{one("coin", 0), one("coin", 1), one("spin", 0), one("spin", 1),
                    one("Fbar", 0), one("Fbar", 1), one("F", 0), one("F", 1),
                    ph, pt, pu, pd,
                    s * (ph - pt), s * (ph + pt), s * (pd - pu), s * (pd + pu),
                    one("Wbar", 0), one("Wbar", 1),
                    psi, state_before(theta_scn, theta_scn.steps().size())};
  }
};

/// Decompositions of the FR layout used by the statement analysis.
struct FrDecompositions {
  /// Fbar's record (heads | tails).
  MeasurementSpec fbar_record;
  /// F's record (up | down).
  MeasurementSpec f_record;
  /// The four product blocks {φ_h⊗φ_u, φ_h⊗φ_d, φ_t⊗φ_u, φ_t⊗φ_d} plus "other".
  MeasurementSpec htud;
  /// Wbar and W together, outcomes "ok,ok", "ok,fail", "fail,ok", "fail,fail".
  MeasurementSpec joint;
  MeasurementSpec wbar;
  MeasurementSpec w;

  static FrDecompositions make() {
    const Scenario diag = build_fr_diagnostic_scenario();
    const CompiledScenario& c = diag.compiled();
    const auto& steps = c.steps;
    // Steps: 0 prepare, 1 Fbar, 2 cprepare, 3 F, 4 diag, 5 Wbar, 6 W.
    const auto& wbar = steps[5].outcomes->decomposition();
    const auto& w = steps[6].outcomes->decomposition();
    const LayoutPtr pair_a = sub_layout(*c.layout, std::vector<std::string>{"coin", "Fbar"});
    const LayoutPtr pair_b = sub_layout(*c.layout, std::vector<std::string>{"spin", "F"});
    auto restrict = [](const SubspaceDecomposition& d, const LayoutPtr& local) {
      const Embedding emb(d.layout_ptr(), [&] {
        std::vector<std::string> ls;
        for (const auto& f : local->factors()) ls.push_back(f.label);
        return ls;
      }());
      std::vector<SubspaceDecomposition::Block> blocks;
      for (const auto& b : d.blocks()) {
        SubspaceDecomposition::Block out{b.label, {}};
        for (const auto& v : b.vectors) {
          CVector lv = CVector::Zero(static_cast<Eigen::Index>(local->dim()));
          bool on_zero = true;
          for (std::size_t i = 0; i < v.dim(); ++i) {
            if (emb.complement_index(i) == 0) lv(static_cast<Eigen::Index>(emb.local_index(i))) = v[i];
            else if (std::abs(v[i]) > 0.0) on_zero = false;
          }
          if (on_zero) out.vectors.emplace_back(local, lv);
        }
        blocks.push_back(std::move(out));
      }
      return SubspaceDecomposition(local, std::move(blocks));
    };
    const auto wbar_local = restrict(wbar, pair_a);
    const auto w_local = restrict(w, pair_b);
    return FrDecompositions{*steps[1].outcomes, *steps[3].outcomes, *steps[4].outcomes,
                            tensor(wbar_local, w_local), wbar, w};
  }
};

// ------------------------------------------------------------- statements

enum class Verdict { kHolds, kInvalidQuery, kFails };

inline std::string_view verdict_name(Verdict v) {
  switch (v) {
    case Verdict::kHolds: return "HOLDS";
    case Verdict::kInvalidQuery: return "INVALID_QUERY";
    default: return "FAILS";
  }
}

struct StatementReport {
  char id = 'a';
  Verdict verdict = Verdict::kFails;
  std::string claim;
  /// Named supporting numbers, in display order.
  std::vector<std::pair<std::string, double>> numbers;

  double number(std::string_view name) const {
    for (const auto& [n, v] : numbers)
      if (n == name) return v;
    throw ArgumentError("statement report has no number '" + std::string(name) + "'");
  }
};

/// (a) P(W=fail | Fbar=tails) cannot be asked under unitary agents.
/// (b) Fbar=heads and F=up never occur together.
/// (c) Wbar=ok excludes F=down; the Θ coefficient on θ_o̅⊗φ_o̅⊗φ_d is 0.
inline std::array<StatementReport, 3> statement_reports() {
  const FrStates st = FrStates::make();
  const FrDecompositions dec = FrDecompositions::make();
  const Scenario fr = build_fr_scenario();
  const Scenario fr_rev = build_fr_scenario(FrOrder::kWFirst);
  const Scenario diag = build_fr_diagnostic_scenario();
  const RunResult run = evaluate(fr, Policy::kUnitaryAgents);
  const StateVector psi = state_before(fr, kFrStepsToPsi);

  std::array<StatementReport, 3> out;

  StatementReport& a = out[0];
  a.id = 'a';
  a.claim = "if Fbar gets tails then W gets fail";
  const auto qa = conditional_probability(run, record_is("W", "fail"), record_is("Fbar", "tails"));
  const auto safety_a = collapse_safety(psi, dec.fbar_record, dec.joint);
  a.verdict = qa.valid ? Verdict::kHolds : Verdict::kInvalidQuery;
  a.numbers = {{"query gap", qa.gap}, {"collapse_safety gap", safety_a.gap}};
  if (qa.valid) a.numbers.push_back({"P(W=fail | Fbar=tails)", qa.value});

  StatementReport& b = out[1];
  b.id = 'b';
  b.claim = "if F gets up then Fbar got tails";
  const RunResult drun = evaluate(diag, Policy::kUnitaryAgents);
  const double p_heads_up = probability(drun, record_is("Fbar", "heads") && record_is("F", "up"));
  const auto qb = conditional_probability(drun, record_is("Fbar", "tails"), record_is("F", "up"));
  const double amp_b = std::abs(inner(tensor(st.phi_h, st.phi_u), psi));
  b.numbers = {{"P(Fbar=heads, F=up)", p_heads_up}, {"|<phi_h x phi_u, Psi>|", amp_b}};
  if (qb.valid) b.numbers.push_back({"P(Fbar=tails | F=up)", qb.value});
  b.verdict = qb.valid && std::abs(p_heads_up) <= tol::kGolden && amp_b <= tol::kGolden &&
                      std::abs(qb.value - 1.0) <= tol::kGolden
                  ? Verdict::kHolds
                  : Verdict::kFails;

  StatementReport& c = out[2];
  c.id = 'c';
  c.claim = "if Wbar gets ok then F got up";
  const double amp_c = std::abs(inner(tensor(tensor(st.phi_obar, st.phi_d), st.theta_obar), st.Theta));
  const double amp_psi = std::abs(inner(tensor(st.phi_obar, st.phi_d), psi));
  const auto qc = conditional_probability(run, record_is("Wbar", "ok"), record_is("F", "down"));
  const auto qc_rev =
      conditional_probability(evaluate(fr_rev, Policy::kUnitaryAgents), record_is("Wbar", "ok"), record_is("F", "down"));
  c.numbers = {{"|<theta_obar x phi_obar x phi_d, Theta>|", amp_c},
               {"|<phi_obar x phi_d, Psi>|", amp_psi},
               {"reversed order query gap", qc_rev.gap}};
  if (qc.valid) c.numbers.push_back({"P(Wbar=ok | F=down)", qc.value});
  c.verdict = amp_c <= tol::kGolden && amp_psi <= tol::kGolden && qc.valid && std::abs(qc.value) <= tol::kGolden
                  ? Verdict::kHolds
                  : Verdict::kFails;
  return out;
}

// --------------------------------------------------------------- footnote

/// `repetitions` independent copies of: prepare S_k in (1/√2, 1/√2), agent
/// F_k measures it in its label basis, W_k measures (S_k, F_k) with outcome
/// "plus" = (ψ₁⊗θ₁ + ψ₂⊗θ₂)/√2 and "minus" = (ψ₁⊗θ₁ - ψ₂⊗θ₂)/√2 plus the
/// two remaining product states.
inline Scenario build_footnote_paradox(std::size_t repetitions = 1) {
  if (repetitions == 0) throw ArgumentError("footnote paradox needs at least one repetition");
  std::vector<Register> regs;
  std::vector<Step> steps;
  for (std::size_t k = 1; k <= repetitions; ++k) {
    const std::string n = std::to_string(k);
    regs.push_back({"S" + n, {"1", "2"}, false, ""});
    regs.push_back({"F" + n, {"1", "2"}, true, "1"});
  }
  for (std::size_t k = 1; k <= repetitions; ++k) {
    const std::string n = std::to_string(k);
    steps.push_back(Prepare{"S" + n, amps({"1/sqrt(2)", "1/sqrt(2)"})});
    steps.push_back(AgentMeasure{"F" + n, {"S" + n}, {SpecText::Kind::kBasis, {{"1", amps({"1", "0"})}, {"2", amps({"0", "1"})}}}, "F" + n});
    steps.push_back(ExternalMeasure{{"S" + n, "F" + n},
                                    {SpecText::Kind::kBlocks,
                                     {{"plus", amps({"1/sqrt(2)", "0", "0", "1/sqrt(2)"})},
                                      {"minus", amps({"1/sqrt(2)", "0", "0", "-1/sqrt(2)"})},
                                      {"minus", amps({"0", "1", "0", "0"})},
                                      {"minus", amps({"0", "0", "1", "0"})}}},
                                    "W" + n});
  }
  return Scenario(std::move(regs), std::move(steps));
}

// ------------------------------------------------------------- double slit

inline constexpr std::array<double, 2> kDefaultScreenValues{1.0, -1.0};

/// Two slit paths (upper, lower) in (1/√2, 1/√2); the screen distinguishes
/// center = (upper + lower)/√2 from edge = (upper - lower)/√2. With
/// `detector`, an agent records the slit before the screen and an external
/// readout of the detector follows the screen.
inline Scenario build_double_slit_scenario(bool detector) {
  std::vector<Register> regs{{"electron", {"upper", "lower"}, false, ""}};
  std::vector<Step> steps{Prepare{"electron", amps({"1/sqrt(2)", "1/sqrt(2)"})}};
  const SpecText slit_basis{SpecText::Kind::kBasis, {{"upper", amps({"1", "0"})}, {"lower", amps({"0", "1"})}}};
  if (detector) {
    regs.push_back({"D", {"upper", "lower"}, true, "upper"});
    steps.push_back(AgentMeasure{"D", {"electron"}, slit_basis, "D"});
  }
  steps.push_back(ExternalMeasure{
      {"electron"},
      {SpecText::Kind::kBasis, {{"center", amps({"1/sqrt(2)", "1/sqrt(2)"})}, {"edge", amps({"1/sqrt(2)", "-1/sqrt(2)"})}}},
      "screen"});
  if (detector) steps.push_back(ExternalMeasure{{"D"}, slit_basis, "readout"});
  return Scenario(std::move(regs), std::move(steps));
}

struct DoubleSlitReport {
  Scenario plain;
  Scenario detected;
  /// Screen observable on the electron register.
  SelfAdjointOperator screen;
  /// Screen observable at ψ = (ψ₁ + ψ₂)/√2 against the slit basis.
  InterferenceReport interference;
  /// Σ value·P(screen outcome) from each evaluation.
  double plain_expectation = 0.0;
  double detected_unitary_expectation = 0.0;
  double detected_collapse_expectation = 0.0;
  /// Detector readout (upper, lower) under unitary agents.
  OutcomeDistribution readout;
};

inline DoubleSlitReport build_double_slit(std::span<const double> screen_values = kDefaultScreenValues) {
  if (screen_values.size() != 2) throw ArgumentError("double slit screen needs 2 values");
  Scenario plain = build_double_slit_scenario(false);
  Scenario detected = build_double_slit_scenario(true);
  const LayoutPtr el = plain.layout();
  const double s = 1.0 / std::sqrt(2.0);
  const OrthonormalBasis screen_basis(el, {StateVector(el, CVector{{s, s}}), StateVector(el, CVector{{s, -s}})},
                                      {"center", "edge"});
  SelfAdjointOperator screen = observable_from(screen_basis, screen_values);
  const StateVector psi = state_before(plain, 1);
  InterferenceReport rep = interference_report(screen, OrthonormalBasis::computational(el), psi);

  auto screen_expectation = [&](const RunResult& r) {
    const std::size_t rec = r.compiled->record_index("screen");
    double e = 0.0;
    for (const auto& [t, p] : r.marginal({rec})) e += p * screen_values[*t[0]];
    return e;
  };
  const RunResult pu = evaluate(plain, Policy::kUnitaryAgents);
  const RunResult du = evaluate(detected, Policy::kUnitaryAgents);
  const RunResult dc = evaluate(detected, Policy::kCollapseOnRecord);
  std::vector<OutcomeDistribution::Entry> ro;
  const std::size_t readout = du.compiled->record_index("readout");
  const auto m = du.marginal({readout});
  for (std::size_t j = 0; j < 2; ++j) {
    auto it = m.find(RecordTuple{j});
    ro.push_back({du.compiled->records[readout].labels[j], it == m.end() ? 0.0 : it->second});
  }
  return DoubleSlitReport{std::move(plain),
                          std::move(detected),
                          std::move(screen),
                          std::move(rep),
                          screen_expectation(pu),
                          screen_expectation(du),
                          screen_expectation(dc),
                          OutcomeDistribution(std::move(ro))};
}

}  // namespace wignerlab
