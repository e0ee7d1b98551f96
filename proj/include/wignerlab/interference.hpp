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
 * Superposition versus mixture. For ψ = Σ a_j ψ_j and self-adjoint S,
 *
 *   ⟨S(ψ), ψ⟩ = Σ_j |a_j|² ⟨S(ψ_j), ψ_j⟩ + Σ_{j<k} 2 Re(ā_j a_k ⟨S(ψ_j), ψ_k⟩)
 *
 * The first sum is the expectation for the mixture "ψ_j with probability
 * |a_j|²"; the cross terms are the interference terms.
 *
 * collapse_safety() asks the operational question directly: does replacing
 * ψ by the mixture of its collapses onto the blocks of a decomposition D
 * change the outcome distribution of a later measurement?
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <utility>
#include <vector>

#include "wignerlab/errors.hpp"
#include "wignerlab/measure.hpp"
#include "wignerlab/qcore.hpp"

namespace wignerlab {

inline constexpr double kDefaultSafetyTolerance = 1e-9;

struct InterferenceReport {
  double superposition_expectation = 0.0;
  double mixture_expectation = 0.0;
  /// (j, k) with j < k → 2 Re(ā_j a_k ⟨S(ψ_j), ψ_k⟩).
  std::map<std::pair<std::size_t, std::size_t>, double> terms;
  double max_abs_term = 0.0;
  double tolerance = kDefaultSafetyTolerance;
  bool safe = true;

  double term_sum() const {
    double s = 0.0;
    for (const auto& [_, t] : terms) s += t;
    return s;
  }
};

namespace detail {

inline void require_index_pair(std::size_t j, std::size_t k, std::size_t n) {
  if (j >= n || k >= n)
    throw ArgumentError("interference term index out of range (" + std::to_string(j) + ", " +
                        std::to_string(k) + ") for " + std::to_string(n) + " components");
  if (j >= k) throw ArgumentError("interference term needs j < k");
}

/// Components c_j = a_j ψ_j (or P_j ψ for blocks), as columns.
inline CMatrix basis_components(const OrthonormalBasis& b, const StateVector& psi) {
  const CVector a = b.matrix().adjoint() * psi.amplitudes();
  return b.matrix() * a.asDiagonal();
}

inline CMatrix block_components(const SubspaceDecomposition& d, const StateVector& psi) {
  CMatrix c(static_cast<Eigen::Index>(psi.dim()), static_cast<Eigen::Index>(d.size()));
  for (std::size_t j = 0; j < d.size(); ++j) c.col(static_cast<Eigen::Index>(j)) = d.project(j, psi.amplitudes());
  return c;
}

/// G_jk = ⟨S c_j, c_k⟩.
inline CMatrix component_gram(const SelfAdjointOperator& s, const CMatrix& components) {
  return (s.matrix() * components).adjoint() * components;
}

inline InterferenceReport report_from_gram(const SelfAdjointOperator& s, const StateVector& psi,
                                           const CMatrix& gram, double tolerance) {
  if (!(tolerance > 0.0)) throw ArgumentError("tolerance must be positive");
  InterferenceReport r;
  r.tolerance = tolerance;
  r.superposition_expectation = expectation(s, psi);
  const auto n = gram.rows();
  for (Eigen::Index j = 0; j < n; ++j) {
    r.mixture_expectation += gram(j, j).real();
    for (Eigen::Index k = j + 1; k < n; ++k) {
      const double t = 2.0 * gram(j, k).real();
      r.terms.emplace(std::make_pair(static_cast<std::size_t>(j), static_cast<std::size_t>(k)), t);
      r.max_abs_term = std::max(r.max_abs_term, std::abs(t));
    }
  }
  r.safe = r.max_abs_term <= tolerance;
  const double scale = std::max(1.0, s.matrix().cwiseAbs().maxCoeff() * static_cast<double>(psi.dim()));
  const double residual = r.superposition_expectation - r.mixture_expectation - r.term_sum();
  if (std::abs(residual) > tol::kStructural * scale)
    throw NumericalError("superposition/mixture identity violated by " + std::to_string(residual));
  return r;
}

}  // namespace detail

/// Σ_j |a_j|² ⟨S(ψ_j), ψ_j⟩ with a = expand_in_basis(ψ, B).
inline double mixture_expectation(const SelfAdjointOperator& s, const OrthonormalBasis& b, const StateVector& psi) {
  require_same_layout(s.layout_ptr(), b.layout_ptr(), "mixture_expectation");
  const auto a = expand_in_basis(psi, b);
  const CMatrix sb = s.matrix() * b.matrix();
  double total = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const auto col = static_cast<Eigen::Index>(j);
    total += std::norm(a[j]) * sb.col(col).dot(b.matrix().col(col)).real();
  }
  return total;
}

/// 2 Re(ā_j a_k ⟨S(ψ_j), ψ_k⟩), j < k.
inline double interference_term(const SelfAdjointOperator& s, const OrthonormalBasis& b, const StateVector& psi,
                                std::size_t j, std::size_t k) {
  require_same_layout(s.layout_ptr(), b.layout_ptr(), "interference_term");
  detail::require_index_pair(j, k, b.size());
  const auto a = expand_in_basis(psi, b);
  const CVector spsi_j = s.matrix() * b.matrix().col(static_cast<Eigen::Index>(j));
  const Complex g = spsi_j.dot(b.matrix().col(static_cast<Eigen::Index>(k)));
  return 2.0 * (std::conj(a[j]) * a[k] * g).real();
}

inline InterferenceReport interference_report(const SelfAdjointOperator& s, const OrthonormalBasis& b,
                                              const StateVector& psi,
                                              double tolerance = kDefaultSafetyTolerance) {
  require_same_layout(s.layout_ptr(), b.layout_ptr(), "interference_report");
  require_same_layout(s.layout_ptr(), psi.layout_ptr(), "interference_report");
  if (!b.complete()) throw LayoutError("interference_report: basis incomplete");
  return detail::report_from_gram(s, psi, detail::component_gram(s, detail::basis_components(b, psi)), tolerance);
}

/// Same report with blocks in place of basis vectors: the components are the
/// projections P_j ψ, so a singleton decomposition reproduces the basis case.
inline InterferenceReport block_interference_report(const SelfAdjointOperator& s, const SubspaceDecomposition& d,
                                                    const StateVector& psi,
                                                    double tolerance = kDefaultSafetyTolerance) {
  require_same_layout(s.layout_ptr(), d.layout_ptr(), "block_interference_report");
  require_same_layout(s.layout_ptr(), psi.layout_ptr(), "block_interference_report");
  return detail::report_from_gram(s, psi, detail::component_gram(s, detail::block_components(d, psi)), tolerance);
}

/// interference_report with S replaced by the eigenprojector P_r.
inline InterferenceReport projector_interference(const SelfAdjointOperator& s, double r, const OrthonormalBasis& b,
                                                 const StateVector& psi,
                                                 double tolerance = kDefaultSafetyTolerance) {
  return interference_report(eigenprojector(s, r), b, psi, tolerance);
}

struct SafetyVerdict {
  bool safe = true;
  /// max over later outcomes of |superposition - mixture|.
  double gap = 0.0;
  OutcomeDistribution superposition;
  OutcomeDistribution mixture;
};

/// Compares born_distribution(ψ, later) with Σ_m p_m born_distribution(ψ_m, later),
/// ψ_m the collapse of ψ onto block m of `d`. Outcomes below the collapse
/// threshold are skipped.
inline SafetyVerdict collapse_safety(const StateVector& psi, const MeasurementSpec& d, const MeasurementSpec& later,
                                     double tolerance = kDefaultSafetyTolerance) {
  require_same_layout(psi.layout_ptr(), d.layout_ptr(), "collapse_safety");
  require_same_layout(psi.layout_ptr(), later.layout_ptr(), "collapse_safety");
  if (!(tolerance > 0.0)) throw ArgumentError("tolerance must be positive");
  SafetyVerdict v;
  v.superposition = born_distribution(psi, later);
  const OutcomeDistribution split = born_distribution(psi, d);
  std::vector<double> mix(later.size(), 0.0);
  double kept = 0.0;
  for (const auto& e : split.entries()) {
    if (e.probability < kMinCollapseProbability) continue;
    kept += e.probability;
    const OutcomeDistribution after = born_distribution(collapse(psi, d, e.label), later);
    for (std::size_t j = 0; j < mix.size(); ++j) mix[j] += e.probability * after[j].probability;
  }
  std::vector<OutcomeDistribution::Entry> entries;
  for (std::size_t j = 0; j < mix.size(); ++j) entries.push_back({later.label(j), mix[j] / kept});
  v.mixture = OutcomeDistribution(std::move(entries));
  v.gap = v.superposition.max_gap(v.mixture);
  v.safe = v.gap <= tolerance;
  return v;
}

}  // namespace wignerlab
