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
 * Projective measurement: Born probabilities, collapse, observables built
 * from bases, expectation values and eigenspace probabilities.
 */

#pragma once

#include <Eigen/Eigenvalues>

#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "wignerlab/errors.hpp"
#include "wignerlab/qcore.hpp"

namespace wignerlab {

/// Eigenvalues closer than this are treated as one degenerate eigenvalue.
inline constexpr double kEigenClusterGap = 1e-6;

/// Rounding dust allowed below zero before a probability is an error.
inline constexpr double kProbabilityDust = 1e-12;

/// Smallest outcome probability that may be collapsed onto.
inline constexpr double kMinCollapseProbability = 1e-12;

/// A complete orthonormal basis or an orthogonal subspace decomposition,
/// with one outcome label per basis vector / block.
class MeasurementSpec {
 public:
  MeasurementSpec(OrthonormalBasis basis)  // NOLINT(google-explicit-constructor)
      : basis_(std::move(basis)), decomposition_(SubspaceDecomposition::from_basis(*basis_)) {}

  MeasurementSpec(SubspaceDecomposition decomposition)  // NOLINT(google-explicit-constructor)
      : decomposition_(std::move(decomposition)) {}

  bool is_basis() const noexcept { return basis_.has_value(); }
  const OrthonormalBasis* basis() const noexcept { return basis_ ? &*basis_ : nullptr; }
  const SubspaceDecomposition& decomposition() const noexcept { return decomposition_; }
  const LayoutPtr& layout_ptr() const noexcept { return decomposition_.layout_ptr(); }
  std::size_t size() const noexcept { return decomposition_.size(); }
  std::vector<std::string> labels() const { return decomposition_.labels(); }
  const std::string& label(std::size_t j) const { return decomposition_.block(j).label; }

  std::size_t index_of(std::string_view label) const {
    if (auto j = decomposition_.find(label)) return *j;
    throw LayoutError("measurement has no outcome '" + std::string(label) + "'");
  }

  /// Every spec vector mapped through `u`.
  MeasurementSpec transformed(const UnitaryMap& u) const {
    require_same_layout(u.layout_ptr(), layout_ptr(), "transformed");
    if (basis_) {
      std::vector<StateVector> vs;
      for (const auto& v : basis_->vectors()) vs.push_back(apply_unitary(u, v));
      return OrthonormalBasis(layout_ptr(), std::move(vs), basis_->labels());
    }
    std::vector<SubspaceDecomposition::Block> blocks;
    for (const auto& b : decomposition_.blocks()) {
      SubspaceDecomposition::Block out{b.label, {}};
      for (const auto& v : b.vectors) out.vectors.push_back(apply_unitary(u, v));
      blocks.push_back(std::move(out));
    }
    return SubspaceDecomposition(layout_ptr(), std::move(blocks));
  }

 private:
  std::optional<OrthonormalBasis> basis_;
  SubspaceDecomposition decomposition_;
};

class OutcomeDistribution {
 public:
  struct Entry {
    std::string label;
    double probability = 0.0;
    bool operator==(const Entry&) const = default;
  };

  OutcomeDistribution() = default;

  /// Clamps dust in [-1e-12, 0) to zero; rejects anything more negative or
  /// a total that is not 1 within 1e-9.
  explicit OutcomeDistribution(std::vector<Entry> entries) : entries_(std::move(entries)) {
    double total = 0.0;
    for (auto& e : entries_) {
      if (!std::isfinite(e.probability)) throw NumericalError("non-finite probability");
      if (e.probability < -kProbabilityDust)
        throw NumericalError("negative probability " + std::to_string(e.probability) +
                             " for outcome '" + e.label + "'");
      if (e.probability < 0.0) e.probability = 0.0;
      total += e.probability;
    }
    if (std::abs(total - 1.0) > tol::kStructural)
      throw NumericalError("probabilities sum to " + std::to_string(total));
  }

  const std::vector<Entry>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  const Entry& operator[](std::size_t i) const { return entries_.at(i); }

  double probability(std::string_view label) const {
    for (const auto& e : entries_)
      if (e.label == label) return e.probability;
    throw LayoutError("distribution has no outcome '" + std::string(label) + "'");
  }

  /// max over outcomes of |p - q|; both must list the same labels in order.
  double max_gap(const OutcomeDistribution& o) const {
    if (o.entries_.size() != entries_.size()) throw LayoutError("distribution size mismatch");
    double g = 0.0;
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      if (entries_[i].label != o.entries_[i].label) throw LayoutError("distribution label mismatch");
      g = std::max(g, std::abs(entries_[i].probability - o.entries_[i].probability));
    }
    return g;
  }

 private:
  std::vector<Entry> entries_;
};

namespace detail {
inline void require_normalized(const StateVector& psi, std::string_view what) {
  if (!psi.is_normalized())
    throw NumericalError(std::string(what) + ": input state has norm " + std::to_string(psi.norm()));
}
}  // namespace detail

/// Basis case p_j = |⟨ψ_j, ψ⟩|²; decomposition case p_j = ‖P_j ψ‖².
inline OutcomeDistribution born_distribution(const StateVector& psi, const MeasurementSpec& m) {
  require_same_layout(psi.layout_ptr(), m.layout_ptr(), "born_distribution");
  detail::require_normalized(psi, "born_distribution");
  std::vector<OutcomeDistribution::Entry> entries;
  entries.reserve(m.size());
  if (const auto* b = m.basis()) {
    const CVector a = b->matrix().adjoint() * psi.amplitudes();
    for (std::size_t j = 0; j < b->size(); ++j)
      entries.push_back({b->labels()[j], std::norm(a(static_cast<Eigen::Index>(j)))});
  } else {
    const auto& d = m.decomposition();
    for (std::size_t j = 0; j < d.size(); ++j)
      entries.push_back({d.block(j).label, (d.block_matrix(j).adjoint() * psi.amplitudes()).squaredNorm()});
  }
  return OutcomeDistribution(std::move(entries));
}

/// Normalized projection of ψ onto the outcome's subspace.
inline StateVector collapse(const StateVector& psi, const MeasurementSpec& m, std::string_view outcome) {
  require_same_layout(psi.layout_ptr(), m.layout_ptr(), "collapse");
  const std::size_t j = m.index_of(outcome);
  const CVector projected = m.decomposition().project(j, psi.amplitudes());
  const double norm2 = psi.amplitudes().squaredNorm();
  const double p = norm2 > 0.0 ? projected.squaredNorm() / norm2 : 0.0;
  if (p < kMinCollapseProbability)
    throw ZeroProbabilityError("collapse onto outcome '" + std::string(outcome) +
                               "' of probability " + std::to_string(p));
  return StateVector(psi.layout_ptr(), projected / projected.norm());
}

/// T with T(ψ_j) = r_j ψ_j.
inline SelfAdjointOperator observable_from(const OrthonormalBasis& basis, std::span<const double> values) {
  if (values.size() != basis.size())
    throw ArgumentError("observable_from: " + std::to_string(values.size()) + " values for " +
                      std::to_string(basis.size()) + " basis vectors");
  const CMatrix& v = basis.matrix();
  CVector r(static_cast<Eigen::Index>(values.size()));
  for (std::size_t j = 0; j < values.size(); ++j) r(static_cast<Eigen::Index>(j)) = values[j];
  CMatrix t = v * r.asDiagonal() * v.adjoint();
  t = 0.5 * (t + t.adjoint()).eval();
  return SelfAdjointOperator(basis.layout_ptr(), std::move(t));
}

/// ⟨T(ψ), ψ⟩ for normalized ψ; the imaginary part is rounding and dropped.
inline double expectation(const SelfAdjointOperator& t, const StateVector& psi) {
  require_same_layout(t.layout_ptr(), psi.layout_ptr(), "expectation");
  detail::require_normalized(psi, "expectation");
  const Complex v = inner(t.apply(psi), psi);
  if (std::abs(v.imag()) > tol::kStructural * std::max(1.0, std::abs(v.real())))
    throw NumericalError("expectation has imaginary part " + std::to_string(v.imag()));
  return v.real();
}

struct EigenCluster {
  double value = 0.0;
  /// Orthonormal columns spanning the eigenspace.
  CMatrix vectors;
  std::vector<double> members;
};

/// Eigenvalues grouped so that consecutive sorted values within
/// `gap` share a cluster.
inline std::vector<EigenCluster> eigen_clusters(const SelfAdjointOperator& s, double gap = kEigenClusterGap) {
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(s.matrix());
  if (solver.info() != Eigen::Success) throw NumericalError("eigendecomposition failed");
  const auto& vals = solver.eigenvalues();
  const auto& vecs = solver.eigenvectors();
  std::vector<EigenCluster> out;
  Eigen::Index start = 0;
  for (Eigen::Index k = 1; k <= vals.size(); ++k) {
    if (k == vals.size() || vals(k) - vals(k - 1) > gap) {
      EigenCluster c;
      c.vectors = vecs.middleCols(start, k - start);
      double sum = 0.0;
      for (Eigen::Index i = start; i < k; ++i) {
        c.members.push_back(vals(i));
        sum += vals(i);
      }
      c.value = sum / static_cast<double>(k - start);
      out.push_back(std::move(c));
      start = k;
    }
  }
  return out;
}

/// Orthogonal projection onto the eigenspace of the cluster containing r.
inline SelfAdjointOperator eigenprojector(const SelfAdjointOperator& s, double r) {
  for (const auto& c : eigen_clusters(s)) {
    for (double m : c.members) {
      if (std::abs(m - r) <= kEigenClusterGap) {
        CMatrix p = c.vectors * c.vectors.adjoint();
        p = 0.5 * (p + p.adjoint()).eval();
        return SelfAdjointOperator(s.layout_ptr(), std::move(p));
      }
    }
  }
  throw ArgumentError("value " + std::to_string(r) + " matches no eigenvalue");
}

/// ‖P_r ψ‖².
inline double eigen_probability(const SelfAdjointOperator& s, double r, const StateVector& psi) {
  require_same_layout(s.layout_ptr(), psi.layout_ptr(), "eigen_probability");
  const SelfAdjointOperator p = eigenprojector(s, r);
  return (p.matrix() * psi.amplitudes()).squaredNorm();
}

}  // namespace wignerlab
