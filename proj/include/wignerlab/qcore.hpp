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
 * Complex linear algebra over labeled finite-dimensional tensor-product
 * spaces: layouts, state vectors, orthonormal bases, subspace
 * decompositions, unitaries and self-adjoint operators.
 *
 * Inner-product convention: `inner(x, y)` is conjugate-linear in the FIRST
 * argument and linear in the second, so that
 * `inner(a * x, b * y) == conj(a) * b * inner(x, y)`.
 *
 * Amplitudes are stored densely, row-major over the mixed-radix index
 * defined by factor order: the first factor is the most significant digit.
 */

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstddef>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "wignerlab/errors.hpp"

namespace wignerlab {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;

namespace tol {
/// Orthonormality, unitarity, hermiticity, normalization.
inline constexpr double kStructural = 1e-9;
/// Golden-value comparisons against exact algebraic quantities.
inline constexpr double kGolden = 1e-12;
}  // namespace tol

inline constexpr std::size_t kDefaultDimensionCap = std::size_t{1} << 20;

namespace detail {
inline std::atomic<std::size_t>& dimension_cap_storage() {
  static std::atomic<std::size_t> cap{kDefaultDimensionCap};
  return cap;
}
}  // namespace detail

/// Largest total dimension a SpaceLayout may have.
inline std::size_t dimension_cap() { return detail::dimension_cap_storage().load(); }

inline void set_dimension_cap(std::size_t cap) {
  if (cap == 0) throw DimensionError("dimension cap must be positive");
  detail::dimension_cap_storage().store(cap);
}

/// One tensor factor: a label and its ordered outcome (basis) labels.
struct Factor {
  std::string label;
  std::vector<std::string> outcomes;

  std::size_t dim() const noexcept { return outcomes.size(); }
  bool operator==(const Factor&) const = default;
};

/// Ordered tensor-product layout. Immutable once built.
class SpaceLayout {
 public:
  explicit SpaceLayout(std::vector<Factor> factors) : factors_(std::move(factors)) {
    std::set<std::string_view> seen;
    strides_.resize(factors_.size());
    std::size_t total = 1;
    const std::size_t cap = dimension_cap();
    for (std::size_t i = factors_.size(); i-- > 0;) {
      const Factor& f = factors_[i];
      if (f.label.empty()) throw LayoutError("factor label must not be empty");
      if (!seen.insert(f.label).second)
        throw LayoutError("duplicate factor label '" + f.label + "'");
      if (f.outcomes.empty())
        throw LayoutError("factor '" + f.label + "' has no outcome labels");
      std::set<std::string_view> labels;
      for (const auto& o : f.outcomes) {
        if (!labels.insert(o).second)
          throw LayoutError("duplicate outcome label '" + o + "' in factor '" +
                            f.label + "'");
      }
      strides_[i] = total;
      if (f.dim() > cap / total)
        throw DimensionError("space dimension exceeds cap " + std::to_string(cap));
      total *= f.dim();
    }
    dim_ = total;
  }

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return factors_.size(); }
  const std::vector<Factor>& factors() const noexcept { return factors_; }
  const Factor& factor(std::size_t i) const { return factors_.at(i); }
  std::size_t stride(std::size_t i) const { return strides_.at(i); }

  std::optional<std::size_t> find(std::string_view label) const {
    for (std::size_t i = 0; i < factors_.size(); ++i)
      if (factors_[i].label == label) return i;
    return std::nullopt;
  }

  std::size_t position(std::string_view label) const {
    if (auto p = find(label)) return *p;
    throw LayoutError("unknown factor '" + std::string(label) + "'");
  }

  std::size_t outcome_index(std::size_t factor_pos, std::string_view outcome) const {
    const auto& outs = factor(factor_pos).outcomes;
    auto it = std::find(outs.begin(), outs.end(), outcome);
    if (it == outs.end())
      throw LayoutError("factor '" + factors_[factor_pos].label +
                        "' has no outcome '" + std::string(outcome) + "'");
    return static_cast<std::size_t>(it - outs.begin());
  }

  std::vector<std::size_t> digits(std::size_t index) const {
    std::vector<std::size_t> d(factors_.size());
    for (std::size_t i = 0; i < factors_.size(); ++i)
      d[i] = (index / strides_[i]) % factors_[i].dim();
    return d;
  }

  std::size_t index(std::span<const std::size_t> digits) const {
    if (digits.size() != factors_.size())
      throw LayoutError("digit count does not match factor count");
    std::size_t idx = 0;
    for (std::size_t i = 0; i < digits.size(); ++i) {
      if (digits[i] >= factors_[i].dim()) throw LayoutError("digit out of range");
      idx += digits[i] * strides_[i];
    }
    return idx;
  }

  std::string describe() const {
    std::string s;
    for (std::size_t i = 0; i < factors_.size(); ++i) {
      if (i) s += " x ";
      s += factors_[i].label + "[" + std::to_string(factors_[i].dim()) + "]";
    }
    return s.empty() ? "<scalar>" : s;
  }

  bool operator==(const SpaceLayout& o) const { return factors_ == o.factors_; }

 private:
  std::vector<Factor> factors_;
  std::vector<std::size_t> strides_;
  std::size_t dim_ = 1;
};

using LayoutPtr = std::shared_ptr<const SpaceLayout>;

inline LayoutPtr make_layout(std::vector<Factor> factors) {
  return std::make_shared<const SpaceLayout>(std::move(factors));
}

inline bool same_layout(const LayoutPtr& a, const LayoutPtr& b) {
  return a == b || (a && b && *a == *b);
}

inline void require_same_layout(const LayoutPtr& a, const LayoutPtr& b,
                                std::string_view what) {
  if (!same_layout(a, b))
    throw LayoutError(std::string(what) + ": layout mismatch (" + a->describe() +
                      " vs " + b->describe() + ")");
}

/// Layout restricted to `labels`, in the order given.
inline LayoutPtr sub_layout(const SpaceLayout& layout,
                            std::span<const std::string> labels) {
  std::vector<Factor> fs;
  fs.reserve(labels.size());
  for (const auto& l : labels) fs.push_back(layout.factor(layout.position(l)));
  return make_layout(std::move(fs));
}

inline LayoutPtr concat_layouts(const SpaceLayout& a, const SpaceLayout& b) {
  std::vector<Factor> fs = a.factors();
  fs.insert(fs.end(), b.factors().begin(), b.factors().end());
  return make_layout(std::move(fs));
}

/// Index bookkeeping for a factor subset F of a layout L. The local space
/// orders F as given; the complement keeps L's order.
class Embedding {
 public:
  Embedding(LayoutPtr full, std::vector<std::string> local_labels)
      : full_(std::move(full)), local_labels_(std::move(local_labels)) {
    std::vector<bool> in_local(full_->size(), false);
    std::vector<std::size_t> local_pos;
    for (const auto& l : local_labels_) {
      const std::size_t p = full_->position(l);
      if (in_local[p]) throw LayoutError("factor '" + l + "' listed twice");
      in_local[p] = true;
      local_pos.push_back(p);
    }
    std::vector<std::string> comp_labels;
    std::vector<std::size_t> comp_pos;
    for (std::size_t i = 0; i < full_->size(); ++i) {
      if (!in_local[i]) {
        comp_labels.push_back(full_->factor(i).label);
        comp_pos.push_back(i);
      }
    }
    local_ = sub_layout(*full_, local_labels_);
    complement_ = sub_layout(*full_, comp_labels);

    const std::size_t n = full_->dim();
    local_index_.resize(n);
    complement_index_.resize(n);
    full_index_.assign(local_->dim() * complement_->dim(), 0);
    for (std::size_t idx = 0; idx < n; ++idx) {
      const auto d = full_->digits(idx);
      std::size_t li = 0;
      for (std::size_t k = 0; k < local_pos.size(); ++k)
        li += d[local_pos[k]] * local_->stride(k);
      std::size_t ci = 0;
      for (std::size_t k = 0; k < comp_pos.size(); ++k)
        ci += d[comp_pos[k]] * complement_->stride(k);
      local_index_[idx] = li;
      complement_index_[idx] = ci;
      full_index_[li * complement_->dim() + ci] = idx;
    }
  }

  const LayoutPtr& full() const noexcept { return full_; }
  const LayoutPtr& local() const noexcept { return local_; }
  const LayoutPtr& complement() const noexcept { return complement_; }
  std::size_t local_index(std::size_t full_index) const { return local_index_[full_index]; }
  std::size_t complement_index(std::size_t full_index) const {
    return complement_index_[full_index];
  }
  std::size_t full_index(std::size_t local, std::size_t complement) const {
    return full_index_[local * complement_->dim() + complement];
  }

  /// local ⊗ e_complement, reordered into the full layout.
  CVector embed_vector(const CVector& local, std::size_t complement) const {
    CVector out = CVector::Zero(static_cast<Eigen::Index>(full_->dim()));
    for (std::size_t li = 0; li < local_->dim(); ++li)
      out(static_cast<Eigen::Index>(full_index(li, complement))) =
          local(static_cast<Eigen::Index>(li));
    return out;
  }

  /// local ⊗ identity on the complement, reordered into the full layout.
  CMatrix embed_operator(const CMatrix& local) const {
    const auto n = static_cast<Eigen::Index>(full_->dim());
    CMatrix out = CMatrix::Zero(n, n);
    const std::size_t cd = complement_->dim();
    const std::size_t ld = local_->dim();
    for (std::size_t c = 0; c < cd; ++c)
      for (std::size_t a = 0; a < ld; ++a)
        for (std::size_t b = 0; b < ld; ++b) {
          const Complex v = local(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
          if (v != Complex{})
            out(static_cast<Eigen::Index>(full_index(a, c)),
                static_cast<Eigen::Index>(full_index(b, c))) = v;
        }
    return out;
  }

 private:
  LayoutPtr full_;
  std::vector<std::string> local_labels_;
  LayoutPtr local_;
  LayoutPtr complement_;
  std::vector<std::size_t> local_index_;
  std::vector<std::size_t> complement_index_;
  std::vector<std::size_t> full_index_;
};

namespace detail {
inline bool all_finite(const CVector& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (!std::isfinite(v(i).real()) || !std::isfinite(v(i).imag())) return false;
  return true;
}
inline bool all_finite(const CMatrix& m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      if (!std::isfinite(m(i, j).real()) || !std::isfinite(m(i, j).imag())) return false;
  return true;
}
struct Trusted {};
}  // namespace detail

/// Dense amplitudes over a layout.
class StateVector {
 public:
  StateVector(LayoutPtr layout, CVector amps) : layout_(std::move(layout)), amps_(std::move(amps)) {
    if (!layout_) throw LayoutError("state vector needs a layout");
    if (static_cast<std::size_t>(amps_.size()) != layout_->dim())
      throw LayoutError("amplitude count " + std::to_string(amps_.size()) +
                        " does not match dimension " + std::to_string(layout_->dim()));
    if (!detail::all_finite(amps_)) throw NumericalError("non-finite amplitude");
  }

  static StateVector zero(LayoutPtr layout) {
    const auto n = static_cast<Eigen::Index>(layout->dim());
    return StateVector(std::move(layout), CVector::Zero(n));
  }

  static StateVector basis_state(LayoutPtr layout, std::size_t index) {
    if (index >= layout->dim()) throw LayoutError("basis index out of range");
    StateVector s = zero(std::move(layout));
    s.amps_(static_cast<Eigen::Index>(index)) = 1.0;
    return s;
  }

  /// Computational basis state named by one outcome label per factor.
  static StateVector from_labels(LayoutPtr layout, std::span<const std::string> labels) {
    if (labels.size() != layout->size()) throw LayoutError("one label per factor required");
    std::vector<std::size_t> d(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) d[i] = layout->outcome_index(i, labels[i]);
    const std::size_t idx = layout->index(d);
    return basis_state(std::move(layout), idx);
  }

  const SpaceLayout& layout() const noexcept { return *layout_; }
  const LayoutPtr& layout_ptr() const noexcept { return layout_; }
  const CVector& amplitudes() const noexcept { return amps_; }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(amps_.size()); }
  Complex operator[](std::size_t i) const { return amps_(static_cast<Eigen::Index>(i)); }

  double norm() const { return amps_.norm(); }
  bool is_normalized(double tolerance = tol::kStructural) const {
    return std::abs(norm() - 1.0) <= tolerance;
  }

  StateVector normalized() const {
    const double n = norm();
    if (n == 0.0) throw NumericalError("cannot normalize the zero vector");
    return StateVector(layout_, amps_ / n);
  }

  StateVector operator+(const StateVector& o) const {
    require_same_layout(layout_, o.layout_, "state addition");
    return StateVector(layout_, amps_ + o.amps_);
  }
  StateVector operator-(const StateVector& o) const {
    require_same_layout(layout_, o.layout_, "state subtraction");
    return StateVector(layout_, amps_ - o.amps_);
  }
  friend StateVector operator*(Complex c, const StateVector& s) {
    return StateVector(s.layout_, c * s.amps_);
  }
  friend StateVector operator*(double c, const StateVector& s) {
    return StateVector(s.layout_, c * s.amps_);
  }

 private:
  LayoutPtr layout_;
  CVector amps_;
};

/// ⟨x, y⟩, conjugate-linear in x.
inline Complex inner(const StateVector& x, const StateVector& y) {
  require_same_layout(x.layout_ptr(), y.layout_ptr(), "inner");
  return x.amplitudes().dot(y.amplitudes());  // Eigen's dot conjugates the left operand
}

/// max_j |a_j - e^{iα} b_j| with α the phase of ⟨b, a⟩.
inline double phase_distance(const StateVector& a, const StateVector& b) {
  require_same_layout(a.layout_ptr(), b.layout_ptr(), "phase_distance");
  const Complex ov = inner(b, a);
  const Complex phase = std::abs(ov) > 0.0 ? ov / std::abs(ov) : Complex{1.0};
  return (a.amplitudes() - phase * b.amplitudes()).cwiseAbs().maxCoeff();
}

inline double max_abs_diff(const StateVector& a, const StateVector& b) {
  require_same_layout(a.layout_ptr(), b.layout_ptr(), "max_abs_diff");
  if (a.dim() == 0) return 0.0;
  return (a.amplitudes() - b.amplitudes()).cwiseAbs().maxCoeff();
}

/// x ⊗ y over the concatenated layout (x's factors first).
inline StateVector tensor(const StateVector& x, const StateVector& y) {
  auto layout = concat_layouts(x.layout(), y.layout());
  CVector amps(static_cast<Eigen::Index>(layout->dim()));
  const auto ny = static_cast<Eigen::Index>(y.dim());
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(x.dim()); ++i)
    amps.segment(i * ny, ny) = x.amplitudes()(i) * y.amplitudes();
  return StateVector(std::move(layout), std::move(amps));
}

namespace detail {
/// Columns are the vectors; checks |V†V - I|_max.
inline void require_orthonormal(const CMatrix& columns, std::string_view what) {
  if (columns.cols() == 0) return;
  const CMatrix gram = columns.adjoint() * columns;
  const CMatrix err = gram - CMatrix::Identity(gram.rows(), gram.cols());
  const double worst = err.cwiseAbs().maxCoeff();
  if (worst > tol::kStructural)
    throw NumericalError(std::string(what) + ": vectors not orthonormal (deviation " +
                         std::to_string(worst) + ")");
}

inline CMatrix stack_columns(const std::vector<StateVector>& vs, std::size_t dim) {
  CMatrix m(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(vs.size()));
  for (std::size_t j = 0; j < vs.size(); ++j) m.col(static_cast<Eigen::Index>(j)) = vs[j].amplitudes();
  return m;
}

inline void require_unique(const std::vector<std::string>& labels, std::string_view what) {
  std::set<std::string_view> seen;
  for (const auto& l : labels)
    if (!seen.insert(l).second)
      throw LayoutError(std::string(what) + ": duplicate outcome label '" + l + "'");
}
}  // namespace detail

/// Orthonormal family with one outcome label per vector.
class OrthonormalBasis {
 public:
  OrthonormalBasis(LayoutPtr layout, std::vector<StateVector> vectors, std::vector<std::string> labels)
      : layout_(std::move(layout)), vectors_(std::move(vectors)), labels_(std::move(labels)) {
    if (vectors_.size() != labels_.size()) throw LayoutError("basis: one label per vector required");
    detail::require_unique(labels_, "basis");
    for (const auto& v : vectors_) require_same_layout(layout_, v.layout_ptr(), "basis");
    matrix_ = detail::stack_columns(vectors_, layout_->dim());
    detail::require_orthonormal(matrix_, "basis");
  }

  /// Computational basis, labels from the layout's outcome labels joined by ','.
  static OrthonormalBasis computational(const LayoutPtr& layout) {
    std::vector<StateVector> vs;
    std::vector<std::string> ls;
    for (std::size_t i = 0; i < layout->dim(); ++i) {
      vs.push_back(StateVector::basis_state(layout, i));
      const auto d = layout->digits(i);
      std::string l;
      for (std::size_t k = 0; k < d.size(); ++k) {
        if (k) l += ",";
        l += layout->factor(k).outcomes[d[k]];
      }
      ls.push_back(std::move(l));
    }
    return OrthonormalBasis(layout, std::move(vs), std::move(ls));
  }

  const SpaceLayout& layout() const noexcept { return *layout_; }
  const LayoutPtr& layout_ptr() const noexcept { return layout_; }
  const std::vector<StateVector>& vectors() const noexcept { return vectors_; }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  const StateVector& operator[](std::size_t j) const { return vectors_.at(j); }
  std::size_t size() const noexcept { return vectors_.size(); }
  bool complete() const noexcept { return vectors_.size() == layout_->dim(); }
  /// Columns are the basis vectors.
  const CMatrix& matrix() const noexcept { return matrix_; }

 private:
  LayoutPtr layout_;
  std::vector<StateVector> vectors_;
  std::vector<std::string> labels_;
  CMatrix matrix_;
};

/// Orthogonal direct-sum decomposition of the whole space into labeled blocks.
class SubspaceDecomposition {
 public:
  struct Block {
    std::string label;
    std::vector<StateVector> vectors;
  };

  SubspaceDecomposition(LayoutPtr layout, std::vector<Block> blocks)
      : layout_(std::move(layout)), blocks_(std::move(blocks)) {
    init(true);
  }

  SubspaceDecomposition(detail::Trusted, LayoutPtr layout, std::vector<Block> blocks)
      : layout_(std::move(layout)), blocks_(std::move(blocks)) {
    init(false);
  }

  /// One singleton block per basis vector.
  static SubspaceDecomposition from_basis(const OrthonormalBasis& basis) {
    if (!basis.complete()) throw LayoutError("decomposition needs a complete basis");
    std::vector<Block> blocks;
    for (std::size_t j = 0; j < basis.size(); ++j) blocks.push_back({basis.labels()[j], {basis[j]}});
    return SubspaceDecomposition(detail::Trusted{}, basis.layout_ptr(), std::move(blocks));
  }

  const SpaceLayout& layout() const noexcept { return *layout_; }
  const LayoutPtr& layout_ptr() const noexcept { return layout_; }
  const std::vector<Block>& blocks() const noexcept { return blocks_; }
  std::size_t size() const noexcept { return blocks_.size(); }
  const Block& block(std::size_t j) const { return blocks_.at(j); }
  /// Columns span block j.
  const CMatrix& block_matrix(std::size_t j) const { return matrices_.at(j); }

  std::vector<std::string> labels() const {
    std::vector<std::string> out;
    for (const auto& b : blocks_) out.push_back(b.label);
    return out;
  }

  std::optional<std::size_t> find(std::string_view label) const {
    for (std::size_t j = 0; j < blocks_.size(); ++j)
      if (blocks_[j].label == label) return j;
    return std::nullopt;
  }

  CVector project(std::size_t j, const CVector& v) const {
    const CMatrix& m = matrices_.at(j);
    return m * (m.adjoint() * v);
  }

  CMatrix projector(std::size_t j) const {
    const CMatrix& m = matrices_.at(j);
    return m * m.adjoint();
  }

 private:
  void init(bool validate) {
    std::vector<std::string> ls;
    std::size_t total = 0;
    for (const auto& b : blocks_) {
      ls.push_back(b.label);
      if (b.vectors.empty()) throw LayoutError("decomposition block '" + b.label + "' is empty");
      for (const auto& v : b.vectors) require_same_layout(layout_, v.layout_ptr(), "decomposition");
      total += b.vectors.size();
      matrices_.push_back(detail::stack_columns(b.vectors, layout_->dim()));
    }
    detail::require_unique(ls, "decomposition");
    if (total != layout_->dim())
      throw LayoutError("decomposition blocks span " + std::to_string(total) + " of " +
                        std::to_string(layout_->dim()) + " dimensions");
    if (validate) {
      CMatrix all(static_cast<Eigen::Index>(layout_->dim()), static_cast<Eigen::Index>(total));
      Eigen::Index c = 0;
      for (const auto& m : matrices_) {
        all.middleCols(c, m.cols()) = m;
        c += m.cols();
      }
      detail::require_orthonormal(all, "decomposition");
    }
  }

  LayoutPtr layout_;
  std::vector<Block> blocks_;
  std::vector<CMatrix> matrices_;
};

class UnitaryMap {
 public:
  UnitaryMap(LayoutPtr layout, CMatrix matrix) : layout_(std::move(layout)), matrix_(std::move(matrix)) {
    const auto n = static_cast<Eigen::Index>(layout_->dim());
    if (matrix_.rows() != n || matrix_.cols() != n) throw LayoutError("unitary: matrix shape mismatch");
    if (!detail::all_finite(matrix_)) throw NumericalError("unitary: non-finite entry");
    const double dev = (matrix_.adjoint() * matrix_ - CMatrix::Identity(n, n)).cwiseAbs().maxCoeff();
    if (dev > tol::kStructural)
      throw NumericalError("unitary: |U*U - I|max = " + std::to_string(dev));
  }

  static UnitaryMap identity(LayoutPtr layout) {
    const auto n = static_cast<Eigen::Index>(layout->dim());
    return UnitaryMap(std::move(layout), CMatrix::Identity(n, n));
  }

  const SpaceLayout& layout() const noexcept { return *layout_; }
  const LayoutPtr& layout_ptr() const noexcept { return layout_; }
  const CMatrix& matrix() const noexcept { return matrix_; }

 private:
  LayoutPtr layout_;
  CMatrix matrix_;
};

class SelfAdjointOperator {
 public:
  SelfAdjointOperator(LayoutPtr layout, CMatrix matrix) : layout_(std::move(layout)), matrix_(std::move(matrix)) {
    const auto n = static_cast<Eigen::Index>(layout_->dim());
    if (matrix_.rows() != n || matrix_.cols() != n) throw LayoutError("operator: matrix shape mismatch");
    if (!detail::all_finite(matrix_)) throw NumericalError("operator: non-finite entry");
    const double dev = (matrix_ - matrix_.adjoint()).cwiseAbs().maxCoeff();
    if (dev > tol::kStructural)
      throw NumericalError("operator: not self-adjoint, |A - A*|max = " + std::to_string(dev));
  }

  const SpaceLayout& layout() const noexcept { return *layout_; }
  const LayoutPtr& layout_ptr() const noexcept { return layout_; }
  const CMatrix& matrix() const noexcept { return matrix_; }

  StateVector apply(const StateVector& v) const {
    require_same_layout(layout_, v.layout_ptr(), "operator apply");
    return StateVector(layout_, matrix_ * v.amplitudes());
  }

  SelfAdjointOperator operator+(const SelfAdjointOperator& o) const {
    require_same_layout(layout_, o.layout_, "operator sum");
    return SelfAdjointOperator(layout_, matrix_ + o.matrix_);
  }
  friend SelfAdjointOperator operator*(double c, const SelfAdjointOperator& a) {
    return SelfAdjointOperator(a.layout_, c * a.matrix_);
  }

 private:
  LayoutPtr layout_;
  CMatrix matrix_;
};

/// Coefficients a_j = ⟨b_j, ψ⟩, so that ψ = Σ a_j b_j.
inline std::vector<Complex> expand_in_basis(const StateVector& psi, const OrthonormalBasis& basis) {
  require_same_layout(psi.layout_ptr(), basis.layout_ptr(), "expand_in_basis");
  if (!basis.complete())
    throw LayoutError("expand_in_basis: basis has " + std::to_string(basis.size()) +
                      " vectors for dimension " + std::to_string(psi.dim()));
  const CVector a = basis.matrix().adjoint() * psi.amplitudes();
  return {a.data(), a.data() + a.size()};
}

inline StateVector apply_unitary(const UnitaryMap& u, const StateVector& psi) {
  require_same_layout(u.layout_ptr(), psi.layout_ptr(), "apply_unitary");
  return StateVector(psi.layout_ptr(), u.matrix() * psi.amplitudes());
}

/// Lift a decomposition of the factor subset named by `local`'s layout into
/// `layout`: block m becomes span{v ⊗ e : v in block m, e computational on
/// the complementary factors}.
inline SubspaceDecomposition lift_decomposition(const SubspaceDecomposition& local, const LayoutPtr& layout) {
  std::vector<std::string> labels;
  for (const auto& f : local.layout().factors()) {
    const std::size_t p = layout->position(f.label);
    if (!(layout->factor(p) == f))
      throw LayoutError("lift: factor '" + f.label + "' differs between layouts");
    labels.push_back(f.label);
  }
  if (labels.size() == layout->size() && *local.layout_ptr() == *layout) {
    return local;
  }
  const Embedding emb(layout, labels);
  std::vector<SubspaceDecomposition::Block> blocks;
  for (const auto& b : local.blocks()) {
    SubspaceDecomposition::Block lifted{b.label, {}};
    for (const auto& v : b.vectors)
      for (std::size_t c = 0; c < emb.complement()->dim(); ++c)
        lifted.vectors.emplace_back(layout, emb.embed_vector(v.amplitudes(), c));
    blocks.push_back(std::move(lifted));
  }
  return SubspaceDecomposition(detail::Trusted{}, layout, std::move(blocks));
}

inline SubspaceDecomposition lift_decomposition(const OrthonormalBasis& local, const LayoutPtr& layout) {
  return lift_decomposition(SubspaceDecomposition::from_basis(local), layout);
}

/// Blocks are pairwise tensor products, labeled "a,b"; layout is a's then b's.
inline SubspaceDecomposition tensor(const SubspaceDecomposition& a, const SubspaceDecomposition& b) {
  auto layout = concat_layouts(a.layout(), b.layout());
  std::vector<SubspaceDecomposition::Block> blocks;
  for (const auto& ba : a.blocks())
    for (const auto& bb : b.blocks()) {
      SubspaceDecomposition::Block out{ba.label + "," + bb.label, {}};
      for (const auto& va : ba.vectors)
        for (const auto& vb : bb.vectors) {
          StateVector t = tensor(va, vb);
          out.vectors.emplace_back(layout, t.amplitudes());
        }
      blocks.push_back(std::move(out));
    }
  return SubspaceDecomposition(detail::Trusted{}, std::move(layout), std::move(blocks));
}

/// Unitary whose first column is `first` (normalized), completed by
/// Gram-Schmidt over the computational basis.
inline CMatrix complete_to_unitary(const CVector& first) {
  const Eigen::Index n = first.size();
  const double nrm = first.norm();
  if (nrm == 0.0) throw NumericalError("cannot complete the zero vector");
  CMatrix u(n, n);
  u.col(0) = first / nrm;
  Eigen::Index filled = 1;
  for (Eigen::Index k = 0; k < n && filled < n; ++k) {
    CVector e = CVector::Zero(n);
    e(k) = 1.0;
    for (int pass = 0; pass < 2; ++pass)
      for (Eigen::Index j = 0; j < filled; ++j) e -= u.col(j) * u.col(j).dot(e);
    const double en = e.norm();
    if (en > 1e-8) u.col(filled++) = e / en;
  }
  return u;
}

struct ProductFactors {
  StateVector first;
  StateVector second;
};

struct ProductTest {
  bool product = false;
  /// Present when `product`; first ⊗ second reproduces ψ up to reordering.
  std::optional<ProductFactors> factors;
  std::vector<double> singular_values;
};

/// Rank test of ψ reshaped as (first_part) x (rest). Product iff every
/// singular value after the first is ≤ 1e-9 · σ₁.
inline ProductTest is_product(const StateVector& psi, std::span<const std::string> first_part) {
  const Embedding emb(psi.layout_ptr(), {first_part.begin(), first_part.end()});
  const auto rows = static_cast<Eigen::Index>(emb.local()->dim());
  const auto cols = static_cast<Eigen::Index>(emb.complement()->dim());
  CMatrix m(rows, cols);
  for (std::size_t i = 0; i < psi.dim(); ++i)
    m(static_cast<Eigen::Index>(emb.local_index(i)), static_cast<Eigen::Index>(emb.complement_index(i))) = psi[i];
  Eigen::JacobiSVD<CMatrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  ProductTest out;
  out.singular_values.assign(sv.data(), sv.data() + sv.size());
  if (sv.size() == 0 || sv(0) == 0.0) throw NumericalError("is_product: zero vector");
  out.product = true;
  for (Eigen::Index k = 1; k < sv.size(); ++k)
    if (sv(k) > tol::kStructural * sv(0)) out.product = false;
  if (out.product) {
    out.factors = ProductFactors{StateVector(emb.local(), sv(0) * svd.matrixU().col(0)),
                                 StateVector(emb.complement(), svd.matrixV().col(0).conjugate())};
  }
  return out;
}

}  // namespace wignerlab
