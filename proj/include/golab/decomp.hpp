#pragma once

#include "golab/lie_algebra.hpp"

#include <memory>
#include <string>
#include <vector>

namespace golab {

/// A subalgebra h of g given by linearly independent spanning vectors, with the
/// bracket table of the spanning set expressed in h-coordinates.
template <class T>
class Subalgebra {
 public:
  Subalgebra(AlgebraPtr<T> parent, std::vector<Vector<T>> basis) : parent_(std::move(parent)), basis_(std::move(basis)) {
    const std::size_t d = parent_->dim();
    for (const auto& b : basis_)
      if (b.size() != d) throw Error(ErrorKind::DimensionMismatch, "subalgebra vector has wrong length");
    if (rank_of(basis_, d) != basis_.size())
      throw Error(ErrorKind::NotSubalgebra, "spanning vectors are linearly dependent");
    const std::size_t k = basis_.size();
    // Coordinates in h: solve sum_c coef_c b_c = [b_i, b_j].
    Matrix<T> span = Matrix<T>::from_columns(basis_, d);
    closure_.assign(k * k, Vector<T>());
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < k; ++j) {
        auto br = parent_->bracket(basis_[i], basis_[j]);
        auto c = solve(span, br);
        if (!c)
          throw Error(ErrorKind::NotSubalgebra, "bracket [" + parent_->format(basis_[i]) + ", " +
                                                    parent_->format(basis_[j]) + "] leaves the span");
        closure_[i * k + j] = std::move(*c);
      }
  }

  const AlgebraPtr<T>& parent() const { return parent_; }
  const std::vector<Vector<T>>& basis() const { return basis_; }
  std::size_t dim() const { return basis_.size(); }
  /// h-coordinates of [h_i, h_j].
  const Vector<T>& closure(std::size_t i, std::size_t j) const { return closure_[i * dim() + j]; }

 private:
  AlgebraPtr<T> parent_;
  std::vector<Vector<T>> basis_;
  std::vector<Vector<T>> closure_;
};

enum class Part { H, M };

/// The B-orthogonal reductive decomposition g = h + m.
///
/// Both parts carry B-orthogonal bases. Coordinates "in m" always refer to
/// m_basis(); B restricted to m is then diagonal with entries m_norm(i).
template <class T>
class ReductiveSplit {
 public:
  ReductiveSplit(Subalgebra<T> h, std::vector<Vector<T>> m_basis) : h_(std::move(h)), m_basis_(std::move(m_basis)) {
    const auto& g = *h_.parent();
    h_orth_ = orthogonalize_in(g, h_.basis());
    for (const auto& v : h_orth_) h_norms_.push_back(g.inner(v, v));
    for (const auto& v : m_basis_) m_norms_.push_back(g.inner(v, v));
    if (h_.dim() + m_basis_.size() != g.dim())
      throw Error(ErrorKind::NonReductive, "dim h + dim m != dim g");
    for (std::size_t i = 0; i < m_basis_.size(); ++i) {
      for (std::size_t j = 0; j < i; ++j)
        if (!is_zero(g.inner(m_basis_[i], m_basis_[j])))
          throw Error(ErrorKind::Internal, "m basis is not B-orthogonal");
      for (const auto& hv : h_.basis())
        if (!is_zero(g.inner(m_basis_[i], hv))) throw Error(ErrorKind::Internal, "m is not B-orthogonal to h");
    }
    for (const auto& hv : h_.basis())
      for (const auto& mv : m_basis_) {
        auto br = g.bracket(hv, mv);
        if (!is_zero_vector(project(br, Part::H)))
          throw Error(ErrorKind::NonReductive, "[h, m] is not contained in m: [" + g.format(hv) + ", " +
                                                   g.format(mv) + "] has an h-component");
      }
  }

  const MatrixLieAlgebra<T>& algebra() const { return *h_.parent(); }
  const AlgebraPtr<T>& algebra_ptr() const { return h_.parent(); }
  const Subalgebra<T>& h() const { return h_; }
  const std::vector<Vector<T>>& h_orthogonal_basis() const { return h_orth_; }
  const std::vector<Vector<T>>& m_basis() const { return m_basis_; }
  std::size_t dim_m() const { return m_basis_.size(); }
  std::size_t dim_h() const { return h_.dim(); }
  const T& m_norm(std::size_t i) const { return m_norms_[i]; }
  const std::vector<T>& m_norms() const { return m_norms_; }

  /// B-orthogonal projection of x onto h or m. project(x, H) + project(x, M) = x.
  Vector<T> project(const Vector<T>& x, Part target) const {
    const auto& g = algebra();
    Vector<T> ph(g.dim(), T(0));
    for (std::size_t i = 0; i < h_orth_.size(); ++i) {
      T c = g.inner(x, h_orth_[i]);
      if (is_zero(c)) continue;
      axpy(T(c / h_norms_[i]), h_orth_[i], ph);
    }
    if (target == Part::H) return ph;
    return x - ph;
  }

  /// Coordinates of the m-component of x along m_basis().
  Vector<T> m_coords(const Vector<T>& x) const {
    const auto& g = algebra();
    Vector<T> c(m_basis_.size());
    for (std::size_t i = 0; i < m_basis_.size(); ++i) c[i] = g.inner(x, m_basis_[i]) / m_norms_[i];
    return c;
  }

  /// The element of g with the given m-coordinates.
  Vector<T> from_m(const Vector<T>& coords) const {
    if (coords.size() != m_basis_.size())
      throw Error(ErrorKind::DimensionMismatch, "m-coordinate vector has wrong length");
    Vector<T> x(algebra().dim(), T(0));
    for (std::size_t i = 0; i < coords.size(); ++i)
      if (!ScalarTraits<T>::is_exact_zero(coords[i])) axpy(coords[i], m_basis_[i], x);
    return x;
  }

  bool in_m(const Vector<T>& x) const { return is_zero_vector(project(x, Part::H)); }

  /// B restricted to m, in m-coordinates.
  T inner_m(const Vector<T>& x, const Vector<T>& y) const {
    T s(0);
    for (std::size_t i = 0; i < x.size(); ++i)
      if (!ScalarTraits<T>::is_exact_zero(x[i]) && !ScalarTraits<T>::is_exact_zero(y[i]))
        s += x[i] * y[i] * m_norms_[i];
    return s;
  }

 private:
  static std::vector<Vector<T>> orthogonalize_in(const MatrixLieAlgebra<T>& g, const std::vector<Vector<T>>& vs) {
    std::vector<Vector<T>> out;
    std::vector<T> norms;
    for (const auto& v : vs) {
      Vector<T> w = v;
      for (std::size_t j = 0; j < out.size(); ++j) {
        T c = g.inner(w, out[j]) / norms[j];
        if (!is_zero(c)) axpy(T(-c), out[j], w);
      }
      T nn = g.inner(w, w);
      if (is_zero(nn)) continue;
      out.push_back(w);
      norms.push_back(nn);
    }
    return out;
  }

  Subalgebra<T> h_;
  std::vector<Vector<T>> h_orth_;
  std::vector<T> h_norms_;
  std::vector<Vector<T>> m_basis_;
  std::vector<T> m_norms_;
};

/// u(n-k) embedded diagonally in u(n): the span of the e_ij, eb_lm with all
/// indices >= k+1 (1-based), in canonical order.
template <class T>
Subalgebra<T> diagonal_u_nk(const AlgebraPtr<T>& g, std::size_t k) {
  const std::size_t n = g->n();
  if (k < 1 || k >= n)
    throw Error(ErrorKind::InvalidDimension, "diagonal u(n-k) requires 1 <= k <= n-1, got n=" + std::to_string(n) +
                                                 ", k=" + std::to_string(k));
  UnitaryBasisIndex idx(n);
  if (idx.dim() != g->dim()) throw Error(ErrorKind::DimensionMismatch, "algebra is not u(n) in canonical basis");
  std::vector<Vector<T>> basis;
  for (std::size_t p = 0; p < idx.dim(); ++p) {
    auto en = idx.entry(p);
    if (en.i >= k && en.j >= k) basis.push_back(g->unit(p));
  }
  return Subalgebra<T>(g, std::move(basis));
}

/// m as the exact B-orthogonal complement of h, with reductivity verified.
template <class T>
ReductiveSplit<T> reductive_split(const Subalgebra<T>& h) {
  const auto& g = *h.parent();
  const std::size_t d = g.dim();
  RowReducer<T> constraints(d);
  for (const auto& hv : h.basis()) constraints.add(g.gram() * hv);
  auto comp = constraints.nullspace();
  std::vector<T> weights(d);
  // Gram-Schmidt with the full Gram matrix when it is not diagonal.
  std::vector<Vector<T>> m_basis;
  if (g.gram_is_diagonal()) {
    for (std::size_t i = 0; i < d; ++i) weights[i] = g.gram()(i, i);
    m_basis = orthogonalize(comp, weights);
  } else {
    std::vector<T> norms;
    for (const auto& v : comp) {
      Vector<T> w = v;
      for (std::size_t j = 0; j < m_basis.size(); ++j) {
        T c = g.inner(w, m_basis[j]) / norms[j];
        if (!is_zero(c)) axpy(T(-c), m_basis[j], w);
      }
      norms.push_back(g.inner(w, w));
      m_basis.push_back(std::move(w));
    }
  }
  return ReductiveSplit<T>(h, std::move(m_basis));
}

}  // namespace golab
