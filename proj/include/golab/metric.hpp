#pragma once

#include "golab/isotropy.hpp"

#include <optional>
#include <string>
#include <vector>

namespace golab {

/// A metric endomorphism A on m, stored in m-coordinates, together with the
/// result of its validity checks.
template <class T>
struct MetricEndomorphism {
  Matrix<T> matrix;
  Vector<T> params;
  bool symmetric = false;
  bool equivariant = false;
  bool positive_definite = false;

  bool valid() const { return symmetric && equivariant && positive_definite; }
  Vector<T> apply(const Vector<T>& x) const { return matrix * x; }
};

/// B-symmetry on a space with diagonal Gram entries `w`: w_i A_ij = w_j A_ji.
template <class T>
bool is_b_symmetric(const Matrix<T>& a, const Vector<T>& w) {
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = i + 1; j < a.cols(); ++j)
      if (!is_zero(w[i] * a(i, j) - w[j] * a(j, i))) return false;
  return true;
}

template <class T>
bool commutes_with(const Matrix<T>& a, const std::vector<Matrix<T>>& ops) {
  for (const auto& op : ops)
    if (!(a * op - op * a).is_zero()) return false;
  return true;
}

/// Positive definiteness of a B-symmetric A, via the symmetric matrix G A.
/// Exact pivots over the rationals; smallest eigenvalue in floating point.
template <class T>
bool is_b_positive_definite(const Matrix<T>& a, const Vector<T>& w) {
  Matrix<T> ga = a;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) ga(i, j) = w[i] * a(i, j);
  if constexpr (ScalarTraits<T>::exact) {
    return is_positive_definite(ga);
  } else {
    if (a.rows() == 0) return true;
    Eigen::MatrixXd e = to_eigen(ga);
    e = 0.5 * (e + e.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(e, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff() > float_tolerance();
  }
}

template <class T>
MetricEndomorphism<T> make_metric(const IsotropyAction<T>& action, Matrix<T> a, Vector<T> params = {}) {
  if (a.rows() != action.dim_m() || a.cols() != action.dim_m())
    throw Error(ErrorKind::DimensionMismatch, "metric matrix does not match dim m");
  MetricEndomorphism<T> out;
  out.symmetric = is_b_symmetric(a, action.weights());
  out.equivariant = commutes_with(a, action.ops());
  out.positive_definite = out.symmetric && is_b_positive_definite(a, action.weights());
  out.matrix = std::move(a);
  out.params = std::move(params);
  return out;
}

/// A linear family of candidate metrics A = sum_j p_j generators[j].
template <class T>
struct MetricFamily {
  std::vector<std::string> labels;
  std::vector<Matrix<T>> generators;

  std::size_t size() const { return generators.size(); }

  Matrix<T> at(const Vector<T>& params) const {
    if (params.size() != generators.size())
      throw Error(ErrorKind::DimensionMismatch, "expected " + std::to_string(generators.size()) +
                                                    " parameters, got " + std::to_string(params.size()));
    if (generators.empty()) return Matrix<T>();
    Matrix<T> a(generators[0].rows(), generators[0].cols());
    for (std::size_t j = 0; j < params.size(); ++j)
      if (!ScalarTraits<T>::is_exact_zero(params[j])) a += params[j] * generators[j];
    return a;
  }
};

/// Every B-symmetric Ad(H)-equivariant operator on m: the symmetric commutant.
template <class T>
MetricFamily<T> full_family(const IsotropyAction<T>& action) {
  MetricFamily<T> f;
  f.generators = symmetric_commutant(action.ops(), action.weights());
  for (std::size_t j = 0; j < f.generators.size(); ++j) f.labels.push_back("c" + std::to_string(j + 1));
  return f;
}

template <class T>
MetricEndomorphism<T> from_parameters(const IsotropyAction<T>& action, const MetricFamily<T>& family,
                                      const Vector<T>& params) {
  return make_metric(action, family.at(params), params);
}

/// Coordinates of A in the family, if A belongs to it.
template <class T>
std::optional<Vector<T>> coordinates_in(const MetricFamily<T>& family, const Matrix<T>& a) {
  const std::size_t entries = a.rows() * a.cols();
  Matrix<T> sys(entries, family.size());
  for (std::size_t j = 0; j < family.size(); ++j)
    for (std::size_t e = 0; e < entries; ++e) sys(e, j) = family.generators[j].data()[e];
  if (family.size() == 0) {
    if (a.is_zero()) return Vector<T>{};
    return std::nullopt;
  }
  return solve(sys, a.data());
}

template <class T>
struct Eigenspace {
  T value;
  double approx = 0.0;
  Subspace<T> space;
  bool exact = false;
};

/// B-orthogonal eigenspace decomposition of m under A.
template <class T>
std::vector<Eigenspace<T>> eigenstructure(const IsotropyAction<T>& action, const Matrix<T>& a) {
  std::vector<Eigenspace<T>> out;
  for (auto& b : eigen_blocks(a, action.weights()))
    out.push_back({b.value, b.approx, Subspace<T>::span_of(b.vectors, action.weights()), b.exact});
  return out;
}

/// True iff A commutes with ad(Z)|_m for every Z in h + S0.
template <class T>
bool check_normalizer_equivariance(const IsotropyAction<T>& action, const Matrix<T>& a, const Subspace<T>& s0) {
  return commutes_with(a, action.ops()) && commutes_with(a, action.normalizer_ops(s0));
}

/// Whether A maps each isotypical summand into itself.
template <class T>
bool is_block_diagonal(const IsotypicalDecomposition<T>& dec, const Matrix<T>& a) {
  for (std::size_t j = 0; j < dec.summands.size(); ++j)
    for (const auto& v : dec.summands[j].span.basis()) {
      auto img = a * v;
      for (std::size_t k = 0; k < dec.summands.size(); ++k) {
        if (k == j) continue;
        for (const auto& w : dec.summands[k].span.basis())
          if (!is_zero(dec.summands[k].span.inner(img, w))) return false;
      }
    }
  return true;
}

/// A restricted to an invariant subspace, in that subspace's coordinates.
/// Returns the scalar when the restriction is a multiple of the identity.
template <class T>
std::optional<T> scalar_on(const Matrix<T>& a, const Subspace<T>& s) {
  if (s.dim() == 0) return std::nullopt;
  const auto& u0 = s.basis()[0];
  T lambda = s.inner(a * u0, u0) / s.norms()[0];
  for (const auto& u : s.basis())
    if (!is_zero_vector(a * u - scaled(lambda, u))) return std::nullopt;
  return lambda;
}

}  // namespace golab
