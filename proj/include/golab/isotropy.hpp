#pragma once

#include "golab/decomp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <map>
#include <random>
#include <sstream>

namespace golab {

/// A subspace of m in m-coordinates with a B-orthogonal basis.
template <class T>
class Subspace {
 public:
  Subspace() = default;
  Subspace(std::vector<Vector<T>> orthogonal_basis, Vector<T> weights)
      : basis_(std::move(orthogonal_basis)), weights_(std::move(weights)) {
    for (const auto& v : basis_) norms_.push_back(inner(v, v));
  }

  /// Canonical basis of span(vectors): reduced echelon rows, then Gram-Schmidt.
  static Subspace span_of(const std::vector<Vector<T>>& vectors, const Vector<T>& weights) {
    RowReducer<T> r(weights.size());
    for (const auto& v : vectors) r.add(v);
    return Subspace(orthogonalize(r.rref_rows(), weights), weights);
  }

  std::size_t dim() const { return basis_.size(); }
  std::size_t ambient_dim() const { return weights_.size(); }
  const std::vector<Vector<T>>& basis() const { return basis_; }
  const Vector<T>& weights() const { return weights_; }
  const Vector<T>& norms() const { return norms_; }

  T inner(const Vector<T>& x, const Vector<T>& y) const {
    T s(0);
    for (std::size_t i = 0; i < x.size(); ++i)
      if (!ScalarTraits<T>::is_exact_zero(x[i]) && !ScalarTraits<T>::is_exact_zero(y[i]))
        s += x[i] * y[i] * weights_[i];
    return s;
  }

  /// Coordinates of the orthogonal projection of x along the basis.
  Vector<T> coords(const Vector<T>& x) const {
    Vector<T> c(dim());
    for (std::size_t i = 0; i < dim(); ++i) c[i] = inner(x, basis_[i]) / norms_[i];
    return c;
  }

  Vector<T> embed(const Vector<T>& c) const {
    Vector<T> x(ambient_dim(), T(0));
    for (std::size_t i = 0; i < dim(); ++i)
      if (!ScalarTraits<T>::is_exact_zero(c[i])) axpy(c[i], basis_[i], x);
    return x;
  }

  Vector<T> project(const Vector<T>& x) const { return embed(coords(x)); }

  bool contains(const Vector<T>& x) const { return is_zero_vector(x - project(x)); }

  bool contains(const Subspace& other) const {
    return std::all_of(other.basis_.begin(), other.basis_.end(), [&](const auto& v) { return contains(v); });
  }

  bool orthogonal_to(const Subspace& other) const {
    for (const auto& a : basis_)
      for (const auto& b : other.basis_)
        if (!is_zero(inner(a, b))) return false;
    return true;
  }

  /// Orthogonal projector onto the subspace as an operator on the ambient space.
  Matrix<T> projector() const {
    const std::size_t n = ambient_dim();
    Matrix<T> p(n, n);
    for (std::size_t j = 0; j < n; ++j) p.set_col(j, project(unit_vector<T>(n, j)));
    return p;
  }

  /// Operator S on subspace coordinates lifted to the ambient space (zero on
  /// the orthogonal complement).
  Matrix<T> lift(const Matrix<T>& s) const {
    const std::size_t n = ambient_dim();
    Matrix<T> out(n, n);
    for (std::size_t j = 0; j < n; ++j) {
      auto c = coords(unit_vector<T>(n, j));
      out.set_col(j, embed(s * c));
    }
    return out;
  }

  /// Orthogonal complement of this subspace inside `within`.
  Subspace complement_in(const Subspace& within) const {
    RowReducer<T> r(within.dim());
    for (const auto& v : basis_) {
      Vector<T> row(within.dim());
      for (std::size_t i = 0; i < within.dim(); ++i) row[i] = inner(v, within.basis_[i]);
      r.add(row);
    }
    std::vector<Vector<T>> vs;
    for (const auto& c : r.nullspace()) vs.push_back(within.embed(c));
    return span_of(vs, weights_);
  }

  static Subspace whole(const Vector<T>& weights) {
    std::vector<Vector<T>> b;
    for (std::size_t i = 0; i < weights.size(); ++i) b.push_back(unit_vector<T>(weights.size(), i));
    return Subspace(std::move(b), weights);
  }

  /// Smallest coordinate index touched by the subspace.
  std::size_t leading_index() const {
    std::size_t best = ambient_dim();
    for (const auto& v : basis_)
      for (std::size_t i = 0; i < v.size(); ++i)
        if (!is_zero(v[i])) {
          best = std::min(best, i);
          break;
        }
    return best;
  }

 private:
  std::vector<Vector<T>> basis_;
  Vector<T> weights_;
  Vector<T> norms_;
};

/// Matrix of an operator on m restricted to an invariant subspace, in the
/// subspace's coordinates. Throws when the subspace is not invariant.
template <class T>
Matrix<T> restrict_to(const Matrix<T>& op, const Subspace<T>& v) {
  Matrix<T> r(v.dim(), v.dim());
  for (std::size_t j = 0; j < v.dim(); ++j) {
    auto img = op * v.basis()[j];
    if (!v.contains(img)) throw Error(ErrorKind::NotInSubspace, "subspace is not invariant under the action");
    r.set_col(j, v.coords(img));
  }
  return r;
}

template <class T>
std::vector<Matrix<T>> restrict_all(const std::vector<Matrix<T>>& ops, const Subspace<T>& v) {
  std::vector<Matrix<T>> out;
  out.reserve(ops.size());
  for (const auto& op : ops) out.push_back(restrict_to(op, v));
  return out;
}

/// The isotropy action of h on m: ad(a)|_m in m-coordinates for each
/// spanning vector a of h.
template <class T>
class IsotropyAction {
 public:
  explicit IsotropyAction(ReductiveSplit<T> split) : split_(std::move(split)) {
    for (const auto& a : split_.h().basis()) ops_.push_back(ad_on_m(a));
    const auto& w = split_.m_norms();
    for (const auto& op : ops_)
      for (std::size_t i = 0; i < op.rows(); ++i)
        for (std::size_t j = 0; j < op.cols(); ++j)
          if (!is_zero(op(j, i) * w[j] + w[i] * op(i, j)))
            throw Error(ErrorKind::Internal, "isotropy operator is not B-skew");
  }

  const ReductiveSplit<T>& split() const { return split_; }
  const MatrixLieAlgebra<T>& algebra() const { return split_.algebra(); }
  const std::vector<Matrix<T>>& ops() const { return ops_; }
  std::size_t dim_m() const { return split_.dim_m(); }
  const Vector<T>& weights() const { return split_.m_norms(); }

  /// ad(z) on m in m-coordinates; z must preserve m.
  Matrix<T> ad_on_m(const Vector<T>& z) const {
    const std::size_t d = split_.dim_m();
    Matrix<T> m(d, d);
    const auto& g = split_.algebra();
    for (std::size_t j = 0; j < d; ++j) {
      auto br = g.bracket(z, split_.m_basis()[j]);
      if (!split_.in_m(br))
        throw Error(ErrorKind::NotInSubspace, "ad(" + g.format(z) + ") does not preserve m");
      m.set_col(j, split_.m_coords(br));
    }
    return m;
  }

  /// ad(Z)|_m for Z running over a basis of a subspace of m that normalizes h.
  std::vector<Matrix<T>> normalizer_ops(const Subspace<T>& s0) const {
    std::vector<Matrix<T>> out;
    for (const auto& v : s0.basis()) out.push_back(ad_on_m(split_.from_m(v)));
    return out;
  }

 private:
  ReductiveSplit<T> split_;
  std::vector<Matrix<T>> ops_;
};

namespace detail {

template <class T>
struct SparseEquation {
  std::map<std::size_t, T> terms;
  void add(std::size_t idx, const T& v) {
    if (ScalarTraits<T>::is_exact_zero(v)) return;
    terms[idx] += v;
  }
  SparseRow<T> row() const {
    SparseRow<T> r;
    for (const auto& [k, v] : terms)
      if (!is_zero(v)) r.emplace_back(k, v);
    return r;
  }
};

template <class T>
std::vector<std::vector<std::size_t>> nonzero_rows_by_col(const Matrix<T>& m) {
  std::vector<std::vector<std::size_t>> out(m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j)
      if (!ScalarTraits<T>::is_exact_zero(m(i, j))) out[j].push_back(i);
  return out;
}

template <class T>
std::vector<std::vector<std::size_t>> nonzero_cols_by_row(const Matrix<T>& m) {
  std::vector<std::vector<std::size_t>> out(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j)
      if (!ScalarTraits<T>::is_exact_zero(m(i, j))) out[i].push_back(j);
  return out;
}

}  // namespace detail

/// All maps phi (dim_b x dim_a) with phi * ra = rb * phi for every pair of
/// corresponding operators.
template <class T>
std::vector<Matrix<T>> intertwiners(const std::vector<Matrix<T>>& ra, const std::vector<Matrix<T>>& rb) {
  if (ra.size() != rb.size()) throw Error(ErrorKind::DimensionMismatch, "operator lists differ in length");
  if (ra.empty()) throw Error(ErrorKind::DimensionMismatch, "intertwiners need at least one operator");
  const std::size_t da = ra[0].rows(), db = rb[0].rows();
  auto var = [da](std::size_t p, std::size_t c) { return p * da + c; };
  RowReducer<T> red(da * db);
  for (std::size_t mu = 0; mu < ra.size(); ++mu) {
    const auto& A = ra[mu];
    const auto& B = rb[mu];
    auto a_rows = detail::nonzero_rows_by_col(A);
    auto b_cols = detail::nonzero_cols_by_row(B);
    for (std::size_t p = 0; p < db; ++p)
      for (std::size_t q = 0; q < da; ++q) {
        detail::SparseEquation<T> eq;
        for (auto c : a_rows[q]) eq.add(var(p, c), A(c, q));
        for (auto c : b_cols[p]) eq.add(var(c, q), -B(p, c));
        auto row = eq.row();
        if (!row.empty()) red.add(std::move(row));
      }
  }
  std::vector<Matrix<T>> out;
  for (const auto& v : red.nullspace()) {
    Matrix<T> phi(db, da);
    for (std::size_t p = 0; p < db; ++p)
      for (std::size_t c = 0; c < da; ++c) phi(p, c) = v[var(p, c)];
    out.push_back(std::move(phi));
  }
  return out;
}

/// Full commutant {S : S R = R S for all R}.
template <class T>
std::vector<Matrix<T>> commutant(const std::vector<Matrix<T>>& ops, std::size_t dim) {
  if (ops.empty()) {
    std::vector<Matrix<T>> all;
    for (std::size_t i = 0; i < dim; ++i)
      for (std::size_t j = 0; j < dim; ++j) {
        Matrix<T> e(dim, dim);
        e(i, j) = T(1);
        all.push_back(std::move(e));
      }
    return all;
  }
  return intertwiners(ops, ops);
}

/// Basis of the B-symmetric operators commuting with every operator in `ops`,
/// on a space with diagonal inner product `weights`.
///
/// With S = D^-1 P, P symmetric, the condition S R = R S becomes
/// P R = (D R D^-1) P, which is linear in the upper triangle of P.
template <class T>
std::vector<Matrix<T>> symmetric_commutant(const std::vector<Matrix<T>>& ops, const Vector<T>& weights) {
  const std::size_t d = weights.size();
  auto var = [d](std::size_t a, std::size_t b) {
    if (a > b) std::swap(a, b);
    return a * d - a * (a + 1) / 2 + b;
  };
  const std::size_t nvars = d * (d + 1) / 2;
  RowReducer<T> red(nvars);
  for (const auto& R : ops) {
    Matrix<T> Q(d, d);
    for (std::size_t a = 0; a < d; ++a)
      for (std::size_t c = 0; c < d; ++c)
        if (!ScalarTraits<T>::is_exact_zero(R(a, c))) Q(a, c) = weights[a] * R(a, c) / weights[c];
    auto r_rows = detail::nonzero_rows_by_col(R);
    auto q_cols = detail::nonzero_cols_by_row(Q);
    for (std::size_t a = 0; a < d; ++a)
      for (std::size_t b = 0; b < d; ++b) {
        detail::SparseEquation<T> eq;
        for (auto c : r_rows[b]) eq.add(var(a, c), R(c, b));
        for (auto c : q_cols[a]) eq.add(var(c, b), -Q(a, c));
        auto row = eq.row();
        if (!row.empty()) red.add(std::move(row));
      }
  }
  std::vector<Matrix<T>> out;
  for (const auto& v : red.nullspace()) {
    Matrix<T> s(d, d);
    for (std::size_t a = 0; a < d; ++a)
      for (std::size_t b = 0; b < d; ++b) s(a, b) = v[var(a, b)] / weights[a];
    out.push_back(std::move(s));
  }
  return out;
}

/// Symmetric commutant of the isotropy action restricted to an invariant subspace,
/// as operators in the subspace's coordinates.
template <class T>
std::vector<Matrix<T>> commutant_sym(const IsotropyAction<T>& action, const Subspace<T>& subspace) {
  return symmetric_commutant(restrict_all(action.ops(), subspace), subspace.norms());
}

/// One eigenvalue cluster of a B-symmetric operator.
template <class T>
struct EigenBlock {
  T value;
  double approx = 0.0;
  std::vector<Vector<T>> vectors;
  bool exact = false;
};

/// Eigenspaces of an operator S that is symmetric for the diagonal inner
/// product `weights`.
///
/// Eigenvalues are located in double precision and clustered with relative
/// tolerance 1e-7. In exact mode each cluster value is rationalized and
/// accepted only if ker(S - q) is exactly of the cluster's size; blocks that
/// fail this keep their floating approximation and exact = false.
template <class T>
std::vector<EigenBlock<T>> eigen_blocks(const Matrix<T>& s, const Vector<T>& weights) {
  const std::size_t d = s.rows();
  std::vector<EigenBlock<T>> out;
  if (d == 0) return out;
  Eigen::MatrixXd m(d, d);
  std::vector<double> sq(d);
  for (std::size_t i = 0; i < d; ++i) sq[i] = std::sqrt(to_double(weights[i]));
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) m(i, j) = sq[i] * to_double(s(i, j)) / sq[j];
  m = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  const auto& ev = es.eigenvalues();
  double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
  std::vector<std::pair<std::size_t, std::size_t>> clusters;  // [begin, end)
  std::size_t begin = 0;
  for (std::size_t i = 1; i <= d; ++i)
    if (i == d || ev(static_cast<Eigen::Index>(i)) - ev(static_cast<Eigen::Index>(i - 1)) > 1e-7 * scale) {
      clusters.emplace_back(begin, i);
      begin = i;
    }
  for (auto [b, e] : clusters) {
    EigenBlock<T> blk;
    double mean = 0;
    for (std::size_t i = b; i < e; ++i) mean += ev(static_cast<Eigen::Index>(i));
    mean /= static_cast<double>(e - b);
    blk.approx = mean;
    if constexpr (ScalarTraits<T>::exact) {
      Rational q = rationalize(mean, 100000);
      if (std::abs(q.convert_to<double>() - mean) <= 1e-6 * scale) {
        Matrix<T> shifted = s;
        for (std::size_t i = 0; i < d; ++i) shifted(i, i) -= q;
        auto ker = nullspace(shifted);
        if (ker.size() == e - b) {
          blk.value = q;
          blk.vectors = orthogonalize(ker, weights);
          blk.exact = true;
        }
      }
      if (!blk.exact) {
        blk.value = rationalize(mean, 1000000000);
        for (std::size_t i = b; i < e; ++i) {
          Vector<T> v(d);
          for (std::size_t r = 0; r < d; ++r)
            v[r] = rationalize(es.eigenvectors()(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(i)) / sq[r],
                               1000000000);
          blk.vectors.push_back(std::move(v));
        }
      }
    } else {
      blk.value = mean;
      for (std::size_t i = b; i < e; ++i) {
        Vector<T> v(d);
        for (std::size_t r = 0; r < d; ++r)
          v[r] = es.eigenvectors()(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(i)) / sq[r];
        blk.vectors.push_back(std::move(v));
      }
      blk.exact = true;
    }
    out.push_back(std::move(blk));
  }
  return out;
}

template <class T>
struct Submodule {
  Subspace<T> space;
  bool trivial = false;
  /// Dimension of the full commutant of the restricted action: 1, 2 or 4.
  std::size_t commutant_dim = 1;
};

template <class T>
struct IsotypicalSummand {
  std::size_t class_id = 0;
  std::vector<Submodule<T>> members;
  Subspace<T> span;
  std::size_t division_dim = 1;
};

template <class T>
struct IsotypicalDecomposition {
  Subspace<T> s0;
  /// summands[0] is always S0 (it may have no members).
  std::vector<IsotypicalSummand<T>> summands;
  /// Intertwiner space dimensions between all nontrivial modules, in the order
  /// they appear across summands[1..].
  std::vector<std::vector<std::size_t>> intertwiner_dims;
  std::uint64_t seed = 0;

  std::vector<const Submodule<T>*> nontrivial_modules() const {
    std::vector<const Submodule<T>*> out;
    for (std::size_t s = 1; s < summands.size(); ++s)
      for (const auto& m : summands[s].members) out.push_back(&m);
    return out;
  }

  /// Number of free parameters of a symmetric equivariant operator with this
  /// isotypical structure: r + delta * r(r-1)/2 per summand.
  std::size_t block_parameter_count() const {
    std::size_t total = 0;
    for (const auto& s : summands) {
      std::size_t r = s.members.size();
      total += r + s.division_dim * r * (r - 1) / 2;
    }
    return total;
  }
};

namespace detail {

/// Certifies irreducibility of an invariant subspace (symmetric commutant is
/// the scalars and the full commutant is a real division algebra). Returns
/// the full commutant dimension, or 0 if the subspace is reducible.
template <class T>
std::size_t irreducible_commutant_dim(const std::vector<Matrix<T>>& restricted, const Subspace<T>& v) {
  auto sym = symmetric_commutant(restricted, v.norms());
  if (sym.size() != 1) return 0;
  std::size_t full = commutant(restricted, v.dim()).size();
  if (full != 1 && full != 2 && full != 4)
    throw Error(ErrorKind::Internal, "irreducibility certificate failed: commutant dimension " + std::to_string(full));
  return full;
}

template <class T>
bool is_scalar(const Matrix<T>& s) {
  for (std::size_t i = 0; i < s.rows(); ++i)
    for (std::size_t j = 0; j < s.cols(); ++j) {
      if (i != j && !is_zero(s(i, j))) return false;
      if (i == j && !is_zero(s(i, i) - s(0, 0))) return false;
    }
  return true;
}

/// Splits an invariant subspace into smaller invariant subspaces using the
/// eigenspaces of a symmetric element of the commutant. Returns the pieces
/// in ambient coordinates, or an empty list if no certified split was found.
template <class T>
std::vector<Subspace<T>> split_invariant(const Subspace<T>& v, const std::vector<Matrix<T>>& sym, std::mt19937_64& rng,
                                         std::string& diagnostic) {
  auto try_candidate = [&](const Matrix<T>& s) -> std::vector<Subspace<T>> {
    if (is_scalar(s)) return {};
    auto blocks = eigen_blocks(s, v.norms());
    std::vector<Subspace<T>> pieces;
    std::vector<Vector<T>> covered;
    for (const auto& b : blocks) {
      if (!b.exact) continue;
      std::vector<Vector<T>> amb;
      for (const auto& x : b.vectors) amb.push_back(v.embed(x));
      pieces.push_back(Subspace<T>::span_of(amb, v.weights()));
      covered.insert(covered.end(), amb.begin(), amb.end());
    }
    if (pieces.empty()) return {};
    std::size_t covered_dim = 0;
    for (const auto& p : pieces) covered_dim += p.dim();
    if (covered_dim == v.dim() && pieces.size() == 1) return {};
    if (covered_dim < v.dim()) pieces.push_back(Subspace<T>::span_of(covered, v.weights()).complement_in(v));
    return pieces;
  };
  for (const auto& s : sym) {
    auto pieces = try_candidate(s);
    if (!pieces.empty()) return pieces;
  }
  std::uniform_int_distribution<int> coef(-3, 3);
  for (int attempt = 0; attempt < 20; ++attempt) {
    Matrix<T> s(v.dim(), v.dim());
    for (const auto& b : sym) s += from_ratio<T>(coef(rng)) * b;
    auto pieces = try_candidate(s);
    if (!pieces.empty()) return pieces;
  }
  std::ostringstream os;
  os << "no certified eigenspace split for an invariant subspace of dimension " << v.dim()
     << " with symmetric commutant of dimension " << sym.size();
  diagnostic = os.str();
  return {};
}

}  // namespace detail

/// Irreducible decomposition of an invariant subspace under a list of
/// B-skew operators (ambient coordinates). Pieces are ordered by leading index.
template <class T>
std::vector<Submodule<T>> irreducible_pieces(const std::vector<Matrix<T>>& ops, const Subspace<T>& start,
                                             std::mt19937_64& rng) {
  std::vector<Submodule<T>> done;
  std::deque<Subspace<T>> work;
  if (start.dim() > 0) work.push_back(start);
  while (!work.empty()) {
    Subspace<T> v = std::move(work.front());
    work.pop_front();
    auto restricted = restrict_all(ops, v);
    auto sym = symmetric_commutant(restricted, v.norms());
    if (sym.size() == 1) {
      std::size_t full = detail::irreducible_commutant_dim(restricted, v);
      done.push_back({v, false, full});
      continue;
    }
    std::string diag;
    auto pieces = detail::split_invariant(v, sym, rng, diag);
    if (pieces.empty()) throw Error(ErrorKind::Ambiguous, diag);
    for (auto& p : pieces) work.push_back(std::move(p));
  }
  std::stable_sort(done.begin(), done.end(),
                   [](const auto& a, const auto& b) { return a.space.leading_index() < b.space.leading_index(); });
  return done;
}

/// S0 = {X in m : [a, X] = 0 for all a in h}, computed as the joint kernel.
template <class T>
Subspace<T> trivial_part(const IsotropyAction<T>& action) {
  RowReducer<T> r(action.dim_m());
  for (const auto& op : action.ops())
    for (std::size_t i = 0; i < op.rows(); ++i) r.add(op.row(i));
  return Subspace<T>::span_of(r.nullspace(), action.weights());
}

template <class T>
std::vector<std::vector<std::size_t>> intertwiner_table(const IsotropyAction<T>& action,
                                                        const std::vector<const Submodule<T>*>& modules) {
  std::vector<std::vector<Matrix<T>>> restricted;
  for (auto* m : modules) restricted.push_back(restrict_all(action.ops(), m->space));
  std::vector<std::vector<std::size_t>> dims(modules.size(), std::vector<std::size_t>(modules.size(), 0));
  for (std::size_t i = 0; i < modules.size(); ++i)
    for (std::size_t j = 0; j < modules.size(); ++j)
      dims[i][j] = action.ops().empty() ? modules[i]->space.dim() * modules[j]->space.dim()
                                        : intertwiners(restricted[i], restricted[j]).size();
  return dims;
}

/// Intertwiners from submodule a to submodule b, as matrices in their coordinates.
template <class T>
std::vector<Matrix<T>> intertwiners(const IsotropyAction<T>& action, const Subspace<T>& a, const Subspace<T>& b) {
  if (action.ops().empty()) {
    std::vector<Matrix<T>> all;
    for (std::size_t i = 0; i < b.dim(); ++i)
      for (std::size_t j = 0; j < a.dim(); ++j) {
        Matrix<T> e(b.dim(), a.dim());
        e(i, j) = T(1);
        all.push_back(std::move(e));
      }
    return all;
  }
  return intertwiners(restrict_all(action.ops(), a), restrict_all(action.ops(), b));
}

namespace detail {

template <class T>
void fill_summand_spans(IsotypicalDecomposition<T>& dec, const Vector<T>& weights) {
  for (auto& s : dec.summands) {
    std::vector<Vector<T>> vs;
    for (const auto& m : s.members) vs.insert(vs.end(), m.space.basis().begin(), m.space.basis().end());
    s.span = Subspace<T>::span_of(vs, weights);
    s.division_dim = s.members.empty() ? 1 : s.members.front().commutant_dim;
  }
}

template <class T>
void check_decomposition(const IsotropyAction<T>& action, const IsotypicalDecomposition<T>& dec) {
  std::size_t total = 0;
  for (const auto& s : dec.summands) total += s.span.dim();
  if (total != action.dim_m()) throw Error(ErrorKind::Internal, "summand dimensions do not add up to dim m");
  for (std::size_t i = 0; i < dec.summands.size(); ++i)
    for (std::size_t j = i + 1; j < dec.summands.size(); ++j)
      if (!dec.summands[i].span.orthogonal_to(dec.summands[j].span))
        throw Error(ErrorKind::Internal, "isotypical summands are not B-orthogonal");
  auto mods = dec.nontrivial_modules();
  std::vector<std::size_t> cls;
  for (std::size_t s = 1; s < dec.summands.size(); ++s)
    for (std::size_t k = 0; k < dec.summands[s].members.size(); ++k) cls.push_back(s);
  for (std::size_t i = 0; i < mods.size(); ++i)
    for (std::size_t j = 0; j < mods.size(); ++j) {
      bool equiv = dec.intertwiner_dims[i][j] > 0;
      if (equiv != (cls[i] == cls[j]))
        throw Error(ErrorKind::Internal, "equivalence classes disagree with intertwiner spaces");
    }
}

}  // namespace detail

/// Splits m into S0 and isotypical summands of irreducible submodules.
///
/// S0 is the joint kernel of the isotropy operators and is listed as trivial
/// one-dimensional members. The rest is split with eigenspaces of symmetric
/// commutant elements until every piece is certified irreducible; pieces are
/// grouped into classes by the existence of nonzero intertwiners.
template <class T>
IsotypicalDecomposition<T> decompose_isotypic(const IsotropyAction<T>& action, std::uint64_t seed = 1) {
  std::mt19937_64 rng(seed);
  IsotypicalDecomposition<T> dec;
  dec.seed = seed;
  const auto& w = action.weights();
  dec.s0 = trivial_part(action);
  IsotypicalSummand<T> s0_summand;
  s0_summand.class_id = 0;
  for (const auto& v : dec.s0.basis()) s0_summand.members.push_back({Subspace<T>({v}, w), true, 1});
  dec.summands.push_back(std::move(s0_summand));

  auto rest = dec.s0.complement_in(Subspace<T>::whole(w));
  auto pieces = irreducible_pieces(action.ops(), rest, rng);

  std::vector<std::vector<Matrix<T>>> reps;
  for (auto& p : pieces) {
    auto restricted = restrict_all(action.ops(), p.space);
    std::size_t cls = 0;
    for (std::size_t c = 0; c < reps.size(); ++c) {
      if (reps[c][0].rows() != restricted[0].rows()) continue;
      if (!intertwiners(reps[c], restricted).empty()) {
        cls = c + 1;
        break;
      }
    }
    if (cls == 0) {
      reps.push_back(restricted);
      cls = reps.size();
      IsotypicalSummand<T> s;
      s.class_id = cls;
      dec.summands.push_back(std::move(s));
    }
    dec.summands[cls].members.push_back(std::move(p));
  }
  detail::fill_summand_spans(dec, w);
  dec.intertwiner_dims = intertwiner_table(action, dec.nontrivial_modules());
  detail::check_decomposition(action, dec);
  return dec;
}

/// Replaces the members of one nontrivial summand by another choice of
/// irreducible submodules with the same span. Each replacement is checked to
/// be invariant, irreducible, mutually B-orthogonal and inside the summand.
template <class T>
IsotypicalDecomposition<T> with_members(const IsotropyAction<T>& action, IsotypicalDecomposition<T> dec,
                                        std::size_t summand, std::vector<Subspace<T>> members) {
  if (summand == 0 || summand >= dec.summands.size())
    throw Error(ErrorKind::InvalidDimension, "summand index out of range");
  auto& s = dec.summands[summand];
  std::size_t total = 0;
  std::vector<Submodule<T>> mods;
  for (std::size_t i = 0; i < members.size(); ++i) {
    if (!s.span.contains(members[i])) throw Error(ErrorKind::NotInSubspace, "member lies outside the summand");
    for (std::size_t j = 0; j < i; ++j)
      if (!members[i].orthogonal_to(members[j])) throw Error(ErrorKind::Internal, "members are not B-orthogonal");
    auto restricted = restrict_all(action.ops(), members[i]);
    std::size_t full = detail::irreducible_commutant_dim(restricted, members[i]);
    if (full == 0) throw Error(ErrorKind::Internal, "replacement member is reducible");
    total += members[i].dim();
    mods.push_back({members[i], false, full});
  }
  if (total != s.span.dim()) throw Error(ErrorKind::Internal, "replacement members do not span the summand");
  s.members = std::move(mods);
  detail::fill_summand_spans(dec, action.weights());
  dec.intertwiner_dims = intertwiner_table(action, dec.nontrivial_modules());
  detail::check_decomposition(action, dec);
  return dec;
}

template <class T>
struct IdealSplit {
  Subspace<T> center;
  std::vector<Subspace<T>> simples;
};

/// Bracket on S0 induced from g (m-component of the bracket), in S0 coordinates.
template <class T>
std::vector<Matrix<T>> s0_adjoint(const IsotropyAction<T>& action, const Subspace<T>& s0) {
  const auto& split = action.split();
  const auto& g = split.algebra();
  std::vector<Matrix<T>> ad;
  for (const auto& x : s0.basis()) {
    Matrix<T> m(s0.dim(), s0.dim());
    for (std::size_t j = 0; j < s0.dim(); ++j) {
      auto br = g.bracket(split.from_m(x), split.from_m(s0.basis()[j]));
      auto mc = split.m_coords(split.project(br, Part::M));
      if (!s0.contains(mc)) throw Error(ErrorKind::NotSubalgebra, "S0 is not closed under the induced bracket");
      m.set_col(j, s0.coords(mc));
    }
    ad.push_back(std::move(m));
  }
  return ad;
}

/// Center and simple ideals of S0 with its induced bracket.
template <class T>
IdealSplit<T> split_ideals(const IsotropyAction<T>& action, const Subspace<T>& s0, std::uint64_t seed = 1) {
  IdealSplit<T> out;
  const auto& w = action.weights();
  if (s0.dim() == 0) {
    out.center = Subspace<T>({}, w);
    return out;
  }
  auto ad = s0_adjoint(action, s0);
  RowReducer<T> r(s0.dim());
  for (const auto& a : ad)
    for (std::size_t i = 0; i < a.rows(); ++i) r.add(a.row(i));
  std::vector<Vector<T>> center_vs;
  for (const auto& c : r.nullspace()) center_vs.push_back(s0.embed(c));
  out.center = Subspace<T>::span_of(center_vs, w);
  auto derived = out.center.complement_in(s0);
  if (derived.dim() == 0) return out;
  // The semisimple part is spanned by brackets.
  std::vector<Vector<T>> brackets;
  for (const auto& a : ad)
    for (std::size_t j = 0; j < a.cols(); ++j) brackets.push_back(s0.embed(a.col(j)));
  if (rank_of(brackets, w.size()) != derived.dim())
    throw Error(ErrorKind::Internal, "S0 is not the direct sum of its center and derived algebra");
  std::vector<Matrix<T>> ops;
  for (const auto& x : s0.basis()) {
    // ad(x) on S0 expressed as an operator on ambient m-coordinates
    Matrix<T> m(w.size(), w.size());
    auto adx = ad[ops.size()];
    for (std::size_t j = 0; j < w.size(); ++j) {
      auto c = s0.coords(unit_vector<T>(w.size(), j));
      m.set_col(j, s0.embed(adx * c));
    }
    ops.push_back(std::move(m));
    (void)x;
  }
  std::mt19937_64 rng(seed);
  for (auto& p : irreducible_pieces(ops, derived, rng)) {
    for (const auto& op : ops)
      for (const auto& v : p.space.basis())
        if (!p.space.contains(op * v)) throw Error(ErrorKind::Internal, "simple piece is not an ideal");
    out.simples.push_back(std::move(p.space));
  }
  return out;
}

}  // namespace golab
