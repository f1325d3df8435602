#pragma once

#include "golab/linalg.hpp"

#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

namespace golab {

template <class T>
struct StructureTerm {
  std::size_t index;
  T coeff;
};

/// A real Lie algebra given by a basis, its structure constants and the
/// Gram matrix of the invariant inner product B.
///
/// Basis matrices are optional. When present they are the real matrices the
/// basis elements stand for (complex n x n matrices in their real 2n x 2n
/// embedding) and B(X, Y) = -trace_scale * Trace(XY) on them.
template <class T>
class MatrixLieAlgebra {
 public:
  using Table = std::vector<std::vector<StructureTerm<T>>>;

  MatrixLieAlgebra(std::size_t n, std::vector<std::string> labels, Table table, Matrix<T> gram,
                   std::vector<Matrix<T>> matrices = {}, T trace_scale = T(1))
      : n_(n),
        labels_(std::move(labels)),
        table_(std::move(table)),
        gram_(std::move(gram)),
        matrices_(std::move(matrices)),
        trace_scale_(std::move(trace_scale)) {
    const std::size_t d = labels_.size();
    if (table_.size() != d * d || gram_.rows() != d || gram_.cols() != d ||
        (!matrices_.empty() && matrices_.size() != d))
      throw Error(ErrorKind::DimensionMismatch, "inconsistent algebra data");
    gram_diagonal_ = true;
    for (std::size_t i = 0; i < d && gram_diagonal_; ++i)
      for (std::size_t j = 0; j < d; ++j)
        if (i != j && !is_zero(gram_(i, j))) {
          gram_diagonal_ = false;
          break;
        }
  }

  /// Builds the algebra spanned by `matrices`; structure constants come from
  /// matrix commutators expanded in the basis.
  static MatrixLieAlgebra from_matrices(std::size_t n, std::vector<std::string> labels,
                                        std::vector<Matrix<T>> matrices, T trace_scale) {
    const std::size_t d = matrices.size();
    Matrix<T> gram(d, d);
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j)
        gram(i, j) = trace_form(matrices[i], matrices[j], trace_scale);
    Table table(d * d);
    MatrixLieAlgebra probe(n, labels, Table(d * d), gram, matrices, trace_scale);
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) {
        auto c = probe.coords_of(commutator(matrices[i], matrices[j]));
        if (!c) throw Error(ErrorKind::NotSubalgebra, "basis is not closed under the commutator");
        for (std::size_t k = 0; k < d; ++k)
          if (!is_zero((*c)[k])) table[i * d + j].push_back({k, (*c)[k]});
      }
    return MatrixLieAlgebra(n, std::move(labels), std::move(table), std::move(gram),
                            std::move(matrices), std::move(trace_scale));
  }

  std::size_t n() const { return n_; }
  std::size_t dim() const { return labels_.size(); }
  const std::string& label(std::size_t i) const { return labels_[i]; }
  const std::vector<std::string>& labels() const { return labels_; }
  const Matrix<T>& gram() const { return gram_; }
  bool gram_is_diagonal() const { return gram_diagonal_; }
  bool has_matrices() const { return !matrices_.empty(); }
  const Matrix<T>& basis_matrix(std::size_t i) const { return matrices_.at(i); }
  const T& trace_scale() const { return trace_scale_; }

  const std::vector<StructureTerm<T>>& structure(std::size_t i, std::size_t j) const {
    return table_[i * dim() + j];
  }

  /// Index of the basis element with the given label, or dim() when absent.
  std::size_t index_of(const std::string& label) const {
    for (std::size_t i = 0; i < dim(); ++i)
      if (labels_[i] == label) return i;
    return dim();
  }

  Vector<T> unit(std::size_t i) const { return unit_vector<T>(dim(), i); }

  Vector<T> bracket(const Vector<T>& x, const Vector<T>& y) const {
    check_size(x);
    check_size(y);
    const std::size_t d = dim();
    Vector<T> out(d, T(0));
    std::vector<std::size_t> nx, ny;
    for (std::size_t i = 0; i < d; ++i) {
      if (!ScalarTraits<T>::is_exact_zero(x[i])) nx.push_back(i);
      if (!ScalarTraits<T>::is_exact_zero(y[i])) ny.push_back(i);
    }
    T prod;
    for (auto i : nx)
      for (auto j : ny) {
        const auto& terms = table_[i * d + j];
        if (terms.empty()) continue;
        prod = x[i] * y[j];
        for (const auto& t : terms) out[t.index] += prod * t.coeff;
      }
    return out;
  }

  T inner(const Vector<T>& x, const Vector<T>& y) const {
    check_size(x);
    check_size(y);
    T s(0);
    const std::size_t d = dim();
    if (gram_diagonal_) {
      for (std::size_t i = 0; i < d; ++i)
        if (!ScalarTraits<T>::is_exact_zero(x[i]) && !ScalarTraits<T>::is_exact_zero(y[i]))
          s += x[i] * y[i] * gram_(i, i);
      return s;
    }
    for (std::size_t i = 0; i < d; ++i) {
      if (ScalarTraits<T>::is_exact_zero(x[i])) continue;
      for (std::size_t j = 0; j < d; ++j)
        if (!ScalarTraits<T>::is_exact_zero(y[j])) s += x[i] * gram_(i, j) * y[j];
    }
    return s;
  }

  /// Adjoint matrix of x acting on g in the algebra basis.
  Matrix<T> ad(const Vector<T>& x) const {
    Matrix<T> m(dim(), dim());
    for (std::size_t j = 0; j < dim(); ++j) m.set_col(j, bracket(x, unit(j)));
    return m;
  }

  Matrix<T> matrix_of(const Vector<T>& x) const {
    if (!has_matrices()) throw Error(ErrorKind::Internal, "algebra carries no basis matrices");
    check_size(x);
    Matrix<T> m(matrices_[0].rows(), matrices_[0].cols());
    for (std::size_t i = 0; i < dim(); ++i)
      if (!is_zero(x[i])) m += x[i] * matrices_[i];
    return m;
  }

  /// Coordinates of a matrix in the basis, or nullopt if it is not in the span.
  std::optional<Vector<T>> coords_of(const Matrix<T>& mat) const {
    const std::size_t d = dim();
    Vector<T> rhs(d);
    for (std::size_t i = 0; i < d; ++i) rhs[i] = trace_form(mat, matrices_[i], trace_scale_);
    auto c = solve(gram_, rhs);
    if (!c) return std::nullopt;
    if (!(matrix_of(*c) - mat).is_zero()) return std::nullopt;
    return c;
  }

  static Matrix<T> commutator(const Matrix<T>& a, const Matrix<T>& b) { return a * b - b * a; }

  static T trace_form(const Matrix<T>& a, const Matrix<T>& b, const T& scale) {
    T tr(0);
    for (std::size_t i = 0; i < a.rows(); ++i)
      for (std::size_t k = 0; k < a.cols(); ++k)
        if (!ScalarTraits<T>::is_exact_zero(a(i, k)) && !ScalarTraits<T>::is_exact_zero(b(k, i)))
          tr += a(i, k) * b(k, i);
    return -scale * tr;
  }

  /// Human-readable linear combination, e.g. "-1*e_2_3 + 2*eb_1_1".
  std::string format(const Vector<T>& x) const {
    std::ostringstream os;
    bool first = true;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (is_zero(x[i])) continue;
      if (!first) os << " + ";
      os << to_string(x[i]) << "*" << labels_[i];
      first = false;
    }
    if (first) os << "0";
    return os.str();
  }

 private:
  void check_size(const Vector<T>& x) const {
    if (x.size() != dim())
      throw Error(ErrorKind::DimensionMismatch, "vector length " + std::to_string(x.size()) +
                                                    " does not match algebra dimension " +
                                                    std::to_string(dim()));
  }

  std::size_t n_;
  std::vector<std::string> labels_;
  Table table_;
  Matrix<T> gram_;
  bool gram_diagonal_ = false;
  std::vector<Matrix<T>> matrices_;
  T trace_scale_;
};

template <class T>
using AlgebraPtr = std::shared_ptr<const MatrixLieAlgebra<T>>;

/// Real 2n x 2n embedding of the complex matrix re + i*im.
template <class T>
Matrix<T> complex_embedding(const Matrix<T>& re, const Matrix<T>& im) {
  const std::size_t n = re.rows();
  Matrix<T> m(2 * n, 2 * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      m(i, j) = re(i, j);
      m(i + n, j + n) = re(i, j);
      m(i, j + n) = -im(i, j);
      m(i + n, j) = im(i, j);
    }
  return m;
}

/// Canonical basis of u(n): all e_ij (i<j) in lexicographic order, then all
/// eb_lm (l<=m) in lexicographic order, with
///   e_ij = E_ij - E_ji,  eb_ij = sqrt(-1) (E_ij + E_ji).
/// Indices are 0-based here; labels are 1-based.
class UnitaryBasisIndex {
 public:
  explicit UnitaryBasisIndex(std::size_t n) : n_(n), e_(n * n, npos), eb_(n * n, npos) {
    std::size_t idx = 0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) e_[i * n + j] = idx++;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i; j < n; ++j) eb_[i * n + j] = idx++;
    dim_ = idx;
  }

  std::size_t n() const { return n_; }
  std::size_t dim() const { return dim_; }
  /// Index of e_ij for i < j.
  std::size_t e(std::size_t i, std::size_t j) const { return e_[i * n_ + j]; }
  /// Index of eb_ij for any order of i, j.
  std::size_t eb(std::size_t i, std::size_t j) const {
    return i <= j ? eb_[i * n_ + j] : eb_[j * n_ + i];
  }

  struct Entry {
    bool bar;
    std::size_t i, j;
  };
  Entry entry(std::size_t idx) const {
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = 0; j < n_; ++j) {
        if (e_[i * n_ + j] == idx) return {false, i, j};
        if (eb_[i * n_ + j] == idx) return {true, i, j};
      }
    throw Error(ErrorKind::Internal, "basis index out of range");
  }

  std::string label(std::size_t idx) const {
    auto en = entry(idx);
    return std::string(en.bar ? "eb_" : "e_") + std::to_string(en.i + 1) + "_" +
           std::to_string(en.j + 1);
  }

 private:
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
  std::size_t n_, dim_ = 0;
  std::vector<std::size_t> e_, eb_;
};

namespace detail {

template <class T>
void add_term(std::map<std::size_t, T>& acc, std::size_t idx, int sign) {
  acc[idx] += T(sign);
}

/// Adds sign * e_im, using e_im = -e_mi and e_ii = 0.
template <class T>
void add_e(std::map<std::size_t, T>& acc, const UnitaryBasisIndex& b, std::size_t i, std::size_t m,
           int sign) {
  if (i == m) return;
  if (i < m)
    add_term(acc, b.e(i, m), sign);
  else
    add_term(acc, b.e(m, i), -sign);
}

template <class T>
void add_eb(std::map<std::size_t, T>& acc, const UnitaryBasisIndex& b, std::size_t i, std::size_t m,
            int sign) {
  add_term(acc, b.eb(i, m), sign);
}

/// Brackets of the basis vectors in closed form, for generic index values
/// (including repeated indices and the diagonal eb_ii).
template <class T>
std::map<std::size_t, T> unitary_bracket(const UnitaryBasisIndex& b, bool bar1, std::size_t i,
                                         std::size_t j, bool bar2, std::size_t l, std::size_t m) {
  std::map<std::size_t, T> acc;
  auto d = [](std::size_t a, std::size_t c) { return a == c; };
  if (!bar1 && !bar2) {
    // [e_ij, e_lm] = d_jl e_im - d_im e_lj - d_il e_jm - d_jm e_il
    if (d(j, l)) add_e(acc, b, i, m, 1);
    if (d(i, m)) add_e(acc, b, l, j, -1);
    if (d(i, l)) add_e(acc, b, j, m, -1);
    if (d(j, m)) add_e(acc, b, i, l, -1);
  } else if (bar1 && !bar2) {
    // [eb_ij, e_lm] = d_jl eb_im - d_im eb_lj + d_il eb_jm - d_jm eb_il
    if (d(j, l)) add_eb(acc, b, i, m, 1);
    if (d(i, m)) add_eb(acc, b, l, j, -1);
    if (d(i, l)) add_eb(acc, b, j, m, 1);
    if (d(j, m)) add_eb(acc, b, i, l, -1);
  } else if (!bar1 && bar2) {
    auto r = unitary_bracket<T>(b, true, l, m, false, i, j);
    for (auto& [k, v] : r) acc[k] -= v;
  } else {
    // [eb_ij, eb_lm] = -d_jl e_im + d_im e_lj - d_il e_jm - d_jm e_il
    if (d(j, l)) add_e(acc, b, i, m, -1);
    if (d(i, m)) add_e(acc, b, l, j, 1);
    if (d(i, l)) add_e(acc, b, j, m, -1);
    if (d(j, m)) add_e(acc, b, i, l, -1);
  }
  std::erase_if(acc, [](const auto& kv) { return is_zero(kv.second); });
  return acc;
}

}  // namespace detail

/// u(n) with its canonical basis. Structure constants come from the closed-form
/// bracket relations; the basis matrices are kept so they can be checked
/// against direct commutators.
template <class T>
MatrixLieAlgebra<T> build_un(std::size_t n) {
  if (n == 0) throw Error(ErrorKind::InvalidDimension, "u(n) requires n >= 1");
  UnitaryBasisIndex b(n);
  const std::size_t d = b.dim();
  std::vector<std::string> labels(d);
  std::vector<Matrix<T>> mats(d);
  Matrix<T> gram(d, d);
  for (std::size_t idx = 0; idx < d; ++idx) {
    auto en = b.entry(idx);
    labels[idx] = b.label(idx);
    Matrix<T> re(n, n), im(n, n);
    if (en.bar) {
      im(en.i, en.j) += T(1);
      im(en.j, en.i) += T(1);
      gram(idx, idx) = T(en.i == en.j ? 4 : 2);
    } else {
      re(en.i, en.j) = T(1);
      re(en.j, en.i) = T(-1);
      gram(idx, idx) = T(2);
    }
    mats[idx] = complex_embedding(re, im);
  }
  typename MatrixLieAlgebra<T>::Table table(d * d);
  for (std::size_t p = 0; p < d; ++p) {
    auto a = b.entry(p);
    for (std::size_t q = 0; q < d; ++q) {
      auto c = b.entry(q);
      auto terms = detail::unitary_bracket<T>(b, a.bar, a.i, a.j, c.bar, c.i, c.j);
      for (auto& [k, v] : terms) table[p * d + q].push_back({k, v});
    }
  }
  // The real embedding doubles traces: Tr_R(X) = 2 Re Tr_C(X).
  return MatrixLieAlgebra<T>(n, std::move(labels), std::move(table), std::move(gram), std::move(mats),
                             from_ratio<T>(1, 2));
}

struct PropertyCheck {
  std::string name;
  bool passed = true;
  std::string counterexample;
};

struct AlgebraReport {
  std::vector<PropertyCheck> checks;

  bool all_passed() const {
    for (const auto& c : checks)
      if (!c.passed) return false;
    return true;
  }
  const PropertyCheck* find(const std::string& name) const {
    for (const auto& c : checks)
      if (c.name == name) return &c;
    return nullptr;
  }
};

/// Checks closure (against basis matrices when present), antisymmetry, the
/// Jacobi identity, symmetry and positive definiteness of the Gram matrix,
/// B-orthogonality of the basis and ad-invariance of B. Reports the first
/// counterexample for each failed property.
template <class T>
AlgebraReport validate_algebra(const MatrixLieAlgebra<T>& g) {
  AlgebraReport report;
  const std::size_t d = g.dim();
  auto lbl = [&](std::size_t i) { return g.label(i); };

  if (g.has_matrices()) {
    PropertyCheck c{"closure", true, {}};
    for (std::size_t i = 0; i < d && c.passed; ++i)
      for (std::size_t j = 0; j < d; ++j) {
        auto direct = MatrixLieAlgebra<T>::commutator(g.basis_matrix(i), g.basis_matrix(j));
        if (!(g.matrix_of(g.bracket(g.unit(i), g.unit(j))) - direct).is_zero()) {
          c.passed = false;
          c.counterexample = "[" + lbl(i) + ", " + lbl(j) + "]";
          break;
        }
      }
    report.checks.push_back(c);
  }

  {
    PropertyCheck c{"antisymmetry", true, {}};
    for (std::size_t i = 0; i < d && c.passed; ++i)
      for (std::size_t j = i; j < d; ++j) {
        auto s = g.bracket(g.unit(i), g.unit(j)) + g.bracket(g.unit(j), g.unit(i));
        if (!is_zero_vector(s)) {
          c.passed = false;
          c.counterexample = "[" + lbl(i) + ", " + lbl(j) + "] + [" + lbl(j) + ", " + lbl(i) + "] != 0";
          break;
        }
      }
    report.checks.push_back(c);
  }

  {
    PropertyCheck c{"jacobi", true, {}};
    std::vector<Vector<T>> br(d * d);
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) br[i * d + j] = g.bracket(g.unit(i), g.unit(j));
    for (std::size_t i = 0; i < d && c.passed; ++i)
      for (std::size_t j = 0; j < d && c.passed; ++j)
        for (std::size_t k = 0; k < d; ++k) {
          auto s = g.bracket(br[i * d + j], g.unit(k)) + g.bracket(br[j * d + k], g.unit(i)) +
                   g.bracket(br[k * d + i], g.unit(j));
          if (!is_zero_vector(s)) {
            c.passed = false;
            c.counterexample = "(" + lbl(i) + ", " + lbl(j) + ", " + lbl(k) + ")";
            break;
          }
        }
    report.checks.push_back(c);
  }

  {
    PropertyCheck c{"inner_product", true, {}};
    const auto& G = g.gram();
    for (std::size_t i = 0; i < d && c.passed; ++i)
      for (std::size_t j = 0; j < d; ++j)
        if (!is_zero(G(i, j) - G(j, i))) {
          c.passed = false;
          c.counterexample = "Gram not symmetric at (" + lbl(i) + ", " + lbl(j) + ")";
          break;
        }
    if (c.passed && !is_positive_definite(G)) {
      c.passed = false;
      c.counterexample = "Gram matrix not positive definite";
    }
    if (c.passed && g.has_matrices()) {
      for (std::size_t i = 0; i < d && c.passed; ++i)
        for (std::size_t j = 0; j < d; ++j)
          if (!is_zero(G(i, j) - MatrixLieAlgebra<T>::trace_form(g.basis_matrix(i), g.basis_matrix(j),
                                                                 g.trace_scale()))) {
            c.passed = false;
            c.counterexample = "Gram differs from -Trace form at (" + lbl(i) + ", " + lbl(j) + ")";
            break;
          }
    }
    report.checks.push_back(c);
  }

  {
    PropertyCheck c{"basis_orthogonal", g.gram_is_diagonal(), {}};
    if (!c.passed) c.counterexample = "Gram matrix has off-diagonal entries";
    report.checks.push_back(c);
  }

  {
    PropertyCheck c{"ad_invariance", true, {}};
    std::vector<Vector<T>> br(d * d);
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) br[i * d + j] = g.bracket(g.unit(i), g.unit(j));
    for (std::size_t z = 0; z < d && c.passed; ++z)
      for (std::size_t x = 0; x < d && c.passed; ++x)
        for (std::size_t y = 0; y < d; ++y) {
          T s = g.inner(br[z * d + x], g.unit(y)) + g.inner(g.unit(x), br[z * d + y]);
          if (!is_zero(s)) {
            c.passed = false;
            c.counterexample = "B([" + lbl(z) + "," + lbl(x) + "]," + lbl(y) + ") + B(" + lbl(x) + ",[" +
                               lbl(z) + "," + lbl(y) + "]) != 0";
            break;
          }
        }
    report.checks.push_back(c);
  }
  return report;
}

}  // namespace golab
