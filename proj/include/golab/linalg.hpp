#pragma once

#include "golab/scalar.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

namespace golab {

template <class T>
using Vector = std::vector<T>;

template <class T>
Vector<T> zeros(std::size_t n) {
  return Vector<T>(n, T(0));
}

template <class T>
Vector<T> unit_vector(std::size_t n, std::size_t i) {
  Vector<T> v(n, T(0));
  v[i] = T(1);
  return v;
}

template <class T>
bool is_zero_vector(const Vector<T>& v) {
  return std::all_of(v.begin(), v.end(), [](const T& x) { return is_zero(x); });
}

template <class T>
void axpy(const T& alpha, const Vector<T>& x, Vector<T>& y) {
  for (std::size_t i = 0; i < x.size(); ++i)
    if (!ScalarTraits<T>::is_exact_zero(x[i])) y[i] += alpha * x[i];
}

template <class T>
Vector<T> operator+(Vector<T> a, const Vector<T>& b) {
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
  return a;
}

template <class T>
Vector<T> operator-(Vector<T> a, const Vector<T>& b) {
  for (std::size_t i = 0; i < a.size(); ++i) a[i] -= b[i];
  return a;
}

template <class T>
Vector<T> scaled(const T& s, Vector<T> a) {
  for (auto& x : a) x *= s;
  return a;
}

/// Dense row-major matrix.
template <class T>
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, T(0)) {}

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = T(1);
    return m;
  }

  static Matrix from_columns(const std::vector<Vector<T>>& cols, std::size_t rows) {
    Matrix m(rows, cols.size());
    for (std::size_t j = 0; j < cols.size(); ++j)
      for (std::size_t i = 0; i < rows; ++i) m(i, j) = cols[j][i];
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  T& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const T& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  Vector<T> row(std::size_t i) const {
    return Vector<T>(data_.begin() + static_cast<std::ptrdiff_t>(i * cols_),
                     data_.begin() + static_cast<std::ptrdiff_t>((i + 1) * cols_));
  }
  Vector<T> col(std::size_t j) const {
    Vector<T> c(rows_);
    for (std::size_t i = 0; i < rows_; ++i) c[i] = (*this)(i, j);
    return c;
  }
  void set_col(std::size_t j, const Vector<T>& v) {
    for (std::size_t i = 0; i < rows_; ++i) (*this)(i, j) = v[i];
  }

  Matrix transpose() const {
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  Matrix operator*(const Matrix& o) const {
    if (cols_ != o.rows_) throw Error(ErrorKind::DimensionMismatch, "matrix product shape mismatch");
    Matrix r(rows_, o.cols_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t k = 0; k < cols_; ++k) {
        const T& a = (*this)(i, k);
        if (ScalarTraits<T>::is_exact_zero(a)) continue;
        for (std::size_t j = 0; j < o.cols_; ++j) {
          const T& b = o(k, j);
          if (!ScalarTraits<T>::is_exact_zero(b)) r(i, j) += a * b;
        }
      }
    return r;
  }

  Vector<T> operator*(const Vector<T>& v) const {
    if (cols_ != v.size()) throw Error(ErrorKind::DimensionMismatch, "matrix-vector shape mismatch");
    Vector<T> r(rows_, T(0));
    for (std::size_t j = 0; j < cols_; ++j) {
      if (ScalarTraits<T>::is_exact_zero(v[j])) continue;
      for (std::size_t i = 0; i < rows_; ++i) {
        const T& a = (*this)(i, j);
        if (!ScalarTraits<T>::is_exact_zero(a)) r[i] += a * v[j];
      }
    }
    return r;
  }

  Matrix& operator+=(const Matrix& o) {
    check_same(o);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
  }
  Matrix& operator-=(const Matrix& o) {
    check_same(o);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
    return *this;
  }
  Matrix& operator*=(const T& s) {
    for (auto& x : data_) x *= s;
    return *this;
  }
  friend Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
  friend Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
  friend Matrix operator*(const T& s, Matrix a) { return a *= s; }

  bool is_zero() const {
    return std::all_of(data_.begin(), data_.end(), [](const T& x) { return golab::is_zero(x); });
  }
  bool operator==(const Matrix& o) const {
    return rows_ == o.rows_ && cols_ == o.cols_ && data_ == o.data_;
  }

  T trace() const {
    T t(0);
    for (std::size_t i = 0; i < std::min(rows_, cols_); ++i) t += (*this)(i, i);
    return t;
  }

  const std::vector<T>& data() const { return data_; }

 private:
  void check_same(const Matrix& o) const {
    if (rows_ != o.rows_ || cols_ != o.cols_)
      throw Error(ErrorKind::DimensionMismatch, "matrix shape mismatch");
  }

  std::size_t rows_ = 0, cols_ = 0;
  std::vector<T> data_;
};

template <class T>
using SparseRow = std::vector<std::pair<std::size_t, T>>;

template <class T>
SparseRow<T> to_sparse(const Vector<T>& v) {
  SparseRow<T> r;
  for (std::size_t i = 0; i < v.size(); ++i)
    if (!is_zero(v[i])) r.emplace_back(i, v[i]);
  return r;
}

/// Incremental reduced row echelon form over sparse rows.
///
/// Rows stay fully reduced: every stored row has a leading 1 and zeros in all
/// other pivot columns. The nullspace basis is read off the free columns.
template <class T>
class RowReducer {
 public:
  explicit RowReducer(std::size_t cols) : cols_(cols), pivot_row_(cols, npos) {}

  std::size_t cols() const { return cols_; }
  std::size_t rank() const { return rows_.size(); }

  /// Returns true when the row was independent of the rows added so far.
  bool add(SparseRow<T> row) {
    reduce(row);
    if (row.empty()) return false;
    const std::size_t lead = row.front().first;
    const T inv = T(1) / row.front().second;
    for (auto& [c, v] : row) v *= inv;
    row.front().second = T(1);
    for (auto& other : rows_) {
      auto it = find(other, lead);
      if (it == other.end()) continue;
      T coef = it->second;
      other = combine(other, -coef, row);
    }
    pivot_row_[lead] = rows_.size();
    pivot_cols_.push_back(lead);
    rows_.push_back(std::move(row));
    return true;
  }

  bool add(const Vector<T>& dense) { return add(to_sparse(dense)); }

  /// True if v lies in the row space.
  bool in_span(const Vector<T>& v) const {
    auto r = to_sparse(v);
    reduce(r);
    return r.empty();
  }

  bool is_pivot(std::size_t c) const { return pivot_row_[c] != npos; }

  /// Reduced rows sorted by pivot column.
  std::vector<Vector<T>> rref_rows() const {
    std::vector<std::size_t> order(pivot_cols_);
    std::sort(order.begin(), order.end());
    std::vector<Vector<T>> out;
    for (auto c : order) {
      Vector<T> d(cols_, T(0));
      for (const auto& [j, v] : rows_[pivot_row_[c]]) d[j] = v;
      out.push_back(std::move(d));
    }
    return out;
  }

  /// Basis of {x : R x = 0}, one vector per free column in increasing order.
  std::vector<Vector<T>> nullspace() const {
    std::vector<std::size_t> free_index(cols_, npos);
    std::vector<std::size_t> free_cols;
    for (std::size_t c = 0; c < cols_; ++c)
      if (pivot_row_[c] == npos) {
        free_index[c] = free_cols.size();
        free_cols.push_back(c);
      }
    std::vector<Vector<T>> basis(free_cols.size(), Vector<T>(cols_, T(0)));
    for (std::size_t f = 0; f < free_cols.size(); ++f) basis[f][free_cols[f]] = T(1);
    for (const auto& row : rows_) {
      const std::size_t p = row.front().first;
      for (const auto& [c, v] : row) {
        if (c == p) continue;
        auto fi = free_index[c];
        if (fi != npos) basis[fi][p] = -v;
      }
    }
    return basis;
  }

  /// Solution of the system whose augmented last column is the right-hand side.
  std::optional<Vector<T>> particular_solution() const {
    const std::size_t n = cols_ - 1;
    if (pivot_row_[n] != npos) return std::nullopt;
    Vector<T> x(n, T(0));
    for (const auto& row : rows_) {
      const std::size_t p = row.front().first;
      auto it = find_const(row, n);
      if (it != row.end()) x[p] = it->second;
    }
    return x;
  }

 private:
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  static typename SparseRow<T>::iterator find(SparseRow<T>& r, std::size_t c) {
    auto it = std::lower_bound(r.begin(), r.end(), c,
                               [](const auto& e, std::size_t col) { return e.first < col; });
    return (it != r.end() && it->first == c) ? it : r.end();
  }
  static typename SparseRow<T>::const_iterator find_const(const SparseRow<T>& r, std::size_t c) {
    auto it = std::lower_bound(r.begin(), r.end(), c,
                               [](const auto& e, std::size_t col) { return e.first < col; });
    return (it != r.end() && it->first == c) ? it : r.end();
  }

  /// a + s * b, dropping zeros.
  static SparseRow<T> combine(const SparseRow<T>& a, const T& s, const SparseRow<T>& b) {
    SparseRow<T> out;
    out.reserve(a.size() + b.size());
    std::size_t i = 0, j = 0;
    while (i < a.size() || j < b.size()) {
      if (j == b.size() || (i < a.size() && a[i].first < b[j].first)) {
        out.push_back(a[i++]);
      } else if (i == a.size() || b[j].first < a[i].first) {
        out.emplace_back(b[j].first, s * b[j].second);
        ++j;
      } else {
        T v = a[i].second + s * b[j].second;
        if (!is_zero(v)) out.emplace_back(a[i].first, std::move(v));
        ++i;
        ++j;
      }
    }
    return out;
  }

  void reduce(SparseRow<T>& row) const {
    std::vector<std::pair<std::size_t, T>> hits;
    for (const auto& [c, v] : row)
      if (pivot_row_[c] != npos) hits.emplace_back(c, v);
    for (const auto& [c, v] : hits) row = combine(row, -v, rows_[pivot_row_[c]]);
    if constexpr (!ScalarTraits<T>::exact) {
      std::erase_if(row, [](const auto& e) { return is_zero(e.second); });
    }
  }

  std::size_t cols_;
  std::vector<SparseRow<T>> rows_;
  std::vector<std::size_t> pivot_row_;
  std::vector<std::size_t> pivot_cols_;
};

template <class T>
std::vector<Vector<T>> nullspace(const Matrix<T>& m) {
  RowReducer<T> r(m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i) r.add(m.row(i));
  return r.nullspace();
}

template <class T>
std::size_t rank(const Matrix<T>& m) {
  RowReducer<T> r(m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i) r.add(m.row(i));
  return r.rank();
}

template <class T>
std::size_t rank_of(const std::vector<Vector<T>>& vectors, std::size_t dim) {
  RowReducer<T> r(dim);
  for (const auto& v : vectors) r.add(v);
  return r.rank();
}

/// Some solution of m x = b, or nullopt if inconsistent.
template <class T>
std::optional<Vector<T>> solve(const Matrix<T>& m, const Vector<T>& b) {
  RowReducer<T> r(m.cols() + 1);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    auto row = m.row(i);
    row.push_back(b[i]);
    r.add(row);
  }
  return r.particular_solution();
}

/// Gram-Schmidt without normalization with respect to a diagonal inner product.
/// Dependent inputs are dropped.
template <class T>
std::vector<Vector<T>> orthogonalize(const std::vector<Vector<T>>& vectors, const Vector<T>& weights) {
  auto ip = [&](const Vector<T>& a, const Vector<T>& b) {
    T s(0);
    for (std::size_t i = 0; i < a.size(); ++i)
      if (!ScalarTraits<T>::is_exact_zero(a[i]) && !ScalarTraits<T>::is_exact_zero(b[i]))
        s += a[i] * b[i] * weights[i];
    return s;
  };
  std::vector<Vector<T>> out;
  std::vector<T> norms;
  for (const auto& v : vectors) {
    Vector<T> w = v;
    for (std::size_t j = 0; j < out.size(); ++j) {
      T c = ip(w, out[j]) / norms[j];
      if (!ScalarTraits<T>::is_exact_zero(c)) axpy(T(-c), out[j], w);
    }
    T nn = ip(w, w);
    if (is_zero(nn) || is_zero_vector(w)) continue;
    out.push_back(std::move(w));
    norms.push_back(std::move(nn));
  }
  return out;
}

/// Positive definiteness of a symmetric matrix through elimination pivots
/// (equivalently leading principal minors).
template <class T>
bool is_positive_definite(Matrix<T> m) {
  const std::size_t n = m.rows();
  for (std::size_t k = 0; k < n; ++k) {
    if (!ScalarTraits<T>::is_positive(m(k, k))) return false;
    for (std::size_t i = k + 1; i < n; ++i) {
      if (ScalarTraits<T>::is_exact_zero(m(i, k))) continue;
      T f = m(i, k) / m(k, k);
      for (std::size_t j = k; j < n; ++j)
        if (!ScalarTraits<T>::is_exact_zero(m(k, j))) m(i, j) -= f * m(k, j);
    }
  }
  return true;
}

template <class T>
Eigen::MatrixXd to_eigen(const Matrix<T>& m) {
  Eigen::MatrixXd e(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) e(i, j) = to_double(m(i, j));
  return e;
}

}  // namespace golab
