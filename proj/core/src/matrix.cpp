#include "stableid/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "stableid/errors.hpp"

namespace stableid {

namespace {

void require_positive_shape(std::size_t rows, std::size_t cols) {
  if (rows == 0 || cols == 0) {
    throw DimensionError("matrix dimensions must be positive, got " +
                         std::to_string(rows) + "x" + std::to_string(cols));
  }
}

void require_finite(const std::vector<double>& entries) {
  for (double v : entries) {
    if (!std::isfinite(v)) {
      throw InvalidArgumentError("matrix entries must be finite");
    }
  }
}

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError(std::string("shape mismatch in ") + op + ": " +
                         std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                         " vs " + std::to_string(b.rows()) + "x" +
                         std::to_string(b.cols()));
  }
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {
  require_positive_shape(rows, cols);
}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> entries)
    : rows_(rows), cols_(cols), data_(std::move(entries)) {
  require_positive_shape(rows, cols);
  if (data_.size() != rows * cols) {
    throw DimensionError("entry count " + std::to_string(data_.size()) +
                         " does not match shape " + std::to_string(rows) + "x" +
                         std::to_string(cols));
  }
  require_finite(data_);
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ > 0 ? rows.begin()->size() : 0;
  require_positive_shape(rows_, cols_);
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) {
      throw DimensionError("ragged initializer list");
    }
    data_.insert(data_.end(), r.begin(), r.end());
  }
  require_finite(data_);
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::constant(std::size_t rows, std::size_t cols, double value) {
  if (!std::isfinite(value)) {
    throw InvalidArgumentError("matrix entries must be finite");
  }
  Matrix m(rows, cols);
  std::fill(m.data_.begin(), m.data_.end(), value);
  return m;
}

Matrix operator+(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "operator+");
  Matrix out(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(i, j) = a(i, j) + b(i, j);
  return out;
}

Matrix operator-(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "operator-");
  Matrix out(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(i, j) = a(i, j) - b(i, j);
  return out;
}

Matrix operator-(const Matrix& a) { return -1.0 * a; }

Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw DimensionError("inner dimensions do not match in operator*: " +
                         std::to_string(a.cols()) + " vs " +
                         std::to_string(b.rows()));
  }
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) {
        out(i, j) += aik * b(k, j);
      }
    }
  }
  return out;
}

Matrix operator*(double s, const Matrix& a) {
  Matrix out(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(i, j) = s * a(i, j);
  return out;
}

Matrix operator*(const Matrix& a, double s) { return s * a; }

std::vector<double> operator*(const Matrix& a, const std::vector<double>& x) {
  if (a.cols() != x.size()) {
    throw DimensionError("matrix-vector size mismatch");
  }
  std::vector<double> y(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) acc += a(i, j) * x[j];
    y[i] = acc;
  }
  return y;
}

Matrix transpose(const Matrix& a) {
  Matrix out(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
  return out;
}

Matrix symmetrize(const Matrix& a) {
  if (!a.square()) throw DimensionError("symmetrize requires a square matrix");
  Matrix out(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      out(i, j) = 0.5 * (a(i, j) + a(j, i));
  return out;
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) {
      const double aij = a(i, j);
      if (aij == 0.0) continue;
      for (std::size_t k = 0; k < b.rows(); ++k)
        for (std::size_t l = 0; l < b.cols(); ++l)
          out(i * b.rows() + k, j * b.cols() + l) = aij * b(k, l);
    }
  return out;
}

double trace(const Matrix& a) {
  if (!a.square()) throw DimensionError("trace requires a square matrix");
  double t = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) t += a(i, i);
  return t;
}

double frobenius_norm(const Matrix& a) {
  double acc = 0.0;
  for (double v : a.entries()) acc += v * v;
  return std::sqrt(acc);
}

double max_abs(const Matrix& a) {
  double m = 0.0;
  for (double v : a.entries()) m = std::max(m, std::fabs(v));
  return m;
}

bool is_symmetric(const Matrix& a, double rtol) {
  if (!a.square()) return false;
  double asym = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = i + 1; j < a.cols(); ++j) {
      const double d = a(i, j) - a(j, i);
      asym += 2.0 * d * d;
    }
  const double scale = frobenius_norm(a);
  return std::sqrt(asym) <= rtol * std::max(scale, 1e-300);
}

LuDecomposition lu_decompose(const Matrix& a) {
  if (!a.square()) throw DimensionError("LU requires a square matrix");
  const std::size_t n = a.rows();
  LuDecomposition d;
  d.lu = a;
  d.perm.resize(n);
  for (std::size_t i = 0; i < n; ++i) d.perm[i] = static_cast<int>(i);

  const double pivot_floor = 4.0 * 2.220446049250313e-16 *
                             static_cast<double>(n) * max_abs(a);
  d.min_pivot = std::numeric_limits<double>::infinity();

  Matrix& lu = d.lu;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    double best = std::fabs(lu(k, k));
    for (std::size_t i = k + 1; i < n; ++i) {
      const double v = std::fabs(lu(i, k));
      if (v > best) {
        best = v;
        piv = i;
      }
    }
    if (best <= pivot_floor || best == 0.0) {
      d.singular = true;
      d.min_pivot = best;
      return d;
    }
    d.min_pivot = std::min(d.min_pivot, best);
    if (piv != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(lu(k, j), lu(piv, j));
      std::swap(d.perm[k], d.perm[piv]);
      d.parity = -d.parity;
    }
    const double pivot = lu(k, k);
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = lu(i, k) / pivot;
      lu(i, k) = f;
      if (f == 0.0) continue;
      for (std::size_t j = k + 1; j < n; ++j) lu(i, j) -= f * lu(k, j);
    }
  }
  return d;
}

Matrix LuDecomposition::solve(const Matrix& rhs) const {
  if (singular) throw SingularMatrixError("LU solve on singular factorization");
  const std::size_t n = lu.rows();
  if (rhs.rows() != n) throw DimensionError("rhs rows do not match LU size");
  Matrix x(n, rhs.cols());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < rhs.cols(); ++j)
      x(i, j) = rhs(static_cast<std::size_t>(perm[i]), j);
  // forward substitution (unit lower)
  for (std::size_t i = 1; i < n; ++i)
    for (std::size_t k = 0; k < i; ++k) {
      const double f = lu(i, k);
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < rhs.cols(); ++j) x(i, j) -= f * x(k, j);
    }
  // back substitution
  for (std::size_t ii = n; ii-- > 0;) {
    for (std::size_t k = ii + 1; k < n; ++k) {
      const double f = lu(ii, k);
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < rhs.cols(); ++j) x(ii, j) -= f * x(k, j);
    }
    const double piv = lu(ii, ii);
    for (std::size_t j = 0; j < rhs.cols(); ++j) x(ii, j) /= piv;
  }
  return x;
}

std::vector<double> LuDecomposition::solve(const std::vector<double>& rhs) const {
  Matrix b(rhs.size(), 1, rhs);
  Matrix x = solve(b);
  std::vector<double> out(rhs.size());
  for (std::size_t i = 0; i < rhs.size(); ++i) out[i] = x(i, 0);
  return out;
}

double LuDecomposition::determinant() const {
  if (singular) return 0.0;
  double det = parity;
  for (std::size_t i = 0; i < lu.rows(); ++i) det *= lu(i, i);
  return det;
}

Matrix solve_linear(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) {
    throw DimensionError("solve_linear: rhs rows do not match matrix size");
  }
  LuDecomposition d = lu_decompose(a);
  if (d.singular) {
    throw SingularMatrixError(
        "solve_linear: matrix is singular or near-singular (pivot " +
        std::to_string(d.min_pivot) + ")");
  }
  return d.solve(b);
}

Matrix inverse(const Matrix& a) {
  return solve_linear(a, Matrix::identity(a.rows()));
}

double determinant(const Matrix& a) { return lu_decompose(a).determinant(); }

bool cholesky_factor(const Matrix& s, Matrix& lower) {
  if (!s.square()) throw DimensionError("cholesky requires a square matrix");
  const std::size_t n = s.rows();
  Matrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double diag = s(j, j);
    for (std::size_t k = 0; k < j; ++k) diag -= l(j, k) * l(j, k);
    if (!(diag > 0.0)) return false;
    const double ljj = std::sqrt(diag);
    l(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double v = s(i, j);
      for (std::size_t k = 0; k < j; ++k) v -= l(i, k) * l(j, k);
      l(i, j) = v / ljj;
    }
  }
  lower = std::move(l);
  return true;
}

bool is_spd(const Matrix& s, double sym_rtol) {
  if (!s.square()) return false;
  if (!is_symmetric(s, sym_rtol)) return false;
  Matrix l;
  return cholesky_factor(symmetrize(s), l);
}

}  // namespace stableid
