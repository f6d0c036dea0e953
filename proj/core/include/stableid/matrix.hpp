#pragma once

#include <cstddef>
#include <initializer_list>
#include <vector>

namespace stableid {

// Dense real matrix with row-major storage and value semantics.
//
// Every public constructor that accepts entries rejects NaN/Inf, so a
// Matrix in user hands always holds finite values. All operations below
// return fresh values and never mutate their inputs, which makes them safe
// to call concurrently from Monte-Carlo workers.
class Matrix {
 public:
  Matrix() = default;

  // Zero matrix of the given shape (both dimensions must be positive).
  Matrix(std::size_t rows, std::size_t cols);

  // Takes ownership of `entries` (row-major, length rows*cols).
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> entries);

  // Row-wise literal, mostly for tests: Matrix{{1, 2}, {3, 4}}.
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);
  static Matrix constant(std::size_t rows, std::size_t cols, double value);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return data_.empty(); }
  bool square() const { return rows_ > 0 && rows_ == cols_; }

  double operator()(std::size_t i, std::size_t j) const {
    return data_[i * cols_ + j];
  }
  double& operator()(std::size_t i, std::size_t j) {
    return data_[i * cols_ + j];
  }

  const std::vector<double>& entries() const { return data_; }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix operator+(const Matrix& a, const Matrix& b);
Matrix operator-(const Matrix& a, const Matrix& b);
Matrix operator-(const Matrix& a);
Matrix operator*(const Matrix& a, const Matrix& b);
Matrix operator*(double s, const Matrix& a);
Matrix operator*(const Matrix& a, double s);
std::vector<double> operator*(const Matrix& a, const std::vector<double>& x);

Matrix transpose(const Matrix& a);
Matrix symmetrize(const Matrix& a);  // (A + A^T)/2
Matrix kron(const Matrix& a, const Matrix& b);

double trace(const Matrix& a);
double frobenius_norm(const Matrix& a);
double max_abs(const Matrix& a);
bool is_symmetric(const Matrix& a, double rtol = 1e-10);

// LU factorization with partial pivoting. `singular` is set when the best
// available pivot in some column falls below the relative threshold, in
// which case solve() must not be used.
struct LuDecomposition {
  Matrix lu;
  std::vector<int> perm;
  double parity = 1.0;
  bool singular = false;
  double min_pivot = 0.0;

  Matrix solve(const Matrix& rhs) const;
  std::vector<double> solve(const std::vector<double>& rhs) const;
  double determinant() const;
};

LuDecomposition lu_decompose(const Matrix& a);

// Solves A X = B. Throws SingularMatrixError when A is singular or
// numerically singular (pivot below threshold).
Matrix solve_linear(const Matrix& a, const Matrix& b);
Matrix inverse(const Matrix& a);
double determinant(const Matrix& a);

// Cholesky factorization S = L L^T for symmetric positive definite S.
// Returns false (leaving `lower` untouched) when S is not PD.
bool cholesky_factor(const Matrix& s, Matrix& lower);
bool is_spd(const Matrix& s, double sym_rtol = 1e-10);

}  // namespace stableid
