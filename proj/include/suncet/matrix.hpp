#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace suncet {

// Dense row-major matrix of 64-bit floats. All training numerics run in
// doubles so finite-difference oracles and byte-exact checkpoints stay clean.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), data(r * c, fill) {}

  double& at(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double at(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

  double* row(std::size_t i) { return data.data() + i * cols; }
  const double* row(std::size_t i) const { return data.data() + i * cols; }

  std::size_t size() const { return data.size(); }

  void fill(double v) { data.assign(data.size(), v); }

  std::string shape_str() const;
};

bool same_shape(const Matrix& a, const Matrix& b);

// C = A·B. Accumulation over the inner index runs in ascending order for
// every output element, so results are bit-identical run to run.
Matrix matmul(const Matrix& a, const Matrix& b);

// C = A·Bᵀ with A[m×k], B[n×k].
Matrix matmul_nt(const Matrix& a, const Matrix& b);

// C = Aᵀ·B with A[k×m], B[k×n].
Matrix matmul_tn(const Matrix& a, const Matrix& b);

// Row-wise L2 normalization with a reverse map. Rows with norm <= eps are
// divided by eps instead (a plain linear scaling, so the Jacobian there is
// I/eps).
struct RowNormalized {
  Matrix y;
  std::vector<double> divisor;  // max(row norm, eps)
  std::vector<char> clamped;    // row norm <= eps

  // Pulls an upstream gradient on y back to the input:
  // dx_i = (dy_i - y_i·(y_i⋅dy_i)) / divisor_i, or dy_i / eps when clamped.
  Matrix backward(const Matrix& dy) const;
};

RowNormalized l2_normalize_rows(const Matrix& x, double eps = 1e-12);

// out[i] = log Σ_j exp(X[i][j]), evaluated with the row-max shift.
std::vector<double> logsumexp_rows(const Matrix& x);

}  // namespace suncet
