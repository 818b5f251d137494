#include "suncet/matrix.hpp"

#include <cmath>

#include "suncet/errors.hpp"

namespace suncet {

std::string Matrix::shape_str() const {
  return std::to_string(rows) + "x" + std::to_string(cols);
}

bool same_shape(const Matrix& a, const Matrix& b) {
  return a.rows == b.rows && a.cols == b.cols;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols != b.rows) {
    throw shape_error("matmul: inner dimensions differ, " + a.shape_str() +
                      " vs " + b.shape_str());
  }
  Matrix c(a.rows, b.cols);
  for (std::size_t i = 0; i < a.rows; ++i) {
    const double* ai = a.row(i);
    double* ci = c.row(i);
    for (std::size_t t = 0; t < a.cols; ++t) {
      double av = ai[t];
      const double* bt = b.row(t);
      for (std::size_t j = 0; j < b.cols; ++j) ci[j] += av * bt[j];
    }
  }
  return c;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
  if (a.cols != b.cols) {
    throw shape_error("matmul_nt: inner dimensions differ, " + a.shape_str() +
                      " vs " + b.shape_str() + " transposed");
  }
  Matrix c(a.rows, b.rows);
  for (std::size_t i = 0; i < a.rows; ++i) {
    const double* ai = a.row(i);
    for (std::size_t j = 0; j < b.rows; ++j) {
      const double* bj = b.row(j);
      double acc = 0.0;
      for (std::size_t t = 0; t < a.cols; ++t) acc += ai[t] * bj[t];
      c.at(i, j) = acc;
    }
  }
  return c;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
  if (a.rows != b.rows) {
    throw shape_error("matmul_tn: inner dimensions differ, " + a.shape_str() +
                      " transposed vs " + b.shape_str());
  }
  Matrix c(a.cols, b.cols);
  for (std::size_t t = 0; t < a.rows; ++t) {
    const double* at = a.row(t);
    const double* bt = b.row(t);
    for (std::size_t i = 0; i < a.cols; ++i) {
      double av = at[i];
      double* ci = c.row(i);
      for (std::size_t j = 0; j < b.cols; ++j) ci[j] += av * bt[j];
    }
  }
  return c;
}

RowNormalized l2_normalize_rows(const Matrix& x, double eps) {
  RowNormalized out;
  out.y = Matrix(x.rows, x.cols);
  out.divisor.resize(x.rows);
  out.clamped.resize(x.rows);
  for (std::size_t i = 0; i < x.rows; ++i) {
    const double* xi = x.row(i);
    double sq = 0.0;
    for (std::size_t j = 0; j < x.cols; ++j) sq += xi[j] * xi[j];
    double norm = std::sqrt(sq);
    bool clamp = norm <= eps;
    double div = clamp ? eps : norm;
    out.divisor[i] = div;
    out.clamped[i] = clamp ? 1 : 0;
    double* yi = out.y.row(i);
    for (std::size_t j = 0; j < x.cols; ++j) yi[j] = xi[j] / div;
  }
  return out;
}

Matrix RowNormalized::backward(const Matrix& dy) const {
  if (!same_shape(dy, y)) {
    throw shape_error("l2_normalize_rows backward: upstream " +
                      dy.shape_str() + " vs output " + y.shape_str());
  }
  Matrix dx(dy.rows, dy.cols);
  for (std::size_t i = 0; i < dy.rows; ++i) {
    const double* dyi = dy.row(i);
    const double* yi = y.row(i);
    double* dxi = dx.row(i);
    double div = divisor[i];
    if (clamped[i]) {
      for (std::size_t j = 0; j < dy.cols; ++j) dxi[j] = dyi[j] / div;
      continue;
    }
    double dot = 0.0;
    for (std::size_t j = 0; j < dy.cols; ++j) dot += yi[j] * dyi[j];
    for (std::size_t j = 0; j < dy.cols; ++j) {
      dxi[j] = (dyi[j] - yi[j] * dot) / div;
    }
  }
  return dx;
}

std::vector<double> logsumexp_rows(const Matrix& x) {
  std::vector<double> out(x.rows);
  for (std::size_t i = 0; i < x.rows; ++i) {
    const double* xi = x.row(i);
    double mx = xi[0];
    for (std::size_t j = 1; j < x.cols; ++j) mx = std::max(mx, xi[j]);
    double acc = 0.0;
    for (std::size_t j = 0; j < x.cols; ++j) acc += std::exp(xi[j] - mx);
    out[i] = mx + std::log(acc);
  }
  return out;
}

}  // namespace suncet
