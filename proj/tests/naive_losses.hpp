#pragma once

// Direct-sum reference implementations of the contrastive losses, kept
// deliberately independent of the library's stabilized evaluation path:
// per-pair cosine via the scalar formula, plain exp sums, no logsumexp, no
// shared normalization code. Used as the equivalence oracle in tests.

#include <cmath>
#include <cstddef>
#include <vector>

#include "suncet/matrix.hpp"

namespace naive {

inline double cos_sim(const suncet::Matrix& z, std::size_t i, std::size_t j) {
  const double* a = z.row(i);
  const double* b = z.row(j);
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t k = 0; k < z.cols; ++k) {
    dot += a[k] * b[k];
    na += a[k] * a[k];
    nb += b[k] * b[k];
  }
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

inline double ntxent(const suncet::Matrix& z,
                     const std::vector<std::size_t>& partner, double tau) {
  double total = 0.0;
  for (std::size_t a = 0; a < z.rows; ++a) {
    double num = std::exp(cos_sim(z, a, partner[a]) / tau);
    double den = 0.0;
    for (std::size_t j = 0; j < z.rows; ++j) {
      if (j != a) den += std::exp(cos_sim(z, a, j) / tau);
    }
    total += -std::log(num / den);
  }
  return total / static_cast<double>(z.rows);
}

inline double suncet(const suncet::Matrix& z, const std::vector<int>& y,
                     double tau) {
  double total = 0.0;
  for (std::size_t a = 0; a < z.rows; ++a) {
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < z.rows; ++j) {
      if (j == a) continue;
      double e = std::exp(cos_sim(z, a, j) / tau);
      den += e;
      if (y[j] == y[a]) num += e;
    }
    total += -std::log(num / den);
  }
  return total / static_cast<double>(z.rows);
}

}  // namespace naive
