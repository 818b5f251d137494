#include "suncet/losses.hpp"

#include <cmath>

#include "suncet/errors.hpp"

namespace suncet {
namespace {

constexpr double kNormEps = 1e-12;

void check_tau(double tau) {
  if (!(tau > 0.0)) {
    throw config_error("temperature must be > 0, got " + std::to_string(tau));
  }
}

// Adds G·N + Gᵀ·N pulled back through the row normalization.
Matrix grad_through_sim(const Matrix& g, const RowNormalized& norm) {
  Matrix dn = matmul(g, norm.y);
  Matrix dn_t = matmul_tn(g, norm.y);
  for (std::size_t k = 0; k < dn.size(); ++k) dn.data[k] += dn_t.data[k];
  return norm.backward(dn);
}

}  // namespace

Matrix cosine_sim_matrix(const Matrix& z) {
  RowNormalized norm = l2_normalize_rows(z, kNormEps);
  Matrix s = matmul_nt(norm.y, norm.y);
  for (std::size_t i = 0; i < s.rows; ++i) s.at(i, i) = 1.0;
  return s;
}

LossResult ntxent(const ContrastiveBatch& batch, double tau) {
  check_tau(tau);
  const Matrix& z = batch.z;
  std::size_t m = z.rows;
  if (m < 4) {
    throw data_error("ntxent: degenerate batch, need >= 4 rows, got " +
                     std::to_string(m));
  }
  if (batch.partner.size() != m) {
    throw data_error("ntxent: partner index size " +
                     std::to_string(batch.partner.size()) + " for " +
                     std::to_string(m) + " rows");
  }
  for (std::size_t a = 0; a < m; ++a) {
    std::size_t p = batch.partner[a];
    if (p >= m || p == a || batch.partner[p] != a) {
      throw data_error("ntxent: partner map is not a fixed-point-free "
                       "involution at row " + std::to_string(a));
    }
  }
  RowNormalized norm = l2_normalize_rows(z, kNormEps);
  Matrix d = matmul_nt(norm.y, norm.y);
  for (double& v : d.data) v /= tau;

  LossResult res;
  res.per_anchor.resize(m);
  Matrix g(m, m);
  double inv = 1.0 / (static_cast<double>(m) * tau);
  for (std::size_t a = 0; a < m; ++a) {
    const double* da = d.row(a);
    double mx = -1e300;
    for (std::size_t j = 0; j < m; ++j) {
      if (j != a) mx = std::max(mx, da[j]);
    }
    double den = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      if (j != a) den += std::exp(da[j] - mx);
    }
    double lse = mx + std::log(den);
    res.per_anchor[a] = lse - da[batch.partner[a]];
    res.value += res.per_anchor[a];
    double* ga = g.row(a);
    for (std::size_t j = 0; j < m; ++j) {
      if (j == a) continue;
      double soft = std::exp(da[j] - lse);
      ga[j] = (soft - (j == batch.partner[a] ? 1.0 : 0.0)) * inv;
    }
  }
  res.value /= static_cast<double>(m);
  res.dz = grad_through_sim(g, norm);
  return res;
}

LossResult suncet(const LabeledEmbeddingBatch& batch, double tau) {
  check_tau(tau);
  const Matrix& z = batch.z;
  std::size_t m = z.rows;
  if (m < 2) {
    throw data_error("suncet: need >= 2 rows, got " + std::to_string(m));
  }
  if (batch.y.size() != m) {
    throw data_error("suncet: " + std::to_string(batch.y.size()) +
                     " labels for " + std::to_string(m) + " rows");
  }
  RowNormalized norm = l2_normalize_rows(z, kNormEps);
  Matrix d = matmul_nt(norm.y, norm.y);
  for (double& v : d.data) v /= tau;

  LossResult res;
  res.per_anchor.resize(m);
  Matrix g(m, m);
  double inv = 1.0 / (static_cast<double>(m) * tau);
  for (std::size_t a = 0; a < m; ++a) {
    const double* da = d.row(a);
    double mx = -1e300;
    double mx_num = -1e300;
    bool has_pos = false;
    for (std::size_t j = 0; j < m; ++j) {
      if (j == a) continue;
      mx = std::max(mx, da[j]);
      if (batch.y[j] == batch.y[a]) {
        has_pos = true;
        mx_num = std::max(mx_num, da[j]);
      }
    }
    if (!has_pos) {
      throw data_error("suncet: class " + std::to_string(batch.y[a]) +
                       " has a single row, numerator empty at anchor " +
                       std::to_string(a));
    }
    double den = 0.0;
    double num = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      if (j == a) continue;
      den += std::exp(da[j] - mx);
      if (batch.y[j] == batch.y[a]) num += std::exp(da[j] - mx_num);
    }
    double lse_den = mx + std::log(den);
    double lse_num = mx_num + std::log(num);
    res.per_anchor[a] = lse_den - lse_num;
    res.value += res.per_anchor[a];
    double* ga = g.row(a);
    for (std::size_t j = 0; j < m; ++j) {
      if (j == a) continue;
      double soft_den = std::exp(da[j] - lse_den);
      double soft_num =
          batch.y[j] == batch.y[a] ? std::exp(da[j] - lse_num) : 0.0;
      ga[j] = (soft_den - soft_num) * inv;
    }
  }
  res.value /= static_cast<double>(m);
  res.dz = grad_through_sim(g, norm);
  return res;
}

std::vector<double> neighbor_class_posterior(
    const LabeledEmbeddingBatch& batch, int n_classes,
    const std::vector<double>& query, double tau,
    std::optional<std::size_t> self_index) {
  check_tau(tau);
  std::size_t m = batch.z.rows;
  std::size_t dd = batch.z.cols;
  if (m < 1) throw data_error("posterior: empty batch");
  if (batch.y.size() != m) {
    throw data_error("posterior: label count mismatch");
  }
  if (query.size() != dd) {
    throw shape_error("posterior: query dim " + std::to_string(query.size()) +
                      " vs batch dim " + std::to_string(dd));
  }
  if (self_index && *self_index >= m) {
    throw data_error("posterior: self index out of range");
  }
  if (self_index && m == 1) {
    throw data_error("posterior: query is the only batch row, support empty");
  }
  for (int y : batch.y) {
    if (y < 0 || y >= n_classes) {
      throw data_error("posterior: label " + std::to_string(y) +
                       " outside [0, " + std::to_string(n_classes) + ")");
    }
  }
  RowNormalized norm = l2_normalize_rows(batch.z, kNormEps);
  double qsq = 0.0;
  for (double v : query) qsq += v * v;
  double qdiv = std::max(std::sqrt(qsq), kNormEps);

  std::vector<double> d(m, 0.0);
  double mx = -1e300;
  for (std::size_t k = 0; k < m; ++k) {
    if (self_index && *self_index == k) continue;
    const double* zk = norm.y.row(k);
    double dot = 0.0;
    for (std::size_t j = 0; j < dd; ++j) dot += (query[j] / qdiv) * zk[j];
    d[k] = dot / tau;
    mx = std::max(mx, d[k]);
  }
  std::vector<double> p(static_cast<std::size_t>(n_classes), 0.0);
  double total = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    if (self_index && *self_index == k) continue;
    double w = std::exp(d[k] - mx);
    p[static_cast<std::size_t>(batch.y[k])] += w;
    total += w;
  }
  for (double& v : p) v /= total;
  return p;
}

double combined_loss(const LossResult& inst, const LossResult* sup) {
  return inst.value + (sup ? sup->value : 0.0);
}

}  // namespace suncet
