#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "suncet/matrix.hpp"

namespace suncet {

// Paired two-view embeddings: partner maps each row to its sibling view.
// partner must be a fixed-point-free involution.
struct ContrastiveBatch {
  Matrix z;  // 2n x d
  std::vector<std::size_t> partner;
};

// Labeled embeddings; every class present must contribute >= 2 rows for the
// supervised loss to have a nonempty numerator at each anchor.
struct LabeledEmbeddingBatch {
  Matrix z;  // m x d
  std::vector<int> y;
};

struct LossResult {
  double value = 0.0;
  Matrix dz;                      // gradient w.r.t. the raw (unnormalized) z
  std::vector<double> per_anchor;
};

// S[i][j] = cosine similarity of rows i and j; symmetric, unit diagonal.
Matrix cosine_sim_matrix(const Matrix& z);

// Instance-discrimination loss. Per anchor: -log of the softmax mass the
// partner view gets among all other rows (the anchor itself is the only
// exclusion, so the positive stays in the denominator). Mean over all rows.
LossResult ntxent(const ContrastiveBatch& batch, double tau);

// Supervised contrastive loss over labeled embeddings. Per anchor: -log of
// the ratio between the same-class similarity mass and the total mass, the
// anchor excluded from both sums. Mean over all rows.
LossResult suncet(const LabeledEmbeddingBatch& batch, double tau);

// Soft nearest-neighbor class distribution for a query embedding against a
// labeled batch: class c gets the share of exp(sim/tau) mass its rows hold.
// self_index marks the batch row the query is (that row is excluded); leave
// it empty for external queries. Classes absent from the batch get 0.
std::vector<double> neighbor_class_posterior(
    const LabeledEmbeddingBatch& batch, int n_classes,
    const std::vector<double>& query, double tau,
    std::optional<std::size_t> self_index = std::nullopt);

// Plain unweighted sum; the supervised term may be absent. Gradients live on
// disjoint batches, so they stay with their respective results.
double combined_loss(const LossResult& inst, const LossResult* sup);

}  // namespace suncet
