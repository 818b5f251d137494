#pragma once

#include <cstdint>
#include <vector>

#include "suncet/dataset.hpp"
#include "suncet/matrix.hpp"
#include "suncet/rng.hpp"

namespace suncet {

// Stochastic view synthesis for one feature row, applied in a fixed order:
// scale by (1 + u * scale_jitter) with u ~ U(-1, 1), add N(0, noise_std^2)
// per coordinate, zero each coordinate with probability mask_prob. Every
// call consumes exactly 1 + 2*d draws so generator alignment never depends
// on the config values.
struct AugmentConfig {
  double noise_std = 0.0;
  double scale_jitter = 0.0;
  double mask_prob = 0.0;
};

std::vector<double> augment(const double* x, std::size_t d,
                            const AugmentConfig& cfg, Rng& rng);

struct SupervisedBatchSpec {
  std::size_t classes_per_batch = 0;
  std::size_t samples_per_class = 0;
};

struct UnsupervisedBatch {
  Matrix views;                      // 2*b x d_in, views of index t at rows 2t, 2t+1
  std::vector<std::size_t> partner;  // view row -> its sibling row
  std::vector<std::size_t> indices;  // dataset index behind each row pair
};

// Permutation sampler over the full dataset (labeled and unlabeled alike).
// Each epoch is one shuffled pass; the final batch of an epoch may be short
// so that every index appears exactly once between reshuffles.
class UnsupervisedSampler {
 public:
  UnsupervisedSampler(const Dataset& ds, std::size_t batch_size,
                      const AugmentConfig& cfg, Rng rng);

  UnsupervisedBatch next();

  // Batches in one epoch pass: ceil(n / batch_size).
  std::size_t batches_per_epoch() const;

  const Rng& rng() const { return rng_; }
  void restore_rng(Rng rng);

 private:
  void reshuffle();

  const Dataset& ds_;
  std::size_t batch_size_;
  AugmentConfig cfg_;
  Rng rng_;
  std::vector<std::size_t> perm_;
  std::size_t cursor_ = 0;
};

struct SupervisedBatch {
  Matrix rows;  // m x d_in, m = classes_per_batch * samples_per_class
  std::vector<int> labels;
};

// Class-balanced sampler over the labeled split. Each call draws a fresh
// set of distinct classes, then samples_per_class rows from each: without
// replacement when the class has enough labeled rows, with replacement (and
// independent re-augmentation) when it does not.
class SupervisedSampler {
 public:
  SupervisedSampler(const Dataset& ds, const LabelSplit& split,
                    const SupervisedBatchSpec& spec, const AugmentConfig& cfg,
                    Rng rng);

  SupervisedBatch next();

  const Rng& rng() const { return rng_; }
  void restore_rng(Rng rng);

 private:
  const Dataset& ds_;
  const LabelSplit& split_;
  SupervisedBatchSpec spec_;
  AugmentConfig cfg_;
  Rng rng_;
  std::vector<int> eligible_;  // classes holding >= 1 labeled row, ascending
};

}  // namespace suncet
