#include "suncet/sampler.hpp"

#include <algorithm>
#include <numeric>

#include "suncet/errors.hpp"

namespace suncet {

std::vector<double> augment(const double* x, std::size_t d,
                            const AugmentConfig& cfg, Rng& rng) {
  std::vector<double> out(x, x + d);
  double u = 2.0 * rng.next_double() - 1.0;
  double scale = 1.0 + u * cfg.scale_jitter;
  for (std::size_t j = 0; j < d; ++j) out[j] *= scale;
  for (std::size_t j = 0; j < d; ++j) {
    out[j] += cfg.noise_std * rng.next_normal();
  }
  for (std::size_t j = 0; j < d; ++j) {
    if (rng.next_double() < cfg.mask_prob) out[j] = 0.0;
  }
  return out;
}

UnsupervisedSampler::UnsupervisedSampler(const Dataset& ds,
                                         std::size_t batch_size,
                                         const AugmentConfig& cfg, Rng rng)
    : ds_(ds), batch_size_(batch_size), cfg_(cfg), rng_(rng) {
  if (batch_size_ < 1) {
    throw data_error("unsupervised sampler: batch_size must be >= 1");
  }
  if (batch_size_ > ds_.n()) {
    throw data_error("unsupervised sampler: batch_size " +
                     std::to_string(batch_size_) + " exceeds dataset size " +
                     std::to_string(ds_.n()));
  }
  perm_.resize(ds_.n());
  std::iota(perm_.begin(), perm_.end(), std::size_t{0});
  cursor_ = perm_.size();  // first next() triggers the initial shuffle
}

std::size_t UnsupervisedSampler::batches_per_epoch() const {
  std::size_t full = ds_.n() / batch_size_;
  std::size_t rem = ds_.n() % batch_size_;
  if (rem == 0) return full;
  return rem == 1 && full >= 1 ? full : full + 1;
}

void UnsupervisedSampler::restore_rng(Rng rng) {
  rng_ = rng;
  cursor_ = perm_.size();
}

void UnsupervisedSampler::reshuffle() {
  for (std::size_t i = perm_.size(); i > 1; --i) {
    std::size_t j = rng_.next_below(i);
    std::swap(perm_[i - 1], perm_[j]);
  }
  cursor_ = 0;
}

UnsupervisedBatch UnsupervisedSampler::next() {
  if (cursor_ >= perm_.size()) reshuffle();
  std::size_t take = std::min(batch_size_, perm_.size() - cursor_);
  // A lone trailing index would make a single-pair batch downstream; fold it
  // into this batch instead so the epoch still covers every index once.
  if (perm_.size() - cursor_ - take == 1) take += 1;
  UnsupervisedBatch batch;
  batch.views = Matrix(2 * take, ds_.d_in());
  batch.partner.resize(2 * take);
  batch.indices.resize(take);
  for (std::size_t t = 0; t < take; ++t) {
    std::size_t idx = perm_[cursor_ + t];
    batch.indices[t] = idx;
    const double* src = ds_.features.row(idx);
    auto v1 = augment(src, ds_.d_in(), cfg_, rng_);
    auto v2 = augment(src, ds_.d_in(), cfg_, rng_);
    std::copy(v1.begin(), v1.end(), batch.views.row(2 * t));
    std::copy(v2.begin(), v2.end(), batch.views.row(2 * t + 1));
    batch.partner[2 * t] = 2 * t + 1;
    batch.partner[2 * t + 1] = 2 * t;
  }
  cursor_ += take;
  return batch;
}

SupervisedSampler::SupervisedSampler(const Dataset& ds,
                                     const LabelSplit& split,
                                     const SupervisedBatchSpec& spec,
                                     const AugmentConfig& cfg, Rng rng)
    : ds_(ds), split_(split), spec_(spec), cfg_(cfg), rng_(rng) {
  for (int c = 0; c < ds_.n_classes; ++c) {
    if (!split_.labeled_by_class[static_cast<std::size_t>(c)].empty()) {
      eligible_.push_back(c);
    }
  }
  if (eligible_.empty()) {
    throw data_error("supervised sampler: no class has a labeled sample");
  }
  if (spec_.classes_per_batch < 1 ||
      spec_.classes_per_batch > eligible_.size()) {
    throw data_error("supervised sampler: classes_per_batch " +
                     std::to_string(spec_.classes_per_batch) + " but only " +
                     std::to_string(eligible_.size()) +
                     " classes have labeled samples");
  }
  if (spec_.samples_per_class < 2) {
    throw data_error("supervised sampler: samples_per_class must be >= 2");
  }
}

void SupervisedSampler::restore_rng(Rng rng) { rng_ = rng; }

SupervisedBatch SupervisedSampler::next() {
  // Fresh class subsample each call via a partial shuffle of the eligible
  // list copy.
  std::vector<int> pool = eligible_;
  std::size_t cpb = spec_.classes_per_batch;
  std::size_t spc = spec_.samples_per_class;
  SupervisedBatch batch;
  batch.rows = Matrix(cpb * spc, ds_.d_in());
  batch.labels.resize(cpb * spc);
  std::size_t r = 0;
  for (std::size_t i = 0; i < cpb; ++i) {
    std::size_t j = i + rng_.next_below(pool.size() - i);
    std::swap(pool[i], pool[j]);
    int cls = pool[i];
    const auto& rows = split_.labeled_by_class[static_cast<std::size_t>(cls)];
    std::vector<std::size_t> chosen(spc);
    if (rows.size() >= spc) {
      std::vector<std::size_t> local = rows;
      for (std::size_t t = 0; t < spc; ++t) {
        std::size_t k = t + rng_.next_below(local.size() - t);
        std::swap(local[t], local[k]);
        chosen[t] = local[t];
      }
    } else {
      for (std::size_t t = 0; t < spc; ++t) {
        chosen[t] = rows[rng_.next_below(rows.size())];
      }
    }
    for (std::size_t t = 0; t < spc; ++t, ++r) {
      auto v = augment(ds_.features.row(chosen[t]), ds_.d_in(), cfg_, rng_);
      std::copy(v.begin(), v.end(), batch.rows.row(r));
      batch.labels[r] = cls;
    }
  }
  return batch;
}

}  // namespace suncet
