#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "suncet/sampler.hpp"

namespace suncet {

// Resolved run configuration shared by all commands. Parse accepts blank
// lines, '#' comments, and `key = value` pairs; later occurrences of a key
// override earlier ones; unknown keys are rejected with their line number.
struct TrainConfig {
  std::string dataset_path = "data/train.snds";
  std::string test_path = "data/test.snds";
  double label_fraction = 0.1;
  std::uint64_t label_seed = 42;

  double tau = 0.5;
  std::size_t unsup_batch = 64;
  std::size_t sup_classes_per_batch = 4;
  std::size_t sup_samples_per_class = 8;
  std::size_t epochs = 60;
  std::size_t suncet_off_epoch = 12;

  double base_lr = 1.0;
  std::size_t warmup_epochs = 2;
  double warmup_start_lr = 0.125;
  double final_lr = 0.0;
  double momentum = 0.9;
  double weight_decay = 1e-6;
  std::string optimizer = "lars";
  double lars_trust_coeff = 0.001;
  double lars_eps = 1e-9;

  std::vector<std::size_t> encoder_dims = {32, 128, 128, 64};
  std::vector<std::size_t> proj_dims = {64, 64, 32};

  double augment_noise_std = 0.5;
  double augment_mask_prob = 0.1;
  double augment_scale_jitter = 0.25;

  std::size_t eval_every = 3;
  std::uint64_t seed = 1;

  std::size_t finetune_epochs = 30;
  double finetune_lr = 0.05;
  std::size_t finetune_batch = 64;

  std::size_t lineval_epochs = 52;
  double lineval_lr = 0.01;
  std::vector<std::size_t> lineval_milestones = {48, 50};
  std::size_t lineval_batch = 64;

  std::vector<std::size_t> sweep_switchoff_epochs = {0, 6, 12, 30, 60};
  bool log_wallclock = false;

  AugmentConfig augment() const {
    return {augment_noise_std, augment_scale_jitter, augment_mask_prob};
  }

  // Throws config_error on any constraint violation.
  void validate() const;
};

TrainConfig parse_config_text(const std::string& text,
                              const std::string& origin);
TrainConfig parse_config(const std::string& path);

// Canonical snapshot: every key once, deterministic formatting. Reparsing
// the output yields an equal config.
std::string serialize_config(const TrainConfig& cfg);

bool operator==(const TrainConfig& a, const TrainConfig& b);

}  // namespace suncet
