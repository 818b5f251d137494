#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "suncet/model.hpp"

namespace suncet {

// Flat view of one parameter tensor and its gradient accumulator. Bias
// tensors are flagged: LARS gives them trust ratio 1 and skips their weight
// decay.
struct ParamRef {
  std::string name;
  double* value = nullptr;
  double* grad = nullptr;
  std::size_t size = 0;
  bool is_bias = false;
};

std::vector<ParamRef> collect_params(ModelParams& params);
std::vector<ParamRef> collect_encoder_params(ModelParams& params);
std::vector<ParamRef> collect_params(ClassifierHead& head);

enum class OptimMode { sgd_nesterov, lars };

struct OptimConfig {
  OptimMode mode = OptimMode::lars;
  double momentum = 0.9;
  double weight_decay = 1e-6;
  double lars_trust_coeff = 0.001;
  double lars_eps = 1e-9;
};

// Momentum buffers, one per parameter tensor, allocated lazily on the first
// step and shape-checked afterwards.
struct OptimState {
  std::vector<std::vector<double>> buf;
};

// g <- grad + wd*w; buf <- momentum*buf + g; w <- w - lr*(g + momentum*buf).
// Gradients are zeroed after the step.
void sgd_nesterov_step(std::vector<ParamRef>& params, OptimState& state,
                       const OptimConfig& cfg, double lr);

// Per tensor: g <- grad + wd*w (weights only); trust = coeff*|w|/(|g|+eps)
// when both norms are positive, else 1; biases always get trust 1;
// buf <- momentum*buf + trust*lr*g; w <- w - buf. Gradients zeroed after.
void lars_step(std::vector<ParamRef>& params, OptimState& state,
               const OptimConfig& cfg, double lr);

void optimizer_step(std::vector<ParamRef>& params, OptimState& state,
                    const OptimConfig& cfg, double lr);

// Warmup plus cosine annealing, indexed by optimizer update. Steps [0,
// warmup) ramp linearly from warmup_start_lr towards base_lr; the boundary
// step lands on base_lr exactly and the last step of the run on final_lr
// exactly.
struct ScheduleConfig {
  double base_lr = 1.0;
  double warmup_start_lr = 0.0;
  double final_lr = 0.0;
  std::size_t warmup_epochs = 0;
  std::size_t total_epochs = 1;
  std::size_t steps_per_epoch = 1;
};

double lr_at(const ScheduleConfig& cfg, std::size_t step);

// Step-wise decay for linear evaluation: lr = base * factor^k where k is the
// number of milestones at or below the current epoch.
double lr_step_decay(double base_lr, const std::vector<std::size_t>& milestones,
                     std::size_t epoch, double factor = 0.1);

}  // namespace suncet
