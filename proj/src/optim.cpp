#include "suncet/optim.hpp"

#include <cmath>

#include "suncet/errors.hpp"

namespace suncet {
namespace {

void append_stack_refs(std::vector<ParamRef>& out, ParamStack& stack,
                       const std::string& prefix) {
  for (std::size_t l = 0; l < stack.layers.size(); ++l) {
    auto& layer = stack.layers[l];
    std::string base = prefix + "." + std::to_string(l);
    out.push_back({base + ".w", layer.w.data.data(), layer.gw.data.data(),
                   layer.w.size(), false});
    out.push_back({base + ".b", layer.b.data(), layer.gb.data(),
                   layer.b.size(), true});
  }
}

void ensure_buffers(OptimState& state, const std::vector<ParamRef>& params) {
  if (state.buf.empty()) {
    state.buf.resize(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) {
      state.buf[i].assign(params[i].size, 0.0);
    }
    return;
  }
  if (state.buf.size() != params.size()) {
    throw shape_error("optimizer: " + std::to_string(state.buf.size()) +
                      " buffers for " + std::to_string(params.size()) +
                      " tensors");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (state.buf[i].size() != params[i].size) {
      throw shape_error("optimizer: buffer size mismatch on " +
                        params[i].name);
    }
  }
}

}  // namespace

std::vector<ParamRef> collect_params(ModelParams& params) {
  std::vector<ParamRef> out;
  append_stack_refs(out, params.encoder, "encoder");
  append_stack_refs(out, params.projection, "projection");
  return out;
}

std::vector<ParamRef> collect_encoder_params(ModelParams& params) {
  std::vector<ParamRef> out;
  append_stack_refs(out, params.encoder, "encoder");
  return out;
}

std::vector<ParamRef> collect_params(ClassifierHead& head) {
  std::vector<ParamRef> out;
  out.push_back({"classifier.w", head.w.data.data(), head.gw.data.data(),
                 head.w.size(), false});
  out.push_back({"classifier.b", head.b.data(), head.gb.data(), head.b.size(),
                 true});
  return out;
}

void sgd_nesterov_step(std::vector<ParamRef>& params, OptimState& state,
                       const OptimConfig& cfg, double lr) {
  ensure_buffers(state, params);
  for (std::size_t i = 0; i < params.size(); ++i) {
    ParamRef& p = params[i];
    std::vector<double>& buf = state.buf[i];
    for (std::size_t k = 0; k < p.size; ++k) {
      double g = p.grad[k] + cfg.weight_decay * p.value[k];
      buf[k] = cfg.momentum * buf[k] + g;
      p.value[k] -= lr * (g + cfg.momentum * buf[k]);
      p.grad[k] = 0.0;
    }
  }
}

void lars_step(std::vector<ParamRef>& params, OptimState& state,
               const OptimConfig& cfg, double lr) {
  ensure_buffers(state, params);
  for (std::size_t i = 0; i < params.size(); ++i) {
    ParamRef& p = params[i];
    std::vector<double>& buf = state.buf[i];
    double trust = 1.0;
    if (!p.is_bias) {
      double wsq = 0.0;
      double gsq = 0.0;
      for (std::size_t k = 0; k < p.size; ++k) {
        double g = p.grad[k] + cfg.weight_decay * p.value[k];
        wsq += p.value[k] * p.value[k];
        gsq += g * g;
      }
      double wn = std::sqrt(wsq);
      double gn = std::sqrt(gsq);
      if (wn > 0.0 && gn > 0.0) {
        trust = cfg.lars_trust_coeff * wn / (gn + cfg.lars_eps);
      }
    }
    double wd = p.is_bias ? 0.0 : cfg.weight_decay;
    for (std::size_t k = 0; k < p.size; ++k) {
      double g = p.grad[k] + wd * p.value[k];
      buf[k] = cfg.momentum * buf[k] + trust * lr * g;
      p.value[k] -= buf[k];
      p.grad[k] = 0.0;
    }
  }
}

void optimizer_step(std::vector<ParamRef>& params, OptimState& state,
                    const OptimConfig& cfg, double lr) {
  if (cfg.mode == OptimMode::lars) {
    lars_step(params, state, cfg, lr);
  } else {
    sgd_nesterov_step(params, state, cfg, lr);
  }
}

double lr_at(const ScheduleConfig& cfg, std::size_t step) {
  std::size_t warmup = cfg.warmup_epochs * cfg.steps_per_epoch;
  std::size_t total = cfg.total_epochs * cfg.steps_per_epoch;
  if (warmup > 0 && step < warmup) {
    double frac = static_cast<double>(step) / static_cast<double>(warmup);
    return cfg.warmup_start_lr + (cfg.base_lr - cfg.warmup_start_lr) * frac;
  }
  if (total == 0) return cfg.base_lr;
  std::size_t last = total - 1;
  if (step == warmup) return cfg.base_lr;  // boundary lands on base exactly
  if (step >= last) return cfg.final_lr;
  if (last <= warmup) return cfg.base_lr;
  double t = (static_cast<double>(step) - static_cast<double>(warmup)) /
             static_cast<double>(last - warmup);
  return cfg.final_lr + 0.5 * (cfg.base_lr - cfg.final_lr) *
                            (1.0 + std::cos(3.14159265358979323846 * t));
}

double lr_step_decay(double base_lr, const std::vector<std::size_t>& milestones,
                     std::size_t epoch, double factor) {
  double lr = base_lr;
  for (std::size_t ms : milestones) {
    if (ms <= epoch) lr *= factor;
  }
  return lr;
}

}  // namespace suncet
