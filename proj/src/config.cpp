#include "suncet/config.hpp"

#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "suncet/errors.hpp"

namespace suncet {
namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& v, const std::string& ctx) {
  std::size_t used = 0;
  double out;
  try {
    out = std::stod(v, &used);
  } catch (const std::exception&) {
    throw config_error(ctx + ": expected a number, got '" + v + "'");
  }
  if (used != v.size()) {
    throw config_error(ctx + ": trailing characters in number '" + v + "'");
  }
  return out;
}

std::uint64_t parse_u64(const std::string& v, const std::string& ctx) {
  // stoull quietly wraps negative input, so screen the sign ourselves
  if (!v.empty() && v[0] == '-') {
    throw config_error(ctx + ": expected a nonnegative integer, got '" + v +
                       "'");
  }
  std::size_t used = 0;
  std::uint64_t out;
  try {
    out = std::stoull(v, &used);
  } catch (const std::exception&) {
    throw config_error(ctx + ": expected a nonnegative integer, got '" + v +
                       "'");
  }
  if (used != v.size()) {
    throw config_error(ctx + ": trailing characters in integer '" + v + "'");
  }
  return out;
}

std::vector<std::size_t> parse_size_list(const std::string& v,
                                         const std::string& ctx) {
  std::vector<std::size_t> out;
  std::stringstream ss(v);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    out.push_back(static_cast<std::size_t>(parse_u64(trim(cell), ctx)));
  }
  if (out.empty()) throw config_error(ctx + ": empty list");
  return out;
}

bool parse_bool(const std::string& v, const std::string& ctx) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw config_error(ctx + ": expected true/false, got '" + v + "'");
}

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt_list(const std::vector<std::size_t>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(v[i]);
  }
  return out;
}

using Setter = std::function<void(TrainConfig&, const std::string& value,
                                  const std::string& ctx)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"dataset_path",
       [](TrainConfig& c, const std::string& v, const std::string&) {
         c.dataset_path = v;
       }},
      {"test_path",
       [](TrainConfig& c, const std::string& v, const std::string&) {
         c.test_path = v;
       }},
      {"label_fraction",
       [](TrainConfig& c, const std::string& v, const std::string& x) {
         c.label_fraction = parse_double(v, x);
       }},
      {"label_seed",
       [](TrainConfig& c, const std::string& v, const std::string& x) {
         c.label_seed = parse_u64(v, x);
       }},
      {"tau",
       [](TrainConfig& c, const std::string& v, const std::string& x) {
         c.tau = parse_double(v, x);
       }},
      {"unsup_batch",
       [](TrainConfig& c, const std::string& v, const std::string& x) {
         c.unsup_batch = parse_u64(v, x);
       }},
      {"sup_classes_per_batch",
       [](TrainConfig& c, const std::string& v, const std::string& x) {
         c.sup_classes_per_batch = parse_u64(v, x);
       }},
      {"sup_samples_per_class",
       [](TrainConfig& c, const std::string& v, const std::string& x) {
         c.sup_samples_per_class = parse_u64(v, x);
       }},
      {"epochs",
       [](TrainConfig& c, const std::string& v, const std::string& x) {
         c.epochs = parse_u64(v, x);
       }},
      {"suncet_off_epoch",
       [](TrainConfig& c, const std::string& v, const std::string& x) {
         c.suncet_off_epoch = parse_u64(v, x);
       }},
      {"base_lr",
       [](TrainConfig& c, const std::string& v, const std::string& x) {
         c.base_lr = parse_double(v, x);
       }},
      {"warmup_epochs",
       [](TrainConfig& c, const std::string& v, const std::string& x) {
         c.warmup_epochs = parse_u64(v, x);
       }},
      {"warmup_start_lr",
       [](TrainConfig& c, const std::string& v, const std::string& x) {
         c.warmup_start_lr = parse_double(v, x);
       }},
      {"final_lr",
       [](TrainConfig& c, const std::string& v, const std::string& x) {
         c.final_lr = parse_double(v, x);
       }},
      {"momentum",
       [](TrainConfig& c, const std::string& v, const std::string& x) {
         c.momentum = parse_double(v, x);
       }},
      {"weight_decay",
       [](TrainConfig& c, const std::string& v, const std::string& x) {
         c.weight_decay = parse_double(v, x);
       }},
      {"optimizer",
       [](TrainConfig& c, const std::string& v, const std::string&) {
         c.optimizer = v;
       }},
      {"lars_trust_coeff",
       [](TrainConfig& c, const std::string& v, const std::string& x) {
         c.lars_trust_coeff = parse_double(v, x);
       }},
      {"lars_eps",
       [](TrainConfig& c, const std::string& v, const std::string& x) {
         c.lars_eps = parse_double(v, x);
       }},
      {"encoder_dims",
       [](TrainConfig& c, const std::string& v, const std::string& x) {
         c.encoder_dims = parse_size_list(v, x);
       }},
      {"proj_dims",
       [](TrainConfig& c, const std::string& v, const std::string& x) {
         c.proj_dims = parse_size_list(v, x);
       }},
      {"augment_noise_std",
       [](TrainConfig& c, const std::string& v, const std::string& x) {
         c.augment_noise_std = parse_double(v, x);
       }},
      {"augment_mask_prob",
       [](TrainConfig& c, const std::string& v, const std::string& x) {
         c.augment_mask_prob = parse_double(v, x);
       }},
      {"augment_scale_jitter",
       [](TrainConfig& c, const std::string& v, const std::string& x) {
         c.augment_scale_jitter = parse_double(v, x);
       }},
      {"eval_every",
       [](TrainConfig& c, const std::string& v, const std::string& x) {
         c.eval_every = parse_u64(v, x);
       }},
      {"seed",
       [](TrainConfig& c, const std::string& v, const std::string& x) {
         c.seed = parse_u64(v, x);
       }},
      {"finetune_epochs",
       [](TrainConfig& c, const std::string& v, const std::string& x) {
         c.finetune_epochs = parse_u64(v, x);
       }},
      {"finetune_lr",
       [](TrainConfig& c, const std::string& v, const std::string& x) {
         c.finetune_lr = parse_double(v, x);
       }},
      {"finetune_batch",
       [](TrainConfig& c, const std::string& v, const std::string& x) {
         c.finetune_batch = parse_u64(v, x);
       }},
      {"lineval_epochs",
       [](TrainConfig& c, const std::string& v, const std::string& x) {
         c.lineval_epochs = parse_u64(v, x);
       }},
      {"lineval_lr",
       [](TrainConfig& c, const std::string& v, const std::string& x) {
         c.lineval_lr = parse_double(v, x);
       }},
      {"lineval_milestones",
       [](TrainConfig& c, const std::string& v, const std::string& x) {
         c.lineval_milestones = parse_size_list(v, x);
       }},
      {"lineval_batch",
       [](TrainConfig& c, const std::string& v, const std::string& x) {
         c.lineval_batch = parse_u64(v, x);
       }},
      {"sweep_switchoff_epochs",
       [](TrainConfig& c, const std::string& v, const std::string& x) {
         c.sweep_switchoff_epochs = parse_size_list(v, x);
       }},
      {"log_wallclock",
       [](TrainConfig& c, const std::string& v, const std::string& x) {
         c.log_wallclock = parse_bool(v, x);
       }},
  };
  return table;
}

void require(bool ok, const std::string& msg) {
  if (!ok) throw config_error("config: " + msg);
}

}  // namespace

void TrainConfig::validate() const {
  require(tau > 0.0, "tau must be > 0");
  require(label_fraction >= 0.0 && label_fraction <= 1.0,
          "label_fraction must be in [0, 1]");
  require(unsup_batch >= 2,
          "unsup_batch must be >= 2 (a lone view pair has no negatives)");
  require(sup_classes_per_batch >= 1, "sup_classes_per_batch must be >= 1");
  require(sup_samples_per_class >= 2,
          "sup_samples_per_class must be >= 2 (each class in a supervised "
          "batch needs a positive pair)");
  require(suncet_off_epoch <= epochs,
          "suncet_off_epoch must be <= epochs");
  require(warmup_epochs <= epochs, "warmup_epochs must be <= epochs");
  require(base_lr > 0.0, "base_lr must be > 0");
  require(warmup_start_lr >= 0.0 && final_lr >= 0.0,
          "warmup_start_lr and final_lr must be >= 0");
  require(momentum >= 0.0 && momentum < 1.0, "momentum must be in [0, 1)");
  require(weight_decay >= 0.0, "weight_decay must be >= 0");
  require(optimizer == "lars" || optimizer == "sgd_nesterov",
          "optimizer must be lars or sgd_nesterov");
  require(lars_trust_coeff > 0.0, "lars_trust_coeff must be > 0");
  require(lars_eps > 0.0, "lars_eps must be > 0");
  require(encoder_dims.size() >= 2, "encoder_dims needs >= 2 entries");
  require(proj_dims.size() == 3,
          "proj_dims must have exactly 3 entries (one hidden layer)");
  for (std::size_t v : encoder_dims) require(v >= 1, "encoder dims >= 1");
  for (std::size_t v : proj_dims) require(v >= 1, "projection dims >= 1");
  require(proj_dims.front() == encoder_dims.back(),
          "proj_dims must start at the encoder output dim");
  require(proj_dims.back() < encoder_dims.back(),
          "projection output dim must be smaller than the representation "
          "dim");
  require(augment_noise_std >= 0.0, "augment_noise_std must be >= 0");
  require(augment_scale_jitter >= 0.0, "augment_scale_jitter must be >= 0");
  require(augment_mask_prob >= 0.0 && augment_mask_prob < 1.0,
          "augment_mask_prob must be in [0, 1)");
  require(eval_every >= 1, "eval_every must be >= 1");
  require(finetune_batch >= 1, "finetune_batch must be >= 1");
  require(lineval_batch >= 1, "lineval_batch must be >= 1");
  require(finetune_lr >= 0.0 && lineval_lr >= 0.0,
          "phase learning rates must be >= 0");
  for (std::size_t i = 1; i < lineval_milestones.size(); ++i) {
    require(lineval_milestones[i - 1] < lineval_milestones[i],
            "lineval_milestones must be strictly ascending");
  }
}

TrainConfig parse_config_text(const std::string& text,
                              const std::string& origin) {
  TrainConfig cfg;
  std::stringstream ss(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    std::string stripped = line;
    std::size_t hash = stripped.find('#');
    if (hash != std::string::npos) stripped = stripped.substr(0, hash);
    stripped = trim(stripped);
    if (stripped.empty()) continue;
    std::string ctx = origin + ":" + std::to_string(lineno);
    std::size_t eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw config_error(ctx + ": expected 'key = value', got '" + stripped +
                         "'");
    }
    std::string key = trim(stripped.substr(0, eq));
    std::string value = trim(stripped.substr(eq + 1));
    auto it = setters().find(key);
    if (it == setters().end()) {
      throw config_error(ctx + ": unknown key '" + key + "'");
    }
    it->second(cfg, value, ctx + " (" + key + ")");
  }
  cfg.validate();
  return cfg;
}

TrainConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("config: cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path);
}

std::string serialize_config(const TrainConfig& c) {
  std::ostringstream out;
  out << "dataset_path = " << c.dataset_path << "\n";
  out << "test_path = " << c.test_path << "\n";
  out << "label_fraction = " << fmt_double(c.label_fraction) << "\n";
  out << "label_seed = " << c.label_seed << "\n";
  out << "tau = " << fmt_double(c.tau) << "\n";
  out << "unsup_batch = " << c.unsup_batch << "\n";
  out << "sup_classes_per_batch = " << c.sup_classes_per_batch << "\n";
  out << "sup_samples_per_class = " << c.sup_samples_per_class << "\n";
  out << "epochs = " << c.epochs << "\n";
  out << "suncet_off_epoch = " << c.suncet_off_epoch << "\n";
  out << "base_lr = " << fmt_double(c.base_lr) << "\n";
  out << "warmup_epochs = " << c.warmup_epochs << "\n";
  out << "warmup_start_lr = " << fmt_double(c.warmup_start_lr) << "\n";
  out << "final_lr = " << fmt_double(c.final_lr) << "\n";
  out << "momentum = " << fmt_double(c.momentum) << "\n";
  out << "weight_decay = " << fmt_double(c.weight_decay) << "\n";
  out << "optimizer = " << c.optimizer << "\n";
  out << "lars_trust_coeff = " << fmt_double(c.lars_trust_coeff) << "\n";
  out << "lars_eps = " << fmt_double(c.lars_eps) << "\n";
  out << "encoder_dims = " << fmt_list(c.encoder_dims) << "\n";
  out << "proj_dims = " << fmt_list(c.proj_dims) << "\n";
  out << "augment_noise_std = " << fmt_double(c.augment_noise_std) << "\n";
  out << "augment_mask_prob = " << fmt_double(c.augment_mask_prob) << "\n";
  out << "augment_scale_jitter = " << fmt_double(c.augment_scale_jitter)
      << "\n";
  out << "eval_every = " << c.eval_every << "\n";
  out << "seed = " << c.seed << "\n";
  out << "finetune_epochs = " << c.finetune_epochs << "\n";
  out << "finetune_lr = " << fmt_double(c.finetune_lr) << "\n";
  out << "finetune_batch = " << c.finetune_batch << "\n";
  out << "lineval_epochs = " << c.lineval_epochs << "\n";
  out << "lineval_lr = " << fmt_double(c.lineval_lr) << "\n";
  out << "lineval_milestones = " << fmt_list(c.lineval_milestones) << "\n";
  out << "lineval_batch = " << c.lineval_batch << "\n";
  out << "sweep_switchoff_epochs = " << fmt_list(c.sweep_switchoff_epochs)
      << "\n";
  out << "log_wallclock = " << (c.log_wallclock ? "true" : "false") << "\n";
  return out.str();
}

bool operator==(const TrainConfig& a, const TrainConfig& b) {
  return serialize_config(a) == serialize_config(b);
}

}  // namespace suncet
