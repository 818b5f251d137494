#include "suncet/trainer.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "suncet/errors.hpp"
#include "suncet/losses.hpp"
#include "suncet/optim.hpp"
#include "suncet/sampler.hpp"

namespace suncet {
namespace {

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

struct MetricsRow {
  std::size_t epoch = 0;
  std::size_t step = 0;  // global update index, 0-based
  double loss_inst = 0.0;
  std::optional<double> loss_suncet;
  double lr = 0.0;
  u128 macs_cum = 0;
  std::optional<double> eval_top1;
  std::optional<double> wallclock_s;
};

class MetricsWriter {
 public:
  MetricsWriter(const std::string& path, bool log_wallclock)
      : out_(path), log_wallclock_(log_wallclock), path_(path) {
    if (!out_) throw io_error("metrics: cannot write " + path);
    out_ << "epoch,step,loss_inst,loss_suncet,lr,macs_cum,flops_cum,"
            "eval_top1,wallclock_s\n";
    start_ = std::chrono::steady_clock::now();
  }

  // Rows are held back one step so end-of-epoch evaluation results can be
  // attached to the epoch's final row before it hits the file.
  void push(MetricsRow row) {
    flush_pending();
    pending_ = std::move(row);
  }

  void annotate_eval(double top1) {
    if (pending_) pending_->eval_top1 = top1;
  }

  void flush_pending() {
    if (!pending_) return;
    const MetricsRow& r = *pending_;
    out_ << r.epoch << "," << r.step << "," << fmt17(r.loss_inst) << ",";
    if (r.loss_suncet) out_ << fmt17(*r.loss_suncet);
    out_ << "," << fmt17(r.lr) << "," << u128_to_string(r.macs_cum) << ","
         << u128_to_string(flops_per_update(r.macs_cum)) << ",";
    if (r.eval_top1) out_ << fmt6(*r.eval_top1);
    out_ << ",";
    if (log_wallclock_) {
      double secs = std::chrono::duration<double>(
                        std::chrono::steady_clock::now() - start_)
                        .count();
      out_ << fmt6(secs);
    }
    out_ << "\n";
    pending_.reset();
  }

  void close() {
    flush_pending();
    out_.flush();
    if (!out_) throw io_error("metrics: write failed for " + path_);
  }

 private:
  std::ofstream out_;
  bool log_wallclock_;
  std::string path_;
  std::optional<MetricsRow> pending_;
  std::chrono::steady_clock::time_point start_;
};

void check_finite_loss(double v, const char* which, std::size_t epoch,
                       std::size_t step) {
  if (!std::isfinite(v)) {
    throw divergence_error(std::string("non-finite ") + which +
                           " loss at epoch " + std::to_string(epoch) +
                           ", step " + std::to_string(step));
  }
}

Matrix rows_subset(const Matrix& src, const std::vector<std::size_t>& idx) {
  Matrix out(idx.size(), src.cols);
  for (std::size_t i = 0; i < idx.size(); ++i) {
    const double* s = src.row(idx[i]);
    std::copy(s, s + src.cols, out.row(i));
  }
  return out;
}

std::vector<std::size_t> labeled_indices(const LabelSplit& split) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < split.mask.size(); ++i) {
    if (split.mask[i]) idx.push_back(i);
  }
  return idx;
}

void check_model_matches_data(const TrainConfig& cfg, const Dataset& ds) {
  if (cfg.encoder_dims.front() != ds.d_in()) {
    throw config_error("config: encoder_dims starts at " +
                       std::to_string(cfg.encoder_dims.front()) +
                       " but the dataset has d_in " +
                       std::to_string(ds.d_in()));
  }
}

OptimConfig optim_from(const TrainConfig& cfg) {
  OptimConfig oc;
  oc.mode = cfg.optimizer == "lars" ? OptimMode::lars : OptimMode::sgd_nesterov;
  oc.momentum = cfg.momentum;
  oc.weight_decay = cfg.weight_decay;
  oc.lars_trust_coeff = cfg.lars_trust_coeff;
  oc.lars_eps = cfg.lars_eps;
  return oc;
}

void save_rolling_checkpoint(const std::string& path,
                             const ModelParams& params,
                             const ClassifierHead* head,
                             std::uint64_t global_step, std::uint64_t epoch,
                             std::uint64_t rng_seed,
                             std::uint64_t rng_counter) {
  Checkpoint ck = checkpoint_from_model(params, head, global_step, epoch,
                                        rng_seed, rng_counter);
  save_checkpoint(ck, path);
}

// Mean-reduced argmax accuracy over precomputed logits.
double top1_of_logits(const Matrix& logits, const std::vector<int>& labels) {
  std::size_t correct = 0;
  for (std::size_t i = 0; i < logits.rows; ++i) {
    const double* li = logits.row(i);
    std::size_t best = 0;
    for (std::size_t j = 1; j < logits.cols; ++j) {
      if (li[j] > li[best]) best = j;  // strict: ties keep the lowest id
    }
    if (static_cast<int>(best) == labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(logits.rows);
}

}  // namespace

CeResult softmax_cross_entropy(const Matrix& logits,
                               const std::vector<int>& labels) {
  if (labels.size() != logits.rows) {
    throw shape_error("cross_entropy: " + std::to_string(labels.size()) +
                      " labels for " + std::to_string(logits.rows) + " rows");
  }
  CeResult res;
  res.dlogits = Matrix(logits.rows, logits.cols);
  double inv = 1.0 / static_cast<double>(logits.rows);
  for (std::size_t i = 0; i < logits.rows; ++i) {
    const double* li = logits.row(i);
    int y = labels[i];
    if (y < 0 || static_cast<std::size_t>(y) >= logits.cols) {
      throw data_error("cross_entropy: label " + std::to_string(y) +
                       " outside logit range");
    }
    double mx = li[0];
    for (std::size_t j = 1; j < logits.cols; ++j) mx = std::max(mx, li[j]);
    double den = 0.0;
    for (std::size_t j = 0; j < logits.cols; ++j) den += std::exp(li[j] - mx);
    double lse = mx + std::log(den);
    res.value += (lse - li[static_cast<std::size_t>(y)]) * inv;
    double* di = res.dlogits.row(i);
    for (std::size_t j = 0; j < logits.cols; ++j) {
      double p = std::exp(li[j] - lse);
      di[j] = (p - (static_cast<int>(j) == y ? 1.0 : 0.0)) * inv;
    }
  }
  return res;
}

double evaluate(const ModelParams& params, const ClassifierHead& head,
                const Dataset& ds) {
  ForwardCache cache;
  Matrix h = encode(params, ds.features, cache);
  Matrix logits = classifier_forward(head, h);
  return top1_of_logits(logits, ds.labels);
}

double linear_probe_top1(const ModelParams& params, const Dataset& train,
                         const LabelSplit& split, const Dataset& test) {
  std::vector<std::size_t> idx = labeled_indices(split);
  if (idx.empty()) {
    throw data_error("probe: no labeled rows to fit the classifier on");
  }
  ForwardCache cache;
  Matrix h_train =
      encode(params, rows_subset(train.features, idx), cache);
  Matrix h_test = encode(params, test.features, cache);
  // Row normalization makes the probe insensitive to representation scale,
  // so one fixed learning rate works across training stages.
  Matrix e_train = l2_normalize_rows(h_train).y;
  Matrix e_test = l2_normalize_rows(h_test).y;
  std::vector<int> y_train(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) y_train[i] = train.labels[idx[i]];

  ClassifierHead head = init_classifier(
      static_cast<std::size_t>(train.n_classes), e_train.cols);
  auto refs = collect_params(head);
  OptimState state;
  OptimConfig oc;
  oc.mode = OptimMode::sgd_nesterov;
  oc.momentum = 0.9;
  oc.weight_decay = 0.0;
  ScheduleConfig sched;
  sched.base_lr = 1.0;
  sched.warmup_start_lr = 0.0;
  sched.final_lr = 0.0;
  sched.warmup_epochs = 0;
  sched.total_epochs = 150;
  sched.steps_per_epoch = 1;
  for (std::size_t step = 0; step < 150; ++step) {
    Matrix logits = classifier_forward(head, e_train);
    CeResult ce = softmax_cross_entropy(logits, y_train);
    classifier_backward(head, e_train, ce.dlogits);
    sgd_nesterov_step(refs, state, oc, lr_at(sched, step));
  }
  Matrix logits = classifier_forward(head, e_test);
  return top1_of_logits(logits, test.labels);
}

RunResult pretrain(const Dataset& train, const Dataset* test,
                   const LabelSplit& split, const TrainConfig& cfg,
                   const std::string& out_dir) {
  cfg.validate();
  check_model_matches_data(cfg, train);
  std::filesystem::create_directories(out_dir);
  std::string ck_path = out_dir + "/checkpoint.bin";
  std::string metrics_path = out_dir + "/metrics.csv";

  ModelParams params =
      init_params(cfg.encoder_dims, cfg.proj_dims, cfg.seed);
  UnsupervisedSampler unsup(train, cfg.unsup_batch, cfg.augment(),
                            Rng(derive_seed(cfg.seed, 1)));
  std::optional<SupervisedSampler> sup;
  if (cfg.suncet_off_epoch > 0) {
    sup.emplace(train, split,
                SupervisedBatchSpec{cfg.sup_classes_per_batch,
                                    cfg.sup_samples_per_class},
                cfg.augment(), Rng(derive_seed(cfg.seed, 2)));
  }

  std::size_t steps_per_epoch = unsup.batches_per_epoch();
  ScheduleConfig sched{cfg.base_lr,      cfg.warmup_start_lr, cfg.final_lr,
                       cfg.warmup_epochs, cfg.epochs,         steps_per_epoch};
  auto refs = collect_params(params);
  OptimState opt_state;
  OptimConfig oc = optim_from(cfg);
  FlopsLedger ledger;
  MetricsWriter metrics(metrics_path, cfg.log_wallclock);

  save_rolling_checkpoint(ck_path, params, nullptr, 0, 0, cfg.seed,
                          unsup.rng().counter());

  bool can_probe = test != nullptr && split.labeled_count() > 0;
  std::optional<double> last_top1;
  std::size_t global_step = 0;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    bool sup_active = epoch < cfg.suncet_off_epoch;
    for (std::size_t it = 0; it < steps_per_epoch; ++it) {
      double lr = lr_at(sched, global_step);
      UnsupervisedBatch ub = unsup.next();

      ForwardCache enc_cache, proj_cache;
      Matrix h = encode(params, ub.views, enc_cache);
      Matrix z = project(params, h, proj_cache);
      LossResult inst = ntxent({z, ub.partner}, cfg.tau);
      check_finite_loss(inst.value, "instance", epoch, global_step);

      u128 fwd_macs = stack_forward_macs(params.encoder, ub.views.rows);
      fwd_macs += stack_forward_macs(params.projection, ub.views.rows);
      fwd_macs += macs_sim_matrix(z.rows, z.cols);

      Matrix dh = stack_backward(params.projection, proj_cache, inst.dz);
      stack_backward(params.encoder, enc_cache, dh);

      std::optional<double> sup_value;
      if (sup_active) {
        SupervisedBatch sb = sup->next();
        ForwardCache senc_cache, sproj_cache;
        Matrix hs = encode(params, sb.rows, senc_cache);
        Matrix zs = project(params, hs, sproj_cache);
        LossResult supl = suncet({zs, sb.labels}, cfg.tau);
        check_finite_loss(supl.value, "supervised", epoch, global_step);
        sup_value = supl.value;
        fwd_macs += stack_forward_macs(params.encoder, sb.rows.rows);
        fwd_macs += stack_forward_macs(params.projection, sb.rows.rows);
        fwd_macs += macs_sim_matrix(zs.rows, zs.cols);
        Matrix dhs = stack_backward(params.projection, sproj_cache, supl.dz);
        stack_backward(params.encoder, senc_cache, dhs);
      }

      optimizer_step(refs, opt_state, oc, lr);
      params.encoder.version += 1;
      params.projection.version += 1;
      ledger.record_update(fwd_macs);

      MetricsRow row;
      row.epoch = epoch;
      row.step = global_step;
      row.loss_inst = inst.value;
      row.loss_suncet = sup_value;
      row.lr = lr;
      row.macs_cum = ledger.macs_cum;
      metrics.push(std::move(row));
      ++global_step;
    }
    bool eval_now = can_probe && ((epoch + 1) % cfg.eval_every == 0 ||
                                  epoch + 1 == cfg.epochs);
    if (eval_now) {
      double top1 = linear_probe_top1(params, train, split, *test);
      metrics.annotate_eval(top1);
      last_top1 = top1;
    }
    save_rolling_checkpoint(ck_path, params, nullptr, global_step, epoch + 1,
                            cfg.seed, unsup.rng().counter());
  }
  metrics.close();
  return {ck_path, metrics_path, ledger.macs_cum, ledger.updates_cum,
          last_top1};
}

namespace {

// Shared scaffold for the two supervised phases: minibatch passes over the
// labeled rows with per-epoch reshuffling.
struct LabeledLoader {
  std::vector<std::size_t> idx;
  std::size_t batch = 0;
  Rng rng;

  std::size_t batches_per_epoch() const {
    return (idx.size() + batch - 1) / batch;
  }

  void reshuffle() {
    for (std::size_t i = idx.size(); i > 1; --i) {
      std::size_t j = rng.next_below(i);
      std::swap(idx[i - 1], idx[j]);
    }
  }

  // Index slice for minibatch b of the current epoch order.
  std::vector<std::size_t> slice(std::size_t b) const {
    std::size_t lo = b * batch;
    std::size_t hi = std::min(idx.size(), lo + batch);
    return {idx.begin() + static_cast<std::ptrdiff_t>(lo),
            idx.begin() + static_cast<std::ptrdiff_t>(hi)};
  }
};

}  // namespace

RunResult finetune(const Dataset& train, const Dataset* test,
                   const LabelSplit& split, const Checkpoint& ck,
                   const TrainConfig& cfg, const std::string& out_dir) {
  cfg.validate();
  std::filesystem::create_directories(out_dir);
  std::string ck_path = out_dir + "/checkpoint.bin";
  std::string metrics_path = out_dir + "/metrics.csv";

  ModelParams params = model_from_checkpoint(ck);
  if (params.encoder.in_dim() != train.d_in()) {
    throw data_error("finetune: checkpoint expects d_in " +
                     std::to_string(params.encoder.in_dim()) +
                     " but dataset has " + std::to_string(train.d_in()));
  }
  ClassifierHead head = init_classifier(
      static_cast<std::size_t>(train.n_classes), params.d_repr());

  LabeledLoader loader{labeled_indices(split), cfg.finetune_batch,
                       Rng(derive_seed(cfg.seed, 3))};
  if (loader.idx.empty()) {
    throw data_error("finetune: labeled set is empty");
  }

  auto refs = collect_encoder_params(params);
  auto head_refs = collect_params(head);
  refs.insert(refs.end(), head_refs.begin(), head_refs.end());
  OptimState state;
  OptimConfig oc;
  oc.mode = OptimMode::sgd_nesterov;
  oc.momentum = cfg.momentum;
  oc.weight_decay = 0.0;  // tuning phase never decays weights

  std::size_t steps_per_epoch = loader.batches_per_epoch();
  ScheduleConfig sched{cfg.finetune_lr, 0.0, cfg.final_lr,
                       0,               cfg.finetune_epochs, steps_per_epoch};
  FlopsLedger ledger;
  MetricsWriter metrics(metrics_path, cfg.log_wallclock);
  save_rolling_checkpoint(ck_path, params, &head, 0, 0, cfg.seed,
                          loader.rng.counter());

  std::optional<double> last_top1;
  std::size_t global_step = 0;
  for (std::size_t epoch = 0; epoch < cfg.finetune_epochs; ++epoch) {
    loader.reshuffle();
    for (std::size_t b = 0; b < steps_per_epoch; ++b) {
      double lr = lr_at(sched, global_step);
      std::vector<std::size_t> rows = loader.slice(b);
      Matrix x = rows_subset(train.features, rows);
      std::vector<int> y(rows.size());
      for (std::size_t i = 0; i < rows.size(); ++i) y[i] = train.labels[rows[i]];

      ForwardCache enc_cache;
      Matrix h = encode(params, x, enc_cache);
      Matrix logits = classifier_forward(head, h);
      CeResult ce = softmax_cross_entropy(logits, y);
      check_finite_loss(ce.value, "cross-entropy", epoch, global_step);

      Matrix dh = classifier_backward(head, h, ce.dlogits);
      stack_backward(params.encoder, enc_cache, dh);
      sgd_nesterov_step(refs, state, oc, lr);
      params.encoder.version += 1;
      head.version += 1;

      u128 fwd_macs = stack_forward_macs(params.encoder, x.rows);
      fwd_macs += macs_affine(x.rows, head.w.cols, head.w.rows);
      ledger.record_update(fwd_macs);

      MetricsRow row;
      row.epoch = epoch;
      row.step = global_step;
      row.loss_inst = ce.value;
      row.lr = lr;
      row.macs_cum = ledger.macs_cum;
      metrics.push(std::move(row));
      ++global_step;
    }
    bool eval_now = test != nullptr && ((epoch + 1) % cfg.eval_every == 0 ||
                                        epoch + 1 == cfg.finetune_epochs);
    if (eval_now) {
      double top1 = evaluate(params, head, *test);
      metrics.annotate_eval(top1);
      last_top1 = top1;
    }
    save_rolling_checkpoint(ck_path, params, &head, global_step, epoch + 1,
                            cfg.seed, loader.rng.counter());
  }
  metrics.close();
  return {ck_path, metrics_path, ledger.macs_cum, ledger.updates_cum,
          last_top1};
}

RunResult linear_eval(const Dataset& train, const Dataset* test,
                      const LabelSplit& split, const Checkpoint& ck,
                      const TrainConfig& cfg, const std::string& out_dir) {
  cfg.validate();
  std::filesystem::create_directories(out_dir);
  std::string ck_path = out_dir + "/checkpoint.bin";
  std::string metrics_path = out_dir + "/metrics.csv";

  ModelParams params = model_from_checkpoint(ck);
  if (params.encoder.in_dim() != train.d_in()) {
    throw data_error("linear_eval: checkpoint expects d_in " +
                     std::to_string(params.encoder.in_dim()) +
                     " but dataset has " + std::to_string(train.d_in()));
  }
  ClassifierHead head = init_classifier(
      static_cast<std::size_t>(train.n_classes), params.d_repr());

  LabeledLoader loader{labeled_indices(split), cfg.lineval_batch,
                       Rng(derive_seed(cfg.seed, 4))};
  if (loader.idx.empty()) {
    throw data_error("linear_eval: labeled set is empty");
  }

  // The encoder is frozen, so its outputs are computed once up front.
  ForwardCache cache;
  Matrix h_all =
      encode(params, rows_subset(train.features, loader.idx), cache);
  std::vector<int> y_all(loader.idx.size());
  for (std::size_t i = 0; i < loader.idx.size(); ++i) {
    y_all[i] = train.labels[loader.idx[i]];
  }
  Matrix h_test;
  if (test != nullptr) {
    h_test = encode(params, test->features, cache);
  }
  // Position of each labeled row inside h_all, for minibatch slicing after
  // the loader reshuffles indices.
  std::vector<std::size_t> pos_of(train.n());
  for (std::size_t i = 0; i < loader.idx.size(); ++i) pos_of[loader.idx[i]] = i;

  auto refs = collect_params(head);
  OptimState state;
  OptimConfig oc;
  oc.mode = OptimMode::sgd_nesterov;
  oc.momentum = cfg.momentum;
  oc.weight_decay = 0.0;

  std::size_t steps_per_epoch = loader.batches_per_epoch();
  FlopsLedger ledger;
  MetricsWriter metrics(metrics_path, cfg.log_wallclock);
  save_rolling_checkpoint(ck_path, params, &head, 0, 0, cfg.seed,
                          loader.rng.counter());

  std::optional<double> last_top1;
  std::size_t global_step = 0;
  for (std::size_t epoch = 0; epoch < cfg.lineval_epochs; ++epoch) {
    double lr = lr_step_decay(cfg.lineval_lr, cfg.lineval_milestones, epoch);
    loader.reshuffle();
    for (std::size_t b = 0; b < steps_per_epoch; ++b) {
      std::vector<std::size_t> rows = loader.slice(b);
      std::vector<std::size_t> local(rows.size());
      for (std::size_t i = 0; i < rows.size(); ++i) local[i] = pos_of[rows[i]];
      Matrix h = rows_subset(h_all, local);
      std::vector<int> y(rows.size());
      for (std::size_t i = 0; i < rows.size(); ++i) y[i] = train.labels[rows[i]];

      Matrix logits = classifier_forward(head, h);
      CeResult ce = softmax_cross_entropy(logits, y);
      check_finite_loss(ce.value, "cross-entropy", epoch, global_step);
      classifier_backward(head, h, ce.dlogits);
      sgd_nesterov_step(refs, state, oc, lr);
      head.version += 1;

      ledger.record_update(macs_affine(h.rows, head.w.cols, head.w.rows));

      MetricsRow row;
      row.epoch = epoch;
      row.step = global_step;
      row.loss_inst = ce.value;
      row.lr = lr;
      row.macs_cum = ledger.macs_cum;
      metrics.push(std::move(row));
      ++global_step;
    }
    bool eval_now = test != nullptr && ((epoch + 1) % cfg.eval_every == 0 ||
                                        epoch + 1 == cfg.lineval_epochs);
    if (eval_now) {
      Matrix logits = classifier_forward(head, h_test);
      double top1 = top1_of_logits(logits, test->labels);
      metrics.annotate_eval(top1);
      last_top1 = top1;
    }
    save_rolling_checkpoint(ck_path, params, &head, global_step, epoch + 1,
                            cfg.seed, loader.rng.counter());
  }
  metrics.close();
  return {ck_path, metrics_path, ledger.macs_cum, ledger.updates_cum,
          last_top1};
}

}  // namespace suncet
