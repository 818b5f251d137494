#pragma once

#include <optional>
#include <string>

#include "suncet/accounting.hpp"
#include "suncet/config.hpp"
#include "suncet/dataset.hpp"
#include "suncet/model.hpp"

namespace suncet {

// Softmax cross-entropy with mean reduction. Returns the loss and the
// gradient w.r.t. the logits.
struct CeResult {
  double value = 0.0;
  Matrix dlogits;
};
CeResult softmax_cross_entropy(const Matrix& logits,
                               const std::vector<int>& labels);

// Top-1 accuracy of the classifier on a dataset; argmax ties go to the
// lowest class id.
double evaluate(const ModelParams& params, const ClassifierHead& head,
                const Dataset& ds);

// Linear probe used for the eval_top1 metrics column during pre-training:
// train a zero-initialized classifier on the frozen, row-normalized
// embeddings of the labeled rows, then score the test set. Fully
// deterministic (full-batch updates, no randomness) and excluded from the
// training flops ledger.
double linear_probe_top1(const ModelParams& params, const Dataset& train,
                         const LabelSplit& split, const Dataset& test);

struct RunResult {
  std::string checkpoint_path;
  std::string metrics_path;
  u128 total_macs = 0;
  std::uint64_t total_updates = 0;
  std::optional<double> final_top1;
};

// Semi-supervised pre-training: every iteration draws an unsupervised
// two-view batch for the instance loss; while epoch < suncet_off_epoch a
// class-balanced labeled batch adds the supervised loss. One optimizer step
// per iteration; epochs are counted on the unsupervised loader. Writes
// metrics.csv and a per-epoch rolling checkpoint.bin under out_dir. test may
// be null (eval_top1 column stays blank).
RunResult pretrain(const Dataset& train, const Dataset* test,
                   const LabelSplit& split, const TrainConfig& cfg,
                   const std::string& out_dir);

// Joint encoder+classifier training on the labeled rows with SGD-Nesterov,
// no weight decay, zero-initialized classifier, cosine schedule, raw
// (unaugmented) inputs. The projection head is carried through untouched.
RunResult finetune(const Dataset& train, const Dataset* test,
                   const LabelSplit& split, const Checkpoint& ck,
                   const TrainConfig& cfg, const std::string& out_dir);

// Classifier-only training on frozen-encoder embeddings with the step-decay
// schedule. Encoder and projection tensors pass through byte-identical.
RunResult linear_eval(const Dataset& train, const Dataset* test,
                      const LabelSplit& split, const Checkpoint& ck,
                      const TrainConfig& cfg, const std::string& out_dir);

}  // namespace suncet
