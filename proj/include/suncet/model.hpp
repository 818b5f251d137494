#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "suncet/matrix.hpp"
#include "suncet/rng.hpp"

namespace suncet {

enum class Activation { relu, identity };

struct LayerSpec {
  std::size_t in_dim = 0;
  std::size_t out_dim = 0;
  Activation act = Activation::relu;
};

// Affine layer with weights stored [out x in]; forward is x·Wᵀ + b.
struct Layer {
  LayerSpec spec;
  Matrix w;                // out x in
  std::vector<double> b;   // out
  Matrix gw;               // gradient accumulator, same shape as w
  std::vector<double> gb;  // same shape as b
};

// A stack of layers plus a version stamp. The stamp advances whenever the
// parameters change (init, optimizer step, checkpoint load) so stale forward
// caches can be rejected in backward.
struct ParamStack {
  std::vector<Layer> layers;
  std::uint64_t version = 0;

  std::size_t in_dim() const { return layers.front().spec.in_dim; }
  std::size_t out_dim() const { return layers.back().spec.out_dim; }
  void zero_grads();
};

struct ForwardCache {
  std::vector<Matrix> acts;  // acts[0] = input, acts[l+1] = layer l output
  std::uint64_t version = 0;
  bool valid = false;

  const Matrix& output() const { return acts.back(); }
};

// Encoder and projection head. The projection head always has exactly one
// hidden layer; it is dropped entirely for fine-tuning and linear evaluation.
struct ModelParams {
  ParamStack encoder;
  ParamStack projection;

  std::size_t d_repr() const { return encoder.out_dim(); }
  std::size_t d_proj() const { return projection.out_dim(); }
  void zero_grads();
};

// Linear classifier over encoder output, zero-initialized before tuning.
struct ClassifierHead {
  Matrix w;                // n_classes x d_repr
  std::vector<double> b;   // n_classes
  Matrix gw;
  std::vector<double> gb;
  std::uint64_t version = 0;

  void zero_grads();
};

ParamStack init_stack(const std::vector<LayerSpec>& specs, Rng& rng);

// Builds encoder from dims [d_in, h1, ..., d_repr] (relu throughout) and a
// projection [d_repr, hidden, d_proj] (relu hidden, linear output).
// Deterministic in seed; He-scaled weights, zero biases, zero grads.
ModelParams init_params(const std::vector<std::size_t>& encoder_dims,
                        const std::vector<std::size_t>& proj_dims,
                        std::uint64_t seed);

ClassifierHead init_classifier(std::size_t n_classes, std::size_t d_repr);

Matrix stack_forward(const ParamStack& stack, const Matrix& x,
                     ForwardCache& cache);

// Accumulates parameter gradients from the upstream gradient d_out and
// returns the gradient w.r.t. the stack input.
Matrix stack_backward(ParamStack& stack, const ForwardCache& cache,
                      const Matrix& d_out);

Matrix encode(const ModelParams& params, const Matrix& x, ForwardCache& cache);
Matrix project(const ModelParams& params, const Matrix& h,
               ForwardCache& cache);

Matrix classifier_forward(const ClassifierHead& head, const Matrix& h);
// Accumulates classifier grads; returns gradient w.r.t. the inputs.
Matrix classifier_backward(ClassifierHead& head, const Matrix& h,
                           const Matrix& d_logits);

// Checkpoint payload. Little-endian binary: magic "SNCK", version u32 = 1,
// global_step u64, epoch u64, rng_seed u64, rng_counter u64, then for each
// parameter: name length u32, name bytes, rows u64, cols u64, f64 payload.
// Parameters are read until end of file. Round-trips byte-exactly.
struct Checkpoint {
  std::uint64_t global_step = 0;
  std::uint64_t epoch = 0;
  std::uint64_t rng_seed = 0;
  std::uint64_t rng_counter = 0;
  std::vector<std::pair<std::string, Matrix>> params;

  const Matrix* find(const std::string& name) const;
};

Checkpoint checkpoint_from_model(const ModelParams& params,
                                 const ClassifierHead* head,
                                 std::uint64_t global_step,
                                 std::uint64_t epoch, std::uint64_t rng_seed,
                                 std::uint64_t rng_counter);

// Rebuilds model tensors named "encoder.<l>.w/b", "projection.<l>.w/b" and
// "classifier.w/b" from a checkpoint. Layer shapes are taken from the stored
// tensors; activations follow the construction rule of init_params.
ModelParams model_from_checkpoint(const Checkpoint& ck);
bool checkpoint_has_classifier(const Checkpoint& ck);
ClassifierHead classifier_from_checkpoint(const Checkpoint& ck);

void save_checkpoint(const Checkpoint& ck, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace suncet
