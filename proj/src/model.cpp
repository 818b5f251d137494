#include "suncet/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "suncet/errors.hpp"

namespace suncet {
namespace {

template <typename T>
void write_le(std::ostream& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.write(buf, sizeof(T));
}

template <typename T>
bool read_le(std::istream& in, T& v) {
  char buf[sizeof(T)];
  in.read(buf, sizeof(T));
  if (in.gcount() != static_cast<std::streamsize>(sizeof(T))) return false;
  std::memcpy(&v, buf, sizeof(T));
  return true;
}

template <typename T>
T read_le_or_throw(std::istream& in, const char* what) {
  T v;
  if (!read_le(in, v)) {
    throw io_error(std::string("checkpoint: truncated while reading ") + what);
  }
  return v;
}

void check_chain(const std::vector<LayerSpec>& specs, const char* name) {
  for (std::size_t l = 0; l < specs.size(); ++l) {
    if (specs[l].in_dim < 1 || specs[l].out_dim < 1) {
      throw shape_error(std::string(name) + ": layer dims must be >= 1");
    }
    if (l > 0 && specs[l].in_dim != specs[l - 1].out_dim) {
      throw shape_error(std::string(name) + ": layer " + std::to_string(l) +
                        " in_dim " + std::to_string(specs[l].in_dim) +
                        " does not chain from out_dim " +
                        std::to_string(specs[l - 1].out_dim));
    }
  }
}

std::vector<LayerSpec> specs_from_dims(const std::vector<std::size_t>& dims,
                                       bool linear_last) {
  std::vector<LayerSpec> specs;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    bool last = l + 2 == dims.size();
    specs.push_back({dims[l], dims[l + 1],
                     (last && linear_last) ? Activation::identity
                                           : Activation::relu});
  }
  return specs;
}

}  // namespace

void ParamStack::zero_grads() {
  for (auto& layer : layers) {
    layer.gw.fill(0.0);
    layer.gb.assign(layer.gb.size(), 0.0);
  }
}

void ModelParams::zero_grads() {
  encoder.zero_grads();
  projection.zero_grads();
}

void ClassifierHead::zero_grads() {
  gw.fill(0.0);
  gb.assign(gb.size(), 0.0);
}

ParamStack init_stack(const std::vector<LayerSpec>& specs, Rng& rng) {
  ParamStack stack;
  for (const auto& spec : specs) {
    Layer layer;
    layer.spec = spec;
    layer.w = Matrix(spec.out_dim, spec.in_dim);
    double std_dev = std::sqrt(2.0 / static_cast<double>(spec.in_dim));
    for (double& v : layer.w.data) v = std_dev * rng.next_normal();
    layer.b.assign(spec.out_dim, 0.0);
    layer.gw = Matrix(spec.out_dim, spec.in_dim);
    layer.gb.assign(spec.out_dim, 0.0);
    stack.layers.push_back(std::move(layer));
  }
  stack.version = 1;
  return stack;
}

ModelParams init_params(const std::vector<std::size_t>& encoder_dims,
                        const std::vector<std::size_t>& proj_dims,
                        std::uint64_t seed) {
  if (encoder_dims.size() < 2) {
    throw shape_error("init_params: encoder needs at least one layer");
  }
  if (proj_dims.size() != 3) {
    throw shape_error("init_params: projection head must be exactly one "
                      "hidden layer (three dims)");
  }
  auto enc_specs = specs_from_dims(encoder_dims, false);
  auto proj_specs = specs_from_dims(proj_dims, true);
  check_chain(enc_specs, "encoder");
  check_chain(proj_specs, "projection");
  if (proj_specs.front().in_dim != enc_specs.back().out_dim) {
    throw shape_error("init_params: projection in_dim " +
                      std::to_string(proj_specs.front().in_dim) +
                      " does not chain from encoder out_dim " +
                      std::to_string(enc_specs.back().out_dim));
  }
  Rng rng(derive_seed(seed, 0));
  ModelParams params;
  params.encoder = init_stack(enc_specs, rng);
  params.projection = init_stack(proj_specs, rng);
  return params;
}

ClassifierHead init_classifier(std::size_t n_classes, std::size_t d_repr) {
  ClassifierHead head;
  head.w = Matrix(n_classes, d_repr);
  head.b.assign(n_classes, 0.0);
  head.gw = Matrix(n_classes, d_repr);
  head.gb.assign(n_classes, 0.0);
  head.version = 1;
  return head;
}

Matrix stack_forward(const ParamStack& stack, const Matrix& x,
                     ForwardCache& cache) {
  if (x.cols != stack.in_dim()) {
    throw shape_error("forward: input " + x.shape_str() + " vs in_dim " +
                      std::to_string(stack.in_dim()));
  }
  cache.acts.clear();
  cache.acts.push_back(x);
  for (const auto& layer : stack.layers) {
    Matrix a = matmul_nt(cache.acts.back(), layer.w);
    for (std::size_t i = 0; i < a.rows; ++i) {
      double* ai = a.row(i);
      for (std::size_t j = 0; j < a.cols; ++j) ai[j] += layer.b[j];
    }
    if (layer.spec.act == Activation::relu) {
      // std::max(v, 0.0) keeps NaN (first argument wins on unordered), so a
      // poisoned activation reaches the loss and trips the divergence check
      // instead of being flushed to zero here.
      for (double& v : a.data) v = std::max(v, 0.0);
    }
    cache.acts.push_back(std::move(a));
  }
  cache.version = stack.version;
  cache.valid = true;
  return cache.acts.back();
}

Matrix stack_backward(ParamStack& stack, const ForwardCache& cache,
                      const Matrix& d_out) {
  if (!cache.valid || cache.acts.size() != stack.layers.size() + 1) {
    throw state_error("backward: missing forward cache");
  }
  if (cache.version != stack.version) {
    throw state_error("backward: cache is stale, parameters changed since "
                      "forward");
  }
  if (!same_shape(d_out, cache.acts.back())) {
    throw shape_error("backward: upstream gradient " + d_out.shape_str() +
                      " vs output " + cache.acts.back().shape_str());
  }
  Matrix grad = d_out;
  for (std::size_t l = stack.layers.size(); l-- > 0;) {
    auto& layer = stack.layers[l];
    const Matrix& out = cache.acts[l + 1];
    if (layer.spec.act == Activation::relu) {
      for (std::size_t k = 0; k < grad.size(); ++k) {
        if (out.data[k] <= 0.0) grad.data[k] = 0.0;
      }
    }
    const Matrix& in = cache.acts[l];
    Matrix gw = matmul_tn(grad, in);
    for (std::size_t k = 0; k < gw.size(); ++k) layer.gw.data[k] += gw.data[k];
    for (std::size_t i = 0; i < grad.rows; ++i) {
      const double* gi = grad.row(i);
      for (std::size_t j = 0; j < grad.cols; ++j) layer.gb[j] += gi[j];
    }
    grad = matmul(grad, layer.w);
  }
  return grad;
}

Matrix encode(const ModelParams& params, const Matrix& x,
              ForwardCache& cache) {
  return stack_forward(params.encoder, x, cache);
}

Matrix project(const ModelParams& params, const Matrix& h,
               ForwardCache& cache) {
  return stack_forward(params.projection, h, cache);
}

Matrix classifier_forward(const ClassifierHead& head, const Matrix& h) {
  if (h.cols != head.w.cols) {
    throw shape_error("classifier: input " + h.shape_str() + " vs weights " +
                      head.w.shape_str());
  }
  Matrix logits = matmul_nt(h, head.w);
  for (std::size_t i = 0; i < logits.rows; ++i) {
    double* li = logits.row(i);
    for (std::size_t j = 0; j < logits.cols; ++j) li[j] += head.b[j];
  }
  return logits;
}

Matrix classifier_backward(ClassifierHead& head, const Matrix& h,
                           const Matrix& d_logits) {
  Matrix gw = matmul_tn(d_logits, h);
  for (std::size_t k = 0; k < gw.size(); ++k) head.gw.data[k] += gw.data[k];
  for (std::size_t i = 0; i < d_logits.rows; ++i) {
    const double* gi = d_logits.row(i);
    for (std::size_t j = 0; j < d_logits.cols; ++j) head.gb[j] += gi[j];
  }
  return matmul(d_logits, head.w);
}

const Matrix* Checkpoint::find(const std::string& name) const {
  for (const auto& [n, m] : params) {
    if (n == name) return &m;
  }
  return nullptr;
}

namespace {

Matrix bias_as_matrix(const std::vector<double>& b) {
  Matrix m(1, b.size());
  m.data = b;
  return m;
}

void append_stack(Checkpoint& ck, const ParamStack& stack,
                  const std::string& prefix) {
  for (std::size_t l = 0; l < stack.layers.size(); ++l) {
    const auto& layer = stack.layers[l];
    ck.params.emplace_back(prefix + "." + std::to_string(l) + ".w", layer.w);
    ck.params.emplace_back(prefix + "." + std::to_string(l) + ".b",
                           bias_as_matrix(layer.b));
  }
}

ParamStack stack_from_checkpoint(const Checkpoint& ck,
                                 const std::string& prefix,
                                 bool linear_last) {
  ParamStack stack;
  for (std::size_t l = 0;; ++l) {
    const Matrix* w = ck.find(prefix + "." + std::to_string(l) + ".w");
    const Matrix* b = ck.find(prefix + "." + std::to_string(l) + ".b");
    if (!w) break;
    if (!b || b->size() != w->rows) {
      throw data_error("checkpoint: bias missing or mis-sized for " + prefix +
                       "." + std::to_string(l));
    }
    Layer layer;
    layer.spec = {w->cols, w->rows, Activation::relu};
    layer.w = *w;
    layer.b = b->data;
    layer.gw = Matrix(w->rows, w->cols);
    layer.gb.assign(w->rows, 0.0);
    stack.layers.push_back(std::move(layer));
  }
  if (stack.layers.empty()) {
    throw data_error("checkpoint: no " + prefix + " layers found");
  }
  if (linear_last) stack.layers.back().spec.act = Activation::identity;
  stack.version = 1;
  return stack;
}

}  // namespace

Checkpoint checkpoint_from_model(const ModelParams& params,
                                 const ClassifierHead* head,
                                 std::uint64_t global_step,
                                 std::uint64_t epoch, std::uint64_t rng_seed,
                                 std::uint64_t rng_counter) {
  Checkpoint ck;
  ck.global_step = global_step;
  ck.epoch = epoch;
  ck.rng_seed = rng_seed;
  ck.rng_counter = rng_counter;
  append_stack(ck, params.encoder, "encoder");
  append_stack(ck, params.projection, "projection");
  if (head) {
    ck.params.emplace_back("classifier.w", head->w);
    ck.params.emplace_back("classifier.b", bias_as_matrix(head->b));
  }
  return ck;
}

ModelParams model_from_checkpoint(const Checkpoint& ck) {
  ModelParams params;
  params.encoder = stack_from_checkpoint(ck, "encoder", false);
  params.projection = stack_from_checkpoint(ck, "projection", true);
  if (params.projection.in_dim() != params.encoder.out_dim()) {
    throw data_error("checkpoint: projection does not chain from encoder");
  }
  return params;
}

bool checkpoint_has_classifier(const Checkpoint& ck) {
  return ck.find("classifier.w") != nullptr;
}

ClassifierHead classifier_from_checkpoint(const Checkpoint& ck) {
  const Matrix* w = ck.find("classifier.w");
  const Matrix* b = ck.find("classifier.b");
  if (!w || !b || b->size() != w->rows) {
    throw data_error("checkpoint: classifier tensors missing or mis-sized");
  }
  ClassifierHead head;
  head.w = *w;
  head.b = b->data;
  head.gw = Matrix(w->rows, w->cols);
  head.gb.assign(w->rows, 0.0);
  head.version = 1;
  return head;
}

void save_checkpoint(const Checkpoint& ck, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("checkpoint: cannot write " + path);
  out.write("SNCK", 4);
  write_le<std::uint32_t>(out, 1);
  write_le<std::uint64_t>(out, ck.global_step);
  write_le<std::uint64_t>(out, ck.epoch);
  write_le<std::uint64_t>(out, ck.rng_seed);
  write_le<std::uint64_t>(out, ck.rng_counter);
  for (const auto& [name, m] : ck.params) {
    write_le<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    write_le<std::uint64_t>(out, m.rows);
    write_le<std::uint64_t>(out, m.cols);
    for (double v : m.data) write_le<double>(out, v);
  }
  if (!out) throw io_error("checkpoint: write failed for " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("checkpoint: cannot open " + path);
  char magic[4];
  in.read(magic, 4);
  if (in.gcount() != 4 || std::memcmp(magic, "SNCK", 4) != 0) {
    throw data_error("checkpoint: bad magic in " + path);
  }
  std::uint32_t version = read_le_or_throw<std::uint32_t>(in, "version");
  if (version != 1) {
    throw data_error("checkpoint: unsupported version " +
                     std::to_string(version));
  }
  Checkpoint ck;
  ck.global_step = read_le_or_throw<std::uint64_t>(in, "global_step");
  ck.epoch = read_le_or_throw<std::uint64_t>(in, "epoch");
  ck.rng_seed = read_le_or_throw<std::uint64_t>(in, "rng_seed");
  ck.rng_counter = read_le_or_throw<std::uint64_t>(in, "rng_counter");
  while (true) {
    std::uint32_t name_len;
    if (!read_le(in, name_len)) break;  // clean end of file
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    if (in.gcount() != static_cast<std::streamsize>(name_len)) {
      throw io_error("checkpoint: truncated parameter name");
    }
    std::uint64_t rows = read_le_or_throw<std::uint64_t>(in, "rows");
    std::uint64_t cols = read_le_or_throw<std::uint64_t>(in, "cols");
    Matrix m(rows, cols);
    for (std::size_t k = 0; k < m.size(); ++k) {
      m.data[k] = read_le_or_throw<double>(in, "payload");
    }
    ck.params.emplace_back(std::move(name), std::move(m));
  }
  return ck;
}

}  // namespace suncet
