#include "suncet/synth.hpp"

#include "suncet/errors.hpp"
#include "suncet/matrix.hpp"

namespace suncet {
namespace {

Dataset sample_split(const Matrix& centers, const SynthSpec& spec,
                     std::size_t n, Rng rng) {
  Dataset ds;
  ds.features = Matrix(n, spec.d);
  ds.labels.resize(n);
  ds.n_classes = spec.classes;
  for (std::size_t i = 0; i < n; ++i) {
    int cls = static_cast<int>(i % static_cast<std::size_t>(spec.classes));
    ds.labels[i] = cls;
    const double* c = centers.row(static_cast<std::size_t>(cls));
    double* x = ds.features.row(i);
    for (std::size_t j = 0; j < spec.d; ++j) {
      x[j] = c[j] + spec.cluster_std * rng.next_normal();
    }
  }
  ds.validate();
  return ds;
}

}  // namespace

SynthPair make_blobs(const SynthSpec& spec, std::uint64_t seed) {
  if (spec.classes < 1 || spec.d < 1) {
    throw data_error("make_blobs: need classes >= 1 and d >= 1");
  }
  if (spec.n_train < static_cast<std::size_t>(spec.classes) ||
      spec.n_test < static_cast<std::size_t>(spec.classes)) {
    throw data_error(
        "make_blobs: each split needs at least one row per class");
  }
  Matrix centers(static_cast<std::size_t>(spec.classes), spec.d);
  Rng center_rng(derive_seed(seed, 100));
  for (double& v : centers.data) v = spec.center_scale * center_rng.next_normal();

  SynthPair pair;
  pair.train = sample_split(centers, spec, spec.n_train,
                            Rng(derive_seed(seed, 101)));
  pair.test = sample_split(centers, spec, spec.n_test,
                           Rng(derive_seed(seed, 102)));
  return pair;
}

}  // namespace suncet
