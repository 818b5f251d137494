#pragma once

#include <cstdint>

#include "suncet/dataset.hpp"

namespace suncet {

// Isotropic Gaussian blobs: class centers drawn once from
// N(0, center_scale^2) per coordinate, rows assigned round-robin to classes
// and offset by N(0, cluster_std^2). Train and test share centers but use
// disjoint generator streams.
struct SynthSpec {
  std::size_t n_train = 2000;
  std::size_t n_test = 1000;
  std::size_t d = 32;
  int classes = 10;
  double center_scale = 1.0;
  // Heavy overlap on purpose: the benchmark should still be climbing after 60
  // epochs so compute comparisons measure speed, not a saturated ceiling.
  double cluster_std = 2.5;
};

struct SynthPair {
  Dataset train;
  Dataset test;
};

SynthPair make_blobs(const SynthSpec& spec, std::uint64_t seed);

}  // namespace suncet
