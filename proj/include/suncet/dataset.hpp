#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "suncet/matrix.hpp"
#include "suncet/rng.hpp"

namespace suncet {

// Feature rows with integer class labels. Features are held as doubles in
// memory; the on-disk format stores 32-bit floats.
struct Dataset {
  Matrix features;          // n x d_in
  std::vector<int> labels;  // class ids in [0, n_classes)
  int n_classes = 0;

  std::size_t n() const { return features.rows; }
  std::size_t d_in() const { return features.cols; }

  // Enforces: n >= 1, d_in >= 1, every label in range, every class id
  // present at least once. Throws data_error otherwise.
  void validate() const;
};

// Binary format (little-endian): magic "SNDS", version u32 = 1, n u64,
// d_in u64, n_classes u32, features as n*d_in f32 row-major, labels as
// n i32. Paths ending in .csv are read as text with header
// f0,...,f{d-1},label instead.
Dataset load_dataset(const std::string& path);
void save_dataset(const Dataset& ds, const std::string& path);

// Which rows expose their labels during training. The mask is a pure
// function of (seed, p, n); per-class index lists are kept sorted ascending.
struct LabelSplit {
  std::vector<char> mask;  // 1 = labeled
  std::uint64_t seed = 0;
  double p = 0.0;
  std::vector<std::vector<std::size_t>> labeled_by_class;

  std::size_t labeled_count() const;
  std::size_t classes_with_labels() const;
};

LabelSplit bernoulli_split(const Dataset& ds, double p, std::uint64_t seed);

}  // namespace suncet
