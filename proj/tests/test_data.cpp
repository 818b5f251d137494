#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include "doctest.h"
#include "suncet/dataset.hpp"
#include "suncet/errors.hpp"
#include "suncet/sampler.hpp"
#include "suncet/synth.hpp"

using namespace suncet;

namespace {

Dataset tiny_dataset(std::size_t n, std::size_t d, int classes) {
  Dataset ds;
  ds.features = Matrix(n, d);
  ds.labels.resize(n);
  ds.n_classes = classes;
  Rng rng(99);
  for (double& v : ds.features.data) v = rng.next_normal();
  for (std::size_t i = 0; i < n; ++i) ds.labels[i] = static_cast<int>(i % classes);
  return ds;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TempDir {
  std::string path;
  TempDir() {
    char buf[] = "/tmp/suncet_test_XXXXXX";
    REQUIRE(mkdtemp(buf) != nullptr);
    path = buf;
  }
};

}  // namespace

TEST_CASE("binary dataset round-trips byte for byte") {
  TempDir tmp;
  Dataset ds = tiny_dataset(17, 5, 3);
  std::string p1 = tmp.path + "/a.snds";
  std::string p2 = tmp.path + "/b.snds";
  save_dataset(ds, p1);
  Dataset back = load_dataset(p1);
  CHECK(back.n() == 17);
  CHECK(back.d_in() == 5);
  CHECK(back.n_classes == 3);
  CHECK(back.labels == ds.labels);
  save_dataset(back, p2);
  CHECK(slurp(p1) == slurp(p2));
}

TEST_CASE("binary loader rejects junk") {
  TempDir tmp;
  std::string p = tmp.path + "/bad.snds";
  {
    std::ofstream out(p, std::ios::binary);
    out << "NOPE and some trailing bytes";
  }
  CHECK_THROWS_AS(load_dataset(p), data_error);

  // Truncated in the middle of the feature payload.
  Dataset ds = tiny_dataset(8, 4, 2);
  std::string full = tmp.path + "/full.snds";
  save_dataset(ds, full);
  std::string whole = slurp(full);
  std::string cut = tmp.path + "/cut.snds";
  {
    std::ofstream out(cut, std::ios::binary);
    out.write(whole.data(), static_cast<std::streamsize>(whole.size() / 2));
  }
  CHECK_THROWS_AS(load_dataset(cut), data_error);

  CHECK_THROWS_AS(load_dataset(tmp.path + "/missing.snds"), io_error);
}

TEST_CASE("single-row single-column dataset is legal") {
  TempDir tmp;
  Dataset ds;
  ds.features = Matrix(1, 1, 0.25);
  ds.labels = {0};
  ds.n_classes = 1;
  ds.validate();
  std::string p = tmp.path + "/one.snds";
  save_dataset(ds, p);
  Dataset back = load_dataset(p);
  CHECK(back.n() == 1);
  CHECK(back.features.at(0, 0) == doctest::Approx(0.25));
}

TEST_CASE("csv path round-trips through text") {
  TempDir tmp;
  Dataset ds = tiny_dataset(9, 3, 3);
  std::string p = tmp.path + "/d.csv";
  save_dataset(ds, p);
  std::string head;
  {
    std::ifstream in(p);
    std::getline(in, head);
  }
  CHECK(head == "f0,f1,f2,label");
  Dataset back = load_dataset(p);
  CHECK(back.n() == 9);
  CHECK(back.labels == ds.labels);
  for (std::size_t k = 0; k < ds.features.size(); ++k)
    CHECK(back.features.data[k] == doctest::Approx(ds.features.data[k]).epsilon(1e-12));
}

TEST_CASE("csv loader rejects malformed rows") {
  TempDir tmp;
  std::string p = tmp.path + "/bad.csv";
  {
    std::ofstream out(p);
    out << "f0,f1,label\n1.0,2.0\n";
  }
  CHECK_THROWS_AS(load_dataset(p), data_error);
}

TEST_CASE("dataset validation catches label problems") {
  Dataset ds = tiny_dataset(6, 2, 3);
  ds.labels[0] = 7;
  CHECK_THROWS_AS(ds.validate(), data_error);
  ds = tiny_dataset(6, 2, 3);
  ds.labels[0] = -1;
  CHECK_THROWS_AS(ds.validate(), data_error);
  // class 2 never appears
  ds = tiny_dataset(4, 2, 3);
  ds.labels = {0, 1, 0, 1};
  CHECK_THROWS_AS(ds.validate(), data_error);
  Dataset empty;
  empty.features = Matrix(0, 0);
  CHECK_THROWS_AS(empty.validate(), data_error);
}

TEST_CASE("bernoulli split extremes and bookkeeping") {
  Dataset ds = tiny_dataset(40, 3, 4);
  LabelSplit none = bernoulli_split(ds, 0.0, 5);
  CHECK(none.labeled_count() == 0);
  CHECK(none.classes_with_labels() == 0);

  LabelSplit all = bernoulli_split(ds, 1.0, 5);
  CHECK(all.labeled_count() == 40);
  CHECK(all.classes_with_labels() == 4);

  LabelSplit half = bernoulli_split(ds, 0.5, 5);
  std::size_t recount = 0;
  for (int c = 0; c < 4; ++c) {
    const auto& idx = half.labeled_by_class[static_cast<std::size_t>(c)];
    recount += idx.size();
    for (std::size_t k = 0; k < idx.size(); ++k) {
      CHECK(half.mask[idx[k]] == 1);
      CHECK(ds.labels[idx[k]] == c);
      if (k > 0) CHECK(idx[k] > idx[k - 1]);
    }
  }
  CHECK(recount == half.labeled_count());

  // Pure in (seed, p, n): same inputs, same mask.
  LabelSplit again = bernoulli_split(ds, 0.5, 5);
  CHECK(again.mask == half.mask);
  LabelSplit other = bernoulli_split(ds, 0.5, 6);
  CHECK(other.mask != half.mask);
}

TEST_CASE("bernoulli split labeled count is pinned for a fixed seed") {
  Dataset ds = tiny_dataset(10000, 1, 2);
  LabelSplit split = bernoulli_split(ds, 0.1, 7);
  // Frozen from the first run of this configuration; a change here means the
  // draw order changed and every seeded run in the project moved with it.
  CHECK(split.labeled_count() == 958);
}

TEST_CASE("augment with all-zero config is the identity") {
  AugmentConfig cfg;
  Rng rng(3);
  std::vector<double> x = {1.5, -2.0, 0.0, 7.25};
  auto out = augment(x.data(), x.size(), cfg, rng);
  CHECK(out == x);
  // exactly 1 + 3d draws consumed: one scale uniform, then per coordinate one
  // Box-Muller normal (two raws) and one mask uniform
  CHECK(rng.counter() == 1 + 3 * x.size());
}

TEST_CASE("augment with mask_prob one zeroes everything") {
  AugmentConfig cfg;
  cfg.mask_prob = 1.0;
  Rng rng(3);
  std::vector<double> x = {1.5, -2.0, 3.0};
  auto out = augment(x.data(), x.size(), cfg, rng);
  for (double v : out) CHECK(v == 0.0);
}

TEST_CASE("augment draw count is config independent") {
  std::vector<double> x = {1.0, 2.0, 3.0, 4.0, 5.0};
  AugmentConfig noisy{0.7, 0.4, 0.3};
  AugmentConfig plain;
  Rng a(12), b(12);
  augment(x.data(), x.size(), noisy, a);
  augment(x.data(), x.size(), plain, b);
  CHECK(a.counter() == b.counter());
}

TEST_CASE("augment output is pinned for a fixed seed") {
  AugmentConfig cfg{0.1, 0.3, 0.2};
  Rng rng(2024);
  std::vector<double> x = {1.0, -1.0, 0.5};
  auto out = augment(x.data(), x.size(), cfg, rng);
  // Frozen from the first run; guards the scale -> noise -> mask order and
  // the per-coordinate draw layout. Coordinate 1 happens to be masked.
  CHECK(out[0] == doctest::Approx(1.0600677432278554).epsilon(1e-15));
  CHECK(out[1] == 0.0);
  CHECK(out[2] == doctest::Approx(0.61963044216112884).epsilon(1e-15));
  CHECK(rng.counter() == 10);
}

TEST_CASE("unsupervised sampler emits paired views covering each epoch") {
  Dataset ds = tiny_dataset(10, 4, 2);
  AugmentConfig cfg{0.1, 0.1, 0.0};
  UnsupervisedSampler sampler(ds, 4, cfg, Rng(8));
  CHECK(sampler.batches_per_epoch() == 3);

  std::set<std::size_t> seen;
  for (std::size_t b = 0; b < sampler.batches_per_epoch(); ++b) {
    UnsupervisedBatch batch = sampler.next();
    CHECK(batch.views.rows == 2 * batch.indices.size());
    for (std::size_t t = 0; t < batch.indices.size(); ++t) {
      CHECK(batch.partner[2 * t] == 2 * t + 1);
      CHECK(batch.partner[2 * t + 1] == 2 * t);
      seen.insert(batch.indices[t]);
    }
  }
  CHECK(seen.size() == 10);

  // Next epoch starts a fresh permutation over all ten again.
  std::set<std::size_t> seen2;
  for (std::size_t b = 0; b < sampler.batches_per_epoch(); ++b) {
    UnsupervisedBatch batch = sampler.next();
    for (std::size_t idx : batch.indices) seen2.insert(idx);
  }
  CHECK(seen2.size() == 10);
}

TEST_CASE("unsupervised sampler folds a lone trailing index") {
  Dataset ds = tiny_dataset(5, 3, 1);
  UnsupervisedSampler sampler(ds, 2, AugmentConfig{}, Rng(4));
  CHECK(sampler.batches_per_epoch() == 2);
  UnsupervisedBatch b1 = sampler.next();
  UnsupervisedBatch b2 = sampler.next();
  CHECK(b1.indices.size() == 2);
  CHECK(b2.indices.size() == 3);
  std::set<std::size_t> seen(b1.indices.begin(), b1.indices.end());
  seen.insert(b2.indices.begin(), b2.indices.end());
  CHECK(seen.size() == 5);
}

TEST_CASE("unsupervised sampler identity augmentation duplicates the row") {
  Dataset ds = tiny_dataset(3, 4, 1);
  UnsupervisedSampler sampler(ds, 3, AugmentConfig{}, Rng(4));
  UnsupervisedBatch batch = sampler.next();
  for (std::size_t t = 0; t < batch.indices.size(); ++t) {
    for (std::size_t j = 0; j < ds.d_in(); ++j) {
      double orig = ds.features.at(batch.indices[t], j);
      CHECK(batch.views.at(2 * t, j) == orig);
      CHECK(batch.views.at(2 * t + 1, j) == orig);
    }
  }
}

TEST_CASE("unsupervised sampler validates batch size") {
  Dataset ds = tiny_dataset(4, 2, 1);
  CHECK_THROWS_AS(UnsupervisedSampler(ds, 0, AugmentConfig{}, Rng(1)),
                  data_error);
  CHECK_THROWS_AS(UnsupervisedSampler(ds, 5, AugmentConfig{}, Rng(1)),
                  data_error);
}

TEST_CASE("supervised sampler draws balanced batches") {
  Dataset ds = tiny_dataset(100, 4, 10);
  LabelSplit split = bernoulli_split(ds, 1.0, 1);
  SupervisedBatchSpec spec{4, 3};
  SupervisedSampler sampler(ds, split, spec, AugmentConfig{}, Rng(5));
  SupervisedBatch batch = sampler.next();
  CHECK(batch.rows.rows == 12);
  CHECK(batch.labels.size() == 12);

  std::set<int> classes(batch.labels.begin(), batch.labels.end());
  CHECK(classes.size() == 4);
  for (int c : classes) {
    std::size_t count = 0;
    for (std::size_t i = 0; i < batch.labels.size(); ++i) {
      if (batch.labels[i] != c) continue;
      ++count;
      // identity augmentation: row must literally be a labeled row of class c
      bool found = false;
      for (std::size_t idx : split.labeled_by_class[static_cast<std::size_t>(c)]) {
        bool same = true;
        for (std::size_t j = 0; j < ds.d_in(); ++j)
          if (batch.rows.at(i, j) != ds.features.at(idx, j)) { same = false; break; }
        if (same) { found = true; break; }
      }
      CHECK(found);
    }
    CHECK(count == 3);
  }
}

TEST_CASE("supervised sampler resorts to replacement for thin classes") {
  // one labeled row per class, but three samples per class requested
  Dataset ds = tiny_dataset(4, 3, 4);
  LabelSplit split = bernoulli_split(ds, 1.0, 1);
  SupervisedBatchSpec spec{2, 3};
  SupervisedSampler sampler(ds, split, spec, AugmentConfig{}, Rng(5));
  SupervisedBatch batch = sampler.next();
  CHECK(batch.rows.rows == 6);
  for (std::size_t i = 0; i < batch.labels.size(); ++i) {
    std::size_t src = split.labeled_by_class[static_cast<std::size_t>(batch.labels[i])][0];
    for (std::size_t j = 0; j < ds.d_in(); ++j)
      CHECK(batch.rows.at(i, j) == ds.features.at(src, j));
  }
}

TEST_CASE("supervised sampler is reproducible from its generator") {
  Dataset ds = tiny_dataset(60, 5, 6);
  LabelSplit split = bernoulli_split(ds, 0.8, 3);
  SupervisedBatchSpec spec{3, 2};
  AugmentConfig cfg{0.2, 0.1, 0.05};
  SupervisedSampler s1(ds, split, spec, cfg, Rng(77));
  SupervisedSampler s2(ds, split, spec, cfg, Rng(77));
  for (int k = 0; k < 5; ++k) {
    SupervisedBatch a = s1.next();
    SupervisedBatch b = s2.next();
    CHECK(a.labels == b.labels);
    CHECK(a.rows.data == b.rows.data);
  }
}

TEST_CASE("supervised sampler rejects unusable supervision") {
  Dataset ds = tiny_dataset(20, 3, 4);
  LabelSplit empty = bernoulli_split(ds, 0.0, 1);
  CHECK_THROWS_AS(
      SupervisedSampler(ds, empty, SupervisedBatchSpec{2, 2}, AugmentConfig{}, Rng(1)),
      data_error);

  LabelSplit full = bernoulli_split(ds, 1.0, 1);
  CHECK_THROWS_AS(
      SupervisedSampler(ds, full, SupervisedBatchSpec{5, 2}, AugmentConfig{}, Rng(1)),
      data_error);
  CHECK_THROWS_AS(
      SupervisedSampler(ds, full, SupervisedBatchSpec{2, 1}, AugmentConfig{}, Rng(1)),
      data_error);
}

TEST_CASE("synthetic blobs are deterministic and label-complete") {
  SynthSpec spec;
  spec.n_train = 50;
  spec.n_test = 20;
  spec.d = 6;
  spec.classes = 5;
  SynthPair a = make_blobs(spec, 31);
  SynthPair b = make_blobs(spec, 31);
  CHECK(a.train.features.data == b.train.features.data);
  CHECK(a.test.features.data == b.test.features.data);
  CHECK(a.train.labels == b.train.labels);
  a.train.validate();
  a.test.validate();
  SynthPair c = make_blobs(spec, 32);
  CHECK(a.train.features.data != c.train.features.data);
}
