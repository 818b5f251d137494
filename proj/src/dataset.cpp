#include "suncet/dataset.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

#include "suncet/errors.hpp"

namespace suncet {
namespace {

// Little-endian scalar I/O. The build targets LE hosts; memcpy through a
// byte buffer keeps it alias-safe.
template <typename T>
void write_le(std::ostream& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.write(buf, sizeof(T));
}

template <typename T>
T read_le(std::istream& in, const char* what) {
  char buf[sizeof(T)];
  in.read(buf, sizeof(T));
  if (in.gcount() != static_cast<std::streamsize>(sizeof(T))) {
    throw data_error(std::string("dataset: truncated while reading ") + what);
  }
  T v;
  std::memcpy(&v, buf, sizeof(T));
  return v;
}

Dataset load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("dataset: cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw data_error("dataset: empty csv " + path);
  std::size_t d = 0;
  {
    std::stringstream hs(line);
    std::string col;
    std::vector<std::string> cols;
    while (std::getline(hs, col, ',')) cols.push_back(col);
    if (cols.size() < 2 || cols.back() != "label") {
      throw data_error("dataset: csv header must be f0,...,label in " + path);
    }
    d = cols.size() - 1;
    for (std::size_t j = 0; j < d; ++j) {
      if (cols[j] != "f" + std::to_string(j)) {
        throw data_error("dataset: csv header column " + std::to_string(j) +
                         " is '" + cols[j] + "', expected f" +
                         std::to_string(j));
      }
    }
  }
  std::vector<double> feats;
  std::vector<int> labels;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::stringstream ls(line);
    std::string cell;
    std::size_t got = 0;
    while (std::getline(ls, cell, ',')) {
      double v;
      try {
        v = std::stod(cell);
      } catch (const std::exception&) {
        throw data_error("dataset: bad number '" + cell + "' at line " +
                         std::to_string(lineno) + " of " + path);
      }
      if (got < d) {
        feats.push_back(v);
      } else {
        labels.push_back(static_cast<int>(v));
      }
      ++got;
    }
    if (got != d + 1) {
      throw data_error("dataset: line " + std::to_string(lineno) + " has " +
                       std::to_string(got) + " cells, expected " +
                       std::to_string(d + 1));
    }
  }
  Dataset ds;
  ds.features = Matrix(labels.size(), d);
  ds.features.data = std::move(feats);
  ds.labels = std::move(labels);
  int max_label = -1;
  for (int y : ds.labels) max_label = std::max(max_label, y);
  ds.n_classes = max_label + 1;
  ds.validate();
  return ds;
}

}  // namespace

void Dataset::validate() const {
  if (features.rows < 1 || features.cols < 1) {
    throw data_error("dataset: need n >= 1 and d_in >= 1, got " +
                     features.shape_str());
  }
  if (labels.size() != features.rows) {
    throw data_error("dataset: " + std::to_string(labels.size()) +
                     " labels for " + std::to_string(features.rows) + " rows");
  }
  if (n_classes < 1) throw data_error("dataset: n_classes must be >= 1");
  std::vector<char> seen(static_cast<std::size_t>(n_classes), 0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    int y = labels[i];
    if (y < 0 || y >= n_classes) {
      throw data_error("dataset: label " + std::to_string(y) + " at row " +
                       std::to_string(i) + " outside [0, " +
                       std::to_string(n_classes) + ")");
    }
    seen[static_cast<std::size_t>(y)] = 1;
  }
  for (int c = 0; c < n_classes; ++c) {
    if (!seen[static_cast<std::size_t>(c)]) {
      throw data_error("dataset: class " + std::to_string(c) +
                       " has no examples");
    }
  }
}

Dataset load_dataset(const std::string& path) {
  if (path.size() >= 4 && path.substr(path.size() - 4) == ".csv") {
    return load_csv(path);
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("dataset: cannot open " + path);
  char magic[4];
  in.read(magic, 4);
  if (in.gcount() != 4 || std::memcmp(magic, "SNDS", 4) != 0) {
    throw data_error("dataset: bad magic in " + path);
  }
  std::uint32_t version = read_le<std::uint32_t>(in, "version");
  if (version != 1) {
    throw data_error("dataset: unsupported version " +
                     std::to_string(version));
  }
  std::uint64_t n = read_le<std::uint64_t>(in, "n");
  std::uint64_t d = read_le<std::uint64_t>(in, "d_in");
  std::uint32_t n_classes = read_le<std::uint32_t>(in, "n_classes");
  Dataset ds;
  ds.features = Matrix(n, d);
  for (std::size_t k = 0; k < ds.features.size(); ++k) {
    ds.features.data[k] =
        static_cast<double>(read_le<float>(in, "features"));
  }
  ds.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    ds.labels[i] = read_le<std::int32_t>(in, "labels");
  }
  ds.n_classes = static_cast<int>(n_classes);
  ds.validate();
  return ds;
}

namespace {

// Text twin of the binary format, selected by file extension. %.17g keeps
// doubles exact through the round-trip.
void save_csv(const Dataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw io_error("dataset: cannot write " + path);
  for (std::size_t j = 0; j < ds.d_in(); ++j) out << "f" << j << ",";
  out << "label\n";
  char buf[32];
  for (std::size_t i = 0; i < ds.n(); ++i) {
    const double* row = ds.features.row(i);
    for (std::size_t j = 0; j < ds.d_in(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", row[j]);
      out << buf << ",";
    }
    out << ds.labels[i] << "\n";
  }
  if (!out) throw io_error("dataset: write failed for " + path);
}

}  // namespace

void save_dataset(const Dataset& ds, const std::string& path) {
  ds.validate();
  if (path.size() >= 4 && path.substr(path.size() - 4) == ".csv") {
    return save_csv(ds, path);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("dataset: cannot write " + path);
  out.write("SNDS", 4);
  write_le<std::uint32_t>(out, 1);
  write_le<std::uint64_t>(out, ds.n());
  write_le<std::uint64_t>(out, ds.d_in());
  write_le<std::uint32_t>(out, static_cast<std::uint32_t>(ds.n_classes));
  for (double v : ds.features.data) {
    write_le<float>(out, static_cast<float>(v));
  }
  for (int y : ds.labels) write_le<std::int32_t>(out, y);
  if (!out) throw io_error("dataset: write failed for " + path);
}

std::size_t LabelSplit::labeled_count() const {
  std::size_t c = 0;
  for (char m : mask) c += m ? 1 : 0;
  return c;
}

std::size_t LabelSplit::classes_with_labels() const {
  std::size_t c = 0;
  for (const auto& lst : labeled_by_class) c += lst.empty() ? 0 : 1;
  return c;
}

LabelSplit bernoulli_split(const Dataset& ds, double p, std::uint64_t seed) {
  if (p < 0.0 || p > 1.0) {
    throw data_error("bernoulli_split: p must be in [0, 1]");
  }
  LabelSplit split;
  split.seed = seed;
  split.p = p;
  split.mask.resize(ds.n());
  split.labeled_by_class.resize(static_cast<std::size_t>(ds.n_classes));
  Rng rng(seed);
  for (std::size_t i = 0; i < ds.n(); ++i) {
    bool on = rng.next_bernoulli(p);
    split.mask[i] = on ? 1 : 0;
    if (on) {
      split.labeled_by_class[static_cast<std::size_t>(ds.labels[i])]
          .push_back(i);
    }
  }
  // Index order above is already ascending per class.
  return split;
}

}  // namespace suncet
