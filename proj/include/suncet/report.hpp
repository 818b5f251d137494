#pragma once

#include <optional>
#include <string>
#include <vector>

#include "suncet/accounting.hpp"

namespace suncet {

struct MetricsPoint {
  std::size_t epoch = 0;
  std::size_t step = 0;
  double loss_inst = 0.0;
  std::optional<double> loss_suncet;
  double lr = 0.0;
  u128 macs_cum = 0;
  u128 flops_cum = 0;
  std::optional<double> eval_top1;
};

struct MetricsSeries {
  std::string path;
  std::vector<MetricsPoint> points;
};

MetricsSeries load_metrics(const std::string& path);

// One baseline/comparison pairing. target_top1 is the baseline's best
// accuracy; each side's cost is taken at its earliest logged row reaching
// that accuracy (first-crossing). A comparison that never reaches the target
// is reported, not an error.
struct SavingsRow {
  std::string baseline;
  std::string comparison;
  double target_top1 = 0.0;
  u128 baseline_flops = 0;
  std::uint64_t baseline_updates = 0;
  bool reached = false;
  u128 comparison_flops = 0;
  std::uint64_t comparison_updates = 0;
};

SavingsRow compute_savings(const MetricsSeries& baseline,
                           const MetricsSeries& comparison);

// Writes curve.csv (accuracy-vs-flops columns for every series) and
// savings.csv (one row per baseline/comparison pair; sides of unequal count
// must have a single file on one side, which is then paired with each file
// on the other). Returns the savings rows in file order.
std::vector<SavingsRow> emit_report(const std::vector<std::string>& baselines,
                                    const std::vector<std::string>& comparisons,
                                    const std::string& out_dir);

}  // namespace suncet
