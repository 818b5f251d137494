#include "suncet/report.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "suncet/errors.hpp"

namespace suncet {
namespace {

u128 parse_u128(const std::string& s, const std::string& ctx) {
  if (s.empty()) throw data_error(ctx + ": empty counter field");
  u128 v = 0;
  for (char ch : s) {
    if (ch < '0' || ch > '9') {
      throw data_error(ctx + ": bad counter '" + s + "'");
    }
    v = v * 10 + static_cast<unsigned>(ch - '0');
  }
  return v;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  // A trailing empty field is dropped by getline; restore it.
  if (!line.empty() && line.back() == ',') cells.push_back("");
  return cells;
}

std::string fmt6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

// Earliest point with eval_top1 >= target, or null.
const MetricsPoint* first_crossing(const MetricsSeries& s, double target) {
  for (const auto& p : s.points) {
    if (p.eval_top1 && *p.eval_top1 >= target) return &p;
  }
  return nullptr;
}

}  // namespace

MetricsSeries load_metrics(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("report: cannot open metrics file " + path);
  std::string line;
  if (!std::getline(in, line)) {
    throw data_error("report: empty metrics file " + path);
  }
  const std::string expected =
      "epoch,step,loss_inst,loss_suncet,lr,macs_cum,flops_cum,eval_top1,"
      "wallclock_s";
  if (line != expected) {
    throw data_error("report: unexpected metrics header in " + path);
  }
  MetricsSeries series;
  series.path = path;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::string ctx = path + ":" + std::to_string(lineno);
    auto cells = split_csv_line(line);
    if (cells.size() != 9) {
      throw data_error(ctx + ": expected 9 fields, got " +
                       std::to_string(cells.size()));
    }
    MetricsPoint p;
    try {
      p.epoch = std::stoull(cells[0]);
      p.step = std::stoull(cells[1]);
      p.loss_inst = std::stod(cells[2]);
      if (!cells[3].empty()) p.loss_suncet = std::stod(cells[3]);
      p.lr = std::stod(cells[4]);
      if (!cells[7].empty()) p.eval_top1 = std::stod(cells[7]);
    } catch (const std::exception&) {
      throw data_error(ctx + ": malformed numeric field");
    }
    p.macs_cum = parse_u128(cells[5], ctx);
    p.flops_cum = parse_u128(cells[6], ctx);
    series.points.push_back(p);
  }
  return series;
}

SavingsRow compute_savings(const MetricsSeries& baseline,
                           const MetricsSeries& comparison) {
  SavingsRow row;
  row.baseline = baseline.path;
  row.comparison = comparison.path;
  double best = -1.0;
  for (const auto& p : baseline.points) {
    if (p.eval_top1 && *p.eval_top1 > best) best = *p.eval_top1;
  }
  if (best < 0.0) {
    throw data_error("report: baseline " + baseline.path +
                     " has no eval_top1 values");
  }
  row.target_top1 = best;
  const MetricsPoint* base_hit = first_crossing(baseline, best);
  // The baseline always reaches its own best.
  row.baseline_flops = base_hit->flops_cum;
  row.baseline_updates = base_hit->step + 1;
  if (const MetricsPoint* hit = first_crossing(comparison, best)) {
    row.reached = true;
    row.comparison_flops = hit->flops_cum;
    row.comparison_updates = hit->step + 1;
  }
  return row;
}

std::vector<SavingsRow> emit_report(const std::vector<std::string>& baselines,
                                    const std::vector<std::string>& comparisons,
                                    const std::string& out_dir) {
  if (baselines.empty() || comparisons.empty()) {
    throw config_error(
        "report: need at least one baseline and one comparison metrics file");
  }
  if (baselines.size() != comparisons.size() && baselines.size() != 1 &&
      comparisons.size() != 1) {
    throw config_error("report: file counts must match, or one side must be "
                       "a single file");
  }
  std::filesystem::create_directories(out_dir);

  std::vector<MetricsSeries> base_series;
  std::vector<MetricsSeries> comp_series;
  for (const auto& p : baselines) base_series.push_back(load_metrics(p));
  for (const auto& p : comparisons) comp_series.push_back(load_metrics(p));

  {
    std::ofstream curve(out_dir + "/curve.csv");
    if (!curve) throw io_error("report: cannot write curve.csv");
    curve << "series,role,flops_cum,eval_top1\n";
    auto dump = [&curve](const MetricsSeries& s, const char* role) {
      for (const auto& p : s.points) {
        if (!p.eval_top1) continue;
        curve << s.path << "," << role << "," << u128_to_string(p.flops_cum)
              << "," << fmt6(*p.eval_top1) << "\n";
      }
    };
    for (const auto& s : base_series) dump(s, "baseline");
    for (const auto& s : comp_series) dump(s, "comparison");
    if (!curve) throw io_error("report: write failed for curve.csv");
  }

  std::size_t pairs = std::max(base_series.size(), comp_series.size());
  std::vector<SavingsRow> rows;
  for (std::size_t i = 0; i < pairs; ++i) {
    const auto& b = base_series[base_series.size() == 1 ? 0 : i];
    const auto& c = comp_series[comp_series.size() == 1 ? 0 : i];
    rows.push_back(compute_savings(b, c));
  }

  std::ofstream sav(out_dir + "/savings.csv");
  if (!sav) throw io_error("report: cannot write savings.csv");
  sav << "baseline,comparison,target_top1,baseline_flops,baseline_updates,"
         "comparison_flops,comparison_updates,flops_saved,updates_saved,"
         "status\n";
  for (const auto& r : rows) {
    sav << r.baseline << "," << r.comparison << "," << fmt6(r.target_top1)
        << "," << u128_to_string(r.baseline_flops) << ","
        << r.baseline_updates << ",";
    if (r.reached) {
      sav << u128_to_string(r.comparison_flops) << ","
          << r.comparison_updates << ",";
      if (r.baseline_flops >= r.comparison_flops) {
        sav << u128_to_string(r.baseline_flops - r.comparison_flops);
      } else {
        sav << "-" << u128_to_string(r.comparison_flops - r.baseline_flops);
      }
      sav << ",";
      if (r.baseline_updates >= r.comparison_updates) {
        sav << (r.baseline_updates - r.comparison_updates);
      } else {
        sav << "-" << (r.comparison_updates - r.baseline_updates);
      }
      sav << ",reached\n";
    } else {
      sav << ",,,,not_reached\n";
    }
  }
  if (!sav) throw io_error("report: write failed for savings.csv");
  return rows;
}

}  // namespace suncet
