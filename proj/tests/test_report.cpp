#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "suncet/errors.hpp"
#include "suncet/report.hpp"

using namespace suncet;

namespace {

const char* kHeader =
    "epoch,step,loss_inst,loss_suncet,lr,macs_cum,flops_cum,eval_top1,"
    "wallclock_s\n";

struct TempDir {
  std::string path;
  TempDir() {
    char buf[] = "/tmp/suncet_report_XXXXXX";
    REQUIRE(mkdtemp(buf) != nullptr);
    path = buf;
  }
};

std::string write_metrics(const TempDir& tmp, const std::string& name,
                          const std::string& body) {
  std::string path = tmp.path + "/" + name;
  std::ofstream out(path);
  REQUIRE(out.good());
  out << kHeader << body;
  return path;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("metrics loader round-trips typed rows") {
  TempDir tmp;
  std::string path = write_metrics(
      tmp, "m.csv",
      "0,0,2.5,1.25,0.1,1000,6000,,\n"
      "0,1,2.0,,0.2,2000,12000,0.500000,\n"
      "1,2,1.5,,0.2,3000,18000,0.750000,1.250000\n");
  MetricsSeries s = load_metrics(path);
  REQUIRE(s.points.size() == 3);
  CHECK(s.points[0].epoch == 0);
  CHECK(s.points[0].loss_suncet.has_value());
  CHECK(*s.points[0].loss_suncet == 1.25);
  CHECK_FALSE(s.points[0].eval_top1.has_value());
  CHECK_FALSE(s.points[1].loss_suncet.has_value());
  CHECK(*s.points[1].eval_top1 == 0.5);
  CHECK(s.points[2].macs_cum == 3000);
  CHECK(s.points[2].flops_cum == 18000);
}

TEST_CASE("metrics loader rejects drifted files") {
  TempDir tmp;
  std::string bad_header = tmp.path + "/bad.csv";
  {
    std::ofstream out(bad_header);
    out << "epoch,step,loss\n0,0,1.0\n";
  }
  CHECK_THROWS_AS(load_metrics(bad_header), data_error);

  std::string short_row =
      write_metrics(tmp, "short.csv", "0,0,1.0,,0.1,10,60\n");
  CHECK_THROWS_AS(load_metrics(short_row), data_error);

  std::string bad_num =
      write_metrics(tmp, "num.csv", "0,0,oops,,0.1,10,60,,\n");
  CHECK_THROWS_AS(load_metrics(bad_num), data_error);

  CHECK_THROWS_AS(load_metrics(tmp.path + "/nope.csv"), io_error);

  std::string empty = tmp.path + "/empty.csv";
  { std::ofstream out(empty); }
  CHECK_THROWS_AS(load_metrics(empty), data_error);
}

TEST_CASE("identical series produce zero savings") {
  TempDir tmp;
  std::string body =
      "0,0,2.0,,0.1,100,600,0.400000,\n"
      "1,1,1.5,,0.1,200,1200,0.600000,\n";
  std::string a = write_metrics(tmp, "a.csv", body);
  std::string b = write_metrics(tmp, "b.csv", body);
  SavingsRow row = compute_savings(load_metrics(a), load_metrics(b));
  CHECK(row.target_top1 == 0.6);
  CHECK(row.reached);
  CHECK(row.baseline_flops == row.comparison_flops);
  CHECK(row.baseline_updates == row.comparison_updates);
}

TEST_CASE("earlier crossing is credited with the exact flop delta") {
  TempDir tmp;
  std::string base = write_metrics(
      tmp, "base.csv",
      "0,0,2.0,,0.1,100,600,0.300000,\n"
      "1,1,1.5,,0.1,200,1200,0.500000,\n"
      "2,2,1.0,,0.1,300,1800,0.700000,\n");
  // comparison hits 0.7 one row earlier and cheaper
  std::string comp = write_metrics(
      tmp, "comp.csv",
      "0,0,2.0,1.0,0.1,150,900,0.400000,\n"
      "1,1,1.2,0.9,0.1,250,1500,0.720000,\n"
      "2,2,0.9,,0.1,350,2100,0.800000,\n");
  SavingsRow row = compute_savings(load_metrics(base), load_metrics(comp));
  CHECK(row.target_top1 == 0.7);
  CHECK(row.baseline_flops == 1800);
  CHECK(row.baseline_updates == 3);
  CHECK(row.reached);
  CHECK(row.comparison_flops == 1500);
  CHECK(row.comparison_updates == 2);
}

TEST_CASE("a comparison that never crosses is reported, not an error") {
  TempDir tmp;
  std::string base = write_metrics(tmp, "base.csv",
                                   "0,0,2.0,,0.1,100,600,0.900000,\n");
  std::string comp = write_metrics(tmp, "comp.csv",
                                   "0,0,2.0,,0.1,100,600,0.400000,\n"
                                   "1,1,1.0,,0.1,200,1200,0.500000,\n");
  SavingsRow row = compute_savings(load_metrics(base), load_metrics(comp));
  CHECK_FALSE(row.reached);

  // and the emitted file carries a not_reached status row
  std::string out_dir = tmp.path + "/report";
  emit_report({base}, {comp}, out_dir);
  std::string sav = slurp(out_dir + "/savings.csv");
  CHECK(sav.find("not_reached") != std::string::npos);
}

TEST_CASE("a baseline without accuracy values is unusable") {
  TempDir tmp;
  std::string base =
      write_metrics(tmp, "base.csv", "0,0,2.0,,0.1,100,600,,\n");
  std::string comp =
      write_metrics(tmp, "comp.csv", "0,0,2.0,,0.1,100,600,0.500000,\n");
  CHECK_THROWS_AS(compute_savings(load_metrics(base), load_metrics(comp)),
                  data_error);
}

TEST_CASE("report pairing rules") {
  TempDir tmp;
  std::string b1 = write_metrics(tmp, "b1.csv",
                                 "0,0,2.0,,0.1,100,600,0.500000,\n");
  std::string b2 = write_metrics(tmp, "b2.csv",
                                 "0,0,2.0,,0.1,120,720,0.550000,\n");
  std::string c1 = write_metrics(tmp, "c1.csv",
                                 "0,0,2.0,,0.1,80,480,0.600000,\n");
  std::string c2 = write_metrics(tmp, "c2.csv",
                                 "0,0,2.0,,0.1,90,540,0.650000,\n");

  // positional pairing
  auto rows = emit_report({b1, b2}, {c1, c2}, tmp.path + "/r1");
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].baseline == b1);
  CHECK(rows[0].comparison == c1);
  CHECK(rows[1].baseline == b2);
  CHECK(rows[1].comparison == c2);

  // single baseline broadcast over many comparisons
  rows = emit_report({b1}, {c1, c2}, tmp.path + "/r2");
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].baseline == b1);
  CHECK(rows[1].baseline == b1);

  // mismatched counts with no single side
  CHECK_THROWS_AS(emit_report({b1, b2}, {c1, c2, c1}, tmp.path + "/r3"),
                  config_error);
  CHECK_THROWS_AS(emit_report({}, {c1}, tmp.path + "/r4"), config_error);
}

TEST_CASE("curve output lists accuracy points for every series") {
  TempDir tmp;
  std::string base = write_metrics(tmp, "base.csv",
                                   "0,0,2.0,,0.1,100,600,0.500000,\n"
                                   "1,1,1.5,,0.1,200,1200,,\n"
                                   "2,2,1.2,,0.1,300,1800,0.800000,\n");
  std::string comp = write_metrics(tmp, "comp.csv",
                                   "0,0,2.0,,0.1,50,300,0.810000,\n");
  std::string out_dir = tmp.path + "/report";
  emit_report({base}, {comp}, out_dir);
  std::string curve = slurp(out_dir + "/curve.csv");
  CHECK(curve.find("series,role,flops_cum,eval_top1\n") == 0);
  CHECK(curve.find(base + ",baseline,600,0.500000") != std::string::npos);
  CHECK(curve.find(base + ",baseline,1800,0.800000") != std::string::npos);
  CHECK(curve.find(comp + ",comparison,300,0.810000") != std::string::npos);
  // rows without an accuracy value never appear
  CHECK(curve.find(",1200,") == std::string::npos);
}
