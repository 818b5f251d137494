#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "suncet/config.hpp"
#include "suncet/dataset.hpp"
#include "suncet/errors.hpp"
#include "suncet/report.hpp"
#include "suncet/synth.hpp"
#include "suncet/trainer.hpp"

namespace {

using namespace suncet;

struct CommonArgs {
  std::string config_path;
  std::string out_dir = "runs/out";
  std::string checkpoint_path;
  std::optional<std::uint64_t> seed;
};

TrainConfig resolve_config(const CommonArgs& args) {
  TrainConfig cfg;
  if (!args.config_path.empty()) {
    cfg = parse_config(args.config_path);
  } else {
    cfg.validate();
  }
  if (args.seed) {
    cfg.seed = *args.seed;
    cfg.validate();
  }
  return cfg;
}

// The resolved snapshot and run manifest land in the output directory before
// any compute starts, so every run is reproducible from its own artifacts.
void write_manifest(const std::string& out_dir, const std::string& command,
                    const CommonArgs& args, const TrainConfig& cfg,
                    const std::vector<std::string>& artifacts) {
  std::filesystem::create_directories(out_dir);
  {
    std::ofstream snap(out_dir + "/config.resolved");
    if (!snap) throw io_error("manifest: cannot write config.resolved");
    snap << serialize_config(cfg);
    if (!snap) throw io_error("manifest: write failed for config.resolved");
  }
  std::ofstream man(out_dir + "/manifest.txt");
  if (!man) throw io_error("manifest: cannot write manifest.txt");
  man << "command = " << command << "\n";
  man << "config_path = "
      << (args.config_path.empty() ? "<defaults>" : args.config_path) << "\n";
  man << "resolved_config = " << out_dir << "/config.resolved\n";
  man << "seed = " << cfg.seed << "\n";
  man << "out_dir = " << out_dir << "\n";
  if (!args.checkpoint_path.empty()) {
    man << "input_checkpoint = " << args.checkpoint_path << "\n";
  }
  for (const auto& a : artifacts) man << "artifact = " << a << "\n";
  if (!man) throw io_error("manifest: write failed for manifest.txt");
}

Dataset load_train(const TrainConfig& cfg) {
  return load_dataset(cfg.dataset_path);
}

std::optional<Dataset> load_test(const TrainConfig& cfg) {
  if (cfg.test_path.empty()) return std::nullopt;
  return load_dataset(cfg.test_path);
}

void print_run_summary(const char* what, const RunResult& res) {
  std::cout << what << " done: " << res.total_updates << " updates, "
            << u128_to_string(flops_per_update(res.total_macs)) << " flops";
  if (res.final_top1) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", *res.final_top1);
    std::cout << ", final top1 " << buf;
  }
  std::cout << "\n  checkpoint: " << res.checkpoint_path
            << "\n  metrics:    " << res.metrics_path << "\n";
}

int cmd_gen_data(const std::string& out_dir, const SynthSpec& spec,
                 std::uint64_t seed) {
  std::filesystem::create_directories(out_dir);
  SynthPair pair = make_blobs(spec, seed);
  std::string train_path = out_dir + "/train.snds";
  std::string test_path = out_dir + "/test.snds";
  save_dataset(pair.train, train_path);
  save_dataset(pair.test, test_path);
  std::cout << "wrote " << train_path << " (" << pair.train.n() << " rows), "
            << test_path << " (" << pair.test.n() << " rows), d="
            << pair.train.d_in() << ", classes=" << pair.train.n_classes
            << "\n";
  return 0;
}

int cmd_pretrain(const CommonArgs& args) {
  TrainConfig cfg = resolve_config(args);
  write_manifest(args.out_dir, "pretrain", args, cfg,
                 {args.out_dir + "/checkpoint.bin",
                  args.out_dir + "/metrics.csv"});
  Dataset train = load_train(cfg);
  std::optional<Dataset> test = load_test(cfg);
  LabelSplit split = bernoulli_split(train, cfg.label_fraction, cfg.label_seed);
  RunResult res = pretrain(train, test ? &*test : nullptr, split, cfg,
                           args.out_dir);
  print_run_summary("pretrain", res);
  return 0;
}

int cmd_finetune(const CommonArgs& args, bool frozen) {
  TrainConfig cfg = resolve_config(args);
  const char* name = frozen ? "lineval" : "finetune";
  write_manifest(args.out_dir, name, args, cfg,
                 {args.out_dir + "/checkpoint.bin",
                  args.out_dir + "/metrics.csv"});
  Dataset train = load_train(cfg);
  std::optional<Dataset> test = load_test(cfg);
  LabelSplit split = bernoulli_split(train, cfg.label_fraction, cfg.label_seed);
  Checkpoint ck = load_checkpoint(args.checkpoint_path);
  RunResult res =
      frozen ? linear_eval(train, test ? &*test : nullptr, split, ck, cfg,
                           args.out_dir)
             : finetune(train, test ? &*test : nullptr, split, ck, cfg,
                        args.out_dir);
  print_run_summary(name, res);
  return 0;
}

int cmd_eval(const CommonArgs& args) {
  TrainConfig cfg = resolve_config(args);
  Checkpoint ck = load_checkpoint(args.checkpoint_path);
  ModelParams params = model_from_checkpoint(ck);
  Dataset test = load_dataset(cfg.test_path);
  ClassifierHead head =
      checkpoint_has_classifier(ck)
          ? classifier_from_checkpoint(ck)
          : init_classifier(static_cast<std::size_t>(test.n_classes),
                            params.d_repr());
  double top1 = evaluate(params, head, test);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", top1);
  std::cout << "top1 " << buf << " on " << test.n() << " rows\n";
  return 0;
}

int cmd_sweep(const CommonArgs& args) {
  TrainConfig cfg = resolve_config(args);
  write_manifest(args.out_dir, "sweep-switchoff", args, cfg,
                 {args.out_dir + "/sweep.csv"});
  Dataset train = load_train(cfg);
  std::optional<Dataset> test = load_test(cfg);
  LabelSplit split = bernoulli_split(train, cfg.label_fraction, cfg.label_seed);

  std::ofstream sweep(args.out_dir + "/sweep.csv");
  if (!sweep) throw io_error("sweep: cannot write sweep.csv");
  sweep << "suncet_off_epoch,updates,macs_total,flops_total,final_top1\n";
  for (std::size_t off : cfg.sweep_switchoff_epochs) {
    TrainConfig run_cfg = cfg;
    run_cfg.suncet_off_epoch = off;
    run_cfg.validate();
    std::string sub = args.out_dir + "/off_" + std::to_string(off);
    RunResult res = pretrain(train, test ? &*test : nullptr, split, run_cfg,
                             sub);
    sweep << off << "," << res.total_updates << ","
          << u128_to_string(res.total_macs) << ","
          << u128_to_string(flops_per_update(res.total_macs)) << ",";
    if (res.final_top1) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%.6f", *res.final_top1);
      sweep << buf;
    }
    sweep << "\n";
    sweep.flush();
    std::cout << "sweep: switch-off " << off << " finished\n";
  }
  if (!sweep) throw io_error("sweep: write failed for sweep.csv");
  std::cout << "sweep table: " << args.out_dir << "/sweep.csv\n";
  return 0;
}

int cmd_report(const std::vector<std::string>& baselines,
               const std::vector<std::string>& comparisons,
               const std::string& out_dir) {
  auto rows = emit_report(baselines, comparisons, out_dir);
  for (const auto& r : rows) {
    std::cout << r.comparison << " vs " << r.baseline << ": target top1 ";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", r.target_top1);
    std::cout << buf;
    if (r.reached) {
      bool saved = r.baseline_flops >= r.comparison_flops;
      u128 delta = saved ? r.baseline_flops - r.comparison_flops
                         : r.comparison_flops - r.baseline_flops;
      std::cout << ", flops " << (saved ? "saved " : "overspent ")
                << u128_to_string(delta) << "\n";
    } else {
      std::cout << ", not reached\n";
    }
  }
  std::cout << "report files: " << out_dir << "/curve.csv, " << out_dir
            << "/savings.csv\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"semi-supervised contrastive training engine"};
  app.require_subcommand(1);

  CommonArgs args;
  auto add_common = [&args](CLI::App* cmd, bool with_checkpoint) {
    cmd->add_option("--config", args.config_path, "config file (key = value)");
    cmd->add_option("--seed", args.seed, "override the config seed");
    cmd->add_option("--out", args.out_dir, "output directory");
    if (with_checkpoint) {
      cmd->add_option("--checkpoint", args.checkpoint_path, "input checkpoint")
          ->required();
    }
  };

  std::string gen_out = "data";
  SynthSpec spec;
  std::uint64_t gen_seed = 7;
  CLI::App* gen = app.add_subcommand("gen-data",
                                     "write a synthetic blob dataset pair");
  gen->add_option("--out", gen_out, "output directory");
  gen->add_option("--n", spec.n_train, "training rows");
  gen->add_option("--test-n", spec.n_test, "test rows");
  gen->add_option("--d", spec.d, "feature dimension");
  gen->add_option("--classes", spec.classes, "number of classes");
  gen->add_option("--center-scale", spec.center_scale,
                  "stddev of class centers");
  gen->add_option("--cluster-std", spec.cluster_std,
                  "stddev of rows around their center");
  gen->add_option("--seed", gen_seed, "generator seed");

  CLI::App* pre = app.add_subcommand("pretrain",
                                     "semi-supervised contrastive training");
  add_common(pre, false);
  CLI::App* fin = app.add_subcommand("finetune",
                                     "tune encoder + classifier on labels");
  add_common(fin, true);
  CLI::App* lin = app.add_subcommand("lineval",
                                     "train a classifier on the frozen "
                                     "encoder");
  add_common(lin, true);
  CLI::App* ev = app.add_subcommand("eval", "top-1 accuracy of a checkpoint");
  add_common(ev, true);
  CLI::App* sweep = app.add_subcommand("sweep-switchoff",
                                       "pretrain once per switch-off epoch");
  add_common(sweep, false);

  std::vector<std::string> baselines, comparisons;
  std::string report_out = "runs/report";
  CLI::App* rep = app.add_subcommand("report",
                                     "accuracy-vs-flops curves and savings");
  rep->add_option("--baseline", baselines, "baseline metrics.csv")
      ->required();
  rep->add_option("--comparison", comparisons, "comparison metrics.csv")
      ->required();
  rep->add_option("--out", report_out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "argument error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (gen->parsed()) return cmd_gen_data(gen_out, spec, gen_seed);
    if (pre->parsed()) return cmd_pretrain(args);
    if (fin->parsed()) return cmd_finetune(args, false);
    if (lin->parsed()) return cmd_finetune(args, true);
    if (ev->parsed()) return cmd_eval(args);
    if (sweep->parsed()) return cmd_sweep(args);
    if (rep->parsed()) return cmd_report(baselines, comparisons, report_out);
  } catch (const config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const data_error& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const divergence_error& e) {
    std::cerr << "divergence: " << e.what() << "\n";
    return 4;
  } catch (const io_error& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 5;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
