#include "yaware/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "yaware/checkpoint.hpp"
#include "yaware/config.hpp"
#include "yaware/errors.hpp"
#include "yaware/eval.hpp"
#include "yaware/folds.hpp"
#include "yaware/manifest.hpp"
#include "yaware/model.hpp"
#include "yaware/synth.hpp"
#include "yaware/train.hpp"

namespace yaware {

namespace {

namespace fs = std::filesystem;

constexpr const char* kVersion = "1.0.0";

struct CommonArgs {
  std::string config_path;
  std::string grid_path;  // ablate-sigma alias for --config
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::string sigma;       // empty = no override
  std::string transforms;  // empty = no override
};

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path q(p);
  return q.is_absolute() ? q : (base / q).lexically_normal();
}

// Loads the config, resolves its relative paths against the config file's
// directory, and applies the flag overrides. --seed retargets the training
// seed (gen-data retargets the generator seed instead, being the only seed
// that subcommand consumes).
ExperimentConfig load_with_overrides(const CommonArgs& a, bool seed_to_synth) {
  ExperimentConfig cfg = load_experiment_config(a.config_path);
  const fs::path dir = fs::path(a.config_path).parent_path();
  if (cfg.data_manifest)
    *cfg.data_manifest = resolve(dir, *cfg.data_manifest).string();
  if (cfg.eval.checkpoint && *cfg.eval.checkpoint != "random")
    *cfg.eval.checkpoint = resolve(dir, *cfg.eval.checkpoint).string();
  for (auto& r : cfg.reports) r = resolve(dir, r).string();
  if (a.seed) {
    if (seed_to_synth)
      cfg.synth.seed = *a.seed;
    else
      cfg.train.seed = *a.seed;
  }
  if (!a.sigma.empty()) cfg.kernel.sigma = parse_sigma(a.sigma);
  if (!a.transforms.empty()) {
    cfg.transform_set = a.transforms;
    cfg.transforms = named_transform_set(a.transforms);
  }
  return cfg;
}

// The synthetic dataset lands under <out>/dataset so the generated tree is
// byte-identical across reruns (run_metadata.json carries the wall-clock and
// lives beside it, not inside it).
Manifest obtain_manifest(const ExperimentConfig& cfg, const fs::path& out) {
  if (cfg.data_manifest) return load_manifest(*cfg.data_manifest);
  return generate_synthetic_dataset(cfg.synth, out / "dataset");
}

Checkpoint obtain_checkpoint(const ExperimentConfig& cfg,
                             const Manifest& manifest, const fs::path& out) {
  if (cfg.eval.checkpoint && *cfg.eval.checkpoint == "random") {
    Checkpoint ckpt;
    ckpt.params = init_params(cfg.model, cfg.train.seed);
    ckpt.meta.seed = cfg.train.seed;
    ckpt.meta.extra = experiment_config_to_json(cfg);
    return ckpt;
  }
  if (cfg.eval.checkpoint) return load_checkpoint(*cfg.eval.checkpoint);
  // No checkpoint configured: pretrain in process and keep the artifacts.
  PretrainResult pre = pretrain(manifest, cfg.model, cfg.effective_train());
  CheckpointMeta meta;
  meta.epoch = cfg.train.epochs;
  meta.seed = cfg.train.seed;
  meta.loss_curve = pre.loss_curve;
  meta.lr_curve = pre.lr_curve;
  meta.extra = experiment_config_to_json(cfg);
  save_checkpoint(pre.params, meta, out / "checkpoint.ckpt");
  write_loss_curve_csv(pre.loss_curve, pre.lr_curve, out / "loss_curve.csv");
  return Checkpoint{std::move(pre.params), std::move(meta)};
}

void stamp_report(EvalReport& report, const ExperimentConfig& cfg) {
  report.sigma = cfg.kernel.kind == KernelKind::rbf
                     ? sigma_to_json(cfg.kernel.sigma)
                     : nlohmann::ordered_json();
  report.transform_set = cfg.transform_set;
  report.config_echo = experiment_config_to_json(cfg);
}

// One CSV cell from a JSON scalar: null prints empty, strings print raw,
// numbers print their shortest round-trip form.
std::string json_cell(const nlohmann::ordered_json& v) {
  if (v.is_null()) return "";
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

std::string sigma_file_label(double sigma) {
  if (std::isinf(sigma)) return "inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", sigma);
  std::string label(buf);
  for (auto& c : label)
    if (c == '.') c = 'p';
  return label;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os << text;
  if (!os) throw IoError("write failed for " + path.string());
}

struct RunMeta {
  nlohmann::ordered_json fields = nlohmann::ordered_json::object();
};

void write_run_metadata(const fs::path& out, const std::string& command,
                        const RunMeta& meta, bool ok, const std::string& error,
                        double wall_seconds) {
  nlohmann::ordered_json j;
  j["schema_version"] = 1;
  j["command"] = command;
  j["status"] = ok ? "ok" : "error";
  if (!ok) j["error"] = error;
  for (const auto& [k, v] : meta.fields.items()) j[k] = v;
  nlohmann::ordered_json versions;
  versions["yaware"] = kVersion;
  versions["compiler"] = __VERSION__;
  versions["json"] = std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                     std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                     std::to_string(NLOHMANN_JSON_VERSION_PATCH);
  versions["cli11"] = CLI11_VERSION;
  j["versions"] = std::move(versions);
  j["wall_clock_seconds"] = wall_seconds;
  write_text(out / "run_metadata.json", j.dump(2) + "\n");
}

void run_gen_data(const CommonArgs& a, const fs::path& out, RunMeta& meta) {
  ExperimentConfig cfg = load_with_overrides(a, true);
  if (cfg.data_manifest)
    throw ValidationError("gen-data needs data.synth, not data.manifest");
  cfg.synth.validate();
  meta.fields["seed"] = cfg.synth.seed;
  meta.fields["config"] = experiment_config_to_json(cfg);
  generate_synthetic_dataset(cfg.synth, out / "dataset");
}

void run_pretrain(const CommonArgs& a, const fs::path& out, RunMeta& meta) {
  ExperimentConfig cfg = load_with_overrides(a, false);
  meta.fields["seed"] = cfg.train.seed;
  meta.fields["config"] = experiment_config_to_json(cfg);
  Manifest manifest = obtain_manifest(cfg, out);
  PretrainResult pre = pretrain(manifest, cfg.model, cfg.effective_train());
  CheckpointMeta ckmeta;
  ckmeta.epoch = cfg.train.epochs;
  ckmeta.seed = cfg.train.seed;
  ckmeta.loss_curve = pre.loss_curve;
  ckmeta.lr_curve = pre.lr_curve;
  ckmeta.extra = experiment_config_to_json(cfg);
  save_checkpoint(pre.params, ckmeta, out / "checkpoint.ckpt");
  write_loss_curve_csv(pre.loss_curve, pre.lr_curve, out / "loss_curve.csv");
}

void run_eval(const CommonArgs& a, const fs::path& out, RunMeta& meta,
              bool finetune) {
  ExperimentConfig cfg = load_with_overrides(a, false);
  meta.fields["seed"] = cfg.train.seed;
  meta.fields["config"] = experiment_config_to_json(cfg);
  Manifest manifest = obtain_manifest(cfg, out);
  Checkpoint ckpt = obtain_checkpoint(cfg, manifest, out);
  FoldPlan plan = make_folds(manifest, cfg.eval.strategy, cfg.train.seed,
                             cfg.eval.n_target);
  EvalReport report =
      finetune ? fine_tune(ckpt, manifest, plan, cfg.effective_train(),
                           cfg.eval.augment)
               : linear_probe(ckpt, manifest, plan);
  stamp_report(report, cfg);
  write_report(report, out / "report.json");
}

void run_ablate(const CommonArgs& a, const fs::path& out, RunMeta& meta) {
  ExperimentConfig base = load_with_overrides(a, false);
  const AblationSection grid = base.ablation.value_or(AblationSection{});
  meta.fields["seed"] = base.train.seed;
  meta.fields["config"] = experiment_config_to_json(base);
  Manifest manifest = obtain_manifest(base, out);
  fs::create_directories(out / "reports");
  std::string csv = "sigma,transform_set,repeat,fold,auc\n";
  for (double sigma : grid.sigmas) {
    for (const auto& tset : grid.transform_sets) {
      for (int rep = 0; rep < grid.repeats; ++rep) {
        ExperimentConfig cell = base;
        cell.kernel.sigma = sigma;
        cell.transform_set = tset;
        cell.transforms = named_transform_set(tset);
        cell.train.seed = base.train.seed + static_cast<std::uint64_t>(rep);
        PretrainResult pre =
            pretrain(manifest, cell.model, cell.effective_train());
        Checkpoint ckpt;
        ckpt.params = std::move(pre.params);
        ckpt.meta.epoch = cell.train.epochs;
        ckpt.meta.seed = cell.train.seed;
        ckpt.meta.loss_curve = std::move(pre.loss_curve);
        ckpt.meta.lr_curve = std::move(pre.lr_curve);
        FoldPlan plan = make_folds(manifest, cell.eval.strategy,
                                   cell.train.seed, cell.eval.n_target);
        EvalReport report = linear_probe(ckpt, manifest, plan);
        stamp_report(report, cell);
        const std::string name = "sigma" + sigma_file_label(sigma) + "_" +
                                 tset + "_r" + std::to_string(rep);
        write_report(report, out / "reports" / (name + ".json"));
        for (const auto& f : report.folds)
          csv += json_cell(sigma_to_json(sigma)) + "," + tset + "," +
                 std::to_string(rep) + "," + std::to_string(f.fold) + "," +
                 json_cell(f.auc) + "\n";
      }
    }
  }
  write_text(out / "ablation.csv", csv);
}

void run_plot_data(const CommonArgs& a, const fs::path& out, RunMeta& meta) {
  ExperimentConfig cfg = load_with_overrides(a, false);
  meta.fields["config"] = experiment_config_to_json(cfg);
  if (cfg.reports.empty())
    throw ValidationError("plot-data needs a nonempty reports list");
  std::string csv = "experiment,sigma,transform_set,n_target,fold,auc\n";
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& path : cfg.reports) {
    EvalReport r = read_report(path);
    for (const auto& f : r.folds) {
      nlohmann::ordered_json row;
      row["experiment"] = r.experiment;
      row["sigma"] = r.sigma.is_null() ? nlohmann::ordered_json() : r.sigma;
      row["transform_set"] = r.transform_set;
      if (r.n_target)
        row["n_target"] = *r.n_target;
      else
        row["n_target"] = nullptr;
      row["fold"] = f.fold;
      row["auc"] = f.auc;
      csv += json_cell(row["experiment"]) + "," + json_cell(row["sigma"]) +
             "," + json_cell(row["transform_set"]) + "," +
             json_cell(row["n_target"]) + "," + json_cell(row["fold"]) + "," +
             json_cell(row["auc"]) + "\n";
      rows.push_back(std::move(row));
    }
  }
  write_text(out / "plot_data.csv", csv);
  write_text(out / "plot_data.json", rows.dump(2) + "\n");
}

using Runner = void (*)(const CommonArgs&, const fs::path&, RunMeta&);

int guarded_run(const std::string& command, const CommonArgs& a, Runner run) {
  const auto t0 = std::chrono::steady_clock::now();
  const fs::path out(a.out_dir);
  RunMeta meta;
  auto elapsed = [&t0] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         t0)
        .count();
  };
  try {
    fs::create_directories(out);
    run(a, out, meta);
    write_run_metadata(out, command, meta, true, "", elapsed());
    return 0;
  } catch (const std::exception& e) {
    try {
      if (fs::is_directory(out))
        write_run_metadata(out, command, meta, false, e.what(), elapsed());
    } catch (...) {
      // Metadata is best effort once the run itself has failed.
    }
    throw;
  }
}

}  // namespace

int dispatch(int argc, const char* const* argv) {
  CLI::App app{"kernel-weighted contrastive pretraining on 3d volumes"};
  app.require_subcommand(1);
  CommonArgs args;

  auto add_common = [&args](CLI::App* cmd, bool with_config) {
    if (with_config)
      cmd->add_option("--config", args.config_path, "experiment JSON")
          ->required();
    cmd->add_option("--out", args.out_dir, "output directory")->required();
    cmd->add_option("--seed", args.seed, "seed override");
    return cmd;
  };
  auto add_loss_flags = [&args](CLI::App* cmd) {
    cmd->add_option("--sigma", args.sigma, "kernel sigma (0 and inf allowed)");
    cmd->add_option("--transforms", args.transforms, "transform set name")
        ->check(CLI::IsMember({"crop", "cutout", "all_tf"}));
    return cmd;
  };

  CLI::App* gen = add_common(
      app.add_subcommand("gen-data", "write a synthetic dataset"), true);
  CLI::App* pre = add_loss_flags(add_common(
      app.add_subcommand("pretrain", "contrastive pretraining"), true));
  CLI::App* probe = add_loss_flags(add_common(
      app.add_subcommand("probe", "frozen-encoder linear evaluation"), true));
  CLI::App* fine = add_loss_flags(add_common(
      app.add_subcommand("finetune", "end-to-end fine-tuning"), true));
  CLI::App* ablate = add_common(
      app.add_subcommand("ablate-sigma", "sigma/transform grid"), false);
  ablate->add_option("--config", args.config_path, "experiment JSON");
  ablate->add_option("--grid", args.grid_path, "alias for --config");
  CLI::App* plot = add_common(
      app.add_subcommand("plot-data", "merge reports into long-format data"),
      true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (app.got_subcommand(gen)) return guarded_run("gen-data", args, run_gen_data);
    if (app.got_subcommand(pre)) return guarded_run("pretrain", args, run_pretrain);
    if (app.got_subcommand(probe))
      return guarded_run("probe", args,
                         [](const CommonArgs& a, const fs::path& out,
                            RunMeta& m) { run_eval(a, out, m, false); });
    if (app.got_subcommand(fine))
      return guarded_run("finetune", args,
                         [](const CommonArgs& a, const fs::path& out,
                            RunMeta& m) { run_eval(a, out, m, true); });
    if (app.got_subcommand(ablate)) {
      if (args.config_path.empty() && args.grid_path.empty())
        throw ValidationError("ablate-sigma needs --config or --grid");
      if (!args.config_path.empty() && !args.grid_path.empty())
        throw ValidationError("ablate-sigma takes --config or --grid, not both");
      if (args.config_path.empty()) args.config_path = args.grid_path;
      return guarded_run("ablate-sigma", args, run_ablate);
    }
    if (app.got_subcommand(plot))
      return guarded_run("plot-data", args, run_plot_data);
    throw ValidationError("no subcommand selected");
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace yaware
