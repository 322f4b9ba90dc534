#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "yaware/augment.hpp"
#include "yaware/folds.hpp"
#include "yaware/synth.hpp"
#include "yaware/train.hpp"

namespace yaware {

struct EvalSection {
  FoldStrategy strategy = FoldStrategy::stratified_nested;
  std::optional<int> n_target;
  bool augment = false;                  // fine-tune with cfg.transforms
  std::optional<std::string> checkpoint;  // path, or "random" for a fresh init
};

struct AblationSection {
  std::vector<double> sigmas{0.0, 5.0};  // 0 and +inf act as limit sentinels
  std::vector<std::string> transform_sets{"cutout"};
  int repeats = 1;
};

// The experiment JSON document. Every field is optional; defaults follow the
// reference protocol (tau = 0.1, sigma = 5, batch 64, cutout p = 0.25, crop
// p' = 0.75). Unknown keys anywhere are rejected with their full path.
struct ExperimentConfig {
  std::optional<std::string> data_manifest;  // data.manifest
  SynthConfig synth;                         // data.synth, used when no manifest
  std::string transform_set = "cutout";      // name, or "custom" for a list
  TransformSet transforms = named_transform_set("cutout");
  KernelConfig kernel;  // rbf sigma 5
  LossConfig loss;      // kernel section is copied in before use
  EncoderConfig model;
  TrainConfig train;
  EvalSection eval;
  std::optional<AblationSection> ablation;
  std::vector<std::string> reports;  // plot-data inputs

  // The train config with loss.kernel and transforms wired in.
  TrainConfig effective_train() const;
};

ExperimentConfig parse_experiment_config(const nlohmann::json& doc);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

// Full effective config after defaults, deterministic key order. This is the
// config echo embedded in reports and run metadata; parsing it back yields an
// equivalent config.
nlohmann::ordered_json experiment_config_to_json(const ExperimentConfig& cfg);

// "0" and "inf" sentinels allowed; otherwise a positive real.
double parse_sigma(const std::string& text);
nlohmann::ordered_json sigma_to_json(double sigma);

}  // namespace yaware
