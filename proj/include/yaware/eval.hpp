#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "yaware/checkpoint.hpp"
#include "yaware/folds.hpp"
#include "yaware/manifest.hpp"
#include "yaware/matrix.hpp"
#include "yaware/train.hpp"

namespace yaware {

struct FoldScore {
  int fold = 0;
  double auc = 0.0;
  double accuracy = 0.0;
};

// Wall-clock for a run lives in run_metadata.json, not here: reports must be
// bit-identical across reruns of the same config/seed.
struct EvalReport {
  int schema_version = 1;
  std::string experiment;  // "probe" or "finetune"
  std::string strategy;
  nlohmann::ordered_json sigma;  // number, "inf", or null
  std::string transform_set;
  std::optional<int> n_target;
  std::vector<FoldScore> folds;
  double mean_auc = 0.0, std_auc = 0.0;
  double mean_accuracy = 0.0, std_accuracy = 0.0;
  std::string formatted;  // Table style, AUC percent: "76.33 ± 2.30"
  nlohmann::ordered_json config_echo;
};

std::string format_mean_std(double mean_pct, double std_pct);

void write_report(const EvalReport& r, const std::filesystem::path& path);
EvalReport read_report(const std::filesystem::path& path);

// Plain logistic regression head trained by full-batch gradient descent with
// a Lipschitz-safe step size, to grad-norm < grad_tol or max_iters.
struct LinearHead {
  std::vector<double> w;
  double b = 0.0;
};
LinearHead train_logistic(const Matrix& x, const std::vector<int>& labels,
                          double grad_tol, int max_iters);

struct ProbeOptions {
  double grad_tol = 1e-6;
  int max_iters = 10000;
};

// Frozen-encoder linear evaluation: GAP features (the projection head is
// discarded), extracted once per volume without augmentation, features
// standardized per fold from training statistics, logistic head per fold,
// AUC/accuracy on the fold's test ids.
EvalReport linear_probe(const Checkpoint& ckpt, const Manifest& manifest,
                        const FoldPlan& plan, const ProbeOptions& opt = {});

// Unfreezes the whole encoder and trains it with a logistic head per fold
// using cfg's optimizer settings. When augment is set, each training sample
// passes through cfg.transforms once per epoch.
EvalReport fine_tune(const Checkpoint& ckpt, const Manifest& manifest,
                     const FoldPlan& plan, const TrainConfig& cfg,
                     bool augment = false);

}  // namespace yaware
