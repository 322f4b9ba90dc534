#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "yaware/augment.hpp"
#include "yaware/loss.hpp"
#include "yaware/manifest.hpp"
#include "yaware/model.hpp"
#include "yaware/optim.hpp"

namespace yaware {

struct TrainConfig {
  int batch_size = 64;
  int epochs = 20;
  double base_lr = 1e-4;
  double lr_decay = 0.9;
  int lr_decay_every = 10;
  AdamConfig adam;
  std::uint64_t seed = 0;
  LossConfig loss;
  TransformSet transforms = named_transform_set("cutout");

  // epochs = 0 is allowed and leaves parameters at initialization.
  void validate() const;
};

double lr_at_epoch(const TrainConfig& cfg, int epoch);

struct PretrainResult {
  ModelParams params;
  std::vector<double> loss_curve;  // per-epoch mean loss
  std::vector<double> lr_curve;
};

// Contrastive pretraining. Per epoch: deterministic shuffle; per batch:
// two augmented views per sample (streams keyed by (seed, sample, epoch,
// view)), embed both, weight matrix from the batch's y values, loss, backward
// through both views, one Adam step at the epoch's lr. Volumes are
// standardized once at entry; trailing batches smaller than two samples are
// dropped (nothing to contrast).
PretrainResult pretrain(const Manifest& manifest, const EncoderConfig& encoder,
                        const TrainConfig& cfg);

// One loss evaluation the way the training loop computes it; exposed so
// equivalences (sigma sentinels, delta kernel vs discrete supervision) can be
// tested at the step level.
LossResult pretrain_batch_loss(const EmbeddingMatrix& z1,
                               const EmbeddingMatrix& z2,
                               const std::vector<double>& y_batch,
                               const LossConfig& cfg);

// "epoch,mean_loss,lr" CSV, one row per epoch, %.17g floats.
void write_loss_curve_csv(const std::vector<double>& loss_curve,
                          const std::vector<double>& lr_curve,
                          const std::filesystem::path& path);

}  // namespace yaware
