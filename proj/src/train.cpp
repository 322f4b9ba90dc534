#include "yaware/train.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <string>

#include "yaware/errors.hpp"
#include "yaware/parallel.hpp"
#include "yaware/rng.hpp"

namespace yaware {

void TrainConfig::validate() const {
  if (batch_size < 2)
    throw ParameterError("batch_size must be at least 2 for contrastive "
                         "training");
  if (epochs < 0) throw ParameterError("epochs must be nonnegative");
  if (!(base_lr > 0.0)) throw ParameterError("base_lr must be positive");
  if (!(lr_decay > 0.0 && lr_decay <= 1.0))
    throw ParameterError("lr_decay must lie in (0, 1]");
  if (lr_decay_every < 1)
    throw ParameterError("lr_decay_every must be positive");
  adam.validate();
  loss.validate();
  transforms.validate();
}

double lr_at_epoch(const TrainConfig& cfg, int epoch) {
  return lr_at_epoch(cfg.base_lr, cfg.lr_decay, cfg.lr_decay_every, epoch);
}

namespace {

WeightMatrix identity_weight_matrix(int n) {
  Matrix w(n, n);
  for (int i = 0; i < n; ++i) w(i, i) = 1.0;
  return w;
}

}  // namespace

LossResult pretrain_batch_loss(const EmbeddingMatrix& z1,
                               const EmbeddingMatrix& z2,
                               const std::vector<double>& y_batch,
                               const LossConfig& cfg) {
  WeightMatrix w = cfg.objective == Objective::infonce
                       ? identity_weight_matrix(z1.rows)
                       : batch_weight_matrix(y_batch, cfg.kernel);
  if (cfg.symmetric)
    return y_aware_symmetric(z1, z2, cfg.temperature, w);
  return y_aware_infonce(similarity_matrix(z1, z2, cfg.temperature), w);
}

PretrainResult pretrain(const Manifest& manifest, const EncoderConfig& encoder,
                        const TrainConfig& cfg) {
  cfg.validate();
  encoder.validate();
  if (manifest.samples.empty()) throw ValidationError("empty manifest");
  for (const auto& s : manifest.samples)
    if (!std::isfinite(s.y))
      throw ValidationError("sample \"" + s.id + "\" has non-finite y");

  const int n = static_cast<int>(manifest.samples.size());

  // Standardization happens here, at pipeline entry, once per sample.
  std::vector<Volume> volumes(n);
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t i) {
    Volume v = read_volume(manifest.resolve(manifest.samples[i]));
    standardize(v);
    volumes[i] = std::move(v);
  });

  Model model(init_params(encoder, cfg.seed));
  Adam adam(model.params().arrays, cfg.adam);

  PretrainResult out;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    RngStream(cfg.seed, stream_tag::shuffle,
              static_cast<std::uint64_t>(epoch))
        .shuffle(order);

    const double lr = lr_at_epoch(cfg, epoch);
    double epoch_loss = 0.0;
    int batches = 0;
    for (int start = 0; start < n; start += cfg.batch_size) {
      const int b = std::min(cfg.batch_size, n - start);
      if (b < 2) break;  // a singleton has nothing to contrast against

      std::vector<Volume> v1(b), v2(b);
      std::vector<double> y_batch(b);
      parallel_for(static_cast<std::size_t>(b), [&](std::size_t j) {
        const int idx = order[start + static_cast<int>(j)];
        RngStream r1(cfg.seed, static_cast<std::uint64_t>(idx),
                     static_cast<std::uint64_t>(epoch), 0);
        RngStream r2(cfg.seed, static_cast<std::uint64_t>(idx),
                     static_cast<std::uint64_t>(epoch), 1);
        auto views = sample_view_pair(volumes[idx], cfg.transforms, r1, r2);
        v1[j] = std::move(views.first);
        v2[j] = std::move(views.second);
        y_batch[j] = manifest.samples[idx].y;
      });

      BatchTrace t1, t2;
      EmbeddingMatrix z1 = model.embed(v1, t1);
      EmbeddingMatrix z2 = model.embed(v2, t2);
      LossResult res = pretrain_batch_loss(z1, z2, y_batch, cfg.loss);
      if (!std::isfinite(res.value))
        throw NumericError("non-finite loss at epoch " +
                           std::to_string(epoch) + ", batch " +
                           std::to_string(batches));

      model.backward(t1, res.grad_z1);
      model.backward(t2, res.grad_z2);
      adam.step(model.params().arrays, lr);

      epoch_loss += res.value;
      ++batches;
    }
    if (batches == 0)
      throw ValidationError("no batch had at least two samples");
    out.loss_curve.push_back(epoch_loss / batches);
    out.lr_curve.push_back(lr);
  }

  out.params = std::move(model.params());
  return out;
}

void write_loss_curve_csv(const std::vector<double>& loss_curve,
                          const std::vector<double>& lr_curve,
                          const std::filesystem::path& path) {
  if (loss_curve.size() != lr_curve.size())
    throw ParameterError("loss and lr curves differ in length");
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os << "epoch,mean_loss,lr\n";
  char buf[64];
  for (std::size_t e = 0; e < loss_curve.size(); ++e) {
    std::snprintf(buf, sizeof(buf), "%.17g", loss_curve[e]);
    os << e << "," << buf;
    std::snprintf(buf, sizeof(buf), "%.17g", lr_curve[e]);
    os << "," << buf << "\n";
  }
  if (!os) throw IoError("short write to " + path.string());
}

}  // namespace yaware
