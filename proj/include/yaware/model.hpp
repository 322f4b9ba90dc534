#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "yaware/matrix.hpp"
#include "yaware/volume.hpp"

namespace yaware {

// Conv blocks are (out_channels, downsample). Each block is a 3x3x3
// convolution (zero pad 1), rectified-linear, then non-overlapping average
// pooling by the downsample factor. Global average pooling over the last
// block yields the encoder feature vector, so feature_dim must equal the last
// block's out_channels. The projection head is linear -> relu -> linear
// followed by row-wise L2 normalization onto the unit hypersphere.
struct EncoderConfig {
  std::vector<std::array<int, 2>> conv_blocks{{8, 2}, {16, 2}, {32, 2}, {64, 2}};
  int feature_dim = 64;
  int projection_hidden = 64;
  int embedding_dim = 32;

  void validate() const;
  int downsample_product() const;
};

struct ParamArray {
  std::string name;
  std::vector<int> shape;
  std::vector<double> value;
  std::vector<double> grad;  // accumulated by backward, zeroed by the optimizer

  std::size_t size() const { return value.size(); }
};

// Declaration order (checkpoint and optimizer order): per block conv weight
// then conv bias, then proj1 weight/bias, proj2 weight/bias.
struct ModelParams {
  EncoderConfig cfg;
  std::vector<ParamArray> arrays;

  std::size_t parameter_count() const;
  void zero_grads();
  bool same_shapes(const ModelParams& o) const;
};

// All arrays allocated in declaration order, zero-valued.
ModelParams param_skeleton(const EncoderConfig& cfg);

// Weights fan-in-scaled uniform (+-sqrt(3/fan_in), variance 1/fan_in),
// biases zero. Deterministic in (cfg, seed).
ModelParams init_params(const EncoderConfig& cfg, std::uint64_t seed);

struct StageDims {
  int c = 0, z = 0, y = 0, x = 0;
  std::size_t count() const {
    return static_cast<std::size_t>(c) * z * y * x;
  }
};

// Recorded activations for one sample: inputs to each block (index 0 is the
// raw volume as doubles; index L is the final pooled map feeding GAP) and the
// post-relu pre-pool activations per block, plus the projection intermediates.
struct SampleTrace {
  std::vector<std::vector<double>> block_inputs;
  std::vector<std::vector<double>> block_acts;
  std::vector<double> feat;
  std::vector<double> hidden;    // post-relu
  std::vector<double> pre_norm;  // u, before L2 normalization
  double norm = 0.0;
  std::vector<double> z;
};

struct BatchTrace {
  std::vector<StageDims> input_dims;  // dims of block_inputs[l], length L+1
  std::vector<SampleTrace> samples;
  bool has_projection = false;  // false when produced by features()
  bool valid = false;
};

class Model {
 public:
  Model() = default;
  explicit Model(ModelParams params);

  const ModelParams& params() const { return params_; }
  ModelParams& params() { return params_; }

  // Full forward to unit embeddings (n x embedding_dim). The internal-trace
  // overload invalidates the previous recording.
  EmbeddingMatrix embed(const std::vector<Volume>& batch);
  EmbeddingMatrix embed(const std::vector<Volume>& batch,
                        BatchTrace& trace) const;

  // Encoder-only forward to GAP features (n x feature_dim). The projection
  // head is not run; traces from here support backward_features only.
  Matrix features(const std::vector<Volume>& batch) const;
  Matrix features(const std::vector<Volume>& batch, BatchTrace& trace) const;

  // Accumulates dLoss/dtheta into the parameter grad arrays from the gradient
  // wrt embeddings (n x embedding_dim). The trace-less overload uses the
  // internal recording and throws StateError when no forward preceded it.
  void backward(const Matrix& upstream);
  void backward(const BatchTrace& trace, const Matrix& upstream);

  // Encoder-only backward from a gradient wrt GAP features.
  void backward_features(const BatchTrace& trace, const Matrix& upstream);

 private:
  ModelParams params_;
  BatchTrace trace_;
};

}  // namespace yaware
