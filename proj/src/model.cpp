#include "yaware/model.hpp"

#include <cmath>
#include <cstring>

#include "yaware/errors.hpp"
#include "yaware/parallel.hpp"
#include "yaware/rng.hpp"

namespace yaware {

void EncoderConfig::validate() const {
  if (conv_blocks.empty()) throw ParameterError("conv_blocks is empty");
  for (const auto& b : conv_blocks) {
    if (b[0] < 1) throw ParameterError("conv out_channels must be positive");
    if (b[1] < 1) throw ParameterError("downsample factor must be positive");
  }
  if (feature_dim != conv_blocks.back()[0])
    throw ParameterError(
        "feature_dim must equal the last block's out_channels (global "
        "average pooling), got " + std::to_string(feature_dim) + " vs " +
        std::to_string(conv_blocks.back()[0]));
  if (projection_hidden < 1)
    throw ParameterError("projection_hidden must be positive");
  if (embedding_dim < 2)
    throw ParameterError("embedding_dim must be at least 2");
}

int EncoderConfig::downsample_product() const {
  int p = 1;
  for (const auto& b : conv_blocks) p *= b[1];
  return p;
}

std::size_t ModelParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto& a : arrays) n += a.size();
  return n;
}

void ModelParams::zero_grads() {
  for (auto& a : arrays)
    std::fill(a.grad.begin(), a.grad.end(), 0.0);
}

bool ModelParams::same_shapes(const ModelParams& o) const {
  if (arrays.size() != o.arrays.size()) return false;
  for (std::size_t i = 0; i < arrays.size(); ++i)
    if (arrays[i].shape != o.arrays[i].shape) return false;
  return true;
}

namespace {

ParamArray make_array(std::string name, std::vector<int> shape) {
  ParamArray a;
  a.name = std::move(name);
  a.shape = std::move(shape);
  std::size_t n = 1;
  for (int s : a.shape) n *= static_cast<std::size_t>(s);
  a.value.assign(n, 0.0);
  a.grad.assign(n, 0.0);
  return a;
}

}  // namespace

ModelParams param_skeleton(const EncoderConfig& cfg) {
  cfg.validate();
  ModelParams p;
  p.cfg = cfg;

  int in_c = 1;
  for (std::size_t l = 0; l < cfg.conv_blocks.size(); ++l) {
    int out_c = cfg.conv_blocks[l][0];
    std::string tag = "conv" + std::to_string(l + 1);
    p.arrays.push_back(make_array(tag + ".weight", {out_c, in_c, 3, 3, 3}));
    p.arrays.push_back(make_array(tag + ".bias", {out_c}));
    in_c = out_c;
  }
  p.arrays.push_back(
      make_array("proj1.weight", {cfg.projection_hidden, cfg.feature_dim}));
  p.arrays.push_back(make_array("proj1.bias", {cfg.projection_hidden}));
  p.arrays.push_back(
      make_array("proj2.weight", {cfg.embedding_dim, cfg.projection_hidden}));
  p.arrays.push_back(make_array("proj2.bias", {cfg.embedding_dim}));
  return p;
}

ModelParams init_params(const EncoderConfig& cfg, std::uint64_t seed) {
  ModelParams p = param_skeleton(cfg);

  RngStream rng(seed, stream_tag::init);
  for (auto& a : p.arrays) {
    if (a.name.ends_with(".bias")) continue;  // biases stay zero
    // fan_in: product of all shape dims but the first (output) dim.
    std::size_t fan_in = 1;
    for (std::size_t i = 1; i < a.shape.size(); ++i)
      fan_in *= static_cast<std::size_t>(a.shape[i]);
    double limit = std::sqrt(3.0 / static_cast<double>(fan_in));
    for (double& v : a.value) v = rng.uniform(-limit, limit);
  }
  return p;
}

namespace {

// x indexed [c][z][y][x], row-major. Accumulates the 3x3x3 zero-padded
// convolution into out (pre-filled with the bias).
void conv3x3x3_forward(const std::vector<double>& in, StageDims id,
                       const std::vector<double>& w,
                       const std::vector<double>& b, int out_c,
                       std::vector<double>& out) {
  const int Z = id.z, Y = id.y, X = id.x, IC = id.c;
  const std::size_t plane = static_cast<std::size_t>(Y) * X;
  const std::size_t vol = static_cast<std::size_t>(Z) * plane;
  out.assign(static_cast<std::size_t>(out_c) * vol, 0.0);

  for (int oc = 0; oc < out_c; ++oc) {
    double* o = out.data() + static_cast<std::size_t>(oc) * vol;
    for (std::size_t i = 0; i < vol; ++i) o[i] = b[oc];
    for (int ic = 0; ic < IC; ++ic) {
      const double* xin = in.data() + static_cast<std::size_t>(ic) * vol;
      const double* wk =
          w.data() + (static_cast<std::size_t>(oc) * IC + ic) * 27;
      for (int dz = -1; dz <= 1; ++dz)
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            double wv = wk[((dz + 1) * 3 + (dy + 1)) * 3 + (dx + 1)];
            if (wv == 0.0) continue;
            int z0 = std::max(0, -dz), z1 = std::min(Z, Z - dz);
            int y0 = std::max(0, -dy), y1 = std::min(Y, Y - dy);
            int x0 = std::max(0, -dx), x1 = std::min(X, X - dx);
            for (int z = z0; z < z1; ++z)
              for (int y = y0; y < y1; ++y) {
                double* orow = o + z * plane + static_cast<std::size_t>(y) * X;
                const double* irow = xin + (z + dz) * plane +
                                     static_cast<std::size_t>(y + dy) * X;
                for (int x = x0; x < x1; ++x)
                  orow[x] += wv * irow[x + dx];
              }
          }
    }
  }
}

// dIn (accumulated) and dW/dB (accumulated) from dOut.
void conv3x3x3_backward(const std::vector<double>& in, StageDims id,
                        const std::vector<double>& w, int out_c,
                        const std::vector<double>& d_out,
                        std::vector<double>& d_in, std::vector<double>& d_w,
                        std::vector<double>& d_b) {
  const int Z = id.z, Y = id.y, X = id.x, IC = id.c;
  const std::size_t plane = static_cast<std::size_t>(Y) * X;
  const std::size_t vol = static_cast<std::size_t>(Z) * plane;

  for (int oc = 0; oc < out_c; ++oc) {
    const double* dout = d_out.data() + static_cast<std::size_t>(oc) * vol;
    double acc_b = 0.0;
    for (std::size_t i = 0; i < vol; ++i) acc_b += dout[i];
    d_b[oc] += acc_b;

    for (int ic = 0; ic < IC; ++ic) {
      const double* xin = in.data() + static_cast<std::size_t>(ic) * vol;
      double* din = d_in.data() + static_cast<std::size_t>(ic) * vol;
      const double* wk =
          w.data() + (static_cast<std::size_t>(oc) * IC + ic) * 27;
      double* dwk =
          d_w.data() + (static_cast<std::size_t>(oc) * IC + ic) * 27;
      for (int dz = -1; dz <= 1; ++dz)
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            const int ki = ((dz + 1) * 3 + (dy + 1)) * 3 + (dx + 1);
            const double wv = wk[ki];
            double acc_w = 0.0;
            int z0 = std::max(0, -dz), z1 = std::min(Z, Z - dz);
            int y0 = std::max(0, -dy), y1 = std::min(Y, Y - dy);
            int x0 = std::max(0, -dx), x1 = std::min(X, X - dx);
            for (int z = z0; z < z1; ++z)
              for (int y = y0; y < y1; ++y) {
                const double* drow =
                    dout + z * plane + static_cast<std::size_t>(y) * X;
                const double* irow = xin + (z + dz) * plane +
                                     static_cast<std::size_t>(y + dy) * X;
                double* dirow = din + (z + dz) * plane +
                                static_cast<std::size_t>(y + dy) * X;
                for (int x = x0; x < x1; ++x) {
                  acc_w += drow[x] * irow[x + dx];
                  dirow[x + dx] += wv * drow[x];
                }
              }
            dwk[ki] += acc_w;
          }
    }
  }
}

void avg_pool(const std::vector<double>& in, StageDims id, int k,
              std::vector<double>& out, StageDims& od) {
  od = {id.c, id.z / k, id.y / k, id.x / k};
  out.assign(od.count(), 0.0);
  const double inv = 1.0 / (static_cast<double>(k) * k * k);
  for (int c = 0; c < id.c; ++c)
    for (int z = 0; z < id.z; ++z)
      for (int y = 0; y < id.y; ++y)
        for (int x = 0; x < id.x; ++x) {
          std::size_t src =
              ((static_cast<std::size_t>(c) * id.z + z) * id.y + y) * id.x + x;
          std::size_t dst = ((static_cast<std::size_t>(c) * od.z + z / k) *
                                 od.y + y / k) * od.x + x / k;
          out[dst] += in[src] * inv;
        }
}

void avg_pool_backward(const std::vector<double>& d_out, StageDims id, int k,
                       std::vector<double>& d_in) {
  StageDims od{id.c, id.z / k, id.y / k, id.x / k};
  d_in.assign(id.count(), 0.0);
  const double inv = 1.0 / (static_cast<double>(k) * k * k);
  for (int c = 0; c < id.c; ++c)
    for (int z = 0; z < id.z; ++z)
      for (int y = 0; y < id.y; ++y)
        for (int x = 0; x < id.x; ++x) {
          std::size_t dst =
              ((static_cast<std::size_t>(c) * id.z + z) * id.y + y) * id.x + x;
          std::size_t src = ((static_cast<std::size_t>(c) * od.z + z / k) *
                                 od.y + y / k) * od.x + x / k;
          d_in[dst] = d_out[src] * inv;
        }
}

void check_finite(const std::vector<double>& v, const std::string& layer) {
  for (double x : v)
    if (!std::isfinite(x))
      throw NumericError("non-finite activation in layer " + layer);
}

}  // namespace

Model::Model(ModelParams params) : params_(std::move(params)) {
  params_.cfg.validate();
}

namespace {

struct LayerRefs {
  // Indices into ModelParams::arrays for quick access.
  std::vector<int> conv_w, conv_b;
  int p1w, p1b, p2w, p2b;
};

LayerRefs layer_refs(const ModelParams& p) {
  LayerRefs r;
  const int L = static_cast<int>(p.cfg.conv_blocks.size());
  for (int l = 0; l < L; ++l) {
    r.conv_w.push_back(2 * l);
    r.conv_b.push_back(2 * l + 1);
  }
  r.p1w = 2 * L;
  r.p1b = 2 * L + 1;
  r.p2w = 2 * L + 2;
  r.p2b = 2 * L + 3;
  return r;
}

// Runs the encoder for one sample, filling trace entries. Returns GAP feature.
void encoder_forward(const ModelParams& p, const LayerRefs& refs,
                     const Volume& v, const std::vector<StageDims>& dims,
                     SampleTrace& t) {
  const int L = static_cast<int>(p.cfg.conv_blocks.size());
  t.block_inputs.resize(L + 1);
  t.block_acts.resize(L);

  t.block_inputs[0].resize(v.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    t.block_inputs[0][i] = static_cast<double>(v.data[i]);

  for (int l = 0; l < L; ++l) {
    const int out_c = p.cfg.conv_blocks[l][0];
    const int k = p.cfg.conv_blocks[l][1];
    conv3x3x3_forward(t.block_inputs[l], dims[l],
                      p.arrays[refs.conv_w[l]].value,
                      p.arrays[refs.conv_b[l]].value, out_c, t.block_acts[l]);
    // Checked before the rectifier, which would silently absorb a NaN.
    check_finite(t.block_acts[l], "conv" + std::to_string(l + 1));
    for (double& a : t.block_acts[l]) a = a > 0.0 ? a : 0.0;
    StageDims act_dims{out_c, dims[l].z, dims[l].y, dims[l].x};
    StageDims pooled;
    avg_pool(t.block_acts[l], act_dims, k, t.block_inputs[l + 1], pooled);
  }

  const StageDims& last = dims[L];
  const std::size_t spatial = static_cast<std::size_t>(last.z) * last.y * last.x;
  t.feat.assign(p.cfg.feature_dim, 0.0);
  for (int c = 0; c < last.c; ++c) {
    double acc = 0.0;
    const double* src =
        t.block_inputs[L].data() + static_cast<std::size_t>(c) * spatial;
    for (std::size_t i = 0; i < spatial; ++i) acc += src[i];
    t.feat[c] = acc / static_cast<double>(spatial);
  }
  check_finite(t.feat, "gap");
}

void projection_forward(const ModelParams& p, const LayerRefs& refs,
                        SampleTrace& t) {
  const int H = p.cfg.projection_hidden;
  const int F = p.cfg.feature_dim;
  const int D = p.cfg.embedding_dim;
  const auto& w1 = p.arrays[refs.p1w].value;
  const auto& b1 = p.arrays[refs.p1b].value;
  const auto& w2 = p.arrays[refs.p2w].value;
  const auto& b2 = p.arrays[refs.p2b].value;

  t.hidden.assign(H, 0.0);
  for (int h = 0; h < H; ++h) {
    double acc = b1[h];
    for (int f = 0; f < F; ++f)
      acc += w1[static_cast<std::size_t>(h) * F + f] * t.feat[f];
    t.hidden[h] = acc > 0.0 ? acc : 0.0;
  }
  t.pre_norm.assign(D, 0.0);
  double sq = 0.0;
  for (int o = 0; o < D; ++o) {
    double acc = b2[o];
    for (int h = 0; h < H; ++h)
      acc += w2[static_cast<std::size_t>(o) * H + h] * t.hidden[h];
    t.pre_norm[o] = acc;
    sq += acc * acc;
  }
  check_finite(t.pre_norm, "proj2");
  t.norm = std::sqrt(sq);
  if (t.norm == 0.0)
    throw NumericError(
        "projection output is exactly zero; cannot normalize onto the "
        "hypersphere");
  t.z.assign(D, 0.0);
  for (int o = 0; o < D; ++o) t.z[o] = t.pre_norm[o] / t.norm;
}

std::vector<StageDims> plan_dims(const EncoderConfig& cfg,
                                 const std::array<int, 3>& vol_dims) {
  std::vector<StageDims> dims;
  StageDims d{1, vol_dims[0], vol_dims[1], vol_dims[2]};
  dims.push_back(d);
  for (std::size_t l = 0; l < cfg.conv_blocks.size(); ++l) {
    const int k = cfg.conv_blocks[l][1];
    if (d.z % k != 0 || d.y % k != 0 || d.x % k != 0)
      throw ShapeError("block " + std::to_string(l + 1) + " input " +
                       std::to_string(d.z) + "x" + std::to_string(d.y) + "x" +
                       std::to_string(d.x) +
                       " not divisible by downsample factor " +
                       std::to_string(k));
    d = StageDims{cfg.conv_blocks[l][0], d.z / k, d.y / k, d.x / k};
    dims.push_back(d);
  }
  return dims;
}

void check_batch(const std::vector<Volume>& batch) {
  if (batch.empty()) throw ShapeError("empty batch");
  for (const auto& v : batch) {
    if (v.data.size() != v.size())
      throw ShapeError("volume data length does not match dims");
    if (v.dims != batch[0].dims)
      throw ShapeError("batch volumes have differing dims");
  }
}

}  // namespace

EmbeddingMatrix Model::embed(const std::vector<Volume>& batch,
                             BatchTrace& trace) const {
  check_batch(batch);
  const LayerRefs refs = layer_refs(params_);
  trace = BatchTrace{};
  trace.input_dims = plan_dims(params_.cfg, batch[0].dims);
  trace.samples.assign(batch.size(), SampleTrace{});
  trace.has_projection = true;

  EmbeddingMatrix z(static_cast<int>(batch.size()), params_.cfg.embedding_dim);
  parallel_for(batch.size(), [&](std::size_t i) {
    SampleTrace& t = trace.samples[i];
    encoder_forward(params_, refs, batch[i], trace.input_dims, t);
    projection_forward(params_, refs, t);
    for (int o = 0; o < params_.cfg.embedding_dim; ++o)
      z(static_cast<int>(i), o) = t.z[o];
  });
  trace.valid = true;
  return z;
}

EmbeddingMatrix Model::embed(const std::vector<Volume>& batch) {
  return embed(batch, trace_);
}

Matrix Model::features(const std::vector<Volume>& batch,
                       BatchTrace& trace) const {
  check_batch(batch);
  const LayerRefs refs = layer_refs(params_);
  trace = BatchTrace{};
  trace.input_dims = plan_dims(params_.cfg, batch[0].dims);
  trace.samples.assign(batch.size(), SampleTrace{});
  trace.has_projection = false;

  Matrix f(static_cast<int>(batch.size()), params_.cfg.feature_dim);
  parallel_for(batch.size(), [&](std::size_t i) {
    SampleTrace& t = trace.samples[i];
    encoder_forward(params_, refs, batch[i], trace.input_dims, t);
    for (int c = 0; c < params_.cfg.feature_dim; ++c)
      f(static_cast<int>(i), c) = t.feat[c];
  });
  trace.valid = true;
  return f;
}

Matrix Model::features(const std::vector<Volume>& batch) const {
  BatchTrace scratch;
  return features(batch, scratch);
}

namespace {

// Encoder backward for one sample given dLoss/dfeat; accumulates array grads.
void encoder_backward(ModelParams& p, const LayerRefs& refs,
                      const std::vector<StageDims>& dims, const SampleTrace& t,
                      const double* d_feat) {
  const int L = static_cast<int>(p.cfg.conv_blocks.size());
  const StageDims& last = dims[L];
  const std::size_t spatial =
      static_cast<std::size_t>(last.z) * last.y * last.x;

  // GAP backward into the last pooled map.
  std::vector<double> d_pooled(last.count());
  for (int c = 0; c < last.c; ++c) {
    double g = d_feat[c] / static_cast<double>(spatial);
    double* dst = d_pooled.data() + static_cast<std::size_t>(c) * spatial;
    for (std::size_t i = 0; i < spatial; ++i) dst[i] = g;
  }

  for (int l = L - 1; l >= 0; --l) {
    const int out_c = p.cfg.conv_blocks[l][0];
    const int k = p.cfg.conv_blocks[l][1];
    StageDims act_dims{out_c, dims[l].z, dims[l].y, dims[l].x};

    std::vector<double> d_act;
    avg_pool_backward(d_pooled, act_dims, k, d_act);
    const std::vector<double>& act = t.block_acts[l];
    for (std::size_t i = 0; i < d_act.size(); ++i)
      if (act[i] <= 0.0) d_act[i] = 0.0;

    std::vector<double> d_in(dims[l].count(), 0.0);
    conv3x3x3_backward(t.block_inputs[l], dims[l],
                       p.arrays[refs.conv_w[l]].value, out_c, d_act, d_in,
                       p.arrays[refs.conv_w[l]].grad,
                       p.arrays[refs.conv_b[l]].grad);
    d_pooled = std::move(d_in);
  }
}

void projection_backward(ModelParams& p, const LayerRefs& refs,
                         const SampleTrace& t, const double* d_z,
                         std::vector<double>& d_feat) {
  const int H = p.cfg.projection_hidden;
  const int F = p.cfg.feature_dim;
  const int D = p.cfg.embedding_dim;
  const auto& w1 = p.arrays[refs.p1w].value;
  const auto& w2 = p.arrays[refs.p2w].value;

  // Normalization Jacobian: du = (dz - (dz . z) z) / |u|.
  double dot = 0.0;
  for (int o = 0; o < D; ++o) dot += d_z[o] * t.z[o];
  std::vector<double> d_u(D);
  for (int o = 0; o < D; ++o) d_u[o] = (d_z[o] - dot * t.z[o]) / t.norm;

  auto& g_w2 = p.arrays[refs.p2w].grad;
  auto& g_b2 = p.arrays[refs.p2b].grad;
  std::vector<double> d_hidden(H, 0.0);
  for (int o = 0; o < D; ++o) {
    g_b2[o] += d_u[o];
    for (int h = 0; h < H; ++h) {
      g_w2[static_cast<std::size_t>(o) * H + h] += d_u[o] * t.hidden[h];
      d_hidden[h] += d_u[o] * w2[static_cast<std::size_t>(o) * H + h];
    }
  }
  for (int h = 0; h < H; ++h)
    if (t.hidden[h] <= 0.0) d_hidden[h] = 0.0;

  auto& g_w1 = p.arrays[refs.p1w].grad;
  auto& g_b1 = p.arrays[refs.p1b].grad;
  d_feat.assign(F, 0.0);
  for (int h = 0; h < H; ++h) {
    g_b1[h] += d_hidden[h];
    for (int f = 0; f < F; ++f) {
      g_w1[static_cast<std::size_t>(h) * F + f] += d_hidden[h] * t.feat[f];
      d_feat[f] += d_hidden[h] * w1[static_cast<std::size_t>(h) * F + f];
    }
  }
}

}  // namespace

void Model::backward(const BatchTrace& trace, const Matrix& upstream) {
  if (!trace.valid) throw StateError("backward called without a forward pass");
  if (!trace.has_projection)
    throw StateError("trace lacks projection activations; use "
                     "backward_features for encoder-only traces");
  require_shape(upstream, static_cast<int>(trace.samples.size()),
                params_.cfg.embedding_dim, "upstream embedding gradient");

  const LayerRefs refs = layer_refs(params_);
  // Sequential over samples: accumulation order is fixed for determinism.
  for (std::size_t i = 0; i < trace.samples.size(); ++i) {
    std::vector<double> d_feat;
    projection_backward(params_, refs, trace.samples[i],
                        upstream.row(static_cast<int>(i)).data(), d_feat);
    encoder_backward(params_, refs, trace.input_dims, trace.samples[i],
                     d_feat.data());
  }
}

void Model::backward(const Matrix& upstream) {
  if (!trace_.valid) throw StateError("backward called without a forward pass");
  backward(trace_, upstream);
}

void Model::backward_features(const BatchTrace& trace, const Matrix& upstream) {
  if (!trace.valid) throw StateError("backward called without a forward pass");
  require_shape(upstream, static_cast<int>(trace.samples.size()),
                params_.cfg.feature_dim, "upstream feature gradient");
  const LayerRefs refs = layer_refs(params_);
  for (std::size_t i = 0; i < trace.samples.size(); ++i)
    encoder_backward(params_, refs, trace.input_dims, trace.samples[i],
                     upstream.row(static_cast<int>(i)).data());
}

}  // namespace yaware
