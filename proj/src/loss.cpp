#include "yaware/loss.hpp"

#include <algorithm>
#include <cmath>

#include "yaware/errors.hpp"

namespace yaware {

std::string to_string(Objective o) {
  return o == Objective::yaware ? "yaware" : "infonce";
}

Objective objective_from_string(const std::string& s) {
  if (s == "yaware") return Objective::yaware;
  if (s == "infonce") return Objective::infonce;
  throw ParameterError("unknown objective \"" + s + "\"");
}

void LossConfig::validate() const {
  if (!(temperature > 0.0))
    throw ParameterError("temperature must be positive");
  kernel.validate();
}

SimilarityMatrix similarity_matrix(const EmbeddingMatrix& z1,
                                   const EmbeddingMatrix& z2, double tau) {
  if (!(tau > 0.0)) throw ParameterError("temperature must be positive");
  if (!z1.same_shape(z2))
    throw ShapeError("similarity_matrix: embedding shapes differ");
  if (z1.rows < 1 || z1.cols < 1)
    throw ShapeError("similarity_matrix: empty embeddings");

  SimilarityMatrix out;
  out.z1 = z1;
  out.z2 = z2;
  out.tau = tau;
  out.s = Matrix(z1.rows, z1.rows);
  for (int i = 0; i < z1.rows; ++i)
    for (int j = 0; j < z1.rows; ++j) {
      double dot = 0.0;
      for (int c = 0; c < z1.cols; ++c) dot += z1(i, c) * z2(j, c);
      out.s(i, j) = dot / tau;
    }
  return out;
}

namespace {

// Shared weighted core. With W = identity this is plain InfoNCE.
//   value     = (1/n) sum_i [lse_i - sum_k W[i][k] S[i][k]]
//   dL/dS[i][j] = (softmax_i[j] - W[i][j]) / n
// where lse_i = log((1/n) sum_j exp(S[i][j])), softmax row-stabilized.
LossResult weighted_nce(const SimilarityMatrix& sm, const WeightMatrix& w) {
  const Matrix& s = sm.s;
  const int n = s.rows;
  const int d = sm.z1.cols;
  require_shape(w, n, n, "weight matrix");

  double value = 0.0;
  Matrix ds(n, n);
  for (int i = 0; i < n; ++i) {
    double row_max = s(i, 0);
    for (int j = 1; j < n; ++j) row_max = std::max(row_max, s(i, j));
    double sum_exp = 0.0;
    for (int j = 0; j < n; ++j) sum_exp += std::exp(s(i, j) - row_max);
    double lse = row_max + std::log(sum_exp) - std::log(static_cast<double>(n));

    double weighted_s = 0.0;
    for (int k = 0; k < n; ++k) weighted_s += w(i, k) * s(i, k);
    value += lse - weighted_s;

    for (int j = 0; j < n; ++j)
      ds(i, j) = (std::exp(s(i, j) - row_max) / sum_exp - w(i, j)) / n;
  }
  value /= n;
  if (!std::isfinite(value))
    throw NumericError("contrastive loss is not finite");

  LossResult out;
  out.value = value;
  out.grad_z1 = Matrix(n, d);
  out.grad_z2 = Matrix(n, d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double g = ds(i, j) / sm.tau;
      for (int c = 0; c < d; ++c) {
        out.grad_z1(i, c) += g * sm.z2(j, c);
        out.grad_z2(j, c) += g * sm.z1(i, c);
      }
    }
  return out;
}

WeightMatrix identity_weights(int n) {
  Matrix w(n, n);
  for (int i = 0; i < n; ++i) w(i, i) = 1.0;
  return w;
}

}  // namespace

LossResult infonce(const SimilarityMatrix& s) {
  if (s.s.rows != s.s.cols) throw ShapeError("similarity matrix not square");
  return weighted_nce(s, identity_weights(s.s.rows));
}

LossResult y_aware_infonce(const SimilarityMatrix& s, const WeightMatrix& w) {
  if (s.s.rows != s.s.cols) throw ShapeError("similarity matrix not square");
  require_shape(w, s.s.rows, s.s.cols, "weight matrix");
  for (int i = 0; i < w.rows; ++i) {
    double sum = 0.0;
    for (int k = 0; k < w.cols; ++k) {
      if (w(i, k) < 0.0)
        throw ValidationError("weight matrix has a negative entry");
      sum += w(i, k);
    }
    if (std::abs(sum - 1.0) > 1e-6)
      throw ValidationError("weight matrix row " + std::to_string(i) +
                            " sums to " + std::to_string(sum) +
                            ", expected 1");
  }
  return weighted_nce(s, w);
}

LossResult supcon_discrete(const SimilarityMatrix& s,
                           const std::vector<double>& labels) {
  if (static_cast<int>(labels.size()) != s.n())
    throw ShapeError("labels length does not match batch size");
  KernelConfig delta;
  delta.kind = KernelKind::delta;
  delta.tolerance = 0.0;
  return y_aware_infonce(s, weight_matrix(labels, delta));
}

LossResult y_aware_symmetric(const EmbeddingMatrix& z1,
                             const EmbeddingMatrix& z2, double tau,
                             const WeightMatrix& w) {
  LossResult a = y_aware_infonce(similarity_matrix(z1, z2, tau), w);
  LossResult b = y_aware_infonce(similarity_matrix(z2, z1, tau), w);
  LossResult out;
  out.value = 0.5 * (a.value + b.value);
  out.grad_z1 = a.grad_z1;
  out.grad_z2 = a.grad_z2;
  for (std::size_t i = 0; i < out.grad_z1.data.size(); ++i) {
    out.grad_z1.data[i] = 0.5 * (a.grad_z1.data[i] + b.grad_z2.data[i]);
    out.grad_z2.data[i] = 0.5 * (a.grad_z2.data[i] + b.grad_z1.data[i]);
  }
  return out;
}

}  // namespace yaware
