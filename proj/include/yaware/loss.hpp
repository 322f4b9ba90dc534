#pragma once

#include <string>
#include <vector>

#include "yaware/kernel.hpp"
#include "yaware/matrix.hpp"

namespace yaware {

enum class Objective { yaware, infonce };

std::string to_string(Objective o);
Objective objective_from_string(const std::string& s);

struct LossConfig {
  double temperature = 0.1;
  KernelConfig kernel;  // defaults to rbf sigma 5
  bool symmetric = false;
  Objective objective = Objective::yaware;

  void validate() const;  // temperature > 0
};

// S[i][j] = dot(Z1 row i, Z2 row j) / tau. Z1, Z2 and tau are retained so the
// loss can chain its S-gradient back to the embeddings.
struct SimilarityMatrix {
  Matrix s;
  Matrix z1, z2;
  double tau = 1.0;

  int n() const { return s.rows; }
};

struct LossResult {
  double value = 0.0;
  Matrix grad_z1, grad_z2;  // n x d, d(value)/dZ as free variables
};

SimilarityMatrix similarity_matrix(const EmbeddingMatrix& z1,
                                   const EmbeddingMatrix& z2, double tau);

// value = (1/n) sum_i -log( exp(S[i][i]) / ((1/n) sum_j exp(S[i][j])) ).
// The 1/n inside the denominator shifts the value by -ln n, so it can be
// negative. Log-sum-exp is max-subtracted.
LossResult infonce(const SimilarityMatrix& s);

// value = (1/n) sum_i sum_k -W[i][k] log( exp(S[i][k]) / ((1/n) sum_j
// exp(S[i][j])) ). W must be row-stochastic; rows off by more than 1e-6 are
// rejected. InfoNCE is the W = identity case.
LossResult y_aware_infonce(const SimilarityMatrix& s, const WeightMatrix& w);

// y_aware_infonce with the delta-kernel weights of the given category codes:
// uniform weight over samples sharing the anchor's label.
LossResult supcon_discrete(const SimilarityMatrix& s,
                           const std::vector<double>& labels);

// 0.5 * (loss with Z1 as anchors + loss with Z2 as anchors), same W both ways.
LossResult y_aware_symmetric(const EmbeddingMatrix& z1,
                             const EmbeddingMatrix& z2, double tau,
                             const WeightMatrix& w);

}  // namespace yaware
