#pragma once

#include <string>
#include <vector>

#include "yaware/matrix.hpp"

namespace yaware {

enum class KernelKind { rbf, delta };

std::string to_string(KernelKind k);
KernelKind kernel_kind_from_string(const std::string& s);

struct KernelConfig {
  KernelKind kind = KernelKind::rbf;
  double sigma = 5.0;       // rbf width; 0 and +inf act as limit sentinels
  double tolerance = 0.0;   // delta equality tolerance

  void validate() const;
};

// exp(-(y1-y2)^2 / (2 sigma^2)), in (0, 1], symmetric.
double rbf_weight(double y1, double y2, double sigma);

// One metadata column with its own kernel; multi-metadata weights multiply
// columns' kernels elementwise before row normalization.
struct MetadataColumn {
  std::vector<double> values;
  KernelConfig kernel;
};

// Row-stochastic weight matrix W[i][k] = prod_m w_m(y_i, y_k) / row sum.
// Diagonal raw weight is 1 per column, so rows always normalize.
WeightMatrix weight_matrix(const std::vector<MetadataColumn>& meta);
WeightMatrix weight_matrix(const std::vector<double>& y,
                           const KernelConfig& cfg);

// Limit cases: sigma < 1e-12 is treated as 0 and gives the delta-kernel
// weights over exact duplicates (identity when y are pairwise distinct);
// sigma = +inf gives the uniform matrix, every entry 1/n.
WeightMatrix degenerate_sigma_weights(const std::vector<double>& y,
                                      double sigma);

// Dispatches on the sentinel sigmas above, otherwise plain weight_matrix.
// This is the entry point the training loop uses per batch.
WeightMatrix batch_weight_matrix(const std::vector<double>& y,
                                 const KernelConfig& cfg);

}  // namespace yaware
