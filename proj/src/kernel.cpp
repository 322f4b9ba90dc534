#include "yaware/kernel.hpp"

#include <cmath>
#include <limits>

#include "yaware/errors.hpp"

namespace yaware {

std::string to_string(KernelKind k) {
  return k == KernelKind::rbf ? "rbf" : "delta";
}

KernelKind kernel_kind_from_string(const std::string& s) {
  if (s == "rbf") return KernelKind::rbf;
  if (s == "delta") return KernelKind::delta;
  throw ParameterError("unknown kernel kind \"" + s + "\"");
}

void KernelConfig::validate() const {
  if (kind == KernelKind::rbf && !(sigma >= 0.0))
    throw ParameterError("rbf sigma must be nonnegative");
  if (tolerance < 0.0)
    throw ParameterError("delta tolerance must be nonnegative");
}

double rbf_weight(double y1, double y2, double sigma) {
  if (!(sigma > 0.0)) throw ParameterError("rbf sigma must be positive");
  double d = y1 - y2;
  return std::exp(-(d * d) / (2.0 * sigma * sigma));
}

namespace {

double raw_weight(double a, double b, const KernelConfig& cfg) {
  if (cfg.kind == KernelKind::rbf) return rbf_weight(a, b, cfg.sigma);
  return std::abs(a - b) <= cfg.tolerance ? 1.0 : 0.0;
}

WeightMatrix normalize_rows(Matrix w) {
  for (int i = 0; i < w.rows; ++i) {
    double sum = 0.0;
    for (int k = 0; k < w.cols; ++k) sum += w(i, k);
    if (!(sum > 0.0))
      throw NumericError("weight matrix row " + std::to_string(i) +
                         " sums to zero");
    for (int k = 0; k < w.cols; ++k) w(i, k) /= sum;
  }
  return w;
}

}  // namespace

WeightMatrix weight_matrix(const std::vector<MetadataColumn>& meta) {
  if (meta.empty()) throw ParameterError("no metadata columns");
  const std::size_t n = meta[0].values.size();
  if (n == 0) throw ParameterError("empty metadata column");
  for (const auto& c : meta) {
    c.kernel.validate();
    if (c.kernel.kind == KernelKind::rbf && !(c.kernel.sigma > 0.0))
      throw ParameterError("rbf sigma must be positive");
    if (c.values.size() != n)
      throw ParameterError("metadata columns differ in length");
  }

  Matrix w(static_cast<int>(n), static_cast<int>(n));
  for (int i = 0; i < w.rows; ++i)
    for (int k = 0; k < w.cols; ++k) {
      double prod = 1.0;
      for (const auto& c : meta)
        prod *= raw_weight(c.values[i], c.values[k], c.kernel);
      w(i, k) = prod;
    }
  return normalize_rows(std::move(w));
}

WeightMatrix weight_matrix(const std::vector<double>& y,
                           const KernelConfig& cfg) {
  return weight_matrix(std::vector<MetadataColumn>{{y, cfg}});
}

WeightMatrix degenerate_sigma_weights(const std::vector<double>& y,
                                      double sigma) {
  if (y.empty()) throw ParameterError("empty metadata vector");
  bool zero = sigma < 1e-12;
  bool inf = std::isinf(sigma) && sigma > 0.0;
  if (!zero && !inf)
    throw ParameterError(
        "degenerate_sigma_weights expects sigma < 1e-12 or +inf");

  const int n = static_cast<int>(y.size());
  Matrix w(n, n);
  if (inf) {
    double u = 1.0 / n;
    for (double& v : w.data) v = u;
    return w;
  }
  // sigma -> 0: uniform over exact duplicates; identity when all distinct.
  KernelConfig delta;
  delta.kind = KernelKind::delta;
  delta.tolerance = 0.0;
  return weight_matrix(y, delta);
}

WeightMatrix batch_weight_matrix(const std::vector<double>& y,
                                 const KernelConfig& cfg) {
  cfg.validate();
  if (cfg.kind == KernelKind::rbf &&
      (cfg.sigma < 1e-12 || std::isinf(cfg.sigma)))
    return degenerate_sigma_weights(y, cfg.sigma < 1e-12 ? 0.0 : cfg.sigma);
  return weight_matrix(y, cfg);
}

}  // namespace yaware
