#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "yaware/errors.hpp"

namespace yaware {

// Dense row-major matrix of doubles. Used for embeddings (n x d, unit rows),
// kernel weight matrices (n x n, row-stochastic) and loss gradients.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(int r, int c, double fill = 0.0)
      : rows(r), cols(c), data(static_cast<std::size_t>(r) * static_cast<std::size_t>(c), fill) {}

  double& operator()(int i, int j) { return data[static_cast<std::size_t>(i) * cols + j]; }
  double operator()(int i, int j) const { return data[static_cast<std::size_t>(i) * cols + j]; }

  std::span<double> row(int i) { return {data.data() + static_cast<std::size_t>(i) * cols,
                                          static_cast<std::size_t>(cols)}; }
  std::span<const double> row(int i) const {
    return {data.data() + static_cast<std::size_t>(i) * cols, static_cast<std::size_t>(cols)};
  }

  bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }
};

using EmbeddingMatrix = Matrix;
using WeightMatrix = Matrix;

inline void require_shape(const Matrix& m, int rows, int cols, const char* what) {
  if (m.rows != rows || m.cols != cols)
    throw ShapeError(std::string(what) + ": expected " + std::to_string(rows) + "x" +
                     std::to_string(cols) + ", got " + std::to_string(m.rows) + "x" +
                     std::to_string(m.cols));
}

}  // namespace yaware
