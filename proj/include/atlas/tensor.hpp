#pragma once

#include <cstdint>
#include <vector>

namespace atlas {

// Dense row-major f64 matrix (rank <= 2; vectors are n x 1 or 1 x n).
struct Tensor {
  int64_t rows = 0;
  int64_t cols = 0;
  std::vector<double> data;

  Tensor() = default;
  Tensor(int64_t r, int64_t c) : rows(r), cols(c), data(static_cast<size_t>(r * c), 0.0) {}

  static Tensor zeros(int64_t r, int64_t c) { return Tensor(r, c); }

  int64_t size() const { return rows * cols; }
  bool empty() const { return size() == 0; }

  double* row(int64_t i) { return data.data() + i * cols; }
  const double* row(int64_t i) const { return data.data() + i * cols; }

  double& at(int64_t r, int64_t c) { return data[static_cast<size_t>(r * cols + c)]; }
  double at(int64_t r, int64_t c) const { return data[static_cast<size_t>(r * cols + c)]; }

  bool same_shape(const Tensor& o) const { return rows == o.rows && cols == o.cols; }

  void fill(double v) { std::fill(data.begin(), data.end(), v); }
};

}  // namespace atlas
