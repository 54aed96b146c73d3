#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "atlas/rng.hpp"
#include "atlas/tensor.hpp"

namespace atlas {

// One learnable tensor with its gradient and Adam moment slots.
struct Param {
  std::string name;
  Tensor value;
  Tensor grad;
  Tensor m1;  // first moment
  Tensor m2;  // second moment
};

class ParamStore {
 public:
  // Glorot-uniform init: +-sqrt(6 / (fan_in + fan_out)).
  Param& add_glorot(const std::string& name, int64_t rows, int64_t cols, Rng& rng);

  // Uniform in [-scale, scale].
  Param& add_uniform(const std::string& name, int64_t rows, int64_t cols, double scale,
                     Rng& rng);

  Param& add_zeros(const std::string& name, int64_t rows, int64_t cols);

  Param& at(size_t i) { return params_[i]; }
  const Param& at(size_t i) const { return params_[i]; }
  size_t count() const { return params_.size(); }

  Param* find(const std::string& name);

  void zero_grads();

  int64_t total_values() const;

  // Copies values only (shapes must match); used to restore best-epoch weights.
  void copy_values_from(const ParamStore& other);

  std::vector<Param>& all() { return params_; }
  const std::vector<Param>& all() const { return params_; }

  // Versioned binary blob: per-tensor name, shape, little-endian f64 payload.
  void save_values(std::ostream& out) const;
  void load_values(std::istream& in);  // shapes and names must match

 private:
  std::vector<Param> params_;
};

}  // namespace atlas
