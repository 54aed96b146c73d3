#include "atlas/params.hpp"

#include <cmath>
#include <istream>
#include <ostream>

#include "atlas/binio.hpp"
#include "atlas/errors.hpp"

namespace atlas {

namespace {
constexpr char kMagic[] = "ATLSPARM";
constexpr uint32_t kVersion = 1;
}  // namespace

Param& ParamStore::add_glorot(const std::string& name, int64_t rows, int64_t cols, Rng& rng) {
  const double scale = std::sqrt(6.0 / static_cast<double>(rows + cols));
  return add_uniform(name, rows, cols, scale, rng);
}

Param& ParamStore::add_uniform(const std::string& name, int64_t rows, int64_t cols,
                               double scale, Rng& rng) {
  Param& p = add_zeros(name, rows, cols);
  for (double& v : p.value.data) v = rng.uniform(-scale, scale);
  return p;
}

Param& ParamStore::add_zeros(const std::string& name, int64_t rows, int64_t cols) {
  Param p;
  p.name = name;
  p.value = Tensor::zeros(rows, cols);
  p.grad = Tensor::zeros(rows, cols);
  p.m1 = Tensor::zeros(rows, cols);
  p.m2 = Tensor::zeros(rows, cols);
  params_.push_back(std::move(p));
  return params_.back();
}

Param* ParamStore::find(const std::string& name) {
  for (Param& p : params_) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

void ParamStore::zero_grads() {
  for (Param& p : params_) p.grad.fill(0.0);
}

int64_t ParamStore::total_values() const {
  int64_t n = 0;
  for (const Param& p : params_) n += p.value.size();
  return n;
}

void ParamStore::copy_values_from(const ParamStore& other) {
  if (other.params_.size() != params_.size()) {
    throw DataError("param store mismatch while copying values");
  }
  for (size_t i = 0; i < params_.size(); ++i) {
    if (!params_[i].value.same_shape(other.params_[i].value)) {
      throw DataError("param shape mismatch while copying values: " + params_[i].name);
    }
    params_[i].value.data = other.params_[i].value.data;
  }
}

void ParamStore::save_values(std::ostream& out) const {
  out.write(kMagic, 8);
  binio::write_u32(out, kVersion);
  binio::write_u32(out, static_cast<uint32_t>(params_.size()));
  for (const Param& p : params_) {
    binio::write_str(out, p.name);
    binio::write_i64(out, p.value.rows);
    binio::write_i64(out, p.value.cols);
    for (double v : p.value.data) binio::write_f64(out, v);
  }
}

void ParamStore::load_values(std::istream& in) {
  char magic[8];
  in.read(magic, 8);
  if (!in || std::string(magic, 8) != kMagic) throw DataError("bad parameter blob magic");
  if (binio::read_u32(in) != kVersion) throw DataError("unsupported parameter blob version");
  const uint32_t count = binio::read_u32(in);
  if (count != params_.size()) throw DataError("parameter count mismatch in blob");
  for (Param& p : params_) {
    const std::string name = binio::read_str(in);
    const int64_t rows = binio::read_i64(in);
    const int64_t cols = binio::read_i64(in);
    if (name != p.name || rows != p.value.rows || cols != p.value.cols) {
      throw DataError("parameter layout mismatch in blob at '" + name + "'");
    }
    for (double& v : p.value.data) v = binio::read_f64(in);
  }
}

}  // namespace atlas
