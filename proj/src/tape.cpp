#include "atlas/tape.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "atlas/errors.hpp"
#include "atlas/kernels/kernels.hpp"

namespace atlas {

namespace {

const kernels::Ops& ops() { return kernels::active(); }

Tensor transpose(const Tensor& a) {
  Tensor t(a.cols, a.rows);
  for (int64_t i = 0; i < a.rows; ++i) {
    const double* src = a.row(i);
    for (int64_t j = 0; j < a.cols; ++j) t.at(j, i) = src[j];
  }
  return t;
}

double stable_sigmoid(double z) {
  if (z >= 0.0) {
    return 1.0 / (1.0 + std::exp(-z));
  }
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// softplus(u) = log(1 + exp(u)) without overflow.
double softplus(double u) {
  const double a = u > 0.0 ? u : 0.0;
  return a + std::log1p(std::exp(-std::abs(u)));
}

}  // namespace

void Tape::check_finite(const Tensor& t, const char* op) const {
  if (!ops().all_finite(t.size(), t.data.data())) {
    throw NumericError(std::string("non-finite value produced by op '") + op + "'");
  }
}

Tape::NodeId Tape::push(Tensor value, bool requires_grad, std::function<void(Tape&)> back) {
  Node n;
  n.value = std::move(value);
  n.requires_grad = requires_grad;
  if (requires_grad) n.grad = Tensor::zeros(n.value.rows, n.value.cols);
  n.backward = std::move(back);
  nodes_.push_back(std::move(n));
  return static_cast<NodeId>(nodes_.size() - 1);
}

Tape::NodeId Tape::input(Tensor value) {
  check_finite(value, "input");
  return push(std::move(value), false, nullptr);
}

Tape::NodeId Tape::param(Param& p) {
  check_finite(p.value, "param");
  Param* ext = &p;
  const NodeId id = push(p.value, true, nullptr);
  node(id).backward = [id, ext](Tape& t) {
    const Tensor& g = t.node(id).grad;
    ops().axpy(g.size(), 1.0, g.data.data(), ext->grad.data.data());
  };
  return id;
}

Tape::NodeId Tape::matmul(NodeId a, NodeId b) {
  const Tensor& va = val(a);
  const Tensor& vb = val(b);
  if (va.cols != vb.rows) throw NumericError("matmul: inner dimensions differ");
  Tensor out(va.rows, vb.cols);
  ops().gemm_nn(va.rows, vb.cols, va.cols, va.data.data(), vb.data.data(), 0.0,
                out.data.data());
  check_finite(out, "matmul");
  const bool rg = node(a).requires_grad || node(b).requires_grad;
  const NodeId id = push(std::move(out), rg, nullptr);
  if (rg) {
    node(id).backward = [id, a, b](Tape& t) {
      const Tensor& dc = t.node(id).grad;
      const Tensor& ta = t.val(a);
      const Tensor& tb = t.val(b);
      if (t.node(a).requires_grad) {
        const Tensor bt = transpose(tb);
        ops().gemm_nn(dc.rows, bt.cols, dc.cols, dc.data.data(), bt.data.data(), 1.0,
                      t.node(a).grad.data.data());
      }
      if (t.node(b).requires_grad) {
        const Tensor at = transpose(ta);
        ops().gemm_nn(at.rows, dc.cols, at.cols, at.data.data(), dc.data.data(), 1.0,
                      t.node(b).grad.data.data());
      }
    };
  }
  return id;
}

Tape::NodeId Tape::add_bias(NodeId x, NodeId bias) {
  const Tensor& vx = val(x);
  const Tensor& vb = val(bias);
  if (vb.rows != 1 || vb.cols != vx.cols) throw NumericError("add_bias: bias shape mismatch");
  Tensor out(vx.rows, vx.cols);
  for (int64_t i = 0; i < vx.rows; ++i) {
    ops().vadd(vx.cols, vx.row(i), vb.row(0), out.row(i));
  }
  check_finite(out, "add_bias");
  const bool rg = node(x).requires_grad || node(bias).requires_grad;
  const NodeId id = push(std::move(out), rg, nullptr);
  if (rg) {
    node(id).backward = [id, x, bias](Tape& t) {
      const Tensor& dy = t.node(id).grad;
      if (t.node(x).requires_grad) {
        ops().axpy(dy.size(), 1.0, dy.data.data(), t.node(x).grad.data.data());
      }
      if (t.node(bias).requires_grad) {
        Tensor& db = t.node(bias).grad;
        for (int64_t i = 0; i < dy.rows; ++i) {
          ops().axpy(dy.cols, 1.0, dy.row(i), db.row(0));
        }
      }
    };
  }
  return id;
}

Tape::NodeId Tape::add(NodeId a, NodeId b) {
  const Tensor& va = val(a);
  const Tensor& vb = val(b);
  if (!va.same_shape(vb)) throw NumericError("add: shape mismatch");
  Tensor out(va.rows, va.cols);
  ops().vadd(va.size(), va.data.data(), vb.data.data(), out.data.data());
  check_finite(out, "add");
  const bool rg = node(a).requires_grad || node(b).requires_grad;
  const NodeId id = push(std::move(out), rg, nullptr);
  if (rg) {
    node(id).backward = [id, a, b](Tape& t) {
      const Tensor& dy = t.node(id).grad;
      for (NodeId src : {a, b}) {
        if (t.node(src).requires_grad) {
          ops().axpy(dy.size(), 1.0, dy.data.data(), t.node(src).grad.data.data());
        }
      }
    };
  }
  return id;
}

Tape::NodeId Tape::concat_cols(NodeId a, NodeId b) {
  const Tensor& va = val(a);
  const Tensor& vb = val(b);
  if (va.rows != vb.rows) throw NumericError("concat_cols: row counts differ");
  Tensor out(va.rows, va.cols + vb.cols);
  for (int64_t i = 0; i < va.rows; ++i) {
    double* dst = out.row(i);
    std::copy(va.row(i), va.row(i) + va.cols, dst);
    std::copy(vb.row(i), vb.row(i) + vb.cols, dst + va.cols);
  }
  const bool rg = node(a).requires_grad || node(b).requires_grad;
  const NodeId id = push(std::move(out), rg, nullptr);
  if (rg) {
    const int64_t ca = va.cols;
    node(id).backward = [id, a, b, ca](Tape& t) {
      const Tensor& dy = t.node(id).grad;
      if (t.node(a).requires_grad) {
        Tensor& da = t.node(a).grad;
        for (int64_t i = 0; i < dy.rows; ++i) ops().axpy(ca, 1.0, dy.row(i), da.row(i));
      }
      if (t.node(b).requires_grad) {
        Tensor& db = t.node(b).grad;
        for (int64_t i = 0; i < dy.rows; ++i) {
          ops().axpy(db.cols, 1.0, dy.row(i) + ca, db.row(i));
        }
      }
    };
  }
  return id;
}

Tape::NodeId Tape::relu(NodeId x) {
  const Tensor& vx = val(x);
  Tensor out(vx.rows, vx.cols);
  ops().relu(vx.size(), vx.data.data(), out.data.data());
  const bool rg = node(x).requires_grad;
  const NodeId id = push(std::move(out), rg, nullptr);
  if (rg) {
    node(id).backward = [id, x](Tape& t) {
      const Tensor& dy = t.node(id).grad;
      const Tensor& vin = t.val(x);
      ops().relu_grad(dy.size(), vin.data.data(), dy.data.data(),
                      t.node(x).grad.data.data());
    };
  }
  return id;
}

Tape::NodeId Tape::sigmoid(NodeId x) {
  const Tensor& vx = val(x);
  Tensor out(vx.rows, vx.cols);
  for (int64_t i = 0; i < vx.size(); ++i) out.data[static_cast<size_t>(i)] = stable_sigmoid(vx.data[static_cast<size_t>(i)]);
  check_finite(out, "sigmoid");
  const bool rg = node(x).requires_grad;
  const NodeId id = push(std::move(out), rg, nullptr);
  if (rg) {
    node(id).backward = [id, x](Tape& t) {
      const Tensor& dy = t.node(id).grad;
      const Tensor& y = t.val(id);
      Tensor& dx = t.node(x).grad;
      for (int64_t i = 0; i < dy.size(); ++i) {
        const double s = y.data[static_cast<size_t>(i)];
        dx.data[static_cast<size_t>(i)] += dy.data[static_cast<size_t>(i)] * s * (1.0 - s);
      }
    };
  }
  return id;
}

Tape::NodeId Tape::gather_rows(NodeId x, std::vector<int32_t> idx) {
  const Tensor& vx = val(x);
  Tensor out(static_cast<int64_t>(idx.size()), vx.cols);
  for (size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] < 0 || idx[i] >= vx.rows) throw NumericError("gather_rows: index out of range");
    std::copy(vx.row(idx[i]), vx.row(idx[i]) + vx.cols, out.row(static_cast<int64_t>(i)));
  }
  const bool rg = node(x).requires_grad;
  const NodeId id = push(std::move(out), rg, nullptr);
  if (rg) {
    node(id).backward = [id, x, idx = std::move(idx)](Tape& t) {
      const Tensor& dy = t.node(id).grad;
      Tensor& dx = t.node(x).grad;
      for (size_t i = 0; i < idx.size(); ++i) {
        ops().axpy(dy.cols, 1.0, dy.row(static_cast<int64_t>(i)), dx.row(idx[i]));
      }
    };
  }
  return id;
}

Tape::NodeId Tape::head_rows(NodeId x, int64_t n) {
  const Tensor& vx = val(x);
  if (n > vx.rows) throw NumericError("head_rows: n exceeds row count");
  Tensor out(n, vx.cols);
  std::copy(vx.data.begin(), vx.data.begin() + static_cast<long>(n * vx.cols), out.data.begin());
  const bool rg = node(x).requires_grad;
  const NodeId id = push(std::move(out), rg, nullptr);
  if (rg) {
    node(id).backward = [id, x](Tape& t) {
      const Tensor& dy = t.node(id).grad;
      ops().axpy(dy.size(), 1.0, dy.data.data(), t.node(x).grad.data.data());
    };
  }
  return id;
}

Tape::NodeId Tape::segment_mean(NodeId x, std::vector<int32_t> seg, int64_t num_groups) {
  const Tensor& vx = val(x);
  if (static_cast<int64_t>(seg.size()) != vx.rows) {
    throw NumericError("segment_mean: segment count != rows");
  }
  std::vector<double> inv_count(static_cast<size_t>(num_groups), 0.0);
  for (int32_t g : seg) {
    if (g < 0 || g >= num_groups) throw NumericError("segment_mean: group out of range");
    inv_count[static_cast<size_t>(g)] += 1.0;
  }
  for (double& c : inv_count) c = c > 0.0 ? 1.0 / c : 0.0;

  Tensor out(num_groups, vx.cols);
  for (int64_t i = 0; i < vx.rows; ++i) {
    ops().axpy(vx.cols, inv_count[static_cast<size_t>(seg[static_cast<size_t>(i)])], vx.row(i),
               out.row(seg[static_cast<size_t>(i)]));
  }
  check_finite(out, "segment_mean");
  const bool rg = node(x).requires_grad;
  const NodeId id = push(std::move(out), rg, nullptr);
  if (rg) {
    node(id).backward = [id, x, seg = std::move(seg), inv_count = std::move(inv_count)](Tape& t) {
      const Tensor& dy = t.node(id).grad;
      Tensor& dx = t.node(x).grad;
      for (size_t i = 0; i < seg.size(); ++i) {
        ops().axpy(dy.cols, inv_count[static_cast<size_t>(seg[i])], dy.row(seg[i]),
                   dx.row(static_cast<int64_t>(i)));
      }
    };
  }
  return id;
}

Tape::NodeId Tape::segment_softmax(NodeId logits, std::vector<int32_t> seg, int64_t num_groups) {
  const Tensor& vz = val(logits);
  if (vz.cols != 1) throw NumericError("segment_softmax: expects an n x 1 column");
  if (static_cast<int64_t>(seg.size()) != vz.rows) {
    throw NumericError("segment_softmax: segment count != rows");
  }
  std::vector<double> gmax(static_cast<size_t>(num_groups),
                           -std::numeric_limits<double>::infinity());
  for (size_t i = 0; i < seg.size(); ++i) {
    const int32_t g = seg[i];
    if (g < 0 || g >= num_groups) throw NumericError("segment_softmax: group out of range");
    gmax[static_cast<size_t>(g)] = std::max(gmax[static_cast<size_t>(g)], vz.data[i]);
  }
  Tensor out(vz.rows, 1);
  std::vector<double> gsum(static_cast<size_t>(num_groups), 0.0);
  for (size_t i = 0; i < seg.size(); ++i) {
    const double e = std::exp(vz.data[i] - gmax[static_cast<size_t>(seg[i])]);
    out.data[i] = e;
    gsum[static_cast<size_t>(seg[i])] += e;
  }
  for (size_t i = 0; i < seg.size(); ++i) out.data[i] /= gsum[static_cast<size_t>(seg[i])];
  check_finite(out, "segment_softmax");
  const bool rg = node(logits).requires_grad;
  const NodeId id = push(std::move(out), rg, nullptr);
  if (rg) {
    node(id).backward = [id, logits, seg = std::move(seg), num_groups](Tape& t) {
      const Tensor& dy = t.node(id).grad;
      const Tensor& p = t.val(id);
      Tensor& dz = t.node(logits).grad;
      // dz_i = p_i * (dy_i - sum_j in group p_j dy_j)
      std::vector<double> gdot(static_cast<size_t>(num_groups), 0.0);
      for (size_t i = 0; i < seg.size(); ++i) gdot[static_cast<size_t>(seg[i])] += p.data[i] * dy.data[i];
      for (size_t i = 0; i < seg.size(); ++i) {
        dz.data[i] += p.data[i] * (dy.data[i] - gdot[static_cast<size_t>(seg[i])]);
      }
    };
  }
  return id;
}

Tape::NodeId Tape::segment_weighted_sum(NodeId x, NodeId w, std::vector<int32_t> seg,
                                        int64_t num_groups) {
  const Tensor& vx = val(x);
  const Tensor& vw = val(w);
  if (vw.cols != 1 || vw.rows != vx.rows) throw NumericError("segment_weighted_sum: weight shape");
  if (static_cast<int64_t>(seg.size()) != vx.rows) {
    throw NumericError("segment_weighted_sum: segment count != rows");
  }
  Tensor out(num_groups, vx.cols);
  for (int64_t i = 0; i < vx.rows; ++i) {
    const int32_t g = seg[static_cast<size_t>(i)];
    if (g < 0 || g >= num_groups) throw NumericError("segment_weighted_sum: group out of range");
    ops().axpy(vx.cols, vw.data[static_cast<size_t>(i)], vx.row(i), out.row(g));
  }
  check_finite(out, "segment_weighted_sum");
  const bool rg = node(x).requires_grad || node(w).requires_grad;
  const NodeId id = push(std::move(out), rg, nullptr);
  if (rg) {
    node(id).backward = [id, x, w, seg = std::move(seg)](Tape& t) {
      const Tensor& dy = t.node(id).grad;
      const Tensor& vx2 = t.val(x);
      const Tensor& vw2 = t.val(w);
      if (t.node(x).requires_grad) {
        Tensor& dx = t.node(x).grad;
        for (size_t i = 0; i < seg.size(); ++i) {
          ops().axpy(dy.cols, vw2.data[i], dy.row(seg[i]), dx.row(static_cast<int64_t>(i)));
        }
      }
      if (t.node(w).requires_grad) {
        Tensor& dw = t.node(w).grad;
        for (size_t i = 0; i < seg.size(); ++i) {
          dw.data[i] += ops().dot(dy.cols, vx2.row(static_cast<int64_t>(i)), dy.row(seg[i]));
        }
      }
    };
  }
  return id;
}

Tape::NodeId Tape::l2_normalize_rows(NodeId x) {
  const Tensor& vx = val(x);
  Tensor out(vx.rows, vx.cols);
  std::vector<double> inv_norm(static_cast<size_t>(vx.rows), 0.0);
  for (int64_t i = 0; i < vx.rows; ++i) {
    const double n2 = ops().dot(vx.cols, vx.row(i), vx.row(i));
    const double inv = n2 > 0.0 ? 1.0 / std::sqrt(n2) : 0.0;
    inv_norm[static_cast<size_t>(i)] = inv;
    if (inv > 0.0) {
      ops().axpy(vx.cols, inv, vx.row(i), out.row(i));
    } else {
      std::copy(vx.row(i), vx.row(i) + vx.cols, out.row(i));  // zero row unchanged
    }
  }
  check_finite(out, "l2_normalize_rows");
  const bool rg = node(x).requires_grad;
  const NodeId id = push(std::move(out), rg, nullptr);
  if (rg) {
    node(id).backward = [id, x, inv_norm = std::move(inv_norm)](Tape& t) {
      const Tensor& dy = t.node(id).grad;
      const Tensor& y = t.val(id);
      Tensor& dx = t.node(x).grad;
      for (int64_t i = 0; i < dy.rows; ++i) {
        const double inv = inv_norm[static_cast<size_t>(i)];
        if (inv == 0.0) {
          ops().axpy(dy.cols, 1.0, dy.row(i), dx.row(i));
          continue;
        }
        const double ydy = ops().dot(dy.cols, y.row(i), dy.row(i));
        // dx = (dy - y * (y . dy)) / ||x||
        ops().axpy(dy.cols, inv, dy.row(i), dx.row(i));
        ops().axpy(dy.cols, -inv * ydy, y.row(i), dx.row(i));
      }
    };
  }
  return id;
}

Tape::NodeId Tape::dropout(NodeId x, double rate, bool training, Rng& rng) {
  if (rate < 0.0 || rate >= 1.0) throw NumericError("dropout: rate must be in [0, 1)");
  const Tensor& vx = val(x);
  if (!training || rate == 0.0) {
    Tensor out = vx;
    const bool rg0 = node(x).requires_grad;
    const NodeId id0 = push(std::move(out), rg0, nullptr);
    if (rg0) {
      node(id0).backward = [id0, x](Tape& t) {
        const Tensor& dy = t.node(id0).grad;
        ops().axpy(dy.size(), 1.0, dy.data.data(), t.node(x).grad.data.data());
      };
    }
    return id0;
  }
  const double scale = 1.0 / (1.0 - rate);
  std::vector<double> mask(static_cast<size_t>(vx.size()));
  for (double& m : mask) m = rng.bernoulli(rate) ? 0.0 : scale;
  Tensor out(vx.rows, vx.cols);
  for (int64_t i = 0; i < vx.size(); ++i) {
    out.data[static_cast<size_t>(i)] = vx.data[static_cast<size_t>(i)] * mask[static_cast<size_t>(i)];
  }
  const bool rg = node(x).requires_grad;
  const NodeId id = push(std::move(out), rg, nullptr);
  if (rg) {
    node(id).backward = [id, x, mask = std::move(mask)](Tape& t) {
      const Tensor& dy = t.node(id).grad;
      Tensor& dx = t.node(x).grad;
      for (int64_t i = 0; i < dy.size(); ++i) {
        dx.data[static_cast<size_t>(i)] += dy.data[static_cast<size_t>(i)] * mask[static_cast<size_t>(i)];
      }
    };
  }
  return id;
}

Tape::NodeId Tape::weighted_bce_with_logits(NodeId logits, std::vector<double> labels,
                                            double pos_weight) {
  const Tensor& vz = val(logits);
  if (vz.cols != 1) throw NumericError("weighted_bce_with_logits: expects an n x 1 column");
  if (static_cast<int64_t>(labels.size()) != vz.rows) {
    throw NumericError("weighted_bce_with_logits: label count != logits");
  }
  if (!(pos_weight > 0.0)) throw NumericError("weighted_bce_with_logits: pos_weight <= 0");
  const int64_t n = vz.rows;
  double total = 0.0;
  for (int64_t i = 0; i < n; ++i) {
    const double z = vz.data[static_cast<size_t>(i)];
    const double y = labels[static_cast<size_t>(i)];
    // loss_i = (1-y) z + (pos_weight y + 1 - y) softplus(-z)
    total += (1.0 - y) * z + (pos_weight * y + 1.0 - y) * softplus(-z);
  }
  Tensor out(1, 1);
  out.data[0] = total / static_cast<double>(n);
  check_finite(out, "weighted_bce_with_logits");
  const bool rg = node(logits).requires_grad;
  const NodeId id = push(std::move(out), rg, nullptr);
  if (rg) {
    node(id).backward = [id, logits, labels = std::move(labels), pos_weight, n](Tape& t) {
      const double upstream = t.node(id).grad.data[0];
      const Tensor& vz2 = t.val(logits);
      Tensor& dz = t.node(logits).grad;
      const double inv_n = 1.0 / static_cast<double>(n);
      for (int64_t i = 0; i < n; ++i) {
        const double z = vz2.data[static_cast<size_t>(i)];
        const double y = labels[static_cast<size_t>(i)];
        const double g =
            (1.0 - y) - (pos_weight * y + 1.0 - y) * stable_sigmoid(-z);
        dz.data[static_cast<size_t>(i)] += upstream * inv_n * g;
      }
    };
  }
  return id;
}

void Tape::backward(NodeId root) {
  Node& r = node(root);
  if (r.value.size() != 1) throw NumericError("backward: root must be a scalar");
  if (!r.requires_grad) return;
  r.grad.data[0] = 1.0;
  for (int32_t i = root; i >= 0; --i) {
    Node& n = nodes_[static_cast<size_t>(i)];
    if (n.backward && n.requires_grad) n.backward(*this);
  }
}

}  // namespace atlas
