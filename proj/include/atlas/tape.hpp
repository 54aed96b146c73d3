#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "atlas/params.hpp"
#include "atlas/rng.hpp"
#include "atlas/tensor.hpp"

namespace atlas {

/// Append-only reverse-mode tape over dense f64 tensors.
///
/// Nodes are created in topological order by construction, so backward() is a
/// single reverse sweep that visits each node exactly once. Every forward op
/// checks its output for NaN/Inf and throws NumericError on violation.
/// Gradient buffers are allocated only for nodes that (transitively) depend
/// on a Param, which keeps large feature inputs gradient-free.
class Tape {
 public:
  using NodeId = int32_t;

  // Leaf without gradient tracking (e.g. batch input features).
  NodeId input(Tensor value);

  // Leaf backed by an external Param: value is copied in, and backward()
  // accumulates into p.grad.
  NodeId param(Param& p);

  NodeId matmul(NodeId a, NodeId b);

  // x: n x m, bias: 1 x m, broadcast over rows.
  NodeId add_bias(NodeId x, NodeId bias);

  NodeId add(NodeId a, NodeId b);  // same shape

  NodeId concat_cols(NodeId a, NodeId b);

  NodeId relu(NodeId x);

  NodeId sigmoid(NodeId x);

  // out.row(i) = x.row(idx[i]); backward scatter-adds.
  NodeId gather_rows(NodeId x, std::vector<int32_t> idx);

  // First n rows of x.
  NodeId head_rows(NodeId x, int64_t n);

  // Per-group arithmetic mean of rows; empty group -> zero row.
  NodeId segment_mean(NodeId x, std::vector<int32_t> seg, int64_t num_groups);

  // Per-group softmax over an n x 1 column, max-subtracted.
  NodeId segment_softmax(NodeId logits, std::vector<int32_t> seg, int64_t num_groups);

  // out.row(g) = sum_{i: seg[i]==g} w[i] * x.row(i); w is n x 1.
  NodeId segment_weighted_sum(NodeId x, NodeId w, std::vector<int32_t> seg,
                              int64_t num_groups);

  // Rows scaled to unit L2 norm; zero rows pass through unchanged.
  NodeId l2_normalize_rows(NodeId x);

  // Inverted dropout: scales kept entries by 1/(1-rate) in training mode,
  // identity in eval mode. rate in [0, 1).
  NodeId dropout(NodeId x, double rate, bool training, Rng& rng);

  // Mean over the batch of
  //   -[pos_weight * y * log sigma(z) + (1 - y) * log(1 - sigma(z))]
  // computed in log-sum-exp form. logits: n x 1. Returns a 1 x 1 scalar node.
  NodeId weighted_bce_with_logits(NodeId logits, std::vector<double> labels,
                                  double pos_weight);

  // Seeds d(root)=1 and sweeps the tape in reverse. root must be 1 x 1.
  void backward(NodeId root);

  const Tensor& val(NodeId id) const { return nodes_[static_cast<size_t>(id)].value; }
  const Tensor& grad(NodeId id) const { return nodes_[static_cast<size_t>(id)].grad; }

  size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor value;
    Tensor grad;  // allocated only when requires_grad
    bool requires_grad = false;
    std::function<void(Tape&)> backward;
  };

  NodeId push(Tensor value, bool requires_grad, std::function<void(Tape&)> back);
  Node& node(NodeId id) { return nodes_[static_cast<size_t>(id)]; }
  void check_finite(const Tensor& t, const char* op) const;

  std::vector<Node> nodes_;
};

}  // namespace atlas
