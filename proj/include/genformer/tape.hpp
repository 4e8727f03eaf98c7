#pragma once

#include <functional>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "genformer/tensor.hpp"

namespace genformer::nn {

// Named parameter with gradient and ADAM moment buffers.
struct Param {
  std::string name;
  Tensor value;
  Tensor grad;
  Tensor m;  // first moment
  Tensor v;  // second moment
};

class ParamStore {
 public:
  Param& create(const std::string& name, int rows, int cols);
  bool has(const std::string& name) const { return index_.count(name) != 0; }
  Param& get(const std::string& name);
  const Param& get(const std::string& name) const;

  std::size_t count() const { return items_.size(); }
  Param& at(std::size_t i) { return *items_[i]; }
  const Param& at(std::size_t i) const { return *items_[i]; }

  void zero_grad();
  std::size_t total_entries() const;

  // Deep copy / restore of values only (used for best-epoch checkpoints).
  std::vector<Tensor> snapshot_values() const;
  void restore_values(const std::vector<Tensor>& values);

 private:
  std::vector<std::unique_ptr<Param>> items_;  // registration order
  std::unordered_map<std::string, std::size_t> index_;
};

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Bias-corrected ADAM update from the accumulated gradients; t is the 1-based
// step count.
void adam_step(ParamStore& params, const AdamConfig& cfg, int t);

// Reverse-mode tape. Nodes are appended in evaluation order, which makes the
// recorded graph acyclic by construction; backward() walks it in reverse.
class Tape {
 public:
  struct Node {
    Tensor val;
    Tensor grad;
    std::string param_name;  // nonempty for parameter leaves
    std::function<void(Tape&, int)> back;
  };

  int leaf(const Param& p);
  int constant(Tensor t);

  int matmul(int a, int b);     // A * B
  int matmul_tA(int a, int b);  // A^T * B
  int add(int a, int b);
  int sub(int a, int b);
  int add_colvec(int a, int bias);  // bias is r x 1, broadcast over columns
  int scale(int a, double s);
  int relu(int a);
  // Columnwise softmax; with causal set, entry (s, t) with s > t is masked to
  // -inf before normalizing (keys s, queries t; requires a square input).
  int softmax_cols(int a, bool causal = false);
  int layer_norm_cols(int a, int gain, int bias, double eps = 1e-5);
  int concat_cols(int a, int b);
  int slice_cols(int a, int c0, int c1);
  int slice_rows(int a, int r0, int r1);
  int concat_rows(const std::vector<int>& parts);
  int lookup_cols(int table, const std::vector<int>& indices);  // embedding gather
  // x is m x q, kernel is d_out x (m * ksize), circular padding over columns.
  int conv1d_circular(int x, int kernel, int ksize);
  // Inverted dropout; identity when train is false or rate is 0.
  int dropout(int a, double rate, Rng* rng, bool train);

  int l1_loss(int pred, Tensor target);
  int l2_loss(int pred, Tensor target);
  // probs is a column distribution; loss = -w (1 - p_c)^gamma log p_c.
  int focal_loss(int probs, int target_class, double gamma, double class_weight);

  const Tensor& value(int id) const { return nodes_[id].val; }
  const Tensor& grad(int id) const { return nodes_[id].grad; }
  std::size_t node_count() const { return nodes_.size(); }

  // Seeds d(loss)/d(loss) = seed, sweeps the tape in reverse, then adds leaf
  // gradients into the store (when given). Throws NonScalarLoss unless the
  // loss node is 1x1.
  void backward(int loss, double seed = 1.0, ParamStore* store = nullptr);

 private:
  friend struct TapeOps;
  int push(Tensor val, std::function<void(Tape&, int)> back, std::string param_name = {});
  Tensor& grad_mut(int id) { return nodes_[id].grad; }

  std::vector<Node> nodes_;
};

}  // namespace genformer::nn
