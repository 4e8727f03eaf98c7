#pragma once

#include <filesystem>

#include <json.hpp>

#include "genformer/tape.hpp"
#include "genformer/types.hpp"

namespace genformer::nn {

struct TrainResult {
  std::vector<double> train_loss;  // per epoch
  std::vector<double> val_loss;    // per epoch, empty when no validation set
  int best_epoch = 0;              // 1-based; 0 when no validation set
  int epochs_run = 0;
};

// Node-id bundles for the weight leaves of one layer instance.
struct AttnNodes {
  int wq = -1, wk = -1, wv = -1, wo = -1;
};
struct FfnNodes {
  int w1 = -1, b1 = -1, w2 = -1, b2 = -1;
};
struct LayerNormNodes {
  int gain = -1, bias = -1;
};

// Multi-head attention. Scores use per-head scaling 1/sqrt(d_head); the heads
// are concatenated and projected by wo. With causal set, position t in z_q may
// only attend positions <= t in z_kv.
int multi_head_attention(Tape& t, int z_q, int z_kv, const AttnNodes& w, int n_head, bool causal);

inline int self_attention(Tape& t, int z, const AttnNodes& w, int n_head, bool causal) {
  return multi_head_attention(t, z, z, w, n_head, causal);
}
// Queries from the decoder representation, keys and values from the encoder
// output.
inline int cross_attention(Tape& t, int z_dec, int z_enc, const AttnNodes& w, int n_head) {
  return multi_head_attention(t, z_dec, z_enc, w, n_head, false);
}

// W_2 max(0, W_1 Z + b_1) + b_2.
int feed_forward(Tape& t, int z, const FfnNodes& w);

inline int layer_norm(Tape& t, int z, const LayerNormNodes& w) {
  return t.layer_norm_cols(z, w.gain, w.bias);
}

// Sinusoidal positional embedding: entry (2k, j) = sin(j / 10000^(2k/d_model)),
// entry (2k+1, j) = cos of the same argument.
Tensor positional_embedding(int q, int d_model);

// 4 x q matrix of calendar units mapped affinely onto [-0.5, 0.5]; the year
// range comes from the training data.
Tensor calendar_features(const TimeStampVector& stamps, int year_min, int year_max);

inline int markov_state_embedding(Tape& t, int table, const std::vector<int>& states) {
  return t.lookup_cols(table, states);
}

// Parameter (de)serialization: JSON manifest plus one little-endian IEEE-754
// double blob holding every parameter at a recorded offset.
void save_params(const std::filesystem::path& dir, const ParamStore& params,
                 nlohmann::json manifest_extra);
nlohmann::json load_params(const std::filesystem::path& dir, ParamStore& params);

nlohmann::json hyperparams_to_json(const HyperParams& hp);
HyperParams hyperparams_from_json(const nlohmann::json& j);

}  // namespace genformer::nn
