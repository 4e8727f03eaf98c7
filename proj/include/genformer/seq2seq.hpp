#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "genformer/dataset.hpp"
#include "genformer/nn.hpp"
#include "genformer/types.hpp"

namespace genformer {

// Encoder-decoder Transformer mapping Markov state sequences to m-variate
// series values. The embedding layer sums a circular-convolution value
// embedding, a learned per-state embedding, and a time embedding (sinusoidal
// for unitless stamps, a bias-free linear map of standardized calendar units
// otherwise).
class GenFormerModel {
 public:
  GenFormerModel(int m, StampKind stamp_kind, HyperParams hp, std::uint64_t init_seed);

  int m() const { return m_; }
  const HyperParams& hp() const { return hp_; }
  nn::ParamStore& params() { return params_; }
  const nn::ParamStore& params() const { return params_; }

  // Calendar models standardize the year unit over this closed range.
  void set_year_range(int year_min, int year_max);

  // Embedding layer: ValueEmbedding(X) + MarkovStateEmbedding(Y) + TimeEmbedding(T),
  // a d_model x q node. x is m x q row-major.
  int embed_graph(nn::Tape& tape, const std::vector<double>& x, int q, const std::vector<int>& y,
                  const TimeStampVector& stamps, bool train, Rng* dropout_rng) const;

  // Builds the forward graph for one window; returns the m x q_out prediction
  // node. Dropout is active only when train is set.
  int forward_graph(nn::Tape& tape, const WindowPair& window, bool train, Rng* dropout_rng) const;

  // Single-step prediction, no dropout.
  nn::Tensor predict(const WindowPair& window) const;

  // Prediction-plus-loss graph (L1 or L2 per hp.loss).
  int loss_graph(nn::Tape& tape, const WindowPair& window, bool train, Rng* dropout_rng) const;

  nn::TrainResult train(const std::vector<WindowPair>& train_windows,
                        const std::vector<WindowPair>& val_windows, std::uint64_t seed);

  // Autoregressive generation: each iteration predicts q_out columns which are
  // fed back as encoder input for the next. The final partial block (when
  // n_future is not a multiple of q_out) runs one extra iteration whose output
  // is truncated; its decoder states pad by repeating the last future state.
  TimeSeriesMatrix infer_autoregressive(const std::vector<double>& init_x,
                                        const std::vector<int>& init_y,
                                        const TimeStampVector& init_t,
                                        const std::vector<int>& future_y,
                                        const TimeStampVector& future_t,
                                        Space space = Space::Gaussian) const;

  void save(const std::filesystem::path& dir) const;
  static GenFormerModel load(const std::filesystem::path& dir);

 private:
  int m_ = 0;
  StampKind stamp_kind_ = StampKind::Unitless;
  HyperParams hp_;
  std::uint64_t init_seed_ = 0;
  int year_min_ = 0;
  int year_max_ = 0;
  nn::ParamStore params_;
};

}  // namespace genformer
