#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "genformer/dataset.hpp"
#include "genformer/nn.hpp"
#include "genformer/types.hpp"

namespace genformer {

// Decoder-only model producing next-state probabilities for Markov order
// p >= 2. Input: the previous p states plus a learned placeholder column,
// through n_markov blocks of causal self-attention and feed-forward layers;
// the placeholder position's projection is softmax-normalized over states.
class StateGenModel {
 public:
  StateGenModel(int n_states, StampKind stamp_kind, HyperParams hp, std::uint64_t init_seed);

  int n_states() const { return n_states_; }
  int order() const { return hp_.markov_order; }
  const HyperParams& hp() const { return hp_; }
  nn::ParamStore& params() { return params_; }
  const nn::ParamStore& params() const { return params_; }
  void set_year_range(int year_min, int year_max);

  // Probability node (n_states x 1) for the next state given p history states
  // and p + 1 stamps (history plus the placeholder position).
  int forward_graph(nn::Tape& tape, const std::vector<int>& history,
                    const TimeStampVector& stamps, bool train, Rng* dropout_rng) const;

  std::vector<double> next_state_probs(const std::vector<int>& history,
                                       const TimeStampVector& stamps) const;

  // Focal loss with per-state class weights (empty = all ones).
  nn::TrainResult train(const std::vector<StateWindow>& train_windows,
                        const std::vector<StateWindow>& val_windows,
                        const std::vector<double>& class_weights, std::uint64_t seed);

  // Iterative multinomial sampling; stamps must cover order() + n_steps
  // positions (the init window followed by the horizon). Returns the n_steps
  // generated states.
  MarkovStateSequence generate(const std::vector<int>& init, const TimeStampVector& stamps,
                               int n_steps, std::uint64_t seed) const;

  void save(const std::filesystem::path& dir) const;
  static StateGenModel load(const std::filesystem::path& dir);

 private:
  int n_states_ = 0;
  StampKind stamp_kind_ = StampKind::Unitless;
  HyperParams hp_;
  std::uint64_t init_seed_ = 0;
  int year_min_ = 0;
  int year_max_ = 0;
  nn::ParamStore params_;
};

}  // namespace genformer
