#pragma once

#include <vector>

#include "genformer/types.hpp"

namespace genformer {

// One sliding-window input/target pair. The encoder block covers q_enc columns
// and the target block the q_out columns immediately after it.
struct WindowPair {
  int m = 0;
  int q_enc = 0;
  int q_out = 0;
  std::vector<double> enc_x;     // m x q_enc, row-major
  std::vector<int> enc_y;        // q_enc
  TimeStampVector enc_t;         // q_enc
  std::vector<int> out_y;        // q_out
  TimeStampVector out_t;         // q_out
  std::vector<double> target_x;  // m x q_out, row-major
};

// Sliding windows of length q_enc_in + q_out over one realization. Windows
// never cross realization boundaries. Throws SeriesTooShort when
// n < q_enc_in + q_out.
std::vector<WindowPair> build_windows(const TimeSeriesMatrix& series,
                                      const MarkovStateSequence& states, const HyperParams& hp);

// Window used by the Markov state generator: `order` history states plus the
// next state as the target, with order + 1 stamps covering both.
struct StateWindow {
  std::vector<int> history;  // order states
  int target = 0;
  TimeStampVector stamps;  // order + 1 stamps
};

std::vector<StateWindow> build_state_windows(const MarkovStateSequence& states,
                                             const TimeStampVector& stamps, int order);

enum class SplitMode { ByTime, ByRealization };

struct TrainValSplit {
  std::vector<LabeledSeries> train;
  std::vector<LabeledSeries> validation;
};

// ByTime: per realization, the first floor(eta*n) stamps go to the training
// side. ByRealization: the first floor(eta*R) realizations go to the training
// side. Windows are built per side afterwards, so no window straddles a split.
TrainValSplit split_train_validation(const std::vector<LabeledSeries>& series, double eta,
                                     SplitMode mode);

// Stacks realizations over the time dimension. Output stamps are reindexed to
// a fresh unitless grid with the first input's spacing.
TimeSeriesMatrix concat_realizations(const std::vector<TimeSeriesMatrix>& parts);

}  // namespace genformer
