#pragma once

#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "genformer/nn.hpp"
#include "genformer/rng.hpp"
#include "genformer/tape.hpp"
#include "genformer/types.hpp"

namespace genformer::nn {

// Shared mini-batch loop: shuffled batches, ADAM with the configured schedule,
// early stopping on the validation loss, best-epoch weights restored at the
// end. loss_graph(tape, window, train, rng) must return a scalar loss node.
template <typename Window, typename LossGraph>
TrainResult run_training(ParamStore& params, const std::vector<Window>& train_windows,
                         const std::vector<Window>& val_windows, const HyperParams& hp,
                         std::uint64_t seed, LossGraph&& loss_graph) {
  if (train_windows.empty()) throw NoWindows("training: no training windows");

  Rng shuffle_rng(Rng::derive(seed, 101));
  Rng dropout_rng(Rng::derive(seed, 102));

  // Validation stays affordable on large sets via a deterministic stride.
  std::vector<std::size_t> val_index;
  {
    std::size_t stride = val_windows.size() > 1024 ? val_windows.size() / 1024 : 1;
    for (std::size_t i = 0; i < val_windows.size(); i += stride) val_index.push_back(i);
  }
  auto eval_val = [&]() {
    double total = 0.0;
    for (std::size_t i : val_index) {
      Tape tape;
      int loss = loss_graph(tape, val_windows[i], false, nullptr);
      total += tape.value(loss).scalar();
    }
    return total / static_cast<double>(val_index.size());
  };

  TrainResult result;
  std::vector<std::size_t> order(train_windows.size());
  std::iota(order.begin(), order.end(), 0);

  double best_val = std::numeric_limits<double>::infinity();
  std::vector<Tensor> best_values;
  int stale_epochs = 0;
  int adam_t = 0;

  for (int epoch = 1; epoch <= hp.max_epochs; ++epoch) {
    AdamConfig adam;
    adam.lr = hp.lr_at_epoch(epoch);
    shuffle_rng.shuffle(order);

    std::size_t n_batches = (order.size() + hp.batch_size - 1) / hp.batch_size;
    if (hp.steps_per_epoch > 0)
      n_batches = std::min<std::size_t>(n_batches, static_cast<std::size_t>(hp.steps_per_epoch));

    double epoch_loss = 0.0;
    std::size_t seen = 0;
    for (std::size_t b = 0; b < n_batches; ++b) {
      const std::size_t begin = b * hp.batch_size;
      const std::size_t end = std::min(order.size(), begin + hp.batch_size);
      if (begin >= end) break;
      params.zero_grad();
      const double inv = 1.0 / static_cast<double>(end - begin);
      for (std::size_t i = begin; i < end; ++i) {
        Tape tape;
        int loss = loss_graph(tape, train_windows[order[i]], true, &dropout_rng);
        epoch_loss += tape.value(loss).scalar();
        ++seen;
        tape.backward(loss, inv, &params);
      }
      adam_step(params, adam, ++adam_t);
    }
    result.train_loss.push_back(epoch_loss / static_cast<double>(seen));
    result.epochs_run = epoch;

    if (!val_windows.empty()) {
      double val = eval_val();
      result.val_loss.push_back(val);
      if (val < best_val) {
        best_val = val;
        best_values = params.snapshot_values();
        result.best_epoch = epoch;
        stale_epochs = 0;
      } else {
        ++stale_epochs;
        if (stale_epochs >= hp.early_stop_patience) break;
      }
    }
  }

  if (!best_values.empty()) params.restore_values(best_values);
  return result;
}

}  // namespace genformer::nn
