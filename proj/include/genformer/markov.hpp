#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "genformer/types.hpp"

namespace genformer {

// First-order transition matrix estimated from state sequences. Rows with no
// observed transitions fall back to the empirical stationary distribution so
// simulation is total.
struct TransitionMatrix {
  int n_states = 0;
  std::vector<double> probs;         // n_states x n_states row-stochastic
  std::vector<std::int64_t> counts;  // raw transition counts, same layout
  std::vector<double> stationary;    // empirical state frequencies

  double prob(int from, int to) const {
    return probs[static_cast<std::size_t>(from) * n_states + to];
  }

  void save(const std::filesystem::path& path) const;
  static TransitionMatrix load(const std::filesystem::path& path);
};

TransitionMatrix estimate_transition_matrix(const std::vector<MarkovStateSequence>& seqs);

enum class OrderCriterion { AIC, BIC };

struct OrderSelection {
  struct Candidate {
    int order = 0;
    double log_likelihood = 0.0;
    double param_count = 0.0;  // n_states^p * (n_states - 1)
    double aic = 0.0;
    double bic = 0.0;
  };
  std::vector<Candidate> candidates;
  int chosen_order = 0;
  OrderCriterion criterion = OrderCriterion::BIC;
};

// Maximum-likelihood order selection over p = 1..p_max. Guarded: the dense
// count table n_states^(p+1) must stay under 1e7 cells; larger state spaces
// are the job of the deep state generator.
OrderSelection select_order(const std::vector<MarkovStateSequence>& seqs, int p_max,
                            OrderCriterion criterion);

// Sequential sampling from the transition matrix. Returns n_steps newly
// sampled states (the initial state is not included).
MarkovStateSequence simulate_chain(const TransitionMatrix& tm, int init_state, int n_steps,
                                   std::uint64_t seed);

// Normalized frequency of each state across all sequences; sums to 1.
std::vector<double> state_frequencies(const std::vector<MarkovStateSequence>& seqs);

}  // namespace genformer
