#include "genformer/markov.hpp"

#include <cmath>
#include <limits>
#include <unordered_map>

#include "genformer/io.hpp"
#include "genformer/rng.hpp"

namespace genformer {

std::vector<double> state_frequencies(const std::vector<MarkovStateSequence>& seqs) {
  if (seqs.empty()) throw EmptyInput("state_frequencies: no sequences");
  const int n_states = seqs.front().n_states;
  std::vector<double> freq(n_states, 0.0);
  std::int64_t total = 0;
  for (const auto& seq : seqs) {
    if (seq.n_states != n_states)
      throw ShapeMismatch("state_frequencies: mismatched state spaces");
    for (int s : seq.states) {
      freq[s] += 1.0;
      ++total;
    }
  }
  if (total == 0) throw EmptyInput("state_frequencies: no states observed");
  for (double& f : freq) f /= static_cast<double>(total);
  return freq;
}

TransitionMatrix estimate_transition_matrix(const std::vector<MarkovStateSequence>& seqs) {
  if (seqs.empty()) throw EmptyInput("estimate_transition_matrix: no sequences");
  const int n_states = seqs.front().n_states;
  TransitionMatrix tm;
  tm.n_states = n_states;
  tm.counts.assign(static_cast<std::size_t>(n_states) * n_states, 0);

  std::int64_t total = 0;
  for (const auto& seq : seqs) {
    if (seq.n_states != n_states)
      throw ShapeMismatch("estimate_transition_matrix: mismatched state spaces");
    for (std::size_t j = 1; j < seq.states.size(); ++j) {
      tm.counts[static_cast<std::size_t>(seq.states[j - 1]) * n_states + seq.states[j]] += 1;
      ++total;
    }
  }
  if (total == 0) throw NoTransitions("estimate_transition_matrix: no transitions observed");

  tm.stationary = state_frequencies(seqs);
  tm.probs.assign(tm.counts.size(), 0.0);
  for (int a = 0; a < n_states; ++a) {
    std::int64_t row_total = 0;
    for (int b = 0; b < n_states; ++b)
      row_total += tm.counts[static_cast<std::size_t>(a) * n_states + b];
    if (row_total > 0) {
      for (int b = 0; b < n_states; ++b)
        tm.probs[static_cast<std::size_t>(a) * n_states + b] =
            static_cast<double>(tm.counts[static_cast<std::size_t>(a) * n_states + b]) /
            static_cast<double>(row_total);
    } else {
      for (int b = 0; b < n_states; ++b)
        tm.probs[static_cast<std::size_t>(a) * n_states + b] = tm.stationary[b];
    }
  }
  return tm;
}

OrderSelection select_order(const std::vector<MarkovStateSequence>& seqs, int p_max,
                            OrderCriterion criterion) {
  if (seqs.empty()) throw EmptyInput("select_order: no sequences");
  if (p_max < 1) throw DomainError("select_order: p_max must be >= 1");
  const int n_states = seqs.front().n_states;

  double cells = static_cast<double>(n_states);
  for (int p = 1; p <= p_max; ++p) {
    cells *= static_cast<double>(n_states);
    if (cells > 1e7)
      throw StateSpaceTooLarge(
          "select_order: n_states^(p+1) exceeds 1e7 cells; use the deep state generator");
  }

  OrderSelection sel;
  sel.criterion = criterion;
  double best = std::numeric_limits<double>::infinity();
  for (int p = 1; p <= p_max; ++p) {
    std::unordered_map<std::uint64_t, std::int64_t> ctx_counts, pair_counts;
    std::int64_t total = 0;
    for (const auto& seq : seqs) {
      if (seq.n_states != n_states) throw ShapeMismatch("select_order: mismatched state spaces");
      const auto& s = seq.states;
      for (std::size_t j = p; j < s.size(); ++j) {
        std::uint64_t ctx = 0;
        for (int l = 0; l < p; ++l)
          ctx = ctx * static_cast<std::uint64_t>(n_states) + static_cast<std::uint64_t>(s[j - p + l]);
        ctx_counts[ctx] += 1;
        pair_counts[ctx * static_cast<std::uint64_t>(n_states) + static_cast<std::uint64_t>(s[j])] +=
            1;
        ++total;
      }
    }
    if (total == 0) throw NoTransitions("select_order: sequences shorter than p_max + 1");

    double log_lik = 0.0;
    for (const auto& [key, cnt] : pair_counts) {
      std::uint64_t ctx = key / static_cast<std::uint64_t>(n_states);
      log_lik += static_cast<double>(cnt) *
                 std::log(static_cast<double>(cnt) / static_cast<double>(ctx_counts[ctx]));
    }
    OrderSelection::Candidate c;
    c.order = p;
    c.log_likelihood = log_lik;
    c.param_count = std::pow(static_cast<double>(n_states), p) * (n_states - 1);
    c.aic = -2.0 * log_lik + 2.0 * c.param_count;
    c.bic = -2.0 * log_lik + c.param_count * std::log(static_cast<double>(total));
    sel.candidates.push_back(c);
    double score = criterion == OrderCriterion::AIC ? c.aic : c.bic;
    if (score < best) {
      best = score;
      sel.chosen_order = p;
    }
  }
  return sel;
}

MarkovStateSequence simulate_chain(const TransitionMatrix& tm, int init_state, int n_steps,
                                   std::uint64_t seed) {
  if (init_state < 0 || init_state >= tm.n_states)
    throw InvalidState("simulate_chain: init_state out of range");
  if (n_steps < 0) throw DomainError("simulate_chain: negative n_steps");
  Rng rng(seed);
  MarkovStateSequence seq;
  seq.n_states = tm.n_states;
  seq.states.reserve(n_steps);
  int cur = init_state;
  for (int step = 0; step < n_steps; ++step) {
    double u = rng.uniform01();
    const double* row = tm.probs.data() + static_cast<std::size_t>(cur) * tm.n_states;
    double acc = 0.0;
    int next = tm.n_states - 1;
    for (int b = 0; b < tm.n_states; ++b) {
      acc += row[b];
      if (u <= acc) {
        next = b;
        break;
      }
    }
    seq.states.push_back(next);
    cur = next;
  }
  return seq;
}

void TransitionMatrix::save(const std::filesystem::path& path) const {
  nlohmann::json j;
  j["n_states"] = n_states;
  j["probs"] = nlohmann::json::array();
  j["counts"] = nlohmann::json::array();
  for (int a = 0; a < n_states; ++a) {
    nlohmann::json prow = nlohmann::json::array();
    nlohmann::json crow = nlohmann::json::array();
    for (int b = 0; b < n_states; ++b) {
      prow.push_back(probs[static_cast<std::size_t>(a) * n_states + b]);
      crow.push_back(counts[static_cast<std::size_t>(a) * n_states + b]);
    }
    j["probs"].push_back(prow);
    j["counts"].push_back(crow);
  }
  j["stationary"] = stationary;
  io::write_json_atomic(path, j);
}

TransitionMatrix TransitionMatrix::load(const std::filesystem::path& path) {
  nlohmann::json j = io::read_json(path);
  TransitionMatrix tm;
  tm.n_states = j.at("n_states");
  for (const auto& row : j.at("probs"))
    for (const auto& v : row) tm.probs.push_back(v);
  for (const auto& row : j.at("counts"))
    for (const auto& v : row) tm.counts.push_back(v);
  tm.stationary = j.at("stationary").get<std::vector<double>>();
  if (tm.probs.size() != static_cast<std::size_t>(tm.n_states) * tm.n_states ||
      tm.counts.size() != tm.probs.size())
    throw IoError("transition matrix file is inconsistent: " + path.string());
  return tm;
}

}  // namespace genformer
