#include "genformer/dataset.hpp"

#include <cmath>

namespace genformer {

std::vector<WindowPair> build_windows(const TimeSeriesMatrix& series,
                                      const MarkovStateSequence& states, const HyperParams& hp) {
  const int q_enc = hp.q_enc_in;
  const int q_out = hp.q_out;
  const int n = series.n;
  if (states.size() != n) throw ShapeMismatch("build_windows: states not aligned to series");
  if (n < q_enc + q_out)
    throw SeriesTooShort("build_windows: need at least q_enc_in + q_out stamps");

  const int count = n - q_enc - q_out + 1;
  std::vector<WindowPair> windows;
  windows.reserve(count);
  for (int start = 0; start < count; ++start) {
    WindowPair w;
    w.m = series.m;
    w.q_enc = q_enc;
    w.q_out = q_out;
    w.enc_x.resize(static_cast<std::size_t>(series.m) * q_enc);
    w.target_x.resize(static_cast<std::size_t>(series.m) * q_out);
    for (int i = 0; i < series.m; ++i) {
      const double* src = series.row(i);
      for (int j = 0; j < q_enc; ++j) w.enc_x[static_cast<std::size_t>(i) * q_enc + j] = src[start + j];
      for (int j = 0; j < q_out; ++j)
        w.target_x[static_cast<std::size_t>(i) * q_out + j] = src[start + q_enc + j];
    }
    w.enc_y.assign(states.states.begin() + start, states.states.begin() + start + q_enc);
    w.out_y.assign(states.states.begin() + start + q_enc,
                   states.states.begin() + start + q_enc + q_out);
    w.enc_t = series.stamps.slice(start, q_enc);
    w.out_t = series.stamps.slice(start + q_enc, q_out);
    windows.push_back(std::move(w));
  }
  return windows;
}

std::vector<StateWindow> build_state_windows(const MarkovStateSequence& states,
                                             const TimeStampVector& stamps, int order) {
  if (order <= 0) throw DomainError("build_state_windows: order must be positive");
  const int n = states.size();
  if (stamps.size() != n) throw ShapeMismatch("build_state_windows: stamps not aligned");
  if (n < order + 1) throw SeriesTooShort("build_state_windows: need at least order + 1 stamps");

  std::vector<StateWindow> windows;
  windows.reserve(n - order);
  for (int start = 0; start + order < n; ++start) {
    StateWindow w;
    w.history.assign(states.states.begin() + start, states.states.begin() + start + order);
    w.target = states.states[start + order];
    w.stamps = stamps.slice(start, order + 1);
    windows.push_back(std::move(w));
  }
  return windows;
}

namespace {

LabeledSeries slice_labeled(const LabeledSeries& s, int begin, int count) {
  LabeledSeries out;
  out.x = TimeSeriesMatrix(s.x.m, count, s.x.space, s.x.stamps.slice(begin, count));
  for (int i = 0; i < s.x.m; ++i)
    for (int j = 0; j < count; ++j) out.x.at(i, j) = s.x.at(i, begin + j);
  out.y.n_states = s.y.n_states;
  out.y.states.assign(s.y.states.begin() + begin, s.y.states.begin() + begin + count);
  return out;
}

}  // namespace

TrainValSplit split_train_validation(const std::vector<LabeledSeries>& series, double eta,
                                     SplitMode mode) {
  if (!(eta > 0.0 && eta < 1.0)) throw DomainError("split_train_validation: eta must be in (0, 1)");
  if (series.empty()) throw EmptyInput("split_train_validation: no realizations");

  TrainValSplit split;
  if (mode == SplitMode::ByRealization) {
    const int r = static_cast<int>(series.size());
    const int n_train = static_cast<int>(std::floor(eta * r));
    if (n_train == 0 || n_train == r)
      throw DegenerateSplit("split_train_validation: a side would be empty");
    split.train.assign(series.begin(), series.begin() + n_train);
    split.validation.assign(series.begin() + n_train, series.end());
    return split;
  }

  for (const auto& s : series) {
    const int n = s.x.n;
    const int n_train = static_cast<int>(std::floor(eta * n));
    if (n_train == 0 || n_train == n)
      throw DegenerateSplit("split_train_validation: a side would be empty");
    split.train.push_back(slice_labeled(s, 0, n_train));
    split.validation.push_back(slice_labeled(s, n_train, n - n_train));
  }
  return split;
}

TimeSeriesMatrix concat_realizations(const std::vector<TimeSeriesMatrix>& parts) {
  if (parts.empty()) throw EmptyInput("concat_realizations: no realizations");
  const int m = parts.front().m;
  const Space space = parts.front().space;
  std::size_t total = 0;
  for (const auto& p : parts) {
    if (p.m != m) throw ShapeMismatch("concat_realizations: mismatched location counts");
    if (p.space != space) throw SpaceTagMismatch("concat_realizations: mismatched space tags");
    total += static_cast<std::size_t>(p.n);
  }
  const double dt = parts.front().stamps.size() > 1 ? parts.front().stamps.dt() : 1.0;
  TimeSeriesMatrix out(m, static_cast<int>(total), space,
                       TimeStampVector::uniform(0.0, dt, static_cast<int>(total)));
  std::size_t col = 0;
  for (const auto& p : parts) {
    for (int i = 0; i < m; ++i) {
      const double* src = p.row(i);
      double* dst = out.row(i) + col;
      for (int j = 0; j < p.n; ++j) dst[j] = src[j];
    }
    col += static_cast<std::size_t>(p.n);
  }
  return out;
}

}  // namespace genformer
