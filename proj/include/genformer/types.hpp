#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "genformer/errors.hpp"

namespace genformer {

enum class Space { Physical, Gaussian };
enum class StampKind { Unitless, Calendar };

struct CalendarStamp {
  int year = 0;
  int month = 1;
  int day = 1;
  int hour = 0;

  bool operator==(const CalendarStamp&) const = default;
};

// Hours elapsed since a fixed civil epoch; strictly increasing in calendar time.
std::int64_t hours_since_epoch(const CalendarStamp& s);
CalendarStamp calendar_from_hours(std::int64_t hours);

// Strictly increasing, uniformly spaced time stamps. Either unitless reals or
// year-month-day-hour calendar entries (naive local time, no timezones).
class TimeStampVector {
 public:
  TimeStampVector() = default;

  static TimeStampVector uniform(double t0, double dt, int n);
  static TimeStampVector from_calendar(std::vector<CalendarStamp> stamps);

  StampKind kind() const { return kind_; }
  int size() const;
  bool empty() const { return size() == 0; }

  double unitless_at(int j) const { return unitless_[j]; }
  const CalendarStamp& calendar_at(int j) const { return calendar_[j]; }
  const std::vector<double>& unitless() const { return unitless_; }
  const std::vector<CalendarStamp>& calendar() const { return calendar_; }

  // Spacing between consecutive stamps (hours for calendar kind).
  double dt() const;

  TimeStampVector slice(int begin, int count) const;

  // Extends the vector by `count` stamps continuing the uniform spacing.
  TimeStampVector extended(int count) const;

  // Joins two stamp vectors; the result must still be uniform and increasing.
  static TimeStampVector concat(const TimeStampVector& a, const TimeStampVector& b);

  // Throws DomainError unless strictly increasing with uniform spacing.
  void validate() const;

 private:
  StampKind kind_ = StampKind::Unitless;
  std::vector<double> unitless_;
  std::vector<CalendarStamp> calendar_;
};

// m x n matrix of process values, row i = location i, column j = time stamp j.
// The space tag tracks whether values live in physical or standard-Gaussian
// space and is checked at module boundaries.
struct TimeSeriesMatrix {
  int m = 0;
  int n = 0;
  std::vector<double> data;  // row-major, data[i * n + j]
  Space space = Space::Physical;
  TimeStampVector stamps;

  TimeSeriesMatrix() = default;
  TimeSeriesMatrix(int m_, int n_, Space space_, TimeStampVector stamps_);

  double& at(int i, int j) { return data[static_cast<std::size_t>(i) * n + j]; }
  double at(int i, int j) const { return data[static_cast<std::size_t>(i) * n + j]; }
  const double* row(int i) const { return data.data() + static_cast<std::size_t>(i) * n; }
  double* row(int i) { return data.data() + static_cast<std::size_t>(i) * n; }

  void validate() const;
};

// Integer Markov state labels aligned with a realization's time stamps.
struct MarkovStateSequence {
  std::vector<int> states;
  int n_states = 0;

  int size() const { return static_cast<int>(states.size()); }
  void validate() const;
};

// A realization paired with its Markov state sequence.
struct LabeledSeries {
  TimeSeriesMatrix x;
  MarkovStateSequence y;
};

struct LrDrop {
  int epoch = 0;
  double lr = 0.0;
};

// Model-architecture and training hyperparameters shared by the deep models.
struct HyperParams {
  int q_enc_in = 40;
  int q_out = 20;
  int q_dec_in = 20;
  int n_clusters = 300;
  int d_model = 64;
  int d_ff = 128;
  int n_head = 4;
  int n_enc = 1;
  int n_dec = 1;
  int n_markov = 1;
  int markov_order = 10;

  double eta = 0.9;
  double dropout_rate = 0.05;
  double lr_initial = 1e-4;
  std::vector<LrDrop> lr_drops;  // absolute learning rates applied at given epochs
  int max_epochs = 20;
  int batch_size = 128;
  int steps_per_epoch = 0;  // 0 = use every window each epoch
  int early_stop_patience = 3;
  double focal_gamma = 2.0;
  double tail_class_weight = 1.3;
  std::string loss = "l1";  // "l1" | "l2"

  void validate() const;

  double lr_at_epoch(int epoch) const;
};

}  // namespace genformer
