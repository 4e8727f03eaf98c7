#include "genformer/types.hpp"

#include <cmath>

namespace genformer {

std::int64_t hours_since_epoch(const CalendarStamp& s) {
  // Days-from-civil (Howard Hinnant). Valid for all proleptic Gregorian dates.
  int y = s.year;
  int m = s.month;
  int d = s.day;
  y -= m <= 2;
  const int era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  std::int64_t days = static_cast<std::int64_t>(era) * 146097 + static_cast<int>(doe) - 719468;
  return days * 24 + s.hour;
}

CalendarStamp calendar_from_hours(std::int64_t hours) {
  std::int64_t days = hours / 24;
  int hour = static_cast<int>(hours - days * 24);
  if (hour < 0) {
    hour += 24;
    days -= 1;
  }
  std::int64_t z = days + 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  const unsigned d = doy - (153 * mp + 2) / 5 + 1;
  const unsigned m = mp + (mp < 10 ? 3 : -9);
  CalendarStamp s;
  s.year = static_cast<int>(y + (m <= 2));
  s.month = static_cast<int>(m);
  s.day = static_cast<int>(d);
  s.hour = hour;
  return s;
}

TimeStampVector TimeStampVector::uniform(double t0, double dt, int n) {
  if (n < 0 || (n > 1 && !(dt > 0.0)))
    throw DomainError("TimeStampVector::uniform: dt must be positive");
  TimeStampVector v;
  v.kind_ = StampKind::Unitless;
  v.unitless_.resize(n);
  for (int j = 0; j < n; ++j) v.unitless_[j] = t0 + dt * j;
  return v;
}

TimeStampVector TimeStampVector::from_calendar(std::vector<CalendarStamp> stamps) {
  TimeStampVector v;
  v.kind_ = StampKind::Calendar;
  v.calendar_ = std::move(stamps);
  v.validate();
  return v;
}

int TimeStampVector::size() const {
  return kind_ == StampKind::Unitless ? static_cast<int>(unitless_.size())
                                      : static_cast<int>(calendar_.size());
}

double TimeStampVector::dt() const {
  if (size() < 2) return kind_ == StampKind::Unitless ? 1.0 : 1.0;
  if (kind_ == StampKind::Unitless) return unitless_[1] - unitless_[0];
  return static_cast<double>(hours_since_epoch(calendar_[1]) - hours_since_epoch(calendar_[0]));
}

TimeStampVector TimeStampVector::slice(int begin, int count) const {
  if (begin < 0 || count < 0 || begin + count > size())
    throw DomainError("TimeStampVector::slice: range out of bounds");
  TimeStampVector v;
  v.kind_ = kind_;
  if (kind_ == StampKind::Unitless)
    v.unitless_.assign(unitless_.begin() + begin, unitless_.begin() + begin + count);
  else
    v.calendar_.assign(calendar_.begin() + begin, calendar_.begin() + begin + count);
  return v;
}

TimeStampVector TimeStampVector::extended(int count) const {
  if (count < 0) throw DomainError("TimeStampVector::extended: negative count");
  if (empty()) throw DomainError("TimeStampVector::extended: cannot extend empty stamps");
  TimeStampVector v = *this;
  if (kind_ == StampKind::Unitless) {
    double step = dt();
    double last = unitless_.back();
    for (int j = 1; j <= count; ++j) v.unitless_.push_back(last + step * j);
  } else {
    std::int64_t step = static_cast<std::int64_t>(dt());
    std::int64_t last = hours_since_epoch(calendar_.back());
    for (int j = 1; j <= count; ++j) v.calendar_.push_back(calendar_from_hours(last + step * j));
  }
  return v;
}

TimeStampVector TimeStampVector::concat(const TimeStampVector& a, const TimeStampVector& b) {
  if (a.kind_ != b.kind_) throw DomainError("TimeStampVector::concat: mixed stamp kinds");
  TimeStampVector out = a;
  if (a.kind_ == StampKind::Unitless)
    out.unitless_.insert(out.unitless_.end(), b.unitless_.begin(), b.unitless_.end());
  else
    out.calendar_.insert(out.calendar_.end(), b.calendar_.begin(), b.calendar_.end());
  out.validate();
  return out;
}

void TimeStampVector::validate() const {
  const int n = size();
  if (n < 2) return;
  if (kind_ == StampKind::Unitless) {
    const double step = unitless_[1] - unitless_[0];
    if (!(step > 0.0)) throw DomainError("time stamps must be strictly increasing");
    const double tol = 1e-9 * std::max(1.0, std::abs(step));
    for (int j = 1; j < n; ++j) {
      double d = unitless_[j] - unitless_[j - 1];
      if (!(d > 0.0)) throw DomainError("time stamps must be strictly increasing");
      if (std::abs(d - step) > tol) throw DomainError("time stamps must be uniformly spaced");
    }
  } else {
    for (const auto& s : calendar_) {
      if (s.month < 1 || s.month > 12 || s.day < 1 || s.day > 31 || s.hour < 0 || s.hour > 23)
        throw DomainError("calendar stamp out of range");
    }
    const std::int64_t step = hours_since_epoch(calendar_[1]) - hours_since_epoch(calendar_[0]);
    if (step <= 0) throw DomainError("time stamps must be strictly increasing");
    for (int j = 1; j < n; ++j) {
      std::int64_t d = hours_since_epoch(calendar_[j]) - hours_since_epoch(calendar_[j - 1]);
      if (d != step) throw DomainError("calendar stamps must be uniformly spaced");
    }
  }
}

TimeSeriesMatrix::TimeSeriesMatrix(int m_, int n_, Space space_, TimeStampVector stamps_)
    : m(m_), n(n_), data(static_cast<std::size_t>(m_) * n_, 0.0), space(space_),
      stamps(std::move(stamps_)) {
  if (m < 0 || n < 0) throw DomainError("TimeSeriesMatrix: negative dimensions");
  if (stamps.size() != n) throw ShapeMismatch("TimeSeriesMatrix: stamps length != n");
}

void TimeSeriesMatrix::validate() const {
  if (static_cast<std::size_t>(m) * n != data.size())
    throw ShapeMismatch("TimeSeriesMatrix: data size != m*n");
  if (stamps.size() != n) throw ShapeMismatch("TimeSeriesMatrix: stamps length != n");
  stamps.validate();
  for (double v : data)
    if (!std::isfinite(v)) throw NonFiniteResult("TimeSeriesMatrix: non-finite entry");
}

void MarkovStateSequence::validate() const {
  if (n_states <= 0) throw DomainError("MarkovStateSequence: n_states must be positive");
  for (int s : states)
    if (s < 0 || s >= n_states)
      throw UnknownState("MarkovStateSequence: state out of [0, n_states)");
}

void HyperParams::validate() const {
  auto positive = [](int v, const char* name) {
    if (v <= 0) throw ConfigError(std::string("HyperParams: ") + name + " must be positive");
  };
  positive(q_enc_in, "q_enc_in");
  positive(q_out, "q_out");
  positive(q_dec_in, "q_dec_in");
  positive(n_clusters, "n_clusters");
  positive(d_model, "d_model");
  positive(d_ff, "d_ff");
  positive(n_head, "n_head");
  positive(n_enc, "n_enc");
  positive(n_dec, "n_dec");
  positive(n_markov, "n_markov");
  positive(markov_order, "markov_order");
  positive(max_epochs, "max_epochs");
  positive(batch_size, "batch_size");
  positive(early_stop_patience, "early_stop_patience");
  if (d_model % n_head != 0) throw ConfigError("HyperParams: d_model must be divisible by n_head");
  if (q_dec_in > q_enc_in) throw ConfigError("HyperParams: q_dec_in must be <= q_enc_in");
  if (!(eta > 0.0 && eta < 1.0)) throw ConfigError("HyperParams: eta must lie in (0, 1)");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0))
    throw ConfigError("HyperParams: dropout_rate must lie in [0, 1)");
  if (!(lr_initial > 0.0)) throw ConfigError("HyperParams: lr_initial must be positive");
  if (loss != "l1" && loss != "l2") throw ConfigError("HyperParams: loss must be 'l1' or 'l2'");
}

double HyperParams::lr_at_epoch(int epoch) const {
  double lr = lr_initial;
  for (const auto& drop : lr_drops)
    if (epoch >= drop.epoch) lr = drop.lr;
  return lr;
}

}  // namespace genformer
