#include "genformer/windprep.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <map>

#include "genformer/io.hpp"

namespace genformer {

std::vector<WindRow> read_wind_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open: " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty wind CSV: " + path.string());
  // header: station_id,year,month,day,hour,wind_speed
  std::vector<WindRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    WindRow row;
    std::size_t pos = 0;
    auto next_field = [&]() {
      std::size_t comma = line.find(',', pos);
      std::string f = line.substr(pos, comma == std::string::npos ? std::string::npos
                                                                  : comma - pos);
      pos = comma == std::string::npos ? line.size() : comma + 1;
      if (!f.empty() && f.back() == '\r') f.pop_back();
      return f;
    };
    row.station_id = next_field();
    auto to_int = [&](const std::string& f) {
      int v = 0;
      auto res = std::from_chars(f.data(), f.data() + f.size(), v);
      if (res.ec != std::errc{}) throw IoError("bad integer in wind CSV: " + f);
      return v;
    };
    row.stamp.year = to_int(next_field());
    row.stamp.month = to_int(next_field());
    row.stamp.day = to_int(next_field());
    row.stamp.hour = to_int(next_field());
    std::string speed = next_field();
    if (speed.empty()) {
      row.wind_speed = std::numeric_limits<double>::quiet_NaN();  // recorded as missing
    } else {
      auto res = std::from_chars(speed.data(), speed.data() + speed.size(), row.wind_speed);
      if (res.ec != std::errc{}) throw IoError("bad wind speed: " + speed);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

WindPreprocessResult wind_preprocess(const std::vector<WindRow>& rows, int ma_window) {
  if (rows.empty()) throw EmptyInput("wind_preprocess: no rows");
  if (ma_window < 1) throw DomainError("wind_preprocess: window must be positive");

  // Group rows per station over the common hourly grid.
  std::map<std::string, std::map<std::int64_t, double>> by_station;
  for (const auto& row : rows) {
    auto hour = hours_since_epoch(row.stamp);
    auto [it, inserted] = by_station[row.station_id].try_emplace(hour, row.wind_speed);
    if (!inserted) throw MisalignedStations("wind_preprocess: duplicate stamp for station " +
                                            row.station_id);
  }

  std::int64_t lo = 0, hi = 0;
  bool first = true;
  for (const auto& [id, values] : by_station) {
    std::int64_t s_lo = values.begin()->first;
    std::int64_t s_hi = values.rbegin()->first;
    if (first) {
      lo = s_lo;
      hi = s_hi;
      first = false;
    } else if (s_lo != lo || s_hi != hi) {
      throw MisalignedStations("wind_preprocess: stations cover different stamp ranges");
    }
  }

  const int m = static_cast<int>(by_station.size());
  const int n = static_cast<int>(hi - lo + 1);
  std::vector<CalendarStamp> cal(n);
  for (int j = 0; j < n; ++j) cal[j] = calendar_from_hours(lo + j);
  TimeSeriesMatrix series(m, n, Space::Physical, TimeStampVector::from_calendar(cal));

  WindPreprocessResult result{std::move(series), {}};
  result.record.hourly_means.assign(m, std::vector<double>(24, 0.0));
  result.record.moving_avg.assign(m, std::vector<double>(n, 0.0));
  result.record.zero_filled.assign(m, 0);

  int i = 0;
  for (const auto& [id, values] : by_station) {
    result.record.station_ids.push_back(id);
    double* row = result.series.row(i);
    for (int j = 0; j < n; ++j) {
      auto it = values.find(lo + j);
      if (it == values.end() || !std::isfinite(it->second)) {
        row[j] = 0.0;  // missing wind speeds are set to 0
        result.record.zero_filled[i] += 1;
      } else {
        row[j] = it->second;
      }
    }

    // Hour-of-day means across all days, then removal of that daily cycle.
    std::array<double, 24> sums{};
    std::array<std::int64_t, 24> counts{};
    for (int j = 0; j < n; ++j) {
      int h = result.series.stamps.calendar_at(j).hour;
      sums[h] += row[j];
      counts[h] += 1;
    }
    for (int h = 0; h < 24; ++h)
      result.record.hourly_means[i][h] = counts[h] ? sums[h] / counts[h] : 0.0;
    for (int j = 0; j < n; ++j)
      row[j] -= result.record.hourly_means[i][result.series.stamps.calendar_at(j).hour];

    // Centered circular moving average, window offsets [-W/2, W/2).
    const int w = ma_window;
    const int half = w / 2;
    auto wrap = [n](int idx) {
      idx %= n;
      return idx < 0 ? idx + n : idx;
    };
    double window_sum = 0.0;
    for (int off = -half; off < w - half; ++off) window_sum += row[wrap(off)];
    std::vector<double>& ma = result.record.moving_avg[i];
    for (int j = 0; j < n; ++j) {
      ma[j] = window_sum / w;
      window_sum -= row[wrap(j - half)];
      window_sum += row[wrap(j + w - half)];
    }
    for (int j = 0; j < n; ++j) row[j] -= ma[j];
    ++i;
  }
  return result;
}

WindPreprocessResult wind_preprocess_csv(const std::filesystem::path& path, int ma_window) {
  return wind_preprocess(read_wind_csv(path), ma_window);
}

nlohmann::json PreprocessRecord::to_json() const {
  nlohmann::json j;
  j["station_ids"] = station_ids;
  j["hourly_means"] = hourly_means;
  j["zero_filled"] = zero_filled;
  j["moving_avg"] = moving_avg;
  return j;
}

void PreprocessRecord::save(const std::filesystem::path& path) const {
  io::write_json_atomic(path, to_json());
}

}  // namespace genformer
