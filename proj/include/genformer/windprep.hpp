#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "genformer/types.hpp"

namespace genformer {

// Everything subtracted during wind preprocessing, kept for inverse mapping.
struct PreprocessRecord {
  std::vector<std::string> station_ids;
  std::vector<std::vector<double>> hourly_means;  // per station, 24 values
  std::vector<std::vector<double>> moving_avg;    // per station, n values
  std::vector<std::int64_t> zero_filled;          // per station

  nlohmann::json to_json() const;
  void save(const std::filesystem::path& path) const;
};

struct WindPreprocessResult {
  TimeSeriesMatrix series;  // Physical space, detrended, calendar stamps
  PreprocessRecord record;
};

// Long-format input rows: station_id, year, month, day, hour, wind_speed.
struct WindRow {
  std::string station_id;
  CalendarStamp stamp;
  double wind_speed = 0.0;
};

std::vector<WindRow> read_wind_csv(const std::filesystem::path& path);

// Per station: zero-fill missing hours over the common hourly grid, subtract
// hour-of-day means (24 values over all days), subtract a centered circular
// moving average (window 720). Stations must cover the same stamp range.
WindPreprocessResult wind_preprocess(const std::vector<WindRow>& rows, int ma_window = 720);
WindPreprocessResult wind_preprocess_csv(const std::filesystem::path& path, int ma_window = 720);

}  // namespace genformer
