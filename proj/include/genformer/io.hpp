#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "genformer/types.hpp"

namespace genformer::io {

// Atomic file writes: write to <path>.tmp then rename.
void write_text_atomic(const std::filesystem::path& path, const std::string& content);
void write_binary_atomic(const std::filesystem::path& path, const void* data, std::size_t bytes);
std::string read_text(const std::filesystem::path& path);
nlohmann::json read_json(const std::filesystem::path& path);
void write_json_atomic(const std::filesystem::path& path, const nlohmann::json& j);

// Realization CSV: header `t,x1,...,xm` (unitless) or
// `year,month,day,hour,x1,...,xm` (calendar), one row per time stamp.
void write_realization_csv(const std::filesystem::path& path, const TimeSeriesMatrix& series);
TimeSeriesMatrix read_realization_csv(const std::filesystem::path& path,
                                      Space space = Space::Physical);

// Reads every *.csv under dir in lexicographic order.
std::vector<TimeSeriesMatrix> read_realization_dir(const std::filesystem::path& dir,
                                                   Space space = Space::Physical);
void write_realization_dir(const std::filesystem::path& dir,
                           const std::vector<TimeSeriesMatrix>& series);

// Lossless decimal formatting used by every CSV emission.
std::string format_double(double v);

std::vector<double> read_double_blob(const std::filesystem::path& path);

}  // namespace genformer::io
