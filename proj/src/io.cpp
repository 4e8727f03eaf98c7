#include "genformer/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace genformer::io {

namespace fs = std::filesystem;

void write_text_atomic(const fs::path& path, const std::string& content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw IoError("write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

void write_binary_atomic(const fs::path& path, const void* data, std::size_t bytes) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + tmp.string());
    out.write(static_cast<const char*>(data), static_cast<std::streamsize>(bytes));
    if (!out) throw IoError("write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

nlohmann::json read_json(const fs::path& path) {
  try {
    return nlohmann::json::parse(read_text(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw IoError("invalid JSON in " + path.string() + ": " + e.what());
  }
}

void write_json_atomic(const fs::path& path, const nlohmann::json& j) {
  write_text_atomic(path, j.dump(2) + "\n");
}

std::string format_double(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc{}) throw IoError("format_double failed");
  return std::string(buf, end);
}

std::vector<double> read_double_blob(const fs::path& path) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw IoError("cannot open: " + path.string());
  const std::streamsize bytes = in.tellg();
  if (bytes % static_cast<std::streamsize>(sizeof(double)) != 0)
    throw IoError("blob size not a multiple of 8: " + path.string());
  std::vector<double> out(static_cast<std::size_t>(bytes) / sizeof(double));
  in.seekg(0);
  in.read(reinterpret_cast<char*>(out.data()), bytes);
  if (!in) throw IoError("read failed: " + path.string());
  return out;
}

void write_realization_csv(const fs::path& path, const TimeSeriesMatrix& series) {
  std::ostringstream out;
  const bool calendar = series.stamps.kind() == StampKind::Calendar;
  if (calendar)
    out << "year,month,day,hour";
  else
    out << "t";
  for (int i = 1; i <= series.m; ++i) out << ",x" << i;
  out << "\n";
  for (int j = 0; j < series.n; ++j) {
    if (calendar) {
      const auto& s = series.stamps.calendar_at(j);
      out << s.year << ',' << s.month << ',' << s.day << ',' << s.hour;
    } else {
      out << format_double(series.stamps.unitless_at(j));
    }
    for (int i = 0; i < series.m; ++i) out << ',' << format_double(series.at(i, j));
    out << "\n";
  }
  write_text_atomic(path, out.str());
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  fields.push_back(cur);
  return fields;
}

double parse_double(const std::string& s, const fs::path& path) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw IoError("bad numeric field '" + s + "' in " + path.string());
  return v;
}

int parse_int(const std::string& s, const fs::path& path) {
  int v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw IoError("bad integer field '" + s + "' in " + path.string());
  return v;
}

}  // namespace

TimeSeriesMatrix read_realization_csv(const fs::path& path, Space space) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open: " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty CSV: " + path.string());
  auto header = split_csv_line(line);
  bool calendar;
  int stamp_cols;
  if (header.size() >= 2 && header[0] == "t") {
    calendar = false;
    stamp_cols = 1;
  } else if (header.size() >= 5 && header[0] == "year" && header[1] == "month" &&
             header[2] == "day" && header[3] == "hour") {
    calendar = true;
    stamp_cols = 4;
  } else {
    throw IoError("unrecognized realization CSV header in " + path.string());
  }
  const int m = static_cast<int>(header.size()) - stamp_cols;
  if (m < 1) throw IoError("no value columns in " + path.string());

  std::vector<double> t_unitless;
  std::vector<CalendarStamp> t_calendar;
  std::vector<double> values;  // column-major rows appended per line
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (static_cast<int>(fields.size()) != stamp_cols + m)
      throw IoError("ragged CSV row in " + path.string());
    if (calendar) {
      CalendarStamp s;
      s.year = parse_int(fields[0], path);
      s.month = parse_int(fields[1], path);
      s.day = parse_int(fields[2], path);
      s.hour = parse_int(fields[3], path);
      t_calendar.push_back(s);
    } else {
      t_unitless.push_back(parse_double(fields[0], path));
    }
    for (int i = 0; i < m; ++i) values.push_back(parse_double(fields[stamp_cols + i], path));
  }
  const int n = calendar ? static_cast<int>(t_calendar.size()) : static_cast<int>(t_unitless.size());
  TimeStampVector stamps;
  if (calendar) {
    stamps = TimeStampVector::from_calendar(std::move(t_calendar));
  } else {
    if (n == 0) throw IoError("no data rows in " + path.string());
    double dt = n > 1 ? t_unitless[1] - t_unitless[0] : 1.0;
    stamps = TimeStampVector::uniform(t_unitless[0], dt, n);
    for (int j = 0; j < n; ++j)
      if (std::abs(stamps.unitless_at(j) - t_unitless[j]) > 1e-9 * std::max(1.0, std::abs(dt)))
        throw IoError("non-uniform time stamps in " + path.string());
  }
  TimeSeriesMatrix series(m, n, space, std::move(stamps));
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < m; ++i) series.at(i, j) = values[static_cast<std::size_t>(j) * m + i];
  series.validate();
  return series;
}

std::vector<TimeSeriesMatrix> read_realization_dir(const fs::path& dir, Space space) {
  if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".csv")
      files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) throw IoError("no .csv files under " + dir.string());
  std::vector<TimeSeriesMatrix> out;
  out.reserve(files.size());
  for (const auto& f : files) out.push_back(read_realization_csv(f, space));
  return out;
}

void write_realization_dir(const fs::path& dir, const std::vector<TimeSeriesMatrix>& series) {
  fs::create_directories(dir);
  char name[32];
  for (std::size_t r = 0; r < series.size(); ++r) {
    std::snprintf(name, sizeof(name), "realization_%05zu.csv", r);
    write_realization_csv(dir / name, series[r]);
  }
}

}  // namespace genformer::io
