#include "mocpd/csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace mocpd::io {

namespace {

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

double parse_double(const std::string& field, std::size_t line) {
  double out = 0.0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  const auto [ptr, ec] = std::from_chars(begin, end, out);
  if (ec != std::errc{} || ptr != end) throw CsvError("malformed number '" + field + "'", line);
  return out;
}

std::size_t parse_index(const std::string& field, std::size_t line) {
  std::size_t out = 0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  const auto [ptr, ec] = std::from_chars(begin, end, out);
  if (ec != std::errc{} || ptr != end) throw CsvError("malformed index '" + field + "'", line);
  return out;
}

std::ifstream open_or_throw(const std::string& path) {
  std::ifstream in(path);
  if (!in.good()) throw std::runtime_error("cannot open " + path);
  return in;
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void atomic_write_text(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out.good()) throw std::runtime_error("cannot write " + tmp);
    out << content;
    if (!out.good()) throw std::runtime_error("write failed for " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

std::vector<SeriesPoint> read_series_csv(const std::string& path) {
  std::ifstream in = open_or_throw(path);
  std::string line;
  std::size_t lineno = 0;
  std::vector<SeriesPoint> out;

  while (std::getline(in, line)) {
    ++lineno;
    line = strip_cr(line);
    if (lineno == 1) {
      if (line != "index,value") throw CsvError("expected header 'index,value'", lineno);
      continue;
    }
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw CsvError("expected 'index,value' row", lineno);
    SeriesPoint pt;
    pt.index = parse_index(line.substr(0, comma), lineno);
    pt.value = parse_double(line.substr(comma + 1), lineno);
    if (!std::isfinite(pt.value)) throw CsvError("non-finite value", lineno);
    const std::size_t expected = out.size();
    if (pt.index != expected) throw CsvError("non-contiguous indices", lineno);
    out.push_back(pt);
  }
  return out;
}

void write_series_csv(const std::string& path, const std::vector<double>& values) {
  std::ostringstream body;
  body << "index,value\n";
  for (std::size_t i = 0; i < values.size(); ++i)
    body << i << ',' << format_double(values[i]) << '\n';
  atomic_write_text(path, body.str());
}

std::vector<std::size_t> read_truth_csv(const std::string& path) {
  std::ifstream in = open_or_throw(path);
  std::string line;
  std::size_t lineno = 0;
  std::vector<std::size_t> out;
  while (std::getline(in, line)) {
    ++lineno;
    line = strip_cr(line);
    if (lineno == 1) {
      if (line != "cp_index") throw CsvError("expected header 'cp_index'", lineno);
      continue;
    }
    if (line.empty()) continue;
    out.push_back(parse_index(line, lineno));
  }
  return out;
}

void write_truth_csv(const std::string& path, const std::vector<std::size_t>& cps) {
  std::ostringstream body;
  body << "cp_index\n";
  for (std::size_t cp : cps) body << cp << '\n';
  atomic_write_text(path, body.str());
}

std::vector<std::size_t> read_detection_indices_csv(const std::string& path) {
  std::ifstream in = open_or_throw(path);
  std::string line;
  std::size_t lineno = 0;
  std::vector<std::size_t> out;
  while (std::getline(in, line)) {
    ++lineno;
    line = strip_cr(line);
    if (lineno == 1) {
      if (line != "index,score,threshold")
        throw CsvError("expected header 'index,score,threshold'", lineno);
      continue;
    }
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw CsvError("expected 'index,score,threshold' row", lineno);
    out.push_back(parse_index(line.substr(0, comma), lineno));
  }
  return out;
}

void write_detections_csv(const std::string& path, const std::vector<Detection>& detections) {
  std::ostringstream body;
  body << "index,score,threshold\n";
  for (const Detection& d : detections)
    body << d.index << ',' << format_double(d.score) << ',' << format_double(d.threshold_at)
         << '\n';
  atomic_write_text(path, body.str());
}

void write_trace_csv(const std::string& path, const std::vector<ScorePoint>& trace) {
  std::ostringstream body;
  body << "index,score,threshold\n";
  for (const ScorePoint& p : trace)
    body << p.index << ',' << format_double(p.score) << ',' << format_double(p.threshold) << '\n';
  atomic_write_text(path, body.str());
}

}  // namespace mocpd::io
