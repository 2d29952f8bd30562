#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "mocpd/detector.hpp"
#include "mocpd/types.hpp"

namespace mocpd::io {

// Parse failure carrying the 1-based line number of the offending row.
class CsvError : public std::runtime_error {
 public:
  CsvError(const std::string& message, std::size_t line)
      : std::runtime_error(message + " (line " + std::to_string(line) + ")"), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Shortest round-trip-safe decimal form.
std::string format_double(double v);

// Writes via a temp file in the same directory followed by a rename, so
// readers never observe partial output.
void atomic_write_text(const std::string& path, const std::string& content);

// series.csv: header "index,value"; indices must start at 0 and increase
// by 1; values must be finite.
std::vector<SeriesPoint> read_series_csv(const std::string& path);
void write_series_csv(const std::string& path, const std::vector<double>& values);

// truth.csv: header "cp_index".
std::vector<std::size_t> read_truth_csv(const std::string& path);
void write_truth_csv(const std::string& path, const std::vector<std::size_t>& cps);

// detections.csv / trace.csv: header "index,score,threshold".
std::vector<std::size_t> read_detection_indices_csv(const std::string& path);
void write_detections_csv(const std::string& path, const std::vector<Detection>& detections);
void write_trace_csv(const std::string& path, const std::vector<ScorePoint>& trace);

}  // namespace mocpd::io
