#pragma once

// Output helpers: RFC-4180 CSV with 17 significant digits, JSON documents and
// minimal SVG line plots.

#include "sslab/kernels.hpp"

#include <json.hpp>

#include <filesystem>
#include <initializer_list>
#include <iosfwd>
#include <string>
#include <vector>

namespace sslab {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shortest round-trip-safe text of a double, fixed at 17 significant digits.
std::string format_real(double v);

class CsvWriter {
 public:
  CsvWriter(std::ostream& os, std::vector<std::string> header);
  void row(std::initializer_list<double> values);
  void row(const std::vector<double>& values);
  /// Mixed text/number row; text cells are quoted when needed.
  void row_cells(const std::vector<std::string>& cells);

 private:
  std::ostream& os_;
  std::size_t columns_;
};

std::string csv_escape(const std::string& cell);

/// JSON numbers are written with 17 significant digits; non-finite values
/// become null.
nlohmann::ordered_json json_real(double v);

void write_text_file(const std::filesystem::path& path, const std::string& content);

struct SvgSeries {
  std::vector<double> xs;
  std::vector<double> ys;
  std::string stroke = "#1f77b4";
  double width = 1.0;
  bool markers = false;  // draw points instead of a polyline
};

struct SvgPlot {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<SvgSeries> series;

  /// 800x600 viewbox with labeled axes.
  std::string render() const;
};

/// 64-bit FNV-1a, used for config hashes in run manifests.
std::uint64_t fnv1a(const std::string& text);
std::string hex64(std::uint64_t v);

}  // namespace sslab
