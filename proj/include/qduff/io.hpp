#pragma once

// Plain-text exports: CSV tables with a header row and shortest
// round-trip doubles, JSON state snapshots, and grid CSVs whose first line
// carries the grid metadata.

#include <Eigen/Dense>

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

#include "qduff/fock.hpp"

namespace qduff {

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, std::initializer_list<std::string_view> header);
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);

  CsvWriter& operator<<(double v);
  CsvWriter& operator<<(long v);
  CsvWriter& operator<<(int v) { return *this << static_cast<long>(v); }
  CsvWriter& operator<<(unsigned long v);
  CsvWriter& operator<<(unsigned long long v) { return *this << static_cast<unsigned long>(v); }
  CsvWriter& operator<<(std::string_view v);
  CsvWriter& operator<<(const char* v) { return *this << std::string_view(v); }
  /// Ends the current row.
  void end_row();
  void close();

 private:
  void separator();
  std::ofstream out_;
  std::filesystem::path path_;
  bool row_started_ = false;
};

/// Reads a CSV with a header row into string cells (no quoting support).
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(std::string_view name) const;
};
CsvTable read_csv(const std::filesystem::path& path);

/// {"N": n, "coeffs": [[Re C_0, Im C_0], ...]}
void write_state_json(const std::filesystem::path& path, const FockState& state, double t);
/// {"N": n, "rho": [[[Re, Im], ...], ...]} row-major.
void write_density_json(const std::filesystem::path& path, const Eigen::MatrixXcd& rho,
                        long samples);

/// Loads either snapshot format as a density matrix.
Eigen::MatrixXcd read_density_json(const std::filesystem::path& path);

struct GridAxis {
  double min = -1.0;
  double max = 1.0;
  int count = 3;

  Eigen::VectorXd points() const;
};

/// First line: "# q_min=..,q_max=..,q_count=..,p_min=..,p_max=..,p_count=..";
/// then one row per q value with p_count comma-separated entries.
void write_grid_csv(const std::filesystem::path& path, const Eigen::MatrixXd& values,
                    const GridAxis& q, const GridAxis& p);

/// Writes text atomically enough for our needs: to a temporary file, then renamed.
void write_text(const std::filesystem::path& path, std::string_view text);

}  // namespace qduff
