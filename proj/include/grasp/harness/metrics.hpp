#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

namespace grasp::harness {

inline constexpr int kMetricsSchemaVersion = 1;

// Column order of metrics.csv. `kind` is "episode" or "update"; columns that do not apply to a
// row's kind are left empty.
const std::vector<std::string>& metrics_columns();

// Single writer; each row is flushed as it is written.
class MetricsWriter {
 public:
  // Truncates and writes the header, or appends to an existing file when `append` is set.
  MetricsWriter(const std::filesystem::path& path, bool append);

  // Unknown column names throw Config.
  void write(const std::map<std::string, std::string>& row);

 private:
  std::ofstream out_;
};

// Fixed "%.9g" rendering so identical doubles always print identically.
std::string fmt(double v);

}  // namespace grasp::harness
