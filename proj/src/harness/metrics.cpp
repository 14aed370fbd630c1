#include "grasp/harness/metrics.hpp"

#include <cstdio>

#include "grasp/error.hpp"

namespace grasp::harness {

const std::vector<std::string>& metrics_columns() {
  static const std::vector<std::string> cols{
      "kind",      "global_step", "episode",    "update",      "episode_return", "success", "lesson",
      "r_touch",   "r_collision", "r_pos",      "r_rot",       "r_fmt",          "r_fft",   "policy_loss",
      "value_loss", "entropy",    "kl",         "clip_fraction", "lr",           "beta",    "wall_clock_s"};
  return cols;
}

MetricsWriter::MetricsWriter(const std::filesystem::path& path, bool append) {
  const bool fresh = !append || !std::filesystem::exists(path);
  out_.open(path, fresh ? std::ios::trunc : std::ios::app);
  if (!out_) throw Error(ErrorKind::IoError, "cannot open metrics file '" + path.string() + "'");
  if (fresh) {
    const auto& cols = metrics_columns();
    for (std::size_t i = 0; i < cols.size(); ++i) out_ << (i ? "," : "") << cols[i];
    out_ << "\n";
    out_.flush();
  }
}

void MetricsWriter::write(const std::map<std::string, std::string>& row) {
  const auto& cols = metrics_columns();
  for (const auto& [k, v] : row) {
    bool known = false;
    for (const auto& c : cols) known = known || c == k;
    if (!known) throw Error(ErrorKind::Config, "unknown metrics column '" + k + "'");
  }
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (i) out_ << ",";
    if (const auto it = row.find(cols[i]); it != row.end()) out_ << it->second;
  }
  out_ << "\n";
  out_.flush();
  if (!out_) throw Error(ErrorKind::IoError, "failed writing metrics");
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

}  // namespace grasp::harness
