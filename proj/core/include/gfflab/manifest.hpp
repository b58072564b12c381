#pragma once

#include <fstream>
#include <map>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "gfflab/stats.hpp"

namespace gfflab::io {

/// CSV with a fixed header row; numeric fields at full double precision.
class CsvWriter {
 public:
  explicit CsvWriter(const std::string& path);
  void header(const std::vector<std::string>& columns);
  void field(const std::string& v);
  void field(double v);
  void field(std::uint64_t v);
  void field(std::int64_t v);
  void field(int v);
  void end_row();
  /// parameter columns for an Estimate: mean, sem, n, successes,
  /// wilson_low, wilson_high, upper95
  void estimate_fields(const stats::Estimate& e);
  static std::vector<std::string> estimate_columns();
  void close();
  const std::string& path() const { return path_; }

 private:
  std::string path_;
  std::ofstream os_;
  bool row_started_ = false;
};

std::string sha256_file(const std::string& path);

/// Reproducibility sidecar: config echo, timestamps, acceptance rates, and
/// digests of every emitted file.
struct RunManifest {
  nlohmann::json config;
  std::string software_version;
  std::string started_utc;
  std::string finished_utc;
  double wall_seconds = 0;
  std::map<std::string, double> acceptance_rates;
  std::vector<std::string> files;

  void write(const std::string& path) const;
};

std::string utc_now();

}  // namespace gfflab::io
