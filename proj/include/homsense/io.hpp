#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "homsense/bench.hpp"
#include "homsense/calibration.hpp"
#include "homsense/fisher.hpp"

#include <json.hpp>

namespace homsense {

inline constexpr int kExitSuccess = 0;
inline constexpr int kExitUsage = 64;
inline constexpr int kExitFormat = 65;
inline constexpr int kExitNumerical = 70;

// Input-file problem; message carries the offending line number.
struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Ordered key=value echo written as a '#' header block so every output file
// carries enough to rerun it bit-identically.
struct RunManifest {
  std::string command;
  std::vector<std::pair<std::string, std::string>> entries;

  void add(const std::string& key, const std::string& value);
  void add(const std::string& key, double value);
  void add(const std::string& key, std::int64_t value);
  void add_seed(std::uint64_t seed);
};

// Epoch seconds from SOURCE_DATE_EPOCH, else 0. Keeps reruns bit-identical.
std::int64_t manifest_timestamp();

// Shortest representation that parses back to the same double.
std::string format_double(double value);

// Strict full-string numeric parses; throw FormatError mentioning line_no.
double parse_double(const std::string& text, int line_no);
std::int64_t parse_int64(const std::string& text, int line_no);

// Writes to <path>.tmp then renames, so partial files are never visible.
void write_text_atomic(const std::string& path, const std::string& content);

std::string manifest_block(const RunManifest& manifest);

struct ScanRow {
  double tau_as = 0.0;
  std::int64_t n1 = 0;
  std::int64_t n2 = 0;
  double p2_model = 0.0;
  double fisher_per_pair = 0.0;
};

struct ScanFile {
  std::vector<std::pair<std::string, std::string>> manifest;
  std::vector<ScanRow> rows;

  // manifest lookup; empty string when absent
  std::string manifest_value(const std::string& key) const;
};

void write_scan_csv(const std::string& path, const RunManifest& manifest,
                    const std::vector<ScanRow>& rows);
ScanFile read_scan_csv(const std::string& path);

std::vector<ScanRecord> scan_records(const ScanFile& file);
CoincidenceCounts total_counts(const ScanFile& file);

void write_profile_csv(const std::string& path, const RunManifest& manifest,
                       const InformationProfile& profile);

struct FringeRow {
  double tau_as = 0.0;
  double theta_rad = 0.0;
  double fisher_ps2 = 0.0;
  int defined = 1;
};

void write_fringe_csv(const std::string& path, const RunManifest& manifest,
                      const std::vector<FringeRow>& rows);

nlohmann::json to_json(const RunManifest& manifest);
nlohmann::json to_json(const CalibrationRecord& record);
nlohmann::json to_json(const ProtocolResult& result);

CalibrationRecord calibration_from_json(const nlohmann::json& j);

}  // namespace homsense
