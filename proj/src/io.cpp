#include "homsense/io.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "homsense/units.hpp"

namespace homsense {

namespace {

constexpr const char* kScanHeader = "tau_as,n1,n2,p2_model,fisher_per_pair";

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string current;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(current);
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  fields.push_back(current);
  return fields;
}

}  // namespace

void RunManifest::add(const std::string& key, const std::string& value) {
  entries.emplace_back(key, value);
}

void RunManifest::add(const std::string& key, double value) {
  entries.emplace_back(key, format_double(value));
}

void RunManifest::add(const std::string& key, std::int64_t value) {
  entries.emplace_back(key, std::to_string(value));
}

void RunManifest::add_seed(std::uint64_t seed) {
  entries.emplace_back("seed", std::to_string(seed));
}

std::int64_t manifest_timestamp() {
  const char* epoch = std::getenv("SOURCE_DATE_EPOCH");
  if (epoch == nullptr || *epoch == '\0') return 0;
  char* end = nullptr;
  errno = 0;
  const long long value = std::strtoll(epoch, &end, 10);
  if (errno != 0 || end == epoch || *end != '\0') return 0;
  return static_cast<std::int64_t>(value);
}

std::string format_double(double value) {
  // shortest round-trip form: try increasing precision until it parses back
  char buffer[40];
  for (int precision = 1; precision <= 17; ++precision) {
    std::snprintf(buffer, sizeof(buffer), "%.*g", precision, value);
    if (std::strtod(buffer, nullptr) == value) return buffer;
  }
  return buffer;
}

double parse_double(const std::string& text, int line_no) {
  if (text.empty()) {
    throw FormatError("line " + std::to_string(line_no) + ": empty numeric field");
  }
  char* end = nullptr;
  errno = 0;
  const double value = std::strtod(text.c_str(), &end);
  // strtod flags subnormals with ERANGE too; only overflow is unusable
  const bool overflow = errno == ERANGE && (value == HUGE_VAL || value == -HUGE_VAL);
  if (end != text.c_str() + text.size() || overflow) {
    throw FormatError("line " + std::to_string(line_no) + ": bad number '" +
                      text + "'");
  }
  return value;
}

std::int64_t parse_int64(const std::string& text, int line_no) {
  if (text.empty()) {
    throw FormatError("line " + std::to_string(line_no) + ": empty count field");
  }
  char* end = nullptr;
  errno = 0;
  const long long value = std::strtoll(text.c_str(), &end, 10);
  if (end != text.c_str() + text.size() || errno == ERANGE) {
    throw FormatError("line " + std::to_string(line_no) + ": bad count '" +
                      text + "'");
  }
  return static_cast<std::int64_t>(value);
}

void write_text_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp + " for writing");
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

std::string manifest_block(const RunManifest& manifest) {
  std::ostringstream out;
  out << "# command=" << manifest.command << "\n";
  out << "# artifact_version=" << kArtifactVersion << "\n";
  out << "# timestamp=" << manifest_timestamp() << "\n";
  for (const auto& [key, value] : manifest.entries) {
    out << "# " << key << "=" << value << "\n";
  }
  return out.str();
}

std::string ScanFile::manifest_value(const std::string& key) const {
  for (const auto& [k, v] : manifest) {
    if (k == key) return v;
  }
  return {};
}

void write_scan_csv(const std::string& path, const RunManifest& manifest,
                    const std::vector<ScanRow>& rows) {
  std::ostringstream out;
  out << manifest_block(manifest);
  out << kScanHeader << "\n";
  for (const ScanRow& row : rows) {
    out << format_double(row.tau_as) << ',' << row.n1 << ',' << row.n2 << ','
        << format_double(row.p2_model) << ','
        << format_double(row.fisher_per_pair) << "\n";
  }
  write_text_atomic(path, out.str());
}

ScanFile read_scan_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path);
  ScanFile file;
  std::string line;
  int line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::string body = line.substr(1);
      if (!body.empty() && body.front() == ' ') body.erase(0, 1);
      const auto eq = body.find('=');
      if (eq != std::string::npos) {
        file.manifest.emplace_back(body.substr(0, eq), body.substr(eq + 1));
      }
      continue;
    }
    if (!header_seen) {
      if (line != kScanHeader) {
        throw FormatError("line " + std::to_string(line_no) +
                          ": expected header '" + kScanHeader + "', got '" +
                          line + "'");
      }
      header_seen = true;
      continue;
    }
    const auto fields = split_fields(line);
    if (fields.size() != 5) {
      throw FormatError("line " + std::to_string(line_no) + ": expected 5 fields, got " +
                        std::to_string(fields.size()));
    }
    ScanRow row;
    row.tau_as = parse_double(fields[0], line_no);
    row.n1 = parse_int64(fields[1], line_no);
    row.n2 = parse_int64(fields[2], line_no);
    row.p2_model = parse_double(fields[3], line_no);
    row.fisher_per_pair = parse_double(fields[4], line_no);
    if (row.n1 < 0 || row.n2 < 0) {
      throw FormatError("line " + std::to_string(line_no) + ": negative count");
    }
    file.rows.push_back(row);
  }
  if (!header_seen) throw FormatError(path + ": no column header found");
  return file;
}

std::vector<ScanRecord> scan_records(const ScanFile& file) {
  std::vector<ScanRecord> records;
  records.reserve(file.rows.size());
  for (const ScanRow& row : file.rows) {
    records.push_back({row.tau_as, CoincidenceCounts{row.n1, row.n2}});
  }
  return records;
}

CoincidenceCounts total_counts(const ScanFile& file) {
  CoincidenceCounts total;
  for (const ScanRow& row : file.rows) {
    total.n1 += row.n1;
    total.n2 += row.n2;
  }
  return total;
}

void write_profile_csv(const std::string& path, const RunManifest& manifest,
                       const InformationProfile& profile) {
  std::ostringstream out;
  out << manifest_block(manifest);
  out << "# peak_delay_as=" << format_double(profile.peak_delay_as) << "\n";
  out << "# peak_value_ps2=" << format_double(profile.peak_value_ps2) << "\n";
  out << "tau_as,fisher_ps2,defined\n";
  for (std::size_t i = 0; i < profile.delays_as.size(); ++i) {
    out << format_double(profile.delays_as[i]) << ','
        << format_double(profile.fisher_ps2[i]) << ','
        << static_cast<int>(profile.defined[i]) << "\n";
  }
  write_text_atomic(path, out.str());
}

void write_fringe_csv(const std::string& path, const RunManifest& manifest,
                      const std::vector<FringeRow>& rows) {
  std::ostringstream out;
  out << manifest_block(manifest);
  out << "tau_as,theta_rad,fisher_ps2,defined\n";
  for (const FringeRow& row : rows) {
    out << format_double(row.tau_as) << ',' << format_double(row.theta_rad)
        << ',' << format_double(row.fisher_ps2) << ',' << row.defined << "\n";
  }
  write_text_atomic(path, out.str());
}

nlohmann::json to_json(const RunManifest& manifest) {
  nlohmann::json j;
  j["command"] = manifest.command;
  j["artifact_version"] = kArtifactVersion;
  j["timestamp"] = manifest_timestamp();
  for (const auto& [key, value] : manifest.entries) {
    j["config"][key] = value;
  }
  return j;
}

nlohmann::json to_json(const CalibrationRecord& record) {
  return nlohmann::json{{"gamma_hat", record.gamma_hat},
                        {"alpha_hat", record.alpha_hat},
                        {"n_hat", record.n_hat},
                        {"sigma_hat_ps", record.sigma_hat_ps},
                        {"fit_window_fs", record.fit_window_fs},
                        {"fit_residual", record.fit_residual},
                        {"center_as", record.center_as},
                        {"provisional_sigma_ps", record.provisional_sigma_ps},
                        {"window_points", record.window_points},
                        {"excluded_clamped", record.excluded_clamped},
                        {"coverage_ok", record.coverage_ok}};
}

nlohmann::json to_json(const ProtocolResult& result) {
  return nlohmann::json{
      {"measured_delta_as", result.measured_delta_as},
      {"expected_delta_as", result.expected_delta_as},
      {"accuracy_as", result.accuracy_as},
      {"per_window_precision_as", result.per_window_precision_as},
      {"pooled_precision_as", result.pooled_precision_as},
      {"crb_per_window_precision_as", result.crb_per_window_precision_as},
      {"crb_pooled_precision_as", result.crb_pooled_precision_as},
      {"valid_periods", result.valid_periods},
      {"clamped_windows", result.clamped_windows}};
}

CalibrationRecord calibration_from_json(const nlohmann::json& j) {
  CalibrationRecord record;
  record.gamma_hat = j.at("gamma_hat").get<double>();
  record.alpha_hat = j.at("alpha_hat").get<double>();
  record.n_hat = j.at("n_hat").get<double>();
  record.sigma_hat_ps = j.at("sigma_hat_ps").get<double>();
  record.fit_window_fs = j.value("fit_window_fs", 0.0);
  record.fit_residual = j.value("fit_residual", 0.0);
  record.center_as = j.value("center_as", 0.0);
  record.provisional_sigma_ps = j.value("provisional_sigma_ps", 0.0);
  record.window_points = j.value("window_points", 0);
  record.excluded_clamped = j.value("excluded_clamped", 0);
  record.coverage_ok = j.value("coverage_ok", false);
  return record;
}

}  // namespace homsense
