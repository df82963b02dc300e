#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "homsense/bench.hpp"
#include "homsense/calibration.hpp"
#include "homsense/estimation.hpp"
#include "homsense/fisher.hpp"
#include "homsense/io.hpp"
#include "homsense/model.hpp"
#include "homsense/rng.hpp"
#include "homsense/units.hpp"

namespace {

using namespace homsense;

constexpr double kPi = 3.14159265358979323846;

std::vector<double> delay_grid_as(double tau_min_fs, double tau_max_fs,
                                  int points) {
  std::vector<double> grid;
  grid.reserve(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) {
    const double t = points == 1 ? 0.0
                                 : static_cast<double>(i) /
                                       static_cast<double>(points - 1);
    grid.push_back(fs_to_as(tau_min_fs + (tau_max_fs - tau_min_fs) * t));
  }
  return grid;
}

struct ModelFlags {
  double alpha = 0.0;
  double gamma = 0.0;
  double sigma_ps = 0.0;

  ModelParams params() const { return ModelParams(alpha, gamma, sigma_ps); }
  void attach(CLI::App* cmd, bool required = true) {
    auto* a = cmd->add_option("--alpha", alpha, "dip visibility in [0,1]");
    auto* s = cmd->add_option("--sigma-ps", sigma_ps, "dip width, picoseconds");
    cmd->add_option("--gamma", gamma, "per-photon loss in [0,1)")
        ->default_val(0.0);
    if (required) {
      a->required();
      s->required();
    }
  }
};

struct ScanArgs {
  ModelFlags model;
  double tau_min_fs = 0.0;
  double tau_max_fs = 0.0;
  int points = 101;
  std::int64_t pairs = 0;
  std::uint64_t seed = 1;
  std::string out;
};

int run_scan(const ScanArgs& args) {
  const ModelParams params = args.model.params();
  const auto grid = delay_grid_as(args.tau_min_fs, args.tau_max_fs, args.points);

  std::vector<ScanRow> rows;
  rows.reserve(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double s = normalized_delay_from_time(grid[i], params.sigma_ps);
    const OutcomeProbabilities probs = outcome_probabilities(s, params);
    const CoincidenceCounts counts =
        sample_counts(s, params, args.pairs,
                      derive_stream_seed(args.seed, static_cast<std::uint64_t>(i)));
    ScanRow row;
    row.tau_as = grid[i];
    row.n1 = counts.n1;
    row.n2 = counts.n2;
    row.p2_model = probs.p2;
    row.fisher_per_pair = fisher_information(s, params).value_or(0.0);
    rows.push_back(row);
  }

  RunManifest manifest;
  manifest.command = "scan";
  manifest.add("alpha", args.model.alpha);
  manifest.add("gamma", args.model.gamma);
  manifest.add("sigma_ps", args.model.sigma_ps);
  manifest.add("tau_min_fs", args.tau_min_fs);
  manifest.add("tau_max_fs", args.tau_max_fs);
  manifest.add("points", static_cast<std::int64_t>(args.points));
  manifest.add("pairs", args.pairs);
  manifest.add_seed(args.seed);

  write_scan_csv(args.out, manifest, rows);
  std::cout << "scan: wrote " << rows.size() << " rows to " << args.out << "\n";
  return kExitSuccess;
}

struct CalibrateArgs {
  std::string scan_path;
  std::string far_path;
  double window_fs = 7.0;
  double pairs_ratio = 0.0;  // 0: derive from the file manifests
  std::string out;
};

int run_calibrate(const CalibrateArgs& args) {
  const ScanFile scan_file = read_scan_csv(args.scan_path);
  const ScanFile far_file = read_scan_csv(args.far_path);
  if (scan_file.rows.empty()) {
    throw FormatError(args.scan_path + ": no data rows");
  }
  if (far_file.rows.empty()) {
    throw FormatError(args.far_path + ": no data rows");
  }

  double ratio = args.pairs_ratio;
  if (ratio <= 0.0) {
    const std::string scan_pairs = scan_file.manifest_value("pairs");
    const std::string far_pairs = far_file.manifest_value("pairs");
    if (!scan_pairs.empty() && !far_pairs.empty()) {
      const double per_record = parse_double(scan_pairs, 0);
      const double far_total =
          parse_double(far_pairs, 0) * static_cast<double>(far_file.rows.size());
      ratio = per_record / far_total;
    } else {
      ratio = 1.0;
    }
  }

  const CalibrationRecord record = calibrate(
      total_counts(far_file), scan_records(scan_file), args.window_fs, ratio);

  RunManifest manifest;
  manifest.command = "calibrate";
  manifest.add("scan", args.scan_path);
  manifest.add("far", args.far_path);
  manifest.add("window_fs", args.window_fs);
  manifest.add("pairs_ratio", ratio);

  nlohmann::json j;
  j["manifest"] = to_json(manifest);
  j["calibration"] = to_json(record);
  write_text_atomic(args.out, j.dump(2) + "\n");
  std::cout << "calibrate: gamma_hat=" << format_double(record.gamma_hat)
            << " alpha_hat=" << format_double(record.alpha_hat)
            << " n_hat=" << format_double(record.n_hat)
            << " sigma_hat_ps=" << format_double(record.sigma_hat_ps) << "\n";
  return kExitSuccess;
}

struct SenseArgs {
  ModelFlags model;
  std::string calibration_path;
  double delta_as = 0.0;
  double delta_nm = 0.0;
  bool have_delta_as = false;
  bool have_delta_nm = false;
  std::int64_t pairs_per_window = 0;
  int windows = 0;
  double drift_fs = 0.0;
  double refractive_index = 1.0;
  double s_max = 10.0;
  std::uint64_t seed = 1;
  std::string out_prefix;
};

int run_sense(const SenseArgs& args) {
  ModelParams params = args.calibration_path.empty()
                           ? args.model.params()
                           : ModelParams(1.0, 0.0, 1.0);
  if (!args.calibration_path.empty()) {
    std::ifstream in(args.calibration_path);
    if (!in) throw FormatError("cannot open " + args.calibration_path);
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(args.calibration_path + ": " + e.what());
    }
    const CalibrationRecord record = calibration_from_json(
        j.contains("calibration") ? j.at("calibration") : j);
    params = ModelParams(record.alpha_hat, record.gamma_hat, record.sigma_hat_ps);
  }

  const double delta_as =
      args.have_delta_as ? args.delta_as : nm_to_as(args.delta_nm);

  ProtocolConfig protocol;
  protocol.pairs_per_window = args.pairs_per_window;
  protocol.m_windows = args.windows;
  protocol.delta_tau_as = delta_as;
  protocol.operating_delay_as =
      time_from_normalized_delay(peak_information_delay(params), params.sigma_ps);
  protocol.seed = args.seed;
  protocol.estimator.s_max = args.s_max;

  DriftConfig drift;
  drift.model = args.drift_fs > 0.0 ? DriftModel::random_walk : DriftModel::none;
  drift.total_drift_fs = args.drift_fs;

  const ProtocolResult result = run_protocol(params, protocol, drift);

  RunManifest manifest;
  manifest.command = "sense";
  manifest.add("alpha", params.alpha);
  manifest.add("gamma", params.gamma);
  manifest.add("sigma_ps", params.sigma_ps);
  manifest.add("delta_as", delta_as);
  manifest.add("pairs_per_window", protocol.pairs_per_window);
  manifest.add("windows", static_cast<std::int64_t>(protocol.m_windows));
  manifest.add("drift_fs", args.drift_fs);
  manifest.add("operating_delay_as", protocol.operating_delay_as);
  manifest.add("refractive_index", args.refractive_index);
  manifest.add_seed(args.seed);

  // histogram of per-period differences (Figure 3B analogue)
  std::vector<double> deltas;
  for (const PeriodRecord& rec : result.periods) {
    if (rec.valid) deltas.push_back(rec.delta_tau_as);
  }
  nlohmann::json histogram;
  if (!deltas.empty()) {
    const auto [lo_it, hi_it] = std::minmax_element(deltas.begin(), deltas.end());
    const double lo = *lo_it, hi = *hi_it;
    const int bins = 40;
    const double width = hi > lo ? (hi - lo) / bins : 1.0;
    std::vector<int> counts(bins, 0);
    std::vector<double> edges;
    for (int b = 0; b <= bins; ++b) edges.push_back(lo + width * b);
    for (double d : deltas) {
      int b = static_cast<int>((d - lo) / width);
      counts[std::clamp(b, 0, bins - 1)]++;
    }
    histogram["bin_edges_as"] = edges;
    histogram["counts"] = counts;
  }

  const double n = args.refractive_index;
  nlohmann::json j;
  j["manifest"] = to_json(manifest);
  j["result"] = to_json(result);
  j["result"]["measured_delta_nm"] = as_to_nm(result.measured_delta_as) / n;
  j["result"]["expected_delta_nm"] = as_to_nm(result.expected_delta_as) / n;
  j["result"]["accuracy_nm"] = as_to_nm(result.accuracy_as) / n;
  j["result"]["pooled_precision_nm"] = as_to_nm(result.pooled_precision_as) / n;
  j["histogram"] = histogram;
  write_text_atomic(args.out_prefix + ".json", j.dump(2) + "\n");

  std::ostringstream csv;
  csv << manifest_block(manifest);
  csv << "period,drift_as,out_tau_hat_as,in_tau_hat_as,delta_as,valid,"
         "cumulative_delta_as\n";
  double cumulative = 0.0;
  std::size_t valid_seen = 0;
  for (std::size_t m = 0; m < result.periods.size(); ++m) {
    const PeriodRecord& rec = result.periods[m];
    if (rec.valid) cumulative = result.cumulative_delta_as[valid_seen++];
    csv << m << ',' << format_double(rec.drift_as) << ','
        << format_double(rec.out_estimate.tau_hat_as) << ','
        << format_double(rec.in_estimate.tau_hat_as) << ','
        << format_double(rec.valid ? rec.delta_tau_as : 0.0) << ','
        << (rec.valid ? 1 : 0) << ',' << format_double(cumulative) << "\n";
  }
  write_text_atomic(args.out_prefix + "_windows.csv", csv.str());

  std::cout << "sense: measured_delta_as="
            << format_double(result.measured_delta_as)
            << " pooled_precision_as="
            << format_double(result.pooled_precision_as)
            << " accuracy_as=" << format_double(result.accuracy_as)
            << " clamped_windows=" << result.clamped_windows << "\n";
  return kExitSuccess;
}

struct FisherArgs {
  ModelFlags model;
  double tau_min_fs = 0.0;
  double tau_max_fs = 0.0;
  int points = 201;
  double threshold = 0.1;
  bool sweep_alpha = false;
  std::string out;
};

int run_fisher(const FisherArgs& args) {
  if (args.sweep_alpha) {
    // peak-delay landscape: s* against alpha for three loss settings
    RunManifest manifest;
    manifest.command = "fisher";
    manifest.add("mode", std::string("sweep-alpha"));
    manifest.add("points", static_cast<std::int64_t>(args.points));

    std::ostringstream out;
    out << manifest_block(manifest);
    out << "alpha,gamma,s_star\n";
    const std::vector<double> gammas = {0.0, 0.5, 0.9};
    for (double gamma : gammas) {
      for (int i = 0; i < args.points; ++i) {
        const double t = args.points == 1
                             ? 0.0
                             : static_cast<double>(i) /
                                   static_cast<double>(args.points - 1);
        const double alpha = 0.01 + (1.0 - 0.01) * t;
        const double s_star =
            peak_information_delay(ModelParams(alpha, gamma, 1.0));
        out << format_double(alpha) << ',' << format_double(gamma) << ','
            << format_double(s_star) << "\n";
      }
    }
    write_text_atomic(args.out, out.str());
    std::cout << "fisher: wrote alpha sweep to " << args.out << "\n";
    return kExitSuccess;
  }

  const ModelParams params = args.model.params();
  const auto grid = delay_grid_as(args.tau_min_fs, args.tau_max_fs, args.points);
  const InformationProfile profile = hom_information_profile(params, grid);
  const auto [lo_as, hi_as] = dynamic_range(params, args.threshold);
  const double s_star = peak_information_delay(params);

  RunManifest manifest;
  manifest.command = "fisher";
  manifest.add("alpha", params.alpha);
  manifest.add("gamma", params.gamma);
  manifest.add("sigma_ps", params.sigma_ps);
  manifest.add("tau_min_fs", args.tau_min_fs);
  manifest.add("tau_max_fs", args.tau_max_fs);
  manifest.add("points", static_cast<std::int64_t>(args.points));
  manifest.add("threshold", args.threshold);
  manifest.add("s_star", s_star);
  manifest.add("peak_delay_exact_as",
               time_from_normalized_delay(s_star, params.sigma_ps));
  manifest.add("range_lo_as", lo_as);
  manifest.add("range_hi_as", hi_as);

  write_profile_csv(args.out, manifest, profile);
  std::cout << "fisher: peak "
            << format_double(profile.peak_value_ps2) << " ps^-2 at "
            << format_double(profile.peak_delay_as) << " as; wrote "
            << profile.delays_as.size() << " rows to " << args.out << "\n";
  return kExitSuccess;
}

struct FringeArgs {
  double alpha = 0.0;
  double sigma_ps = 0.0;
  double nu_thz = 0.0;
  std::vector<double> theta_deg;
  double tau_min_fs = 0.0;
  double tau_max_fs = 0.0;
  int points = 201;
  std::string out;
};

int run_fringe(const FringeArgs& args) {
  const ModelParams params(args.alpha, 0.0, args.sigma_ps);
  const auto grid = delay_grid_as(args.tau_min_fs, args.tau_max_fs, args.points);
  std::vector<double> thetas = args.theta_deg;
  if (thetas.empty()) thetas.push_back(45.0);

  RunManifest manifest;
  manifest.command = "fringe";
  manifest.add("alpha", args.alpha);
  manifest.add("sigma_ps", args.sigma_ps);
  manifest.add("nu_thz", args.nu_thz);
  manifest.add("tau_min_fs", args.tau_min_fs);
  manifest.add("tau_max_fs", args.tau_max_fs);
  manifest.add("points", static_cast<std::int64_t>(args.points));

  std::vector<FringeRow> rows;
  rows.reserve(grid.size() * thetas.size());
  for (double deg : thetas) {
    const FringeParams fringe(deg * kPi / 180.0, args.nu_thz);
    const InformationProfile profile =
        fringe_information_profile(params, fringe, grid);
    manifest.add("peak_ps2_theta_" + format_double(deg), profile.peak_value_ps2);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      FringeRow row;
      row.tau_as = grid[i];
      row.theta_rad = fringe.theta_rad;
      row.fisher_ps2 = profile.fisher_ps2[i];
      row.defined = profile.defined[i];
      rows.push_back(row);
    }
  }

  write_fringe_csv(args.out, manifest, rows);
  std::cout << "fringe: wrote " << rows.size() << " rows to " << args.out << "\n";
  return kExitSuccess;
}

struct TableArgs {
  std::string rows_path = "data/sense_rows.csv";
  std::string out;
  int windows = 1000;
  double drift_fs = 2.0;
  double budget_scale = 1.0;
  std::uint64_t seed = 1;
};

struct TableRow {
  double expected_as;
  double total_pairs;
  double sigma_ps;
  double gamma;
  double alpha;
  double n_refr;
};

std::vector<TableRow> read_table_rows(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path);
  std::vector<TableRow> rows;
  std::string line;
  int line_no = 0;
  bool header_seen = false;
  const std::string header = "expected_as,total_pairs,sigma_ps,gamma,alpha,n_refr";
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      if (line != header) {
        throw FormatError("line " + std::to_string(line_no) +
                          ": expected header '" + header + "'");
      }
      header_seen = true;
      continue;
    }
    std::istringstream ss(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != 6) {
      throw FormatError("line " + std::to_string(line_no) +
                        ": expected 6 fields, got " +
                        std::to_string(fields.size()));
    }
    TableRow row;
    row.expected_as = parse_double(fields[0], line_no);
    row.total_pairs = parse_double(fields[1], line_no);
    row.sigma_ps = parse_double(fields[2], line_no);
    row.gamma = parse_double(fields[3], line_no);
    row.alpha = parse_double(fields[4], line_no);
    row.n_refr = parse_double(fields[5], line_no);
    rows.push_back(row);
  }
  if (!header_seen) throw FormatError(path + ": no column header found");
  return rows;
}

int run_table(const TableArgs& args) {
  const std::vector<TableRow> rows = read_table_rows(args.rows_path);

  RunManifest manifest;
  manifest.command = "table";
  manifest.add("rows", args.rows_path);
  manifest.add("windows", static_cast<std::int64_t>(args.windows));
  manifest.add("drift_fs", args.drift_fs);
  manifest.add("budget_scale", args.budget_scale);
  manifest.add_seed(args.seed);

  std::ostringstream out;
  out << manifest_block(manifest);
  out << "expected_as,measured_as,accuracy_as,precision_as,expected_nm,"
         "measured_nm,accuracy_nm,precision_nm,pairs_per_window,sigma_ps,"
         "gamma,alpha,n_refr,status\n";

  double sum_abs_expected = 0.0, sum_abs_measured = 0.0;
  double sum_accuracy = 0.0, sum_precision = 0.0;
  double sum_abs_expected_nm = 0.0, sum_abs_measured_nm = 0.0;
  double sum_accuracy_nm = 0.0, sum_precision_nm = 0.0;
  int succeeded = 0;

  for (std::size_t r = 0; r < rows.size(); ++r) {
    const TableRow& row = rows[r];
    try {
      const ModelParams params(row.alpha, row.gamma, row.sigma_ps);
      ProtocolConfig protocol;
      protocol.pairs_per_window = std::max<std::int64_t>(
          1, std::llround(row.total_pairs * args.budget_scale /
                          (2.0 * args.windows)));
      protocol.m_windows = args.windows;
      protocol.delta_tau_as = row.expected_as;
      protocol.operating_delay_as = time_from_normalized_delay(
          peak_information_delay(params), params.sigma_ps);
      protocol.seed = derive_stream_seed(args.seed, r);

      DriftConfig drift;
      drift.model =
          args.drift_fs > 0.0 ? DriftModel::random_walk : DriftModel::none;
      drift.total_drift_fs = args.drift_fs;

      const ProtocolResult res = run_protocol(params, protocol, drift);
      const double n = row.n_refr;
      out << format_double(row.expected_as) << ','
          << format_double(res.measured_delta_as) << ','
          << format_double(res.accuracy_as) << ','
          << format_double(res.pooled_precision_as) << ','
          << format_double(as_to_nm(row.expected_as) / n) << ','
          << format_double(as_to_nm(res.measured_delta_as) / n) << ','
          << format_double(as_to_nm(res.accuracy_as) / n) << ','
          << format_double(as_to_nm(res.pooled_precision_as) / n) << ','
          << protocol.pairs_per_window << ',' << format_double(row.sigma_ps)
          << ',' << format_double(row.gamma) << ',' << format_double(row.alpha)
          << ',' << format_double(row.n_refr) << ",ok\n";
      sum_abs_expected += std::abs(row.expected_as);
      sum_abs_measured += std::abs(res.measured_delta_as);
      sum_accuracy += res.accuracy_as;
      sum_precision += res.pooled_precision_as;
      sum_abs_expected_nm += std::abs(as_to_nm(row.expected_as) / n);
      sum_abs_measured_nm += std::abs(as_to_nm(res.measured_delta_as) / n);
      sum_accuracy_nm += as_to_nm(res.accuracy_as) / n;
      sum_precision_nm += as_to_nm(res.pooled_precision_as) / n;
      ++succeeded;
    } catch (const std::exception& e) {
      std::string why = e.what();
      std::replace(why.begin(), why.end(), ',', ';');
      out << format_double(row.expected_as) << ",,,,,,,,,"
          << format_double(row.sigma_ps) << ',' << format_double(row.gamma)
          << ',' << format_double(row.alpha) << ','
          << format_double(row.n_refr) << ",error: " << why << "\n";
    }
  }

  if (succeeded > 0) {
    const double k = succeeded;
    out << format_double(sum_abs_expected / k) << ','
        << format_double(sum_abs_measured / k) << ','
        << format_double(sum_accuracy / k) << ','
        << format_double(sum_precision / k) << ','
        << format_double(sum_abs_expected_nm / k) << ','
        << format_double(sum_abs_measured_nm / k) << ','
        << format_double(sum_accuracy_nm / k) << ','
        << format_double(sum_precision_nm / k) << ",,,,,,absolute-average\n";
  }

  write_text_atomic(args.out, out.str());
  std::cout << "table: " << succeeded << "/" << rows.size()
            << " rows succeeded; wrote " << args.out << "\n";
  return kExitSuccess;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"synthetic two-photon interferometry delay sensing toolkit"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key=value file mirroring the flags");
  app.get_config_formatter_base()->comment('#');

  ScanArgs scan_args;
  auto* scan_cmd = app.add_subcommand("scan", "sample a coincidence dip scan");
  scan_args.model.attach(scan_cmd);
  scan_cmd->add_option("--tau-min-fs", scan_args.tau_min_fs, "grid start, fs")
      ->required();
  scan_cmd->add_option("--tau-max-fs", scan_args.tau_max_fs, "grid end, fs")
      ->required();
  scan_cmd->add_option("--points", scan_args.points, "grid points")
      ->default_val(101)
      ->check(CLI::PositiveNumber);
  scan_cmd->add_option("--pairs", scan_args.pairs, "emitted pairs per point")
      ->required()
      ->check(CLI::PositiveNumber);
  scan_cmd->add_option("--seed", scan_args.seed, "RNG seed")
      ->envname("HOMSENSE_SEED")
      ->default_val(1);
  scan_cmd->add_option("--out", scan_args.out, "output CSV path")->required();

  CalibrateArgs cal_args;
  auto* cal_cmd =
      app.add_subcommand("calibrate", "estimate nuisance parameters from scans");
  cal_cmd->add_option("--scan", cal_args.scan_path, "dip scan CSV")->required();
  cal_cmd->add_option("--far", cal_args.far_path, "far-from-dip CSV")
      ->required();
  cal_cmd->add_option("--window-fs", cal_args.window_fs, "sigma fit window, fs")
      ->default_val(7.0);
  cal_cmd->add_option("--pairs-ratio", cal_args.pairs_ratio,
                      "scan pairs per record / far total (0: from manifests)")
      ->default_val(0.0);
  cal_cmd->add_option("--out", cal_args.out, "output JSON path")->required();

  SenseArgs sense_args;
  auto* sense_cmd =
      app.add_subcommand("sense", "run the in/out differential protocol");
  sense_args.model.attach(sense_cmd, /*required=*/false);
  auto* delta_as_opt =
      sense_cmd->add_option("--delta-as", sense_args.delta_as,
                            "true in/out separation, attoseconds");
  auto* delta_nm_opt = sense_cmd->add_option(
      "--delta-nm", sense_args.delta_nm, "true separation as optical path, nm");
  delta_as_opt->excludes(delta_nm_opt);
  delta_nm_opt->excludes(delta_as_opt);
  sense_cmd
      ->add_option("--pairs-per-window", sense_args.pairs_per_window,
                   "emitted pairs per window")
      ->required()
      ->check(CLI::PositiveNumber);
  sense_cmd->add_option("--windows", sense_args.windows, "switch periods")
      ->required()
      ->check(CLI::PositiveNumber);
  sense_cmd->add_option("--drift-fs", sense_args.drift_fs, "drift RMS target, fs")
      ->default_val(0.0);
  sense_cmd
      ->add_option("--calibration", sense_args.calibration_path,
                   "calibration JSON instead of model flags")
      ->check(CLI::ExistingFile);
  sense_cmd
      ->add_option("--refractive-index", sense_args.refractive_index,
                   "divisor for nm outputs")
      ->default_val(1.0);
  sense_cmd->add_option("--s-max", sense_args.s_max, "estimator clamp")
      ->default_val(10.0);
  sense_cmd->add_option("--seed", sense_args.seed, "RNG seed")
      ->envname("HOMSENSE_SEED")
      ->default_val(1);
  sense_cmd->add_option("--out", sense_args.out_prefix, "output path prefix")
      ->required();

  FisherArgs fisher_args;
  auto* fisher_cmd =
      app.add_subcommand("fisher", "information profile or peak-delay sweep");
  fisher_args.model.attach(fisher_cmd, /*required=*/false);
  fisher_cmd->add_option("--tau-min-fs", fisher_args.tau_min_fs, "grid start, fs");
  fisher_cmd->add_option("--tau-max-fs", fisher_args.tau_max_fs, "grid end, fs");
  fisher_cmd->add_option("--points", fisher_args.points, "grid points")
      ->default_val(201)
      ->check(CLI::PositiveNumber);
  fisher_cmd
      ->add_option("--threshold", fisher_args.threshold,
                   "dynamic-range fraction of the peak")
      ->default_val(0.1);
  fisher_cmd->add_flag("--sweep-alpha", fisher_args.sweep_alpha,
                       "emit s* against alpha for gamma in {0, 0.5, 0.9}");
  fisher_cmd->add_option("--out", fisher_args.out, "output CSV path")->required();

  FringeArgs fringe_args;
  auto* fringe_cmd =
      app.add_subcommand("fringe", "phase-fringe information profile");
  fringe_cmd->add_option("--alpha", fringe_args.alpha, "dip visibility")
      ->required();
  fringe_cmd->add_option("--sigma-ps", fringe_args.sigma_ps, "dip width, ps")
      ->required();
  fringe_cmd->add_option("--nu-thz", fringe_args.nu_thz, "carrier frequency, THz")
      ->required();
  fringe_cmd->add_option("--theta-deg", fringe_args.theta_deg,
                         "fringe mixing angles, degrees (repeatable)");
  fringe_cmd->add_option("--tau-min-fs", fringe_args.tau_min_fs, "grid start, fs")
      ->required();
  fringe_cmd->add_option("--tau-max-fs", fringe_args.tau_max_fs, "grid end, fs")
      ->required();
  fringe_cmd->add_option("--points", fringe_args.points, "grid points")
      ->default_val(201)
      ->check(CLI::PositiveNumber);
  fringe_cmd->add_option("--out", fringe_args.out, "output CSV path")
      ->required();

  TableArgs table_args;
  auto* table_cmd =
      app.add_subcommand("table", "batch protocol runs from a row manifest");
  table_cmd->add_option("--rows", table_args.rows_path, "row manifest CSV")
      ->default_val("data/sense_rows.csv");
  table_cmd->add_option("--windows", table_args.windows, "periods per row")
      ->default_val(1000)
      ->check(CLI::PositiveNumber);
  table_cmd->add_option("--drift-fs", table_args.drift_fs, "drift RMS target, fs")
      ->default_val(2.0);
  table_cmd
      ->add_option("--budget-scale", table_args.budget_scale,
                   "multiplier on each row's pair budget")
      ->default_val(1.0);
  table_cmd->add_option("--seed", table_args.seed, "RNG seed")
      ->envname("HOMSENSE_SEED")
      ->default_val(1);
  table_cmd->add_option("--out", table_args.out, "output CSV path")->required();

  try {
    app.parse(argc, argv);

    sense_args.have_delta_as = delta_as_opt->count() > 0;
    sense_args.have_delta_nm = delta_nm_opt->count() > 0;
    if (*sense_cmd) {
      if (!sense_args.have_delta_as && !sense_args.have_delta_nm) {
        std::cerr << "sense: need --delta-as or --delta-nm\n";
        return kExitUsage;
      }
      const bool have_model =
          sense_cmd->count("--alpha") > 0 && sense_cmd->count("--sigma-ps") > 0;
      if (sense_args.calibration_path.empty() && !have_model) {
        std::cerr << "sense: need --alpha/--sigma-ps or --calibration\n";
        return kExitUsage;
      }
    }
    if (*fisher_cmd && !fisher_args.sweep_alpha) {
      if (fisher_cmd->count("--alpha") == 0 ||
          fisher_cmd->count("--sigma-ps") == 0 ||
          fisher_cmd->count("--tau-min-fs") == 0 ||
          fisher_cmd->count("--tau-max-fs") == 0) {
        std::cerr << "fisher: profile mode needs --alpha, --sigma-ps and the "
                     "tau grid\n";
        return kExitUsage;
      }
    }

    if (*scan_cmd) return run_scan(scan_args);
    if (*cal_cmd) return run_calibrate(cal_args);
    if (*sense_cmd) return run_sense(sense_args);
    if (*fisher_cmd) return run_fisher(fisher_args);
    if (*fringe_cmd) return run_fringe(fringe_args);
    if (*table_cmd) return run_table(table_args);
    return kExitUsage;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitSuccess : kExitUsage;
  } catch (const homsense::FormatError& e) {
    std::cerr << "format error: " << e.what() << "\n";
    return kExitFormat;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
}
