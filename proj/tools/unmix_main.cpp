// Batch front end: synthetic-scene generation, unmixing runs, and evaluation.
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "unmix/admm.hpp"
#include "unmix/io.hpp"
#include "unmix/metrics.hpp"
#include "unmix/net.hpp"
#include "unmix/runconfig.hpp"
#include "unmix/synth.hpp"

namespace {

using namespace unmix;

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Param:
    case ErrorKind::Format: return 2;
    case ErrorKind::Numeric:
    case ErrorKind::Degenerate: return 3;
    case ErrorKind::Io: return 4;
  }
  return 1;
}

std::string snr_tag(double snr) {
  std::ostringstream os;
  os << snr << "db";
  return os.str();
}

void write_meta(const std::string& dir, int height, int width, int bands, int endmembers) {
  nlohmann::ordered_json meta;
  meta["height"] = height;
  meta["width"] = width;
  meta["bands"] = bands;
  meta["endmembers"] = endmembers;
  std::ofstream out(dir + "/meta.json");
  if (!out) fail(ErrorKind::Io, "cannot write " + dir + "/meta.json");
  out << meta.dump(2) << "\n";
}

nlohmann::json read_meta(const std::string& dir) {
  std::ifstream in(dir + "/meta.json");
  if (!in) fail(ErrorKind::Io, "cannot read " + dir + "/meta.json");
  nlohmann::json meta = nlohmann::json::parse(in, nullptr, false);
  if (meta.is_discarded()) fail(ErrorKind::Format, "malformed meta.json in " + dir);
  return meta;
}

void make_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) fail(ErrorKind::Io, "cannot create directory: " + dir);
}

struct CommonFlags {
  std::string config_path;
  std::string out_override;
  std::string snr_override;
  std::string solver_override;
  std::uint64_t seed = 0;
  bool seed_set = false;
  bool verbose = false;
};

std::vector<double> parse_snr_list(const std::string& text) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item == "inf")
      values.push_back(std::numeric_limits<double>::infinity());
    else
      values.push_back(std::stod(item));
  }
  if (values.empty()) fail(ErrorKind::Param, "empty --snr list");
  return values;
}

int run_synth(const CommonFlags& flags) {
  RunConfig rc = load_run_config(flags.config_path);
  if (!rc.synth) fail(ErrorKind::Param, "synth command needs a data.synth section");
  SynthSpec spec = *rc.synth;
  if (flags.seed_set) spec.seed = flags.seed;
  std::vector<double> snr_list = rc.snr_list;
  if (!flags.snr_override.empty()) snr_list = parse_snr_list(flags.snr_override);
  const std::string dir = flags.out_override.empty() ? rc.output_dir : flags.out_override;
  make_dir(dir);

  auto [cube, endmembers, abundances] = generate_synthetic(spec);
  save_cube(cube, dir + "/cube.hsc");
  save_endmembers_csv(endmembers, dir + "/truth_M.csv", "bands x endmembers");
  save_field_raw(abundances, dir + "/truth_A.raw");
  write_meta(dir, spec.height, spec.width, spec.band_count, spec.endmember_count);
  for (double snr : snr_list) {
    HyperCube noisy = add_noise(cube, snr, rc.noise_seed);
    save_cube(noisy, dir + "/cube_" + snr_tag(snr) + ".hsc");
  }
  if (flags.verbose)
    std::cout << "synth: " << spec.height << "x" << spec.width << "x" << spec.band_count << ", R="
              << spec.endmember_count << ", " << snr_list.size() << " noisy variants -> " << dir
              << "\n";
  return 0;
}

void write_recon_error(const HyperCube& cube, const Eigen::MatrixXd& xhat, const std::string& dir) {
  Eigen::MatrixXd err(cube.height, cube.width);
  for (int row = 0; row < cube.height; ++row)
    for (int col = 0; col < cube.width; ++col) {
      long n = static_cast<long>(row) * cube.width + col;
      err(row, col) = std::sqrt((cube.data.col(n) - xhat.col(n)).squaredNorm() / cube.bands);
    }
  double peak = err.maxCoeff();
  AbundanceField raw(1, cube.height, cube.width);
  for (int row = 0; row < cube.height; ++row)
    for (int col = 0; col < cube.width; ++col)
      raw.data(0, static_cast<long>(row) * cube.width + col) = err(row, col);
  save_field_raw(raw, dir + "/recon_error.raw");
  if (peak > 0.0) err /= peak;  // PGM scaled to the peak error
  save_pgm(err, dir + "/recon_error.pgm");
}

int run_unmix(const CommonFlags& flags) {
  RunConfig rc = load_run_config(flags.config_path);
  if (flags.seed_set) rc.init_seed = flags.seed;
  if (!flags.snr_override.empty()) rc.snr_db = parse_snr_list(flags.snr_override).front();
  if (!flags.solver_override.empty()) {
    if (flags.solver_override == "pnp-admm")
      rc.solver = SolverType::PnpAdmm;
    else if (flags.solver_override == "pnp-net")
      rc.solver = SolverType::PnpNet;
    else
      fail(ErrorKind::Param, "--solver must be pnp-admm or pnp-net");
  }
  const std::string dir = flags.out_override.empty() ? rc.output_dir : flags.out_override;
  make_dir(dir);

  HyperCube cube;
  if (rc.synth) {
    auto [clean, endmembers, abundances] = generate_synthetic(*rc.synth);
    cube = add_noise(clean, rc.snr_db, rc.noise_seed);
  } else {
    cube = load_cube(rc.input_path);
    if (std::isfinite(rc.snr_db)) cube = add_noise(cube, rc.snr_db, rc.noise_seed);
  }
  if (rc.endmembers < 1) fail(ErrorKind::Param, "config must set data.endmembers");

  if (flags.verbose) std::cout << "init: VCA+FCLS, R=" << rc.endmembers << "\n";
  InitResult init = initialize(cube, rc.endmembers, rc.init_seed);

  EndmemberMatrix est_m(cube.bands, rc.endmembers);
  AbundanceField est_a;
  if (rc.solver == SolverType::PnpAdmm) {
    AdmmState state = solve(cube, rc.admm, init);
    est_m.data = state.m;
    est_a = state.a;
    save_diagnostics_csv(state.history, dir + "/diagnostics.csv");
    if (flags.verbose)
      std::cout << "pnp-admm: " << state.iterations << " iterations, "
                << (state.converged ? "converged" : "iteration cap") << "\n";
  } else {
    PnpNet net = PnpNet::initialized(cube, init, rc.net);
    TrainResult result = net.train(cube);
    est_m.data = result.m;
    est_a = result.a;
    net.save_checkpoint(dir + "/checkpoint.ckpt");
    save_history_csv(result.history, dir + "/history.csv");
    if (flags.verbose)
      std::cout << "pnp-net: " << result.history.loss.size() << " epochs, final loss "
                << result.history.loss.back() << "\n";
  }

  save_endmembers_csv(est_m, dir + "/est_M.csv", "bands x endmembers");
  save_field_raw(est_a, dir + "/est_A.raw");
  export_abundance_maps(est_a, dir, "abundance");
  HyperCube recon(cube.height, cube.width, cube.bands);
  recon.data = est_m.data * est_a.data;
  save_cube(recon, dir + "/recon.hsc");
  write_recon_error(cube, recon.data, dir);
  write_meta(dir, cube.height, cube.width, cube.bands, rc.endmembers);
  return 0;
}

int run_eval(const std::string& est_dir, const std::string& truth_dir, const std::string& out_path,
             const std::string& label, const std::string& snr) {
  nlohmann::json truth_meta = read_meta(truth_dir);
  nlohmann::json est_meta = read_meta(est_dir);
  const int r = truth_meta.at("endmembers").get<int>();
  if (est_meta.at("endmembers").get<int>() != r)
    fail(ErrorKind::Param, "endmember count mismatch between estimate and truth");
  const int h = truth_meta.at("height").get<int>();
  const int w = truth_meta.at("width").get<int>();

  HyperCube x = load_cube(truth_dir + "/cube.hsc");
  EndmemberMatrix true_m = load_endmembers_csv(truth_dir + "/truth_M.csv");
  AbundanceField true_a = load_field_raw(truth_dir + "/truth_A.raw", r, h, w);
  EndmemberMatrix est_m = load_endmembers_csv(est_dir + "/est_M.csv");
  AbundanceField est_a = load_field_raw(est_dir + "/est_A.raw", r, h, w);
  HyperCube recon = load_cube(est_dir + "/recon.hsc");

  EvalReport report = evaluate(est_m, est_a, recon.data, true_m, true_a, x.data);
  const bool fresh = !std::filesystem::exists(out_path);
  std::ofstream out(out_path, std::ios::app);
  if (!out) fail(ErrorKind::Io, "cannot open for writing: " + out_path);
  if (fresh) out << "label,snr_db," << EvalReport::csv_header() << "\n";
  out << label << "," << snr << "," << report.csv_row() << "\n";
  std::cout << "armse=" << report.armse << " mrmse=" << report.mrmse << " sad=" << report.sad_mean
            << " msad=" << report.msad << " psnr=" << report.psnr << "\n";
  return 0;
}

// merge per-run report rows into a label x (snr, metric) grid
int run_table(const std::vector<std::string>& reports, const std::string& out_path) {
  struct Row {
    std::map<std::string, std::vector<std::string>> by_snr;  // snr -> 5 metric cells
  };
  std::map<std::string, Row> rows;
  std::vector<std::string> snrs;
  for (const std::string& path : reports) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::Io, "cannot read report: " + path);
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
      if (first) {
        first = false;
        continue;
      }
      if (line.empty()) continue;
      std::vector<std::string> cells;
      std::stringstream ss(line);
      std::string cell;
      while (std::getline(ss, cell, ',')) cells.push_back(cell);
      if (cells.size() < 7) fail(ErrorKind::Format, "short row in " + path);
      const std::string& label = cells[0];
      const std::string& snr = cells[1];
      if (std::find(snrs.begin(), snrs.end(), snr) == snrs.end()) snrs.push_back(snr);
      rows[label].by_snr[snr] = {cells[2], cells[3], cells[4], cells[5], cells[6]};
    }
  }
  std::ofstream out(out_path);
  if (!out) fail(ErrorKind::Io, "cannot open for writing: " + out_path);
  const char* metrics[] = {"armse", "mrmse", "sad", "msad", "psnr"};
  out << "method";
  for (const std::string& snr : snrs)
    for (const char* m : metrics) out << "," << m << "@" << snr << "db";
  out << "\n";
  for (const auto& [label, row] : rows) {
    out << label;
    for (const std::string& snr : snrs) {
      auto it = row.by_snr.find(snr);
      for (int m = 0; m < 5; ++m) out << "," << (it == row.by_snr.end() ? "" : it->second[static_cast<size_t>(m)]);
    }
    out << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hyperspectral unmixing toolkit"};
  app.require_subcommand(1);

  CommonFlags synth_flags, unmix_flags;
  std::string est_dir, truth_dir, eval_out = "report.csv", eval_label, eval_snr;
  std::vector<std::string> table_reports;
  std::string table_out;

  CLI::App* synth = app.add_subcommand("synth", "generate a synthetic scene with noisy variants");
  synth->add_option("--config", synth_flags.config_path, "run configuration (JSON)")->required();
  synth->add_option("--out", synth_flags.out_override, "output directory");
  synth->add_option("--snr", synth_flags.snr_override, "comma list of SNR levels (dB)");
  synth->add_option("--seed", synth_flags.seed, "scene seed override")
      ->each([&](const std::string&) { synth_flags.seed_set = true; });
  synth->add_flag("--verbose", synth_flags.verbose, "progress output");

  CLI::App* unmix_cmd = app.add_subcommand("unmix", "run initialization and the configured solver");
  unmix_cmd->add_option("--config", unmix_flags.config_path, "run configuration (JSON)")->required();
  unmix_cmd->add_option("--out", unmix_flags.out_override, "output directory");
  unmix_cmd->add_option("--snr", unmix_flags.snr_override, "SNR override (dB)");
  unmix_cmd->add_option("--seed", unmix_flags.seed, "initialization seed override")
      ->each([&](const std::string&) { unmix_flags.seed_set = true; });
  unmix_cmd->add_option("--solver", unmix_flags.solver_override, "pnp-admm or pnp-net");
  unmix_cmd->add_flag("--verbose", unmix_flags.verbose, "progress output");

  CLI::App* eval_cmd = app.add_subcommand("eval", "score an estimate against ground truth");
  eval_cmd->add_option("--est", est_dir, "directory with est_M.csv / est_A.raw / recon.hsc");
  eval_cmd->add_option("--truth", truth_dir, "directory with cube.hsc / truth_M.csv / truth_A.raw");
  eval_cmd->add_option("--out", eval_out, "report CSV (appended)");
  eval_cmd->add_option("--label", eval_label, "method label for the report row");
  eval_cmd->add_option("--snr", eval_snr, "SNR label for the report row");
  eval_cmd->add_option("--table", table_reports, "merge report CSVs into a grid instead");

  try {
    app.parse(argc, argv);
    if (synth->parsed()) return run_synth(synth_flags);
    if (unmix_cmd->parsed()) return run_unmix(unmix_flags);
    if (eval_cmd->parsed()) {
      if (!table_reports.empty()) return run_table(table_reports, eval_out);
      if (est_dir.empty() || truth_dir.empty())
        fail(unmix::ErrorKind::Param, "eval needs --est and --truth (or --table)");
      if (eval_label.empty()) eval_label = std::filesystem::path(est_dir).filename().string();
      return run_eval(est_dir, truth_dir, eval_out, eval_label, eval_snr);
    }
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const unmix::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
