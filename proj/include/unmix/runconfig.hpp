#pragma once

#include <optional>
#include <string>
#include <vector>

#include "unmix/admm.hpp"
#include "unmix/net.hpp"
#include "unmix/synth.hpp"

namespace unmix {

enum class SolverType { PnpAdmm, PnpNet };

// Batch run description. Exactly one data source (input path or synth spec)
// and exactly one solver section.
struct RunConfig {
  // data
  std::string input_path;             // empty when synthesizing
  std::optional<SynthSpec> synth;
  int endmembers = 0;                 // R for initialization (synth fills it in)
  double snr_db = std::numeric_limits<double>::infinity();
  std::vector<double> snr_list;       // synth command: noisy variants to write
  std::uint64_t noise_seed = 7;

  std::uint64_t init_seed = 1;        // VCA seed

  SolverType solver = SolverType::PnpAdmm;
  AdmmConfig admm;
  NetConfig net;

  std::string output_dir = "out";
};

RunConfig load_run_config(const std::string& path);

}  // namespace unmix
