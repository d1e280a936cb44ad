#include "unmix/runconfig.hpp"

#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "unmix/denoise_json.hpp"

namespace unmix {

namespace {

SynthSpec synth_from_json(const nlohmann::json& j) {
  SynthSpec s;
  s.height = j.value("height", s.height);
  s.width = j.value("width", s.width);
  s.endmember_count = j.value("endmembers", s.endmember_count);
  s.band_count = j.value("bands", s.band_count);
  s.smoothness = j.value("smoothness", s.smoothness);
  s.sharpness = j.value("sharpness", s.sharpness);
  s.seed = j.value("seed", s.seed);
  check_spec(s);
  return s;
}

double snr_from_json(const nlohmann::json& j) {
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "inf" || s == "none") return std::numeric_limits<double>::infinity();
    fail(ErrorKind::Param, "snr_db string must be \"inf\"");
  }
  return j.get<double>();
}

void admm_from_json(const nlohmann::json& j, AdmmConfig& c) {
  c.alpha = j.value("alpha", c.alpha);
  c.beta = j.value("beta", c.beta);
  c.lambda = j.value("lambda", c.lambda);
  c.eta1 = j.value("eta1", c.eta1);
  c.eta2 = j.value("eta2", c.eta2);
  c.max_outer = j.value("max_outer", c.max_outer);
  c.inner_v1 = j.value("inner_v1", c.inner_v1);
  c.tol_primal = j.value("tol_primal", c.tol_primal);
  c.tol_dual = j.value("tol_dual", c.tol_dual);
  if (j.contains("projection")) {
    const std::string p = j.at("projection").get<std::string>();
    if (p == "simplex")
      c.projection = AbundanceProjection::Simplex;
    else if (p == "softmax")
      c.projection = AbundanceProjection::Softmax;
    else
      fail(ErrorKind::Param, "projection must be \"simplex\" or \"softmax\"");
  }
}

void net_from_json(const nlohmann::json& j, NetConfig& c) {
  c.blocks = j.value("blocks", c.blocks);
  if (j.contains("kernel_sizes")) c.kernel_sizes = j.at("kernel_sizes").get<std::vector<int>>();
  c.lr = j.value("lr", c.lr);
  if (j.contains("beta_k")) c.beta_k = j.at("beta_k").get<std::vector<double>>();
  c.epochs = j.value("epochs", c.epochs);
  c.seed = j.value("seed", c.seed);
  c.alpha = j.value("alpha", c.alpha);
  c.beta = j.value("beta", c.beta);
  c.early_stop_delta = j.value("early_stop_delta", c.early_stop_delta);
  c.early_stop_window = j.value("early_stop_window", c.early_stop_window);
  c.divergence_factor = j.value("divergence_factor", c.divergence_factor);
}

}  // namespace

RunConfig load_run_config(const std::string& path) {
  if (!std::filesystem::exists(path))
    fail(ErrorKind::Param, "config file not found: " + path);
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Param, "cannot read config file: " + path);
  nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded()) fail(ErrorKind::Param, "config is not valid JSON: " + path);

  RunConfig rc;
  if (j.contains("data")) {
    const auto& d = j.at("data");
    if (d.contains("input") == d.contains("synth"))
      fail(ErrorKind::Param, "data section needs exactly one of \"input\" or \"synth\"");
    if (d.contains("input")) rc.input_path = d.at("input").get<std::string>();
    if (d.contains("synth")) {
      rc.synth = synth_from_json(d.at("synth"));
      rc.endmembers = rc.synth->endmember_count;
    }
    rc.endmembers = d.value("endmembers", rc.endmembers);
    if (d.contains("snr_db")) rc.snr_db = snr_from_json(d.at("snr_db"));
    if (d.contains("snr_list")) rc.snr_list = d.at("snr_list").get<std::vector<double>>();
    rc.noise_seed = d.value("noise_seed", rc.noise_seed);
  } else {
    fail(ErrorKind::Param, "config needs a data section");
  }

  if (j.contains("init")) rc.init_seed = j.at("init").value("seed", rc.init_seed);

  if (j.contains("solver")) {
    const auto& s = j.at("solver");
    const std::string type = s.value("type", "pnp-admm");
    if (type == "pnp-admm")
      rc.solver = SolverType::PnpAdmm;
    else if (type == "pnp-net")
      rc.solver = SolverType::PnpNet;
    else
      fail(ErrorKind::Param, "solver type must be \"pnp-admm\" or \"pnp-net\"");
    admm_from_json(s, rc.admm);
    net_from_json(s, rc.net);
  }

  if (j.contains("denoiser")) {
    DenoiserSpec d = denoiser_from_json(j.at("denoiser"));
    rc.admm.denoiser = d;
    rc.net.denoiser = d;
  }

  if (j.contains("output")) rc.output_dir = j.at("output").value("dir", rc.output_dir);
  return rc;
}

}  // namespace unmix
