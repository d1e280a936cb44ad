#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

namespace fs = std::filesystem;

namespace {

std::string cli_path() {
  const char* env = std::getenv("UNMIX_CLI");
  REQUIRE_MESSAGE(env != nullptr, "UNMIX_CLI must point at the built binary");
  return env;
}

int run_cli(const std::string& args) {
  std::string cmd = cli_path() + " " + args + " >/dev/null 2>&1";
  int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

fs::path work_dir() {
  fs::path dir = fs::temp_directory_path() / "unmix_cli_test";
  fs::create_directories(dir);
  return dir;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

std::vector<unsigned char> slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE_MESSAGE(in.good(), "missing " << path.string());
  return std::vector<unsigned char>((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
}

const char* kSynthConfig = R"({
  "data": {
    "synth": {"height": 16, "width": 16, "endmembers": 3, "bands": 20,
              "smoothness": 3.0, "sharpness": 3.0, "seed": 5},
    "snr_list": [20],
    "noise_seed": 7
  },
  "output": {"dir": "OUTDIR"}
})";

std::string synth_config(const fs::path& out) {
  std::string text = kSynthConfig;
  text.replace(text.find("OUTDIR"), 6, out.string());
  return text;
}

std::string unmix_config(const fs::path& scene, const fs::path& out, const std::string& solver,
                         const std::string& extra_solver_fields) {
  std::ostringstream os;
  os << R"({
  "data": {"input": ")"
     << (scene / "cube_20db.hsc").string() << R"(", "endmembers": 3},
  "init": {"seed": 3},
  "solver": {"type": ")"
     << solver << "\"" << extra_solver_fields << R"(},
  "denoiser": {"kind": "gaussian", "sigma": 1.0},
  "output": {"dir": ")"
     << out.string() << R"("}
})";
  return os.str();
}

}  // namespace

TEST_CASE("synth writes the scene files and repeats bitwise") {
  fs::path dir = work_dir();
  fs::path scene1 = dir / "scene1";
  fs::path scene2 = dir / "scene2";
  fs::remove_all(scene1);
  fs::remove_all(scene2);
  write_file(dir / "synth.json", synth_config(scene1));

  CHECK(run_cli("synth --config " + (dir / "synth.json").string()) == 0);
  for (const char* name : {"cube.hsc", "truth_M.csv", "truth_A.raw", "meta.json", "cube_20db.hsc"})
    CHECK_MESSAGE(fs::exists(scene1 / name), name);

  // identical config into a second directory gives identical bytes
  CHECK(run_cli("synth --config " + (dir / "synth.json").string() + " --out " + scene2.string()) ==
        0);
  CHECK(slurp(scene1 / "cube.hsc") == slurp(scene2 / "cube.hsc"));
  CHECK(slurp(scene1 / "cube_20db.hsc") == slurp(scene2 / "cube_20db.hsc"));
  CHECK(slurp(scene1 / "truth_M.csv") == slurp(scene2 / "truth_M.csv"));

  // a different seed changes the scene
  fs::path scene3 = dir / "scene3";
  CHECK(run_cli("synth --config " + (dir / "synth.json").string() + " --seed 99 --out " +
                scene3.string()) == 0);
  CHECK(slurp(scene1 / "cube.hsc") != slurp(scene3 / "cube.hsc"));
}

TEST_CASE("missing or broken config is a usage error") {
  CHECK(run_cli("synth --config /nonexistent/config.json") == 2);
  CHECK(run_cli("unmix --config /nonexistent/config.json") == 2);
  CHECK(run_cli("synth") == 2);  // missing required flag
  fs::path dir = work_dir();
  write_file(dir / "broken.json", "{not json");
  CHECK(run_cli("synth --config " + (dir / "broken.json").string()) == 2);
}

TEST_CASE("unmix with the iterative solver writes every artifact deterministically") {
  fs::path dir = work_dir();
  fs::path scene = dir / "scene_admm";
  fs::remove_all(scene);
  write_file(dir / "synth2.json", synth_config(scene));
  REQUIRE(run_cli("synth --config " + (dir / "synth2.json").string()) == 0);

  fs::path out1 = dir / "admm_run1";
  fs::path out2 = dir / "admm_run2";
  fs::remove_all(out1);
  fs::remove_all(out2);
  write_file(dir / "admm.json",
             unmix_config(scene, out1, "pnp-admm", ", \"max_outer\": 30, \"lambda\": 0.05"));
  REQUIRE(run_cli("unmix --config " + (dir / "admm.json").string()) == 0);
  for (const char* name : {"est_M.csv", "est_A.raw", "recon.hsc", "recon_error.pgm",
                           "recon_error.raw", "diagnostics.csv", "meta.json", "abundance_0.pgm",
                           "abundance_0.raw", "abundance_2.pgm"})
    CHECK_MESSAGE(fs::exists(out1 / name), name);

  REQUIRE(run_cli("unmix --config " + (dir / "admm.json").string() + " --out " + out2.string()) ==
          0);
  for (const char* name : {"est_M.csv", "est_A.raw", "recon.hsc", "diagnostics.csv"})
    CHECK(slurp(out1 / name) == slurp(out2 / name));
}

TEST_CASE("unmix with the unrolled solver writes checkpoint and history") {
  fs::path dir = work_dir();
  fs::path scene = dir / "scene_net";
  fs::remove_all(scene);
  write_file(dir / "synth3.json", synth_config(scene));
  REQUIRE(run_cli("synth --config " + (dir / "synth3.json").string()) == 0);

  fs::path out = dir / "net_run";
  fs::remove_all(out);
  write_file(dir / "net.json",
             unmix_config(scene, out, "pnp-net",
                          ", \"blocks\": 2, \"beta_k\": [0.1, 1.0], \"epochs\": 15"));
  REQUIRE(run_cli("unmix --config " + (dir / "net.json").string()) == 0);
  for (const char* name : {"est_M.csv", "est_A.raw", "recon.hsc", "checkpoint.ckpt", "history.csv",
                           "meta.json"})
    CHECK_MESSAGE(fs::exists(out / name), name);

  // history has one line per epoch plus the header
  std::ifstream in(out / "history.csv");
  int lines = 0;
  std::string line;
  while (std::getline(in, line)) ++lines;
  CHECK(lines == 16);
}

TEST_CASE("eval scores an estimate and a perfect estimate reads zero error") {
  fs::path dir = work_dir();
  fs::path scene = dir / "scene_eval";
  fs::remove_all(scene);
  write_file(dir / "synth4.json", synth_config(scene));
  REQUIRE(run_cli("synth --config " + (dir / "synth4.json").string()) == 0);

  // fake a perfect estimate: copy the truth as the estimate
  fs::path est = dir / "perfect";
  fs::remove_all(est);
  fs::create_directories(est);
  fs::copy_file(scene / "truth_M.csv", est / "est_M.csv");
  fs::copy_file(scene / "truth_A.raw", est / "est_A.raw");
  fs::copy_file(scene / "cube.hsc", est / "recon.hsc");
  fs::copy_file(scene / "meta.json", est / "meta.json");

  fs::path report = dir / "report.csv";
  fs::remove(report);
  CHECK(run_cli("eval --est " + est.string() + " --truth " + scene.string() + " --out " +
                report.string() + " --label perfect --snr 20") == 0);
  std::ifstream in(report);
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  CHECK(header == "label,snr_db,armse,mrmse,sad,msad,psnr,permutation");
  CHECK(row.find("perfect,20,") == 0);
  CHECK(row.find("inf") != std::string::npos);

  // table mode pivots the rows
  fs::path table = dir / "table.csv";
  CHECK(run_cli("eval --table " + report.string() + " --out " + table.string()) == 0);
  std::ifstream tin(table);
  std::getline(tin, header);
  CHECK(header == "method,armse@20db,mrmse@20db,sad@20db,msad@20db,psnr@20db");
}

TEST_CASE("eval rejects mismatched endmember counts") {
  fs::path dir = work_dir();
  fs::path scene = dir / "scene_eval";  // from the previous test
  if (!fs::exists(scene / "meta.json")) {
    write_file(dir / "synth5.json", synth_config(scene));
    REQUIRE(run_cli("synth --config " + (dir / "synth5.json").string()) == 0);
  }
  fs::path est = dir / "wrong_r";
  fs::remove_all(est);
  fs::create_directories(est);
  fs::copy_file(scene / "truth_M.csv", est / "est_M.csv");
  fs::copy_file(scene / "truth_A.raw", est / "est_A.raw");
  fs::copy_file(scene / "cube.hsc", est / "recon.hsc");
  write_file(est / "meta.json", R"({"height":16,"width":16,"bands":20,"endmembers":4})");
  CHECK(run_cli("eval --est " + est.string() + " --truth " + scene.string() + " --out " +
                (dir / "r2.csv").string()) == 2);
}
