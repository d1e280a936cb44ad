#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "unmix/io.hpp"
#include "unmix/rng.hpp"
#include "unmix/types.hpp"

using namespace unmix;

namespace {

std::string temp_dir() {
  auto dir = std::filesystem::temp_directory_path() / "unmix_io_test";
  std::filesystem::create_directories(dir);
  return dir.string();
}

HyperCube random_cube(int h, int w, int b, std::uint64_t seed) {
  HyperCube cube(h, w, b);
  Rng rng(seed);
  for (int band = 0; band < b; ++band)
    for (long n = 0; n < cube.pixels(); ++n)
      cube.data(band, n) = static_cast<double>(static_cast<float>(rng.uniform()));
  return cube;
}

}  // namespace

TEST_CASE("matrix view round-trips the pixel order") {
  HyperCube cube(3, 4, 2);
  Rng rng(5);
  for (int band = 0; band < 2; ++band)
    for (int row = 0; row < 3; ++row)
      for (int col = 0; col < 4; ++col) cube.at(band, row, col) = rng.normal();
  // pixel n = row * width + col
  for (int row = 0; row < 3; ++row)
    for (int col = 0; col < 4; ++col)
      for (int band = 0; band < 2; ++band)
        CHECK(cube.data(band, row * 4 + col) == cube.at(band, row, col));
}

TEST_CASE("cube save/load round-trips bitwise") {
  const std::string path = temp_dir() + "/roundtrip.hsc";
  HyperCube cube = random_cube(7, 5, 3, 42);
  save_cube(cube, path);
  HyperCube loaded = load_cube(path);
  CHECK(loaded.height == cube.height);
  CHECK(loaded.width == cube.width);
  CHECK(loaded.bands == cube.bands);
  CHECK((loaded.data.array() == cube.data.array()).all());
}

TEST_CASE("header is one JSON line with the declared fields") {
  const std::string path = temp_dir() + "/header.hsc";
  save_cube(random_cube(2, 2, 1, 1), path);
  std::ifstream in(path, std::ios::binary);
  std::string line;
  std::getline(in, line);
  CHECK(line == R"({"height":2,"width":2,"bands":1,"dtype":"f32le","order":"bsq"})");
}

TEST_CASE("payload size mismatch is rejected") {
  const std::string path = temp_dir() + "/short.hsc";
  {
    std::ofstream out(path, std::ios::binary);
    out << R"({"height":2,"width":2,"bands":3,"dtype":"f32le","order":"bsq"})" << "\n";
    std::vector<char> bytes(11 * 4, 0);  // 11 floats, header declares 12
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  }
  CHECK_THROWS_WITH_AS(load_cube(path), doctest::Contains("payload"), Error);

  const std::string long_path = temp_dir() + "/long.hsc";
  {
    std::ofstream out(long_path, std::ios::binary);
    out << R"({"height":2,"width":2,"bands":3,"dtype":"f32le","order":"bsq"})" << "\n";
    std::vector<char> bytes(13 * 4, 0);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  }
  CHECK_THROWS_WITH_AS(load_cube(long_path), doctest::Contains("payload"), Error);
}

TEST_CASE("missing header field is reported by name") {
  const std::string path = temp_dir() + "/noorder.hsc";
  {
    std::ofstream out(path, std::ios::binary);
    out << R"({"height":1,"width":1,"bands":1,"dtype":"f32le"})" << "\n";
    std::vector<char> bytes(4, 0);
    out.write(bytes.data(), 4);
  }
  CHECK_THROWS_WITH_AS(load_cube(path), doctest::Contains("order"), Error);
}

TEST_CASE("missing file raises an io error") {
  try {
    load_cube(temp_dir() + "/does_not_exist.hsc");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Io);
  }
}

TEST_CASE("endmember csv round-trips and skips the comment row") {
  const std::string path = temp_dir() + "/m.csv";
  EndmemberMatrix m(5, 3);
  Rng rng(3);
  for (int b = 0; b < 5; ++b)
    for (int r = 0; r < 3; ++r) m.data(b, r) = rng.uniform();
  save_endmembers_csv(m, path, "test spectra");
  EndmemberMatrix loaded = load_endmembers_csv(path);
  CHECK(loaded.bands == 5);
  CHECK(loaded.count == 3);
  CHECK((loaded.data - m.data).cwiseAbs().maxCoeff() == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("abundance export hits the scaling endpoints") {
  const std::string dir = temp_dir() + "/maps";
  AbundanceField field(2, 3, 3);
  field.data.row(0).setConstant(1.0);
  field.data.row(1).setConstant(0.0);
  export_abundance_maps(field, dir, "abundance");

  auto read_pgm_bytes = [](const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::string magic, dims1, dims2, maxval;
    in >> magic >> dims1 >> dims2 >> maxval;
    CHECK(magic == "P5");
    CHECK(maxval == "255");
    in.get();
    std::vector<unsigned char> bytes(9);
    in.read(reinterpret_cast<char*>(bytes.data()), 9);
    return bytes;
  };
  for (unsigned char b : read_pgm_bytes(dir + "/abundance_0.pgm")) CHECK(b == 255);
  for (unsigned char b : read_pgm_bytes(dir + "/abundance_1.pgm")) CHECK(b == 0);

  AbundanceField raw = load_field_raw(dir + "/abundance_0.raw", 1, 3, 3);
  CHECK((raw.data.array() == 1.0).all());
}

TEST_CASE("mid-gray rounds half up") {
  const std::string path = temp_dir() + "/gray.pgm";
  Eigen::MatrixXd map(1, 1);
  map(0, 0) = 0.5;
  save_pgm(map, path);
  std::ifstream in(path, std::ios::binary);
  std::string magic, w, h, maxval;
  in >> magic >> w >> h >> maxval;
  in.get();
  CHECK(in.get() == 128);
}

TEST_CASE("values outside [0,1] clamp in the image and survive in the raw") {
  const std::string dir = temp_dir() + "/clamp";
  AbundanceField field(1, 1, 2);
  field.data(0, 0) = -0.25;
  field.data(0, 1) = 1.75;
  export_abundance_maps(field, dir);
  std::ifstream in(dir + "/abundance_0.pgm", std::ios::binary);
  std::string magic, w, h, maxval;
  in >> magic >> w >> h >> maxval;
  in.get();
  CHECK(in.get() == 0);
  CHECK(in.get() == 255);
  AbundanceField raw = load_field_raw(dir + "/abundance_0.raw", 1, 1, 2);
  CHECK(raw.data(0, 0) == doctest::Approx(-0.25));
  CHECK(raw.data(0, 1) == doctest::Approx(1.75));
}
