#include "unmix/io.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include <nlohmann/json.hpp>

namespace unmix {

namespace {

void write_f32le(std::ostream& out, const double* values, long n) {
  std::vector<unsigned char> buf(static_cast<size_t>(n) * 4);
  for (long i = 0; i < n; ++i) {
    float f = static_cast<float>(values[i]);
    std::uint32_t u;
    std::memcpy(&u, &f, 4);
    buf[4 * i + 0] = static_cast<unsigned char>(u & 0xff);
    buf[4 * i + 1] = static_cast<unsigned char>((u >> 8) & 0xff);
    buf[4 * i + 2] = static_cast<unsigned char>((u >> 16) & 0xff);
    buf[4 * i + 3] = static_cast<unsigned char>((u >> 24) & 0xff);
  }
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
}

std::vector<double> read_f32le(std::istream& in, long n) {
  std::vector<unsigned char> buf(static_cast<size_t>(n) * 4);
  in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (in.gcount() != static_cast<std::streamsize>(buf.size()))
    fail(ErrorKind::Format, "payload shorter than declared dimensions");
  std::vector<double> out(static_cast<size_t>(n));
  for (long i = 0; i < n; ++i) {
    std::uint32_t u = static_cast<std::uint32_t>(buf[4 * i]) |
                      (static_cast<std::uint32_t>(buf[4 * i + 1]) << 8) |
                      (static_cast<std::uint32_t>(buf[4 * i + 2]) << 16) |
                      (static_cast<std::uint32_t>(buf[4 * i + 3]) << 24);
    float f;
    std::memcpy(&f, &u, 4);
    out[static_cast<size_t>(i)] = static_cast<double>(f);
  }
  return out;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::Io, "cannot open for writing: " + path);
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open for reading: " + path);
  return in;
}

}  // namespace

void save_cube(const HyperCube& cube, const std::string& path) {
  check_cube(cube);
  auto out = open_out(path);
  nlohmann::ordered_json header;
  header["height"] = cube.height;
  header["width"] = cube.width;
  header["bands"] = cube.bands;
  header["dtype"] = "f32le";
  header["order"] = "bsq";
  out << header.dump() << "\n";
  // band-sequential: one matrix row (= one band, pixels row-major) at a time
  std::vector<double> band(static_cast<size_t>(cube.pixels()));
  for (int b = 0; b < cube.bands; ++b) {
    for (long n = 0; n < cube.pixels(); ++n) band[static_cast<size_t>(n)] = cube.data(b, n);
    write_f32le(out, band.data(), cube.pixels());
  }
  if (!out) fail(ErrorKind::Io, "write failed: " + path);
}

HyperCube load_cube(const std::string& path) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) fail(ErrorKind::Format, "missing header line");
  nlohmann::json header = nlohmann::json::parse(line, nullptr, false);
  if (header.is_discarded()) fail(ErrorKind::Format, "header is not valid JSON");
  for (const char* field : {"height", "width", "bands", "dtype", "order"})
    if (!header.contains(field))
      fail(ErrorKind::Format, std::string("header missing field \"") + field + "\"");
  if (header["dtype"] != "f32le") fail(ErrorKind::Format, "unsupported dtype, expected \"f32le\"");
  if (header["order"] != "bsq") fail(ErrorKind::Format, "unsupported order, expected \"bsq\"");
  int h = header["height"].get<int>();
  int w = header["width"].get<int>();
  int b = header["bands"].get<int>();
  if (h <= 0 || w <= 0 || b <= 0) fail(ErrorKind::Format, "non-positive dimensions in header");

  HyperCube cube(h, w, b);
  long n = cube.pixels();
  for (int band = 0; band < b; ++band) {
    std::vector<double> plane = read_f32le(in, n);
    for (long i = 0; i < n; ++i) cube.data(band, i) = plane[static_cast<size_t>(i)];
  }
  // exactly B*H*W values expected
  char extra;
  if (in.read(&extra, 1).gcount() != 0)
    fail(ErrorKind::Format, "payload longer than declared dimensions");
  check_cube(cube);
  return cube;
}

EndmemberMatrix load_endmembers_csv(const std::string& path) {
  auto in = open_in(path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        fail(ErrorKind::Format, "non-numeric cell in " + path + ": \"" + cell + "\"");
      }
    }
    if (!rows.empty() && row.size() != rows.front().size())
      fail(ErrorKind::Format, "ragged rows in " + path);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) fail(ErrorKind::Format, "no data rows in " + path);
  EndmemberMatrix m(static_cast<int>(rows.size()), static_cast<int>(rows.front().size()));
  for (int b = 0; b < m.bands; ++b)
    for (int r = 0; r < m.count; ++r)
      m.data(b, r) = rows[static_cast<size_t>(b)][static_cast<size_t>(r)];
  check_endmembers(m);
  return m;
}

void save_endmembers_csv(const EndmemberMatrix& m, const std::string& path,
                         const std::string& comment) {
  check_endmembers(m);
  auto out = open_out(path);
  if (!comment.empty()) out << "# " << comment << "\n";
  out.precision(17);
  for (int b = 0; b < m.bands; ++b) {
    for (int r = 0; r < m.count; ++r) {
      if (r) out << ",";
      out << m.data(b, r);
    }
    out << "\n";
  }
  if (!out) fail(ErrorKind::Io, "write failed: " + path);
}

void save_field_raw(const AbundanceField& field, const std::string& path) {
  check_field(field);
  auto out = open_out(path);
  std::vector<double> plane(static_cast<size_t>(field.pixels()));
  for (int r = 0; r < field.count; ++r) {
    for (long n = 0; n < field.pixels(); ++n) plane[static_cast<size_t>(n)] = field.data(r, n);
    write_f32le(out, plane.data(), field.pixels());
  }
  if (!out) fail(ErrorKind::Io, "write failed: " + path);
}

AbundanceField load_field_raw(const std::string& path, int count, int height, int width) {
  auto in = open_in(path);
  AbundanceField field(count, height, width);
  for (int r = 0; r < count; ++r) {
    std::vector<double> plane = read_f32le(in, field.pixels());
    for (long n = 0; n < field.pixels(); ++n) field.data(r, n) = plane[static_cast<size_t>(n)];
  }
  char extra;
  if (in.read(&extra, 1).gcount() != 0)
    fail(ErrorKind::Format, "payload longer than declared dimensions");
  check_field(field);
  return field;
}

namespace {

unsigned char to_byte(double v) {
  if (v < 0.0) v = 0.0;
  if (v > 1.0) v = 1.0;
  return static_cast<unsigned char>(std::floor(v * 255.0 + 0.5));
}

}  // namespace

void save_pgm(const Eigen::MatrixXd& map, const std::string& path) {
  auto out = open_out(path);
  out << "P5\n" << map.cols() << " " << map.rows() << "\n255\n";
  std::vector<unsigned char> bytes(static_cast<size_t>(map.size()));
  size_t i = 0;
  for (long r = 0; r < map.rows(); ++r)
    for (long c = 0; c < map.cols(); ++c) bytes[i++] = to_byte(map(r, c));
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorKind::Io, "write failed: " + path);
}

void export_abundance_maps(const AbundanceField& field, const std::string& dir,
                           const std::string& prefix) {
  check_field(field);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) fail(ErrorKind::Io, "cannot create directory: " + dir);
  for (int r = 0; r < field.count; ++r) {
    Eigen::MatrixXd map(field.height, field.width);
    for (int row = 0; row < field.height; ++row)
      for (int col = 0; col < field.width; ++col) map(row, col) = field.at(r, row, col);
    std::string base = dir + "/" + prefix + "_" + std::to_string(r);
    save_pgm(map, base + ".pgm");

    AbundanceField one(1, field.height, field.width);
    one.data = field.data.row(r);
    save_field_raw(one, base + ".raw");
  }
}

}  // namespace unmix
