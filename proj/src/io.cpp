#include "mvk/io.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "mvk/error.hpp"

namespace mvk::io {

namespace {

template <typename T>
void put_le(std::ostream& out, T value) {
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(bytes[i], bytes[sizeof(T) - 1 - i]);
  }
  out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T get_le(std::istream& in) {
  unsigned char bytes[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof(T))) throw ConfigError("measure path file is truncated");
  if constexpr (std::endian::native == std::endian::big) {
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(bytes[i], bytes[sizeof(T) - 1 - i]);
  }
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

std::ofstream open_out(const std::filesystem::path& file, std::ios::openmode mode = std::ios::out) {
  std::ofstream out(file, mode | std::ios::trunc);
  if (!out) throw ConfigError("cannot open for writing: " + file.string());
  return out;
}

std::ifstream open_in(const std::filesystem::path& file, std::ios::openmode mode = std::ios::in) {
  std::ifstream in(file, mode);
  if (!in) throw ConfigError("cannot open for reading: " + file.string());
  return in;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

}  // namespace

std::string format_double(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

void write_text(const std::filesystem::path& file, const std::string& contents) {
  auto out = open_out(file, std::ios::out | std::ios::binary);
  out << contents;
  if (!out) throw ConfigError("write failed: " + file.string());
}

void write_measure_path(std::ostream& out, const MeasurePath& path) {
  path.validate();
  out.write("MVMP", 4);
  put_le<std::uint32_t>(out, kMeasurePathVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(path.dim()));
  put_le<std::uint64_t>(out, path.particles());
  put_le<std::uint64_t>(out, path.snapshots.size());
  put_le<double>(out, path.grid.step());
  for (const auto& snap : path.snapshots) {
    for (double v : snap.particles().data()) put_le<double>(out, v);
  }
  if (!out) throw ConfigError("measure path write failed");
}

void write_measure_path(const std::filesystem::path& file, const MeasurePath& path) {
  auto out = open_out(file, std::ios::out | std::ios::binary);
  write_measure_path(out, path);
}

MeasurePath read_measure_path(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, "MVMP", 4) != 0) throw ConfigError("not a measure path file (bad magic)");
  const auto version = get_le<std::uint32_t>(in);
  if (version != kMeasurePathVersion) throw ConfigError("unsupported measure path version " + std::to_string(version));
  const auto d = get_le<std::uint32_t>(in);
  const auto m = get_le<std::uint64_t>(in);
  const auto points = get_le<std::uint64_t>(in);
  const auto h = get_le<double>(in);
  if (d == 0 || m == 0 || points < 2) throw ConfigError("measure path header is inconsistent");
  std::vector<EmpiricalMeasure> snapshots;
  snapshots.reserve(points);
  for (std::uint64_t k = 0; k < points; ++k) {
    std::vector<double> states(m * d);
    for (auto& v : states) v = get_le<double>(in);
    snapshots.emplace_back(ParticleEnsemble(m, d, std::move(states)));
  }
  MeasurePath path{TimeGrid::from_step(h, points - 1), std::move(snapshots), 0, {}};
  return path;
}

MeasurePath read_measure_path(const std::filesystem::path& file) {
  auto in = open_in(file, std::ios::in | std::ios::binary);
  return read_measure_path(in);
}

void write_pairs_csv(std::ostream& out, const PairDataSet& data) {
  const std::size_t d = data.dim();
  for (std::size_t j = 0; j < d; ++j) out << (j ? "," : "") << "xi_" << (j + 1);
  for (std::size_t j = 0; j < d; ++j) out << ",xT_" << (j + 1);
  out << '\n';
  for (std::size_t m = 0; m < data.count(); ++m) {
    for (std::size_t j = 0; j < d; ++j) out << (j ? "," : "") << format_double(data.xi(m, j));
    for (std::size_t j = 0; j < d; ++j) out << ',' << format_double(data.x_t(m, j));
    out << '\n';
  }
  if (!out) throw ConfigError("pair data write failed");
}

void write_pairs_csv(const std::filesystem::path& file, const PairDataSet& data) {
  auto out = open_out(file, std::ios::out | std::ios::binary);
  write_pairs_csv(out, data);
}

PairDataSet read_pairs_csv(std::istream& in, double lag) {
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("pair data CSV is empty");
  const auto header = split_csv(line);
  if (header.size() < 2 || header.size() % 2 != 0) throw ConfigError("pair data CSV header must have 2*d columns");
  const std::size_t d = header.size() / 2;
  for (std::size_t j = 0; j < d; ++j) {
    if (header[j] != "xi_" + std::to_string(j + 1) || header[d + j] != "xT_" + std::to_string(j + 1))
      throw ConfigError("pair data CSV header must read xi_1..xi_d,xT_1..xT_d");
  }
  std::vector<double> xi, xt;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split_csv(line);
    if (fields.size() != 2 * d) throw ConfigError("pair data CSV row " + std::to_string(rows + 1) + " has the wrong width");
    for (std::size_t j = 0; j < 2 * d; ++j) {
      char* end = nullptr;
      const double v = std::strtod(fields[j].c_str(), &end);
      if (end == fields[j].c_str() || *end != '\0') throw ConfigError("pair data CSV: bad number '" + fields[j] + "'");
      (j < d ? xi : xt).push_back(v);
    }
    ++rows;
  }
  if (rows == 0) throw ConfigError("pair data CSV has no rows");
  return PairDataSet(ParticleEnsemble(rows, d, std::move(xi)), ParticleEnsemble(rows, d, std::move(xt)), lag);
}

PairDataSet read_pairs_csv(const std::filesystem::path& file, double lag) {
  auto in = open_in(file, std::ios::in | std::ios::binary);
  return read_pairs_csv(in, lag);
}

}  // namespace mvk::io
