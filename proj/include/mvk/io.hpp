#pragma once

#include <filesystem>
#include <iosfwd>

#include "mvk/core.hpp"

namespace mvk::io {

/// Binary measure-path layout (all little-endian):
///   "MVMP" | u32 version=1 | u32 d | u64 M | u64 K+1 | f64 h |
///   (K+1)*M*d f64 values, snapshot-major, then particle, then coordinate.
inline constexpr std::uint32_t kMeasurePathVersion = 1;

void write_measure_path(std::ostream& out, const MeasurePath& path);
void write_measure_path(const std::filesystem::path& file, const MeasurePath& path);
/// Provenance (seed, model) is not part of the binary layout and is left empty.
MeasurePath read_measure_path(std::istream& in);
MeasurePath read_measure_path(const std::filesystem::path& file);

/// CSV with header xi_1..xi_d,xT_1..xT_d and %.17g values.
void write_pairs_csv(std::ostream& out, const PairDataSet& data);
void write_pairs_csv(const std::filesystem::path& file, const PairDataSet& data);
PairDataSet read_pairs_csv(std::istream& in, double lag);
PairDataSet read_pairs_csv(const std::filesystem::path& file, double lag);

/// Shortest round-trip-safe decimal form (%.17g).
std::string format_double(double value);

void write_text(const std::filesystem::path& file, const std::string& contents);

}  // namespace mvk::io
