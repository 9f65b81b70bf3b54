#pragma once

#include <filesystem>

#include "moransac/point_cloud.hpp"

namespace moransac {

enum class PlyFormat { kAscii, kBinaryLittleEndian };

/// Writes x/y/z as float32 plus red/green/blue (uint8) and nx/ny/nz (float32)
/// when the cloud carries those channels.
void write_ply(const std::filesystem::path& file, const PointCloud& cloud,
               PlyFormat format = PlyFormat::kBinaryLittleEndian);

/// Reads ASCII or binary little-endian PLY. Unknown vertex properties and
/// non-vertex elements are skipped. Throws FormatError on malformed files
/// and on big-endian input.
PointCloud read_ply(const std::filesystem::path& file);

}  // namespace moransac
