#pragma once

#include <string>

#include "n2s3/point_cloud.hpp"

namespace n2s3 {

/// ASCII XYZ: one point per line, three whitespace-separated reals, lines
/// whose first non-space character is '#' ignored. Malformed lines raise
/// ParseError with the 1-based line number.
PointCloud read_xyz(const std::string& path);

/// Writes shortest-round-trip decimals with '\n' line endings, so
/// write -> read reproduces the cloud bit for bit.
void write_xyz(const std::string& path, const PointCloud& pc);

/// PLY reader for ascii and binary_little_endian files with float or double
/// x, y, z vertex properties; other elements and extra scalar vertex
/// properties are ignored. Big-endian files raise UnsupportedFormat.
PointCloud read_ply(const std::string& path);

/// Writes binary_little_endian PLY with double x, y, z.
void write_ply(const std::string& path, const PointCloud& pc);

/// Dispatches on the file extension (.xyz or .ply, case insensitive).
PointCloud read_cloud(const std::string& path);
void write_cloud(const std::string& path, const PointCloud& pc);

}  // namespace n2s3
