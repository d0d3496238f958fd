// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "tinet/pointcloud.hpp"

namespace tinet {

enum class CloudFormat { Auto, Xyz, Off };

/// XYZ: one point per line, 3 whitespace-separated reals plus optional
/// trailing attribute columns; '#' lines ignored.
/// OFF: "OFF" header, "V F E" counts, V vertex lines; faces discarded.
/// Malformed input throws DataError carrying the offending line number.
PointCloud load_cloud(const std::string& path, CloudFormat format = CloudFormat::Auto);
PointCloud parse_xyz(std::istream& in, const std::string& origin);
PointCloud parse_off(std::istream& in, const std::string& origin);

/// Coordinates (and attributes, when present) at 17 significant digits,
/// so save -> load reproduces doubles bitwise.
void write_xyz(const PointCloud& cloud, const std::string& path);

struct ManifestEntry {
  std::string path; // resolved against the manifest's directory
  int label = 0;
};

/// One "path<TAB>label" entry per line; '#' lines ignored.
std::vector<ManifestEntry> load_manifest(const std::string& path);
void write_manifest(const std::vector<ManifestEntry>& entries, const std::string& path);

/// Whitespace-separated numeric table at 17 significant digits.
void write_table(const Matrix& table, const std::string& path);

/// Whitespace-separated numeric table; rows must have equal width.
Matrix load_table(const std::string& path);

} // namespace tinet
