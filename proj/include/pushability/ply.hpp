#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

#include "pushability/pointcloud.hpp"

namespace pushability {

/// Contents of an ASCII PLY vertex element. Sidecars are present only when the
/// header declared the corresponding properties.
struct PlyData {
  PointCloud cloud;
  std::optional<NormalField> normals;
  std::optional<std::vector<int>> labels;
};

// Accepts `format ascii 1.0` with float/double/int x, y, z and optional nx, ny, nz
// and an integer `label`. Other vertex properties are read and discarded; other
// elements are skipped. Throws PlyParseError with the offending line number.
PlyData read_ply(std::istream& in);
PlyData load_ply(const std::filesystem::path& path);

// Writes `%.6f` coordinates. A normal slot that is invalid is written as 0 0 0 and
// reads back as invalid.
void write_ply(std::ostream& out, const PointCloud& cloud, const NormalField* normals = nullptr,
               const std::vector<int>* labels = nullptr);
void save_ply(const std::filesystem::path& path, const PointCloud& cloud,
              const NormalField* normals = nullptr, const std::vector<int>* labels = nullptr);

}  // namespace pushability
