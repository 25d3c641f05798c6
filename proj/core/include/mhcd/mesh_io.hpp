#pragma once

#include <string>
#include <vector>

#include "mhcd/mesh.hpp"
#include "mhcd/types.hpp"

namespace mhcd {

// PLY: ascii and binary_little_endian, positions + faces only, other
// attributes skipped. OBJ: v/f records only.
TriangleMesh loadMesh(const std::string& path);
TriangleMesh loadPly(const std::string& path);
TriangleMesh loadObj(const std::string& path);

PointCloud loadPlyPoints(const std::string& path);

void savePlyMesh(const std::string& path, const TriangleMesh& mesh, bool binary = true);
void savePlyPoints(const std::string& path, const PointCloud& points, bool binary = true);

// PGM (P5, one byte per pixel). Nonzero = erased.
void savePgm(const std::string& path, int width, int height,
             const std::vector<std::uint8_t>& pixels);
void loadPgm(const std::string& path, int& width, int& height,
             std::vector<std::uint8_t>& pixels);

}  // namespace mhcd
