#include "mhcd/mesh_io.hpp"

#include <array>
#include <cstring>
#include <fstream>
#include <sstream>

namespace mhcd {

namespace {

struct PlyProperty {
  std::string name;
  std::string type;
  bool isList = false;
  std::string countType;
};

struct PlyElement {
  std::string name;
  std::size_t count = 0;
  std::vector<PlyProperty> properties;
};

std::size_t scalarSize(const std::string& t) {
  if (t == "char" || t == "uchar" || t == "int8" || t == "uint8") return 1;
  if (t == "short" || t == "ushort" || t == "int16" || t == "uint16") return 2;
  if (t == "int" || t == "uint" || t == "int32" || t == "uint32" || t == "float" ||
      t == "float32")
    return 4;
  if (t == "double" || t == "float64") return 8;
  throw DataError("unknown PLY scalar type: " + t);
}

double readBinaryScalar(std::istream& in, const std::string& t) {
  unsigned char buf[8];
  const std::size_t n = scalarSize(t);
  in.read(reinterpret_cast<char*>(buf), static_cast<std::streamsize>(n));
  if (!in) throw DataError("unexpected end of binary PLY data");
  // Little-endian file, little-endian host.
  if (t == "float" || t == "float32") {
    float v;
    std::memcpy(&v, buf, 4);
    return v;
  }
  if (t == "double" || t == "float64") {
    double v;
    std::memcpy(&v, buf, 8);
    return v;
  }
  std::int64_t v = 0;
  const bool isSigned = t[0] == 'c' || t[0] == 's' || (t[0] == 'i');
  if (n == 1) v = isSigned ? static_cast<std::int8_t>(buf[0]) : buf[0];
  if (n == 2) {
    std::uint16_t u;
    std::memcpy(&u, buf, 2);
    v = isSigned ? static_cast<std::int16_t>(u) : u;
  }
  if (n == 4) {
    std::uint32_t u;
    std::memcpy(&u, buf, 4);
    v = isSigned ? static_cast<std::int32_t>(u) : static_cast<std::int64_t>(u);
  }
  return static_cast<double>(v);
}

struct PlyData {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> faces;
};

PlyData parsePly(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open PLY file: " + path);

  std::string line;
  if (!std::getline(in, line) || line.substr(0, 3) != "ply")
    throw DataError("not a PLY file: " + path);

  bool binary = false;
  std::vector<PlyElement> elements;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ls(line);
    std::string token;
    ls >> token;
    if (token == "comment" || token == "obj_info") continue;
    if (token == "format") {
      std::string fmt;
      ls >> fmt;
      if (fmt == "binary_little_endian")
        binary = true;
      else if (fmt == "ascii")
        binary = false;
      else
        throw DataError("unsupported PLY format: " + fmt);
    } else if (token == "element") {
      PlyElement e;
      ls >> e.name >> e.count;
      elements.push_back(e);
    } else if (token == "property") {
      if (elements.empty()) throw DataError("PLY property before element");
      PlyProperty p;
      std::string t;
      ls >> t;
      if (t == "list") {
        p.isList = true;
        ls >> p.countType >> p.type >> p.name;
      } else {
        p.type = t;
        ls >> p.name;
      }
      elements.back().properties.push_back(p);
    } else if (token == "end_header") {
      break;
    }
  }

  PlyData out;
  for (const auto& elem : elements) {
    const bool isVertex = elem.name == "vertex";
    const bool isFace = elem.name == "face";
    int xi = -1, yi = -1, zi = -1, listIdx = -1;
    for (std::size_t i = 0; i < elem.properties.size(); ++i) {
      const auto& p = elem.properties[i];
      if (isVertex && p.name == "x") xi = static_cast<int>(i);
      if (isVertex && p.name == "y") yi = static_cast<int>(i);
      if (isVertex && p.name == "z") zi = static_cast<int>(i);
      if (isFace && p.isList && (p.name == "vertex_indices" || p.name == "vertex_index"))
        listIdx = static_cast<int>(i);
    }
    if (isVertex && (xi < 0 || yi < 0 || zi < 0))
      throw DataError("PLY vertex element lacks x/y/z");

    for (std::size_t n = 0; n < elem.count; ++n) {
      std::vector<double> scalars(elem.properties.size(), 0.0);
      std::vector<long> faceIdx;
      if (binary) {
        for (std::size_t i = 0; i < elem.properties.size(); ++i) {
          const auto& p = elem.properties[i];
          if (p.isList) {
            const auto cnt = static_cast<long>(readBinaryScalar(in, p.countType));
            for (long k = 0; k < cnt; ++k) {
              const double v = readBinaryScalar(in, p.type);
              if (static_cast<int>(i) == listIdx) faceIdx.push_back(static_cast<long>(v));
            }
          } else {
            scalars[i] = readBinaryScalar(in, p.type);
          }
        }
      } else {
        for (std::size_t i = 0; i < elem.properties.size(); ++i) {
          const auto& p = elem.properties[i];
          if (p.isList) {
            long cnt;
            if (!(in >> cnt)) throw DataError("unexpected end of ascii PLY data");
            for (long k = 0; k < cnt; ++k) {
              double v;
              in >> v;
              if (static_cast<int>(i) == listIdx) faceIdx.push_back(static_cast<long>(v));
            }
          } else {
            if (!(in >> scalars[i])) throw DataError("unexpected end of ascii PLY data");
          }
        }
      }
      if (isVertex) out.vertices.emplace_back(scalars[xi], scalars[yi], scalars[zi]);
      if (isFace && listIdx >= 0) {
        if (faceIdx.size() < 3) throw DataError("PLY face with fewer than 3 indices");
        // Fan-triangulate polygons.
        for (std::size_t k = 1; k + 1 < faceIdx.size(); ++k)
          out.faces.push_back({static_cast<int>(faceIdx[0]), static_cast<int>(faceIdx[k]),
                               static_cast<int>(faceIdx[k + 1])});
      }
    }
  }
  return out;
}

}  // namespace

TriangleMesh loadPly(const std::string& path) {
  PlyData data = parsePly(path);
  return TriangleMesh::fromData(std::move(data.vertices), std::move(data.faces));
}

PointCloud loadPlyPoints(const std::string& path) {
  PlyData data = parsePly(path);
  PointCloud cloud(static_cast<Eigen::Index>(data.vertices.size()), 3);
  for (std::size_t i = 0; i < data.vertices.size(); ++i)
    cloud.row(static_cast<Eigen::Index>(i)) = data.vertices[i].transpose();
  return cloud;
}

TriangleMesh loadObj(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open OBJ file: " + path);
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> faces;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string token;
    ls >> token;
    if (token == "v") {
      double x, y, z;
      ls >> x >> y >> z;
      vertices.emplace_back(x, y, z);
    } else if (token == "f") {
      std::vector<int> idx;
      std::string item;
      while (ls >> item) {
        // "i", "i/t", "i//n", "i/t/n"; 1-based, negatives relative.
        const long raw = std::stol(item.substr(0, item.find('/')));
        const long resolved = raw > 0 ? raw - 1 : static_cast<long>(vertices.size()) + raw;
        idx.push_back(static_cast<int>(resolved));
      }
      if (idx.size() < 3) throw DataError("OBJ face with fewer than 3 indices");
      for (std::size_t k = 1; k + 1 < idx.size(); ++k)
        faces.push_back({idx[0], idx[k], idx[k + 1]});
    }
  }
  return TriangleMesh::fromData(std::move(vertices), std::move(faces));
}

TriangleMesh loadMesh(const std::string& path) {
  const auto dot = path.find_last_of('.');
  const std::string ext = dot == std::string::npos ? "" : path.substr(dot + 1);
  if (ext == "obj") return loadObj(path);
  if (ext == "ply") return loadPly(path);
  throw DataError("unsupported mesh format: " + path);
}

namespace {

void writePlyHeader(std::ostream& out, std::size_t nVerts, std::size_t nFaces, bool binary) {
  out << "ply\n"
      << (binary ? "format binary_little_endian 1.0\n" : "format ascii 1.0\n")
      << "element vertex " << nVerts << "\n"
      << "property double x\nproperty double y\nproperty double z\n";
  if (nFaces > 0) {
    out << "element face " << nFaces << "\n"
        << "property list uchar int vertex_indices\n";
  }
  out << "end_header\n";
}

}  // namespace

void savePlyMesh(const std::string& path, const TriangleMesh& mesh, bool binary) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write PLY file: " + path);
  writePlyHeader(out, mesh.vertexCount(), mesh.faceCount(), binary);
  if (binary) {
    for (const auto& v : mesh.vertices())
      out.write(reinterpret_cast<const char*>(v.data()), 24);
    for (const auto& f : mesh.faces()) {
      const std::uint8_t n = 3;
      out.write(reinterpret_cast<const char*>(&n), 1);
      out.write(reinterpret_cast<const char*>(f.data()), 12);
    }
  } else {
    out.precision(17);
    for (const auto& v : mesh.vertices()) out << v.x() << " " << v.y() << " " << v.z() << "\n";
    for (const auto& f : mesh.faces()) out << "3 " << f[0] << " " << f[1] << " " << f[2] << "\n";
  }
  if (!out) throw DataError("short write: " + path);
}

void savePlyPoints(const std::string& path, const PointCloud& points, bool binary) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write PLY file: " + path);
  writePlyHeader(out, static_cast<std::size_t>(points.rows()), 0, binary);
  if (binary) {
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
      const double xyz[3] = {points(i, 0), points(i, 1), points(i, 2)};
      out.write(reinterpret_cast<const char*>(xyz), 24);
    }
  } else {
    out.precision(17);
    for (Eigen::Index i = 0; i < points.rows(); ++i)
      out << points(i, 0) << " " << points(i, 1) << " " << points(i, 2) << "\n";
  }
  if (!out) throw DataError("short write: " + path);
}

void savePgm(const std::string& path, int width, int height,
             const std::vector<std::uint8_t>& pixels) {
  if (static_cast<std::size_t>(width) * height != pixels.size())
    throw DataError("PGM pixel count mismatch");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write PGM file: " + path);
  out << "P5\n" << width << " " << height << "\n255\n";
  out.write(reinterpret_cast<const char*>(pixels.data()),
            static_cast<std::streamsize>(pixels.size()));
  if (!out) throw DataError("short write: " + path);
}

void loadPgm(const std::string& path, int& width, int& height,
             std::vector<std::uint8_t>& pixels) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open PGM file: " + path);
  std::string magic;
  in >> magic;
  if (magic != "P5") throw DataError("unsupported PGM magic: " + magic);
  int maxval;
  in >> width >> height >> maxval;
  in.get();  // single whitespace after maxval
  if (width <= 0 || height <= 0 || maxval != 255) throw DataError("bad PGM header: " + path);
  pixels.resize(static_cast<std::size_t>(width) * height);
  in.read(reinterpret_cast<char*>(pixels.data()), static_cast<std::streamsize>(pixels.size()));
  if (!in) throw DataError("truncated PGM file: " + path);
}

}  // namespace mhcd
