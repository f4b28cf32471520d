#include "lfsr/io.hpp"

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

namespace lfsr {

namespace {

std::string lower_extension(const std::string& path) {
  const auto dot = path.find_last_of('.');
  if (dot == std::string::npos) return {};
  std::string ext = path.substr(dot + 1);
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext;
}

void write_double(std::ostream& out, double v) {
  out << std::setprecision(17) << v;
}

enum class PlyType { i8, u8, i16, u16, i32, u32, f32, f64 };

PlyType parse_ply_type(const std::string& t) {
  static const std::map<std::string, PlyType> types = {
      {"char", PlyType::i8},    {"int8", PlyType::i8},     {"uchar", PlyType::u8},
      {"uint8", PlyType::u8},   {"short", PlyType::i16},   {"int16", PlyType::i16},
      {"ushort", PlyType::u16}, {"uint16", PlyType::u16},  {"int", PlyType::i32},
      {"int32", PlyType::i32},  {"uint", PlyType::u32},    {"uint32", PlyType::u32},
      {"float", PlyType::f32},  {"float32", PlyType::f32}, {"double", PlyType::f64},
      {"float64", PlyType::f64}};
  auto it = types.find(t);
  if (it == types.end()) throw InputError("unknown PLY property type '" + t + "'");
  return it->second;
}

template <class T>
T read_raw(std::istream& in) {
  T v;
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw InputError("truncated binary PLY");
  return v;
}

double read_binary(std::istream& in, PlyType t) {
  switch (t) {
    case PlyType::i8: return read_raw<std::int8_t>(in);
    case PlyType::u8: return read_raw<std::uint8_t>(in);
    case PlyType::i16: return read_raw<std::int16_t>(in);
    case PlyType::u16: return read_raw<std::uint16_t>(in);
    case PlyType::i32: return read_raw<std::int32_t>(in);
    case PlyType::u32: return read_raw<std::uint32_t>(in);
    case PlyType::f32: return read_raw<float>(in);
    case PlyType::f64: return read_raw<double>(in);
  }
  return 0.0;
}

struct PlyProperty {
  std::string name;
  PlyType type = PlyType::f32;
  bool is_list = false;
  PlyType count_type = PlyType::u8;
};

struct PlyElement {
  std::string name;
  std::size_t count = 0;
  std::vector<PlyProperty> props;
};

struct PlyData {
  std::vector<Point3> points;
  std::vector<Vector3> normals;
  std::vector<std::array<int, 3>> triangles;
};

PlyData read_ply(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("ply", 0) != 0) throw InputError("not a PLY file");
  bool binary = false;
  std::vector<PlyElement> elements;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "format") {
      std::string fmt;
      ls >> fmt;
      if (fmt == "ascii") binary = false;
      else if (fmt == "binary_little_endian") binary = true;
      else throw InputError("unsupported PLY format '" + fmt + "'");
    } else if (key == "element") {
      PlyElement e;
      ls >> e.name >> e.count;
      elements.push_back(e);
    } else if (key == "property") {
      if (elements.empty()) throw InputError("PLY property before element");
      PlyProperty p;
      std::string t;
      ls >> t;
      if (t == "list") {
        std::string ct, it;
        ls >> ct >> it >> p.name;
        p.is_list = true;
        p.count_type = parse_ply_type(ct);
        p.type = parse_ply_type(it);
      } else {
        p.type = parse_ply_type(t);
        ls >> p.name;
      }
      elements.back().props.push_back(p);
    } else if (key == "end_header") {
      break;
    }
  }
  if (!in) throw InputError("PLY header is not terminated");

  PlyData data;
  for (const auto& e : elements) {
    const bool is_vertex = e.name == "vertex";
    const bool is_face = e.name == "face";
    int ix = -1, iy = -1, iz = -1, inx = -1, iny = -1, inz = -1;
    for (std::size_t j = 0; j < e.props.size(); ++j) {
      const auto& n = e.props[j].name;
      if (n == "x") ix = int(j);
      if (n == "y") iy = int(j);
      if (n == "z") iz = int(j);
      if (n == "nx") inx = int(j);
      if (n == "ny") iny = int(j);
      if (n == "nz") inz = int(j);
    }
    if (is_vertex && (ix < 0 || iy < 0 || iz < 0)) throw InputError("PLY vertex lacks x/y/z");
    const bool with_normals = is_vertex && inx >= 0 && iny >= 0 && inz >= 0;
    std::vector<double> scalars(e.props.size());
    std::vector<int> list;
    for (std::size_t i = 0; i < e.count; ++i) {
      std::istringstream ls;
      if (!binary) {
        if (!std::getline(in, line)) throw InputError("truncated ASCII PLY");
        ls.str(line);
      }
      for (std::size_t j = 0; j < e.props.size(); ++j) {
        const auto& p = e.props[j];
        if (p.is_list) {
          double cnt = 0;
          if (binary) cnt = read_binary(in, p.count_type);
          else if (!(ls >> cnt)) throw InputError("bad PLY list");
          list.clear();
          for (int c = 0; c < int(cnt); ++c) {
            double v = 0;
            if (binary) v = read_binary(in, p.type);
            else if (!(ls >> v)) throw InputError("bad PLY list entry");
            list.push_back(static_cast<int>(v));
          }
          if (is_face && (p.name == "vertex_indices" || p.name == "vertex_index")) {
            for (std::size_t c = 1; c + 1 < list.size(); ++c)
              data.triangles.push_back({list[0], list[c], list[c + 1]});
          }
        } else {
          if (binary) scalars[j] = read_binary(in, p.type);
          else if (!(ls >> scalars[j])) throw InputError("bad PLY value");
        }
      }
      if (is_vertex) {
        data.points.emplace_back(scalars[ix], scalars[iy], scalars[iz]);
        if (with_normals) data.normals.emplace_back(scalars[inx], scalars[iny], scalars[inz]);
      }
    }
  }
  return data;
}

void write_ply_header(std::ostream& out, std::size_t nv, std::size_t nf, bool normals, bool binary) {
  out << "ply\nformat " << (binary ? "binary_little_endian" : "ascii") << " 1.0\n";
  out << "element vertex " << nv << "\n";
  out << "property double x\nproperty double y\nproperty double z\n";
  if (normals) out << "property double nx\nproperty double ny\nproperty double nz\n";
  if (nf > 0) out << "element face " << nf << "\nproperty list uchar int vertex_indices\n";
  out << "end_header\n";
}

template <class T>
void write_raw(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

void normalize_normals(PointCloud& cloud) {
  for (auto& n : cloud.normals) {
    const double len = n.norm();
    if (len > 0) n /= len;
  }
}

}  // namespace

PointCloud read_xyz(std::istream& in) {
  PointCloud cloud;
  std::string line;
  int columns = -1;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::vector<double> v;
    double x;
    while (ls >> x) v.push_back(x);
    if (!ls.eof()) throw InputError("unparsable value on line " + std::to_string(lineno));
    if (v.empty()) continue;
    if (v.size() != 3 && v.size() != 6)
      throw InputError("line " + std::to_string(lineno) + " has " + std::to_string(v.size()) + " values");
    if (columns < 0) columns = int(v.size());
    if (columns != int(v.size())) throw InputError("inconsistent column count on line " + std::to_string(lineno));
    cloud.points.emplace_back(v[0], v[1], v[2]);
    if (columns == 6) cloud.normals.emplace_back(v[3], v[4], v[5]);
  }
  normalize_normals(cloud);
  return cloud;
}

void write_xyz(std::ostream& out, const PointCloud& cloud) {
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto& p = cloud.points[i];
    write_double(out, p.x()); out << ' ';
    write_double(out, p.y()); out << ' ';
    write_double(out, p.z());
    if (cloud.has_normals()) {
      const auto& n = cloud.normals[i];
      out << ' '; write_double(out, n.x());
      out << ' '; write_double(out, n.y());
      out << ' '; write_double(out, n.z());
    }
    out << '\n';
  }
}

PointCloud read_ply_points(std::istream& in) {
  PlyData d = read_ply(in);
  PointCloud cloud;
  cloud.points = std::move(d.points);
  cloud.normals = std::move(d.normals);
  normalize_normals(cloud);
  return cloud;
}

void write_ply_points(std::ostream& out, const PointCloud& cloud, bool binary) {
  write_ply_header(out, cloud.size(), 0, cloud.has_normals(), binary);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto& p = cloud.points[i];
    if (binary) {
      for (int a = 0; a < 3; ++a) write_raw(out, p[a]);
      if (cloud.has_normals())
        for (int a = 0; a < 3; ++a) write_raw(out, cloud.normals[i][a]);
    } else {
      write_double(out, p.x()); out << ' ';
      write_double(out, p.y()); out << ' ';
      write_double(out, p.z());
      if (cloud.has_normals())
        for (int a = 0; a < 3; ++a) { out << ' '; write_double(out, cloud.normals[i][a]); }
      out << '\n';
    }
  }
}

TriangleMesh read_ply_mesh(std::istream& in) {
  PlyData d = read_ply(in);
  return {std::move(d.points), std::move(d.triangles)};
}

void write_ply_mesh(std::ostream& out, const TriangleMesh& mesh, bool binary) {
  write_ply_header(out, mesh.vertices.size(), mesh.triangles.size(), false, binary);
  for (const auto& p : mesh.vertices) {
    if (binary) {
      for (int a = 0; a < 3; ++a) write_raw(out, p[a]);
    } else {
      write_double(out, p.x()); out << ' ';
      write_double(out, p.y()); out << ' ';
      write_double(out, p.z()); out << '\n';
    }
  }
  for (const auto& t : mesh.triangles) {
    if (binary) {
      write_raw<std::uint8_t>(out, 3);
      for (int a = 0; a < 3; ++a) write_raw<std::int32_t>(out, t[a]);
    } else {
      out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
    }
  }
}

TriangleMesh read_obj_mesh(std::istream& in) {
  TriangleMesh mesh;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "v") {
      double x, y, z;
      if (!(ls >> x >> y >> z)) throw InputError("bad OBJ vertex");
      mesh.vertices.emplace_back(x, y, z);
    } else if (key == "f") {
      std::vector<int> idx;
      std::string tok;
      while (ls >> tok) {
        int v = std::stoi(tok.substr(0, tok.find('/')));
        idx.push_back(v < 0 ? int(mesh.vertices.size()) + v : v - 1);
      }
      for (std::size_t c = 1; c + 1 < idx.size(); ++c) mesh.triangles.push_back({idx[0], idx[c], idx[c + 1]});
    }
  }
  return mesh;
}

void write_obj_mesh(std::ostream& out, const TriangleMesh& mesh) {
  for (const auto& p : mesh.vertices) {
    out << "v ";
    write_double(out, p.x()); out << ' ';
    write_double(out, p.y()); out << ' ';
    write_double(out, p.z()); out << '\n';
  }
  for (const auto& t : mesh.triangles) out << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
}

PointCloud load_point_cloud(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "'");
  const std::string ext = lower_extension(path);
  PointCloud cloud = ext == "ply" ? read_ply_points(in) : read_xyz(in);
  cloud.validate();
  return cloud;
}

void save_point_cloud(const std::string& path, const PointCloud& cloud) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path + "'");
  if (lower_extension(path) == "ply") write_ply_points(out, cloud);
  else write_xyz(out, cloud);
}

TriangleMesh load_mesh(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "'");
  return lower_extension(path) == "obj" ? read_obj_mesh(in) : read_ply_mesh(in);
}

void save_mesh(const std::string& path, const TriangleMesh& mesh) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path + "'");
  if (lower_extension(path) == "obj") write_obj_mesh(out, mesh);
  else write_ply_mesh(out, mesh);
}

}  // namespace lfsr
