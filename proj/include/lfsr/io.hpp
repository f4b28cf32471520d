#pragma once

#include "lfsr/point_cloud.hpp"

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

namespace lfsr {

struct TriangleMesh {
  std::vector<Point3> vertices;
  std::vector<std::array<int, 3>> triangles;
};

// "x y z" or "x y z nx ny nz" per line, '#' comments
PointCloud read_xyz(std::istream& in);
void write_xyz(std::ostream& out, const PointCloud& cloud);

// ascii or binary_little_endian; vertex x/y/z with optional nx/ny/nz
PointCloud read_ply_points(std::istream& in);
void write_ply_points(std::ostream& out, const PointCloud& cloud, bool binary = false);

TriangleMesh read_ply_mesh(std::istream& in);
void write_ply_mesh(std::ostream& out, const TriangleMesh& mesh, bool binary = false);
TriangleMesh read_obj_mesh(std::istream& in);
void write_obj_mesh(std::ostream& out, const TriangleMesh& mesh);

// dispatch on extension (.xyz/.txt/.pts, .ply); throws InputError
PointCloud load_point_cloud(const std::string& path);
void save_point_cloud(const std::string& path, const PointCloud& cloud);
TriangleMesh load_mesh(const std::string& path);
void save_mesh(const std::string& path, const TriangleMesh& mesh);

}  // namespace lfsr
