#include <doctest.h>

#include <json.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() / ("lfsr_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

int run(const std::string& args) {
  const std::string cmd = std::string("\"") + LFSR_CLI_PATH + "\" " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

nlohmann::json read_json(const std::string& path) { return nlohmann::json::parse(slurp(path)); }

std::string sphere_cloud(const TempDir& dir) {
  const std::string path = dir / "sphere.xyz";
  REQUIRE(run("sample --primitive \"kind=sphere radius=1 count=1500\" --seed 3 -o " + path) == 0);
  return path;
}

}  // namespace

TEST_CASE("cli exit codes for bad invocations") {
  TempDir dir;
  CHECK(run("") == 2);
  CHECK(run("frobnicate") == 2);
  CHECK(run("lfs") == 2);
  CHECK(run("--help") == 0);
  CHECK(run("lfs -i " + (dir / "missing.xyz")) == 2);
  CHECK(run("sample --primitive \"kind=dodecahedron\"") == 2);

  std::ofstream(dir / "bad.xyz") << "0 0 0\n1 2\n";
  CHECK(run("lfs -i " + (dir / "bad.xyz")) == 2);

  const std::string cloud = sphere_cloud(dir);
  CHECK(run("lfs -i " + cloud + " --set nonsense=1") == 2);
  CHECK(run("lfs -i " + cloud + " --set k") == 2);
  CHECK(run("lfs -i " + cloud + " --log-level loud") == 2);
}

TEST_CASE("cli collinear input is a clean stage failure") {
  TempDir dir;
  std::ofstream(dir / "line.xyz") << "0 0 0\n1 0 0\n2 0 0\n";
  CHECK(run("reconstruct -i " + (dir / "line.xyz") + " -o " + (dir / "m.obj")) == 3);
  CHECK_FALSE(fs::exists(dir / "m.obj"));
}

TEST_CASE("cli sample is deterministic") {
  TempDir dir;
  REQUIRE(run("sample --primitive \"kind=capsule count=500 noise=0.005\" --seed 9 -o " + (dir / "a.xyz")) == 0);
  REQUIRE(run("sample --primitive \"kind=capsule count=500 noise=0.005\" --seed 9 -o " + (dir / "b.xyz")) == 0);
  REQUIRE(run("sample --primitive \"kind=capsule count=500 noise=0.005\" --seed 10 -o " + (dir / "c.xyz")) == 0);
  CHECK(slurp(dir / "a.xyz") == slurp(dir / "b.xyz"));
  CHECK(slurp(dir / "a.xyz") != slurp(dir / "c.xyz"));
}

TEST_CASE("cli lfs reports error against a primitive") {
  TempDir dir;
  const std::string cloud = sphere_cloud(dir);
  REQUIRE(run("lfs -i " + cloud + " --truth \"kind=sphere radius=1\" -o " + (dir / "f.csv") + " --report " +
              (dir / "r.json")) == 0);
  auto r = read_json(dir / "r.json");
  CHECK(r["lfs"]["smoothed"] == true);
  CHECK(r["input"]["normals_estimated"] == true);
  CHECK(r["lfs_error"]["points"] == 1500);
  CHECK(r["lfs_error"]["mean"].get<double>() <= 0.05);
  CHECK(r["config"]["k"] == "12");

  const std::string csv = slurp(dir / "f.csv");
  CHECK(csv.rfind("id,lfs,provenance\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1501);

  // without smoothing the exported field is the raw one
  REQUIRE(run("lfs -i " + cloud + " --no-smooth --truth \"kind=sphere radius=1\" --report " + (dir / "raw.json")) ==
          0);
  auto raw = read_json(dir / "raw.json");
  CHECK(raw["lfs"]["smoothed"] == false);
  CHECK(raw["config"]["smooth"] == "false");
  CHECK(raw["lfs_error"]["mean"] == raw["lfs_error"]["raw_mean"]);

  REQUIRE(run("lfs -i " + cloud + " -o " + (dir / "f.ply")) == 0);
  CHECK(slurp(dir / "f.ply").find("property double lfs") != std::string::npos);
}

TEST_CASE("cli config file with flag overrides") {
  TempDir dir;
  const std::string cloud = sphere_cloud(dir);
  std::ofstream(dir / "run.cfg") << "# comment\nk = 8\nrays = 12\n";
  REQUIRE(run("lfs -i " + cloud + " -c " + (dir / "run.cfg") + " --rays 20 --report " + (dir / "r.json")) == 0);
  auto r = read_json(dir / "r.json");
  CHECK(r["config"]["k"] == "8");
  CHECK(r["config"]["rays"] == "20");

  std::ofstream(dir / "broken.cfg") << "k 8\n";
  CHECK(run("lfs -i " + cloud + " -c " + (dir / "broken.cfg")) == 2);
}

TEST_CASE("cli reconstruct and eval a sphere") {
  TempDir dir;
  const std::string cloud = sphere_cloud(dir);
  REQUIRE(run("reconstruct -i " + cloud + " -o " + (dir / "m.obj") + " --report " + (dir / "r.json") +
              " --truth \"kind=sphere radius=1\"") == 0);
  auto r = read_json(dir / "r.json");
  const auto& e = r["evaluation"];
  CHECK(e["watertight"] == true);
  CHECK(e["manifold"] == true);
  CHECK(e["self_intersections"] == 0);
  CHECK(e["components"] == 1);
  CHECK(e["genus_per_component"] == nlohmann::json::array({0}));
  CHECK(r.contains("global_error_bound"));
  CHECK(r["config"].contains("radius_edge"));
  CHECK(fs::exists(dir / "m.obj.facets.csv"));

  REQUIRE(run("eval -m " + (dir / "m.obj") + " -p " + cloud + " --report " + (dir / "e.json")) == 0);
  auto ev = read_json(dir / "e.json");
  CHECK(ev["facet_count"] == e["facet_count"]);
  CHECK(ev["chamfer"].get<double>() == doctest::Approx(e["chamfer"].get<double>()));

  REQUIRE(run("eval -m " + (dir / "m.obj") + " -p " + cloud + " --truth \"kind=sphere radius=1\" --report " +
              (dir / "a.json")) == 0);
  CHECK(read_json(dir / "a.json").contains("error_bound_audit"));

  // a mesh against its own vertices has zero chamfer
  std::ofstream verts(dir / "verts.xyz");
  std::istringstream obj(slurp(dir / "m.obj"));
  for (std::string line; std::getline(obj, line);)
    if (line.rfind("v ", 0) == 0) verts << line.substr(2) << '\n';
  verts.close();
  REQUIRE(run("eval -m " + (dir / "m.obj") + " -p " + (dir / "verts.xyz") + " --report " + (dir / "v.json")) == 0);
  CHECK(read_json(dir / "v.json")["chamfer"].get<double>() <= 1e-12);

  CHECK(run("eval -m " + (dir / "nothing.obj") + " -p " + cloud) == 2);
}

TEST_CASE("cli reconstruct is byte identical across runs and threads") {
  TempDir dir;
  const std::string cloud = sphere_cloud(dir);
  REQUIRE(run("reconstruct -i " + cloud + " -o " + (dir / "a.ply") + " --threads 1 --seed 5") == 0);
  REQUIRE(run("reconstruct -i " + cloud + " -o " + (dir / "b.ply") + " --threads 1 --seed 5") == 0);
  REQUIRE(run("reconstruct -i " + cloud + " -o " + (dir / "c.ply") + " --threads 4 --seed 5") == 0);
  CHECK(slurp(dir / "a.ply") == slurp(dir / "b.ply"));
  CHECK(slurp(dir / "a.ply") == slurp(dir / "c.ply"));
  CHECK_FALSE(slurp(dir / "a.ply").empty());
}
