#pragma once

#include "lfsr/distance.hpp"
#include "lfsr/lfs_field.hpp"
#include "lfsr/metrics.hpp"
#include "lfsr/multidomain.hpp"
#include "lfsr/sign_solver.hpp"
#include "lfsr/sizing.hpp"
#include "lfsr/surface_mesher.hpp"
#include "lfsr/testkit.hpp"

#include <json.hpp>

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace lfsr {

// Every tunable of a run. Serialized as flat "key = value" lines.
struct RunConfig {
  std::string input;
  std::string output;
  std::string report;
  std::string truth;  // optional primitive description for audits

  // distances and normals
  int k = 12;
  int jet_degree = 2;
  int jet_neighbors = 18;

  // LFS
  double apex_deg = 10.0;
  int rays = 30;
  int cone_hits = 6;
  bool use_curvature = true;
  bool use_diameter = true;
  bool smooth = true;
  int median_k = 9;
  int laplacian_k = 9;
  int laplacian_iterations = 3;
  double laplacian_weight = 0.5;

  // multi-domain
  int envelope_k = 12;
  double envelope_h = 0.0;  // <= 0: twice the mean k-NN spacing
  double radius_edge = 2.0;
  // envelope cells near the data: ratio * size_min_ratio * lfs + grading * d_u
  double envelope_cell_ratio = 0.5;
  double envelope_grading = 0.5;
  double shell_cell_size = 0.0;    // <= 0: sphere radius / 8
  double sphere_facet_size = 0.0;  // <= 0: sphere radius / 8
  std::size_t tet_budget = 2000000;
  int envelope_min_samples = -1;  // < 0: envelope_k

  // signing
  bool side_test = true;
  int side_votes = 5;
  double lambda = 1.0;
  double solver_tol = 1e-8;
  int solver_max_iter = 20000;

  // sizing and meshing
  double size_max = 0.0;  // <= 0: size_min_ratio * lfs_max
  double size_min_ratio = 0.5;
  int sizing_k = 12;
  double min_facet_angle = 25.0;
  double distance_ratio = 0.2;
  double distance_floor_ratio = 1.0;
  double bisection_ratio = 1e-3;
  std::size_t surface_budget = 1000000;
  int probe_chords = 10000;
  int seed_points = 2000;

  std::uint64_t seed = 0;
  int threads = 0;
  bool binary_output = false;

  void set(const std::string& key, const std::string& value);
  std::vector<std::pair<std::string, std::string>> items() const;
  nlohmann::ordered_json to_json() const;
};

RunConfig load_config(const std::string& path);
RunConfig parse_config(std::istream& in);
void save_config(std::ostream& out, const RunConfig& config);

// carries the name of the pipeline stage that failed
class StageError : public Error {
public:
  StageError(std::string stage, const std::string& what)
      : Error(stage + ": " + what), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

private:
  std::string stage_;
};

// Staged pipeline. Later stages reuse earlier results, so a different
// size_max only reruns the surface mesher.
class Pipeline {
public:
  Pipeline(PointCloud cloud, RunConfig config);
  Pipeline(const Pipeline&) = delete;
  Pipeline& operator=(const Pipeline&) = delete;

  const RunConfig& config() const { return config_; }
  RunConfig& config() { return config_; }

  void run_lfs();
  void run_domain();
  void run_solve();
  void run_mesh();
  void run_all();

  const PointCloud& cloud() const { return cloud_; }
  const KdTree& index() const { return *index_; }
  bool normals_estimated() const { return normals_estimated_; }
  double epsilon() const { return eps_; }
  const BoundingSphere& sphere() const { return sphere_; }
  const LfsEstimate& raw_lfs() const { return raw_; }
  const ScalarField& lfs() const { return lfs_; }
  Reach reach() const { return reach_; }
  const SizingFunction& sizing() const { return sizing_; }
  const MultiDomain& domain() const { return *domain_; }
  const std::vector<EdgeSignGuess>& guesses() const { return guesses_; }
  const SignedField& field() const { return field_; }
  const SignedRobustDistance& signed_distance() const { return *signed_; }
  const SurfaceMesh& mesh() const { return mesh_; }
  double kkt_constraint_residual() const;

  // sizing for the given size_max (<= 0 uses the config default)
  SizingFunction make_sizing(double size_max) const;
  // replaces the sizing; only the mesh stage has to be rerun
  void set_size_max(double size_max);
  double global_error_bound() const;

  // outlier[i] marks points left out of the error-bound audit
  EvalReport evaluate_mesh(const std::optional<PrimitiveSpec>& truth, const std::vector<bool>* outlier = nullptr) const;
  nlohmann::ordered_json report(const EvalReport& eval) const;

private:
  template <class F>
  void stage(const char* name, F&& f);

  RunConfig config_;
  PointCloud cloud_;
  std::unique_ptr<KdTree> index_;
  bool normals_estimated_ = false;
  double eps_ = 0.0;
  BoundingSphere sphere_;
  LfsEstimate raw_;
  ScalarField lfs_;
  Reach reach_;
  SizingFunction sizing_;
  std::unique_ptr<MultiDomain> domain_;
  std::vector<EdgeSignGuess> guesses_;
  SignedField field_;
  std::unique_ptr<SignedRobustDistance> signed_;
  SurfaceMesh mesh_;
  int stage_done_ = 0;
};

// facet count of the extracted mesh for each size_max
std::vector<std::size_t> facet_count_vs_sizemax(Pipeline& pipeline, const std::vector<double>& size_max_list);

// absolute LFS errors against an analytic primitive, skipping outliers
struct LfsError {
  double mean = 0.0;
  double max = 0.0;
  std::size_t count = 0;
};
LfsError lfs_error(const ScalarField& field, std::span<const Point3> points, const PrimitiveSpec& truth,
                   const std::vector<bool>* outlier = nullptr);

}  // namespace lfsr
