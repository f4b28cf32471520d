#include "lfsr/pipeline.hpp"

#include "lfsr/log.hpp"

#include <Eigen/Eigenvalues>

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

namespace lfsr {

namespace {

struct ConfigField {
  const char* name;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&)> set;
};

std::string format_value(const std::string& v) { return v; }
std::string format_value(bool v) { return v ? "true" : "false"; }
std::string format_value(double v) {
  std::ostringstream o;
  o.precision(17);
  o << v;
  return o.str();
}
template <class T>
std::string format_value(T v) {
  return std::to_string(v);
}

void parse_value(const std::string& s, std::string& out) { out = s; }
void parse_value(const std::string& s, bool& out) {
  if (s == "true" || s == "1" || s == "yes") out = true;
  else if (s == "false" || s == "0" || s == "no") out = false;
  else throw InputError("expected a boolean, got '" + s + "'");
}
void parse_value(const std::string& s, double& out) {
  try {
    std::size_t used = 0;
    out = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
  } catch (const std::exception&) {
    throw InputError("expected a number, got '" + s + "'");
  }
}
template <class T>
void parse_value(const std::string& s, T& out) {
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw InputError("expected an integer, got '" + s + "'");
}

template <class T>
ConfigField field(const char* name, T RunConfig::*member) {
  return {name, [member](const RunConfig& c) { return format_value(c.*member); },
          [member](RunConfig& c, const std::string& v) { parse_value(v, c.*member); }};
}

const std::vector<ConfigField>& config_fields() {
  static const std::vector<ConfigField> fields = {
      field("input", &RunConfig::input),
      field("output", &RunConfig::output),
      field("report", &RunConfig::report),
      field("truth", &RunConfig::truth),
      field("k", &RunConfig::k),
      field("jet_degree", &RunConfig::jet_degree),
      field("jet_neighbors", &RunConfig::jet_neighbors),
      field("apex_deg", &RunConfig::apex_deg),
      field("rays", &RunConfig::rays),
      field("cone_hits", &RunConfig::cone_hits),
      field("use_curvature", &RunConfig::use_curvature),
      field("use_diameter", &RunConfig::use_diameter),
      field("smooth", &RunConfig::smooth),
      field("median_k", &RunConfig::median_k),
      field("laplacian_k", &RunConfig::laplacian_k),
      field("laplacian_iterations", &RunConfig::laplacian_iterations),
      field("laplacian_weight", &RunConfig::laplacian_weight),
      field("envelope_k", &RunConfig::envelope_k),
      field("envelope_h", &RunConfig::envelope_h),
      field("radius_edge", &RunConfig::radius_edge),
      field("envelope_cell_ratio", &RunConfig::envelope_cell_ratio),
      field("envelope_grading", &RunConfig::envelope_grading),
      field("shell_cell_size", &RunConfig::shell_cell_size),
      field("sphere_facet_size", &RunConfig::sphere_facet_size),
      field("tet_budget", &RunConfig::tet_budget),
      field("envelope_min_samples", &RunConfig::envelope_min_samples),
      field("side_test", &RunConfig::side_test),
      field("side_votes", &RunConfig::side_votes),
      field("lambda", &RunConfig::lambda),
      field("solver_tol", &RunConfig::solver_tol),
      field("solver_max_iter", &RunConfig::solver_max_iter),
      field("size_max", &RunConfig::size_max),
      field("size_min_ratio", &RunConfig::size_min_ratio),
      field("sizing_k", &RunConfig::sizing_k),
      field("min_facet_angle", &RunConfig::min_facet_angle),
      field("distance_ratio", &RunConfig::distance_ratio),
      field("distance_floor_ratio", &RunConfig::distance_floor_ratio),
      field("bisection_ratio", &RunConfig::bisection_ratio),
      field("surface_budget", &RunConfig::surface_budget),
      field("probe_chords", &RunConfig::probe_chords),
      field("seed_points", &RunConfig::seed_points),
      field("seed", &RunConfig::seed),
      field("threads", &RunConfig::threads),
      field("binary_output", &RunConfig::binary_output),
  };
  return fields;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

void RunConfig::set(const std::string& key, const std::string& value) {
  for (const auto& f : config_fields())
    if (key == f.name) {
      f.set(*this, value);
      return;
    }
  throw InputError("unknown config key '" + key + "'");
}

std::vector<std::pair<std::string, std::string>> RunConfig::items() const {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& f : config_fields()) out.emplace_back(f.name, f.get(*this));
  return out;
}

nlohmann::ordered_json RunConfig::to_json() const {
  nlohmann::ordered_json j;
  for (const auto& [k, v] : items()) j[k] = v;
  return j;
}

RunConfig parse_config(std::istream& in) {
  RunConfig c;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw InputError("config line " + std::to_string(lineno) + ": expected key = value");
    try {
      c.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const InputError& e) {
      throw InputError("config line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config '" + path + "'");
  return parse_config(in);
}

void save_config(std::ostream& out, const RunConfig& config) {
  for (const auto& [k, v] : config.items()) out << k << " = " << v << '\n';
}

Pipeline::Pipeline(PointCloud cloud, RunConfig config) : config_(std::move(config)), cloud_(std::move(cloud)) {
  cloud_.validate();
}

template <class F>
void Pipeline::stage(const char* name, F&& f) {
  log_info("stage ", name);
  try {
    f();
  } catch (const StageError&) {
    throw;
  } catch (const InputError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

SizingFunction Pipeline::make_sizing(double size_max) const {
  const double size_min = config_.size_min_ratio * reach_.value;
  if (size_max <= 0.0) size_max = std::max(size_min, config_.size_min_ratio * lfs_.max());
  SizingFunction s = facet_sizing(lfs_, reach_, size_max, config_.size_min_ratio, index_.get());
  return smooth_sizing(std::move(s), build_knn_graph(*index_, config_.sizing_k), cloud_.points);
}

void Pipeline::set_size_max(double size_max) {
  config_.size_max = size_max;
  if (stage_done_ < 1) return;
  sizing_ = make_sizing(size_max);
  stage_done_ = std::min(stage_done_, 3);
}

void Pipeline::run_lfs() {
  stage("lfs", [&] {
    // a surface needs at least two independent directions
    if (cloud_.size() < 4) throw NoSurfaceError("no surface: fewer than 4 input points");
    {
      const Aabb box = bounding_box(cloud_.points);
      const Point3 c = 0.5 * (box.min + box.max);
      Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
      for (const Point3& p : cloud_.points) cov += (p - c) * (p - c).transpose();
      const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(cov);
      if (!(es.eigenvalues()(1) > 1e-12 * es.eigenvalues()(2))) throw NoSurfaceError("no surface: input points are collinear");
    }
    index_ = std::make_unique<KdTree>(cloud_.points);
    JetParams jet{config_.jet_degree, config_.jet_neighbors};
    if (!cloud_.has_normals()) {
      cloud_.normals = estimate_normals(*index_, jet);
      normals_estimated_ = true;
      log_info("normals estimated by jet fitting");
    }
    eps_ = epsilon_threshold(*index_, config_.k);
    sphere_ = loose_bounding_sphere(cloud_.points);
    LfsOptions opt;
    opt.jet = jet;
    opt.cone = {config_.apex_deg, config_.rays, config_.cone_hits, mix_seed(config_.seed, 0xc0de)};
    opt.use_curvature = config_.use_curvature;
    opt.use_diameter = config_.use_diameter;
    raw_ = estimate_lfs(*index_, cloud_.normals, eps_, sphere_, opt);
    lfs_ = raw_.field;
    if (config_.smooth) {
      lfs_ = median_filter(lfs_, *index_, config_.median_k);
      lfs_ = laplacian_smooth(lfs_, *index_, config_.laplacian_k, config_.laplacian_iterations,
                              config_.laplacian_weight);
    }
    reach_ = lfsr::reach(lfs_);
    if (!(reach_.value > 0.0)) throw DegenerateInputError("estimated reach is not positive");
    sizing_ = make_sizing(config_.size_max);
    log_info("eps ", eps_, ", reach ", reach_.value, ", sizing [", sizing_.size_min, ", ", sizing_.size_max, "]");
  });
  stage_done_ = 1;
}

void Pipeline::run_domain() {
  if (stage_done_ < 1) run_lfs();
  stage("multidomain", [&] {
    EnvelopeParams env{config_.envelope_k, config_.envelope_h};
    if (env.h <= 0.0) env.h = default_bandwidth(*index_, env.k);
    RefinementCriteria crit;
    crit.radius_edge_bound = config_.radius_edge;
    crit.envelope_cell_size = reach_.value;
    crit.shell_cell_size = config_.shell_cell_size;
    crit.sphere_facet_size = config_.sphere_facet_size;
    crit.vertex_budget = config_.tet_budget;
    crit.min_component_samples = config_.envelope_min_samples;
    if (config_.envelope_cell_ratio > 0.0) {
      const double ratio = config_.envelope_cell_ratio * config_.size_min_ratio;
      const double grading = config_.envelope_grading;
      crit.envelope_size_field = [this, ratio, grading](const Point3& x) {
        const Neighbor nn = index_->nearest(x);
        return ratio * lfs_.values[static_cast<std::size_t>(nn.id)] + grading * nn.dist();
      };
    }
    domain_ = std::make_unique<MultiDomain>(
        refine_multidomain(*index_, cloud_.normals, env, sphere_, reach_, std::move(crit)));
    const auto& st = domain_->stats;
    log_info("multi-domain: ", domain_->tri.number_of_vertices(), " vertices, ", st.envelope_cells,
             " envelope cells, ", st.shell_cells, " shell cells");
    SignGuessOptions opt;
    opt.rule = config_.side_test ? SignGuessRule::sublevel_with_side : SignGuessRule::sublevel;
    opt.envelope = env;
    opt.side_votes = config_.side_votes;
    guesses_ = guess_edge_signs(*domain_, *index_, cloud_.normals, opt);
  });
  stage_done_ = 2;
}

void Pipeline::run_solve() {
  if (stage_done_ < 2) run_domain();
  stage("solve", [&] {
    const KktSystem sys = assemble_kkt(domain_->tri, guesses_, cloud_.points, config_.lambda);
    field_ = solve_signed_field(sys, config_.solver_tol, config_.solver_max_iter);
    signed_ = std::make_unique<SignedRobustDistance>(domain_->tri, field_.values, *index_, config_.k);
    log_info("signed field: ", field_.iterations, " iterations, residual ", field_.residual);
  });
  stage_done_ = 3;
}

void Pipeline::run_mesh() {
  if (stage_done_ < 3) run_solve();
  stage("mesh", [&] {
    const SignedRobustDistance& sd = *signed_;
    const std::function<double(const Point3&)> f = [&sd](const Point3& x) {
      const double v = sd.interpolate(x);
      return (v < 0.0 ? -1.0 : 1.0) * sd.distance(x);
    };
    const std::function<double(const Point3&)> size = [this](const Point3& x) { return sizing_(x); };
    // chords along the normals through a strided subset of the samples
    std::vector<Chord> chords;
    const std::size_t n = cloud_.size();
    const std::size_t stride = std::max<std::size_t>(1, n / static_cast<std::size_t>(std::max(1, config_.seed_points)));
    const double half = 0.5 * reach_.value;
    for (std::size_t i = 0; i < n; i += stride) {
      const Point3& p = cloud_.points[i];
      const Vector3& nv = cloud_.normals[i];
      chords.push_back({p - half * nv, p + half * nv});
    }
    MeshingCriteria crit;
    crit.min_facet_angle_deg = config_.min_facet_angle;
    crit.distance_ratio = config_.distance_ratio;
    crit.distance_floor_ratio = config_.distance_floor_ratio;
    crit.bisection_ratio = config_.bisection_ratio;
    crit.vertex_budget = config_.surface_budget;
    crit.max_probe_chords = config_.probe_chords;
    crit.seed = config_.seed;
    mesh_ = extract_surface(f, sphere_, size, sizing_.size_min, chords, crit);
  });
  stage_done_ = 4;
}

void Pipeline::run_all() { run_mesh(); }

double Pipeline::kkt_constraint_residual() const {
  return std::abs(field_.values.sum() - static_cast<double>(field_.values.size()));
}

double Pipeline::global_error_bound() const {
  if (mesh_.facets.empty()) return 0.0;
  const auto areas = facet_areas(mesh_.as_triangle_mesh());
  std::size_t smallest = 0;
  for (std::size_t f = 1; f < areas.size(); ++f)
    if (areas[f] < areas[smallest]) smallest = f;
  return lfsr::global_error_bound(mesh_.facets[smallest].ball.radius, reach_.value);
}

EvalReport Pipeline::evaluate_mesh(const std::optional<PrimitiveSpec>& truth, const std::vector<bool>* outlier) const {
  const TriangleMesh tm = mesh_.as_triangle_mesh();
  EvalReport r = evaluate(tm, cloud_.points);
  if (truth) {
    std::vector<double> radii;
    for (const auto& d : mesh_.facets) radii.push_back(d.ball.radius);
    const SignedRobustDistance& sd = *signed_;
    const auto f = [&sd](const Point3& x) { return sd.interpolate(x) < 0.0 ? -1.0 : 1.0; };
    ErrorAudit level = audit_error_bound(
        tm, radii, facet_error_to_level_set(tm, f, sizing_.size_max, config_.bisection_ratio * sizing_.size_min),
        truth_surface(*truth), reach_.value);
    level.measure = "implicit_zero_set";
    r.audits.push_back(std::move(level));
    std::vector<Point3> clean;
    for (std::size_t i = 0; i < cloud_.size(); ++i)
      if (!outlier || !(*outlier)[i]) clean.push_back(cloud_.points[i]);
    ErrorAudit pts = audit_error_bound(tm, radii, facet_error_to_points(tm, clean), truth_surface(*truth), reach_.value);
    pts.measure = "input_points";
    r.audits.push_back(std::move(pts));
  }
  return r;
}

nlohmann::ordered_json Pipeline::report(const EvalReport& eval) const {
  nlohmann::ordered_json j;
  j["config"] = config_.to_json();
  // results do not depend on it, and reports must not either
  j["config"].erase("threads");
  j["input"] = {{"points", cloud_.size()}, {"normals_estimated", normals_estimated_}};
  j["epsilon"] = eps_;
  j["bounding_sphere"] = {{"center", {sphere_.center.x(), sphere_.center.y(), sphere_.center.z()}},
                          {"radius", sphere_.radius}};
  if (stage_done_ >= 1) {
    std::size_t counts[3] = {0, 0, 0};
    for (LfsSource s : lfs_.provenance) ++counts[static_cast<int>(s)];
    j["lfs"] = {{"min", lfs_.min()},
                {"max", lfs_.max()},
                {"mean", lfs_.mean()},
                {"smoothed", config_.smooth},
                {"curvature_points", counts[0]},
                {"diameter_points", counts[1]},
                {"fallback_points", counts[2]}};
    j["reach"] = reach_.value;
    j["sizing"] = {{"size_min", sizing_.size_min}, {"size_max", sizing_.size_max}};
  }
  if (stage_done_ >= 2) {
    const auto& st = domain_->stats;
    std::size_t negative = 0;
    for (const auto& g : guesses_) negative += g.sign < 0;
    j["multidomain"] = {{"vertices", domain_->tri.number_of_vertices()},
                        {"envelope_cells", st.envelope_cells},
                        {"shell_cells", st.shell_cells},
                        {"outside_cells", st.outside_cells},
                        {"edges", guesses_.size()},
                        {"negative_edges", negative}};
  }
  if (stage_done_ >= 3)
    j["solver"] = {{"iterations", field_.iterations},
                   {"residual", field_.residual},
                   {"lagrange", field_.lagrange},
                   {"constraint_residual", kkt_constraint_residual()}};
  if (stage_done_ >= 4) {
    const auto& s = mesh_.stats;
    j["mesher"] = {{"seeds", s.seeds},
                   {"probe_chords", s.probe_chords},
                   {"insertions", s.insertions},
                   {"manifold_repairs", s.manifold_repairs},
                   {"bad_facets_left", s.bad_facets_left},
                   {"manifold", s.manifold}};
    j["global_error_bound"] = {{"reach", reach_.value}, {"value", global_error_bound()}};
    j["evaluation"] = to_json(eval);
  }
  return j;
}

std::vector<std::size_t> facet_count_vs_sizemax(Pipeline& pipeline, const std::vector<double>& size_max_list) {
  std::vector<std::size_t> counts;
  for (double s : size_max_list) {
    pipeline.set_size_max(s);
    pipeline.run_mesh();
    counts.push_back(pipeline.mesh().triangles.size());
  }
  return counts;
}

LfsError lfs_error(const ScalarField& field, std::span<const Point3> points, const PrimitiveSpec& truth,
                   const std::vector<bool>* outlier) {
  LfsError e;
  double sum = 0.0;
  for (std::size_t i = 0; i < field.size(); ++i) {
    if (outlier && (*outlier)[i]) continue;
    const auto gt = ground_truth_lfs(truth, points[i]);
    if (!gt || !std::isfinite(*gt)) continue;
    const double d = std::abs(field.values[i] - *gt);
    sum += d;
    e.max = std::max(e.max, d);
    ++e.count;
  }
  if (e.count > 0) e.mean = sum / static_cast<double>(e.count);
  return e;
}

}  // namespace lfsr
