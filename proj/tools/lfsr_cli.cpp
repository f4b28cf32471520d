#include "lfsr/io.hpp"
#include "lfsr/log.hpp"
#include "lfsr/parallel.hpp"
#include "lfsr/pipeline.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

using namespace lfsr;

namespace {

enum Exit { ok = 0, input_error = 2, stage_failure = 3, validity_failure = 4 };

struct Options {
  std::string config_path;
  std::vector<std::string> overrides;
  RunConfig flags;
  bool no_smooth = false;
  std::string log_level = "warn";
  std::string primitive;
  std::string mesh_path;
  std::string points_path;
};

// flags registered on a subcommand that map onto RunConfig keys
struct Bound {
  CLI::Option* option;
  std::string key;
};

template <class T>
void bind_flag(CLI::App* app, std::vector<Bound>& bound, const std::string& flag, const std::string& key, T& target,
          const std::string& help) {
  bound.push_back({app->add_option(flag, target, help), key});
}

std::vector<Bound> add_run_flags(CLI::App* app, Options& o) {
  std::vector<Bound> b;
  RunConfig& f = o.flags;
  bind_flag(app, b, "--output,-o", "output", f.output, "output file");
  bind_flag(app, b, "--report", "report", f.report, "JSON report path");
  bind_flag(app, b, "--truth", "truth", f.truth, "primitive description used for ground-truth audits");
  bind_flag(app, b, "--k", "k", f.k, "neighbors of the robust distance");
  bind_flag(app, b, "--apex-deg", "apex_deg", f.apex_deg, "cone apex angle in degrees");
  bind_flag(app, b, "--rays", "rays", f.rays, "rays per cone");
  bind_flag(app, b, "--lambda", "lambda", f.lambda, "data-fitting weight");
  bind_flag(app, b, "--radius-edge", "radius_edge", f.radius_edge, "radius-edge bound of the tetrahedra");
  bind_flag(app, b, "--min-facet-angle", "min_facet_angle", f.min_facet_angle, "minimum facet angle in degrees");
  bind_flag(app, b, "--size-max", "size_max", f.size_max, "maximal facet size");
  bind_flag(app, b, "--size-min-ratio", "size_min_ratio", f.size_min_ratio, "size_min as a fraction of the reach");
  bind_flag(app, b, "--seed", "seed", f.seed, "random seed");
  bind_flag(app, b, "--threads", "threads", f.threads, "worker threads, 0 for all cores");
  app->add_option("--config,-c", o.config_path, "key = value config file");
  app->add_option("--set", o.overrides, "extra key=value config overrides");
  return b;
}

RunConfig resolve(const Options& o, const std::vector<Bound>& bound, const std::string& input) {
  RunConfig c = o.config_path.empty() ? RunConfig{} : load_config(o.config_path);
  const auto flag_items = o.flags.items();
  for (const Bound& b : bound) {
    if (b.option->count() == 0) continue;
    for (const auto& [k, v] : flag_items)
      if (k == b.key) c.set(k, v);
  }
  for (const std::string& kv : o.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw InputError("--set expects key=value, got '" + kv + "'");
    c.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (!input.empty()) c.input = input;
  if (c.input.empty()) throw InputError("no input file given");
  return c;
}

void apply_log_level(const std::string& s) {
  if (s == "debug") set_log_level(LogLevel::debug);
  else if (s == "info") set_log_level(LogLevel::info);
  else if (s == "warn") set_log_level(LogLevel::warn);
  else if (s == "error") set_log_level(LogLevel::error);
  else if (s == "quiet") set_log_level(LogLevel::quiet);
  else throw InputError("unknown log level '" + s + "'");
}

void write_json(const std::string& path, const nlohmann::ordered_json& j) {
  if (path.empty()) {
    std::cout << j.dump(2) << '\n';
    return;
  }
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path + "'");
  out << j.dump(2) << '\n';
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

int cmd_lfs(RunConfig config) {
  set_thread_count(config.threads);
  Pipeline p(load_point_cloud(config.input), config);
  p.run_lfs();
  nlohmann::ordered_json j = p.report(EvalReport{});
  if (!config.truth.empty()) {
    const PrimitiveSpec spec = parse_primitive(config.truth);
    const LfsError e = lfs_error(p.lfs(), p.cloud().points, spec);
    const LfsError raw = lfs_error(p.raw_lfs().field, p.cloud().points, spec);
    j["lfs_error"] = {{"mean", e.mean}, {"max", e.max}, {"points", e.count},
                      {"raw_mean", raw.mean}, {"raw_max", raw.max}};
  }
  if (!config.output.empty()) {
    std::ofstream out(config.output, std::ios::binary);
    if (!out) throw InputError("cannot write '" + config.output + "'");
    if (ends_with(config.output, ".ply")) write_field_ply(out, p.cloud().points, p.lfs());
    else write_field_csv(out, p.lfs());
  }
  write_json(config.report, j);
  return ok;
}

int cmd_reconstruct(RunConfig config) {
  set_thread_count(config.threads);
  Pipeline p(load_point_cloud(config.input), config);
  p.run_all();
  std::optional<PrimitiveSpec> truth;
  if (!config.truth.empty()) truth = parse_primitive(config.truth);
  const EvalReport eval = p.evaluate_mesh(truth);
  if (!config.output.empty()) {
    const TriangleMesh mesh = p.mesh().as_triangle_mesh();
    if (ends_with(config.output, ".ply")) {
      std::ofstream out(config.output, std::ios::binary);
      if (!out) throw InputError("cannot write '" + config.output + "'");
      write_ply_mesh(out, mesh, config.binary_output);
    } else {
      save_mesh(config.output, mesh);
    }
    std::ofstream csv(config.output + ".facets.csv");
    write_facet_csv(csv, p.mesh());
  }
  write_json(config.report, p.report(eval));
  if (!eval.watertight || eval.self_intersections > 0) {
    std::cerr << "error: output mesh is " << (eval.watertight ? "" : "not watertight") <<
        (!eval.watertight && eval.self_intersections > 0 ? " and " : "")
              << (eval.self_intersections > 0 ? "self-intersecting" : "") << '\n';
    return validity_failure;
  }
  return ok;
}

int cmd_eval(const Options& o, int threads) {
  set_thread_count(threads);
  const TriangleMesh mesh = load_mesh(o.mesh_path);
  const PointCloud pts = load_point_cloud(o.points_path);
  EvalReport r = evaluate(mesh, pts.points);
  if (!o.flags.truth.empty()) {
    // without surface Delaunay balls the facet circumradius stands in for R
    std::vector<double> radii;
    for (const auto& t : mesh.triangles)
      radii.push_back((triangle_circumcenter(mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]) -
                       mesh.vertices[t[0]]).norm());
    const PrimitiveSpec spec = parse_primitive(o.flags.truth);
    double reach = 0.0;
    for (const Point3& p : pts.points)
      if (auto v = ground_truth_lfs(spec, p)) reach = reach == 0.0 ? *v : std::min(reach, *v);
    r.audits.push_back(audit_error_bound(mesh, radii, facet_error_to_points(mesh, pts.points), truth_surface(spec),
                                         reach > 0.0 ? reach : 1.0));
    r.audits.back().measure = "input_points";
  }
  write_json(o.flags.report, to_json(r));
  return ok;
}

int cmd_sample(const Options& o, std::uint64_t seed) {
  const PrimitiveSpec spec = parse_primitive(o.primitive);
  const PointCloud cloud = sample(spec, seed);
  if (o.flags.output.empty()) write_xyz(std::cout, cloud);
  else save_point_cloud(o.flags.output, cloud);
  return ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LFS-aware isotropic surface reconstruction from unoriented point clouds"};
  app.require_subcommand(1);
  Options o;
  std::string input;
  app.add_option("--log-level", o.log_level, "debug, info, warn, error or quiet");

  CLI::App* lfs = app.add_subcommand("lfs", "estimate the local feature size of a point cloud");
  lfs->add_option("--input,-i", input, "input point cloud (.xyz, .ply)")->required();
  lfs->add_flag("--no-smooth", o.no_smooth, "export the raw field");
  const auto lfs_flags = add_run_flags(lfs, o);

  CLI::App* rec = app.add_subcommand("reconstruct", "reconstruct a surface mesh");
  rec->add_option("--input,-i", input, "input point cloud (.xyz, .ply)")->required();
  const auto rec_flags = add_run_flags(rec, o);

  CLI::App* ev = app.add_subcommand("eval", "evaluate a mesh against points");
  ev->add_option("--mesh,-m", o.mesh_path, "mesh (.obj, .ply)")->required();
  ev->add_option("--points,-p", o.points_path, "reference points")->required();
  ev->add_option("--truth", o.flags.truth, "primitive description for the error-bound audit");
  ev->add_option("--report", o.flags.report, "JSON report path");
  ev->add_option("--threads", o.flags.threads, "worker threads");

  CLI::App* smp = app.add_subcommand("sample", "sample an analytic primitive");
  smp->add_option("--primitive", o.primitive, "e.g. \"kind=capsule count=2610 noise=0.005\"")->required();
  smp->add_option("--output,-o", o.flags.output, "output point cloud");
  smp->add_option("--seed", o.flags.seed, "random seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? ok : input_error;
  }

  try {
    apply_log_level(o.log_level);
    if (*lfs) {
      RunConfig c = resolve(o, lfs_flags, input);
      if (o.no_smooth) c.smooth = false;
      return cmd_lfs(c);
    }
    if (*rec) return cmd_reconstruct(resolve(o, rec_flags, input));
    if (*ev) return cmd_eval(o, o.flags.threads);
    if (*smp) return cmd_sample(o, o.flags.seed);
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return input_error;
  } catch (const ValidityError& e) {
    std::cerr << "validity error: " << e.what() << '\n';
    return validity_failure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return stage_failure;
  }
  return ok;
}
