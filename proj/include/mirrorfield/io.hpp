// mirrorfield: planar-mirror light field camera toolkit
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "mirrorfield/calibrate.hpp"
#include "mirrorfield/decode.hpp"
#include "mirrorfield/design.hpp"
#include "mirrorfield/features.hpp"
#include "mirrorfield/simulate.hpp"

#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace mirrorfield::io {

using nlohmann::json;

#ifndef MIRRORFIELD_VERSION
#define MIRRORFIELD_VERSION "0.0.0"
#endif

inline constexpr const char* kToolVersion = MIRRORFIELD_VERSION;
inline constexpr int kSchemaMajor = 1;
inline constexpr int kSchemaMinor = 0;

// ---------------------------------------------------------------------------
// Provenance and schema envelope
// ---------------------------------------------------------------------------

struct Provenance {
  std::uint64_t seed = 0;
  std::map<std::string, std::string> input_hashes;  // name -> fnv1a64 hex

  std::string summary() const {
    std::ostringstream os;
    os << "mirrorfield " << kToolVersion << " seed=" << seed;
    for (const auto& [k, v] : input_hashes) os << " " << k << "=" << v;
    return os.str();
  }
};

inline std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ValidationError("cannot open file: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

inline Provenance make_provenance(std::uint64_t seed,
                                  const std::vector<std::pair<std::string, std::string>>&
                                      named_input_paths = {}) {
  Provenance p;
  p.seed = seed;
  for (const auto& [name, path] : named_input_paths)
    p.input_hashes[name] = fnv1a64_hex(read_file(path));
  return p;
}

inline json provenance_json(const Provenance& p) {
  json j;
  j["tool_version"] = kToolVersion;
  j["seed"] = p.seed;
  j["inputs"] = p.input_hashes;
  return j;
}

inline json schema_json(const std::string& name) {
  return json{{"name", name}, {"major", kSchemaMajor}, {"minor", kSchemaMinor}};
}

inline void check_schema(const json& j, const std::string& expect_name) {
  if (!j.contains("schema"))
    throw ValidationError("file has no schema field (expected " + expect_name + ")");
  const auto& s = j.at("schema");
  const std::string name = s.at("name").get<std::string>();
  if (name != expect_name)
    throw ValidationError("schema name '" + name + "' != expected '" + expect_name + "'");
  const int major = s.at("major").get<int>();
  if (major > kSchemaMajor)
    throw ValidationError("schema '" + name + "' major version " + std::to_string(major) +
                          " is newer than supported " + std::to_string(kSchemaMajor));
}

inline void save_text(const std::string& path, const std::string& text) {
  std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ValidationError("cannot write file: " + path);
  f << text;
}

inline void save_json(const std::string& path, const json& j) {
  save_text(path, j.dump(2) + "\n");
}

inline json load_json(const std::string& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw ValidationError("malformed JSON in " + path + ": " + e.what());
  }
}

inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// JSON for geometry types
// ---------------------------------------------------------------------------

inline json vec_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }
inline json vec_json(const Vec2& v) { return json::array({v.x(), v.y()}); }

inline Vec3 vec3_from(const json& j) {
  if (!j.is_array() || j.size() != 3) throw ValidationError("expected 3-vector");
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

inline Vec2 vec2_from(const json& j) {
  if (!j.is_array() || j.size() != 2) throw ValidationError("expected 2-vector");
  return Vec2(j[0].get<double>(), j[1].get<double>());
}

inline json mat_json(const Mat3& m) {
  json j = json::array();
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) j.push_back(m(r, c));
  return j;
}

inline Mat3 mat3_from(const json& j) {
  if (!j.is_array() || j.size() != 9) throw ValidationError("expected row-major 3x3 matrix");
  Mat3 m;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) m(r, c) = j[static_cast<size_t>(3 * r + c)].get<double>();
  return m;
}

inline json intrinsics_json(const CameraIntrinsics& c) {
  return json{{"fx", c.fx}, {"fy", c.fy}, {"cx", c.cx}, {"cy", c.cy},
              {"k1", c.k1}, {"k2", c.k2}, {"width", c.width}, {"height", c.height}};
}

inline CameraIntrinsics intrinsics_from(const json& j) {
  CameraIntrinsics c;
  c.fx = j.at("fx").get<double>();
  c.fy = j.at("fy").get<double>();
  c.cx = j.at("cx").get<double>();
  c.cy = j.at("cy").get<double>();
  c.k1 = j.at("k1").get<double>();
  c.k2 = j.at("k2").get<double>();
  c.width = j.at("width").get<int>();
  c.height = j.at("height").get<int>();
  c.validate();
  return c;
}

inline json pose_json(const Pose& p) {
  return json{{"rotation", mat_json(p.rotation)}, {"center", vec_json(p.center)}};
}

inline Pose pose_from(const json& j) {
  Pose p;
  p.rotation = mat3_from(j.at("rotation"));
  p.center = vec3_from(j.at("center"));
  p.validate();
  return p;
}

inline json mirror_json(const MirrorPlane& m) {
  json ext = json::array();
  for (const Vec2& v : m.extent) ext.push_back(vec_json(v));
  return json{{"normal", vec_json(m.normal)},
              {"offset", m.offset},
              {"frame_origin", vec_json(m.frame_origin)},
              {"frame_e1", vec_json(m.frame_e1)},
              {"frame_e2", vec_json(m.frame_e2)},
              {"extent", ext}};
}

inline MirrorPlane mirror_from(const json& j) {
  MirrorPlane m;
  m.normal = vec3_from(j.at("normal"));
  m.offset = j.at("offset").get<double>();
  m.frame_origin = vec3_from(j.at("frame_origin"));
  m.frame_e1 = vec3_from(j.at("frame_e1"));
  m.frame_e2 = vec3_from(j.at("frame_e2"));
  for (const auto& v : j.at("extent")) m.extent.push_back(vec2_from(v));
  m.validate();
  return m;
}

// ---------------------------------------------------------------------------
// Design files
// ---------------------------------------------------------------------------

inline json design_spec_json(const design::DesignSpec& s) {
  return json{{"rows", s.rows},
              {"cols", s.cols},
              {"scale", s.scale},
              {"focal_hint", s.focal_hint},
              {"eval_depths", s.eval_depths},
              {"alpha", s.alpha},
              {"min_gap", s.min_gap},
              {"camera", intrinsics_json(s.camera)},
              {"camera_pose", pose_json(s.camera_pose)}};
}

inline design::DesignSpec design_spec_from(const json& j) {
  design::DesignSpec s;
  s.rows = j.at("rows").get<int>();
  s.cols = j.at("cols").get<int>();
  s.scale = j.at("scale").get<double>();
  s.focal_hint = j.at("focal_hint").get<double>();
  s.eval_depths = j.at("eval_depths").get<std::vector<double>>();
  s.alpha = j.at("alpha").get<double>();
  s.min_gap = j.at("min_gap").get<double>();
  s.camera = intrinsics_from(j.at("camera"));
  s.camera_pose = pose_from(j.at("camera_pose"));
  s.validate();
  return s;
}

inline json design_report_json(const design::DesignReport& r) {
  json overlap = json::array();
  for (const auto& d : r.overlap_area_per_depth)
    overlap.push_back(json{{"depth", d.depth}, {"area", d.area}});
  json centers = json::array();
  for (const auto& c : r.virtual_centers) centers.push_back(vec_json(c));
  json violations = json::array();
  for (const auto& v : r.constraint_violations) {
    const char* kind = v.kind == design::ConstraintViolation::Kind::Occlusion ? "occlusion"
                       : v.kind == design::ConstraintViolation::Kind::Spacing ? "spacing"
                                                                              : "degenerate";
    violations.push_back(json{{"kind", kind},
                              {"mirror_a", v.mirror_a},
                              {"mirror_b", v.mirror_b},
                              {"magnitude", v.magnitude}});
  }
  return json{{"cost_total", r.cost_total},
              {"cost_grid", r.cost_grid},
              {"cost_overlap", r.cost_overlap},
              {"overlap_per_depth", overlap},
              {"virtual_centers", centers},
              {"fitted_grid",
               json{{"origin", vec_json(r.fitted_grid.origin)},
                    {"x_step", vec_json(r.fitted_grid.x_step)},
                    {"y_step", vec_json(r.fitted_grid.y_step)},
                    {"error", r.fitted_grid.error}}},
              {"constraint_violations", violations}};
}

inline json design_state_json(const design::DesignState& st, const Provenance& prov,
                              const design::DesignReport* report = nullptr) {
  json mirrors = json::array();
  for (const auto& m : st.mirrors) mirrors.push_back(mirror_json(m));
  json j{{"schema", schema_json("design")},
         {"provenance", provenance_json(prov)},
         {"spec", design_spec_json(st.spec)},
         {"eval_origin", vec_json(st.eval_origin)},
         {"eval_axis", vec_json(st.eval_axis)},
         {"mirrors", mirrors}};
  if (report) j["report"] = design_report_json(*report);
  return j;
}

inline design::DesignState design_state_from(const json& j) {
  check_schema(j, "design");
  design::DesignState st;
  st.spec = design_spec_from(j.at("spec"));
  st.eval_origin = vec3_from(j.at("eval_origin"));
  st.eval_axis = vec3_from(j.at("eval_axis"));
  for (const auto& m : j.at("mirrors")) st.mirrors.push_back(mirror_from(m));
  st.validate();
  return st;
}

// ---------------------------------------------------------------------------
// Scene files
// ---------------------------------------------------------------------------

inline json scene_json(const sim::Scene& s, const Provenance& prov) {
  json boards = json::array();
  for (const auto& b : s.checkerboards)
    boards.push_back(json{{"pose", pose_json(b.pose)},
                          {"rows", b.rows},
                          {"cols", b.cols},
                          {"square_size", b.square_size}});
  json targets = json::array();
  for (const auto& t : s.point_targets)
    targets.push_back(json{{"position", vec_json(t.position)},
                           {"radius", t.radius},
                           {"intensity", t.intensity}});
  return json{{"schema", schema_json("scene")},
              {"provenance", provenance_json(prov)},
              {"checkerboards", boards},
              {"point_targets", targets},
              {"background_intensity", s.background_intensity}};
}

inline sim::Scene scene_from(const json& j) {
  check_schema(j, "scene");
  sim::Scene s;
  for (const auto& b : j.at("checkerboards")) {
    sim::Checkerboard board;
    board.pose = pose_from(b.at("pose"));
    board.rows = b.at("rows").get<int>();
    board.cols = b.at("cols").get<int>();
    board.square_size = b.at("square_size").get<double>();
    s.checkerboards.push_back(board);
  }
  for (const auto& t : j.at("point_targets")) {
    sim::PointTarget target;
    target.position = vec3_from(t.at("position"));
    target.radius = t.at("radius").get<double>();
    target.intensity = t.at("intensity").get<double>();
    s.point_targets.push_back(target);
  }
  s.background_intensity = j.at("background_intensity").get<double>();
  s.validate();
  return s;
}

// ---------------------------------------------------------------------------
// Sub-image map files
// ---------------------------------------------------------------------------

inline json submap_json(const sim::SubImageMap& m, const Provenance& prov) {
  json entries = json::array();
  for (const auto& e : m.entries) {
    json poly = json::array();
    for (const Vec2& p : e.polygon) poly.push_back(vec_json(p));
    entries.push_back(json{{"mirror_index", e.mirror_index}, {"polygon", poly}});
  }
  return json{{"schema", schema_json("submap")},
              {"provenance", provenance_json(prov)},
              {"entries", entries},
              {"excluded", m.excluded}};
}

inline sim::SubImageMap submap_from(const json& j) {
  check_schema(j, "submap");
  sim::SubImageMap m;
  for (const auto& e : j.at("entries")) {
    sim::SubImagePolygon p;
    p.mirror_index = e.at("mirror_index").get<int>();
    for (const auto& v : e.at("polygon")) p.polygon.push_back(vec2_from(v));
    m.entries.push_back(std::move(p));
  }
  if (j.contains("excluded")) m.excluded = j.at("excluded").get<std::vector<int>>();
  return m;
}

// ---------------------------------------------------------------------------
// Observation CSV
// ---------------------------------------------------------------------------

inline std::string observations_csv(const std::vector<sim::Observation>& obs,
                                    const Provenance& prov) {
  std::ostringstream os;
  os << "# " << prov.summary() << "\n";
  os << "mirror_index,board,row,col,px,py\n";
  for (const auto& o : obs)
    os << o.mirror_index << "," << o.board << "," << o.row << "," << o.col << ","
       << fmt17(o.pixel.x()) << "," << fmt17(o.pixel.y()) << "\n";
  return os.str();
}

inline std::vector<sim::Observation> observations_from_csv(const std::string& text) {
  std::vector<sim::Observation> out;
  std::istringstream is(text);
  std::string line;
  bool header_seen = false;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      header_seen = true;  // column header
      continue;
    }
    std::istringstream ls(line);
    std::string tok;
    std::vector<std::string> cells;
    while (std::getline(ls, tok, ',')) cells.push_back(tok);
    if (cells.size() != 6) throw ValidationError("observations csv: expected 6 columns");
    sim::Observation o;
    o.mirror_index = std::stoi(cells[0]);
    o.board = std::stoi(cells[1]);
    o.row = std::stoi(cells[2]);
    o.col = std::stoi(cells[3]);
    o.pixel = Vec2(std::stod(cells[4]), std::stod(cells[5]));
    out.push_back(o);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Calibration files
// ---------------------------------------------------------------------------

inline json calibration_json(const calib::CalibrationResult& r,
                             const calib::CalibrationProblem& problem,
                             const Provenance& prov) {
  json mirrors = json::array();
  for (const auto& m : r.mirrors) mirrors.push_back(mirror_json(m));
  json deltas = json::array();
  for (size_t i = 0; i < r.mirrors.size(); ++i) {
    const auto& before = problem.initial_mirrors[i];
    const auto& after = r.mirrors[i];
    const double tilt = std::acos(std::clamp(before.normal.dot(after.normal), -1.0, 1.0));
    deltas.push_back(json{{"mirror", i},
                          {"tilt_rad", tilt},
                          {"offset_m", after.offset - before.offset}});
  }
  return json{{"schema", schema_json("calibration")},
              {"provenance", provenance_json(prov)},
              {"intrinsics", intrinsics_json(problem.intrinsics)},
              {"camera_pose", pose_json(problem.camera_pose)},
              {"rows", problem.rows},
              {"cols", problem.cols},
              {"mirrors", mirrors},
              {"rms_px", r.rms_px},
              {"rms_spatial_mm", r.rms_spatial_mm},
              {"reference_rig_spatial_rms_mm", 1.80},
              {"iterations", r.iterations},
              {"converged", r.converged},
              {"capped_residuals", r.capped_residuals},
              {"covariance_diag", r.covariance_diag},
              {"per_mirror_deltas", deltas}};
}

struct CalibrationFile {
  CameraIntrinsics intrinsics;
  Pose camera_pose;
  int rows = 0, cols = 0;
  std::vector<MirrorPlane> mirrors;
  double rms_px = 0.0;
  double rms_spatial_mm = 0.0;
  bool converged = false;
};

inline CalibrationFile calibration_from(const json& j) {
  check_schema(j, "calibration");
  CalibrationFile f;
  f.intrinsics = intrinsics_from(j.at("intrinsics"));
  f.camera_pose = pose_from(j.at("camera_pose"));
  f.rows = j.at("rows").get<int>();
  f.cols = j.at("cols").get<int>();
  for (const auto& m : j.at("mirrors")) f.mirrors.push_back(mirror_from(m));
  f.rms_px = j.at("rms_px").get<double>();
  f.rms_spatial_mm = j.at("rms_spatial_mm").get<double>();
  f.converged = j.at("converged").get<bool>();
  return f;
}

// ---------------------------------------------------------------------------
// Light field directory
// ---------------------------------------------------------------------------

inline json grid_model_json(const RectifiedGridModel& m) {
  json views = json::array();
  for (const auto& v : m.views)
    views.push_back(json{{"s", v.s},
                         {"t", v.t},
                         {"center", vec_json(v.center)},
                         {"residual", vec_json(v.residual)},
                         {"rotation_to_target", mat_json(v.rotation_to_target)}});
  return json{{"grid_rows", m.grid_rows},
              {"grid_cols", m.grid_cols},
              {"views", views},
              {"origin", vec_json(m.origin)},
              {"x_step", vec_json(m.x_step)},
              {"y_step", vec_json(m.y_step)},
              {"target_rotation", mat_json(m.target_rotation)},
              {"target_intrinsics", intrinsics_json(m.target_intrinsics)},
              {"flip_axis", std::string(1, m.flip_axis)}};
}

inline RectifiedGridModel grid_model_from(const json& j) {
  RectifiedGridModel m;
  m.grid_rows = j.at("grid_rows").get<int>();
  m.grid_cols = j.at("grid_cols").get<int>();
  for (const auto& v : j.at("views")) {
    GridView gv;
    gv.s = v.at("s").get<int>();
    gv.t = v.at("t").get<int>();
    gv.center = vec3_from(v.at("center"));
    gv.residual = vec3_from(v.at("residual"));
    gv.rotation_to_target = mat3_from(v.at("rotation_to_target"));
    m.views.push_back(gv);
  }
  m.origin = vec3_from(j.at("origin"));
  m.x_step = vec3_from(j.at("x_step"));
  m.y_step = vec3_from(j.at("y_step"));
  m.target_rotation = mat3_from(j.at("target_rotation"));
  m.target_intrinsics = intrinsics_from(j.at("target_intrinsics"));
  m.flip_axis = j.at("flip_axis").get<std::string>().at(0);
  return m;
}

inline void save_lightfield(const lf::LightField4D& field, const std::string& dir,
                            const Provenance& prov) {
  std::filesystem::create_directories(dir);
  for (int t = 0; t < field.t_count; ++t) {
    for (int s = 0; s < field.s_count; ++s) {
      const auto& view = field.view(s, t);
      const std::string stem = std::to_string(s) + "_" + std::to_string(t);
      pgm_save(view.image, dir + "/view_" + stem + ".pgm", prov.summary());
      pgm_save(mask_to_image(view.mask), dir + "/mask_" + stem + ".pgm", prov.summary());
    }
  }
  json j{{"schema", schema_json("lightfield")},
         {"provenance", provenance_json(prov)},
         {"dims", json{{"s", field.s_count},
                       {"t", field.t_count},
                       {"u", field.u_count},
                       {"v", field.v_count}}},
         {"grid", grid_model_json(field.model)},
         {"source", field.source_id}};
  save_json(dir + "/lf.json", j);
}

inline lf::LightField4D load_lightfield(const std::string& dir) {
  const json j = load_json(dir + "/lf.json");
  check_schema(j, "lightfield");
  lf::LightField4D field;
  field.s_count = j.at("dims").at("s").get<int>();
  field.t_count = j.at("dims").at("t").get<int>();
  field.u_count = j.at("dims").at("u").get<int>();
  field.v_count = j.at("dims").at("v").get<int>();
  field.model = grid_model_from(j.at("grid"));
  field.source_id = j.at("source").get<std::string>();
  field.views.reserve(static_cast<size_t>(field.s_count) * field.t_count);
  for (int t = 0; t < field.t_count; ++t) {
    for (int s = 0; s < field.s_count; ++s) {
      const std::string stem = std::to_string(s) + "_" + std::to_string(t);
      MaskedImage view;
      view.image = pgm_load(dir + "/view_" + stem + ".pgm");
      view.mask = image_to_mask(pgm_load(dir + "/mask_" + stem + ".pgm"));
      if (view.image.width != field.u_count || view.image.height != field.v_count)
        throw ValidationError("lightfield: view size mismatch in " + dir);
      field.views.push_back(std::move(view));
    }
  }
  return field;
}

// ---------------------------------------------------------------------------
// Feature CSV
// ---------------------------------------------------------------------------

inline std::string features_csv(const std::vector<feat::FilteredFeature>& feats,
                                const Provenance& prov) {
  std::ostringstream os;
  os << "# " << prov.summary() << "\n";
  os << "u,v,slope,support,residual_rms_px\n";
  for (const auto& f : feats)
    os << fmt17(f.feature.central_px.x()) << "," << fmt17(f.feature.central_px.y()) << ","
       << fmt17(f.feature.slope) << "," << f.feature.support_count << ","
       << fmt17(f.feature.residual_rms_px) << "\n";
  return os.str();
}

// ---------------------------------------------------------------------------
// Optimizer trace CSV
// ---------------------------------------------------------------------------

/// When alpha == 1 the overlap term does not participate in the cost and its
/// column is omitted from the trace.
inline std::string trace_csv(const std::vector<design::TraceEntry>& trace, double alpha,
                             const std::string& method, const Provenance& prov) {
  std::ostringstream os;
  os << "# " << prov.summary() << "\n";
  os << "# method: " << method << "\n";
  const bool with_overlap = alpha < 1.0;
  os << "round,evaluation,penalized,cost_total,cost_grid";
  if (with_overlap) os << ",cost_overlap";
  os << ",max_violation\n";
  for (const auto& e : trace) {
    os << e.round << "," << e.evaluation << "," << fmt17(e.penalized) << ","
       << fmt17(e.cost_total) << "," << fmt17(e.cost_grid);
    if (with_overlap) os << "," << fmt17(e.cost_overlap);
    os << "," << fmt17(e.max_violation) << "\n";
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// OBJ export of the mirror quads
// ---------------------------------------------------------------------------

inline std::string obj_from_quads(const std::vector<ConvexPolygon3D>& quads,
                                  const Provenance& prov) {
  std::ostringstream os;
  os << "# " << prov.summary() << "\n";
  int base = 1;
  for (const auto& q : quads) {
    for (const Vec3& v : q.vertices)
      os << "v " << fmt17(v.x()) << " " << fmt17(v.y()) << " " << fmt17(v.z()) << "\n";
    os << "f";
    for (size_t i = 0; i < q.vertices.size(); ++i) os << " " << base + static_cast<int>(i);
    os << "\n";
    base += static_cast<int>(q.vertices.size());
  }
  return os.str();
}

inline std::string export_obj(const design::DesignState& state, const Provenance& prov) {
  std::vector<ConvexPolygon3D> quads;
  quads.reserve(state.mirrors.size());
  for (const auto& m : state.mirrors) {
    ConvexPolygon3D q;
    q.vertices = m.extent_world();
    quads.push_back(std::move(q));
  }
  return obj_from_quads(quads, prov);
}

inline std::vector<ConvexPolygon3D> import_obj(const std::string& text) {
  std::vector<Vec3> verts;
  std::vector<ConvexPolygon3D> quads;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string kind;
    ls >> kind;
    if (kind == "v") {
      double x, y, z;
      ls >> x >> y >> z;
      if (!ls) throw ValidationError("obj: malformed vertex line");
      verts.emplace_back(x, y, z);
    } else if (kind == "f") {
      ConvexPolygon3D poly;
      std::string tok;
      while (ls >> tok) {
        // accept "i", "i/..", "i//.." index forms
        const int idx = std::stoi(tok.substr(0, tok.find('/')));
        if (idx < 1 || idx > static_cast<int>(verts.size()))
          throw ValidationError("obj: face references unknown vertex");
        poly.vertices.push_back(verts[static_cast<size_t>(idx - 1)]);
      }
      if (poly.vertices.size() < 3) throw ValidationError("obj: face with <3 vertices");
      quads.push_back(std::move(poly));
    }
  }
  return quads;
}

}  // namespace mirrorfield::io
