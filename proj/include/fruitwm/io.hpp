#pragma once

// JSON file formats: sequence files (simulator output / tracker input),
// tracks files (tracker output), evaluation reports, and run configs.
// Every document carries "version": 1.

#include "fruitwm/metrics.hpp"
#include "fruitwm/pipeline.hpp"
#include "fruitwm/simulator.hpp"

#include <json.hpp>

#include <fstream>
#include <iomanip>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

namespace fruitwm {

using json = nlohmann::json;

inline constexpr int kFormatVersion = 1;

/// Invalid configuration (unknown key, wrong type, out-of-range value).
struct ConfigError : std::runtime_error
{
  using std::runtime_error::runtime_error;
};

/// Unreadable or malformed input file.
struct ParseError : std::runtime_error
{
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Field tables shared by readers and writers
// ---------------------------------------------------------------------------

template <class Self, class V>
void visit_fields(Self& c, V&& v)
  requires std::is_same_v<std::remove_const_t<Self>, Intrinsics>
{
  v("fx", c.fx);
  v("fy", c.fy);
  v("cx", c.cx);
  v("cy", c.cy);
  v("width", c.width);
  v("height", c.height);
}

template <class Self, class V>
void visit_fields(Self& c, V&& v)
  requires std::is_same_v<std::remove_const_t<Self>, WorkspaceLimits>
{
  v("x_min", c.x_min);
  v("x_max", c.x_max);
  v("y_min", c.y_min);
  v("z_min", c.z_min);
}

template <class Self, class V>
void visit_fields(Self& c, V&& v)
  requires std::is_same_v<std::remove_const_t<Self>, PerceptionConfig>
{
  v("confidence_threshold", c.confidence_threshold);
  v("radius_min", c.radius_min);
  v("radius_max", c.radius_max);
  v("max_center_offset", c.max_center_offset);
  v("measurement_sigma", c.measurement_sigma);
  v("workspace", c.workspace);
}

template <class Self, class V>
void visit_fields(Self& c, V&& v)
  requires std::is_same_v<std::remove_const_t<Self>, TrackerConfig>
{
  v("gate", c.gate);
  v("n_init", c.n_init);
  v("process_noise", c.process_noise);
  v("init_cov_scale", c.init_cov_scale);
}

template <class Self, class V>
void visit_fields(Self& c, V&& v)
  requires std::is_same_v<std::remove_const_t<Self>, ScenarioConfig>
{
  v("num_fruits", c.num_fruits);
  v("truss_sizes", c.truss_sizes);
  v("truss_size_min", c.truss_size_min);
  v("truss_size_max", c.truss_size_max);
  v("spacing_min", c.spacing_min);
  v("spacing_max", c.spacing_max);
  v("fruit_radius_min", c.fruit_radius_min);
  v("fruit_radius_max", c.fruit_radius_max);
  v("stem_x", c.stem_x);
  v("fruit_z_min", c.fruit_z_min);
  v("fruit_z_max", c.fruit_z_max);
  v("max_stem_offset", c.max_stem_offset);
  v("heights", c.heights);
  v("viewpoints_per_height", c.viewpoints_per_height);
  v("cylinder_radius", c.cylinder_radius);
  v("stem_depth", c.stem_depth);
  v("base_height", c.base_height);
  v("height_spacing", c.height_spacing);
  v("intrinsics", c.intrinsics);
  v("p_det_low", c.p_det_low);
  v("p_det_high", c.p_det_high);
  v("occlusion_radius_factor", c.occlusion_radius_factor);
  v("occlusion_factor", c.occlusion_factor);
  v("confidence_mean", c.confidence_mean);
  v("confidence_sd", c.confidence_sd);
  v("occluded_confidence_drop", c.occluded_confidence_drop);
  v("fp_rate", c.fp_rate);
  v("fp_outside_fraction", c.fp_outside_fraction);
  v("fp_confidence_mean", c.fp_confidence_mean);
  v("fp_confidence_sd", c.fp_confidence_sd);
  v("bbox_jitter_px", c.bbox_jitter_px);
  v("points_per_detection", c.points_per_detection);
  v("cap_half_angle_deg", c.cap_half_angle_deg);
  v("point_noise_low", c.point_noise_low);
  v("point_noise_high", c.point_noise_high);
  v("empty_mask_low", c.empty_mask_low);
  v("empty_mask_high", c.empty_mask_high);
}

template <class T>
concept FieldStruct = requires(T& t) { visit_fields(t, [](const char*, auto&) {}); };

template <FieldStruct T>
json fields_to_json(const T& c)
{
  json j = json::object();
  visit_fields(c, [&](const char* key, const auto& value) {
    if constexpr (FieldStruct<std::remove_cvref_t<decltype(value)>>)
      j[key] = fields_to_json(value);
    else
      j[key] = value;
  });
  return j;
}

/// Overlays the keys present in `j` onto `c`; unknown keys and type
/// mismatches throw ConfigError naming the dotted key path.
template <FieldStruct T>
void fields_from_json(const json& j, T& c, const std::string& path)
{
  if (!j.is_object())
    throw ConfigError("config key '" + path + "' must be an object");
  std::set<std::string> known;
  visit_fields(c, [&](const char* key, auto& value) {
    known.insert(key);
    const auto it = j.find(key);
    if (it == j.end())
      return;
    const std::string where = path.empty() ? key : path + "." + key;
    using V = std::remove_cvref_t<decltype(value)>;
    if constexpr (FieldStruct<V>) {
      fields_from_json(*it, value, where);
    } else if constexpr (std::is_same_v<V, int>) {
      if (!it->is_number_integer())
        throw ConfigError("config key '" + where + "' must be an integer");
      value = it->template get<int>();
    } else if constexpr (std::is_same_v<V, double>) {
      if (!it->is_number())
        throw ConfigError("config key '" + where + "' must be a number");
      value = it->template get<double>();
    } else {
      static_assert(std::is_same_v<V, std::vector<int>>);
      if (!it->is_array())
        throw ConfigError("config key '" + where + "' must be an array of integers");
      value.clear();
      for (const auto& e : *it) {
        if (!e.is_number_integer())
          throw ConfigError("config key '" + where + "' must be an array of integers");
        value.push_back(e.template get<int>());
      }
    }
  });
  for (const auto& [key, _] : j.items())
    if (!known.contains(key))
      throw ConfigError("unknown config key '" + (path.empty() ? key : path + "." + key) + "'");
}

// ---------------------------------------------------------------------------
// Run configuration
// ---------------------------------------------------------------------------

struct RunConfig
{
  ScenarioConfig scenario;
  PerceptionConfig perception;
  TrackerConfig tracker;

  /// Range checks of every section, reported as ConfigError.
  void validate() const
  {
    try {
      scenario.validate();
      perception.validate();
      tracker.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
};

inline json to_json(const RunConfig& c)
{
  return {{"version", kFormatVersion},
          {"scenario", fields_to_json(c.scenario)},
          {"perception", fields_to_json(c.perception)},
          {"tracker", fields_to_json(c.tracker)}};
}

inline RunConfig run_config_from_json(const json& j)
{
  if (!j.is_object())
    throw ConfigError("config must be a JSON object");
  RunConfig c;
  for (const auto& [key, value] : j.items()) {
    if (key == "version") {
      if (!value.is_number_integer() || value.get<int>() != kFormatVersion)
        throw ConfigError("config key 'version' must be 1");
    } else if (key == "scenario") {
      fields_from_json(value, c.scenario, "scenario");
    } else if (key == "perception") {
      fields_from_json(value, c.perception, "perception");
    } else if (key == "tracker") {
      fields_from_json(value, c.tracker, "tracker");
    } else {
      throw ConfigError("unknown config key '" + key + "'");
    }
  }
  return c;
}

// ---------------------------------------------------------------------------
// Small value helpers
// ---------------------------------------------------------------------------

inline json to_json(const BBox2D& b) { return json::array({b.x, b.y, b.w, b.h}); }
inline json to_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

inline json to_json(const Pose& p)
{
  const Eigen::Matrix4d m = p.matrix();
  json a = json::array();
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c)
      a.push_back(m(r, c));
  return a;
}

inline json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

namespace detail {

inline const json& require(const json& j, const char* key)
{
  if (!j.is_object())
    throw ParseError(std::string("expected an object containing '") + key + "'");
  const auto it = j.find(key);
  if (it == j.end())
    throw ParseError(std::string("missing key '") + key + "'");
  return *it;
}

inline double number(const json& j, const char* what)
{
  if (!j.is_number())
    throw ParseError(std::string("expected a number for '") + what + "'");
  return j.get<double>();
}

template <class Int>
Int integer(const json& j, const char* what)
{
  if (!j.is_number_integer())
    throw ParseError(std::string("expected an integer for '") + what + "'");
  return j.get<Int>();
}

inline std::vector<double> numbers(const json& j, std::size_t n, const char* what)
{
  if (!j.is_array() || j.size() != n)
    throw ParseError(std::string("expected ") + std::to_string(n) + " numbers for '" + what + "'");
  std::vector<double> out;
  for (const auto& e : j)
    out.push_back(number(e, what));
  return out;
}

inline BBox2D bbox(const json& j)
{
  const auto v = numbers(j, 4, "bbox");
  return {v[0], v[1], v[2], v[3]};
}

inline Vec3 vec3(const json& j, const char* what)
{
  const auto v = numbers(j, 3, what);
  return {v[0], v[1], v[2]};
}

inline Pose pose(const json& j)
{
  const auto v = numbers(j, 16, "pose");
  Eigen::Matrix4d m;
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c)
      m(r, c) = v[static_cast<std::size_t>(4 * r + c)];
  return Pose::from_matrix(m);
}

inline void check_version(const json& j)
{
  const json& v = require(j, "version");
  if (!v.is_number_integer() || v.get<int>() != kFormatVersion)
    throw ParseError("unsupported format version");
}

inline std::optional<double> optional_number(const json& j, const char* key)
{
  const auto it = j.find(key);
  if (it == j.end() || it->is_null())
    return std::nullopt;
  return number(*it, key);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Sequence file
// ---------------------------------------------------------------------------

inline json to_json(const Sequence& s)
{
  json frames = json::array();
  for (const auto& f : s.frames) {
    json dets = json::array();
    for (const auto& d : f.detections) {
      json pts = json::array();
      for (const auto& p : d.points)
        pts.push_back(to_json(p));
      dets.push_back({{"bbox", to_json(d.bbox)}, {"confidence", d.confidence}, {"class", d.label}, {"points", pts}});
    }
    json gt = json::array();
    for (const auto& a : f.ground_truth)
      gt.push_back({{"track_id", a.track_id}, {"bbox", to_json(a.bbox)}});
    frames.push_back({{"index", f.index},
                      {"height_step", f.height_step},
                      {"pose", to_json(f.pose)},
                      {"detections", dets},
                      {"ground_truth", gt}});
  }
  json objects = json::array();
  for (const auto& o : s.fruits)
    objects.push_back({{"id", o.id}, {"center", to_json(o.center)}, {"radius", o.radius}});
  return {{"version", kFormatVersion},
          {"meta", {{"seed", s.seed}, {"scenario", fields_to_json(s.config)}}},
          {"frames", frames},
          {"gt_objects", objects}};
}

inline Sequence sequence_from_json(const json& j)
{
  detail::check_version(j);
  Sequence s;
  const json& meta = detail::require(j, "meta");
  const json& seed = detail::require(meta, "seed");
  if (!seed.is_number_unsigned() && !seed.is_number_integer())
    throw ParseError("expected an integer seed");
  s.seed = seed.get<std::uint64_t>();
  if (const auto it = meta.find("scenario"); it != meta.end()) {
    try {
      fields_from_json(*it, s.config, "scenario");
    } catch (const ConfigError& e) {
      throw ParseError(e.what());
    }
  }

  const json& frames = detail::require(j, "frames");
  if (!frames.is_array())
    throw ParseError("'frames' must be an array");
  int prev = -1;
  for (const auto& jf : frames) {
    Frame f;
    f.index = detail::integer<int>(detail::require(jf, "index"), "index");
    if (f.index <= prev)
      throw ParseError("frames must be sorted by strictly increasing index");
    prev = f.index;
    f.height_step = detail::integer<int>(detail::require(jf, "height_step"), "height_step");
    f.pose = detail::pose(detail::require(jf, "pose"));
    if (!f.pose.is_valid(1e-6))
      throw ParseError("invalid pose in frame " + std::to_string(f.index));
    for (const auto& jd : detail::require(jf, "detections")) {
      RawDetection2D d;
      d.bbox = detail::bbox(detail::require(jd, "bbox"));
      d.confidence = detail::number(detail::require(jd, "confidence"), "confidence");
      const json& cls = detail::require(jd, "class");
      if (!cls.is_string())
        throw ParseError("expected a string for 'class'");
      d.label = cls.get<std::string>();
      for (const auto& p : detail::require(jd, "points"))
        d.points.push_back(detail::vec3(p, "points"));
      f.detections.push_back(std::move(d));
    }
    for (const auto& ja : detail::require(jf, "ground_truth"))
      f.ground_truth.push_back({detail::integer<ObjectId>(detail::require(ja, "track_id"), "track_id"),
                                detail::bbox(detail::require(ja, "bbox"))});
    s.frames.push_back(std::move(f));
  }
  if (const auto it = j.find("gt_objects"); it != j.end())
    for (const auto& jo : *it)
      s.fruits.push_back({detail::integer<ObjectId>(detail::require(jo, "id"), "id"),
                          detail::vec3(detail::require(jo, "center"), "center"),
                          detail::number(detail::require(jo, "radius"), "radius")});
  return s;
}

// ---------------------------------------------------------------------------
// Tracks file
// ---------------------------------------------------------------------------

inline json to_json(const TracksFile& t)
{
  json frames = json::array();
  for (const auto& f : t.frames) {
    json tracks = json::array();
    for (const auto& r : f.tracks)
      tracks.push_back({{"id", r.id}, {"status", to_string(r.status)}, {"mean", to_json(r.mean)}, {"bbox", to_json(r.bbox)}});
    frames.push_back({{"index", f.index},
                      {"height_step", f.height_step},
                      {"confirmed_count", f.confirmed_count},
                      {"tracks", tracks}});
  }
  json stats = json::array();
  for (const auto& [step, s] : t.stats.per_step)
    stats.push_back({{"height_step", step},
                     {"total", s.total},
                     {"rejected_no_points", s.rejected_no_points},
                     {"nonvalid_sphere", s.nonvalid_sphere},
                     {"outside_workspace", s.outside_workspace}});
  return {{"version", kFormatVersion},
          {"meta", {{"perception", fields_to_json(t.perception)}, {"tracker", fields_to_json(t.tracker)}}},
          {"frames", frames},
          {"stats", stats},
          {"final_count", t.final_count}};
}

inline TracksFile tracks_from_json(const json& j)
{
  detail::check_version(j);
  TracksFile t;
  const json& meta = detail::require(j, "meta");
  try {
    fields_from_json(detail::require(meta, "perception"), t.perception, "perception");
    fields_from_json(detail::require(meta, "tracker"), t.tracker, "tracker");
  } catch (const ConfigError& e) {
    throw ParseError(e.what());
  }
  int prev = -1;
  for (const auto& jf : detail::require(j, "frames")) {
    TrackFrame f;
    f.index = detail::integer<int>(detail::require(jf, "index"), "index");
    if (f.index <= prev)
      throw ParseError("frames must be sorted by strictly increasing index");
    prev = f.index;
    f.height_step = detail::integer<int>(detail::require(jf, "height_step"), "height_step");
    f.confirmed_count = detail::integer<long>(detail::require(jf, "confirmed_count"), "confirmed_count");
    for (const auto& jt : detail::require(jf, "tracks")) {
      TrackRecord r;
      r.id = detail::integer<TrackId>(detail::require(jt, "id"), "id");
      const json& st = detail::require(jt, "status");
      if (!st.is_string())
        throw ParseError("expected a string for 'status'");
      try {
        r.status = track_status_from_string(st.get<std::string>());
      } catch (const std::invalid_argument& e) {
        throw ParseError(e.what());
      }
      r.mean = detail::vec3(detail::require(jt, "mean"), "mean");
      r.bbox = detail::bbox(detail::require(jt, "bbox"));
      f.tracks.push_back(r);
    }
    t.frames.push_back(std::move(f));
  }
  for (const auto& js : detail::require(j, "stats")) {
    StepTally s;
    const int step = detail::integer<int>(detail::require(js, "height_step"), "height_step");
    s.total = detail::integer<long>(detail::require(js, "total"), "total");
    s.rejected_no_points = detail::integer<long>(detail::require(js, "rejected_no_points"), "rejected_no_points");
    s.nonvalid_sphere = detail::integer<long>(detail::require(js, "nonvalid_sphere"), "nonvalid_sphere");
    s.outside_workspace = detail::integer<long>(detail::require(js, "outside_workspace"), "outside_workspace");
    t.stats.per_step[step] = s;
  }
  t.final_count = detail::integer<long>(detail::require(j, "final_count"), "final_count");
  return t;
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

struct ReportFile
{
  int version = kFormatVersion;
  json meta = json::object();
  std::vector<CumulativeRow> rows;
};

inline json to_json(const HotaAlpha& a)
{
  return {{"alpha", a.alpha},
          {"loca", optional_json(a.loca)},
          {"deta", optional_json(a.deta)},
          {"assa", optional_json(a.assa)},
          {"hota", optional_json(a.hota)},
          {"tp", a.tp},
          {"fp", a.fp},
          {"fn", a.fn}};
}

inline json to_json(const CumulativeRow& r)
{
  json per_alpha = json::array();
  for (const auto& a : r.per_alpha)
    per_alpha.push_back(to_json(a));
  return {{"height_step", r.height_step},
          {"sequences", r.sequences},
          {"actual_count", r.actual_count},
          {"predicted_count", r.predicted_count},
          {"mpe", optional_json(r.mpe)},
          {"mape", optional_json(r.mape)},
          {"hota", optional_json(r.hota)},
          {"deta", optional_json(r.deta)},
          {"assa", optional_json(r.assa)},
          {"loca", optional_json(r.loca)},
          {"per_alpha", per_alpha}};
}

inline json to_json(const ReportFile& rep)
{
  json rows = json::array();
  for (const auto& r : rep.rows)
    rows.push_back(to_json(r));
  return {{"version", rep.version}, {"meta", rep.meta}, {"rows", rows}};
}

inline ReportFile report_from_json(const json& j)
{
  detail::check_version(j);
  ReportFile rep;
  rep.meta = detail::require(j, "meta");
  for (const auto& jr : detail::require(j, "rows")) {
    CumulativeRow r;
    r.height_step = detail::integer<int>(detail::require(jr, "height_step"), "height_step");
    r.sequences = detail::integer<int>(detail::require(jr, "sequences"), "sequences");
    r.actual_count = detail::number(detail::require(jr, "actual_count"), "actual_count");
    r.predicted_count = detail::number(detail::require(jr, "predicted_count"), "predicted_count");
    r.mpe = detail::optional_number(jr, "mpe");
    r.mape = detail::optional_number(jr, "mape");
    r.hota = detail::optional_number(jr, "hota");
    r.deta = detail::optional_number(jr, "deta");
    r.assa = detail::optional_number(jr, "assa");
    r.loca = detail::optional_number(jr, "loca");
    for (const auto& ja : detail::require(jr, "per_alpha")) {
      HotaAlpha a;
      a.alpha = detail::number(detail::require(ja, "alpha"), "alpha");
      a.loca = detail::optional_number(ja, "loca");
      a.deta = detail::optional_number(ja, "deta");
      a.assa = detail::optional_number(ja, "assa");
      a.hota = detail::optional_number(ja, "hota");
      a.tp = detail::integer<long>(detail::require(ja, "tp"), "tp");
      a.fp = detail::integer<long>(detail::require(ja, "fp"), "fp");
      a.fn = detail::integer<long>(detail::require(ja, "fn"), "fn");
      r.per_alpha.push_back(a);
    }
    rep.rows.push_back(std::move(r));
  }
  return rep;
}

namespace detail {

inline std::string cell(const std::optional<double>& v, double scale = 100.0)
{
  if (!v)
    return "-";
  std::ostringstream os;
  os << std::fixed << std::setprecision(2) << *v * scale;
  return os.str();
}

}  // namespace detail

/// Aligned text table; accuracies and errors in percent.
inline std::string format_report_table(const std::vector<CumulativeRow>& rows)
{
  std::ostringstream os;
  os << std::setw(6) << "step" << std::setw(6) << "seqs" << std::setw(10) << "actual" << std::setw(10) << "pred"
     << std::setw(9) << "MAPE" << std::setw(9) << "MPE" << std::setw(9) << "HOTA" << std::setw(9) << "DetA"
     << std::setw(9) << "AssA" << std::setw(9) << "LocA" << '\n';
  for (const auto& r : rows) {
    os << std::setw(6) << r.height_step << std::setw(6) << r.sequences << std::fixed << std::setprecision(2)
       << std::setw(10) << r.actual_count << std::setw(10) << r.predicted_count << std::setw(9)
       << detail::cell(r.mape, 1.0) << std::setw(9) << detail::cell(r.mpe, 1.0) << std::setw(9)
       << detail::cell(r.hota) << std::setw(9) << detail::cell(r.deta) << std::setw(9) << detail::cell(r.assa)
       << std::setw(9) << detail::cell(r.loca) << '\n';
  }
  return os.str();
}

/// Table of RD% / NSF% per height step.
inline std::string format_stats_table(const PreprocStats& stats)
{
  std::ostringstream os;
  os << std::setw(6) << "step" << std::setw(8) << "total" << std::setw(9) << "RD%" << std::setw(9) << "NSF%" << '\n';
  for (const auto& row : stats_report(stats))
    os << std::setw(6) << row.height_step << std::setw(8) << row.total << std::setw(9)
       << detail::cell(row.rd_percent, 1.0) << std::setw(9) << detail::cell(row.nsf_percent, 1.0) << '\n';
  return os.str();
}

// ---------------------------------------------------------------------------
// Files
// ---------------------------------------------------------------------------

inline json read_json_file(const std::string& path)
{
  std::ifstream in(path);
  if (!in)
    throw ParseError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError("'" + path + "': " + e.what());
  }
}

inline std::string dump(const json& j) { return j.dump(1) + "\n"; }

inline void write_text_file(const std::string& path, const std::string& text)
{
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw ParseError("cannot write '" + path + "'");
  out << text;
  if (!out)
    throw ParseError("failed writing '" + path + "'");
}

inline void write_json_file(const std::string& path, const json& j) { write_text_file(path, dump(j)); }

}  // namespace fruitwm
