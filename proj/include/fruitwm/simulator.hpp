#pragma once

#include "fruitwm/geometry.hpp"
#include "fruitwm/metrics.hpp"
#include "fruitwm/perception.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace fruitwm {

struct Fruit
{
  ObjectId id = 0;
  Vec3 center = Vec3::Zero();  // robot frame
  double radius = 0.0;

  bool operator==(const Fruit&) const = default;
};

/// Value at height step `step` (1-based) of a profile that varies linearly
/// from `low` at step 1 to `high` at step `heights`.
inline double height_profile(double low, double high, int step, int heights)
{
  if (heights <= 1)
    return low;
  const double t = static_cast<double>(step - 1) / static_cast<double>(heights - 1);
  return low + t * (high - low);
}

struct ScenarioConfig
{
  // Scene
  int num_fruits = 12;
  std::vector<int> truss_sizes;  // overrides num_fruits when non-empty
  int truss_size_min = 3;
  int truss_size_max = 6;
  double spacing_min = 0.03;  // nearest-neighbour distance inside a truss
  double spacing_max = 0.08;
  double fruit_radius_min = 0.012;
  double fruit_radius_max = 0.02;
  double stem_x = 0.0;
  double fruit_z_min = 0.45;
  double fruit_z_max = 1.95;
  double max_stem_offset = 0.15;  // horizontal distance of fruits from the stem

  // Viewpoint path
  int heights = 10;
  int viewpoints_per_height = 10;
  double cylinder_radius = 0.30;
  double stem_depth = 0.60;  // stem at y = -stem_depth
  double base_height = 0.5;
  double height_spacing = 0.15;
  Intrinsics intrinsics;

  // Detector
  double p_det_low = 0.95;  // detection probability at height step 1
  double p_det_high = 0.6;  // ... and at the top step
  double occlusion_radius_factor = 1.5;
  double occlusion_factor = 0.5;
  double confidence_mean = 0.85;
  double confidence_sd = 0.10;
  double occluded_confidence_drop = 0.15;
  double fp_rate = 0.3;  // Poisson mean of false positives per frame
  double fp_outside_fraction = 0.5;
  double fp_confidence_mean = 0.55;
  double fp_confidence_sd = 0.15;
  double bbox_jitter_px = 2.0;

  // Depth sensor
  int points_per_detection = 60;
  double cap_half_angle_deg = 60.0;
  double point_noise_low = 0.001;
  double point_noise_high = 0.003;
  double empty_mask_low = 0.02;  // probability that a mask selects no valid points
  double empty_mask_high = 0.05;

  int frame_count() const { return heights * viewpoints_per_height; }

  /// All stochastic degradations switched off.
  static ScenarioConfig noiseless(int fruits)
  {
    ScenarioConfig c;
    c.num_fruits = fruits;
    c.p_det_low = c.p_det_high = 1.0;
    c.occlusion_factor = 1.0;
    c.confidence_sd = 0.0;
    c.occluded_confidence_drop = 0.0;
    c.fp_rate = 0.0;
    c.bbox_jitter_px = 0.0;
    c.point_noise_low = c.point_noise_high = 0.0;
    c.empty_mask_low = c.empty_mask_high = 0.0;
    return c;
  }

  void validate() const
  {
    auto prob = [](double p, const char* name) {
      if (!(p >= 0.0 && p <= 1.0))
        throw std::invalid_argument(std::string("scenario.") + name + " must be in [0,1]");
    };
    auto positive = [](double v, const char* name) {
      if (!(v > 0.0))
        throw std::invalid_argument(std::string("scenario.") + name + " must be positive");
    };
    auto non_negative = [](double v, const char* name) {
      if (!(v >= 0.0))
        throw std::invalid_argument(std::string("scenario.") + name + " must be >= 0");
    };
    if (num_fruits < 0)
      throw std::invalid_argument("scenario.num_fruits must be >= 0");
    for (const int s : truss_sizes)
      if (s <= 0)
        throw std::invalid_argument("scenario.truss_sizes entries must be positive");
    if (truss_size_min < 1 || truss_size_max < truss_size_min)
      throw std::invalid_argument("scenario.truss_size_min/max must satisfy 1 <= min <= max");
    positive(spacing_min, "spacing_min");
    if (spacing_max < spacing_min)
      throw std::invalid_argument("scenario.spacing_max must be >= spacing_min");
    positive(fruit_radius_min, "fruit_radius_min");
    if (fruit_radius_max < fruit_radius_min)
      throw std::invalid_argument("scenario.fruit_radius_max must be >= fruit_radius_min");
    if (fruit_z_max <= fruit_z_min)
      throw std::invalid_argument("scenario.fruit_z_max must exceed fruit_z_min");
    positive(max_stem_offset, "max_stem_offset");
    if (heights < 1)
      throw std::invalid_argument("scenario.heights must be >= 1");
    if (viewpoints_per_height < 1)
      throw std::invalid_argument("scenario.viewpoints_per_height must be >= 1");
    positive(cylinder_radius, "cylinder_radius");
    positive(stem_depth, "stem_depth");
    non_negative(height_spacing, "height_spacing");
    positive(intrinsics.fx, "intrinsics.fx");
    positive(intrinsics.fy, "intrinsics.fy");
    if (intrinsics.width < 1 || intrinsics.height < 1)
      throw std::invalid_argument("scenario.intrinsics width/height must be positive");
    prob(p_det_low, "p_det_low");
    prob(p_det_high, "p_det_high");
    positive(occlusion_radius_factor, "occlusion_radius_factor");
    prob(occlusion_factor, "occlusion_factor");
    prob(confidence_mean, "confidence_mean");
    non_negative(confidence_sd, "confidence_sd");
    non_negative(occluded_confidence_drop, "occluded_confidence_drop");
    non_negative(fp_rate, "fp_rate");
    prob(fp_outside_fraction, "fp_outside_fraction");
    prob(fp_confidence_mean, "fp_confidence_mean");
    non_negative(fp_confidence_sd, "fp_confidence_sd");
    non_negative(bbox_jitter_px, "bbox_jitter_px");
    if (points_per_detection < 1)
      throw std::invalid_argument("scenario.points_per_detection must be >= 1");
    if (!(cap_half_angle_deg > 0.0 && cap_half_angle_deg <= 180.0))
      throw std::invalid_argument("scenario.cap_half_angle_deg must be in (0,180]");
    non_negative(point_noise_low, "point_noise_low");
    non_negative(point_noise_high, "point_noise_high");
    prob(empty_mask_low, "empty_mask_low");
    prob(empty_mask_high, "empty_mask_high");
  }
};

struct GtAnnotation
{
  ObjectId track_id = 0;
  BBox2D bbox;

  bool operator==(const GtAnnotation&) const = default;
};

/// One viewpoint of a sequence.
struct Frame
{
  int index = 0;
  int height_step = 1;
  Pose pose;  // robot <- camera
  std::vector<RawDetection2D> detections;
  std::vector<GtAnnotation> ground_truth;

  bool operator==(const Frame&) const = default;
};

struct Sequence
{
  int version = 1;
  std::uint64_t seed = 0;
  ScenarioConfig config;
  std::vector<Frame> frames;
  std::vector<Fruit> fruits;

  /// Ground-truth trajectories in image space (track id = fruit id).
  std::vector<TrackedBox> gt_tracks() const
  {
    std::vector<TrackedBox> out;
    for (const auto& f : frames)
      for (const auto& a : f.ground_truth)
        out.push_back({f.index, a.track_id, a.bbox});
    return out;
  }
};

// ---------------------------------------------------------------------------
// Random streams
// ---------------------------------------------------------------------------

inline std::uint64_t splitmix64(std::uint64_t x)
{
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

using Rng = std::mt19937_64;

/// Independent generator for (seed, stream); frame i uses stream i + 1.
inline Rng substream(std::uint64_t seed, std::uint64_t stream)
{
  return Rng(splitmix64(seed ^ splitmix64(stream + 0x51ed270b27a5ULL)));
}

namespace detail {

inline double uniform(Rng& rng, double lo, double hi)
{
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline double normal(Rng& rng, double mean, double sd)
{
  if (sd <= 0.0)
    return mean;
  return std::normal_distribution<double>(mean, sd)(rng);
}

/// Normal sample clamped to mean +- 6 sd.
inline double bounded_normal(Rng& rng, double sd)
{
  if (sd <= 0.0)
    return 0.0;
  return std::clamp(normal(rng, 0.0, sd), -6.0 * sd, 6.0 * sd);
}

inline bool bernoulli(Rng& rng, double p)
{
  if (p <= 0.0)
    return false;
  if (p >= 1.0)
    return true;
  return std::bernoulli_distribution(p)(rng);
}

inline Vec3 random_unit(Rng& rng)
{
  const double z = uniform(rng, -1.0, 1.0);
  const double phi = uniform(rng, 0.0, 2.0 * std::numbers::pi);
  const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
  return {s * std::cos(phi), s * std::sin(phi), z};
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Scene
// ---------------------------------------------------------------------------

/// Fruits grouped in trusses along a vertical stem at (stem_x, -stem_depth).
/// Within a truss every fruit after the first sits at spacing_min..spacing_max
/// from an earlier fruit of the same truss and no closer than spacing_min to
/// any fruit. Throws when a layout cannot be found after bounded retries.
inline std::vector<Fruit> generate_scene(const ScenarioConfig& cfg, std::uint64_t seed)
{
  cfg.validate();
  Rng rng = substream(seed, 0);

  std::vector<int> sizes = cfg.truss_sizes;
  if (sizes.empty()) {
    int left = cfg.num_fruits;
    while (left > 0) {
      const int s = std::uniform_int_distribution<int>(cfg.truss_size_min, cfg.truss_size_max)(rng);
      sizes.push_back(std::min(s, left));
      left -= sizes.back();
    }
  }

  const WorkspaceLimits ws;
  const double stem_y = -cfg.stem_depth;
  auto inside = [&](const Vec3& p, double r) {
    const double horiz = std::hypot(p.x() - cfg.stem_x, p.y() - stem_y);
    return ws.contains(p) && horiz <= cfg.max_stem_offset && p.z() - r >= ws.z_min && p.z() >= cfg.fruit_z_min &&
           p.z() <= cfg.fruit_z_max;
  };

  std::vector<Fruit> fruits;
  const int trusses = static_cast<int>(sizes.size());
  const double span = cfg.fruit_z_max - cfg.fruit_z_min;
  ObjectId next_id = 0;
  for (int t = 0; t < trusses; ++t) {
    const double slot = span / trusses;
    const double z_anchor = cfg.fruit_z_min + slot * (t + 0.5) + detail::uniform(rng, -0.15, 0.15) * slot;

    bool placed_truss = false;
    for (int attempt = 0; attempt < 200 && !placed_truss; ++attempt) {
      std::vector<Fruit> truss;
      const double ang = detail::uniform(rng, 0.0, 2.0 * std::numbers::pi);
      const double off = detail::uniform(rng, 0.0, 0.5 * cfg.max_stem_offset);
      const Vec3 anchor(cfg.stem_x + off * std::cos(ang), stem_y + off * std::sin(ang), z_anchor);

      auto clear = [&](const Vec3& c, double r) {
        for (const auto* group : {&fruits, &truss})
          for (const auto& f : *group) {
            const double d = (f.center - c).norm();
            if (d < cfg.spacing_min || d < f.radius + r)
              return false;
          }
        return true;
      };

      const double r0 = detail::uniform(rng, cfg.fruit_radius_min, cfg.fruit_radius_max);
      if (!inside(anchor, r0) || !clear(anchor, r0))
        continue;
      truss.push_back({0, anchor, r0});
      bool ok = true;
      while (static_cast<int>(truss.size()) < sizes[static_cast<std::size_t>(t)] && ok) {
        ok = false;
        for (int k = 0; k < 500; ++k) {
          const auto& base = truss[std::uniform_int_distribution<std::size_t>(0, truss.size() - 1)(rng)];
          const double d = detail::uniform(rng, cfg.spacing_min, cfg.spacing_max);
          const Vec3 c = base.center + d * detail::random_unit(rng);
          const double r = detail::uniform(rng, cfg.fruit_radius_min, std::min(cfg.fruit_radius_max, 0.5 * d));
          if (r < cfg.fruit_radius_min || !inside(c, r) || !clear(c, r))
            continue;
          truss.push_back({0, c, r});
          ok = true;
          break;
        }
      }
      if (!ok)
        continue;
      for (auto& f : truss) {
        f.id = next_id++;
        fruits.push_back(f);
      }
      placed_truss = true;
    }
    if (!placed_truss)
      throw std::runtime_error("infeasible scene layout");
  }
  return fruits;
}

// ---------------------------------------------------------------------------
// Viewpoints
// ---------------------------------------------------------------------------

/// Centre of the semicircle of height step `step` (1-based) on the stem axis.
inline Vec3 path_center(const ScenarioConfig& cfg, int step)
{
  return {cfg.stem_x, -cfg.stem_depth, cfg.base_height + (step - 1) * cfg.height_spacing};
}

/// Camera looking from `origin` at `target`, image y pointing down.
inline Pose look_at(const Vec3& origin, const Vec3& target)
{
  const Vec3 z = (target - origin).normalized();
  Vec3 down(0.0, 0.0, -1.0);
  Vec3 y = (down - down.dot(z) * z);
  if (y.norm() < 1e-9)
    y = Vec3(0.0, 1.0, 0.0) - z.y() * z;
  y.normalize();
  const Vec3 x = y.cross(z);
  Pose p;
  p.rotation.col(0) = x;
  p.rotation.col(1) = y;
  p.rotation.col(2) = z;
  p.translation = origin;
  return p;
}

/// Semi-cylinder path: heights x viewpoints poses, lowest level first; on each
/// level the cameras sit evenly on the robot-side semicircle of radius
/// cylinder_radius around the stem, each aimed at the semicircle centre.
inline std::vector<Pose> camera_path(const ScenarioConfig& cfg)
{
  std::vector<Pose> poses;
  poses.reserve(static_cast<std::size_t>(cfg.frame_count()));
  for (int h = 1; h <= cfg.heights; ++h) {
    const Vec3 center = path_center(cfg, h);
    for (int k = 0; k < cfg.viewpoints_per_height; ++k) {
      const double theta = std::numbers::pi * (k + 0.5) / cfg.viewpoints_per_height;
      const Vec3 origin = center + cfg.cylinder_radius * Vec3(std::cos(theta), std::sin(theta), 0.0);
      poses.push_back(look_at(origin, center));
    }
  }
  return poses;
}

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

namespace detail {

/// Distance from `p` to the segment [a, b].
inline double segment_distance(const Vec3& p, const Vec3& a, const Vec3& b)
{
  const Vec3 ab = b - a;
  const double t = std::clamp((p - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
  return (a + t * ab - p).norm();
}

inline bool in_view(const Vec3& c_cam, double r, const Intrinsics& k)
{
  if (!(c_cam.z() > r + 0.05))
    return false;
  const Eigen::Vector2d uv = project_point(c_cam, k);
  return uv.x() >= 0.0 && uv.x() < k.width && uv.y() >= 0.0 && uv.y() < k.height;
}

/// Points on the camera-facing cap of a sphere (camera frame), with
/// per-component noise bounded so every point stays within 6 sigma of the
/// surface.
inline std::vector<Vec3> sample_cap(Rng& rng, const Vec3& c_cam, double r, int n, double half_angle_deg,
                                    double sigma)
{
  const Vec3 axis = (-c_cam).normalized();
  Vec3 helper = std::abs(axis.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
  const Vec3 e1 = axis.cross(helper).normalized();
  const Vec3 e2 = axis.cross(e1);
  const double cos_max = std::cos(half_angle_deg * std::numbers::pi / 180.0);
  const double bound = 6.0 * sigma / std::sqrt(3.0);

  std::vector<Vec3> pts;
  pts.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double ct = uniform(rng, cos_max, 1.0);
    const double st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
    const double phi = uniform(rng, 0.0, 2.0 * std::numbers::pi);
    const Vec3 dir = ct * axis + st * (std::cos(phi) * e1 + std::sin(phi) * e2);
    Vec3 noise = Vec3::Zero();
    if (sigma > 0.0)
      for (int d = 0; d < 3; ++d)
        noise(d) = std::clamp(normal(rng, 0.0, sigma), -bound, bound);
    pts.push_back(c_cam + r * dir + noise);
  }
  return pts;
}

inline BBox2D jitter_box(Rng& rng, const BBox2D& b, double sd)
{
  if (sd <= 0.0)
    return b;
  const double du = bounded_normal(rng, sd);
  const double dv = bounded_normal(rng, sd);
  const double dw = bounded_normal(rng, sd);
  const double dh = bounded_normal(rng, sd);
  BBox2D out;
  out.w = std::max(1.0, b.w + dw);
  out.h = std::max(1.0, b.h + dh);
  out.x = b.center_x() + du - 0.5 * out.w;
  out.y = b.center_y() + dv - 0.5 * out.h;
  return out;
}

inline double clipped_confidence(Rng& rng, double mean, double sd)
{
  return std::clamp(normal(rng, mean, sd), 0.0, 1.0);
}

}  // namespace detail

/// Synthesizes one viewpoint: noisy detections with partial point clouds for
/// visible fruits, Poisson false positives, and ground-truth boxes for every
/// in-view fruit whose centre is not hidden behind a nearer fruit.
inline Frame render_frame(std::span<const Fruit> scene, const Pose& pose, const ScenarioConfig& cfg, int height_step,
                          Rng& rng)
{
  if (!pose.is_valid())
    throw std::invalid_argument("invalid pose");
  Frame frame;
  frame.height_step = height_step;
  frame.pose = pose;

  const Pose cam_from_robot = pose.inverse();
  const Vec3 origin = pose.translation;
  const double p_det = height_profile(cfg.p_det_low, cfg.p_det_high, height_step, cfg.heights);
  const double sigma = height_profile(cfg.point_noise_low, cfg.point_noise_high, height_step, cfg.heights);
  const double p_empty = height_profile(cfg.empty_mask_low, cfg.empty_mask_high, height_step, cfg.heights);
  const Intrinsics& k = cfg.intrinsics;

  auto make_detection = [&](const Vec3& c_cam, double r, double confidence) {
    RawDetection2D d;
    d.confidence = confidence;
    d.bbox = detail::jitter_box(rng, project_sphere(c_cam, r, k), cfg.bbox_jitter_px);
    std::vector<Vec3> pts =
        detail::sample_cap(rng, c_cam, r, cfg.points_per_detection, cfg.cap_half_angle_deg, sigma);
    if (detail::bernoulli(rng, p_empty))
      pts.clear();
    d.points = std::move(pts);
    return d;
  };

  for (const auto& fruit : scene) {
    const Vec3 c_cam = cam_from_robot.apply(fruit.center);
    if (!detail::in_view(c_cam, fruit.radius, k))
      continue;
    const double dist = (fruit.center - origin).norm();
    bool hidden = false;
    bool shadowed = false;
    for (const auto& other : scene) {
      if (other.id == fruit.id || (other.center - origin).norm() >= dist)
        continue;
      const double miss = detail::segment_distance(other.center, origin, fruit.center);
      if (miss < other.radius)
        hidden = true;
      else if (miss < cfg.occlusion_radius_factor * other.radius)
        shadowed = true;
    }
    if (hidden)
      continue;
    const BBox2D gt_box = project_sphere(c_cam, fruit.radius, k);
    frame.ground_truth.push_back({fruit.id, gt_box});

    const double p = p_det * (shadowed ? cfg.occlusion_factor : 1.0);
    if (!detail::bernoulli(rng, p))
      continue;
    const double mean_conf = cfg.confidence_mean - (shadowed ? cfg.occluded_confidence_drop : 0.0);
    const double conf = detail::clipped_confidence(rng, mean_conf, cfg.confidence_sd);
    frame.detections.push_back(make_detection(c_cam, fruit.radius, conf));
  }

  const int n_fp = cfg.fp_rate > 0.0 ? std::poisson_distribution<int>(cfg.fp_rate)(rng) : 0;
  const double stem_y = -cfg.stem_depth;
  for (int i = 0; i < n_fp; ++i) {
    const bool outside = detail::bernoulli(rng, cfg.fp_outside_fraction);
    const double r = detail::uniform(rng, cfg.fruit_radius_min, cfg.fruit_radius_max);
    for (int attempt = 0; attempt < 50; ++attempt) {
      Vec3 p;
      p.z() = std::max(0.45, origin.z() + detail::uniform(rng, -0.12, 0.12));
      if (outside) {
        // neighbouring row behind the plant
        p.x() = cfg.stem_x + detail::uniform(rng, -0.35, 0.35);
        p.y() = stem_y + detail::uniform(rng, -0.5, -0.3);
      } else {
        p.x() = cfg.stem_x + detail::uniform(rng, -cfg.max_stem_offset, cfg.max_stem_offset);
        p.y() = stem_y + detail::uniform(rng, -cfg.max_stem_offset, cfg.max_stem_offset);
      }
      const Vec3 c_cam = cam_from_robot.apply(p);
      if (!detail::in_view(c_cam, r, k))
        continue;
      const double conf = detail::clipped_confidence(rng, cfg.fp_confidence_mean, cfg.fp_confidence_sd);
      frame.detections.push_back(make_detection(c_cam, r, conf));
      break;
    }
  }
  return frame;
}

/// Full sequence over the camera path; frame i renders from its own random
/// substream so output does not depend on rendering order.
inline Sequence simulate_sequence(const ScenarioConfig& cfg, std::uint64_t seed)
{
  cfg.validate();
  Sequence seq;
  seq.seed = seed;
  seq.config = cfg;
  seq.fruits = generate_scene(cfg, seed);
  const std::vector<Pose> poses = camera_path(cfg);
  seq.frames.reserve(poses.size());
  for (std::size_t i = 0; i < poses.size(); ++i) {
    const int step = static_cast<int>(i) / cfg.viewpoints_per_height + 1;
    Rng rng = substream(seed, i + 1);
    Frame f = render_frame(seq.fruits, poses[i], cfg, step, rng);
    f.index = static_cast<int>(i);
    seq.frames.push_back(std::move(f));
  }
  return seq;
}

}  // namespace fruitwm
