#pragma once

#include "fruitwm/geometry.hpp"

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace fruitwm {

inline const std::string kDefaultLabel = "tomato";

/// One instance-segmentation output: class, score, box, and the camera-frame
/// points its mask selected from the structured cloud (possibly none).
struct RawDetection2D
{
  std::string label = kDefaultLabel;
  double confidence = 1.0;
  BBox2D bbox;
  std::vector<Vec3> points;

  bool operator==(const RawDetection2D&) const = default;
};

/// A 3D measurement in the robot frame.
struct Detection
{
  Gaussian position;
  std::string label = kDefaultLabel;
  BBox2D bbox;
  double radius = 0.0;  // 0 when the sphere fit was rejected
  bool sphere_valid = false;
};

/// Row-aligned workspace box. Detections of neighbouring plants and rows
/// fall outside it.
struct WorkspaceLimits
{
  double x_min = -0.2;
  double x_max = 0.2;
  double y_min = -0.8;
  double z_min = 0.4;

  bool contains(const Vec3& p) const
  {
    return p.x() >= x_min && p.x() <= x_max && p.y() >= y_min && p.z() >= z_min;
  }
};

struct PerceptionConfig
{
  double confidence_threshold = 0.5;
  double radius_min = 0.01;
  double radius_max = 0.05;
  /// A fitted centre farther than this from the centroid of its points is invalid.
  double max_center_offset = 0.10;
  /// Isotropic camera-frame standard deviation of a detection position (m).
  double measurement_sigma = 0.005;
  WorkspaceLimits workspace;

  void validate() const
  {
    if (!(confidence_threshold >= 0.0 && confidence_threshold <= 1.0))
      throw std::invalid_argument("perception.confidence_threshold must be in [0,1]");
    if (!(radius_min >= 0.0 && radius_min < radius_max))
      throw std::invalid_argument("perception.radius_min must be >= 0 and < radius_max");
    if (!(max_center_offset > 0.0))
      throw std::invalid_argument("perception.max_center_offset must be positive");
    if (!(measurement_sigma > 0.0))
      throw std::invalid_argument("perception.measurement_sigma must be positive");
    if (!(workspace.x_min <= workspace.x_max))
      throw std::invalid_argument("perception.workspace x_min must not exceed x_max");
  }
};

/// Pre-processing tallies for one height step. `total` counts detections that
/// passed the confidence threshold.
struct StepTally
{
  long total = 0;
  long rejected_no_points = 0;  // RD
  long nonvalid_sphere = 0;     // NSF
  long outside_workspace = 0;

  StepTally& operator+=(const StepTally& o)
  {
    total += o.total;
    rejected_no_points += o.rejected_no_points;
    nonvalid_sphere += o.nonvalid_sphere;
    outside_workspace += o.outside_workspace;
    return *this;
  }

  bool operator==(const StepTally&) const = default;
};

struct PreprocStats
{
  std::map<int, StepTally> per_step;

  void merge(const PreprocStats& other)
  {
    for (const auto& [step, tally] : other.per_step)
      per_step[step] += tally;
  }

  bool operator==(const PreprocStats&) const = default;
};

struct StatsRow
{
  int height_step = 0;
  long total = 0;
  std::optional<double> rd_percent;
  std::optional<double> nsf_percent;
};

inline std::vector<Detection> workspace_filter(std::vector<Detection> dets, const PerceptionConfig& cfg)
{
  std::erase_if(dets, [&](const Detection& d) { return !cfg.workspace.contains(d.position.mean); });
  return dets;
}

/// Turns one frame of 2D detections into robot-frame 3D detections.
///
/// Per detection: confidence gate, empty-mask rejection (RD), sphere fit with
/// radius/centre validation (failures keep the point centroid and count as
/// NSF), isotropic measurement covariance, camera-to-robot transform, and the
/// workspace filter. Surviving detections keep their input order.
inline std::vector<Detection> extract_detections(std::span<const RawDetection2D> raw, const Pose& pose,
                                                 const PerceptionConfig& cfg, PreprocStats& stats,
                                                 int height_step = 1)
{
  if (!pose.is_valid())
    throw std::invalid_argument("invalid pose");

  StepTally& tally = stats.per_step[height_step];
  const Mat3 cam_cov = Mat3::Identity() * (cfg.measurement_sigma * cfg.measurement_sigma);

  std::vector<Detection> out;
  out.reserve(raw.size());
  for (const auto& r : raw) {
    if (r.confidence < cfg.confidence_threshold)
      continue;
    ++tally.total;
    if (r.points.empty()) {
      ++tally.rejected_no_points;
      continue;
    }

    const SphereFit fit = fit_sphere(r.points);
    const Vec3 mean_points = centroid(r.points);
    const bool valid = fit.valid_geometry && fit.radius >= cfg.radius_min && fit.radius <= cfg.radius_max &&
                       (fit.center - mean_points).norm() <= cfg.max_center_offset;

    Detection d;
    d.label = r.label;
    d.bbox = r.bbox;
    d.sphere_valid = valid;
    d.radius = valid ? fit.radius : 0.0;
    if (!valid)
      ++tally.nonvalid_sphere;

    d.position = transform_gaussian({valid ? fit.center : mean_points, cam_cov}, pose);
    if (!cfg.workspace.contains(d.position.mean)) {
      ++tally.outside_workspace;
      continue;
    }
    out.push_back(std::move(d));
  }
  return out;
}

/// RD% and NSF% per height step; steps without detections report no percentages.
inline std::vector<StatsRow> stats_report(const PreprocStats& stats)
{
  std::vector<StatsRow> rows;
  for (const auto& [step, t] : stats.per_step) {
    StatsRow row;
    row.height_step = step;
    row.total = t.total;
    if (t.total > 0) {
      row.rd_percent = 100.0 * static_cast<double>(t.rejected_no_points) / static_cast<double>(t.total);
      row.nsf_percent = 100.0 * static_cast<double>(t.nonvalid_sphere) / static_cast<double>(t.total);
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace fruitwm
