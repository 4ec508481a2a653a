#pragma once

#include "fruitwm/assignment.hpp"
#include "fruitwm/geometry.hpp"
#include "fruitwm/perception.hpp"

#include <algorithm>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace fruitwm {

using TrackId = std::int64_t;

enum class TrackStatus { tentative, confirmed };

inline const char* to_string(TrackStatus s)
{
  return s == TrackStatus::confirmed ? "confirmed" : "tentative";
}

inline TrackStatus track_status_from_string(const std::string& s)
{
  if (s == "confirmed")
    return TrackStatus::confirmed;
  if (s == "tentative")
    return TrackStatus::tentative;
  throw std::invalid_argument("unknown track status: " + s);
}

struct Track
{
  TrackId id = 0;
  Gaussian position;
  std::string label = kDefaultLabel;
  BBox2D bbox;  // box of the last associated detection
  TrackStatus status = TrackStatus::tentative;
  int consecutive_hits = 0;
  int frames_since_init = 0;
};

/// 0.95 quantile of the chi-square distribution with 3 degrees of freedom.
inline constexpr double kDefaultGate = 7.82;

struct TrackerConfig
{
  double gate = kDefaultGate;  // on the squared Mahalanobis distance
  int n_init = 0;              // frames a new track stays tentative
  double process_noise = 1e-6; // m^2 added per frame
  double init_cov_scale = 1.0; // new track cov = scale * detection cov

  void validate() const
  {
    if (!(gate > 0.0))
      throw std::invalid_argument("tracker.gate must be positive");
    if (n_init < 0)
      throw std::invalid_argument("tracker.n_init must be >= 0");
    if (!(process_noise >= 0.0))
      throw std::invalid_argument("tracker.process_noise must be >= 0");
    if (!(init_cov_scale > 0.0))
      throw std::invalid_argument("tracker.init_cov_scale must be positive");
  }
};

struct WorldModel
{
  std::vector<Track> tracks;
  long frame_index = 0;
  TrackId next_id = 0;
  TrackerConfig config;

  WorldModel() = default;
  explicit WorldModel(TrackerConfig cfg) : config(cfg) { config.validate(); }
};

/// Association of one frame's detections to tracks. Track ids, detection
/// indices into the frame's detection list.
struct Association
{
  std::vector<std::pair<TrackId, std::size_t>> matched;
  std::vector<TrackId> unmatched_tracks;
  std::vector<std::size_t> unmatched_detections;
};

/// Static-object prediction: means and attributes unchanged, covariances
/// inflated by process_noise * I.
inline WorldModel predict(WorldModel world)
{
  const double q = world.config.process_noise;
  for (auto& t : world.tracks) {
    t.position.cov.diagonal().array() += q;
    ++t.frames_since_init;
  }
  ++world.frame_index;
  return world;
}

/// C(i, j): squared Mahalanobis distance of detection j under track i's
/// position distribution (track covariance only).
inline Eigen::MatrixXd build_cost_matrix(std::span<const Track> tracks, std::span<const Detection> detections)
{
  Eigen::MatrixXd cost(static_cast<Eigen::Index>(tracks.size()), static_cast<Eigen::Index>(detections.size()));
  for (std::size_t i = 0; i < tracks.size(); ++i) {
    const MahalanobisMetric metric(tracks[i].position.mean, tracks[i].position.cov);
    for (std::size_t j = 0; j < detections.size(); ++j)
      cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = metric(detections[j].position.mean);
  }
  return cost;
}

/// Linear Kalman update with identity observation model; class and box are
/// taken from the detection.
inline Track kalman_update(Track track, const Detection& det)
{
  const Mat3& prior = track.position.cov;
  const Mat3 innovation_cov = regularized_covariance(prior + det.position.cov);
  const Mat3 gain = prior * innovation_cov.inverse();
  track.position.mean += gain * (det.position.mean - track.position.mean);
  const Mat3 post = (Mat3::Identity() - gain) * prior;
  track.position.cov = 0.5 * (post + post.transpose());
  track.label = det.label;
  track.bbox = det.bbox;
  ++track.consecutive_hits;
  return track;
}

/// Track lifecycle after association: unmatched detections spawn tentative
/// tracks (confirmed at once when n_init == 0), tentative tracks matched in
/// each of their first n_init + 1 frames are confirmed, unmatched tentative
/// tracks are deleted, confirmed tracks are kept forever.
inline WorldModel lifecycle(WorldModel world, const Association& assoc, std::span<const Detection> detections)
{
  const int needed = world.config.n_init + 1;
  std::erase_if(world.tracks, [&](const Track& t) {
    return t.status == TrackStatus::tentative &&
           std::find(assoc.unmatched_tracks.begin(), assoc.unmatched_tracks.end(), t.id) !=
               assoc.unmatched_tracks.end();
  });
  for (auto& t : world.tracks)
    if (t.status == TrackStatus::tentative && t.consecutive_hits >= needed)
      t.status = TrackStatus::confirmed;

  for (const std::size_t j : assoc.unmatched_detections) {
    const Detection& d = detections[j];
    Track t;
    t.id = world.next_id++;
    t.position.mean = d.position.mean;
    t.position.cov = world.config.init_cov_scale * d.position.cov;
    t.label = d.label;
    t.bbox = d.bbox;
    t.consecutive_hits = 1;
    t.frames_since_init = 0;
    t.status = t.consecutive_hits >= needed ? TrackStatus::confirmed : TrackStatus::tentative;
    world.tracks.push_back(std::move(t));
  }
  return world;
}

struct StepResult
{
  WorldModel world;
  Association association;
  std::vector<TrackId> spawned;  // ids created this frame, in detection order
};

/// One predict -> associate -> update -> lifecycle cycle.
inline StepResult step(WorldModel world, std::span<const Detection> detections)
{
  world = predict(std::move(world));

  const Eigen::MatrixXd cost = build_cost_matrix(world.tracks, detections);
  const Assignment a = solve_assignment(cost, world.config.gate);

  StepResult result;
  Association& assoc = result.association;
  for (const auto& [i, j] : a.pairs) {
    Track& t = world.tracks[i];
    assoc.matched.emplace_back(t.id, j);
    t = kalman_update(std::move(t), detections[j]);
  }
  for (const std::size_t i : a.unmatched_rows)
    assoc.unmatched_tracks.push_back(world.tracks[i].id);
  assoc.unmatched_detections = a.unmatched_cols;

  const TrackId first_new = world.next_id;
  result.world = lifecycle(std::move(world), assoc, detections);
  for (TrackId id = first_new; id < result.world.next_id; ++id)
    result.spawned.push_back(id);
  return result;
}

/// Number of confirmed tracks.
inline std::size_t count(const WorldModel& world)
{
  return static_cast<std::size_t>(std::count_if(world.tracks.begin(), world.tracks.end(),
                                                [](const Track& t) { return t.status == TrackStatus::confirmed; }));
}

}  // namespace fruitwm
