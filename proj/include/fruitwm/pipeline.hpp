#pragma once

#include "fruitwm/metrics.hpp"
#include "fruitwm/perception.hpp"
#include "fruitwm/simulator.hpp"
#include "fruitwm/worldmodel.hpp"

#include <algorithm>
#include <vector>

namespace fruitwm {

/// One track emitted for a frame.
struct TrackRecord
{
  TrackId id = 0;
  TrackStatus status = TrackStatus::confirmed;
  Vec3 mean = Vec3::Zero();
  BBox2D bbox;

  bool operator==(const TrackRecord&) const = default;
};

struct TrackFrame
{
  int index = 0;
  int height_step = 1;
  long confirmed_count = 0;  // after this frame
  std::vector<TrackRecord> tracks;

  bool operator==(const TrackFrame&) const = default;
};

/// Tracker output for a whole sequence.
struct TracksFile
{
  int version = 1;
  PerceptionConfig perception;
  TrackerConfig tracker;
  std::vector<TrackFrame> frames;
  PreprocStats stats;
  long final_count = 0;

  std::vector<TrackedBox> pred_tracks() const
  {
    std::vector<TrackedBox> out;
    for (const auto& f : frames)
      for (const auto& t : f.tracks)
        out.push_back({f.index, t.id, t.bbox});
    return out;
  }
};

/// Confirmed tracks that received a detection in this step, in id order.
inline std::vector<TrackRecord> associated_confirmed(const StepResult& r)
{
  std::vector<TrackId> ids;
  for (const auto& [id, j] : r.association.matched)
    ids.push_back(id);
  ids.insert(ids.end(), r.spawned.begin(), r.spawned.end());
  std::sort(ids.begin(), ids.end());

  std::vector<TrackRecord> out;
  for (const auto& t : r.world.tracks) {
    if (t.status != TrackStatus::confirmed || !std::binary_search(ids.begin(), ids.end(), t.id))
      continue;
    out.push_back({t.id, t.status, t.position.mean, t.bbox});
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  return out;
}

/// Runs pre-processing and the world model over every frame in order.
inline TracksFile run_tracking(const Sequence& seq, const PerceptionConfig& pcfg, const TrackerConfig& tcfg)
{
  pcfg.validate();
  TracksFile out;
  out.perception = pcfg;
  out.tracker = tcfg;
  WorldModel world(tcfg);
  for (const auto& frame : seq.frames) {
    const std::vector<Detection> dets =
        extract_detections(frame.detections, frame.pose, pcfg, out.stats, frame.height_step);
    StepResult r = step(std::move(world), dets);
    TrackFrame tf;
    tf.index = frame.index;
    tf.height_step = frame.height_step;
    tf.tracks = associated_confirmed(r);
    tf.confirmed_count = static_cast<long>(count(r.world));
    out.frames.push_back(std::move(tf));
    world = std::move(r.world);
  }
  out.final_count = static_cast<long>(count(world));
  return out;
}

/// Pairs a ground-truth sequence with tracker output for evaluation. Throws
/// std::invalid_argument when the frame indices do not line up.
inline SequenceEval make_sequence_eval(const Sequence& seq, const TracksFile& tracks)
{
  if (seq.frames.size() != tracks.frames.size())
    throw std::invalid_argument("frame count mismatch between tracks and ground truth");
  SequenceEval e;
  for (std::size_t i = 0; i < seq.frames.size(); ++i) {
    const auto& f = seq.frames[i];
    const auto& t = tracks.frames[i];
    if (f.index != t.index)
      throw std::invalid_argument("frame index mismatch between tracks and ground truth");
    e.frame_step[f.index] = f.height_step;
    e.predicted_count[t.index] = t.confirmed_count;
  }
  e.gt = seq.gt_tracks();
  e.pred = tracks.pred_tracks();
  return e;
}

}  // namespace fruitwm
