#pragma once

#include "fruitwm/assignment.hpp"
#include "fruitwm/geometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <tuple>
#include <utility>
#include <vector>

namespace fruitwm {

// ---------------------------------------------------------------------------
// Counting
// ---------------------------------------------------------------------------

namespace detail {

inline void check_count_samples(std::span<const double> actuals, std::span<const double> predictions)
{
  if (actuals.size() != predictions.size())
    throw std::invalid_argument("actuals and predictions differ in length");
  if (actuals.empty())
    throw std::invalid_argument("no samples");
  for (const double a : actuals)
    if (a == 0.0)
      throw std::invalid_argument("undefined relative error");
}

}  // namespace detail

/// Mean percentage error, 100/n * sum (A - P) / A. Negative means over-counting.
inline double mpe(std::span<const double> actuals, std::span<const double> predictions)
{
  detail::check_count_samples(actuals, predictions);
  double acc = 0.0;
  for (std::size_t i = 0; i < actuals.size(); ++i)
    acc += (actuals[i] - predictions[i]) / actuals[i];
  return 100.0 * acc / static_cast<double>(actuals.size());
}

/// Mean absolute percentage error, 100/n * sum |A - P| / A.
inline double mape(std::span<const double> actuals, std::span<const double> predictions)
{
  detail::check_count_samples(actuals, predictions);
  double acc = 0.0;
  for (std::size_t i = 0; i < actuals.size(); ++i)
    acc += std::abs(actuals[i] - predictions[i]) / std::abs(actuals[i]);
  return 100.0 * acc / static_cast<double>(actuals.size());
}

// ---------------------------------------------------------------------------
// Boxes over time
// ---------------------------------------------------------------------------

using ObjectId = std::int64_t;

struct TrackedBox
{
  int frame = 0;
  ObjectId id = 0;
  BBox2D bbox;

  bool operator==(const TrackedBox&) const = default;
};

struct PrecisionRecall
{
  std::optional<double> precision;
  std::optional<double> recall;
  long tp = 0;
  long fp = 0;
  long fn = 0;
};

namespace detail {

inline std::map<int, std::vector<const TrackedBox*>> group_by_frame(std::span<const TrackedBox> boxes)
{
  std::map<int, std::vector<const TrackedBox*>> out;
  for (const auto& b : boxes)
    out[b.frame].push_back(&b);
  return out;
}

}  // namespace detail

/// Detector precision/recall with per-frame greedy one-to-one matching by IoU.
inline PrecisionRecall detection_pr(std::span<const TrackedBox> gt, std::span<const TrackedBox> pred,
                                    double iou_threshold = 0.5)
{
  const auto gt_frames = detail::group_by_frame(gt);
  const auto pred_frames = detail::group_by_frame(pred);
  std::set<int> frames;
  for (const auto& [f, _] : gt_frames)
    frames.insert(f);
  for (const auto& [f, _] : pred_frames)
    frames.insert(f);

  PrecisionRecall pr;
  static const std::vector<const TrackedBox*> none;
  for (const int f : frames) {
    const auto git = gt_frames.find(f);
    const auto pit = pred_frames.find(f);
    const auto& g = git == gt_frames.end() ? none : git->second;
    const auto& p = pit == pred_frames.end() ? none : pit->second;

    std::vector<std::tuple<double, std::size_t, std::size_t>> cand;
    for (std::size_t i = 0; i < g.size(); ++i)
      for (std::size_t j = 0; j < p.size(); ++j) {
        const double iou = bbox_iou(g[i]->bbox, p[j]->bbox);
        if (iou >= iou_threshold)
          cand.emplace_back(iou, i, j);
      }
    std::sort(cand.begin(), cand.end(), [](const auto& a, const auto& b) {
      if (std::get<0>(a) != std::get<0>(b))
        return std::get<0>(a) > std::get<0>(b);
      return std::tie(std::get<1>(a), std::get<2>(a)) < std::tie(std::get<1>(b), std::get<2>(b));
    });
    std::vector<char> gt_used(g.size(), 0), pred_used(p.size(), 0);
    long tp = 0;
    for (const auto& [iou, i, j] : cand) {
      if (gt_used[i] || pred_used[j])
        continue;
      gt_used[i] = pred_used[j] = 1;
      ++tp;
    }
    pr.tp += tp;
    pr.fp += static_cast<long>(p.size()) - tp;
    pr.fn += static_cast<long>(g.size()) - tp;
  }
  if (pr.tp + pr.fp > 0)
    pr.precision = static_cast<double>(pr.tp) / static_cast<double>(pr.tp + pr.fp);
  if (pr.tp + pr.fn > 0)
    pr.recall = static_cast<double>(pr.tp) / static_cast<double>(pr.tp + pr.fn);
  return pr;
}

// ---------------------------------------------------------------------------
// HOTA
// ---------------------------------------------------------------------------

struct TpMatch
{
  int frame = 0;
  ObjectId gt_id = 0;
  ObjectId pred_id = 0;
  double iou = 0.0;
};

struct FrameMatchSet
{
  double alpha = 0.5;
  std::vector<TpMatch> tps;
  std::vector<TrackedBox> fps;
  std::vector<TrackedBox> fns;
};

/// Secondary matching weight for a candidate (gt, pred) pair that already
/// passes the IoU threshold. The default prefers higher IoU; a matcher that
/// re-weights by association scores can be supplied instead.
using MatchWeightFn = std::function<double(const TrackedBox& gt, const TrackedBox& pred, double iou)>;

inline double iou_match_weight(const TrackedBox&, const TrackedBox&, double iou) { return iou; }

/// Per-frame optimal one-to-one matching among pairs with IoU >= alpha:
/// maximal number of matches first, maximal total weight second.
inline FrameMatchSet match_frames(std::span<const TrackedBox> gt, std::span<const TrackedBox> pred, double alpha,
                                  const MatchWeightFn& weight = iou_match_weight)
{
  FrameMatchSet out;
  out.alpha = alpha;
  const auto gt_frames = detail::group_by_frame(gt);
  const auto pred_frames = detail::group_by_frame(pred);
  std::set<int> frames;
  for (const auto& [f, _] : gt_frames)
    frames.insert(f);
  for (const auto& [f, _] : pred_frames)
    frames.insert(f);

  static const std::vector<const TrackedBox*> none;
  for (const int f : frames) {
    const auto git = gt_frames.find(f);
    const auto pit = pred_frames.find(f);
    const auto& g = git == gt_frames.end() ? none : git->second;
    const auto& p = pit == pred_frames.end() ? none : pit->second;

    Eigen::MatrixXd iou(static_cast<Eigen::Index>(g.size()), static_cast<Eigen::Index>(p.size()));
    Eigen::MatrixXd cost(iou.rows(), iou.cols());
    for (std::size_t i = 0; i < g.size(); ++i)
      for (std::size_t j = 0; j < p.size(); ++j) {
        const double v = bbox_iou(g[i]->bbox, p[j]->bbox);
        iou(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
        cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = -weight(*g[i], *p[j], v);
      }
    const Assignment a = solve_assignment_if(cost, [&](std::size_t i, std::size_t j, double) {
      return iou(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) >= alpha;
    });
    for (const auto& [i, j] : a.pairs)
      out.tps.push_back({f, g[i]->id, p[j]->id, iou(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))});
    for (const std::size_t i : a.unmatched_rows)
      out.fns.push_back(*g[i]);
    for (const std::size_t j : a.unmatched_cols)
      out.fps.push_back(*p[j]);
  }
  return out;
}

struct HotaAlpha
{
  double alpha = 0.0;
  std::optional<double> loca;
  std::optional<double> deta;
  std::optional<double> assa;
  std::optional<double> hota;
  long tp = 0;
  long fp = 0;
  long fn = 0;
};

/// Association score of every TP match, in FrameMatchSet::tps order:
/// |TPA| / (|TPA| + |FNA| + |FPA|) with |FNA| = |gt track| - |TPA| and
/// |FPA| = |pred track| - |TPA|.
inline std::vector<double> association_scores(const FrameMatchSet& m, std::span<const TrackedBox> gt,
                                              std::span<const TrackedBox> pred)
{
  std::map<ObjectId, long> gt_len, pred_len;
  for (const auto& b : gt)
    ++gt_len[b.id];
  for (const auto& b : pred)
    ++pred_len[b.id];
  std::map<std::pair<ObjectId, ObjectId>, long> pair_count;
  for (const auto& c : m.tps)
    ++pair_count[{c.gt_id, c.pred_id}];

  std::vector<double> scores;
  scores.reserve(m.tps.size());
  for (const auto& c : m.tps) {
    const long tpa = pair_count[{c.gt_id, c.pred_id}];
    const long fna = gt_len[c.gt_id] - tpa;
    const long fpa = pred_len[c.pred_id] - tpa;
    scores.push_back(static_cast<double>(tpa) / static_cast<double>(tpa + fna + fpa));
  }
  return scores;
}

namespace detail {

inline double sorted_sum(std::vector<double> v)
{
  std::sort(v.begin(), v.end());
  double acc = 0.0;
  for (const double x : v)
    acc += x;
  return acc;
}

}  // namespace detail

inline HotaAlpha hota_from_matches(const FrameMatchSet& m, std::span<const TrackedBox> gt,
                                   std::span<const TrackedBox> pred)
{
  HotaAlpha r;
  r.alpha = m.alpha;
  r.tp = static_cast<long>(m.tps.size());
  r.fp = static_cast<long>(m.fps.size());
  r.fn = static_cast<long>(m.fns.size());
  const long denom = r.tp + r.fn + r.fp;
  if (denom == 0)
    return r;

  r.deta = static_cast<double>(r.tp) / static_cast<double>(denom);
  if (r.tp == 0) {
    r.hota = 0.0;
    return r;
  }
  // Sums run over sorted values so results do not depend on input order.
  std::vector<double> ious;
  ious.reserve(m.tps.size());
  for (const auto& c : m.tps)
    ious.push_back(c.iou);
  r.loca = detail::sorted_sum(std::move(ious)) / static_cast<double>(r.tp);
  r.assa = detail::sorted_sum(association_scores(m, gt, pred)) / static_cast<double>(r.tp);
  r.hota = std::sqrt(*r.deta * *r.assa);
  return r;
}

/// LocA, DetA, AssA and HOTA at one IoU threshold.
inline HotaAlpha hota_alpha(std::span<const TrackedBox> gt, std::span<const TrackedBox> pred, double alpha,
                            const MatchWeightFn& weight = iou_match_weight)
{
  return hota_from_matches(match_frames(gt, pred, alpha, weight), gt, pred);
}

inline constexpr int kAlphaCount = 19;

/// 0.05, 0.10, ..., 0.95.
inline std::array<double, kAlphaCount> hota_alphas()
{
  std::array<double, kAlphaCount> a{};
  for (int i = 0; i < kAlphaCount; ++i)
    a[static_cast<std::size_t>(i)] = 0.05 * (i + 1);
  return a;
}

struct EvalReport
{
  std::optional<double> mpe;
  std::optional<double> mape;
  std::optional<double> hota;
  std::optional<double> deta;
  std::optional<double> assa;
  std::optional<double> loca;
  std::vector<HotaAlpha> per_alpha;
};

/// HOTA family averaged over the 19 thresholds. Within an average, a
/// threshold with detections but no TPs contributes 0 to AssA and LocA; the
/// averages are absent only when both inputs are empty.
inline EvalReport hota(std::span<const TrackedBox> gt, std::span<const TrackedBox> pred,
                       const MatchWeightFn& weight = iou_match_weight)
{
  EvalReport rep;
  for (const double a : hota_alphas())
    rep.per_alpha.push_back(hota_alpha(gt, pred, a, weight));

  if (gt.empty() && pred.empty())
    return rep;
  double h = 0.0, d = 0.0, s = 0.0, l = 0.0;
  for (const auto& r : rep.per_alpha) {
    h += r.hota.value_or(0.0);
    d += r.deta.value_or(0.0);
    s += r.assa.value_or(0.0);
    l += r.loca.value_or(0.0);
  }
  rep.hota = h / kAlphaCount;
  rep.deta = d / kAlphaCount;
  rep.assa = s / kAlphaCount;
  rep.loca = l / kAlphaCount;
  return rep;
}

// ---------------------------------------------------------------------------
// Cumulative per-height-step evaluation
// ---------------------------------------------------------------------------

/// Everything needed to evaluate one tracked sequence.
struct SequenceEval
{
  std::map<int, int> frame_step;             // frame index -> height step
  std::map<int, long> predicted_count;       // frame index -> confirmed tracks after that frame
  std::vector<TrackedBox> gt;
  std::vector<TrackedBox> pred;
};

struct CumulativeRow
{
  int height_step = 0;
  int sequences = 0;
  double actual_count = 0.0;     // mean over sequences
  double predicted_count = 0.0;  // mean over sequences
  std::optional<double> mpe;
  std::optional<double> mape;
  std::optional<double> hota;
  std::optional<double> deta;
  std::optional<double> assa;
  std::optional<double> loca;
  std::vector<HotaAlpha> per_alpha;  // filled for single-sequence reports
};

/// Metrics of one sequence evaluated on frames up to and including `last_frame`.
struct CutoffSample
{
  double actual = 0.0;
  double predicted = 0.0;
  EvalReport report;
};

inline CutoffSample evaluate_cutoff(const SequenceEval& seq, int last_frame,
                                    const MatchWeightFn& weight = iou_match_weight)
{
  CutoffSample s;
  std::vector<TrackedBox> gt, pred;
  std::set<ObjectId> seen;
  for (const auto& b : seq.gt)
    if (b.frame <= last_frame) {
      gt.push_back(b);
      seen.insert(b.id);
    }
  for (const auto& b : seq.pred)
    if (b.frame <= last_frame)
      pred.push_back(b);
  s.actual = static_cast<double>(seen.size());
  auto it = seq.predicted_count.upper_bound(last_frame);
  s.predicted = it == seq.predicted_count.begin() ? 0.0 : static_cast<double>(std::prev(it)->second);
  s.report = hota(gt, pred, weight);
  return s;
}

namespace detail {

inline std::optional<double> mean_of(const std::vector<double>& v)
{
  if (v.empty())
    return std::nullopt;
  double acc = 0.0;
  for (const double x : v)
    acc += x;
  return acc / static_cast<double>(v.size());
}

}  // namespace detail

/// Cumulative table: for each height step h, every metric on frames from the
/// first up to the last frame of step h, averaged over sequences. Counting
/// errors use one (sequence, step) sample per sequence; sequences that have
/// seen no fruit yet are left out of MPE/MAPE.
inline std::vector<CumulativeRow> cumulative_report(std::span<const SequenceEval> sequences,
                                                    const MatchWeightFn& weight = iou_match_weight)
{
  std::set<int> steps;
  for (const auto& s : sequences)
    for (const auto& [f, h] : s.frame_step)
      steps.insert(h);

  std::vector<CumulativeRow> rows;
  for (const int h : steps) {
    CumulativeRow row;
    row.height_step = h;
    std::vector<double> actual, predicted, hv, dv, av, lv;
    double actual_sum = 0.0, pred_sum = 0.0;
    for (const auto& s : sequences) {
      int last = -1;
      bool has = false;
      for (const auto& [f, step] : s.frame_step)
        if (step == h) {
          last = std::max(last, f);
          has = true;
        }
      if (!has)
        continue;
      const CutoffSample c = evaluate_cutoff(s, last, weight);
      ++row.sequences;
      actual_sum += c.actual;
      pred_sum += c.predicted;
      if (c.actual > 0.0) {
        actual.push_back(c.actual);
        predicted.push_back(c.predicted);
      }
      if (c.report.hota) {
        hv.push_back(*c.report.hota);
        dv.push_back(*c.report.deta);
        av.push_back(*c.report.assa);
        lv.push_back(*c.report.loca);
      }
      if (sequences.size() == 1)
        row.per_alpha = c.report.per_alpha;
    }
    if (row.sequences > 0) {
      row.actual_count = actual_sum / row.sequences;
      row.predicted_count = pred_sum / row.sequences;
    }
    if (!actual.empty()) {
      row.mpe = mpe(actual, predicted);
      row.mape = mape(actual, predicted);
    }
    row.hota = detail::mean_of(hv);
    row.deta = detail::mean_of(dv);
    row.assa = detail::mean_of(av);
    row.loca = detail::mean_of(lv);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace fruitwm
