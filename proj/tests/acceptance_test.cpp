// Acceptance gate: one PASS/FAIL line per criterion, non-zero exit on any FAIL.

#include "fruitwm/cli.hpp"
#include "fruitwm/fruitwm.hpp"
#include "test_support.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace fruitwm;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0)
{
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

/// Outcome of one criterion: pass flag plus a short measured summary.
struct Outcome
{
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& why)
  {
    if (!ok && pass) {
      pass = false;
      detail = why;
    }
  }
};

std::string fmt(double v, int precision = 6)
{
  std::ostringstream os;
  os.precision(precision);
  os << v;
  return os.str();
}

constexpr double kInf = std::numeric_limits<double>::infinity();

// 1 -------------------------------------------------------------------------
Outcome assignment_oracle()
{
  Outcome o;
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> dim(1, 7);
  std::uniform_real_distribution<double> val(0.0, 100.0);
  std::vector<Eigen::MatrixXd> cases;
  for (int t = 0; t < 500; ++t) {
    Eigen::MatrixXd c(dim(rng), dim(rng));
    for (Eigen::Index k = 0; k < c.size(); ++k)
      c(k) = val(rng);
    cases.push_back(std::move(c));
  }
  const auto t0 = Clock::now();
  std::vector<double> got;
  for (const auto& c : cases)
    got.push_back(assignment_cost(c, solve_assignment(c, kInf)));
  const double elapsed = seconds_since(t0);
  int non_square = 0;
  for (std::size_t t = 0; t < cases.size(); ++t) {
    non_square += cases[t].rows() != cases[t].cols() ? 1 : 0;
    const double want = oracle::brute_force_full_assignment(cases[t]);
    o.require(std::abs(got[t] - want) <= 1e-9 * (1.0 + std::abs(want)),
              "case " + std::to_string(t) + ": " + fmt(got[t], 17) + " vs " + fmt(want, 17));
  }
  o.require(elapsed < 5.0, "runtime " + fmt(elapsed) + " s");
  if (o.pass)
    o.detail = "500/500 equal to exhaustive minimum (" + std::to_string(non_square) + " non-square), " +
               fmt(elapsed * 1e3, 3) + " ms";
  return o;
}

// 2 -------------------------------------------------------------------------
Outcome gate_semantics()
{
  Outcome o;
  TrackerConfig cfg;
  cfg.process_noise = 0.0;
  std::vector<std::size_t> matched;
  for (const double d2 : {7.81, 7.83}) {
    WorldModel w(cfg);
    Track t;
    t.id = 0;
    t.status = TrackStatus::confirmed;
    t.consecutive_hits = 1;
    t.position = {Vec3::Zero(), Mat3::Identity()};
    w.tracks.push_back(t);
    w.next_id = 1;
    Detection d;
    d.position = {Vec3(std::sqrt(d2), 0.0, 0.0), Mat3::Identity()};
    const double cost = build_cost_matrix(predict(w).tracks, std::vector{d})(0, 0);
    o.require(std::abs(cost - d2) < 1e-12, "cost " + fmt(cost, 17) + " for " + fmt(d2));
    matched.push_back(step(w, std::vector{d}).association.matched.size());
  }
  o.require(matched[0] == 1, "7.81 not matched");
  o.require(matched[1] == 0, "7.83 matched");
  if (o.pass)
    o.detail = "7.81 matched, 7.83 rejected (gate 7.82)";
  return o;
}

// 3 -------------------------------------------------------------------------
Outcome sphere_fit_exactness()
{
  Outcome o;
  std::mt19937_64 rng(33);
  std::uniform_real_distribution<double> r_dist(0.01, 0.05), c_dist(-1.0, 1.0);
  std::uniform_int_distribution<int> n_dist(10, 120);
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const Vec3 c(c_dist(rng), c_dist(rng), 0.3 + std::abs(c_dist(rng)));
    const double r = r_dist(rng);
    const auto pts = oracle::sphere_samples(rng, c, r, n_dist(rng));
    const SphereFit f = fit_sphere(pts);
    o.require(f.valid_geometry, "case " + std::to_string(t) + " flagged degenerate");
    worst = std::max({worst, (f.center - c).norm(), std::abs(f.radius - r)});
  }
  o.require(worst < 1e-9, "max error " + fmt(worst));

  const std::vector<Vec3> three{{0.1, 0.2, 0.5}, {0.11, 0.2, 0.5}, {0.1, 0.23, 0.52}};
  const std::vector<Vec3> line{{0, 0, 0.4}, {0.01, 0.01, 0.41}, {0.02, 0.02, 0.42}, {0.03, 0.03, 0.43},
                               {0.05, 0.05, 0.45}};
  for (const auto* pts : {&three, &line}) {
    try {
      const SphereFit f = fit_sphere(*pts);
      o.require(!f.valid_geometry && (f.center - centroid(*pts)).norm() < 1e-15,
                "degenerate input did not fall back to the centroid");
    } catch (const std::exception& e) {
      o.require(false, std::string("degenerate input threw: ") + e.what());
    }
  }
  if (o.pass)
    o.detail = "max centre/radius error " + fmt(worst, 3) + " m over 1000 spheres; 3-point and collinear fall back";
  return o;
}

// 4 -------------------------------------------------------------------------
std::vector<TrackedBox> random_gt(std::mt19937_64& rng)
{
  std::uniform_int_distribution<int> frames(1, 12), ids(1, 6);
  std::uniform_real_distribution<double> u(0.0, 1.0), pos(0.0, 80.0), size(6.0, 25.0);
  std::vector<TrackedBox> out;
  const int F = frames(rng), N = ids(rng);
  for (int f = 0; f < F; ++f)
    for (int id = 0; id < N; ++id)
      if (u(rng) < 0.7)
        out.push_back({f, id, {pos(rng), pos(rng), size(rng), size(rng)}});
  return out;
}

std::vector<TrackedBox> noisy_pred(std::mt19937_64& rng, const std::vector<TrackedBox>& gt)
{
  std::normal_distribution<double> n(0.0, 2.5);
  std::uniform_real_distribution<double> u(0.0, 1.0), pos(0.0, 80.0);
  std::vector<TrackedBox> out;
  for (auto b : gt) {
    if (u(rng) < 0.15)
      continue;
    b.bbox.x += n(rng);
    b.bbox.y += n(rng);
    b.bbox.w = std::max(1.0, b.bbox.w + n(rng));
    if (u(rng) < 0.25)
      b.id += 10;
    out.push_back(b);
  }
  const int extra = static_cast<int>(u(rng) * 4);
  for (int k = 0; k < extra; ++k)
    out.push_back({static_cast<int>(u(rng) * 10), 50 + k, {pos(rng), pos(rng), 12, 12}});
  return out;
}

bool same_alpha(const HotaAlpha& a, const HotaAlpha& b)
{
  return a.tp == b.tp && a.fp == b.fp && a.fn == b.fn && a.loca == b.loca && a.deta == b.deta && a.assa == b.assa &&
         a.hota == b.hota;
}

Outcome hota_identities()
{
  Outcome o;
  std::mt19937_64 rng(404);
  double worst = 0.0;
  for (int t = 0; t < 200; ++t) {
    const auto gt = random_gt(rng);
    const auto pred = noisy_pred(rng, gt);
    const EvalReport rep = hota(gt, pred);
    for (const auto& a : rep.per_alpha) {
      if (a.hota && a.assa)
        worst = std::max(worst, std::abs(*a.hota - std::sqrt(*a.deta * *a.assa)));
      for (const auto& v : {a.loca, a.deta, a.assa, a.hota})
        o.require(!v || (*v >= 0.0 && *v <= 1.0), "metric outside [0,1] in set " + std::to_string(t));
    }
    for (const auto& v : {rep.hota, rep.deta, rep.assa, rep.loca})
      o.require(!v || (*v >= 0.0 && *v <= 1.0), "average outside [0,1] in set " + std::to_string(t));

    // Relabel ids by bijections, remap frame labels by a permutation, and
    // shuffle record order.
    int max_frame = 0;
    for (const auto& b : gt)
      max_frame = std::max(max_frame, b.frame);
    for (const auto& b : pred)
      max_frame = std::max(max_frame, b.frame);
    std::vector<int> perm(static_cast<std::size_t>(max_frame + 1));
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    auto gt2 = gt;
    auto pred2 = pred;
    for (auto& b : gt2) {
      b.id = 977 - 13 * b.id;
      b.frame = perm[static_cast<std::size_t>(b.frame)];
    }
    for (auto& b : pred2) {
      b.id = 5 * b.id + 3;
      b.frame = perm[static_cast<std::size_t>(b.frame)];
    }
    std::shuffle(gt2.begin(), gt2.end(), rng);
    std::shuffle(pred2.begin(), pred2.end(), rng);
    const EvalReport rep2 = hota(gt2, pred2);
    bool same = rep.hota == rep2.hota && rep.deta == rep2.deta && rep.assa == rep2.assa && rep.loca == rep2.loca;
    for (std::size_t k = 0; k < rep.per_alpha.size(); ++k)
      same = same && same_alpha(rep.per_alpha[k], rep2.per_alpha[k]);
    o.require(same, "relabel/permutation changed metrics in set " + std::to_string(t));
  }
  o.require(worst <= 1e-12, "HOTA identity error " + fmt(worst));
  if (o.pass)
    o.detail = "200 sets, max |HOTA_a - sqrt(DetA*AssA)| = " + fmt(worst, 3) + ", invariances exact";
  return o;
}

// 5 -------------------------------------------------------------------------
Outcome hota_fixtures()
{
  Outcome o;
  std::mt19937_64 rng(5);
  const auto gt = random_gt(rng);
  auto perfect = gt;
  for (auto& b : perfect)
    b.id += 100;
  const EvalReport p = hota(gt, perfect);
  o.require(p.hota == 1.0, "perfect tracking HOTA " + fmt(p.hota.value_or(-1), 17));
  const EvalReport e = hota(gt, {});
  o.require(e.hota == 0.0, "empty predictions HOTA " + fmt(e.hota.value_or(-1)));

  // T = 10 id swap
  SequenceEval s;
  for (int f = 0; f < 10; ++f) {
    s.gt.push_back({f, 1, {0, 0, 20, 20}});
    s.gt.push_back({f, 2, {100, 0, 20, 20}});
    s.pred.push_back({f, f < 5 ? 7 : 8, {0, 0, 20, 20}});
    s.pred.push_back({f, f < 5 ? 8 : 7, {100, 0, 20, 20}});
    s.frame_step[f] = 1;
    s.predicted_count[f] = 2;
  }
  const auto rows = cumulative_report(std::span<const SequenceEval>(&s, 1));
  const CumulativeRow& r = rows.at(0);
  bool alpha_ok = true;
  for (const auto& a : r.per_alpha)
    alpha_ok = alpha_ok && a.deta == 1.0 && std::abs(*a.assa - 1.0 / 3.0) <= 1e-12;
  o.require(alpha_ok, "per-alpha DetA/AssA off");
  o.require(r.deta == 1.0, "DetA " + fmt(r.deta.value_or(-1), 17));
  o.require(std::abs(*r.assa - 1.0 / 3.0) <= 1e-12, "AssA " + fmt(*r.assa, 17));
  o.require(std::abs(*r.hota - 0.57735) <= 1e-5, "HOTA " + fmt(*r.hota, 17));
  o.require(r.mpe == 0.0 && r.mape == 0.0, "MPE/MAPE nonzero");
  if (o.pass)
    o.detail = "perfect 1, empty 0, id swap DetA 1 AssA " + fmt(*r.assa, 12) + " HOTA " + fmt(*r.hota, 6) +
               " MPE 0 MAPE 0";
  return o;
}

// 6 -------------------------------------------------------------------------
Outcome zero_noise_end_to_end()
{
  Outcome o;
  const auto t0 = Clock::now();
  const Sequence seq = simulate_sequence(ScenarioConfig::noiseless(8), 1);
  TrackerConfig tcfg;
  tcfg.n_init = 0;
  const TracksFile tracks = run_tracking(seq, PerceptionConfig{}, tcfg);
  const SequenceEval e = make_sequence_eval(seq, tracks);
  const auto rows = cumulative_report(std::span<const SequenceEval>(&e, 1));
  const double elapsed = seconds_since(t0);
  o.require(tracks.final_count == 8, "final count " + std::to_string(tracks.final_count));
  for (const auto& r : rows) {
    o.require(r.mape == 0.0, "step " + std::to_string(r.height_step) + " MAPE " + fmt(r.mape.value_or(-1)));
    o.require(r.hota == 1.0, "step " + std::to_string(r.height_step) + " HOTA " + fmt(r.hota.value_or(-1), 17));
  }
  o.require(rows.size() == 10, "expected 10 height steps");
  o.require(elapsed < 10.0, "runtime " + fmt(elapsed) + " s");
  if (o.pass)
    o.detail = "count 8, MAPE 0 and HOTA 1 at all 10 steps, " + fmt(elapsed, 3) + " s";
  return o;
}

// 7 and 8 share the noisy sequences ----------------------------------------
constexpr std::uint64_t kSeeds[] = {101, 102, 103, 104, 105, 106, 107};

std::vector<CumulativeRow> evaluate_all(const std::vector<Sequence>& seqs, int n_init, double confidence)
{
  PerceptionConfig pcfg;
  pcfg.confidence_threshold = confidence;
  TrackerConfig tcfg;
  tcfg.n_init = n_init;
  std::vector<SequenceEval> evals;
  for (const auto& s : seqs)
    evals.push_back(make_sequence_eval(s, run_tracking(s, pcfg, tcfg)));
  return cumulative_report(evals);
}

Outcome n_init_tradeoff()
{
  Outcome o;
  ScenarioConfig cfg;
  cfg.fp_rate = 0.3;
  std::vector<Sequence> seqs;
  for (const auto seed : kSeeds)
    seqs.push_back(simulate_sequence(cfg, seed));
  const auto r0 = evaluate_all(seqs, 0, 0.5).back();
  const auto r1 = evaluate_all(seqs, 1, 0.5).back();
  const auto again = evaluate_all(seqs, 1, 0.5).back();
  o.require(*r1.mape < *r0.mape, "MAPE n_init=1 " + fmt(*r1.mape) + " not below n_init=0 " + fmt(*r0.mape));
  o.require(*r0.hota >= *r1.hota - 0.05,
            "HOTA n_init=0 " + fmt(*r0.hota) + " below n_init=1 " + fmt(*r1.hota) + " - 0.05");
  o.require(again.mape == r1.mape && again.hota == r1.hota, "rerun not deterministic");
  if (o.pass)
    o.detail = "MAPE " + fmt(*r0.mape, 4) + "% -> " + fmt(*r1.mape, 4) + "%, HOTA " + fmt(*r0.hota, 4) + " vs " +
               fmt(*r1.hota, 4) + " (n_init 0 vs 1, 7 seeds)";
  return o;
}

Outcome height_degradation()
{
  Outcome o;
  ScenarioConfig cfg;
  cfg.num_fruits = 20;
  cfg.p_det_low = 0.95;
  cfg.p_det_high = 0.45;
  cfg.point_noise_low = 0.001;
  cfg.point_noise_high = 0.004;
  std::vector<Sequence> seqs;
  for (const auto seed : kSeeds)
    seqs.push_back(simulate_sequence(cfg, seed));

  // Raw detector recall per height step (IoU 0.5, every emitted detection).
  std::vector<double> recall;
  for (int h = 1; h <= cfg.heights; ++h) {
    std::vector<TrackedBox> gt, pred;
    for (std::size_t s = 0; s < seqs.size(); ++s)
      for (const auto& f : seqs[s].frames) {
        if (f.height_step != h)
          continue;
        const int frame = static_cast<int>(s) * 1000 + f.index;
        for (const auto& a : f.ground_truth)
          gt.push_back({frame, a.track_id, a.bbox});
        for (const auto& d : f.detections)
          pred.push_back({frame, 0, d.bbox});
      }
    recall.push_back(100.0 * detection_pr(gt, pred).recall.value_or(0.0));
  }
  int inversions = 0;
  double worst_rise = 0.0;
  for (std::size_t h = 1; h < recall.size(); ++h)
    if (recall[h] > recall[h - 1]) {
      ++inversions;
      worst_rise = std::max(worst_rise, recall[h] - recall[h - 1]);
    }
  o.require(inversions <= 1 && worst_rise <= 2.0,
            std::to_string(inversions) + " recall inversions, largest +" + fmt(worst_rise, 3) + " points");

  const auto rows = evaluate_all(seqs, 0, 0.5);
  o.require(*rows.back().hota < *rows.front().hota,
            "HOTA step 10 " + fmt(*rows.back().hota) + " not below step 1 " + fmt(*rows.front().hota));
  if (o.pass) {
    std::string curve;
    for (const double r : recall)
      curve += (curve.empty() ? "" : " ") + fmt(r, 3);
    o.detail = "recall% " + curve + "; HOTA " + fmt(*rows.front().hota, 4) + " -> " + fmt(*rows.back().hota, 4);
  }
  return o;
}

// 9 -------------------------------------------------------------------------
Outcome kalman_properties()
{
  Outcome o;
  std::mt19937_64 rng(9);
  std::normal_distribution<double> n(0.0, 0.01);
  Track t;
  t.position = {Vec3::Zero(), oracle::random_spd(rng, 1e-4)};
  double prev = t.position.cov.trace();
  for (int k = 0; k < 100; ++k) {
    Detection d;
    d.position = {Vec3(n(rng), n(rng), n(rng)), oracle::random_spd(rng, 1e-4)};
    t = kalman_update(t, d);
    const double tr = t.position.cov.trace();
    o.require(tr <= prev, "trace rose at update " + std::to_string(k));
    prev = tr;
  }

  // q = 0, identical measurements of covariance R through the full step loop;
  // the spawning detection is the first of the k measurements.
  const Mat3 R = Vec3(4e-6, 2.5e-5, 1e-5).asDiagonal();
  TrackerConfig cfg;
  cfg.process_noise = 0.0;
  Detection d;
  d.position = {Vec3(0.0, -0.6, 0.9), R};
  WorldModel w(cfg);
  for (int k = 0; k < 100; ++k)
    w = step(std::move(w), std::vector{d}).world;
  double rel = 0.0;
  if (w.tracks.size() != 1) {
    o.require(false, std::to_string(w.tracks.size()) + " tracks instead of 1");
  } else {
    const Mat3 target = R / 100.0;
    rel = (w.tracks[0].position.cov - target).norm() / target.norm();
    o.require(rel < 0.01, "relative error to R/100: " + fmt(rel));
  }
  // Same limit from a nearly uninformative prior.
  Track wide;
  wide.position = {Vec3::Zero(), 1e6 * R};
  for (int k = 0; k < 100; ++k)
    wide = kalman_update(wide, d);
  const double rel_wide = (wide.position.cov - R / 100.0).norm() / (R / 100.0).norm();
  o.require(rel_wide < 0.01, "relative error from wide prior: " + fmt(rel_wide));
  if (o.pass)
    o.detail = "trace monotone over 100 updates; |P - R/100|/|R/100| = " + fmt(rel, 3) + " (spawned), " +
               fmt(rel_wide, 3) + " (wide prior)";
  return o;
}

// 10 ------------------------------------------------------------------------
Outcome step_performance()
{
  Outcome o;
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> x(-0.15, 0.15), y(-0.75, -0.45), z(0.45, 1.95);
  std::normal_distribution<double> n(0.0, 0.002);
  WorldModel world(TrackerConfig{});
  for (int i = 0; i < 100; ++i) {
    Track t;
    t.id = i;
    t.status = TrackStatus::confirmed;
    t.consecutive_hits = 1;
    t.position = {Vec3(x(rng), y(rng), z(rng)), 2.5e-5 * Mat3::Identity()};
    world.tracks.push_back(t);
  }
  world.next_id = 100;
  std::vector<Detection> dets;
  for (int j = 0; j < 50; ++j) {
    Detection d;
    const Vec3 m = world.tracks[static_cast<std::size_t>(2 * j)].position.mean;
    d.position = {m + Vec3(n(rng), n(rng), n(rng)), 2.5e-5 * Mat3::Identity()};
    dets.push_back(d);
  }
  std::vector<double> ms;
  std::size_t matched = 0;
  for (int rep = 0; rep < 101; ++rep) {
    WorldModel copy = world;
    const auto t0 = Clock::now();
    const StepResult r = step(std::move(copy), dets);
    ms.push_back(seconds_since(t0) * 1e3);
    matched = r.association.matched.size();
  }
  std::nth_element(ms.begin(), ms.begin() + 50, ms.end());
  const double median = ms[50];
  o.require(median < 10.0, "median " + fmt(median) + " ms");
  o.require(matched == 50, "matched " + std::to_string(matched) + " of 50");
  if (o.pass)
    o.detail = "median " + fmt(median, 3) + " ms for 100 tracks x 50 detections";
  return o;
}

// 11 ------------------------------------------------------------------------
std::string slurp(const std::string& path)
{
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism_round_trip()
{
  Outcome o;
  ScenarioConfig scfg;
  scfg.heights = 3;
  scfg.fp_rate = 0.8;
  const Sequence seq = simulate_sequence(scfg, 11);

  const json js = to_json(seq);
  const Sequence seq2 = sequence_from_json(json::parse(dump(js)));
  o.require(seq2.frames == seq.frames && seq2.fruits == seq.fruits && seq2.seed == seq.seed &&
                dump(to_json(seq2)) == dump(js),
            "sequence round-trip differs");

  const TracksFile tracks = run_tracking(seq, {}, {});
  const TracksFile tracks2 = tracks_from_json(json::parse(dump(to_json(tracks))));
  o.require(tracks2.frames == tracks.frames && tracks2.stats == tracks.stats &&
                tracks2.final_count == tracks.final_count && dump(to_json(tracks2)) == dump(to_json(tracks)),
            "tracks round-trip differs");

  ReportFile rep;
  rep.rows = cumulative_report(std::vector{make_sequence_eval(seq, tracks)});
  const ReportFile rep2 = report_from_json(json::parse(dump(to_json(rep))));
  bool rows_equal = rep2.rows.size() == rep.rows.size();
  for (std::size_t k = 0; rows_equal && k < rep.rows.size(); ++k) {
    const auto& a = rep.rows[k];
    const auto& b = rep2.rows[k];
    rows_equal = a.height_step == b.height_step && a.actual_count == b.actual_count &&
                 a.predicted_count == b.predicted_count && a.mpe == b.mpe && a.mape == b.mape && a.hota == b.hota &&
                 a.deta == b.deta && a.assa == b.assa && a.loca == b.loca && a.per_alpha.size() == b.per_alpha.size();
    for (std::size_t i = 0; rows_equal && i < a.per_alpha.size(); ++i)
      rows_equal = same_alpha(a.per_alpha[i], b.per_alpha[i]) && a.per_alpha[i].alpha == b.per_alpha[i].alpha;
  }
  o.require(rows_equal && dump(to_json(rep2)) == dump(to_json(rep)), "report round-trip differs");

  RunConfig cfg;
  cfg.scenario.truss_sizes = {4, 5};
  cfg.tracker.n_init = 1;
  o.require(to_json(run_config_from_json(json::parse(dump(to_json(cfg))))) == to_json(cfg),
            "config round-trip differs");

  // Repeated track runs through the CLI.
  const auto dir = std::filesystem::temp_directory_path() / "fruitwm_acceptance";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  const std::string in = (dir / "seq.json").string();
  write_json_file(in, js);
  std::vector<std::string> outputs;
  for (int run = 0; run < 2; ++run) {
    const std::string out = (dir / ("tracks" + std::to_string(run) + ".json")).string();
    const char* argv[] = {"fruitwm", "track", "--in", in.c_str(), "--n-init", "1", "--out", out.c_str()};
    std::ostringstream sink;
    const int code = run_cli(8, argv, sink, sink);
    o.require(code == 0, "track exited with " + std::to_string(code));
    outputs.push_back(slurp(out));
  }
  o.require(!outputs[0].empty() && outputs[0] == outputs[1], "track outputs differ");
  std::filesystem::remove_all(dir);
  if (o.pass)
    o.detail = "sequence, tracks, report and config round-trip exactly; track reruns byte-identical (" +
               std::to_string(outputs[0].size()) + " bytes)";
  return o;
}

}  // namespace

int main()
{
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"assignment matches exhaustive oracle", assignment_oracle},
      {"gate semantics at 7.82", gate_semantics},
      {"sphere fit exactness and fallback", sphere_fit_exactness},
      {"HOTA identities and invariances", hota_identities},
      {"HOTA analytic fixtures", hota_fixtures},
      {"zero-noise end-to-end oracle", zero_noise_end_to_end},
      {"n_init trade-off trend", n_init_tradeoff},
      {"height degradation trend", height_degradation},
      {"Kalman properties", kalman_properties},
      {"world-model step performance", step_performance},
      {"determinism and round-trip", determinism_round_trip},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    failed += o.pass ? 0 : 1;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  " << (i + 1) << ". " << criteria[i].first << ": " << o.detail
              << std::endl;
  }
  std::cout << (criteria.size() - static_cast<std::size_t>(failed)) << "/" << criteria.size() << " criteria passed"
            << std::endl;
  return failed == 0 ? 0 : 1;
}
