#pragma once

// Command-line driver: simulate | track | evaluate | sweep.
//
// Exit codes: 0 success, 2 configuration/usage error, 3 I/O or parse error,
// 4 internal invariant violation.

#include "fruitwm/io.hpp"
#include "fruitwm/pipeline.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <future>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace fruitwm {

enum ExitCode : int { kExitOk = 0, kExitConfig = 2, kExitIo = 3, kExitInternal = 4 };

struct CliOptions
{
  std::string config_path;
  std::uint64_t seed = 1;
  std::string out;
  std::optional<int> heights;
  std::optional<int> viewpoints;
  std::optional<int> fruits;

  std::string in;
  std::vector<std::string> inputs;
  std::optional<int> n_init;
  std::optional<double> gate;
  std::optional<double> confidence;
  std::vector<int> n_init_grid{0, 1};
  std::vector<double> confidence_grid{0.5, 0.7};

  std::string tracks;
  std::string gt;
};

namespace detail {

inline RunConfig load_run_config(const CliOptions& o)
{
  RunConfig cfg;
  if (!o.config_path.empty()) {
    json j;
    try {
      j = read_json_file(o.config_path);
    } catch (const ParseError& e) {
      throw ConfigError(e.what());
    }
    cfg = run_config_from_json(j);
  }
  if (o.heights)
    cfg.scenario.heights = *o.heights;
  if (o.viewpoints)
    cfg.scenario.viewpoints_per_height = *o.viewpoints;
  if (o.fruits) {
    cfg.scenario.num_fruits = *o.fruits;
    cfg.scenario.truss_sizes.clear();
  }
  if (o.n_init)
    cfg.tracker.n_init = *o.n_init;
  if (o.gate)
    cfg.tracker.gate = *o.gate;
  if (o.confidence)
    cfg.perception.confidence_threshold = *o.confidence;
  cfg.validate();
  return cfg;
}

inline Sequence load_sequence(const std::string& path)
{
  try {
    return sequence_from_json(read_json_file(path));
  } catch (const json::exception& e) {
    throw ParseError("'" + path + "': " + e.what());
  }
}

inline TracksFile load_tracks(const std::string& path)
{
  try {
    return tracks_from_json(read_json_file(path));
  } catch (const json::exception& e) {
    throw ParseError("'" + path + "': " + e.what());
  }
}

inline std::string format_number(double v)
{
  std::ostringstream os;
  os << v;
  return os.str();
}

inline std::vector<CumulativeRow> evaluate_pair(const Sequence& seq, const TracksFile& tracks)
{
  SequenceEval e;
  try {
    e = make_sequence_eval(seq, tracks);
  } catch (const std::invalid_argument& ex) {
    throw ParseError(ex.what());
  }
  return cumulative_report(std::span<const SequenceEval>(&e, 1));
}

}  // namespace detail

inline int cmd_simulate(const CliOptions& o, std::ostream& out)
{
  const RunConfig cfg = detail::load_run_config(o);
  Sequence seq;
  try {
    seq = simulate_sequence(cfg.scenario, o.seed);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  write_json_file(o.out, to_json(seq));
  out << "wrote " << seq.frames.size() << " frames, " << seq.fruits.size() << " fruits to " << o.out << '\n';
  return kExitOk;
}

inline int cmd_track(const CliOptions& o, std::ostream& out)
{
  const RunConfig cfg = detail::load_run_config(o);
  const Sequence seq = detail::load_sequence(o.in);
  const TracksFile tracks = run_tracking(seq, cfg.perception, cfg.tracker);
  write_json_file(o.out, to_json(tracks));
  out << "final count: " << tracks.final_count << '\n' << format_stats_table(tracks.stats);
  return kExitOk;
}

inline int cmd_evaluate(const CliOptions& o, std::ostream& out)
{
  const Sequence seq = detail::load_sequence(o.gt);
  const TracksFile tracks = detail::load_tracks(o.tracks);
  ReportFile rep;
  rep.rows = detail::evaluate_pair(seq, tracks);
  rep.meta = {{"tracks", o.tracks}, {"gt", o.gt}};
  write_json_file(o.out, to_json(rep));
  out << format_report_table(rep.rows);
  return kExitOk;
}

struct SweepCell
{
  int n_init = 0;
  double confidence = 0.5;
  std::vector<SequenceEval> sequences;
};

inline int cmd_sweep(const CliOptions& o, std::ostream& out)
{
  const RunConfig base = detail::load_run_config(o);
  if (o.inputs.empty())
    throw ConfigError("sweep needs at least one --in sequence");
  std::vector<Sequence> seqs;
  for (const auto& p : o.inputs)
    seqs.push_back(detail::load_sequence(p));

  std::error_code ec;
  std::filesystem::create_directories(o.out, ec);
  if (ec)
    throw ParseError("cannot create '" + o.out + "': " + ec.message());

  struct Job
  {
    std::size_t seq;
    int n_init;
    double confidence;
  };
  std::vector<Job> jobs;
  for (const int n : o.n_init_grid)
    for (const double c : o.confidence_grid)
      for (std::size_t s = 0; s < seqs.size(); ++s)
        jobs.push_back({s, n, c});

  // Cells are independent; results are collected in job order.
  std::vector<std::future<SequenceEval>> futures;
  for (const auto& job : jobs) {
    RunConfig cfg = base;
    cfg.tracker.n_init = job.n_init;
    cfg.perception.confidence_threshold = job.confidence;
    cfg.validate();
    futures.push_back(std::async(std::launch::async, [&seqs, cfg, job] {
      const TracksFile t = run_tracking(seqs[job.seq], cfg.perception, cfg.tracker);
      return make_sequence_eval(seqs[job.seq], t);
    }));
  }

  json cells = json::array();
  std::vector<std::pair<std::pair<int, double>, std::vector<CumulativeRow>>> aggregate;
  std::size_t k = 0;
  for (const int n : o.n_init_grid)
    for (const double c : o.confidence_grid) {
      std::vector<SequenceEval> evals;
      for (std::size_t s = 0; s < seqs.size(); ++s, ++k) {
        evals.push_back(futures[k].get());
        ReportFile rep;
        rep.rows = cumulative_report(std::span<const SequenceEval>(&evals.back(), 1));
        rep.meta = {{"sequence", o.inputs[s]}, {"n_init", n}, {"confidence", c}};
        const std::string stem = std::filesystem::path(o.inputs[s]).stem().string();
        const std::string name = stem + "__ninit" + std::to_string(n) + "__conf" + detail::format_number(c) + ".json";
        write_json_file((std::filesystem::path(o.out) / name).string(), to_json(rep));
      }
      const std::vector<CumulativeRow> rows = cumulative_report(evals);
      json jrows = json::array();
      for (const auto& r : rows)
        jrows.push_back(to_json(r));
      cells.push_back({{"n_init", n}, {"confidence", c}, {"sequences", seqs.size()}, {"rows", jrows}});
      aggregate.push_back({{n, c}, rows});
    }

  write_json_file((std::filesystem::path(o.out) / "aggregate.json").string(),
                  json{{"version", kFormatVersion}, {"inputs", o.inputs}, {"cells", cells}});
  std::ostringstream table;
  for (const auto& [key, rows] : aggregate)
    table << "n_init=" << key.first << " confidence=" << detail::format_number(key.second) << '\n'
          << format_report_table(rows) << '\n';
  write_text_file((std::filesystem::path(o.out) / "aggregate.txt").string(), table.str());
  out << table.str();
  return kExitOk;
}

/// Parses argv and runs one subcommand; returns the process exit code.
inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr)
{
  CLI::App app{"Multi-view fruit world model: simulate, track, evaluate, sweep"};
  app.require_subcommand(1);
  CliOptions o;

  auto* sim = app.add_subcommand("simulate", "Generate a synthetic sequence file");
  sim->add_option("--config", o.config_path, "JSON run config");
  sim->add_option("--seed", o.seed, "Random seed");
  sim->add_option("--out", o.out, "Output sequence file")->required();
  sim->add_option("--heights", o.heights, "Number of height levels");
  sim->add_option("--viewpoints", o.viewpoints, "Viewpoints per height level");
  sim->add_option("--fruits", o.fruits, "Number of fruits");

  auto* trk = app.add_subcommand("track", "Run pre-processing and tracking over a sequence");
  trk->add_option("--in", o.in, "Input sequence file")->required();
  trk->add_option("--config", o.config_path, "JSON run config");
  trk->add_option("--n-init", o.n_init, "Frames a new track stays tentative");
  trk->add_option("--gate", o.gate, "Squared Mahalanobis gate");
  trk->add_option("--confidence", o.confidence, "Detection confidence threshold");
  trk->add_option("--out", o.out, "Output tracks file")->required();

  auto* ev = app.add_subcommand("evaluate", "Counting and HOTA metrics per cumulative height step");
  ev->add_option("--tracks", o.tracks, "Tracks file")->required();
  ev->add_option("--gt", o.gt, "Ground-truth sequence file")->required();
  ev->add_option("--out", o.out, "Output report (JSON)")->required();

  auto* sw = app.add_subcommand("sweep", "Evaluate a (n_init x confidence) grid over sequences");
  sw->add_option("--in", o.inputs, "Input sequence files")->required();
  sw->add_option("--config", o.config_path, "JSON run config");
  sw->add_option("--gate", o.gate, "Squared Mahalanobis gate");
  sw->add_option("--n-init", o.n_init_grid, "n_init values");
  sw->add_option("--confidence", o.confidence_grid, "Confidence thresholds");
  sw->add_option("--out", o.out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }

  try {
    if (sim->parsed())
      return cmd_simulate(o, out);
    if (trk->parsed())
      return cmd_track(o, out);
    if (ev->parsed())
      return cmd_evaluate(o, out);
    if (sw->parsed())
      return cmd_sweep(o, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ParseError& e) {
    err << "i/o error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitInternal;
}

}  // namespace fruitwm
