#pragma once

#include <map>
#include <string>
#include <utility>

#include "zoprox/core.hpp"
#include "zoprox/phase_retrieval.hpp"
#include "zoprox/smoothing.hpp"
#include "zoprox/solvers.hpp"
#include "zoprox/tuner.hpp"

namespace zoprox {

enum class ExperimentKind {
  PhaseRetrieval,
  SmoothingSweep,
  TunePoisson,
  TuneConvDiff,
  MoreauCheck,
};

ExperimentKind parse_experiment_kind(const std::string& name);
EstimatorKind parse_solver_name(const std::string& name);

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::PhaseRetrieval;
  std::vector<std::pair<int, int>> sizes;   // (d, m); empty -> per-experiment default
  int replicates = 15;
  std::uint64_t seed = 1;
  std::vector<std::string> solvers;         // empty -> all five
  std::string output_dir = "out";
  std::int64_t T_override = 0;              // 0 -> 2000 * m
  double mu = 5e-10;
  double mu1 = 5e-7;
  double mu2 = 5e-10;
  std::int64_t tuner_T = 0;                 // 0 -> 200 * 80
  std::int64_t k = 15;
  int holdout_draws = 40;
  int max_grid = 0;                         // 0 -> sampler defaults
  int workers = 0;                          // 0 -> hardware concurrency
  bool emit_svg = false;
};

struct AggregateSeries {
  std::string label;
  std::vector<std::int64_t> x_axis;
  std::vector<double> mean;
  std::vector<double> ci_low;
  std::vector<double> ci_high;
};

/// Pointwise mean and 95% normal CI over traces with a shared logging stride.
AggregateSeries aggregate(const std::vector<RunTrace>& traces, const std::string& label);

/// Raw material of one phase-retrieval benchmark size, kept around so callers
/// can compute their own statistics on top of the CSV output.
struct PhaseRunArtifacts {
  int d = 0;
  int m = 0;
  std::int64_t T = 0;
  std::vector<std::string> solvers;
  std::map<std::string, std::vector<RunTrace>> traces;           // per solver, per replicate
  std::vector<double> initial_objectives;                        // per replicate
  std::map<std::string, std::vector<double>> final_objectives;   // full objective at x_final
  std::map<std::string, std::vector<double>> returned_objectives;  // at x_{t*}
  std::vector<std::string> warnings;
};

PhaseRunArtifacts run_phase_retrieval(const ExperimentConfig& cfg, int d, int m);

struct ExperimentResult {
  std::vector<AggregateSeries> series;
  std::vector<std::string> files;
  std::vector<std::string> warnings;
};

ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// Small deterministic end-to-end batch used by `selftest`; writes CSVs and a
/// manifest under out_dir and returns the file list.
std::vector<std::string> run_selftest(const std::string& out_dir, std::uint64_t seed);

// ---- config files and output plumbing -------------------------------------------

/// key = value lines with optional [section] headers and # comments; flags on
/// the command line override file values.
ExperimentConfig parse_config_file(const std::string& path);
std::string canonical_config(const ExperimentConfig& cfg);
std::uint64_t config_hash(const ExperimentConfig& cfg);

void ensure_directory(const std::string& path);
void write_series_csv(const AggregateSeries& series, const std::string& path);
void write_series_svg(const std::vector<AggregateSeries>& series, const std::string& path);
void write_manifest(const std::string& path, const ExperimentConfig& cfg,
                    const std::vector<std::string>& files);

}  // namespace zoprox
