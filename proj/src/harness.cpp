#include "zoprox/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <limits>
#include <sstream>
#include <thread>

#include "zoprox/prox.hpp"

namespace zoprox {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

int worker_count(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : int(hw);
}

template <typename Job>
void parallel_for(std::size_t count, int workers, Job&& job) {
  for (std::size_t begin = 0; begin < count; begin += std::size_t(workers)) {
    std::vector<std::future<void>> running;
    const std::size_t end = std::min(count, begin + std::size_t(workers));
    for (std::size_t i = begin; i < end; ++i)
      running.push_back(std::async(std::launch::async, job, i));
    for (auto& f : running) f.get();
  }
}

const std::vector<std::string>& all_solver_names() {
  static const std::vector<std::string> names = {"z-proxsg", "dsz-proxsg", "uniz-proxsg",
                                                 "spsa", "prox-ssg"};
  return names;
}

}  // namespace

ExperimentKind parse_experiment_kind(const std::string& name) {
  if (name == "phase_retrieval") return ExperimentKind::PhaseRetrieval;
  if (name == "smoothing_sweep") return ExperimentKind::SmoothingSweep;
  if (name == "tune_poisson") return ExperimentKind::TunePoisson;
  if (name == "tune_convdiff") return ExperimentKind::TuneConvDiff;
  if (name == "moreau_check") return ExperimentKind::MoreauCheck;
  throw std::invalid_argument("unknown experiment: " + name);
}

EstimatorKind parse_solver_name(const std::string& name) {
  if (name == "z-proxsg") return EstimatorKind::Gaussian;
  if (name == "dsz-proxsg") return EstimatorKind::DoubleGaussian;
  if (name == "uniz-proxsg") return EstimatorKind::Uniform;
  if (name == "spsa") return EstimatorKind::Spsa;
  if (name == "prox-ssg") return EstimatorKind::Subgradient;
  throw std::invalid_argument("unknown solver: " + name);
}

AggregateSeries aggregate(const std::vector<RunTrace>& traces, const std::string& label) {
  if (traces.empty()) throw std::invalid_argument("aggregate: no traces");
  const std::size_t len = traces.front().objectives.size();
  const std::int64_t stride = traces.front().stride;
  for (const RunTrace& t : traces)
    if (t.objectives.size() != len || t.stride != stride)
      throw std::invalid_argument("aggregate: mismatched logging strides");

  AggregateSeries s;
  s.label = label;
  s.x_axis = traces.front().log_iterations;
  s.mean.resize(len);
  s.ci_low.resize(len);
  s.ci_high.resize(len);
  const double n = double(traces.size());
  for (std::size_t i = 0; i < len; ++i) {
    double sum = 0.0;
    for (const RunTrace& t : traces) sum += t.objectives[i];
    const double mean = sum / n;
    double var = 0.0;
    if (traces.size() > 1) {
      for (const RunTrace& t : traces) {
        const double d = t.objectives[i] - mean;
        var += d * d;
      }
      var /= (n - 1.0);
    }
    const double half = 1.96 * std::sqrt(var / n);
    s.mean[i] = mean;
    s.ci_low[i] = mean - half;
    s.ci_high[i] = mean + half;
  }
  return s;
}

// ---- phase retrieval benchmark -----------------------------------------------------

namespace {

SolverConfig phase_solver_config(EstimatorKind kind, int d, std::int64_t T, double mu,
                                 double mu1, double mu2, std::uint64_t seed) {
  SolverConfig cfg;
  cfg.estimator = kind;
  cfg.T = T;
  const double root_T = std::sqrt(double(T));
  cfg.schedule = StepSchedule::constant(kind == EstimatorKind::Subgradient
                                            ? 1.0 / (2.0 * root_T)
                                            : 1.0 / (2.0 * double(d) * root_T));
  if (kind == EstimatorKind::DoubleGaussian) {
    cfg.smoothing.mu1 = mu1;
    cfg.smoothing.mu2 = mu2;
  } else {
    cfg.smoothing.mu = mu;
  }
  cfg.seed = seed;
  return cfg;
}

std::uint64_t size_label(int d, int m) { return std::uint64_t(d) * 1000003ull + std::uint64_t(m); }

}  // namespace

PhaseRunArtifacts run_phase_retrieval(const ExperimentConfig& cfg, int d, int m) {
  PhaseRunArtifacts art;
  art.d = d;
  art.m = m;
  art.T = cfg.T_override > 0 ? cfg.T_override : 2000 * std::int64_t(m);
  art.solvers = cfg.solvers.empty() ? all_solver_names() : cfg.solvers;

  struct ReplicateOut {
    std::map<std::string, RunTrace> traces;
    std::map<std::string, double> finals;
    std::map<std::string, double> returned;
    double initial = 0.0;
    std::vector<std::string> warnings;
  };
  std::vector<ReplicateOut> outs(std::size_t(cfg.replicates));

  RngStream master = make_stream(cfg.seed, size_label(d, m));
  auto job = [&](std::size_t r) {
    RngStream rep_stream = split_stream(master, std::uint64_t(r));
    RngStream inst_stream = split_stream(rep_stream, 0);
    RngStream seed_stream = split_stream(rep_stream, 1);
    const std::uint64_t solver_seed = seed_stream.next_u64();

    auto inst = std::make_shared<const PhaseRetrievalInstance>(
        generate_phase_retrieval(d, m, inst_stream));
    StochasticCompositeProblem problem = as_problem(inst);
    ReplicateOut& out = outs[r];
    out.initial = phase_objective(*inst, inst->start);
    for (const std::string& name : art.solvers) {
      SolverConfig sc = phase_solver_config(parse_solver_name(name), d, art.T, cfg.mu,
                                            cfg.mu1, cfg.mu2, solver_seed);
      RunTrace trace = run_solver(problem, inst->start, sc);
      if (trace.completed) {
        out.finals[name] = phase_objective(*inst, trace.final_iterate);
        out.returned[name] = phase_objective(*inst, trace.returned_iterate);
      } else {
        out.warnings.push_back("replicate " + std::to_string(r) + " solver " + name +
                               " failed: " + trace.error);
      }
      out.traces[name] = std::move(trace);
    }
  };
  parallel_for(std::size_t(cfg.replicates), worker_count(cfg.workers), job);

  for (int r = 0; r < cfg.replicates; ++r) {
    ReplicateOut& out = outs[std::size_t(r)];
    art.initial_objectives.push_back(out.initial);
    for (const std::string& name : art.solvers) {
      if (out.traces[name].completed) {
        art.traces[name].push_back(std::move(out.traces[name]));
        art.final_objectives[name].push_back(out.finals[name]);
        art.returned_objectives[name].push_back(out.returned[name]);
      }
    }
    art.warnings.insert(art.warnings.end(), out.warnings.begin(), out.warnings.end());
  }
  return art;
}

// ---- moreau battery ------------------------------------------------------------------

namespace {

struct MoreauRow {
  std::string name;
  double lambda = 0.0;
  double envelope = 0.0;
  double gradient_norm = 0.0;
  double identity_error = 0.0;
  double fixed_point_residual = 0.0;  // NaN when not applicable
};

DeterministicComposite abs_composite() {
  DeterministicComposite c;
  c.dim = 1;
  c.eval_f = [](const Vector&) { return 0.0; };
  c.grad_f = [](const Vector& x) { return Vector(x.size(), 0.0); };
  c.eval_r = [](const Vector& x) { return std::fabs(x[0]); };
  c.prox_r = [](const Vector& v, double step) {
    Vector w(1);
    const double a = std::fabs(v[0]) - step;
    w[0] = a > 0.0 ? std::copysign(a, v[0]) : 0.0;
    return w;
  };
  c.grad_smoothness = 0.0;  // smooth part is identically zero, known exactly
  return c;
}

std::vector<MoreauRow> moreau_battery() {
  std::vector<MoreauRow> rows;
  const double nan = std::numeric_limits<double>::quiet_NaN();

  auto push = [&](const std::string& name, const DeterministicComposite& comp,
                  const Vector& u, double rho_bar, double lemma_alpha) {
    MoreauDiagnostics diag = make_moreau_diagnostics(rho_bar);
    diag = moreau_prox(comp, u, diag);
    MoreauRow row;
    row.name = name;
    row.lambda = diag.lambda;
    row.envelope = diag.envelope_value;
    row.gradient_norm = diag.gradient_norm;
    row.identity_error =
        std::fabs(nrm2(vec_sub(u, diag.prox_point)) - diag.lambda * diag.gradient_norm);
    row.fixed_point_residual =
        lemma_alpha > 0.0
            ? auxiliary_fixed_point_residual(comp, u, lemma_alpha, make_moreau_diagnostics(rho_bar))
            : nan;
    rows.push_back(row);
  };

  DeterministicComposite huber = abs_composite();
  push("abs_u2", huber, Vector{2.0}, 1.0, 0.0);
  push("abs_u0", huber, Vector{0.0}, 1.0, 0.0);
  push("abs_u-3", huber, Vector{-3.0}, 1.0, 0.0);

  DeterministicComposite quad;
  quad.dim = 2;
  quad.eval_f = [](const Vector& x) { return 0.5 * dot(x, x); };
  quad.grad_f = [](const Vector& x) { return x; };
  quad.grad_smoothness = 1.0;
  push("half_sq_norm", quad, Vector{2.0, 0.0}, 1.0, 0.0);

  BoxQuadratic bq;
  DeterministicComposite comp = bq.composite();
  const double rho_bar = 2.0 * comp.weak_convexity_rho;
  RngStream stream = make_stream(20240601);
  for (int i = 0; i < 4; ++i) {
    Vector x{2.0 * stream.next_uniform() - 1.0, 2.0 * stream.next_uniform() - 1.0};
    push("box_quadratic_" + std::to_string(i), comp, x, rho_bar,
         (i % 2 == 0) ? 1.0 / rho_bar : 0.3 / rho_bar);
  }
  return rows;
}

void write_moreau_csv(const std::vector<MoreauRow>& rows, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("moreau_check: cannot open " + path);
  out << "case,lambda,envelope,gradient_norm,identity_error,fixed_point_residual\n";
  for (const MoreauRow& r : rows)
    out << r.name << "," << fmt(r.lambda) << "," << fmt(r.envelope) << ","
        << fmt(r.gradient_norm) << "," << fmt(r.identity_error) << ","
        << fmt(r.fixed_point_residual) << "\n";
}

}  // namespace

// ---- experiment driver ------------------------------------------------------------

namespace {

std::string join_path(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

void write_finals_csv(const PhaseRunArtifacts& art, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "solver,replicate,initial_objective,final_objective,returned_objective,t_star\n";
  for (const std::string& name : art.solvers) {
    auto it = art.traces.find(name);
    if (it == art.traces.end()) continue;
    for (std::size_t r = 0; r < it->second.size(); ++r)
      out << name << "," << r << "," << fmt(art.initial_objectives[r]) << ","
          << fmt(art.final_objectives.at(name)[r]) << ","
          << fmt(art.returned_objectives.at(name)[r]) << "," << it->second[r].t_star << "\n";
  }
}

ExperimentResult run_phase_retrieval_experiment(const ExperimentConfig& cfg) {
  ExperimentResult result;
  const std::string dir = join_path(cfg.output_dir, "phase_retrieval");
  ensure_directory(dir);
  std::vector<std::pair<int, int>> sizes = cfg.sizes;
  if (sizes.empty())
    sizes = {{10, 30}, {20, 45}, {40, 60}, {35, 90}, {30, 120}, {80, 150}};
  for (const auto& [d, m] : sizes) {
    PhaseRunArtifacts art = run_phase_retrieval(cfg, d, m);
    const std::string tag = "d" + std::to_string(d) + "_m" + std::to_string(m);
    std::vector<AggregateSeries> size_series;
    for (const std::string& name : art.solvers) {
      auto it = art.traces.find(name);
      if (it == art.traces.end() || it->second.empty()) continue;
      AggregateSeries s = aggregate(it->second, name);
      const std::string file = join_path(dir, tag + "_" + name + ".csv");
      write_series_csv(s, file);
      result.files.push_back(file);
      size_series.push_back(std::move(s));
    }
    const std::string finals = join_path(dir, tag + "_finals.csv");
    write_finals_csv(art, finals);
    result.files.push_back(finals);
    if (cfg.emit_svg) {
      const std::string svg = join_path(dir, tag + ".svg");
      write_series_svg(size_series, svg);
      result.files.push_back(svg);
    }
    for (auto& s : size_series) result.series.push_back(std::move(s));
    result.warnings.insert(result.warnings.end(), art.warnings.begin(), art.warnings.end());
  }
  return result;
}

ExperimentResult run_smoothing_sweep(const ExperimentConfig& cfg) {
  ExperimentResult result;
  const std::string dir = join_path(cfg.output_dir, "smoothing_sweep");
  ensure_directory(dir);
  const int d = cfg.sizes.empty() ? 40 : cfg.sizes.front().first;
  const int m = cfg.sizes.empty() ? 60 : cfg.sizes.front().second;
  const std::int64_t T = cfg.T_override > 0 ? cfg.T_override : 2000 * std::int64_t(m);
  const std::vector<std::pair<double, double>> pairs = {
      {1e-4, 1e-7}, {1e-5, 1e-7}, {1e-6, 1e-7}, {1e-6, 1e-9}, {1e-7, 1e-9}, {1e-8, 1e-9}};

  // Instances and solver seeds are shared across the panels, so each pair sees
  // common random numbers.
  RngStream master = make_stream(cfg.seed, size_label(d, m) ^ 0x53574545Full);
  std::vector<std::shared_ptr<const PhaseRetrievalInstance>> instances;
  std::vector<std::uint64_t> seeds;
  for (int r = 0; r < cfg.replicates; ++r) {
    RngStream rep_stream = split_stream(master, std::uint64_t(r));
    RngStream inst_stream = split_stream(rep_stream, 0);
    RngStream seed_stream = split_stream(rep_stream, 1);
    instances.push_back(std::make_shared<const PhaseRetrievalInstance>(
        generate_phase_retrieval(d, m, inst_stream)));
    seeds.push_back(seed_stream.next_u64());
  }

  std::ofstream pairs_file(join_path(dir, "pairs.csv"));
  pairs_file << "panel,mu1,mu2\n";

  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const auto [mu1, mu2] = pairs[p];
    pairs_file << p << "," << fmt(mu1) << "," << fmt(mu2) << "\n";
    std::vector<RunTrace> z_traces(std::size_t(cfg.replicates));
    std::vector<RunTrace> dsz_traces(std::size_t(cfg.replicates));
    auto job = [&](std::size_t r) {
      StochasticCompositeProblem problem = as_problem(instances[r]);
      SolverConfig z = phase_solver_config(EstimatorKind::Gaussian, d, T, mu2, mu1, mu2,
                                           seeds[r]);
      SolverConfig dsz = phase_solver_config(EstimatorKind::DoubleGaussian, d, T, mu2, mu1,
                                             mu2, seeds[r]);
      z_traces[r] = run_z_proxsg(problem, instances[r]->start, z);
      dsz_traces[r] = run_dsz_proxsg(problem, instances[r]->start, dsz);
    };
    parallel_for(std::size_t(cfg.replicates), worker_count(cfg.workers), job);

    const std::string tag = "panel" + std::to_string(p);
    std::vector<AggregateSeries> panel;
    panel.push_back(aggregate(z_traces, "z-proxsg"));
    panel.push_back(aggregate(dsz_traces, "dsz-proxsg"));
    for (const AggregateSeries& s : panel) {
      const std::string file = join_path(dir, tag + "_" + s.label + ".csv");
      write_series_csv(s, file);
      result.files.push_back(file);
    }
    if (cfg.emit_svg) {
      const std::string svg = join_path(dir, tag + ".svg");
      write_series_svg(panel, svg);
      result.files.push_back(svg);
    }
    for (auto& s : panel) result.series.push_back(std::move(s));
  }
  result.files.push_back(join_path(dir, "pairs.csv"));
  return result;
}

ExperimentResult run_tune_experiment(const ExperimentConfig& cfg, PdeEquation equation) {
  ExperimentResult result;
  const std::string family = equation == PdeEquation::Poisson ? "poisson" : "convdiff";
  const std::string dir = join_path(cfg.output_dir, "tune_" + family);
  ensure_directory(dir);

  InstanceSampler sampler;
  sampler.equation = equation;
  if (cfg.max_grid > 0) sampler.cap_grid(cfg.max_grid);

  PadmmConfig base;  // sigma supplied per evaluation
  TuningProblem problem = make_pde_tuning_problem(sampler, cfg.k, base);

  TunerConfig tc;
  tc.k = cfg.k;
  tc.T = cfg.tuner_T > 0 ? cfg.tuner_T : 200 * std::int64_t(sampler.training_triples());
  tc.mu = cfg.mu;
  tc.seed = cfg.seed;
  TuneResult tuned = tune(problem, tc);

  const std::string trace_file = join_path(dir, "tune_trace.csv");
  write_tune_trace_csv(tuned.trace, trace_file);
  result.files.push_back(trace_file);
  const std::string manifest_file = join_path(dir, "tuned_sigma.txt");
  write_tune_manifest(manifest_file, tc, problem.name, tuned.sigma_star, config_hash(cfg));
  result.files.push_back(manifest_file);

  std::vector<double> grid = default_sigma_grid(problem.sigma_min, problem.sigma_max, 6);
  grid.push_back(tuned.sigma_star);
  std::vector<GridRow> rows =
      grid_oracle(problem, grid, cfg.holdout_draws, cfg.seed + 1, cfg.workers);
  const std::string grid_file = join_path(dir, "grid_eval.csv");
  write_grid_csv(rows, grid_file);
  result.files.push_back(grid_file);
  return result;
}

ExperimentResult run_moreau_check(const ExperimentConfig& cfg) {
  ExperimentResult result;
  const std::string dir = join_path(cfg.output_dir, "moreau_check");
  ensure_directory(dir);
  const std::string file = join_path(dir, "moreau_check.csv");
  write_moreau_csv(moreau_battery(), file);
  result.files.push_back(file);
  return result;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  ensure_directory(cfg.output_dir);
  ExperimentResult result;
  switch (cfg.experiment) {
    case ExperimentKind::PhaseRetrieval: result = run_phase_retrieval_experiment(cfg); break;
    case ExperimentKind::SmoothingSweep: result = run_smoothing_sweep(cfg); break;
    case ExperimentKind::TunePoisson: result = run_tune_experiment(cfg, PdeEquation::Poisson); break;
    case ExperimentKind::TuneConvDiff:
      result = run_tune_experiment(cfg, PdeEquation::ConvectionDiffusion);
      break;
    case ExperimentKind::MoreauCheck: result = run_moreau_check(cfg); break;
  }
  return result;
}

std::vector<std::string> run_selftest(const std::string& out_dir, std::uint64_t seed) {
  std::vector<std::string> files;
  ensure_directory(out_dir);

  ExperimentConfig phase;
  phase.experiment = ExperimentKind::PhaseRetrieval;
  phase.sizes = {{5, 12}};
  phase.replicates = 3;
  phase.T_override = 2000;
  phase.seed = seed;
  phase.output_dir = out_dir;
  ExperimentResult pr = run_experiment(phase);
  files.insert(files.end(), pr.files.begin(), pr.files.end());

  ExperimentConfig moreau;
  moreau.experiment = ExperimentKind::MoreauCheck;
  moreau.seed = seed;
  moreau.output_dir = out_dir;
  ExperimentResult mc = run_experiment(moreau);
  files.insert(files.end(), mc.files.begin(), mc.files.end());

  TuningProblem synthetic = make_synthetic_tuning_problem();
  TunerConfig tc;
  tc.T = 300;
  tc.seed = seed;
  TuneResult tuned = tune(synthetic, tc);
  const std::string dir = join_path(out_dir, "synthetic_tune");
  ensure_directory(dir);
  const std::string trace_file = join_path(dir, "tune_trace.csv");
  write_tune_trace_csv(tuned.trace, trace_file);
  files.push_back(trace_file);
  std::vector<GridRow> rows =
      grid_oracle(synthetic, {0.5, 1.0, 1.9, 2.0, 2.1, 4.0}, 50, seed + 1);
  const std::string grid_file = join_path(dir, "grid_eval.csv");
  write_grid_csv(rows, grid_file);
  files.push_back(grid_file);
  const std::string manifest_file = join_path(dir, "tuned_sigma.txt");
  write_tune_manifest(manifest_file, tc, synthetic.name, tuned.sigma_star, config_hash(phase));
  files.push_back(manifest_file);

  ExperimentConfig manifest_cfg = phase;
  write_manifest(join_path(out_dir, "manifest.txt"), manifest_cfg, files);
  files.push_back(join_path(out_dir, "manifest.txt"));
  return files;
}

// ---- config files -------------------------------------------------------------------

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::pair<int, int> parse_size(const std::string& s) {
  const auto x = s.find('x');
  if (x == std::string::npos) throw std::invalid_argument("size must look like 10x30: " + s);
  return {std::stoi(s.substr(0, x)), std::stoi(s.substr(x + 1))};
}

bool parse_bool(const std::string& s) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw std::invalid_argument("expected boolean, got: " + s);
}

}  // namespace

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path);
  ExperimentConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#' || line[0] == '[') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "experiment") cfg.experiment = parse_experiment_kind(value);
    else if (key == "sizes") {
      cfg.sizes.clear();
      for (const std::string& s : split_list(value)) cfg.sizes.push_back(parse_size(s));
    } else if (key == "replicates") cfg.replicates = std::stoi(value);
    else if (key == "seed") cfg.seed = std::stoull(value);
    else if (key == "solvers") cfg.solvers = split_list(value);
    else if (key == "out") cfg.output_dir = value;
    else if (key == "T") cfg.T_override = std::stoll(value);
    else if (key == "mu") cfg.mu = std::stod(value);
    else if (key == "mu1") cfg.mu1 = std::stod(value);
    else if (key == "mu2") cfg.mu2 = std::stod(value);
    else if (key == "tuner_T") cfg.tuner_T = std::stoll(value);
    else if (key == "k") cfg.k = std::stoll(value);
    else if (key == "holdout_draws") cfg.holdout_draws = std::stoi(value);
    else if (key == "max_grid") cfg.max_grid = std::stoi(value);
    else if (key == "workers") cfg.workers = std::stoi(value);
    else if (key == "svg") cfg.emit_svg = parse_bool(value);
    else throw std::runtime_error(path + ":" + std::to_string(lineno) + ": unknown key " + key);
  }
  return cfg;
}

std::string canonical_config(const ExperimentConfig& cfg) {
  std::ostringstream os;
  const char* kind = "";
  switch (cfg.experiment) {
    case ExperimentKind::PhaseRetrieval: kind = "phase_retrieval"; break;
    case ExperimentKind::SmoothingSweep: kind = "smoothing_sweep"; break;
    case ExperimentKind::TunePoisson: kind = "tune_poisson"; break;
    case ExperimentKind::TuneConvDiff: kind = "tune_convdiff"; break;
    case ExperimentKind::MoreauCheck: kind = "moreau_check"; break;
  }
  os << "experiment=" << kind << "\n";
  os << "sizes=";
  for (std::size_t i = 0; i < cfg.sizes.size(); ++i)
    os << (i ? "," : "") << cfg.sizes[i].first << "x" << cfg.sizes[i].second;
  os << "\nreplicates=" << cfg.replicates << "\nseed=" << cfg.seed << "\nsolvers=";
  for (std::size_t i = 0; i < cfg.solvers.size(); ++i) os << (i ? "," : "") << cfg.solvers[i];
  os << "\nT=" << cfg.T_override << "\nmu=" << fmt(cfg.mu) << "\nmu1=" << fmt(cfg.mu1)
     << "\nmu2=" << fmt(cfg.mu2) << "\ntuner_T=" << cfg.tuner_T << "\nk=" << cfg.k
     << "\nholdout_draws=" << cfg.holdout_draws << "\nmax_grid=" << cfg.max_grid
     << "\nsvg=" << (cfg.emit_svg ? 1 : 0) << "\n";
  return os.str();
}

std::uint64_t config_hash(const ExperimentConfig& cfg) {
  const std::string canon = canonical_config(cfg);
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : canon) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

void ensure_directory(const std::string& path) {
  std::filesystem::create_directories(path);
}

void write_series_csv(const AggregateSeries& series, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_series_csv: cannot open " + path);
  out << "iteration,mean,ci_low,ci_high\n";
  for (std::size_t i = 0; i < series.mean.size(); ++i)
    out << series.x_axis[i] << "," << fmt(series.mean[i]) << "," << fmt(series.ci_low[i])
        << "," << fmt(series.ci_high[i]) << "\n";
}

void write_series_svg(const std::vector<AggregateSeries>& series, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_series_svg: cannot open " + path);
  const double W = 880, H = 560, ml = 70, mr = 20, mt = 20, mb = 50;
  double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  bool first = true;
  for (const AggregateSeries& s : series)
    for (std::size_t i = 0; i < s.mean.size(); ++i) {
      const double x = double(s.x_axis[i]);
      if (first) {
        xmin = xmax = x;
        ymin = ymax = s.mean[i];
        first = false;
      }
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
      ymin = std::min(ymin, s.mean[i]);
      ymax = std::max(ymax, s.mean[i]);
    }
  if (xmax == xmin) xmax = xmin + 1;
  if (ymax == ymin) ymax = ymin + 1;
  auto sx = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * (W - ml - mr); };
  auto sy = [&](double y) { return H - mb - (y - ymin) / (ymax - ymin) * (H - mt - mb); };
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<line x1=\"" << ml << "\" y1=\"" << H - mb << "\" x2=\"" << W - mr << "\" y2=\""
      << H - mb << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << H - mb
      << "\" stroke=\"black\"/>\n";
  out << "<text x=\"" << ml << "\" y=\"" << H - mb + 30 << "\" font-size=\"12\">" << xmin
      << "</text>\n";
  out << "<text x=\"" << W - mr - 60 << "\" y=\"" << H - mb + 30 << "\" font-size=\"12\">"
      << xmax << "</text>\n";
  out << "<text x=\"5\" y=\"" << sy(ymin) << "\" font-size=\"12\">" << fmt(ymin)
      << "</text>\n";
  out << "<text x=\"5\" y=\"" << sy(ymax) + 10 << "\" font-size=\"12\">" << fmt(ymax)
      << "</text>\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    const AggregateSeries& s = series[k];
    out << "<polyline fill=\"none\" stroke=\"" << colors[k % 6] << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.mean.size(); ++i)
      out << sx(double(s.x_axis[i])) << "," << sy(s.mean[i]) << " ";
    out << "\"/>\n";
    out << "<text x=\"" << W - mr - 160 << "\" y=\"" << mt + 16 * double(k + 1)
        << "\" font-size=\"12\" fill=\"" << colors[k % 6] << "\">" << s.label << "</text>\n";
  }
  out << "</svg>\n";
}

void write_manifest(const std::string& path, const ExperimentConfig& cfg,
                    const std::vector<std::string>& files) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_manifest: cannot open " + path);
  out << "tool = zoprox 0.1.0\n";
  out << "config_hash = " << config_hash(cfg) << "\n";
  out << "[config]\n" << canonical_config(cfg);
  out << "[files]\n";
  const auto base = std::filesystem::path(path).parent_path();
  for (const std::string& f : files)
    out << std::filesystem::proximate(f, base).generic_string() << "\n";
}

}  // namespace zoprox
