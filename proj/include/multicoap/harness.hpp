#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "multicoap/metrics.hpp"
#include "multicoap/selection.hpp"
#include "multicoap/simgen.hpp"
#include "multicoap/types.hpp"

// Simulation benchmark: simulate, fit, score, repeated over replicates.
//
// Seeding is two-level. The base seed is the structure seed of every cell, so
// beta0, A0 and B_s0 stay fixed across replicates; replicate r draws Z, F, H,
// noise and counts from replicate_seed(base, r), which also seeds the fit.

namespace multicoap::harness {

struct SelectionPlan {
  int q_max = 6;
  std::vector<int> qs_max;
  double tau = kDefaultTau;
  FitConfig fit;  // used for the (q_max, qs_max) fit; q and qs are overwritten
};

/// One column of a results table.
struct Cell {
  std::string label;
  SimConfig sim;
  FitConfig fit;
  /// When set, q and qs come from CUP selection and fit is rerun at them.
  std::optional<SelectionPlan> selection;
};

struct Scenario {
  std::string name;
  std::vector<Cell> cells;
};

std::vector<std::string> scenario_names();
/// example1-n, example1-p, example2 or example5; ConfigError otherwise.
Scenario make_scenario(const std::string& name);

std::uint64_t replicate_seed(std::uint64_t base_seed, int replicate);

/// Largest relative decrease max_t (E_{t-1} - E_t) / |E_{t-1}| along
/// initial, trace[0], trace[1], ...; 0 for a nondecreasing trace.
double max_relative_drop(double initial, const std::vector<double>& trace);

struct ReplicateOutcome {
  std::string cell;
  int replicate = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  ScoreReport scores;
  int iterations = 0;
  bool converged = false;
  double seconds = 0.0;
  double max_elbo_drop = 0.0;
  std::int64_t censored = 0;
  std::optional<FactorSelection> selection;
};

ReplicateOutcome run_replicate(const Cell& cell, int replicate, std::uint64_t base_seed, int threads);

struct BenchmarkRun {
  std::string scenario;
  std::uint64_t base_seed = 0;
  int replicates = 0;
  std::vector<std::string> cells;
  std::vector<ReplicateOutcome> outcomes;
};

/// Replicate failures are recorded in the outcome and do not stop the run.
BenchmarkRun run_benchmark(const Scenario& scenario, int replicates, std::uint64_t base_seed, int threads,
                           const std::function<void(const ReplicateOutcome&)>& on_done = {});

/// Metric names and values reported for one outcome, in output order.
std::vector<std::pair<std::string, double>> outcome_metrics(const ReplicateOutcome& outcome);

/// Long format: scenario,cell,replicate,seed,status,metric,value,message.
void write_results_csv(const std::filesystem::path& path, const BenchmarkRun& run);
/// One row per metric, a mean and an SD column per cell (SD empty with
/// fewer than two successful replicates).
void write_summary_csv(const std::filesystem::path& path, const BenchmarkRun& run);

struct CellSummary {
  int ok = 0;
  int failed = 0;
  std::vector<std::string> metrics;
  std::vector<double> mean;
  std::vector<std::optional<double>> sd;
};

CellSummary summarize(const BenchmarkRun& run, const std::string& cell);

}  // namespace multicoap::harness
