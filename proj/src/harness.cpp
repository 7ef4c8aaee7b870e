#include "multicoap/harness.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <algorithm>
#include <fstream>
#include <map>

#include "multicoap/csv.hpp"
#include "multicoap/error.hpp"
#include "multicoap/vem.hpp"

namespace multicoap::harness {

namespace {

// Example 1 defaults; every scenario starts from these.
Cell example1_cell(std::string label) {
  Cell cell;
  cell.label = std::move(label);
  cell.fit.q = cell.sim.q;
  cell.fit.qs = cell.sim.qs;
  cell.fit.rank = cell.sim.r0;
  return cell;
}

std::string pair_label(const char* name, int a, int b) {
  return std::string(name) + "=(" + std::to_string(a) + "," + std::to_string(b) + ")";
}

std::string number_label(const char* name, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s=%g", name, v);
  return buf;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::string csv_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += (c == '\n' || c == '\r') ? ' ' : c;
  }
  return out + "\"";
}

}  // namespace

std::vector<std::string> scenario_names() { return {"example1-n", "example1-p", "example2", "example5"}; }

Scenario make_scenario(const std::string& name) {
  Scenario sc;
  sc.name = name;
  if (name == "example1-n") {
    for (auto [n1, n2] : {std::pair{50, 80}, std::pair{100, 200}, std::pair{200, 300}}) {
      Cell cell = example1_cell(pair_label("n", n1, n2));
      cell.sim.n = {n1, n2};
      sc.cells.push_back(std::move(cell));
    }
  } else if (name == "example1-p") {
    for (int p : {50, 100, 150}) {
      Cell cell = example1_cell("p=" + std::to_string(p));
      cell.sim.p = p;
      sc.cells.push_back(std::move(cell));
    }
  } else if (name == "example2") {
    for (double s2 : {1.0, 4.0, 8.0}) {
      Cell cell = example1_cell(number_label("sigma2", s2));
      cell.sim.n = {100, 200};
      cell.sim.rho_z = 1.0;
      cell.sim.sigma0_sq = s2;
      sc.cells.push_back(std::move(cell));
    }
  } else if (name == "example5") {
    Cell cell = example1_cell(number_label("sigma2", 1.0));
    cell.sim.n = {150, 200};
    cell.sim.rho_a = 2.0;
    cell.sim.rho_b = 5.0;
    cell.sim.rho_z = 1.0;
    cell.sim.d = 3;
    cell.sim.r0 = 3;
    cell.fit.rank = 3;
    SelectionPlan plan;
    plan.q_max = 6;
    plan.qs_max = {4, 4};
    plan.fit = cell.fit;
    // The over-specified fit needs a few hundred cycles before the surplus
    // columns have drained.
    plan.fit.max_iter = 2000;
    plan.fit.eps = 1e-6;
    cell.selection = plan;
    sc.cells.push_back(std::move(cell));
  } else {
    std::string known;
    for (const auto& n : scenario_names()) known += (known.empty() ? "" : ", ") + n;
    throw ConfigError("unknown benchmark scenario '" + name + "' (expected one of " + known + ")");
  }
  return sc;
}

std::uint64_t replicate_seed(std::uint64_t base_seed, int replicate) {
  return splitmix64(base_seed ^ splitmix64(static_cast<std::uint64_t>(replicate) + 1));
}

double max_relative_drop(double initial, const std::vector<double>& trace) {
  double worst = 0.0;
  double prev = initial;
  for (double e : trace) {
    const double drop = (prev - e) / std::abs(prev);
    if (drop > worst) worst = drop;
    prev = e;
  }
  return worst;
}

ReplicateOutcome run_replicate(const Cell& cell, int replicate, std::uint64_t base_seed, int threads) {
  ReplicateOutcome out;
  out.cell = cell.label;
  out.replicate = replicate;
  out.seed = replicate_seed(base_seed, replicate);
  const auto start = std::chrono::steady_clock::now();
  try {
    SimConfig sim = cell.sim;
    sim.structure_seed = base_seed;
    sim.seed = out.seed;
    auto [data, truth] = generate(sim);
    out.censored = truth.censored;

    FitConfig config = cell.fit;
    config.seed = out.seed;
    config.threads = threads;
    if (cell.selection) {
      FitConfig wide = cell.selection->fit;
      wide.q = cell.selection->q_max;
      wide.qs = cell.selection->qs_max;
      wide.seed = out.seed;
      wide.threads = threads;
      const FitResult over = fit(data, wide);
      out.max_elbo_drop = max_relative_drop(over.initial_elbo, over.elbo_trace);
      out.selection = select_factors_from_fit(over, cell.selection->tau);
      config.q = out.selection->q_hat;
      config.qs = out.selection->qs_hat;
    }
    const FitResult result = fit(data, config);
    out.iterations = result.iterations;
    out.converged = result.converged;
    out.max_elbo_drop = std::max(out.max_elbo_drop, max_relative_drop(result.initial_elbo, result.elbo_trace));
    out.scores = score(result, truth);
    out.ok = true;
  } catch (const std::exception& e) {
    out.ok = false;
    out.error = e.what();
  }
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

BenchmarkRun run_benchmark(const Scenario& scenario, int replicates, std::uint64_t base_seed, int threads,
                           const std::function<void(const ReplicateOutcome&)>& on_done) {
  if (replicates < 1) throw ConfigError("replicates must be at least 1");
  BenchmarkRun run;
  run.scenario = scenario.name;
  run.base_seed = base_seed;
  run.replicates = replicates;
  for (const Cell& cell : scenario.cells) {
    run.cells.push_back(cell.label);
    for (int r = 0; r < replicates; ++r) {
      run.outcomes.push_back(run_replicate(cell, r, base_seed, threads));
      if (on_done) on_done(run.outcomes.back());
    }
  }
  return run;
}

std::vector<std::pair<std::string, double>> outcome_metrics(const ReplicateOutcome& o) {
  std::vector<std::pair<std::string, double>> m{
      {"A_tr", o.scores.A_tr},
      {"F_tr", o.scores.F_tr},
      {"B_tr", o.scores.B_tr},
      {"H_tr", o.scores.H_tr},
      {"beta_er", o.scores.beta_er},
  };
  if (o.selection) {
    m.emplace_back("q_hat", o.selection->q_hat);
    for (std::size_t s = 0; s < o.selection->qs_hat.size(); ++s) {
      m.emplace_back("qs_hat_" + std::to_string(s + 1), o.selection->qs_hat[s]);
    }
  }
  m.emplace_back("iterations", o.iterations);
  m.emplace_back("converged", o.converged ? 1.0 : 0.0);
  m.emplace_back("max_elbo_drop", o.max_elbo_drop);
  m.emplace_back("censored", static_cast<double>(o.censored));
  m.emplace_back("seconds", o.seconds);
  return m;
}

void write_results_csv(const std::filesystem::path& path, const BenchmarkRun& run) {
  std::ofstream out(path);
  if (!out) throw DataError(DataErrorKind::Io, "cannot open " + path.string() + " for writing");
  out << "scenario,cell,replicate,seed,status,metric,value,message\n";
  for (const ReplicateOutcome& o : run.outcomes) {
    const std::string prefix =
        run.scenario + "," + csv_quote(o.cell) + "," + std::to_string(o.replicate + 1) + "," + std::to_string(o.seed);
    if (!o.ok) {
      out << prefix << ",failed,,," << csv_quote(o.error) << '\n';
      continue;
    }
    for (const auto& [name, value] : outcome_metrics(o)) {
      out << prefix << ",ok," << name << "," << csv::format_double(value) << ",\n";
    }
  }
  if (!out) throw DataError(DataErrorKind::Io, "failed writing " + path.string());
}

CellSummary summarize(const BenchmarkRun& run, const std::string& cell) {
  CellSummary summary;
  std::map<std::string, std::vector<double>> values;
  for (const ReplicateOutcome& o : run.outcomes) {
    if (o.cell != cell) continue;
    if (!o.ok) {
      ++summary.failed;
      continue;
    }
    ++summary.ok;
    for (const auto& [name, value] : outcome_metrics(o)) {
      if (!values.count(name)) summary.metrics.push_back(name);
      values[name].push_back(value);
    }
  }
  for (const auto& name : summary.metrics) {
    const auto& v = values[name];
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    summary.mean.push_back(mean);
    if (v.size() < 2) {
      summary.sd.emplace_back();
      continue;
    }
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    summary.sd.emplace_back(std::sqrt(ss / static_cast<double>(v.size() - 1)));
  }
  return summary;
}

void write_summary_csv(const std::filesystem::path& path, const BenchmarkRun& run) {
  std::vector<CellSummary> cells;
  std::vector<std::string> metrics;
  for (const auto& label : run.cells) {
    cells.push_back(summarize(run, label));
    for (const auto& m : cells.back().metrics) {
      if (std::find(metrics.begin(), metrics.end(), m) == metrics.end()) metrics.push_back(m);
    }
  }
  std::ofstream out(path);
  if (!out) throw DataError(DataErrorKind::Io, "cannot open " + path.string() + " for writing");
  out << "metric";
  for (const auto& label : run.cells) out << "," << csv_quote(label + " mean") << "," << csv_quote(label + " sd");
  out << '\n';
  for (const auto& m : metrics) {
    out << m;
    for (const CellSummary& c : cells) {
      const auto it = std::find(c.metrics.begin(), c.metrics.end(), m);
      if (it == c.metrics.end()) {
        out << ",,";
        continue;
      }
      const auto k = static_cast<std::size_t>(it - c.metrics.begin());
      out << "," << csv::format_double(c.mean[k]) << ",";
      if (c.sd[k]) out << csv::format_double(*c.sd[k]);
    }
    out << '\n';
  }
  for (const char* row : {"ok_replicates", "failed_replicates"}) {
    out << row;
    for (const CellSummary& c : cells) out << "," << (row[0] == 'o' ? c.ok : c.failed) << ",";
    out << '\n';
  }
  if (!out) throw DataError(DataErrorKind::Io, "failed writing " + path.string());
}

}  // namespace multicoap::harness
