#include "multicoap/cli.hpp"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "multicoap/config.hpp"
#include "multicoap/dataset_io.hpp"
#include "multicoap/error.hpp"
#include "multicoap/harness.hpp"
#include "multicoap/metrics.hpp"
#include "multicoap/rrr.hpp"
#include "multicoap/selection.hpp"
#include "multicoap/simgen.hpp"
#include "multicoap/vem.hpp"

#ifndef MULTICOAP_VERSION
#define MULTICOAP_VERSION "unknown"
#endif

namespace multicoap::cli {

namespace fs = std::filesystem;
using config::Json;

namespace {

struct Options {
  std::string config_path;
  std::string data_dir;
  std::string out_dir;
  std::optional<int> threads;
  std::optional<std::uint64_t> seed;
  double tau = kDefaultTau;
  int q_max = 6;
  std::vector<int> qs_max{4};
  std::optional<int> r_max;
  int replicates = 20;
  std::string scenario;
};

int resolve_threads(const std::optional<int>& flag) {
  int threads = 1;
  if (flag) {
    threads = *flag;
  } else if (const char* env = std::getenv("MULTICOAP_THREADS"); env && *env) {
    try {
      std::size_t used = 0;
      threads = std::stoi(env, &used);
      if (used != std::string(env).size()) throw std::invalid_argument(env);
    } catch (const std::exception&) {
      throw ConfigError(std::string("MULTICOAP_THREADS must be an integer, got '") + env + "'");
    }
  }
  if (threads < 1) throw ConfigError("thread count must be at least 1");
  return threads;
}

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

Json manifest(const std::string& command, Json config, int threads, const Json& inputs, const Json& outputs,
              double seconds) {
  Json m;
  m["command"] = command;
  m["version"] = MULTICOAP_VERSION;
  m["config"] = std::move(config);
  m["threads"] = threads;
  m["inputs"] = inputs;
  m["outputs"] = outputs;
  m["timings"] = {{"total_seconds", seconds}};
  return m;
}

Json to_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Json scores_json(const ScoreReport& r) {
  return {{"A_tr", r.A_tr},
          {"F_tr", r.F_tr},
          {"B_tr", r.B_tr},
          {"H_tr", r.H_tr},
          {"beta_er", r.beta_er},
          {"B_tr_study", r.B_tr_study},
          {"F_tr_study", r.F_tr_study},
          {"H_tr_study", r.H_tr_study},
          {"F_baseline", r.F_baseline},
          {"F_near_baseline", r.F_near_baseline}};
}

FitConfig load_fit_config(const Options& o, std::size_t num_studies, int threads) {
  FitConfig c = config::fit_config_from_json(config::read_config_file(o.config_path));
  config::resolve_qs(c, num_studies);
  if (o.seed) c.seed = *o.seed;
  c.threads = threads;
  return c;
}

int cmd_simulate(const Options& o, std::ostream& out) {
  Stopwatch clock;
  SimConfig sc;
  if (!o.config_path.empty()) sc = config::sim_config_from_json(config::read_config_file(o.config_path));
  if (o.seed) sc.seed = *o.seed;
  const int threads = resolve_threads(o.threads);
  auto [data, truth] = generate(sc);
  const fs::path dir(o.out_dir);
  io::write_dataset(dir, data);
  io::write_truth(dir, truth);
  Json m = manifest("simulate", config::to_json(sc), threads, {{"config", o.config_path}}, {{"out_dir", o.out_dir}},
                    clock.seconds());
  m["seeds"] = {{"seed", sc.seed}, {"structure_seed", sc.structure_seed}};
  m["censored_rates"] = truth.censored;
  config::write_json(dir / "manifest.json", m);
  out << "wrote " << data.num_studies() << " studies to " << dir.string();
  if (truth.censored > 0) out << " (" << truth.censored << " rates censored at 1e18)";
  out << '\n';
  return kSuccess;
}

int cmd_fit(const Options& o, std::ostream& out) {
  Stopwatch clock;
  const int threads = resolve_threads(o.threads);
  const MultiStudyDataset data = io::read_dataset(o.data_dir);
  const FitConfig fc = load_fit_config(o, data.num_studies(), threads);
  const FitResult result = fit(data, fc);

  const fs::path dir(o.out_dir);
  io::ensure_directory(dir);
  io::write_fit(dir, result);
  Json summary;
  summary["converged"] = result.converged;
  summary["iterations"] = result.iterations;
  summary["final_elbo"] = result.elbo_trace.back();
  summary["initial_elbo"] = result.initial_elbo;
  summary["max_relative_elbo_drop"] = harness::max_relative_drop(result.initial_elbo, result.elbo_trace);
  summary["lambda"] = to_json(result.params.lambda);
  summary["cross_block_overlap"] = result.cross_block_overlap;
  summary["timings"] = {{"fit_seconds", result.seconds}, {"total_seconds", clock.seconds()}};
  if (auto truth = io::read_truth(o.data_dir)) summary["scores"] = scores_json(score(result, *truth));
  config::write_json(dir / "fit_summary.json", summary);
  config::write_json(dir / "manifest.json",
                     manifest("fit", config::to_json(fc), threads,
                              {{"data_dir", o.data_dir}, {"config", o.config_path}}, {{"out_dir", o.out_dir}},
                              clock.seconds()));
  out << (result.converged ? "converged" : "stopped") << " after " << result.iterations
      << " iterations, ELBO " << result.elbo_trace.back() << '\n';
  return kSuccess;
}

int cmd_select(const Options& o, std::ostream& out) {
  Stopwatch clock;
  const int threads = resolve_threads(o.threads);
  const MultiStudyDataset data = io::read_dataset(o.data_dir);
  FitConfig base;
  base.max_iter = 2000;
  base.eps = 1e-6;
  if (!o.config_path.empty()) base = load_fit_config(o, data.num_studies(), threads);
  if (o.seed) base.seed = *o.seed;
  base.threads = threads;
  base.rank.reset();
  base.q = o.q_max;
  base.qs = o.qs_max;
  config::resolve_qs(base, data.num_studies());
  if (!(o.tau > 0.0 && o.tau < 1.0)) throw ConfigError("--tau must lie in (0, 1)");

  const FitResult result = fit(data, base);
  const FactorSelection sel = select_factors_from_fit(result, o.tau);
  const int r_max = o.r_max.value_or(static_cast<int>(std::min(data.p(), data.d())));
  const RankSelection rank = select_rank(result.params.beta, r_max, o.tau);

  Json j;
  j["q_hat"] = sel.q_hat;
  j["qs_hat"] = sel.qs_hat;
  j["r_hat"] = rank.r_hat;
  j["tau"] = o.tau;
  j["q_max"] = base.q;
  j["qs_max"] = base.qs;
  j["r_max"] = r_max;
  j["nu_f"] = to_json(sel.nu_f);
  Json nu_h = Json::array();
  for (const Vector& v : sel.nu_h) nu_h.push_back(to_json(v));
  j["nu_h"] = nu_h;
  j["beta_eigenvalues"] = to_json(rank.eigenvalues);
  j["beta_cumulative_ratio"] = to_json(rank.cumulative_ratio);
  j["fit"] = {{"converged", result.converged}, {"iterations", result.iterations},
              {"final_elbo", result.elbo_trace.back()}};

  const fs::path dir(o.out_dir);
  io::ensure_directory(dir);
  config::write_json(dir / "selection.json", j);
  Json m = manifest("select", config::to_json(base), threads, {{"data_dir", o.data_dir}, {"config", o.config_path}},
                    {{"out_dir", o.out_dir}}, clock.seconds());
  m["selection"] = {{"tau", o.tau}, {"q_max", base.q}, {"qs_max", base.qs}, {"r_max", r_max}};
  config::write_json(dir / "manifest.json", m);
  out << "q_hat=" << sel.q_hat << " qs_hat=";
  for (std::size_t s = 0; s < sel.qs_hat.size(); ++s) out << (s ? "," : "") << sel.qs_hat[s];
  out << " r_hat=" << rank.r_hat << '\n';
  return kSuccess;
}

int cmd_benchmark(const Options& o, std::ostream& out) {
  Stopwatch clock;
  const int threads = resolve_threads(o.threads);
  const harness::Scenario scenario = harness::make_scenario(o.scenario);
  if (o.replicates < 1) throw ConfigError("--replicates must be at least 1");
  const std::uint64_t seed = o.seed.value_or(1);
  const fs::path dir(o.out_dir);
  io::ensure_directory(dir);

  const auto run = harness::run_benchmark(scenario, o.replicates, seed, threads, [&](const auto& r) {
    out << scenario.name << " " << r.cell << " replicate " << r.replicate + 1 << ": ";
    if (r.ok) {
      out << "A_tr=" << r.scores.A_tr << " F_tr=" << r.scores.F_tr << " B_tr=" << r.scores.B_tr
          << " H_tr=" << r.scores.H_tr << " beta_er=" << r.scores.beta_er;
      if (r.selection) out << " q_hat=" << r.selection->q_hat;
    } else {
      out << "FAILED: " << r.error;
    }
    out << '\n' << std::flush;
  });
  harness::write_results_csv(dir / "results.csv", run);
  harness::write_summary_csv(dir / "summary.csv", run);

  Json cells = Json::array();
  for (const auto& cell : scenario.cells) {
    Json c = {{"label", cell.label}, {"sim", config::to_json(cell.sim)}, {"fit", config::to_json(cell.fit)}};
    if (cell.selection) {
      c["selection"] = {{"q_max", cell.selection->q_max},
                        {"qs_max", cell.selection->qs_max},
                        {"tau", cell.selection->tau},
                        {"fit", config::to_json(cell.selection->fit)}};
    }
    cells.push_back(c);
  }
  Json m = manifest("benchmark", {{"scenario", scenario.name}, {"replicates", o.replicates}, {"cells", cells}},
                    threads, Json::object(), {{"out_dir", o.out_dir}}, clock.seconds());
  m["seeds"] = {{"base_seed", seed}, {"structure_seed", seed}, {"replicate_seed", "splitmix64(base ^ splitmix64(r + 1)) for 0-based replicate r"}};
  std::size_t failed = 0;
  for (const auto& r : run.outcomes) failed += r.ok ? 0 : 1;
  m["failed_replicates"] = failed;
  config::write_json(dir / "manifest.json", m);
  out << "wrote " << (dir / "results.csv").string() << " and " << (dir / "summary.csv").string() << '\n';
  return kSuccess;
}

}  // namespace

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return kConfigError;
  if (dynamic_cast<const DataError*>(&e)) return kDataError;
  if (dynamic_cast<const NumericalError*>(&e)) return kNumericalError;
  return kUnexpected;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multi-study covariate-augmented overdispersed Poisson factor model"};
  app.set_version_flag("--version", MULTICOAP_VERSION);
  app.require_subcommand(1);
  Options o;

  const auto add_threads_seed = [&o](CLI::App* sub) {
    sub->add_option("--threads", o.threads, "Worker threads (default: $MULTICOAP_THREADS or 1)");
    sub->add_option("--seed", o.seed, "Random seed; overrides the config");
  };

  CLI::App* simulate = app.add_subcommand("simulate", "Generate a synthetic dataset with ground truth");
  simulate->add_option("--config", o.config_path, "Simulation config (JSON); default: Example 1")->check(CLI::ExistingFile);
  simulate->add_option("--out-dir", o.out_dir, "Output directory")->required();
  add_threads_seed(simulate);

  CLI::App* fit_cmd = app.add_subcommand("fit", "Fit the model by variational EM");
  fit_cmd->add_option("--data-dir", o.data_dir, "Directory with X_s.csv, Z_s.csv, a_s.csv")->required();
  fit_cmd->add_option("--config", o.config_path, "Fit config (JSON) or a previous manifest")->required()->check(CLI::ExistingFile);
  fit_cmd->add_option("--out-dir", o.out_dir, "Output directory")->required();
  add_threads_seed(fit_cmd);

  CLI::App* select = app.add_subcommand("select", "Choose q, q_s (CUP) and the rank of beta");
  select->add_option("--data-dir", o.data_dir, "Directory with X_s.csv, Z_s.csv, a_s.csv")->required();
  select->add_option("--config", o.config_path, "Base fit config (JSON)")->check(CLI::ExistingFile);
  select->add_option("--out-dir", o.out_dir, "Output directory")->required();
  select->add_option("--q-max", o.q_max, "Upper bound on q")->capture_default_str();
  select->add_option("--qs-max", o.qs_max, "Upper bound on q_s: one value, or one per study")
      ->delimiter(',')
      ->capture_default_str();
  select->add_option("--r-max", o.r_max, "Upper bound on rank(beta); default min(p, d)");
  select->add_option("--tau", o.tau, "Cumulative proportion threshold")->capture_default_str();
  add_threads_seed(select);

  CLI::App* bench = app.add_subcommand("benchmark", "Run a simulation scenario and summarize the metrics");
  bench->add_option("scenario", o.scenario, "example1-n, example1-p, example2 or example5")->required();
  bench->add_option("--replicates", o.replicates, "Replicates per cell")->capture_default_str();
  bench->add_option("--out-dir", o.out_dir, "Output directory")->required();
  add_threads_seed(bench);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kConfigError;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(o, out);
    if (fit_cmd->parsed()) return cmd_fit(o, out);
    if (select->parsed()) return cmd_select(o, out);
    return cmd_benchmark(o, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e);
  }
}

}  // namespace multicoap::cli
