// Command-line front end: run Monte-Carlo experiments and plot their results.
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "juice/channel_model.hpp"
#include "juice/config.hpp"
#include "juice/experiment.hpp"
#include "juice/report.hpp"
#include "juice/trial_record.hpp"

namespace fs = std::filesystem;

namespace {

void write_convergence(const std::string& path, const std::vector<juice::ConvergenceCurve>& curves) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  os << "sweep_value,snr_db,algorithm,iteration,nase,nase_db,srr\n";
  char buf[256];
  for (const auto& c : curves) {
    for (std::size_t k = 0; k < c.nase.size(); ++k) {
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%s,%zu,%.17g,%.17g,%.17g\n", c.sweep_value, c.snr_db,
                    juice::to_string(c.algorithm).c_str(), k + 1, c.nase[k], juice::to_db(c.nase[k]), c.srr[k]);
      os << buf;
    }
  }
}

int run_command(const std::string& config_path, const std::string& out_dir, std::optional<unsigned long long> seed,
                std::optional<int> trials, bool redraw, std::optional<int> threads, int dump_trials) {
  juice::ExperimentSpec spec = juice::load_experiment_spec(config_path);
  if (seed) spec.seed = *seed;
  if (trials) spec.trials = *trials;
  if (threads) spec.threads = *threads;
  if (redraw) spec.redraw_pilots = true;
  spec.validate();

  fs::create_directories(out_dir);
  juice::RunOptions options;
  options.keep_trials = dump_trials;
  const auto result = juice::run_experiment(spec, options);

  const std::string csv = (fs::path(out_dir) / "results.csv").string();
  juice::emit_csv(result.points, csv);
  juice::emit_plot(result.points, juice::PlotMetric::srr, (fs::path(out_dir) / "srr.svg").string());
  juice::emit_plot(result.points, juice::PlotMetric::nase_db, (fs::path(out_dir) / "nase_db.svg").string());
  if (!result.convergence.empty())
    write_convergence((fs::path(out_dir) / "convergence.csv").string(), result.convergence);
  if (!result.trial_records.empty()) {
    std::ofstream os(fs::path(out_dir) / "trials.jsonl", std::ios::binary);
    juice::write_trial_records(os, result.trial_records);
  }

  int failures = 0;
  for (const auto& p : result.points) failures += p.failures;
  if (failures > 0) std::cerr << "warning: " << failures << " solver runs aborted (excluded from averages)\n";
  std::cout << "wrote " << csv << '\n';
  return 0;
}

int covariances_command(const std::string& config_path, const std::string& out) {
  const juice::ExperimentSpec spec = juice::load_experiment_spec(config_path);
  juice::save_covariances(out, juice::experiment_covariances(spec));
  std::cout << "wrote " << out << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Joint activity detection and channel estimation experiments"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run a Monte-Carlo experiment from a config file");
  std::string config_path, out_dir = "out";
  std::optional<unsigned long long> seed;
  std::optional<int> trials, threads;
  bool redraw = false;
  int dump_trials = 0;
  run->add_option("config", config_path, "Experiment config")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out_dir, "Output directory");
  run->add_option("--seed", seed, "Override the experiment seed");
  run->add_option("--trials", trials, "Override the trial count")->check(CLI::PositiveNumber);
  run->add_flag("--redraw-pilots", redraw, "Draw a new pilot matrix for every trial");
  run->add_option("--threads", threads, "Worker threads (0 = all cores)");
  run->add_option("--dump-trials", dump_trials, "Write the first N trials of every cell to trials.jsonl");

  auto* plot = app.add_subcommand("plot", "Render a results CSV as an SVG line chart");
  std::string csv_path, metric = "nase_db", plot_out;
  plot->add_option("csv", csv_path, "Results CSV")->required()->check(CLI::ExistingFile);
  plot->add_option("--metric", metric, "srr or nase_db")->check(CLI::IsMember({"srr", "nase_db"}));
  plot->add_option("--out", plot_out, "Output SVG")->required();

  auto* cov = app.add_subcommand("covariances", "Export the covariance ensemble of a config");
  std::string cov_config, cov_out;
  cov->add_option("config", cov_config, "Experiment config")->required()->check(CLI::ExistingFile);
  cov->add_option("--out", cov_out, "Output file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return run_command(config_path, out_dir, seed, trials, redraw, threads, dump_trials);
    if (*plot) {
      juice::emit_plot(juice::load_csv(csv_path), juice::parse_plot_metric(metric), plot_out);
      std::cout << "wrote " << plot_out << '\n';
      return 0;
    }
    if (*cov) return covariances_command(cov_config, cov_out);
  } catch (const juice::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
