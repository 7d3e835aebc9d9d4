#pragma once

#include <string>
#include <vector>

#include "juice/channel_model.hpp"
#include "juice/config.hpp"
#include "juice/metrics.hpp"
#include "juice/types.hpp"

namespace juice {

struct CurvePoint {
  std::string sweep_variable;
  double sweep_value = 0.0;
  double snr_db = 0.0;
  Algorithm algorithm = Algorithm::irw_admm;
  double srr = 0.0;
  double srr_std_error = 0.0;
  double nase = 0.0;
  double nase_db = 0.0;
  double mean_iterations = 0.0;
  int trials = 0;     // trials that produced an estimate
  int failures = 0;   // trials where the solver aborted
  double wall_ms = 0.0;
  /// Raw sums behind `nase`, kept for paired comparisons.
  double squared_error = 0.0;
  double reference_energy = 0.0;
};

/// NASE and SRR after each inner iteration, averaged over trials. Trials that
/// stop early contribute their final estimate to the later iterations.
struct ConvergenceCurve {
  double sweep_value = 0.0;
  double snr_db = 0.0;
  Algorithm algorithm = Algorithm::irw_admm;
  std::vector<double> nase;  // linear, index 0 is iteration 1
  std::vector<double> srr;
};

/// One generated observation with its ground truth.
struct TrialRecord {
  double sweep_value = 0.0;
  double snr_db = 0.0;
  int trial = 0;
  CMatrix phi;
  CMatrix x;
  CMatrix y;
  IndexSet support;
  double noise_variance = 0.0;
};

struct ExperimentResult {
  std::vector<CurvePoint> points;
  std::vector<ConvergenceCurve> convergence;
  std::vector<TrialRecord> trial_records;
};

struct RunOptions {
  /// Keep the first n trials of every (sweep value, SNR) cell as TrialRecords.
  int keep_trials = 0;
};

/// User layout and true covariance ensemble that run_experiment uses for the
/// spec's system block (no sweep applied).
std::vector<ScatteringProfile> experiment_layout(const ExperimentSpec& spec);
CovarianceSet experiment_covariances(const ExperimentSpec& spec);

/// Monte-Carlo evaluation of every requested algorithm on identical
/// observations. Deterministic for a fixed spec regardless of thread count.
ExperimentResult run_experiment(const ExperimentSpec& spec, const RunOptions& options = {});

}  // namespace juice
