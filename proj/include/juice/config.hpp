#pragma once

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace juice {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Algorithm { admm, irw_admm, map_admm, somp, oracle_ls, oracle_mmse, map_admm_mmse_refine };

std::string to_string(Algorithm a);
Algorithm parse_algorithm(const std::string& name);

struct SystemConfig {
  int num_users = 200;        // N
  int num_active = 10;        // K
  int num_antennas = 20;      // M
  int pilot_length = 20;      // tau_p
  double antenna_spacing = 0.5;
  double angular_std_deg = 10.0;
  int num_paths = 200;
  double cell_radius = 50.0;
  int quadrature_size = 1'000'000;
  /// Optional fixed covariance ensemble; replaces the synthesized one.
  std::string covariance_file;
};

struct SweepConfig {
  /// none | tau_p | M | K | N | cdi_samples | angular_std_deg
  std::string variable = "none";
  std::vector<double> values;
};

/// Solver settings. The *_fraction values scale the mean norm of the active
/// effective channels measured during noise calibration; an explicit value
/// overrides the rule.
struct SolverConfig {
  double beta1_scale = 1.0;  // beta1 = scale * sqrt(sigma^2 / 2)
  std::optional<double> beta1;
  double beta2_fraction = 0.01;
  std::optional<double> beta2;
  double eps0_fraction = 0.001;
  std::optional<double> eps0;
  double rho = 1.0;
  double eps_stop = 1e-3;
  int l_max = 12;
  int k_max = 5;
  double eps_thr_fraction = 0.1;
  std::optional<double> eps_thr;
};

struct CdiConfig {
  enum class Mode { perfect, trained };
  Mode mode = Mode::perfect;
  int samples = 40;           // T
  double sample_noise = 0.0;  // per-entry variance of the training-sample error
};

struct ExperimentSpec {
  SystemConfig system;
  SweepConfig sweep;
  std::vector<double> snr_db{0, 2, 4, 6, 8, 10, 12, 14, 16};
  std::vector<Algorithm> algorithms{Algorithm::admm, Algorithm::irw_admm, Algorithm::map_admm};
  SolverConfig solver;
  CdiConfig cdi;
  int trials = 200;
  unsigned long long seed = 1;
  bool redraw_pilots = false;
  int calibration_probes = 1000;
  /// Emit measured wall time; off keeps reruns byte-identical.
  bool wall_time = false;
  /// Collect per-iteration NASE/SRR curves for the ADMM solvers.
  bool record_convergence = false;
  /// Worker threads; 0 picks the hardware concurrency.
  int threads = 0;

  void validate() const;
};

/// Parses the flat `key = value` format (see README). '#' starts a comment;
/// list values are comma separated. Unknown keys are errors.
ExperimentSpec parse_experiment_spec(std::istream& is);
ExperimentSpec load_experiment_spec(const std::string& path);

}  // namespace juice
