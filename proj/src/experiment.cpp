#include "juice/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <thread>
#include <tuple>

#include "juice/admm.hpp"
#include "juice/baselines.hpp"
#include "juice/cdi.hpp"
#include "juice/channel_model.hpp"
#include "juice/rng.hpp"
#include "juice/system_sim.hpp"

namespace juice {

namespace {

// Stream keys of the seed schedule.
enum StreamKey : std::uint64_t {
  kLayout = 1,
  kPilots = 2,
  kCalibration = 3,
  kTrial = 4,
  kCdi = 5,
};

bool is_admm(Algorithm a) {
  return a == Algorithm::admm || a == Algorithm::irw_admm || a == Algorithm::map_admm;
}

ExperimentSpec apply_sweep(const ExperimentSpec& spec, double value) {
  ExperimentSpec s = spec;
  const auto& var = spec.sweep.variable;
  const int iv = static_cast<int>(std::lround(value));
  if (var == "tau_p") s.system.pilot_length = iv;
  else if (var == "M") s.system.num_antennas = iv;
  else if (var == "K") s.system.num_active = iv;
  else if (var == "N") s.system.num_users = iv;
  else if (var == "cdi_samples") s.cdi.samples = iv;
  else if (var == "angular_std_deg") s.system.angular_std_deg = value;
  s.sweep.variable = "none";
  s.validate();
  return s;
}

struct Cell {
  double sweep_value = 0.0;
  ExperimentSpec cfg;
  UlaGeometry geometry;
  std::vector<ScatteringProfile> profiles;
  RVector powers;
  CovarianceSet cdi;              // covariances known to the receiver
  std::vector<CMatrix> scaled_cdi;
  PilotMatrix pilots;             // used unless pilots are redrawn per trial
  CMatrix z_factor;               // for `pilots`
  std::shared_ptr<const std::vector<CMatrix>> v_factors;
  NoiseCalibration calibration;   // at 0 dB
  double beta2 = 0.0, eps0 = 0.0, eps_thr = 0.0;
};

struct Outcome {
  bool failed = false;
  double srr = 0.0;
  NaseTerms nase;
  int iterations = 0;
  double wall_ms = 0.0;
  std::vector<NaseTerms> nase_per_iteration;
  std::vector<double> srr_per_iteration;
};

double noise_variance_at(const Cell& cell, double snr_db) {
  return cell.calibration.noise_variance / std::pow(10.0, snr_db / 10.0);
}

SolverParams params_at(const Cell& cell, double noise_variance) {
  const auto& sc = cell.cfg.solver;
  SolverParams p;
  p.beta1 = sc.beta1 ? *sc.beta1 : sc.beta1_scale * std::sqrt(noise_variance / 2.0);
  p.beta2 = cell.beta2;
  p.rho = sc.rho;
  p.eps0 = cell.eps0;
  p.eps_stop = sc.eps_stop;
  p.l_max = sc.l_max;
  p.k_max = sc.k_max;
  p.eps_thr = cell.eps_thr;
  return p;
}

using CovKey = std::tuple<int, int, double, double, int, int, std::uint64_t>;

class CovarianceCache {
 public:
  const CovarianceSet& get(const ExperimentSpec& cfg, const UlaGeometry& geometry,
                           const std::vector<ScatteringProfile>& profiles) {
    const auto& s = cfg.system;
    const CovKey key{s.num_users, s.num_antennas, s.antenna_spacing, s.angular_std_deg,
                     s.num_paths, s.quadrature_size, cfg.seed};
    auto it = cache_.find(key);
    if (it == cache_.end())
      it = cache_.emplace(key, synthesize_covariances(geometry, profiles, s.quadrature_size)).first;
    return it->second;
  }

 private:
  std::map<CovKey, CovarianceSet> cache_;
};

Cell build_cell(const ExperimentSpec& spec, double sweep_value, CovarianceCache& cache) {
  Cell cell;
  cell.sweep_value = sweep_value;
  cell.cfg = spec.sweep.variable == "none" ? spec : apply_sweep(spec, sweep_value);
  const auto& s = cell.cfg.system;
  const auto seed = cell.cfg.seed;

  cell.geometry = UlaGeometry{s.num_antennas, s.antenna_spacing};
  cell.profiles = experiment_layout(cell.cfg);

  CovarianceSet truth;
  if (!s.covariance_file.empty()) {
    truth = load_covariances(s.covariance_file);
    if (truth.num_users() != s.num_users || truth.num_antennas() != s.num_antennas)
      throw ConfigError("covariance file dimensions do not match system.N / system.M");
  } else {
    truth = cache.get(cell.cfg, cell.geometry, cell.profiles);
  }
  cell.powers = apply_power_control(truth);

  if (cell.cfg.cdi.mode == CdiConfig::Mode::trained) {
    Rng cdi_rng = derive_stream(seed, {kCdi, static_cast<std::uint64_t>(cell.cfg.cdi.samples),
                                       static_cast<std::uint64_t>(s.num_antennas),
                                       static_cast<std::uint64_t>(s.num_users)});
    cell.cdi = estimate_covariances(truth, cell.cfg.cdi.samples, cdi_rng, cell.cfg.cdi.sample_noise);
  } else {
    cell.cdi = truth;
  }
  for (int i = 0; i < cell.cdi.num_users(); ++i) cell.scaled_cdi.push_back(cell.powers(i) * cell.cdi.matrices[i]);

  Rng pilot_rng = derive_stream(seed, {kPilots, static_cast<std::uint64_t>(s.pilot_length),
                                       static_cast<std::uint64_t>(s.num_users)});
  cell.pilots = generate_pilots(s.pilot_length, s.num_users, pilot_rng);
  cell.z_factor = precompute_z_factor(cell.pilots.phi, cell.cfg.solver.rho);

  Rng cal_rng = derive_stream(seed, {kCalibration, static_cast<std::uint64_t>(s.pilot_length),
                                     static_cast<std::uint64_t>(s.num_users),
                                     static_cast<std::uint64_t>(s.num_antennas),
                                     static_cast<std::uint64_t>(s.num_active)});
  cell.calibration = calibrate_noise(cell.pilots, cell.geometry, cell.profiles, cell.powers, s.num_active,
                                     0.0, cell.cfg.calibration_probes, cal_rng);
  const double norm = cell.calibration.mean_active_norm;
  const auto& sc = cell.cfg.solver;
  cell.beta2 = sc.beta2 ? *sc.beta2 : sc.beta2_fraction * norm;
  cell.eps0 = sc.eps0 ? *sc.eps0 : sc.eps0_fraction * norm;
  cell.eps_thr = sc.eps_thr ? *sc.eps_thr : sc.eps_thr_fraction * norm;

  const bool wants_map = std::any_of(spec.algorithms.begin(), spec.algorithms.end(), [](Algorithm a) {
    return a == Algorithm::map_admm || a == Algorithm::map_admm_mmse_refine;
  });
  if (wants_map) {
    cell.v_factors = std::make_shared<const std::vector<CMatrix>>(
        precompute_v_factors(cell.scaled_cdi, cell.beta2, sc.rho));
  }
  return cell;
}

Outcome score(const RecoveryResult& r, const CMatrix& x_true, const IndexSet& truth, bool with_curve) {
  Outcome o;
  o.srr = srr(truth, r.support);
  o.nase = nase_accumulate(x_true, r.x_hat, truth);
  o.iterations = r.iterations_used;
  if (with_curve) {
    for (const auto& rec : r.trace.records) {
      o.nase_per_iteration.push_back({rec.squared_error, rec.reference_energy});
      o.srr_per_iteration.push_back(rec.srr);
    }
  }
  return o;
}

Outcome score_estimate(const CMatrix& x_hat, const CMatrix& x_true, const IndexSet& truth, double eps_thr) {
  Outcome o;
  o.srr = srr(truth, detect_support(x_hat, eps_thr));
  o.nase = nase_accumulate(x_true, x_hat, truth);
  return o;
}

// outcomes[snr][algorithm] for one trial.
using TrialOutcomes = std::vector<std::vector<Outcome>>;

// Every cell reuses the same per-trial streams (common random numbers), so
// cells differing only in one parameter are compared on matched draws.
TrialOutcomes run_trial(const ExperimentSpec& spec, const Cell& cell, int trial,
                        std::vector<TrialRecord>* records) {
  const auto& s = cell.cfg.system;
  Rng rng = derive_stream(spec.seed, {kTrial, static_cast<std::uint64_t>(trial)});
  const ActivityPattern activity = sample_activity(s.num_users, s.num_active, rng);
  const EffectiveChannel eff = draw_effective_channel(cell.geometry, cell.profiles, cell.powers, activity, rng);
  const CMatrix unit_noise = complex_gaussian_matrix(rng, s.pilot_length, s.num_antennas);

  PilotMatrix redrawn;
  CMatrix redrawn_factor;
  if (spec.redraw_pilots) {
    redrawn = generate_pilots(s.pilot_length, s.num_users, rng);
    redrawn_factor = precompute_z_factor(redrawn.phi, cell.cfg.solver.rho);
  }
  const PilotMatrix& pilots = spec.redraw_pilots ? redrawn : cell.pilots;
  const CMatrix& z_factor = spec.redraw_pilots ? redrawn_factor : cell.z_factor;

  TrialOutcomes out(spec.snr_db.size(), std::vector<Outcome>(spec.algorithms.size()));
  for (std::size_t si = 0; si < spec.snr_db.size(); ++si) {
    const double sigma2 = noise_variance_at(cell, spec.snr_db[si]);
    Observation obs = synthesize_observation(pilots, eff.x, sigma2, unit_noise);
    obs.snr_db = spec.snr_db[si];
    if (records) {
      records->push_back({cell.sweep_value, spec.snr_db[si], trial, pilots.phi, eff.x, obs.y,
                          activity.support, sigma2});
    }
    const SolverParams params = params_at(cell, sigma2);
    TraceTruth truth{&eff.x, activity.support};
    const TraceTruth* truth_ptr = spec.record_convergence ? &truth : nullptr;

    std::unique_ptr<RecoveryResult> map_result;  // shared by map_admm and the MMSE refinement
    auto run_map = [&]() -> const RecoveryResult& {
      if (!map_result) {
        MapAdmmSolver solver(pilots.phi, z_factor, cell.v_factors, params);
        map_result = std::make_unique<RecoveryResult>(solver.solve(obs.y, truth_ptr));
      }
      return *map_result;
    };

    for (std::size_t ai = 0; ai < spec.algorithms.size(); ++ai) {
      const Algorithm alg = spec.algorithms[ai];
      const auto start = std::chrono::steady_clock::now();
      Outcome o;
      try {
        switch (alg) {
          case Algorithm::admm:
          case Algorithm::irw_admm: {
            IrwAdmmSolver solver(pilots.phi, z_factor, params,
                                 alg == Algorithm::admm ? Weighting::unit : Weighting::reweighted);
            o = score(solver.solve(obs.y, truth_ptr), eff.x, activity.support, spec.record_convergence);
            break;
          }
          case Algorithm::map_admm:
            o = score(run_map(), eff.x, activity.support, spec.record_convergence);
            break;
          case Algorithm::somp: {
            SompOptions opts;
            opts.max_support = s.num_active;
            opts.eps_thr = cell.eps_thr;
            const auto r = somp(obs.y, pilots.phi, opts);
            o = score(r, eff.x, activity.support, false);
            break;
          }
          case Algorithm::oracle_ls:
            o = score_estimate(oracle_ls(obs.y, pilots.phi, activity.support), eff.x, activity.support,
                               cell.eps_thr);
            break;
          case Algorithm::oracle_mmse: {
            OracleContext ctx{activity.support, {}, sigma2};
            for (int i : activity.support) ctx.scaled_covariances.push_back(cell.scaled_cdi[static_cast<std::size_t>(i)]);
            o = score_estimate(oracle_joint_mmse(obs.y, pilots.phi, ctx), eff.x, activity.support, cell.eps_thr);
            break;
          }
          case Algorithm::map_admm_mmse_refine: {
            const auto& r = run_map();
            const CMatrix refined = mmse_refine(obs.y, pilots.phi, r.support, cell.cdi, cell.powers, sigma2);
            o = score_estimate(refined, eff.x, activity.support, cell.eps_thr);
            o.iterations = r.iterations_used;
            break;
          }
        }
      } catch (const std::exception&) {
        o = Outcome{};
        o.failed = true;
      }
      o.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
      out[si][ai] = std::move(o);
    }
  }
  return out;
}

}  // namespace

std::vector<ScatteringProfile> experiment_layout(const ExperimentSpec& spec) {
  const auto& s = spec.system;
  Rng rng = derive_stream(spec.seed, {kLayout, static_cast<std::uint64_t>(s.num_users)});
  return cell_layout(s.num_users, s.cell_radius, rng, s.angular_std_deg * std::numbers::pi / 180.0,
                     s.num_paths);
}

CovarianceSet experiment_covariances(const ExperimentSpec& spec) {
  const auto& s = spec.system;
  return synthesize_covariances(UlaGeometry{s.num_antennas, s.antenna_spacing}, experiment_layout(spec),
                                s.quadrature_size);
}

ExperimentResult run_experiment(const ExperimentSpec& spec, const RunOptions& options) {
  spec.validate();
  std::vector<double> sweep_values = spec.sweep.variable == "none" ? std::vector<double>{0.0} : spec.sweep.values;

  CovarianceCache cache;
  ExperimentResult result;
  const int budget = spec.solver.l_max * spec.solver.k_max;

  for (std::size_t ci = 0; ci < sweep_values.size(); ++ci) {
    const Cell cell = build_cell(spec, sweep_values[ci], cache);

    std::vector<TrialOutcomes> outcomes(static_cast<std::size_t>(spec.trials));
    std::vector<std::vector<TrialRecord>> records(static_cast<std::size_t>(std::min(options.keep_trials, spec.trials)));
    std::atomic<int> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&]() {
      for (int t = next++; t < spec.trials && !failed; t = next++) {
        try {
          auto* rec = t < static_cast<int>(records.size()) ? &records[static_cast<std::size_t>(t)] : nullptr;
          outcomes[static_cast<std::size_t>(t)] = run_trial(spec, cell, t, rec);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          failed = true;
        }
      }
    };
    int workers = spec.threads > 0 ? spec.threads : static_cast<int>(std::thread::hardware_concurrency());
    workers = std::clamp(workers, 1, spec.trials);
    if (workers == 1) {
      worker();
    } else {
      std::vector<std::thread> pool;
      for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
      for (auto& th : pool) th.join();
    }
    if (error) std::rethrow_exception(error);
    for (auto& r : records) result.trial_records.insert(result.trial_records.end(), r.begin(), r.end());

    // Reduction in trial order keeps sums bit-identical across worker counts.
    for (std::size_t si = 0; si < spec.snr_db.size(); ++si) {
      for (std::size_t ai = 0; ai < spec.algorithms.size(); ++ai) {
        MeanAccumulator srr_acc, iter_acc, wall_acc;
        NaseAccumulator nase_acc;
        int failures = 0;
        const bool curve = spec.record_convergence && is_admm(spec.algorithms[ai]);
        std::vector<NaseAccumulator> nase_curve(curve ? budget : 0);
        std::vector<MeanAccumulator> srr_curve(curve ? budget : 0);
        for (const auto& trial : outcomes) {
          const Outcome& o = trial[si][ai];
          if (o.failed) {
            ++failures;
            continue;
          }
          srr_acc.add(o.srr);
          nase_acc.add(o.nase);
          iter_acc.add(o.iterations);
          wall_acc.add(o.wall_ms);
          if (curve && !o.nase_per_iteration.empty()) {
            for (int k = 0; k < budget; ++k) {
              const auto idx = std::min<std::size_t>(static_cast<std::size_t>(k), o.nase_per_iteration.size() - 1);
              nase_curve[k].add(o.nase_per_iteration[idx]);
              srr_curve[k].add(o.srr_per_iteration[idx]);
            }
          }
        }
        CurvePoint p;
        p.sweep_variable = spec.sweep.variable;
        p.sweep_value = cell.sweep_value;
        p.snr_db = spec.snr_db[si];
        p.algorithm = spec.algorithms[ai];
        p.srr = srr_acc.mean();
        p.srr_std_error = srr_acc.std_error();
        p.squared_error = nase_acc.error();
        p.reference_energy = nase_acc.energy();
        p.nase = srr_acc.count() ? nase_acc.value() : std::nan("");
        p.nase_db = to_db(p.nase);
        p.mean_iterations = iter_acc.mean();
        p.trials = static_cast<int>(srr_acc.count());
        p.failures = failures;
        p.wall_ms = spec.wall_time ? wall_acc.mean() : 0.0;
        result.points.push_back(p);

        if (curve) {
          ConvergenceCurve c;
          c.sweep_value = cell.sweep_value;
          c.snr_db = spec.snr_db[si];
          c.algorithm = spec.algorithms[ai];
          for (int k = 0; k < budget; ++k) {
            c.nase.push_back(nase_curve[k].energy() > 0.0 ? nase_curve[k].value() : std::nan(""));
            c.srr.push_back(srr_curve[k].mean());
          }
          result.convergence.push_back(std::move(c));
        }
      }
    }
  }
  return result;
}

}  // namespace juice
