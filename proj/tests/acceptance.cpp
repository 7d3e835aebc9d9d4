// Default-size acceptance run: prints one PASS/FAIL line per criterion and
// exits nonzero if any criterion fails.  `acceptance --trials T` shrinks the
// Monte-Carlo runs for a quick look (the criteria are judged at 200 trials).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "juice/admm.hpp"
#include "juice/baselines.hpp"
#include "juice/cdi.hpp"
#include "juice/channel_model.hpp"
#include "juice/experiment.hpp"
#include "juice/metrics.hpp"
#include "juice/report.hpp"
#include "juice/system_sim.hpp"
#include "oracles.hpp"

using namespace juice;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    if (!detail.empty()) detail += "; ";
    detail += (ok ? "" : "MISS ") + what;
  }
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

double elapsed_s(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

ExperimentSpec default_spec(int trials) {
  ExperimentSpec s;
  s.system.num_users = 200;
  s.system.num_active = 10;
  s.system.num_antennas = 20;
  s.system.pilot_length = 20;
  s.system.angular_std_deg = 10.0;
  s.system.num_paths = 200;
  s.trials = trials;
  s.seed = 2024;
  s.redraw_pilots = true;
  s.solver.rho = 0.5;
  s.solver.eps0_fraction = 0.03;
  s.solver.eps_thr_fraction = 0.3;
  s.threads = 1;
  return s;
}

ExperimentResult run_logged(const std::string& label, const ExperimentSpec& spec) {
  const auto t0 = std::chrono::steady_clock::now();
  std::cerr << "[acceptance] running " << label << " (" << spec.trials << " trials)..." << std::endl;
  ExperimentResult r = run_experiment(spec);
  std::cerr << "[acceptance] " << label << " done in " << fmt("%.0f s", elapsed_s(t0)) << std::endl;
  return r;
}

class PointTable {
 public:
  explicit PointTable(const std::vector<CurvePoint>& pts) {
    for (const auto& p : pts) map_[key(p.sweep_value, p.snr_db, p.algorithm)] = p;
  }
  const CurvePoint& at(Algorithm a, double snr, double sweep = 0.0) const {
    auto it = map_.find(key(sweep, snr, a));
    if (it == map_.end()) throw std::runtime_error("missing point " + to_string(a));
    return it->second;
  }

 private:
  static std::string key(double sweep, double snr, Algorithm a) {
    return fmt("%g|%g|", sweep, snr) + to_string(a);
  }
  std::map<std::string, CurvePoint> map_;
};

void print_points(const std::vector<CurvePoint>& pts) {
  for (const auto& p : pts)
    std::cout << "    " << fmt("sweep=%-4g snr=%4.0f dB  ", p.sweep_value, p.snr_db) << to_string(p.algorithm)
              << fmt("  SRR=%.4f (se %.4f)  NASE=%.2f dB  iters=%.1f", p.srr, p.srr_std_error, p.nase_db,
                     p.mean_iterations)
              << "\n";
}

// ----------------------------------------------------------------------------
// Property suite

Verdict property_suite() {
  using testing::QuadraticTerm;
  Verdict v;
  Rng rng(77);

  double prox_err = 0.0;
  for (int t = 0; t < 40; ++t) {
    const CVector c = complex_gaussian_matrix(rng, 4, 1).col(0);
    const double thr = std::uniform_real_distribution<double>(0.0, 3.0)(rng);
    const CVector numeric = testing::minimize_weighted_norm_plus_quadratics(thr, {QuadraticTerm{1.0, c}});
    prox_err = std::max(prox_err, (group_soft_threshold(c, thr) - numeric).norm());
  }
  v.require(prox_err < 1e-8, fmt("prox oracle %.1e", prox_err));

  double z_res = 0.0;
  {
    const PilotMatrix p = generate_pilots(12, 60, rng);
    const CMatrix y = complex_gaussian_matrix(rng, 12, 6);
    const CMatrix x = complex_gaussian_matrix(rng, 6, 60), lam = complex_gaussian_matrix(rng, 6, 60);
    for (double rho : {0.3, 1.0, 5.0}) {
      const CMatrix z = z_update(x, lam, y.transpose() * p.phi.conjugate(), precompute_z_factor(p.phi, rho), rho);
      const CMatrix grad = (z - x - lam / rho) * rho + (z * p.phi.transpose() - y.transpose()) * p.phi.conjugate();
      z_res = std::max(z_res, grad.norm());
    }
  }
  v.require(z_res < 1e-8, fmt("Z stationarity %.1e", z_res));

  double v_res = 0.0;
  for (double beta2 : {0.05, 1.0})
    for (double rho : {0.5, 2.0}) {
      std::vector<CMatrix> covs;
      for (int i = 0; i < 3; ++i) covs.push_back(testing::random_hpd(5, rng));
      const CMatrix x = complex_gaussian_matrix(rng, 5, 3), lam = complex_gaussian_matrix(rng, 5, 3);
      const CMatrix vv = v_update(x, lam, precompute_v_factors(covs, beta2, rho), rho);
      for (int i = 0; i < 3; ++i) {
        const CVector r = beta2 * covs[i].ldlt().solve(vv.col(i)) - rho * (x.col(i) - vv.col(i) + lam.col(i) / rho);
        v_res = std::max(v_res, r.norm());
      }
    }
  v.require(v_res < 1e-8, fmt("V stationarity %.1e", v_res));

  double x_err = 0.0;
  for (int t = 0; t < 20; ++t) {
    const CMatrix z = complex_gaussian_matrix(rng, 3, 4), vv = complex_gaussian_matrix(rng, 3, 4);
    const CMatrix lz = complex_gaussian_matrix(rng, 3, 4), lv = complex_gaussian_matrix(rng, 3, 4);
    std::uniform_real_distribution<double> u(0.1, 2.0);
    RVector g(4);
    for (int i = 0; i < 4; ++i) g(i) = u(rng);
    const double beta1 = u(rng), rho = u(rng);
    const CMatrix x = map_x_update(z, vv, lz, lv, g, beta1, rho);
    for (int i = 0; i < 4; ++i) {
      const CVector direct = testing::minimize_weighted_norm_plus_quadratics(
          beta1 * g(i), {QuadraticTerm{rho, z.col(i) - lz.col(i) / rho}, QuadraticTerm{rho, vv.col(i) - lv.col(i) / rho}});
      x_err = std::max(x_err, (x.col(i) - direct).norm());
    }
  }
  v.require(x_err < 1e-6, fmt("X-update closed form vs numeric %.1e", x_err));

  double mmse_err = 0.0;
  {
    CMatrix phi = complex_gaussian_matrix(rng, 4, 8);
    for (int j = 0; j < 8; ++j) phi.col(j).normalize();
    const IndexSet s{1, 5};
    const int m = 3;
    std::vector<CMatrix> covs{testing::random_hpd(m, rng), testing::random_hpd(m, rng)};
    const double s2 = 0.4;
    const CMatrix y = complex_gaussian_matrix(rng, 4, m);
    const CMatrix theta = kronecker_dictionary(phi, s, m);
    CMatrix rinv = CMatrix::Zero(2 * m, 2 * m);
    for (int j = 0; j < 2; ++j) rinv.block(j * m, j * m, m, m) = covs[j].inverse();
    CVector yv(y.size());
    for (Eigen::Index t = 0; t < y.rows(); ++t)
      for (int a = 0; a < m; ++a) yv(t * m + a) = y(t, a);
    const CVector xs = (theta.adjoint() * theta / s2 + rinv).lu().solve(theta.adjoint() * yv / s2);
    const CMatrix est = oracle_joint_mmse(y, phi, {s, covs, s2});
    for (int j = 0; j < 2; ++j) mmse_err = std::max(mmse_err, (est.col(s[j]) - xs.segment(j * m, m)).norm());
  }
  v.require(mmse_err < 1e-8, fmt("MMSE information form %.1e", mmse_err));

  int agree = 0;
  for (int t = 0; t < 100; ++t) {
    CMatrix phi = complex_gaussian_matrix(rng, 15, 30);
    for (int j = 0; j < 30; ++j) phi.col(j).normalize();
    const IndexSet truth = sample_activity(30, 3, rng).support;
    CMatrix x = CMatrix::Zero(8, 30);
    for (int i : truth) x.col(i) = complex_gaussian_matrix(rng, 8, 1).col(0);
    const CMatrix y = phi * x.transpose();
    IndexSet best;
    double best_res = 1e300;
    for (int a = 0; a < 30; ++a)
      for (int b = a + 1; b < 30; ++b)
        for (int c = b + 1; c < 30; ++c) {
          const double r = testing::subset_residual(y, phi, {a, b, c});
          if (r < best_res) {
            best_res = r;
            best = {a, b, c};
          }
        }
    if (somp(y, phi, {3, 0.0, 1e-9}).support == best) ++agree;
  }
  v.require(agree >= 90, fmt("SOMP = exhaustive best-K on %.0f/100", agree));

  {
    UlaGeometry g{12, 0.5};
    Rng lr(5);
    const CovarianceSet truth = synthesize_covariances(g, cell_layout(1, 50.0, lr, 10.0 * M_PI / 180.0, 200), 100000);
    const double e_small = (estimate_covariances(truth, 100, rng).matrices[0] - truth.matrices[0]).norm();
    const double e_large = (estimate_covariances(truth, 100000, rng).matrices[0] - truth.matrices[0]).norm();
    const double rel = e_large / truth.matrices[0].norm();
    v.require(rel < 0.03 && e_large < e_small, fmt("covariance LLN rel. error %.3f at T=1e5 (%.3f at T=100)", rel,
                                                   e_small / truth.matrices[0].norm()));
  }

  {
    const IndexSet s{1, 3, 5, 7, 9, 11, 13, 15, 17, 19};
    const IndexSet hat{1, 3, 5, 7, 9, 11, 13, 15, 17, 42};
    CMatrix x = complex_gaussian_matrix(rng, 4, 20);
    const NaseTerms same = nase_accumulate(x, x, s);
    const NaseTerms zero = nase_accumulate(x, CMatrix::Zero(4, 20), s);
    const bool ok = srr(s, s) == 1.0 && srr(s, {}) == 0.0 && std::abs(srr(s, hat) - 0.75) < 1e-15 &&
                    same.squared_error == 0.0 && std::abs(zero.squared_error / zero.reference_energy - 1.0) < 1e-14;
    v.require(ok, "SRR/NASE identities");
  }

  {
    ExperimentSpec s;
    s.system.num_users = 40;
    s.system.num_active = 3;
    s.system.num_antennas = 4;
    s.system.pilot_length = 12;
    s.system.quadrature_size = 5000;
    s.snr_db = {4.0, 12.0};
    s.algorithms = {Algorithm::admm, Algorithm::irw_admm, Algorithm::map_admm, Algorithm::somp, Algorithm::oracle_mmse};
    s.trials = 8;
    s.redraw_pilots = true;
    s.threads = 1;
    std::ostringstream a, b;
    write_csv(a, run_experiment(s).points);
    s.threads = 3;
    write_csv(b, run_experiment(s).points);
    v.require(a.str() == b.str(), "byte-identical reruns");
  }
  return v;
}

// ----------------------------------------------------------------------------
// Operation counts

Verdict complexity_trend() {
  Verdict v;
  struct Size {
    int n, m;
  };
  for (Size s : {Size{100, 10}, Size{200, 20}, Size{400, 20}}) {
    Rng rng(static_cast<std::uint64_t>(1000 + s.n + s.m));
    const int tau = 20, k = 10;
    const PilotMatrix p = generate_pilots(tau, s.n, rng);
    CMatrix x = CMatrix::Zero(s.m, s.n);
    for (int i : sample_activity(s.n, k, rng).support) x.col(i) = complex_gaussian_matrix(rng, s.m, 1).col(0);
    const CMatrix y = p.phi * x.transpose() + 0.1 * complex_gaussian_matrix(rng, tau, s.m);
    SolverParams params;
    params.beta1 = 0.07;
    params.beta2 = 0.05;
    params.rho = 0.5;
    params.eps_stop = 1e-12;
    std::vector<CMatrix> covs(static_cast<std::size_t>(s.n), CMatrix::Identity(s.m, s.m));
    for (bool is_map : {false, true}) {
      const RecoveryResult res =
          is_map ? MapAdmmSolver(p.phi, covs, params).solve(y) : IrwAdmmSolver(p.phi, params).solve(y);
      double lo = 1e300, hi = 0.0;
      for (const auto& rec : res.trace.records) {
        const double n = s.n, m = s.m, kh = rec.active_columns;
        double table = (m + 1) * n * n + 3 * m * kh + m * (n - kh) + m * n;
        if (is_map) table += n * m * m + n * m;
        const double ratio = static_cast<double>(rec.ops.total()) / table;
        lo = std::min(lo, ratio);
        hi = std::max(hi, ratio);
      }
      v.require(lo >= 1.0 / 1.5 && hi <= 1.5,
                std::string(is_map ? "MAP" : "IRW") + fmt(" (N=%.0f,M=%.0f) ratio %.3f..%.3f", s.n, s.m, lo, hi));
    }
  }
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  int trials = 200;
  for (int i = 1; i + 1 < argc; ++i)
    if (std::string(argv[i]) == "--trials") trials = std::stoi(argv[i + 1]);

  const auto t0 = std::chrono::steady_clock::now();
  std::vector<std::pair<std::string, Verdict>> results;
  auto record = [&](int id, const std::string& name, Verdict v) {
    std::cout << (v.pass ? "PASS" : "FAIL") << " criterion " << id << ": " << name << " [" << v.detail << "]"
              << std::endl;
    results.emplace_back(name, v);
  };

  // Main sweep at τp = 20: shared by criteria 1, 2, 3, 5, 6, 7, 9.
  ExperimentSpec main_spec = default_spec(trials);
  main_spec.snr_db = {6, 8, 10, 12, 14, 16};
  main_spec.algorithms = {Algorithm::admm, Algorithm::irw_admm, Algorithm::map_admm, Algorithm::map_admm_mmse_refine,
                          Algorithm::oracle_mmse};
  main_spec.record_convergence = true;
  const ExperimentResult main_run = run_logged("tau_p=20 SNR sweep", main_spec);
  std::cout << "  tau_p=20 sweep:\n";
  print_points(main_run.points);
  const PointTable tab(main_run.points);

  ExperimentSpec short_spec = default_spec(trials);
  short_spec.system.pilot_length = 12;
  short_spec.snr_db = {12, 16};
  short_spec.algorithms = {Algorithm::map_admm};
  const ExperimentResult short_run = run_logged("tau_p=12", short_spec);
  std::cout << "  tau_p=12:\n";
  print_points(short_run.points);
  const PointTable short_tab(short_run.points);

  ExperimentSpec cdi_spec = default_spec(trials);
  cdi_spec.snr_db = {16};
  cdi_spec.algorithms = {Algorithm::map_admm};
  cdi_spec.cdi.mode = CdiConfig::Mode::trained;
  cdi_spec.sweep.variable = "cdi_samples";
  cdi_spec.sweep.values = {5, 40};
  const ExperimentResult cdi_run = run_logged("trained CDI", cdi_spec);
  std::cout << "  trained CDI at 16 dB:\n";
  print_points(cdi_run.points);
  const PointTable cdi_tab(cdi_run.points);

  {
    Verdict v;
    for (double s : {8.0, 12.0, 16.0}) {
      const double r = tab.at(Algorithm::irw_admm, s).srr;
      v.require(r >= 0.90, fmt("SRR %.3f at %.0f dB", r, s));
    }
    record(1, "IRW-ADMM SRR >= 0.90 at 8/12/16 dB (tau_p=20)", v);
  }
  {
    Verdict v;
    for (double s : {8.0, 10.0, 12.0, 14.0, 16.0}) {
      const double gap = tab.at(Algorithm::irw_admm, s).srr - tab.at(Algorithm::admm, s).srr;
      v.require(gap >= 0.05, fmt("gap %+.3f at %.0f dB", gap, s));
    }
    record(2, "IRW-ADMM SRR exceeds unit-weight ADMM by >= 0.05 at 8-16 dB", v);
  }
  {
    Verdict v;
    for (double s : {10.0, 12.0, 16.0}) {
      const double r = tab.at(Algorithm::map_admm, s).srr;
      v.require(r >= 0.99, fmt("SRR %.4f at %.0f dB", r, s));
    }
    record(3, "MAP-ADMM SRR >= 0.99 at 10/12/16 dB (tau_p=20)", v);
  }
  {
    Verdict v;
    for (double s : {12.0, 16.0}) {
      const double r = short_tab.at(Algorithm::map_admm, s).srr;
      v.require(r >= 0.90, fmt("SRR %.4f at %.0f dB", r, s));
    }
    record(4, "MAP-ADMM SRR >= 0.90 at 12/16 dB (tau_p=12)", v);
  }
  {
    Verdict v;
    const double map = tab.at(Algorithm::map_admm, 16).nase_db, irw = tab.at(Algorithm::irw_admm, 16).nase_db,
                 admm = tab.at(Algorithm::admm, 16).nase_db;
    v.require(irw - map >= 1.0, fmt("MAP %.2f dB vs IRW %.2f dB", map, irw));
    v.require(admm - irw >= 1.0, fmt("IRW %.2f dB vs ADMM %.2f dB", irw, admm));
    record(5, "NASE ordering MAP < IRW < ADMM at 16 dB, gaps >= 1 dB", v);
  }
  {
    Verdict v;
    for (double s : {6.0, 8.0, 10.0}) {
      const double map = tab.at(Algorithm::map_admm, s).nase_db, irw = tab.at(Algorithm::irw_admm, s + 4).nase_db;
      v.require(map <= irw, fmt("MAP@%.0f %.2f dB vs IRW@%.0f %.2f dB", s, map, s + 4, irw));
    }
    record(6, "MAP-ADMM at SNR s matches IRW-ADMM at s+4 dB", v);
  }
  {
    Verdict v;
    for (double s : {10.0, 12.0, 14.0, 16.0}) {
      const double ref = tab.at(Algorithm::map_admm_mmse_refine, s).nase_db;
      const double orc = tab.at(Algorithm::oracle_mmse, s).nase_db;
      v.require(ref - orc <= 0.5, fmt("refined %.2f dB vs oracle %.2f dB at %.0f dB", ref, orc, s));
    }
    record(7, "MAP-ADMM + MMSE refinement within 0.5 dB of oracle MMSE at >= 10 dB", v);
  }
  {
    Verdict v;
    const double perfect = tab.at(Algorithm::map_admm, 16).nase_db;
    const double t40 = cdi_tab.at(Algorithm::map_admm, 16, 40).nase_db;
    const double t5 = cdi_tab.at(Algorithm::map_admm, 16, 5).nase_db;
    const double irw = tab.at(Algorithm::irw_admm, 16).nase_db;
    v.require(t40 - perfect <= 1.0, fmt("T=40 %.2f dB vs perfect %.2f dB", t40, perfect));
    v.require(t5 > irw, fmt("T=5 %.2f dB vs IRW %.2f dB", t5, irw));
    record(8, "trained CDI: T=40 within 1 dB of perfect CDI, T=5 worse than IRW-ADMM", v);
  }
  {
    Verdict v;
    for (const auto& c : main_run.convergence) {
      if (c.snr_db != 16.0 || (c.algorithm != Algorithm::irw_admm && c.algorithm != Algorithm::map_admm)) continue;
      const double final_db = to_db(c.nase.back());
      const double at45 = to_db(c.nase[44]);
      v.require(std::abs(at45 - final_db) <= 0.2,
                to_string(c.algorithm) + fmt(" %.2f dB at iter 45 vs %.2f dB final", at45, final_db));
    }
    record(9, "convergence within 0.2 dB of final NASE by iteration 45 (16 dB)", v);
  }
  std::cerr << "[acceptance] property suite..." << std::endl;
  record(10, "property suite", property_suite());
  record(11, "operation counts within 1.5x of the complexity table", complexity_trend());

  int failed = 0;
  for (const auto& [name, v] : results) failed += v.pass ? 0 : 1;
  std::cout << (results.size() - failed) << "/" << results.size() << " criteria passed in "
            << fmt("%.0f s", elapsed_s(t0)) << std::endl;
  return failed == 0 ? 0 : 1;
}
