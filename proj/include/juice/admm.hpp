#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "juice/types.hpp"

namespace juice {

/// Raised when an iterate stops being finite.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SolverParams {
  double beta1 = 0.1;     // sparsity weight
  double beta2 = 0.05;    // Mahalanobis weight (MAP-ADMM only)
  double rho = 1.0;       // ADMM penalty
  double eps0 = 1e-3;     // log-sum stability constant
  double eps_stop = 1e-3; // ||X^(k) - X^(k-1)||_F stopping tolerance
  int l_max = 12;         // outer (MM) iterations
  int k_max = 5;          // inner (ADMM) iterations per outer iteration
  double eps_thr = 0.0;   // column-norm threshold for the detected support

  void validate(bool needs_beta2 = false) const;
};

enum class Weighting { reweighted, unit };

/// Complex multiplications performed by one inner iteration, broken down by step.
struct OpCounts {
  std::uint64_t z_update = 0;
  std::uint64_t v_update = 0;
  std::uint64_t x_update = 0;
  std::uint64_t dual_update = 0;
  std::uint64_t weights = 0;

  std::uint64_t total() const { return z_update + v_update + x_update + dual_update + weights; }
};

struct IterationRecord {
  int iteration = 0;  // 1-based inner iteration across the whole run
  int outer = 0;      // 1-based MM iteration
  double primal_z = 0.0;  // ||X - Z||_F
  double primal_v = std::numeric_limits<double>::quiet_NaN();  // ||X - V||_F, MAP only
  double objective = 0.0;
  double delta_x = 0.0;   // ||X^(k) - X^(k-1)||_F
  int active_columns = 0; // nonzero columns of X after the update
  OpCounts ops;
  // Filled only when ground truth is supplied.
  double squared_error = std::numeric_limits<double>::quiet_NaN();
  double reference_energy = std::numeric_limits<double>::quiet_NaN();
  double srr = std::numeric_limits<double>::quiet_NaN();
};

struct SolverTrace {
  std::vector<IterationRecord> records;
};

/// Optional ground truth used only to annotate the trace.
struct TraceTruth {
  const CMatrix* x = nullptr;
  IndexSet support;
};

struct RecoveryResult {
  CMatrix x_hat;
  IndexSet support;
  SolverTrace trace;
  int iterations_used = 0;
};

/// (Phi^T Phi^* + rho I_N)^{-1}.
CMatrix precompute_z_factor(const CMatrix& phi, double rho);

/// Z = (rho X + Lambda + Y^T Phi^*) * z_factor.
CMatrix z_update(const CMatrix& x, const CMatrix& lambda, const CMatrix& y_phi_conj,
                 const CMatrix& z_factor, double rho, OpCounts* ops = nullptr);

/// max{0, ||c|| - t} / ||c|| * c, with the zero vector for ||c|| = 0.
CVector group_soft_threshold(const CVector& c, double threshold);

/// g_i = 1 / (eps0 + ||x_i||).
RVector mm_weights(const CMatrix& x, double eps0, OpCounts* ops = nullptr);

/// (1/beta2) R_i (rho/beta2 R_i + I)^{-1} for every user. These are the exact
/// minimizers' linear maps for (beta2/2) v^H R^{-1} v + (rho/2)||x - v + lambda/rho||^2.
std::vector<CMatrix> precompute_v_factors(const std::vector<CMatrix>& scaled_covariances,
                                          double beta2, double rho);

/// v_i = v_factors[i] (rho x_i + lambda_v,i).
CMatrix v_update(const CMatrix& x, const CMatrix& lambda_v, const std::vector<CMatrix>& v_factors,
                 double rho, OpCounts* ops = nullptr);

/// S = (Z + V - (Lz + Lv)/rho)/2; x_i = group_soft_threshold(s_i, beta1 g_i / (2 rho)).
CMatrix map_x_update(const CMatrix& z, const CMatrix& v, const CMatrix& lambda_z,
                     const CMatrix& lambda_v, const RVector& weights, double beta1, double rho,
                     OpCounts* ops = nullptr);

/// {i : ||x_i|| > threshold}.
IndexSet detect_support(const CMatrix& x_hat, double threshold);

/// Reweighted l2,1 ADMM solver with the Phi-dependent quantities cached, so
/// one instance can decode many observations made with the same pilots.
class IrwAdmmSolver {
 public:
  IrwAdmmSolver(CMatrix phi, SolverParams params, Weighting weighting = Weighting::reweighted);
  /// Reuses a factor from precompute_z_factor(phi, params.rho).
  IrwAdmmSolver(CMatrix phi, CMatrix z_factor, SolverParams params,
                Weighting weighting = Weighting::reweighted);

  RecoveryResult solve(const CMatrix& y, const TraceTruth* truth = nullptr) const;

  const SolverParams& params() const { return params_; }

 private:
  CMatrix phi_;
  SolverParams params_;
  Weighting weighting_;
  CMatrix z_factor_;
};

/// MAP estimator with Gaussian channel priors given by scaled covariances
/// p_i R_i.
class MapAdmmSolver {
 public:
  MapAdmmSolver(CMatrix phi, const std::vector<CMatrix>& scaled_covariances, SolverParams params);
  /// Reuses factors from precompute_z_factor and precompute_v_factors, which
  /// must have been built with the same rho and beta2.
  MapAdmmSolver(CMatrix phi, CMatrix z_factor,
                std::shared_ptr<const std::vector<CMatrix>> v_factors, SolverParams params);

  RecoveryResult solve(const CMatrix& y, const TraceTruth* truth = nullptr) const;

  const SolverParams& params() const { return params_; }

 private:
  CMatrix phi_;
  SolverParams params_;
  CMatrix z_factor_;
  std::shared_ptr<const std::vector<CMatrix>> v_factors_;
};

RecoveryResult irw_admm(const CMatrix& y, const CMatrix& phi, const SolverParams& params,
                        Weighting weighting = Weighting::reweighted);

/// R~_i = powers(i) * covariances[i] is formed internally.
RecoveryResult map_admm(const CMatrix& y, const CMatrix& phi, const CovarianceSet& covariances,
                        const RVector& powers, const SolverParams& params);

/// CSV with columns iteration,outer,primal_z,primal_v,objective,delta_x,active,mults
/// and, when present, squared_error,reference_energy,srr.
void write_trace_csv(std::ostream& os, const SolverTrace& trace);

}  // namespace juice
