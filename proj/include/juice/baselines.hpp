#pragma once

#include <string>
#include <vector>

#include "juice/admm.hpp"
#include "juice/types.hpp"

namespace juice {

struct SompOptions {
  int max_support = 1;
  /// Stop early once ||residual||_F falls to this value; 0 disables.
  double residual_tolerance = 0.0;
  double eps_thr = 0.0;
};

/// Simultaneous orthogonal matching pursuit. Selection maximizes the l2 norm
/// of the rows of Phi^H R; ties go to the lowest index. Coefficients of all
/// selected atoms are refit by least squares after every selection.
/// RecoveryResult::iterations_used counts selected atoms; notes on a
/// rank-deficient refit are appended to `diagnostics` when given.
RecoveryResult somp(const CMatrix& y, const CMatrix& phi, const SompOptions& options,
                    std::vector<std::string>* diagnostics = nullptr);

/// Least squares on the known support: X_S^T = (Phi_S^H Phi_S)^{-1} Phi_S^H Y.
/// Returns the full M x N matrix with zeros outside the support.
CMatrix oracle_ls(const CMatrix& y, const CMatrix& phi, const IndexSet& support);

struct OracleContext {
  IndexSet support;
  /// One scaled covariance p_i R_i per entry of `support`.
  std::vector<CMatrix> scaled_covariances;
  double noise_variance = 0.0;
};

/// Joint linear MMSE estimate of the active channels from vec(Y^T) =
/// (Phi_S kron I_M) vec(X_S) + vec(W^T) under zero-mean priors. Returns the
/// full M x N matrix with zeros outside the support.
CMatrix oracle_joint_mmse(const CMatrix& y, const CMatrix& phi, const OracleContext& ctx);

/// Joint MMSE on a detected support. An empty support yields the zero matrix.
CMatrix mmse_refine(const CMatrix& y, const CMatrix& phi, const IndexSet& support_hat,
                    const CovarianceSet& covariances, const RVector& powers, double noise_variance,
                    std::vector<std::string>* diagnostics = nullptr);

/// Materialized Phi_S kron I_M.
CMatrix kronecker_dictionary(const CMatrix& phi, const IndexSet& support, int num_antennas);

}  // namespace juice
