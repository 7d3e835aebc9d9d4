#include "juice/baselines.hpp"

#include <algorithm>
#include <stdexcept>

namespace juice {

namespace {

CMatrix select_columns(const CMatrix& phi, const IndexSet& support) {
  CMatrix out(phi.rows(), static_cast<Eigen::Index>(support.size()));
  for (std::size_t k = 0; k < support.size(); ++k) out.col(static_cast<Eigen::Index>(k)) = phi.col(support[k]);
  return out;
}

void check_support(const IndexSet& support, Eigen::Index n) {
  for (std::size_t k = 0; k < support.size(); ++k) {
    if (support[k] < 0 || support[k] >= n) throw std::invalid_argument("support index out of range");
    if (k > 0 && support[k] <= support[k - 1])
      throw std::invalid_argument("support must be sorted and duplicate-free");
  }
}

}  // namespace

RecoveryResult somp(const CMatrix& y, const CMatrix& phi, const SompOptions& options,
                    std::vector<std::string>* diagnostics) {
  const Eigen::Index n = phi.cols();
  if (y.rows() != phi.rows()) throw std::invalid_argument("somp: Y and Phi row counts differ");
  if (options.max_support < 1 || options.max_support > std::min(phi.rows(), n))
    throw std::invalid_argument("somp: need 1 <= max_support <= min(tau_p, N)");

  std::vector<int> chosen;  // in selection order
  std::vector<bool> used(static_cast<std::size_t>(n), false);
  CMatrix residual = y;
  CMatrix coeffs;  // |chosen| x M

  RecoveryResult result;
  for (int step = 0; step < options.max_support; ++step) {
    if (options.residual_tolerance > 0.0 && residual.norm() <= options.residual_tolerance) break;
    const CMatrix corr = phi.adjoint() * residual;  // N x M
    int best = -1;
    double best_score = -1.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (used[static_cast<std::size_t>(i)]) continue;
      const double score = corr.row(i).squaredNorm();
      if (score > best_score) {
        best_score = score;
        best = static_cast<int>(i);
      }
    }
    chosen.push_back(best);
    used[static_cast<std::size_t>(best)] = true;

    const CMatrix sub = select_columns(phi, chosen);
    Eigen::CompleteOrthogonalDecomposition<CMatrix> cod(sub);
    if (cod.rank() < sub.cols() && diagnostics) {
      diagnostics->push_back("somp: selected subdictionary is rank deficient at step " +
                             std::to_string(step + 1) + "; using the pseudo-inverse fit");
    }
    coeffs = cod.solve(y);
    residual = y - sub * coeffs;
    result.iterations_used = step + 1;
  }

  result.x_hat = CMatrix::Zero(y.cols(), n);
  for (std::size_t k = 0; k < chosen.size(); ++k)
    result.x_hat.col(chosen[k]) = coeffs.row(static_cast<Eigen::Index>(k)).transpose();
  result.support = detect_support(result.x_hat, options.eps_thr);
  return result;
}

CMatrix oracle_ls(const CMatrix& y, const CMatrix& phi, const IndexSet& support) {
  if (y.rows() != phi.rows()) throw std::invalid_argument("oracle_ls: Y and Phi row counts differ");
  check_support(support, phi.cols());
  if (static_cast<Eigen::Index>(support.size()) > phi.rows())
    throw std::invalid_argument("oracle_ls: |S| exceeds the pilot length");
  CMatrix out = CMatrix::Zero(y.cols(), phi.cols());
  if (support.empty()) return out;
  const CMatrix sub = select_columns(phi, support);
  Eigen::ColPivHouseholderQR<CMatrix> qr(sub);
  if (qr.rank() < sub.cols()) throw std::runtime_error("oracle_ls: Phi_S is rank deficient");
  const CMatrix xs_t = qr.solve(y);  // K x M
  for (std::size_t k = 0; k < support.size(); ++k)
    out.col(support[k]) = xs_t.row(static_cast<Eigen::Index>(k)).transpose();
  return out;
}

CMatrix kronecker_dictionary(const CMatrix& phi, const IndexSet& support, int num_antennas) {
  const Eigen::Index tau = phi.rows();
  const Eigen::Index k = static_cast<Eigen::Index>(support.size());
  const Eigen::Index m = num_antennas;
  CMatrix theta = CMatrix::Zero(tau * m, k * m);
  for (Eigen::Index t = 0; t < tau; ++t)
    for (Eigen::Index j = 0; j < k; ++j)
      for (Eigen::Index a = 0; a < m; ++a) theta(t * m + a, j * m + a) = phi(t, support[static_cast<std::size_t>(j)]);
  return theta;
}

CMatrix oracle_joint_mmse(const CMatrix& y, const CMatrix& phi, const OracleContext& ctx) {
  if (y.rows() != phi.rows()) throw std::invalid_argument("oracle_joint_mmse: Y and Phi row counts differ");
  if (!(ctx.noise_variance > 0.0)) throw std::invalid_argument("oracle_joint_mmse: noise variance must be > 0");
  check_support(ctx.support, phi.cols());
  if (ctx.scaled_covariances.size() != ctx.support.size())
    throw std::invalid_argument("oracle_joint_mmse: one covariance per active user required");

  const Eigen::Index m = y.cols();
  const Eigen::Index tau = y.rows();
  const Eigen::Index k = static_cast<Eigen::Index>(ctx.support.size());
  CMatrix out = CMatrix::Zero(m, phi.cols());
  if (k == 0) return out;

  const CMatrix theta = kronecker_dictionary(phi, ctx.support, static_cast<int>(m));
  CMatrix r_diag = CMatrix::Zero(k * m, k * m);
  for (Eigen::Index j = 0; j < k; ++j) {
    const auto& r = ctx.scaled_covariances[static_cast<std::size_t>(j)];
    if (r.rows() != m || r.cols() != m) throw std::invalid_argument("oracle_joint_mmse: covariance size mismatch");
    r_diag.block(j * m, j * m, m, m) = r;
  }

  // vec(Y^T): entry t*M + a is Y(t, a).
  CVector yv(tau * m);
  for (Eigen::Index t = 0; t < tau; ++t)
    for (Eigen::Index a = 0; a < m; ++a) yv(t * m + a) = y(t, a);

  const CMatrix r_theta_h = r_diag * theta.adjoint();
  CMatrix q = theta * r_theta_h;
  q = 0.5 * (q + q.adjoint());
  q.diagonal().array() += ctx.noise_variance;
  Eigen::LLT<CMatrix> llt(q);
  if (llt.info() != Eigen::Success) throw std::runtime_error("oracle_joint_mmse: factorization failed");
  const CVector xs = r_theta_h * llt.solve(yv);

  for (Eigen::Index j = 0; j < k; ++j)
    out.col(ctx.support[static_cast<std::size_t>(j)]) = xs.segment(j * m, m);
  return out;
}

CMatrix mmse_refine(const CMatrix& y, const CMatrix& phi, const IndexSet& support_hat,
                    const CovarianceSet& covariances, const RVector& powers, double noise_variance,
                    std::vector<std::string>* diagnostics) {
  if (support_hat.empty()) {
    if (diagnostics) diagnostics->push_back("mmse_refine: empty support, returning zero estimate");
    return CMatrix::Zero(y.cols(), phi.cols());
  }
  OracleContext ctx;
  ctx.support = support_hat;
  ctx.noise_variance = noise_variance;
  for (int i : support_hat) ctx.scaled_covariances.push_back(powers(i) * covariances.matrices.at(static_cast<std::size_t>(i)));
  return oracle_joint_mmse(y, phi, ctx);
}

}  // namespace juice
