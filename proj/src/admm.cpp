#include "juice/admm.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "juice/metrics.hpp"

namespace juice {

namespace {

std::uint64_t u64(Eigen::Index v) { return static_cast<std::uint64_t>(v); }

void require_finite(const CMatrix& m, const char* what, int iteration) {
  if (!m.allFinite()) {
    throw SolverError(std::string("non-finite ") + what + " at inner iteration " +
                      std::to_string(iteration));
  }
}

// Squared norms cost M multiplications per column.
RVector column_norms(const CMatrix& x) {
  RVector n(x.cols());
  for (Eigen::Index i = 0; i < x.cols(); ++i) n(i) = x.col(i).norm();
  return n;
}

double weighted_l21(const CMatrix& x, const RVector& weights) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < x.cols(); ++i) s += weights(i) * x.col(i).norm();
  return s;
}

int nonzero_columns(const CMatrix& x) {
  int k = 0;
  for (Eigen::Index i = 0; i < x.cols(); ++i) k += x.col(i).squaredNorm() > 0.0 ? 1 : 0;
  return k;
}

void annotate(IterationRecord& rec, const CMatrix& x, const TraceTruth* truth, double eps_thr) {
  if (truth == nullptr || truth->x == nullptr || truth->support.empty()) return;
  const NaseTerms t = nase_accumulate(*truth->x, x, truth->support);
  rec.squared_error = t.squared_error;
  rec.reference_energy = t.reference_energy;
  rec.srr = srr(truth->support, detect_support(x, eps_thr));
}

void check_shapes(const CMatrix& y, const CMatrix& phi) {
  if (y.rows() != phi.rows())
    throw std::invalid_argument("solver: Y and Phi must have the same number of rows (tau_p)");
}

}  // namespace

void SolverParams::validate(bool needs_beta2) const {
  if (!(beta1 >= 0.0)) throw std::invalid_argument("SolverParams: beta1 must be >= 0");
  if (needs_beta2 && !(beta2 > 0.0)) throw std::invalid_argument("SolverParams: beta2 must be > 0");
  if (!(rho > 0.0)) throw std::invalid_argument("SolverParams: rho must be > 0");
  if (!(eps0 > 0.0)) throw std::invalid_argument("SolverParams: eps0 must be > 0");
  if (!(eps_stop > 0.0)) throw std::invalid_argument("SolverParams: eps_stop must be > 0");
  if (l_max < 1 || k_max < 1) throw std::invalid_argument("SolverParams: l_max, k_max must be >= 1");
  if (!(eps_thr >= 0.0)) throw std::invalid_argument("SolverParams: eps_thr must be >= 0");
}

CMatrix precompute_z_factor(const CMatrix& phi, double rho) {
  if (!(rho > 0.0)) throw std::invalid_argument("precompute_z_factor: rho must be > 0");
  const Eigen::Index n = phi.cols();
  CMatrix gram = phi.transpose() * phi.conjugate();
  gram.diagonal().array() += rho;
  Eigen::LLT<CMatrix> llt(gram);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("precompute_z_factor: Cholesky factorization failed");
  CMatrix inv = llt.solve(CMatrix::Identity(n, n));
  return 0.5 * (inv + inv.adjoint());
}

CMatrix z_update(const CMatrix& x, const CMatrix& lambda, const CMatrix& y_phi_conj,
                 const CMatrix& z_factor, double rho, OpCounts* ops) {
  CMatrix rhs = rho * x + lambda + y_phi_conj;
  CMatrix z = rhs * z_factor;
  if (ops) ops->z_update += u64(x.size()) + u64(x.rows()) * u64(z_factor.rows()) * u64(z_factor.cols());
  return z;
}

CVector group_soft_threshold(const CVector& c, double threshold) {
  if (!(threshold >= 0.0)) throw std::invalid_argument("group_soft_threshold: threshold < 0");
  const double norm = c.norm();
  if (norm <= threshold || norm == 0.0) return CVector::Zero(c.size());
  return ((norm - threshold) / norm) * c;
}

RVector mm_weights(const CMatrix& x, double eps0, OpCounts* ops) {
  if (!(eps0 > 0.0)) throw std::invalid_argument("mm_weights: eps0 must be > 0");
  RVector g = (column_norms(x).array() + eps0).inverse();
  if (ops) ops->weights += u64(x.size());
  return g;
}

std::vector<CMatrix> precompute_v_factors(const std::vector<CMatrix>& scaled_covariances,
                                          double beta2, double rho) {
  if (!(beta2 > 0.0) || !(rho > 0.0))
    throw std::invalid_argument("precompute_v_factors: beta2 and rho must be > 0");
  std::vector<CMatrix> out;
  out.reserve(scaled_covariances.size());
  for (const auto& r : scaled_covariances) {
    const CMatrix herm = 0.5 * (r + r.adjoint());
    // (1/b) R (rho/b R + I)^{-1} = (rho R + b I)^{-1} R; R and the inverse commute.
    CMatrix a = rho * herm;
    a.diagonal().array() += beta2;
    Eigen::LLT<CMatrix> llt(a);
    if (llt.info() != Eigen::Success)
      throw std::runtime_error("precompute_v_factors: (rho R + beta2 I) is not positive definite");
    CMatrix f = llt.solve(herm);
    out.push_back(0.5 * (f + f.adjoint()));
  }
  return out;
}

CMatrix v_update(const CMatrix& x, const CMatrix& lambda_v, const std::vector<CMatrix>& v_factors,
                 double rho, OpCounts* ops) {
  if (static_cast<Eigen::Index>(v_factors.size()) != x.cols())
    throw std::invalid_argument("v_update: one factor per user required");
  CMatrix v(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.cols(); ++i) {
    v.col(i).noalias() = v_factors[static_cast<std::size_t>(i)] * (rho * x.col(i) + lambda_v.col(i));
  }
  if (ops) ops->v_update += u64(x.cols()) * (u64(x.rows()) * u64(x.rows()) + u64(x.rows()));
  return v;
}

CMatrix map_x_update(const CMatrix& z, const CMatrix& v, const CMatrix& lambda_z,
                     const CMatrix& lambda_v, const RVector& weights, double beta1, double rho,
                     OpCounts* ops) {
  const CMatrix s = 0.5 * (z + v - (lambda_z + lambda_v) / rho);
  CMatrix x(s.rows(), s.cols());
  std::uint64_t scaled = 0;
  for (Eigen::Index i = 0; i < s.cols(); ++i) {
    x.col(i) = group_soft_threshold(s.col(i), beta1 * weights(i) / (2.0 * rho));
    if (x.col(i).squaredNorm() > 0.0) ++scaled;
  }
  // S formation, column norms, and the shrinkage of surviving columns.
  if (ops) ops->x_update += 2 * u64(s.size()) + scaled * u64(s.rows());
  return x;
}

IndexSet detect_support(const CMatrix& x_hat, double threshold) {
  if (!(threshold >= 0.0)) throw std::invalid_argument("detect_support: threshold < 0");
  IndexSet out;
  for (Eigen::Index i = 0; i < x_hat.cols(); ++i)
    if (x_hat.col(i).norm() > threshold) out.push_back(static_cast<int>(i));
  return out;
}

IrwAdmmSolver::IrwAdmmSolver(CMatrix phi, SolverParams params, Weighting weighting)
    : phi_(std::move(phi)), params_(params), weighting_(weighting) {
  params_.validate(false);
  z_factor_ = precompute_z_factor(phi_, params_.rho);
}

IrwAdmmSolver::IrwAdmmSolver(CMatrix phi, CMatrix z_factor, SolverParams params, Weighting weighting)
    : phi_(std::move(phi)), params_(params), weighting_(weighting), z_factor_(std::move(z_factor)) {
  params_.validate(false);
  if (z_factor_.rows() != phi_.cols() || z_factor_.cols() != phi_.cols())
    throw std::invalid_argument("IrwAdmmSolver: z_factor must be N x N");
}

RecoveryResult IrwAdmmSolver::solve(const CMatrix& y, const TraceTruth* truth) const {
  check_shapes(y, phi_);
  const Eigen::Index m = y.cols();
  const Eigen::Index n = phi_.cols();
  const double rho = params_.rho;
  const CMatrix y_phi_conj = y.transpose() * phi_.conjugate();

  CMatrix x = CMatrix::Zero(m, n);
  CMatrix z = CMatrix::Zero(m, n);
  CMatrix lambda = CMatrix::Zero(m, n);
  RVector g = RVector::Ones(n);

  RecoveryResult result;
  int iteration = 0;
  bool converged = false;
  for (int outer = 1; outer <= params_.l_max && !converged; ++outer) {
    for (int inner = 1; inner <= params_.k_max; ++inner) {
      ++iteration;
      IterationRecord rec;
      rec.iteration = iteration;
      rec.outer = outer;

      z = z_update(x, lambda, y_phi_conj, z_factor_, rho, &rec.ops);
      require_finite(z, "Z", iteration);

      const CMatrix c = z - lambda / rho;
      CMatrix x_next(m, n);
      std::uint64_t scaled = 0;
      for (Eigen::Index i = 0; i < n; ++i) {
        x_next.col(i) = group_soft_threshold(c.col(i), params_.beta1 * g(i) / rho);
        if (x_next.col(i).squaredNorm() > 0.0) ++scaled;
      }
      rec.ops.x_update += 2 * u64(m * n) + scaled * u64(m);
      require_finite(x_next, "X", iteration);

      lambda += rho * (x_next - z);
      rec.ops.dual_update += u64(m * n);

      rec.delta_x = (x_next - x).norm();
      x = std::move(x_next);
      rec.primal_z = (x - z).norm();
      rec.active_columns = static_cast<int>(scaled);
      rec.objective = 0.5 * (phi_ * x.transpose() - y).squaredNorm() + params_.beta1 * weighted_l21(x, g);
      annotate(rec, x, truth, params_.eps_thr);
      result.trace.records.push_back(rec);

      // A zero-to-zero step while Z is still far from X is a stall, not convergence.
      if (rec.delta_x < params_.eps_stop && rec.primal_z < params_.eps_stop) {
        converged = true;
        break;
      }
    }
    if (!converged && weighting_ == Weighting::reweighted) {
      g = mm_weights(x, params_.eps0, &result.trace.records.back().ops);
    }
  }

  result.iterations_used = iteration;
  result.support = detect_support(x, params_.eps_thr);
  result.x_hat = std::move(x);
  return result;
}

MapAdmmSolver::MapAdmmSolver(CMatrix phi, const std::vector<CMatrix>& scaled_covariances,
                             SolverParams params)
    : phi_(std::move(phi)), params_(params) {
  params_.validate(true);
  if (static_cast<Eigen::Index>(scaled_covariances.size()) != phi_.cols())
    throw std::invalid_argument("MapAdmmSolver: need one covariance per user");
  z_factor_ = precompute_z_factor(phi_, params_.rho);
  v_factors_ = std::make_shared<const std::vector<CMatrix>>(
      precompute_v_factors(scaled_covariances, params_.beta2, params_.rho));
}

MapAdmmSolver::MapAdmmSolver(CMatrix phi, CMatrix z_factor,
                             std::shared_ptr<const std::vector<CMatrix>> v_factors, SolverParams params)
    : phi_(std::move(phi)), params_(params), z_factor_(std::move(z_factor)), v_factors_(std::move(v_factors)) {
  params_.validate(true);
  if (z_factor_.rows() != phi_.cols() || z_factor_.cols() != phi_.cols())
    throw std::invalid_argument("MapAdmmSolver: z_factor must be N x N");
  if (!v_factors_ || static_cast<Eigen::Index>(v_factors_->size()) != phi_.cols())
    throw std::invalid_argument("MapAdmmSolver: need one V factor per user");
}

RecoveryResult MapAdmmSolver::solve(const CMatrix& y, const TraceTruth* truth) const {
  check_shapes(y, phi_);
  const Eigen::Index m = y.cols();
  const Eigen::Index n = phi_.cols();
  if (!v_factors_->empty() && v_factors_->front().rows() != m)
    throw std::invalid_argument("MapAdmmSolver: covariance size does not match Y");
  const double rho = params_.rho;
  const CMatrix y_phi_conj = y.transpose() * phi_.conjugate();

  CMatrix x = CMatrix::Zero(m, n);
  CMatrix z = CMatrix::Zero(m, n);
  CMatrix v = CMatrix::Zero(m, n);
  CMatrix lambda_z = CMatrix::Zero(m, n);
  CMatrix lambda_v = CMatrix::Zero(m, n);
  RVector g = RVector::Ones(n);

  RecoveryResult result;
  int iteration = 0;
  bool converged = false;
  for (int outer = 1; outer <= params_.l_max && !converged; ++outer) {
    for (int inner = 1; inner <= params_.k_max; ++inner) {
      ++iteration;
      IterationRecord rec;
      rec.iteration = iteration;
      rec.outer = outer;

      // Z and V depend only on the previous X and duals.
      z = z_update(x, lambda_z, y_phi_conj, z_factor_, rho, &rec.ops);
      const CMatrix v_input = rho * x + lambda_v;
      v = v_update(x, lambda_v, *v_factors_, rho, &rec.ops);
      require_finite(z, "Z", iteration);
      require_finite(v, "V", iteration);

      CMatrix x_next = map_x_update(z, v, lambda_z, lambda_v, g, params_.beta1, rho, &rec.ops);
      require_finite(x_next, "X", iteration);

      lambda_z += rho * (x_next - z);
      lambda_v += rho * (x_next - v);
      rec.ops.dual_update += 2 * u64(m * n);

      rec.delta_x = (x_next - x).norm();
      x = std::move(x_next);
      rec.primal_z = (x - z).norm();
      rec.primal_v = (x - v).norm();
      rec.active_columns = nonzero_columns(x);
      // (beta2/2) v^H R^{-1} v = v^H (u - rho v) / 2 with u = rho x + lambda_v.
      double mahalanobis = 0.0;
      for (Eigen::Index i = 0; i < n; ++i)
        mahalanobis += 0.5 * v.col(i).dot(v_input.col(i) - rho * v.col(i)).real();
      rec.objective = 0.5 * (phi_ * x.transpose() - y).squaredNorm() +
                      params_.beta1 * weighted_l21(x, g) + mahalanobis;
      annotate(rec, x, truth, params_.eps_thr);
      result.trace.records.push_back(rec);

      if (rec.delta_x < params_.eps_stop && std::max(rec.primal_z, rec.primal_v) < params_.eps_stop) {
        converged = true;
        break;
      }
    }
    if (!converged) g = mm_weights(x, params_.eps0, &result.trace.records.back().ops);
  }

  result.iterations_used = iteration;
  result.support = detect_support(x, params_.eps_thr);
  result.x_hat = std::move(x);
  return result;
}

RecoveryResult irw_admm(const CMatrix& y, const CMatrix& phi, const SolverParams& params,
                        Weighting weighting) {
  return IrwAdmmSolver(phi, params, weighting).solve(y);
}

RecoveryResult map_admm(const CMatrix& y, const CMatrix& phi, const CovarianceSet& covariances,
                        const RVector& powers, const SolverParams& params) {
  if (powers.size() != covariances.num_users())
    throw std::invalid_argument("map_admm: powers and covariances differ in length");
  std::vector<CMatrix> scaled;
  scaled.reserve(covariances.matrices.size());
  for (int i = 0; i < covariances.num_users(); ++i) scaled.push_back(powers(i) * covariances.matrices[i]);
  return MapAdmmSolver(phi, scaled, params).solve(y);
}

void write_trace_csv(std::ostream& os, const SolverTrace& trace) {
  const bool annotated = !trace.records.empty() && !std::isnan(trace.records.front().srr);
  os << "iteration,outer,primal_z,primal_v,objective,delta_x,active,mults";
  if (annotated) os << ",squared_error,reference_energy,srr";
  os << '\n';
  char buf[512];
  for (const auto& r : trace.records) {
    std::snprintf(buf, sizeof buf, "%d,%d,%.17g,%.17g,%.17g,%.17g,%d,%llu", r.iteration, r.outer,
                  r.primal_z, r.primal_v, r.objective, r.delta_x, r.active_columns,
                  static_cast<unsigned long long>(r.ops.total()));
    os << buf;
    if (annotated) {
      std::snprintf(buf, sizeof buf, ",%.17g,%.17g,%.17g", r.squared_error, r.reference_energy, r.srr);
      os << buf;
    }
    os << '\n';
  }
}

}  // namespace juice
