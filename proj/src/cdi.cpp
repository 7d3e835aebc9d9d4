#include "juice/cdi.hpp"

#include <stdexcept>

#include "juice/channel_model.hpp"

namespace juice {

CovarianceSet estimate_covariances(const CovarianceSet& true_covariances, int num_samples, Rng& rng,
                                   double channel_noise_variance) {
  if (num_samples < 1) throw std::invalid_argument("estimate_covariances: T must be >= 1");
  if (!(channel_noise_variance >= 0.0))
    throw std::invalid_argument("estimate_covariances: negative noise variance");
  CovarianceSet out;
  out.matrices.reserve(true_covariances.matrices.size());
  for (const auto& r : true_covariances.matrices) {
    const CMatrix factor = covariance_factor(r);
    const Eigen::Index m = r.rows();
    CMatrix samples(m, num_samples);
    for (int t = 0; t < num_samples; ++t) {
      CVector h = sample_gaussian_channel(factor, rng);
      if (channel_noise_variance > 0.0)
        for (Eigen::Index a = 0; a < m; ++a) h(a) += complex_gaussian(rng, channel_noise_variance);
      samples.col(t) = h;
    }
    CMatrix est = samples * samples.adjoint() / static_cast<double>(num_samples);
    out.matrices.push_back(0.5 * (est + est.adjoint()));
  }
  return out;
}

}  // namespace juice
