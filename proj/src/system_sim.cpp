#include "juice/system_sim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace juice {

PilotMatrix generate_pilots(int pilot_length, int num_users, Rng& rng) {
  if (pilot_length < 1 || num_users < 1)
    throw std::invalid_argument("generate_pilots: dimensions must be >= 1");
  const double scale = 1.0 / std::sqrt(2.0 * pilot_length);
  std::bernoulli_distribution coin(0.5);
  PilotMatrix out{CMatrix(pilot_length, num_users)};
  for (int j = 0; j < num_users; ++j) {
    for (int t = 0; t < pilot_length; ++t) {
      const double re = coin(rng) ? scale : -scale;
      const double im = coin(rng) ? scale : -scale;
      out.phi(t, j) = Complex{re, im};
    }
  }
  return out;
}

ActivityPattern sample_activity(int num_users, int num_active, Rng& rng) {
  if (num_users < 1) throw std::invalid_argument("sample_activity: num_users must be >= 1");
  if (num_active < 0 || num_active > num_users)
    throw std::invalid_argument("sample_activity: need 0 <= K <= N");
  // Partial Fisher-Yates.
  std::vector<int> idx(static_cast<std::size_t>(num_users));
  std::iota(idx.begin(), idx.end(), 0);
  for (int k = 0; k < num_active; ++k) {
    std::uniform_int_distribution<int> pick(k, num_users - 1);
    std::swap(idx[k], idx[pick(rng)]);
  }
  ActivityPattern out;
  out.support.assign(idx.begin(), idx.begin() + num_active);
  std::sort(out.support.begin(), out.support.end());
  out.indicator.assign(static_cast<std::size_t>(num_users), 0);
  for (int i : out.support) out.indicator[i] = 1;
  return out;
}

RVector apply_power_control(const CovarianceSet& covariances) {
  RVector p(covariances.num_users());
  for (int i = 0; i < covariances.num_users(); ++i) {
    const auto& r = covariances.matrices[i];
    const double gain = r.trace().real() / static_cast<double>(r.rows());
    if (!(gain > 0.0)) throw std::invalid_argument("apply_power_control: non-positive trace");
    p(i) = 1.0 / gain;
  }
  return p;
}

EffectiveChannel draw_effective_channel(const UlaGeometry& geometry,
                                        const std::vector<ScatteringProfile>& profiles,
                                        const RVector& powers, const ActivityPattern& activity,
                                        Rng& rng) {
  const int n = static_cast<int>(profiles.size());
  if (powers.size() != n) throw std::invalid_argument("draw_effective_channel: size mismatch");
  EffectiveChannel out{CMatrix::Zero(geometry.num_antennas, n), powers};
  for (int i : activity.support) {
    out.x.col(i) = std::sqrt(powers(i)) * sample_channel(geometry, profiles[i], rng);
  }
  return out;
}

NoiseCalibration calibrate_noise(const PilotMatrix& pilots, const UlaGeometry& geometry,
                                 const std::vector<ScatteringProfile>& profiles,
                                 const RVector& powers, int num_active, double target_snr_db,
                                 int num_probes, Rng& rng) {
  if (num_probes < 100) throw std::invalid_argument("calibrate_noise: num_probes must be >= 100");
  const int n = pilots.num_users();
  double energy = 0.0;
  double norm_sum = 0.0;
  long norm_count = 0;
  for (int probe = 0; probe < num_probes; ++probe) {
    const auto activity = sample_activity(n, num_active, rng);
    const auto eff = draw_effective_channel(geometry, profiles, powers, activity, rng);
    energy += (pilots.phi * eff.x.transpose()).squaredNorm();
    for (int i : activity.support) {
      norm_sum += eff.x.col(i).norm();
      ++norm_count;
    }
  }
  NoiseCalibration out;
  out.signal_energy = energy / num_probes;
  out.mean_active_norm = norm_count ? norm_sum / static_cast<double>(norm_count) : 0.0;
  out.noise_variance = out.signal_energy /
                       (static_cast<double>(pilots.pilot_length()) * geometry.num_antennas *
                        std::pow(10.0, target_snr_db / 10.0));
  return out;
}

Observation synthesize_observation(const PilotMatrix& pilots, const CMatrix& x,
                                   double noise_variance, const CMatrix& unit_noise) {
  if (x.cols() != pilots.phi.cols())
    throw std::invalid_argument("synthesize_observation: X has wrong number of columns");
  if (unit_noise.rows() != pilots.phi.rows() || unit_noise.cols() != x.rows())
    throw std::invalid_argument("synthesize_observation: noise shape mismatch");
  if (!(noise_variance >= 0.0))
    throw std::invalid_argument("synthesize_observation: negative noise variance");
  Observation obs;
  obs.y = pilots.phi * x.transpose();
  if (noise_variance > 0.0) obs.y += std::sqrt(noise_variance) * unit_noise;
  obs.noise_variance = noise_variance;
  return obs;
}

Observation synthesize_observation(const PilotMatrix& pilots, const CMatrix& x,
                                   double noise_variance, Rng& rng) {
  const CMatrix w = complex_gaussian_matrix(rng, pilots.phi.rows(), x.rows());
  return synthesize_observation(pilots, x, noise_variance, w);
}

}  // namespace juice
