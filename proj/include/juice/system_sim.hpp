#pragma once

#include <vector>

#include "juice/channel_model.hpp"
#include "juice/rng.hpp"
#include "juice/types.hpp"

namespace juice {

/// tau_p x N matrix of unit-norm QPSK pilot columns.
struct PilotMatrix {
  CMatrix phi;

  int pilot_length() const { return static_cast<int>(phi.rows()); }
  int num_users() const { return static_cast<int>(phi.cols()); }
};

struct ActivityPattern {
  IndexSet support;               // sorted
  std::vector<unsigned char> indicator;  // 0/1 per user

  int num_active() const { return static_cast<int>(support.size()); }
};

/// M x N effective channel; column i is sqrt(p_i) h_i for active users, zero otherwise.
struct EffectiveChannel {
  CMatrix x;
  RVector powers;
};

struct Observation {
  CMatrix y;  // tau_p x M
  double noise_variance = 0.0;
  double snr_db = 0.0;
};

/// Entries (+-1 +- j)/sqrt(2 tau_p) with independent equiprobable signs.
PilotMatrix generate_pilots(int pilot_length, int num_users, Rng& rng);

/// Uniformly random K-subset of {0..N-1}.
ActivityPattern sample_activity(int num_users, int num_active, Rng& rng);

/// p_i = 1 / (trace(R_i)/M).
RVector apply_power_control(const CovarianceSet& covariances);

/// Draws channels of the active users from the scattering model and forms X.
EffectiveChannel draw_effective_channel(const UlaGeometry& geometry,
                                        const std::vector<ScatteringProfile>& profiles,
                                        const RVector& powers, const ActivityPattern& activity,
                                        Rng& rng);

struct NoiseCalibration {
  double noise_variance = 0.0;
  /// Monte-Carlo estimate of E||Phi X^T||_F^2.
  double signal_energy = 0.0;
  /// Mean l2 norm of the nonzero effective-channel columns seen while probing.
  double mean_active_norm = 0.0;
};

/// sigma^2 = E||Phi X^T||_F^2 / (tau_p M 10^(snr/10)), with the expectation
/// estimated over num_probes draws of (activity, channels).
NoiseCalibration calibrate_noise(const PilotMatrix& pilots, const UlaGeometry& geometry,
                                 const std::vector<ScatteringProfile>& profiles,
                                 const RVector& powers, int num_active, double target_snr_db,
                                 int num_probes, Rng& rng);

/// Y = Phi X^T + W with W_{tm} ~ CN(0, noise_variance).
Observation synthesize_observation(const PilotMatrix& pilots, const CMatrix& x,
                                   double noise_variance, Rng& rng);

/// Same as above with the noise supplied as a unit-variance draw that is
/// scaled by sqrt(noise_variance); lets several SNRs share one noise shape.
Observation synthesize_observation(const PilotMatrix& pilots, const CMatrix& x,
                                   double noise_variance, const CMatrix& unit_noise);

}  // namespace juice
