#pragma once

#include "juice/rng.hpp"
#include "juice/types.hpp"

namespace juice {

/// Sample covariance R^_i = (1/T) sum_t h^_t h^_t^H over T training draws per
/// user, with h^_t = h_t + e_t, h_t ~ CN(0, R_i) and e_t ~ CN(0, noise I).
/// No regularization is applied, so R^_i has rank <= T.
CovarianceSet estimate_covariances(const CovarianceSet& true_covariances, int num_samples, Rng& rng,
                                   double channel_noise_variance = 0.0);

}  // namespace juice
