#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "juice/rng.hpp"
#include "juice/types.hpp"

namespace juice {

/// Uniform linear array at the base station.
struct UlaGeometry {
  int num_antennas = 20;
  /// Spacing between adjacent elements, in wavelengths.
  double antenna_spacing = 0.5;

  void validate() const;
};

/// Local-scattering description of one user: a nominal incident angle plus
/// Gaussian angular deviations of the individual paths.
struct ScatteringProfile {
  double incident_angle = 0.0;  // radians, [-pi/2, pi/2]
  double angular_std = 0.0;     // radians
  int num_paths = 1;

  void validate() const;
};

inline constexpr int kDefaultQuadratureSize = 1'000'000;

/// a(angle)[m] = exp(-j 2 pi m spacing cos(angle)).
CVector steering_vector(const UlaGeometry& geometry, double angle);

/// One draw of h = P^{-1/2} sum_p g_p a(angle + zeta_p) with g_p ~ CN(0, 1)
/// and zeta_p ~ N(0, angular_std^2).
CVector sample_channel(const UlaGeometry& geometry, const ScatteringProfile& profile, Rng& rng);

/// E[h h^H] by Monte-Carlo quadrature over the angular deviation. The
/// quadrature stream is seeded from the profile, so the result is a pure
/// function of its arguments. Output is Hermitian with unit diagonal.
CMatrix synthesize_covariance(const UlaGeometry& geometry, const ScatteringProfile& profile,
                              int quadrature_size = kDefaultQuadratureSize);

/// Users placed uniformly in angle over [-pi/2, pi/2]. The radius is not used
/// for path loss (power control removes large-scale fading).
std::vector<ScatteringProfile> cell_layout(int num_users, double cell_radius, Rng& rng,
                                           double angular_std, int num_paths);

/// Square-root factor F with F F^H = R, from the eigendecomposition of the
/// Hermitian part of R; negative eigenvalues are clipped to zero.
CMatrix covariance_factor(const CMatrix& covariance);

/// h ~ CN(0, F F^H).
CVector sample_gaussian_channel(const CMatrix& factor, Rng& rng);

CovarianceSet synthesize_covariances(const UlaGeometry& geometry,
                                     const std::vector<ScatteringProfile>& profiles,
                                     int quadrature_size = kDefaultQuadratureSize);

// Text container: a "juice-covariances 1" line, then "N M", then for every
// user M rows of M "re im" pairs (row-major).
void write_covariances(std::ostream& os, const CovarianceSet& set);
CovarianceSet read_covariances(std::istream& is);
void save_covariances(const std::string& path, const CovarianceSet& set);
CovarianceSet load_covariances(const std::string& path);

}  // namespace juice
