#include "juice/channel_model.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>
#include <stdexcept>

namespace juice {

void UlaGeometry::validate() const {
  if (num_antennas < 1) throw std::invalid_argument("UlaGeometry: num_antennas must be >= 1");
  if (!(antenna_spacing > 0.0))
    throw std::invalid_argument("UlaGeometry: antenna_spacing must be > 0");
}

void ScatteringProfile::validate() const {
  if (!(angular_std >= 0.0)) throw std::invalid_argument("ScatteringProfile: angular_std < 0");
  if (num_paths < 1) throw std::invalid_argument("ScatteringProfile: num_paths must be >= 1");
}

CVector steering_vector(const UlaGeometry& geometry, double angle) {
  const int m_count = geometry.num_antennas;
  const double phase = -2.0 * std::numbers::pi * geometry.antenna_spacing * std::cos(angle);
  CVector a(m_count);
  for (int m = 0; m < m_count; ++m) a(m) = std::polar(1.0, phase * m);
  return a;
}

CVector sample_channel(const UlaGeometry& geometry, const ScatteringProfile& profile, Rng& rng) {
  geometry.validate();
  profile.validate();
  std::normal_distribution<double> deviation(0.0, 1.0);
  CVector h = CVector::Zero(geometry.num_antennas);
  for (int p = 0; p < profile.num_paths; ++p) {
    const Complex gain = complex_gaussian(rng);
    const double zeta = profile.angular_std * deviation(rng);
    h += gain * steering_vector(geometry, profile.incident_angle + zeta);
  }
  return h / std::sqrt(static_cast<double>(profile.num_paths));
}

namespace {

std::uint64_t profile_seed(const UlaGeometry& geometry, const ScatteringProfile& profile) {
  std::uint64_t s = mix_seed(std::bit_cast<std::uint64_t>(profile.incident_angle));
  s = mix_seed(s ^ std::bit_cast<std::uint64_t>(profile.angular_std));
  s = mix_seed(s ^ std::bit_cast<std::uint64_t>(geometry.antenna_spacing));
  return s;
}

}  // namespace

CMatrix synthesize_covariance(const UlaGeometry& geometry, const ScatteringProfile& profile,
                              int quadrature_size) {
  geometry.validate();
  profile.validate();
  if (quadrature_size < 1000)
    throw std::invalid_argument("synthesize_covariance: quadrature size must be >= 1000");
  const int m_count = geometry.num_antennas;

  // The matrix is Toeplitz, [R]_{mn} = r(m - n), so only the lags
  // 0..M-1 of the first column are accumulated.
  std::vector<Complex> lag(static_cast<std::size_t>(m_count), Complex{0.0, 0.0});
  if (profile.angular_std == 0.0) {
    const CVector a = steering_vector(geometry, profile.incident_angle);
    for (int d = 0; d < m_count; ++d) lag[d] = a(d);
  } else {
    Rng rng(profile_seed(geometry, profile));
    std::normal_distribution<double> deviation(0.0, profile.angular_std);
    const double k = -2.0 * std::numbers::pi * geometry.antenna_spacing;
    for (int l = 0; l < quadrature_size; ++l) {
      const Complex step = std::polar(1.0, k * std::cos(profile.incident_angle + deviation(rng)));
      Complex term{1.0, 0.0};
      for (int d = 0; d < m_count; ++d) {
        lag[d] += term;
        term *= step;
      }
    }
    for (auto& v : lag) v /= static_cast<double>(quadrature_size);
  }

  CMatrix r(m_count, m_count);
  for (int m = 0; m < m_count; ++m) {
    for (int n = 0; n < m_count; ++n) {
      r(m, n) = m >= n ? lag[m - n] : std::conj(lag[n - m]);
    }
    r(m, m) = Complex{1.0, 0.0};
  }
  return r;
}

std::vector<ScatteringProfile> cell_layout(int num_users, double cell_radius, Rng& rng,
                                           double angular_std, int num_paths) {
  if (num_users < 1) throw std::invalid_argument("cell_layout: num_users must be >= 1");
  if (!(cell_radius > 0.0)) throw std::invalid_argument("cell_layout: cell_radius must be > 0");
  std::uniform_real_distribution<double> angle(-std::numbers::pi / 2.0, std::numbers::pi / 2.0);
  std::vector<ScatteringProfile> out(static_cast<std::size_t>(num_users));
  for (auto& p : out) {
    p.incident_angle = angle(rng);
    p.angular_std = angular_std;
    p.num_paths = num_paths;
    p.validate();
  }
  return out;
}

CMatrix covariance_factor(const CMatrix& covariance) {
  if (covariance.rows() != covariance.cols())
    throw std::invalid_argument("covariance_factor: matrix must be square");
  const CMatrix herm = 0.5 * (covariance + covariance.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(herm);
  if (eig.info() != Eigen::Success) throw std::runtime_error("covariance_factor: eigensolver failed");
  const RVector root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * root.asDiagonal();
}

CVector sample_gaussian_channel(const CMatrix& factor, Rng& rng) {
  CVector w(factor.cols());
  for (Eigen::Index i = 0; i < w.size(); ++i) w(i) = complex_gaussian(rng);
  return factor * w;
}

CovarianceSet synthesize_covariances(const UlaGeometry& geometry,
                                     const std::vector<ScatteringProfile>& profiles,
                                     int quadrature_size) {
  CovarianceSet set;
  set.matrices.reserve(profiles.size());
  for (const auto& p : profiles) set.matrices.push_back(synthesize_covariance(geometry, p, quadrature_size));
  return set;
}

void write_covariances(std::ostream& os, const CovarianceSet& set) {
  const int n = set.num_users();
  const int m = set.num_antennas();
  os << "juice-covariances 1\n" << n << ' ' << m << '\n';
  char buf[64];
  for (const auto& r : set.matrices) {
    if (r.rows() != m || r.cols() != m)
      throw std::invalid_argument("write_covariances: inconsistent matrix sizes");
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < m; ++j) {
        std::snprintf(buf, sizeof buf, "%.17g %.17g", r(i, j).real(), r(i, j).imag());
        os << (j ? " " : "") << buf;
      }
      os << '\n';
    }
  }
}

CovarianceSet read_covariances(std::istream& is) {
  std::string magic;
  int version = 0;
  if (!(is >> magic >> version) || magic != "juice-covariances" || version != 1)
    throw std::runtime_error("read_covariances: missing 'juice-covariances 1' header");
  int n = 0, m = 0;
  if (!(is >> n >> m) || n < 0 || m < 1)
    throw std::runtime_error("read_covariances: bad dimensions");
  CovarianceSet set;
  set.matrices.assign(static_cast<std::size_t>(n), CMatrix(m, m));
  for (auto& r : set.matrices) {
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < m; ++j) {
        double re = 0.0, im = 0.0;
        if (!(is >> re >> im)) throw std::runtime_error("read_covariances: truncated data");
        r(i, j) = Complex{re, im};
      }
    }
  }
  return set;
}

void save_covariances(const std::string& path, const CovarianceSet& set) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  write_covariances(os, set);
  if (!os) throw std::runtime_error("write to '" + path + "' failed");
}

CovarianceSet load_covariances(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open '" + path + "'");
  return read_covariances(is);
}

}  // namespace juice
