#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "juice/channel_model.hpp"

using namespace juice;

namespace {

constexpr double kPi = std::numbers::pi;

double deg(double d) { return d * kPi / 180.0; }

// E[exp(j·k·d·cos(ψ + ζ))], ζ ~ N(0, σ²), by the composite Simpson rule over ±10σ.
Complex lag_integral(double spacing, double angle, double sigma, int d) {
  const int n = 200000;
  const double a = -10.0 * sigma, b = 10.0 * sigma, h = (b - a) / n;
  Complex acc{0.0, 0.0};
  for (int i = 0; i <= n; ++i) {
    const double z = a + i * h;
    const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    const double pdf = std::exp(-0.5 * z * z / (sigma * sigma)) / (sigma * std::sqrt(2.0 * kPi));
    acc += w * pdf * std::polar(1.0, -2.0 * kPi * spacing * d * std::cos(angle + z));
  }
  return acc * h / 3.0;
}

}  // namespace

TEST_CASE("steering vector: broadside and endfire phases") {
  UlaGeometry g{4, 0.5};
  const CVector broadside = steering_vector(g, kPi / 2.0);
  for (int m = 0; m < 4; ++m) CHECK(std::abs(broadside(m) - Complex{1.0, 0.0}) < 1e-12);
  const CVector endfire = steering_vector(g, 0.0);
  for (int m = 0; m < 4; ++m) CHECK(std::abs(endfire(m) - Complex{m % 2 ? -1.0 : 1.0, 0.0}) < 1e-12);
}

TEST_CASE("steering vector: element-wise formula and unit modulus") {
  UlaGeometry g{8, 0.3};
  const CVector a = steering_vector(g, 1.0);
  for (int m = 0; m < 8; ++m) {
    const double phase = -2.0 * kPi * m * 0.3 * std::cos(1.0);
    CHECK(std::abs(a(m) - Complex{std::cos(phase), std::sin(phase)}) < 1e-12);
    CHECK(std::abs(std::abs(a(m)) - 1.0) < 1e-12);
  }
}

TEST_CASE("geometry and profile validation") {
  CHECK_THROWS_AS(UlaGeometry({0, 0.5}).validate(), std::invalid_argument);
  CHECK_THROWS_AS(UlaGeometry({4, 0.0}).validate(), std::invalid_argument);
  CHECK_THROWS_AS(ScatteringProfile({0.0, -0.1, 1}).validate(), std::invalid_argument);
  CHECK_THROWS_AS(ScatteringProfile({0.0, 0.1, 0}).validate(), std::invalid_argument);
}

TEST_CASE("sample_channel: single path has constant modulus; seeded draws repeat") {
  UlaGeometry g{6, 0.5};
  ScatteringProfile p{0.4, 0.0, 1};
  Rng rng(7);
  const CVector h = sample_channel(g, p, rng);
  for (int m = 1; m < 6; ++m) CHECK(std::abs(std::abs(h(m)) - std::abs(h(0))) < 1e-12);

  ScatteringProfile p2{0.4, deg(10), 50};
  Rng r1(11), r2(11);
  CHECK((sample_channel(g, p2, r1) - sample_channel(g, p2, r2)).norm() == 0.0);
}

TEST_CASE("sample_channel: many paths without spread give a(ψ)a(ψ)^H second moment") {
  UlaGeometry g{4, 0.5};
  ScatteringProfile p{0.7, 0.0, 100000};
  Rng rng(3);
  // 2·10³ draws keep the cost of 10⁵ paths per draw moderate; the tolerance scales accordingly.
  const int draws = 2000;
  CMatrix acc = CMatrix::Zero(4, 4);
  for (int t = 0; t < draws; ++t) {
    const CVector h = sample_channel(g, p, rng);
    acc += h * h.adjoint();
  }
  acc /= draws;
  const CVector a = steering_vector(g, 0.7);
  const CMatrix expected = a * a.adjoint();
  // Each entry is |CN(0,1)|² times a unit phasor: standard error 1/√draws.
  CHECK((acc - expected).cwiseAbs().maxCoeff() < 5.0 / std::sqrt(draws));
}

TEST_CASE("synthesize_covariance: degenerate spread and scalar array") {
  UlaGeometry g{5, 0.5};
  const CMatrix r = synthesize_covariance(g, {0.3, 0.0, 1}, 1000);
  const CVector a = steering_vector(g, 0.3);
  CHECK((r - a * a.adjoint()).norm() < 1e-12);
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(r);
  CHECK(eig.eigenvalues()(3) < 1e-10);

  const CMatrix one = synthesize_covariance({1, 0.5}, {0.3, deg(10), 10}, 1000);
  CHECK(one.rows() == 1);
  CHECK(std::abs(one(0, 0) - Complex{1.0, 0.0}) < 1e-15);
  CHECK_THROWS_AS(synthesize_covariance(g, {0.3, deg(10), 10}, 999), std::invalid_argument);
}

TEST_CASE("synthesize_covariance: decaying correlation, higher-resolution agreement") {
  UlaGeometry g{4, 0.5};
  ScatteringProfile p{0.3, deg(10), 200};
  const CMatrix r6 = synthesize_covariance(g, p, 1'000'000);
  const CMatrix r7 = synthesize_covariance(g, p, 10'000'000);
  for (int d = 1; d < 4; ++d) {
    CHECK(std::abs(r6(d, 0)) < 1.0);
    if (d > 1) CHECK(std::abs(r6(d, 0)) < std::abs(r6(d - 1, 0)));
  }
  CHECK((r6 - r7).cwiseAbs().maxCoeff() < 1e-3);
}

TEST_CASE("synthesize_covariance: agrees with deterministic angular integration") {
  UlaGeometry g{6, 0.5};
  for (double angle : {0.3, 1.2, -0.9}) {
    ScatteringProfile p{angle, deg(10), 200};
    const int quad = 200'000;
    const CMatrix r = synthesize_covariance(g, p, quad);
    for (int d = 1; d < 6; ++d) {
      const Complex exact = lag_integral(0.5, angle, deg(10), d);
      // Monte-Carlo error of a unit-modulus average: ≤ 1/√L per component.
      CHECK(std::abs(r(d, 0) - exact) < 5.0 / std::sqrt(static_cast<double>(quad)));
    }
  }
}

TEST_CASE("synthesize_covariance: Hermitian, PSD, unit diagonal, trace M") {
  for (int m : {1, 4, 20}) {
    for (double angle : {-1.4, 0.0, 0.5, 1.5}) {
      for (double spread : {0.0, 2.0, 10.0, 30.0}) {
        UlaGeometry g{m, 0.5};
        const CMatrix r = synthesize_covariance(g, {angle, deg(spread), 200}, 5000);
        CHECK((r - r.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
        Eigen::SelfAdjointEigenSolver<CMatrix> eig(r);
        CHECK(eig.eigenvalues().minCoeff() >= -1e-9 * m);
        for (int i = 0; i < m; ++i) CHECK(r(i, i) == Complex{1.0, 0.0});
        CHECK(std::abs(r.trace() - Complex(m, 0.0)) < 1e-12);
      }
    }
  }
}

TEST_CASE("sample_channel second moment matches synthesize_covariance") {
  UlaGeometry g{8, 0.5};
  ScatteringProfile p{0.6, deg(10), 200};
  const CMatrix r = synthesize_covariance(g, p);
  Rng rng(99);
  const int draws = 10000;
  CMatrix sum = CMatrix::Zero(8, 8);
  Eigen::MatrixXd sq_re = Eigen::MatrixXd::Zero(8, 8), sq_im = Eigen::MatrixXd::Zero(8, 8);
  for (int t = 0; t < draws; ++t) {
    const CVector h = sample_channel(g, p, rng);
    const CMatrix o = h * h.adjoint();
    sum += o;
    sq_re += o.real().cwiseAbs2();
    sq_im += o.imag().cwiseAbs2();
  }
  const CMatrix mean = sum / draws;
  for (int i = 0; i < 8; ++i) {
    for (int j = 0; j < 8; ++j) {
      const double var_re = sq_re(i, j) / draws - std::pow(mean(i, j).real(), 2);
      const double var_im = sq_im(i, j) / draws - std::pow(mean(i, j).imag(), 2);
      const double se_re = std::sqrt(std::max(var_re, 0.0) / draws);
      const double se_im = std::sqrt(std::max(var_im, 0.0) / draws);
      CHECK(std::abs(mean(i, j).real() - r(i, j).real()) <= 5.0 * se_re + 1e-9);
      CHECK(std::abs(mean(i, j).imag() - r(i, j).imag()) <= 5.0 * se_im + 1e-9);
    }
  }
}

TEST_CASE("cell_layout: range, determinism, uniformity") {
  Rng one(1);
  const auto single = cell_layout(1, 50.0, one, deg(10), 200);
  REQUIRE(single.size() == 1);
  CHECK(std::abs(single[0].incident_angle) <= kPi / 2.0);

  Rng a(5), b(5);
  const auto la = cell_layout(200, 50.0, a, deg(10), 200);
  const auto lb = cell_layout(200, 50.0, b, deg(10), 200);
  for (int i = 0; i < 200; ++i) CHECK(la[i].incident_angle == lb[i].incident_angle);

  Rng c(17);
  const int n = 10000;
  const auto big = cell_layout(n, 50.0, c, deg(10), 200);
  std::vector<double> u;
  for (const auto& p : big) u.push_back((p.incident_angle + kPi / 2.0) / kPi);
  std::sort(u.begin(), u.end());
  double ks = 0.0;
  for (int i = 0; i < n; ++i)
    ks = std::max({ks, (i + 1.0) / n - u[i], u[i] - static_cast<double>(i) / n});
  CHECK(ks < 1.628 / std::sqrt(static_cast<double>(n)));  // 1 % critical value
}

TEST_CASE("covariance factor reproduces the covariance and sampling follows it") {
  UlaGeometry g{6, 0.5};
  const CMatrix r = synthesize_covariance(g, {0.2, deg(5), 200}, 20000);
  const CMatrix f = covariance_factor(r);
  CHECK((f * f.adjoint() - r).norm() < 1e-10);
  Rng rng(4);
  CMatrix acc = CMatrix::Zero(6, 6);
  const int draws = 20000;
  for (int t = 0; t < draws; ++t) {
    const CVector h = sample_gaussian_channel(f, rng);
    acc += h * h.adjoint();
  }
  CHECK((acc / draws - r).cwiseAbs().maxCoeff() < 5.0 / std::sqrt(static_cast<double>(draws)));
}

TEST_CASE("covariance file round trip is exact") {
  UlaGeometry g{5, 0.5};
  Rng rng(8);
  const auto layout = cell_layout(3, 50.0, rng, deg(10), 200);
  const CovarianceSet set = synthesize_covariances(g, layout, 5000);
  std::stringstream ss;
  write_covariances(ss, set);
  const CovarianceSet back = read_covariances(ss);
  REQUIRE(back.num_users() == 3);
  for (int i = 0; i < 3; ++i) CHECK((back.matrices[i] - set.matrices[i]).norm() == 0.0);

  std::stringstream bad("not-a-header 1\n");
  CHECK_THROWS(read_covariances(bad));
  std::stringstream truncated("juice-covariances 1\n1 2\n1 0 0 0\n");
  CHECK_THROWS(read_covariances(truncated));
}
