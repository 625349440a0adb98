#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>

#include "netsynth/numlin.hpp"

using namespace netsynth;
using namespace netsynth::numlin;

namespace {

// Multiset comparison of complex spectra.
bool spectra_match(std::vector<std::complex<double>> a,
                   std::vector<std::complex<double>> b, double tol) {
  if (a.size() != b.size()) return false;
  for (const auto& x : a) {
    auto best = b.end();
    double bd = tol;
    for (auto it = b.begin(); it != b.end(); ++it) {
      const double d = std::abs(*it - x);
      if (d <= bd) { bd = d; best = it; }
    }
    if (best == b.end()) return false;
    b.erase(best);
  }
  return true;
}

Mat random_stable(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Mat a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = g(rng);
  double shift = 0.0;
  for (const auto& ev : eigvals(a)) shift = std::max(shift, ev.real());
  a -= (shift + 0.5 + std::abs(g(rng))) * Mat::Identity(n, n);
  return a;
}

}  // namespace

TEST_CASE("eigvals basics") {
  auto ev = eigvals(Mat::Identity(2, 2));
  CHECK(spectra_match(ev, {{1, 0}, {1, 0}}, 1e-12));

  Mat rot(2, 2);
  rot << 0, 1, -1, 0;
  CHECK(spectra_match(eigvals(rot), {{0, 1}, {0, -1}}, 1e-12));

  Mat a(2, 2);
  a << 1, 1, 1, 2;  // characteristic polynomial x^2 - 3x + 1
  const double s5 = std::sqrt(5.0);
  CHECK(spectra_match(eigvals(a), {{(3 + s5) / 2, 0}, {(3 - s5) / 2, 0}}, 1e-12));

  CHECK_THROWS(eigvals(Mat::Zero(2, 3)));
}

TEST_CASE("eigvals of M and M^T agree as multisets") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 25; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 8);
    Mat m(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) m(i, j) = g(rng);
    CHECK(spectra_match(eigvals(m), eigvals(Mat(m.transpose())), 1e-9));
  }
}

TEST_CASE("is_negdef") {
  CHECK(is_negdef(SymMat(Mat(-Mat::Identity(3, 3))), 0.0));
  CHECK_FALSE(is_negdef(SymMat::zero(3), 0.0));
  Mat d = Mat::Zero(2, 2);
  d(0, 0) = -1.0;
  d(1, 1) = -1e-9;
  CHECK_FALSE(is_negdef(SymMat(d), 1e-8));
  CHECK(is_negdef(SymMat(d), 0.0));
  CHECK_THROWS(is_negdef(SymMat::zero(2), -1.0));
}

TEST_CASE("care_solve scalar cases") {
  Mat one = Mat::Ones(1, 1);
  SUBCASE("A=0, B=1: X solves 1 - X^2 = 0, stabilizing root") {
    auto x = care_solve(Mat::Zero(1, 1), one, one, one);
    CHECK(x(0, 0) == doctest::Approx(1.0).epsilon(1e-10));
  }
  SUBCASE("stable A, B=0: linear equation -2X + 1 = 0") {
    auto x = care_solve(-one, Mat::Zero(1, 0), one, Mat::Zero(0, 0));
    CHECK(x(0, 0) == doctest::Approx(0.5).epsilon(1e-10));
  }
  SUBCASE("unstable A, B=0: unstabilizable") {
    CHECK_THROWS(care_solve(one, Mat::Zero(1, 0), one, Mat::Zero(0, 0)));
  }
}

TEST_CASE("care_solve closed loop Hurwitz on random systems") {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 4);
    const int m = 1 + static_cast<int>(rng() % 2);
    Mat a(n, n), b(n, m);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) a(i, j) = g(rng);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < m; ++j) b(i, j) = g(rng);
    Mat qw = Mat::Identity(n, n), rw = Mat::Identity(m, m);
    SymMat x;
    try {
      x = care_solve(a, b, qw, rw);
    } catch (const std::invalid_argument&) {
      continue;  // rare unstabilizable draw
    }
    Mat acl = a - b * rw.inverse() * b.transpose() * x.mat();
    CHECK(is_hurwitz(acl));
    Mat resid = a.transpose() * x.mat() + x.mat() * a -
                x.mat() * b * rw.inverse() * b.transpose() * x.mat() + qw;
    CHECK(resid.norm() <= 1e-8 * (1.0 + x.mat().norm()));
  }
}

TEST_CASE("lyap_solve") {
  Mat a(2, 2);
  a << -1, 2, 0, -3;
  Mat q(2, 2);
  q << 4, 1, 1, 2;
  Mat x = lyap_solve(a, q);
  CHECK((a.transpose() * x + x * a + q).norm() <= 1e-11);
}

TEST_CASE("hinf_norm examples") {
  Mat a(1, 1), b(1, 1), c(1, 1), d(1, 1);
  a << -1; b << 1; c << 1; d << 0;
  CHECK(hinf_norm(a, b, c, d, 1e-8) == doctest::Approx(1.0).epsilon(1e-6));
  d << 1;
  CHECK(hinf_norm(a, b, c, d, 1e-8) == doctest::Approx(2.0).epsilon(1e-6));

  Mat d2(2, 2);
  d2 << 3, 0, 0, 1;
  CHECK(hinf_norm(Mat::Zero(0, 0), Mat::Zero(0, 2), Mat::Zero(2, 0), d2) ==
        doctest::Approx(3.0));

  a << 1;
  d << 0;
  CHECK_THROWS(hinf_norm(a, b, c, d));
}

TEST_CASE("hinf_norm agrees with dense frequency sweep") {
  std::mt19937_64 rng(99);
  std::normal_distribution<double> g;
  const double tol = 1e-5;
  for (int trial = 0; trial < 12; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 7);
    const int m = 1 + static_cast<int>(rng() % 2);
    const int l = 1 + static_cast<int>(rng() % 2);
    Mat a = random_stable(n, rng);
    Mat b(n, m), c(l, n), d(l, m);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < m; ++j) b(i, j) = g(rng);
    for (int i = 0; i < l; ++i)
      for (int j = 0; j < n; ++j) c(i, j) = g(rng);
    for (int i = 0; i < l; ++i)
      for (int j = 0; j < m; ++j) d(i, j) = g(rng);

    const double norm = hinf_norm(a, b, c, d, tol);

    double sweep = d.jacobiSvd().singularValues()(0);
    for (int k = 0; k < 1000; ++k) {
      const double w = std::pow(10.0, -3.0 + 7.0 * k / 999.0);
      Eigen::MatrixXcd jw =
          std::complex<double>(0, w) * Eigen::MatrixXcd::Identity(n, n) -
          a.cast<std::complex<double>>();
      Eigen::MatrixXcd gw =
          c.cast<std::complex<double>>() * jw.fullPivLu().solve(b.cast<std::complex<double>>()) +
          d.cast<std::complex<double>>();
      sweep = std::max(sweep, gw.jacobiSvd().singularValues()(0));
    }
    // Sweep is a lower bound up to grid resolution.
    CHECK(norm >= sweep * (1.0 - 2e-3));
    CHECK(norm <= sweep * (1.0 + 2 * tol) + 5e-3 * sweep + 1e-9);
  }
}

TEST_CASE("block partition") {
  BlockPartition p({2, 3, 1});
  CHECK(p.total() == 6);
  CHECK(p.offset(2) == 5);
  CHECK_THROWS(BlockPartition({2, 0}));
}

TEST_CASE("SymMat rejects asymmetric input") {
  Mat m(2, 2);
  m << 1, 2, 3, 4;
  CHECK_THROWS(SymMat(m));
  m << 1, 2, 2, 4;
  CHECK(SymMat(m).dim() == 2);
}
