#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "lpf/errors.hpp"
#include "lpf/metrics.hpp"
#include "lpf/rng.hpp"

using namespace lpf;

namespace {

Field const_field(int d, double v) {
  Field f(d + 2, d + 2, v);
  return f;
}

// Exact integral of (F_E(x) - H(x - truth))^2 dx: the integrand is
// piecewise constant between the sorted breakpoints.
double crps_by_integration(std::vector<double> members, double truth) {
  std::vector<double> breaks = members;
  breaks.push_back(truth);
  std::sort(breaks.begin(), breaks.end());
  std::sort(members.begin(), members.end());
  double acc = 0.0;
  const double n = static_cast<double>(members.size());
  for (std::size_t seg = 0; seg + 1 < breaks.size(); ++seg) {
    const double lo = breaks[seg], hi = breaks[seg + 1];
    if (hi <= lo) continue;
    const double mid = 0.5 * (lo + hi);
    const double cdf =
        static_cast<double>(std::upper_bound(members.begin(), members.end(), mid) - members.begin()) / n;
    const double heav = mid > truth ? 1.0 : 0.0;
    acc += (cdf - heav) * (cdf - heav) * (hi - lo);
  }
  return acc;
}

}  // namespace

TEST_CASE("relative errors on a one-point domain") {
  // signal 2, particles {1, 3}
  Field sig = const_field(1, 2.0);
  Field p1 = const_field(1, 1.0);
  Field p2 = const_field(1, 3.0);
  std::vector<const Field*> ens{&p1, &p2};
  CHECK(emre(sig, ens) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(rb(sig, ens) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(res(sig, ens) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("perfect ensembles score zero everywhere") {
  Field sig = const_field(4, 1.7);
  Field a = sig, b = sig, c = sig;
  std::vector<const Field*> ens{&a, &b, &c};
  CHECK(emre(sig, ens) == 0.0);
  CHECK(rb(sig, ens) == 0.0);
  CHECK(res(sig, ens) == 0.0);
  std::vector<GridPoint> locs{{0, 0}, {2, 3}};
  CHECK(rmse_obs(sig, ens, locs) == 0.0);
  CHECK(crps_obs(sig, ens, locs) == 0.0);
}

TEST_CASE("ensemble mean error dominates the bias") {
  RngStream rng(5);
  const int d = 6;
  for (int trial = 0; trial < 50; ++trial) {
    Field sig(d + 2, d + 2);
    for (int j = 0; j < d + 2; ++j) {
      for (int i = 0; i < d + 2; ++i) sig(i, j) = 1.0 + 0.3 * rng.normal();
    }
    std::vector<Field> members;
    for (int m = 0; m < 5; ++m) {
      Field f = sig;
      for (int j = 1; j <= d; ++j) {
        for (int i = 1; i <= d; ++i) f(i, j) += 0.2 * rng.normal();
      }
      members.push_back(std::move(f));
    }
    std::vector<const Field*> ens;
    for (const auto& m : members) ens.push_back(&m);
    CHECK(emre(sig, ens) >= rb(sig, ens) - 1e-13);
  }
}

TEST_CASE("relative errors ignore a common scale") {
  RngStream rng(8);
  const int d = 5;
  Field sig(d + 2, d + 2);
  for (int j = 0; j < d + 2; ++j) {
    for (int i = 0; i < d + 2; ++i) sig(i, j) = 1.0 + 0.2 * rng.normal();
  }
  std::vector<Field> members(4, sig);
  for (auto& m : members) {
    for (int j = 1; j <= d; ++j) {
      for (int i = 1; i <= d; ++i) m(i, j) += 0.1 * rng.normal();
    }
  }
  std::vector<const Field*> ens;
  for (const auto& m : members) ens.push_back(&m);
  const double e0 = emre(sig, ens);
  const double r0 = rb(sig, ens);
  const double s0 = res(sig, ens);

  const double c = -3.7;
  Field sig_scaled = sig;
  std::vector<Field> scaled = members;
  for (int j = 0; j < d + 2; ++j) {
    for (int i = 0; i < d + 2; ++i) {
      sig_scaled(i, j) *= c;
      for (auto& m : scaled) m(i, j) *= c;
    }
  }
  std::vector<const Field*> ens2;
  for (const auto& m : scaled) ens2.push_back(&m);
  CHECK(emre(sig_scaled, ens2) == doctest::Approx(e0).epsilon(1e-12));
  CHECK(rb(sig_scaled, ens2) == doctest::Approx(r0).epsilon(1e-12));
  CHECK(res(sig_scaled, ens2) == doctest::Approx(s0).epsilon(1e-12));
}

TEST_CASE("zero signal norm is rejected; spread needs two members") {
  Field sig = const_field(3, 0.0);
  Field a = const_field(3, 1.0);
  std::vector<const Field*> ens{&a};
  CHECK_THROWS_AS(emre(sig, ens), InvalidArgument);
  Field sig2 = const_field(3, 1.0);
  CHECK_THROWS_AS(res(sig2, ens), InvalidArgument);
}

TEST_CASE("crps closed form") {
  SUBCASE("two members straddling the truth") {
    CHECK(crps_ensemble({0.0, 1.0}, 0.5) == doctest::Approx(0.25).epsilon(1e-12));
  }
  SUBCASE("a single member degenerates to absolute error") {
    CHECK(crps_ensemble({1.4}, 0.9) == doctest::Approx(0.5).epsilon(1e-12));
  }
  SUBCASE("collapsed ensemble on the truth") {
    CHECK(crps_ensemble({0.7, 0.7, 0.7}, 0.7) == doctest::Approx(0.0).epsilon(1e-12));
  }
  SUBCASE("matches the integral of the squared cdf difference") {
    RngStream rng(11);
    for (int trial = 0; trial < 300; ++trial) {
      const int n = 1 + static_cast<int>(rng.uniform_index(9));
      std::vector<double> members(n);
      for (auto& x : members) x = rng.normal();
      const double truth = rng.normal();
      const double closed = crps_ensemble(members, truth);
      const double integral = crps_by_integration(members, truth);
      CHECK(closed == doctest::Approx(integral).epsilon(1e-9));
      CHECK(std::abs(closed - integral) <= 1e-6 * std::max(1.0, std::abs(closed)));
    }
  }
}

TEST_CASE("pointwise rmse") {
  Field sig = const_field(4, 1.0);
  Field a = const_field(4, 1.3);
  Field b = const_field(4, 0.9);
  std::vector<GridPoint> locs{{1, 1}, {2, 2}};

  SUBCASE("two members") {
    std::vector<const Field*> ens{&a, &b};
    const double expect = std::sqrt((0.09 + 0.01) / 2.0);
    CHECK(rmse_obs(sig, ens, locs) == doctest::Approx(expect).epsilon(1e-12));
  }
  SUBCASE("single member reduces to mean absolute difference") {
    std::vector<const Field*> ens{&a};
    CHECK(rmse_obs(sig, ens, locs) == doctest::Approx(0.3).epsilon(1e-12));
  }
  SUBCASE("no locations rejected") {
    std::vector<const Field*> ens{&a};
    CHECK_THROWS_AS(rmse_obs(sig, ens, {}), InvalidArgument);
  }
}
