#include <doctest.h>

#include <cmath>
#include <sstream>

#include "lpf/errors.hpp"
#include "lpf/observations.hpp"

using namespace lpf;

TEST_CASE("fixed grid locations") {
  ObservationSchedule sch;
  sch.kind = ObservationSchedule::Kind::fixed_grid;

  SUBCASE("full grid observes every interior point") {
    sch.d_obs = 16;
    const auto pts = locations_at(sch, 1, 16);
    REQUIRE(pts.size() == 256);
    CHECK(pts.front() == GridPoint{0, 0});
    CHECK(pts.back() == GridPoint{15, 15});
  }

  SUBCASE("coarse grids are centered and equispaced") {
    sch.d_obs = 2;
    const auto pts = locations_at(sch, 3, 128);
    REQUIRE(pts.size() == 4);
    CHECK(pts[0] == GridPoint{32, 32});
    CHECK(pts[3] == GridPoint{96, 96});
  }

  SUBCASE("constant in k") {
    sch.d_obs = 4;
    CHECK(locations_at(sch, 1, 64) == locations_at(sch, 17, 64));
  }

  SUBCASE("d_obs larger than d is rejected") {
    sch.d_obs = 65;
    CHECK_THROWS_AS(locations_at(sch, 1, 64), InvalidArgument);
  }
}

TEST_CASE("moving strip locations cycle through the position list") {
  ObservationSchedule sch;
  sch.kind = ObservationSchedule::Kind::moving_strip;
  sch.strip_width = 2;
  sch.strip_positions = {10, 90, 40, 120, 70, 20, 100, 50};

  const auto k1 = locations_at(sch, 1, 128);
  REQUIRE(k1.size() == 2 * 128);
  CHECK(k1[0] == GridPoint{10, 0});
  CHECK(k1[1] == GridPoint{11, 0});

  const auto k2 = locations_at(sch, 2, 128);
  CHECK(k2[0] == GridPoint{90, 0});

  // cycle length 8: k = 9 repeats k = 1
  CHECK(locations_at(sch, 9, 128) == k1);
  CHECK(locations_at(sch, 4, 128)[0] == GridPoint{120, 0});
}

TEST_CASE("synthesis adds scaled white noise to the signal values") {
  GridSpec g{16};
  Field eta = Field::for_grid(g);
  for (int j = 0; j < g.extent(); ++j) {
    for (int i = 0; i < g.extent(); ++i) eta(i, j) = 1.0 + 0.01 * i + 0.02 * j;
  }
  ObservationSchedule sch;
  sch.d_obs = 4;
  const auto pts = locations_at(sch, 1, 16);

  SUBCASE("noiseless batches hit the signal exactly") {
    RngStream rng(5);
    const ObservationBatch b = synthesize(eta, pts, 0.0, rng, 1);
    for (std::size_t s = 0; s < b.size(); ++s) {
      CHECK(b.values[s] == eta(b.locations[s].ix + 1, b.locations[s].iy + 1));
    }
  }

  SUBCASE("empirical noise scale matches sigma") {
    const double sigma = 0.05;
    RngStream rng(5);
    double sumsq = 0.0;
    int count = 0;
    for (int rep = 0; rep < 400; ++rep) {
      const ObservationBatch b = synthesize(eta, pts, sigma, rng, rep);
      for (std::size_t s = 0; s < b.size(); ++s) {
        const double r = b.values[s] - eta(b.locations[s].ix + 1, b.locations[s].iy + 1);
        sumsq += r * r;
        ++count;
      }
    }
    const double sd = std::sqrt(sumsq / count);
    CHECK(sd == doctest::Approx(sigma).epsilon(0.05));
  }

  SUBCASE("locations outside the interior are rejected") {
    RngStream rng(1);
    CHECK_THROWS_AS(synthesize(eta, {GridPoint{16, 0}}, 0.1, rng, 1), InvalidArgument);
  }
}

TEST_CASE("log-likelihood against a dense gaussian oracle") {
  GridSpec g{8};
  Field eta = Field::for_grid(g);
  RngStream rng(13);
  for (int j = 0; j < g.extent(); ++j) {
    for (int i = 0; i < g.extent(); ++i) eta(i, j) = 1.0 + 0.1 * rng.normal();
  }

  SUBCASE("perfect match scores zero") {
    ObservationBatch b;
    b.locations = {{1, 1}, {4, 5}};
    b.values = {eta(2, 2), eta(5, 6)};
    b.sigma = 0.3;
    CHECK(global_log_likelihood(eta, b) == 0.0);
  }

  SUBCASE("one residual of size sigma scores -1/2") {
    ObservationBatch b;
    b.locations = {{2, 3}};
    b.sigma = 0.07;
    b.values = {eta(3, 4) + b.sigma};
    CHECK(global_log_likelihood(eta, b) == doctest::Approx(-0.5).epsilon(1e-12));
  }

  SUBCASE("matches the multivariate normal log-density up to its constant") {
    ObservationBatch b;
    b.sigma = 0.11;
    for (int t = 0; t < 7; ++t) {
      b.locations.push_back({t, 2 * (t % 3)});
      b.values.push_back(1.0 + 0.2 * rng.normal());
    }
    double dense = 0.0;
    const std::size_t ny = b.size();
    for (std::size_t s = 0; s < ny; ++s) {
      const double r = b.values[s] - eta(b.locations[s].ix + 1, b.locations[s].iy + 1);
      dense += -0.5 * r * r / (b.sigma * b.sigma);
    }
    dense += -0.5 * ny * std::log(2.0 * M_PI * b.sigma * b.sigma);
    const double constant = -0.5 * ny * std::log(2.0 * M_PI * b.sigma * b.sigma);
    CHECK(global_log_likelihood(eta, b) == doctest::Approx(dense - constant).epsilon(1e-12));
  }

  SUBCASE("likelihood decreases as residuals grow") {
    ObservationBatch b;
    b.locations = {{1, 1}, {2, 2}};
    b.sigma = 0.1;
    b.values = {eta(2, 2), eta(3, 3)};
    const double l0 = global_log_likelihood(eta, b);
    b.values[0] += 0.05;
    const double l1 = global_log_likelihood(eta, b);
    b.values[1] += 0.05;
    const double l2 = global_log_likelihood(eta, b);
    CHECK(l0 > l1);
    CHECK(l1 > l2);
  }

  SUBCASE("per-location scales override the scalar sigma") {
    ObservationBatch b;
    b.locations = {{1, 1}, {2, 2}};
    b.sigma = 1.0;
    b.values = {eta(2, 2) + 0.2, eta(3, 3) + 0.2};
    b.sigma_per_obs = {0.2, 0.1};
    CHECK(global_log_likelihood(eta, b) == doctest::Approx(-0.5 * (1.0 + 4.0)).epsilon(1e-12));
  }
}

TEST_CASE("batch csv rows") {
  ObservationBatch b;
  b.k = 3;
  b.locations = {{1, 2}};
  b.values = {0.5};
  std::ostringstream os;
  write_batch_csv(os, b, true);
  CHECK(os.str() == "k,x_index,y_index,value\n3,1,2,0.5\n");
}
