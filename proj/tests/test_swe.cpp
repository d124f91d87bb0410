#include <doctest.h>

#include <cmath>
#include <vector>

#include "lpf/errors.hpp"
#include "lpf/noise.hpp"
#include "lpf/rng.hpp"
#include "lpf/swe.hpp"

using namespace lpf;

namespace {

ModelParams s_preset() { return ModelParams::preset(Regime::S); }

StaggeredState rest_state(const GridSpec& g, double height) {
  StaggeredState s = StaggeredState::zeros(g);
  s.eta.fill(height);
  apply_boundary_conditions(s);
  return s;
}

// Smooth wall-compatible flow used for convergence and conservation checks.
StaggeredState smooth_state(const GridSpec& g) {
  StaggeredState s = StaggeredState::zeros(g);
  const double dx = g.dx();
  for (int j = 0; j < g.extent(); ++j) {
    for (int i = 0; i < g.extent(); ++i) {
      const double xu = (i - 1.0) * dx, yu = (j - 0.5) * dx;
      const double xv = (i - 0.5) * dx, yv = (j - 1.0) * dx;
      const double xe = (i - 0.5) * dx, ye = (j - 0.5) * dx;
      s.u(i, j) = 0.2 * std::sin(2 * M_PI * xu) * std::cos(M_PI * yu);
      s.v(i, j) = 0.1 * std::sin(2 * M_PI * yv) * std::cos(2 * M_PI * xv);
      s.eta(i, j) = 1.5 + 0.05 * std::cos(2 * M_PI * xe) * std::sin(M_PI * ye);
    }
  }
  apply_boundary_conditions(s);
  return s;
}

double max_interior_abs_diff(const Field& a, const Field& b, int d) {
  double mx = 0.0;
  for (int j = 1; j <= d; ++j) {
    for (int i = 1; i <= d; ++i) mx = std::max(mx, std::abs(a(i, j) - b(i, j)));
  }
  return mx;
}

}  // namespace

TEST_CASE("flat rest state is a fixed point of the step") {
  GridSpec g{16};
  StaggeredState s = rest_state(g, 2.0);
  RngStream rng(3);
  StaggeredState out = rk4_step(s, nullptr, s_preset(), rng);
  CHECK(out == s);
}

TEST_CASE("drift reduces to the pressure gradient at rest") {
  GridSpec g{32};
  ModelParams p = s_preset();
  p.viscosity = 0.0;
  StaggeredState s = StaggeredState::zeros(g);
  const double dx = g.dx();
  for (int j = 0; j < g.extent(); ++j) {
    for (int i = 0; i < g.extent(); ++i) {
      s.eta(i, j) = 1.0 + 0.1 * std::sin(2 * M_PI * (i - 0.5) * dx);
    }
  }
  apply_boundary_conditions(s);
  StaggeredState out = StaggeredState::zeros(g);
  deterministic_tendency(s, p, out);

  const double ifr2 = 1.0 / (p.froude * p.froude);
  for (int j = 1; j <= g.d; ++j) {
    for (int i = 1; i <= g.d; ++i) {
      const double detadx = (s.eta(i, j) - s.eta(i - 1, j)) / dx;
      CHECK(out.u(i, j) == doctest::Approx(-ifr2 * detadx).epsilon(1e-13));
      CHECK(out.eta(i, j) == doctest::Approx(0.0).epsilon(1e-13));
    }
  }
  for (int j = 2; j <= g.d; ++j) {
    for (int i = 1; i <= g.d; ++i) {
      // eta has no y variation here, so v feels nothing
      CHECK(out.v(i, j) == doctest::Approx(0.0).epsilon(1e-13));
    }
  }
}

TEST_CASE("discrete height gradient converges at second order") {
  // eta = sin(2 pi x): the u-point gradient matches 2 pi cos(2 pi x).
  auto max_err = [](int d) {
    GridSpec g{d};
    ModelParams p = s_preset();
    p.viscosity = 0.0;
    StaggeredState s = StaggeredState::zeros(g);
    const double dx = g.dx();
    for (int j = 0; j < g.extent(); ++j) {
      for (int i = 0; i < g.extent(); ++i) {
        s.eta(i, j) = 2.0 + std::sin(2 * M_PI * (i - 0.5) * dx);
      }
    }
    apply_boundary_conditions(s);
    StaggeredState out = StaggeredState::zeros(g);
    deterministic_tendency(s, p, out);
    const double ifr2 = 1.0 / (p.froude * p.froude);
    double mx = 0.0;
    for (int j = 1; j <= g.d; ++j) {
      for (int i = 1; i <= g.d; ++i) {
        const double x_u = (i - 1.0) * dx;
        const double analytic = -ifr2 * 2 * M_PI * std::cos(2 * M_PI * x_u);
        mx = std::max(mx, std::abs(out.u(i, j) - analytic));
      }
    }
    return mx;
  };
  const double e1 = max_err(32);
  const double e2 = max_err(64);
  CHECK(e1 / e2 > 3.5);  // second order: factor ~4 per refinement
  CHECK(e1 / e2 < 4.5);
}

TEST_CASE("interior mass is conserved by the flux-form step") {
  GridSpec g{64};
  StaggeredState s = smooth_state(g);
  const ModelParams p = s_preset();
  Propagator prop(g, p, nullptr);
  RngStream rng(1);
  const double m0 = total_mass(s);
  prop.propagate(s, 100, rng);
  const double m1 = total_mass(s);
  CHECK(std::abs(m1 - m0) / std::abs(m0) <= 1e-6);  // in practice roundoff-level
}

TEST_CASE("classical order of the RK4 combinator on the scalar test equation") {
  struct Scalar {
    double x;
    void axpy(double a, const Scalar& o) { x += a * o.x; }
    void scale(double a) { x *= a; }
  };
  const double lambda = -1.3;
  auto one_step_error = [&](double dt) {
    Scalar y{1.0};
    auto g = [&](const Scalar& s) { return Scalar{lambda * s.x * dt}; };
    Scalar out = rk4_increment_step(y, g);
    return std::abs(out.x - std::exp(lambda * dt));
  };
  const double e1 = one_step_error(0.1);
  const double e2 = one_step_error(0.05);
  CHECK(e1 / e2 > 24.0);  // local truncation order 5: factor ~32
  CHECK(e1 / e2 < 40.0);
}

TEST_CASE("deterministic step converges at fourth order on smooth states") {
  GridSpec g{32};
  StaggeredState s0 = smooth_state(g);
  ModelParams p = s_preset();

  auto run = [&](double dt, int steps) {
    ModelParams q = p;
    q.dt = dt;
    Propagator prop(g, q, nullptr);
    StaggeredState s = s0;
    RngStream rng(1);
    prop.propagate(s, steps, rng);
    return s;
  };
  const double T = 8e-3;
  StaggeredState ref = run(T / 32, 32);
  StaggeredState a = run(T / 4, 4);
  StaggeredState b = run(T / 8, 8);
  const double ea = max_interior_abs_diff(a.eta, ref.eta, g.d);
  const double eb = max_interior_abs_diff(b.eta, ref.eta, g.d);
  CHECK(ea / eb > 10.0);  // fourth order: factor ~16
  CHECK(ea / eb < 24.0);
}

TEST_CASE("propagation is a pure function of state and seed") {
  GridSpec g{16};
  const ModelParams p = s_preset();
  RngStream coeff_rng(42);
  const NoiseBasis basis = build_noise_basis(g, 8, 2.0, 0.1, coeff_rng);
  StaggeredState s = smooth_state(g);

  SUBCASE("zero steps is the identity") {
    Propagator prop(g, p, &basis);
    StaggeredState out = s;
    RngStream rng(7);
    prop.propagate(out, 0, rng);
    CHECK(out == s);
  }

  SUBCASE("equal seeds give bitwise equal trajectories") {
    RngStream r1(123), r2(123);
    StaggeredState a = propagate(s, 10, &basis, p, r1);
    StaggeredState b = propagate(s, 10, &basis, p, r2);
    CHECK(a == b);
    RngStream r3(124);
    StaggeredState c = propagate(s, 10, &basis, p, r3);
    CHECK_FALSE(c == a);
  }

  SUBCASE("recorded increments reproduce the stream-driven run") {
    Propagator prop(g, p, &basis);
    StaggeredState a = s;
    std::vector<double> rec;
    RngStream r1(55);
    prop.propagate(a, 5, r1, &rec);
    StaggeredState b = s;
    prop.propagate_with_noise(b, 5, rec);
    CHECK(a == b);
  }
}

TEST_CASE("transport increment term isolation") {
  GridSpec g{32};
  const ModelParams p = s_preset();
  const double dx = g.dx();

  SUBCASE("zero increments give a zero tendency") {
    RngStream rng(2);
    const NoiseBasis basis = build_noise_basis(g, 5, 2.0, 0.1, rng);
    StaggeredState s = smooth_state(g);
    StaggeredState out = StaggeredState::zeros(g);
    std::vector<double> dW(5, 0.0);
    stochastic_tendency(s, basis, dW, p, out);
    CHECK(all_finite(out));
    CHECK(l2_interior(out.u, g.d) == 0.0);
    CHECK(l2_interior(out.eta, g.d) == 0.0);
  }

  SUBCASE("constant height: increment is -H div(xi) dW") {
    std::vector<NoiseBasis::ModeCoeffs> coeffs{{0.7, 0.3, 0.4, 0.9}};
    const NoiseBasis basis = build_noise_basis_with_coeffs(g, coeffs, 2.0, 0.1);
    const double H = 1.7;
    StaggeredState s = rest_state(g, H);
    StaggeredState out = StaggeredState::zeros(g);
    const double dW = 0.013;
    stochastic_tendency(s, basis, std::vector<double>{dW}, p, out);
    for (int j = 1; j <= g.d; ++j) {
      for (int i = 1; i <= g.d; ++i) {
        const double div = (basis.mode_u(0)(i + 1, j) - basis.mode_u(0)(i, j) +
                            basis.mode_v(0)(i, j + 1) - basis.mode_v(0)(i, j)) /
                           dx;
        CHECK(out.eta(i, j) == doctest::Approx(-H * div * dW).epsilon(1e-10));
      }
    }
  }

  SUBCASE("divergence-free mode moves no mass from constant height") {
    // a = d = 0, b = g: div(xi) = 0 analytically
    std::vector<NoiseBasis::ModeCoeffs> coeffs{{0.0, 1.0, 1.0, 0.0}};
    const NoiseBasis basis = build_noise_basis_with_coeffs(g, coeffs, 2.0, 0.1);
    StaggeredState s = rest_state(g, 1.0);
    StaggeredState out = StaggeredState::zeros(g);
    stochastic_tendency(s, basis, std::vector<double>{1.0}, p, out);
    double mx = 0.0;
    for (int j = 1; j <= g.d; ++j) {
      for (int i = 1; i <= g.d; ++i) mx = std::max(mx, std::abs(out.eta(i, j)));
    }
    // residual is pure discretization error, O(dx^2)
    CHECK(mx < 20.0 * dx * dx);
    CHECK(mx > 0.0);
  }

  SUBCASE("length mismatch is rejected") {
    RngStream rng(2);
    const NoiseBasis basis = build_noise_basis(g, 5, 2.0, 0.1, rng);
    StaggeredState s = smooth_state(g);
    StaggeredState out = StaggeredState::zeros(g);
    std::vector<double> dW(4, 0.0);
    CHECK_THROWS_AS(stochastic_tendency(s, basis, dW, p, out), InvalidArgument);
  }
}

TEST_CASE("nonfinite states surface as solver blowups with the step index") {
  GridSpec g{8};
  ModelParams p = s_preset();
  StaggeredState s = rest_state(g, 1.0);
  s.eta(3, 3) = 1e308;  // explodes within one step
  Propagator prop(g, p, nullptr);
  RngStream rng(1);
  try {
    prop.propagate(s, 3, rng, nullptr, 100);
    FAIL("expected SolverBlowup");
  } catch (const SolverBlowup& e) {
    CHECK(e.step() >= 100);
    CHECK(e.step() < 103);
  }
}

TEST_CASE("nan inputs are rejected by the tendency") {
  GridSpec g{8};
  StaggeredState s = rest_state(g, 1.0);
  s.u(2, 2) = std::nan("");
  StaggeredState out = StaggeredState::zeros(g);
  CHECK_THROWS_AS(deterministic_tendency(s, s_preset(), out), InvalidArgument);
}
