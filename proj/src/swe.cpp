#include "lpf/swe.hpp"

#include <cmath>

#include "lpf/errors.hpp"

namespace lpf {

namespace {

// Vector-invariant C-grid machinery. Momentum advection, Coriolis and the
// transport noise all take the rotational form
//     increment_u = +<q V> - d/dx B,   increment_v = -<q U> - d/dy B,
//     increment_eta = -div(U, V),
// with mass fluxes U = etabar_x a_u, V = etabar_y a_v and the potential
// vorticity q = (f/Ro + curl(u,v)) / etabar_xy at cell corners. The drift
// uses (a_u, a_v) = (u, v) and B = eta/Fr^2 + |u|^2/2; the noise uses the
// combined basis field and B = u . xi (same Lie-derivative structure, which
// keeps the discrete energy balance of the deterministic core).
//
// q(i, j) lives at the corner ((i-1)dx, (j-1)dx).

void corner_potential_vorticity(const StaggeredState& y, double fro, Field& q) {
  const int d = y.d();
  const double dx = 1.0 / d;
  for (int j = 1; j <= d + 1; ++j) {
    for (int i = 1; i <= d + 1; ++i) {
      const double curl =
          (y.v(i, j) - y.v(i - 1, j) - (y.u(i, j) - y.u(i, j - 1))) / dx;
      const double eta_c = 0.25 * (y.eta(i - 1, j - 1) + y.eta(i, j - 1) + y.eta(i - 1, j) +
                                   y.eta(i, j));
      q(i, j) = (fro + curl) / eta_c;
    }
  }
}

// out += rotational increment for transported field (au, av) against the
// state's mass and vorticity, with the given Bernoulli function B.
// B must cover i = 0..d, j = 1..d; q the corners 1..d+1.
void rotational_increment(const StaggeredState& y, const Field& q, const Field& au,
                          const Field& av, const Field& bern, StaggeredState& out) {
  const int d = y.d();
  const double dx = 1.0 / d;
  const Field& eta = y.eta;

  Field U(d + 2, d + 2), V(d + 2, d + 2);
  for (int j = 0; j <= d + 1; ++j) {
    for (int i = 1; i <= d + 1; ++i) {
      U(i, j) = 0.5 * (eta(i - 1, j) + eta(i, j)) * au(i, j);
    }
  }
  for (int j = 1; j <= d + 1; ++j) {
    for (int i = 0; i <= d + 1; ++i) {
      V(i, j) = 0.5 * (eta(i, j - 1) + eta(i, j)) * av(i, j);
    }
  }

  for (int j = 1; j <= d; ++j) {
    for (int i = 1; i <= d; ++i) {
      const double qv_lo = q(i, j) * 0.5 * (V(i - 1, j) + V(i, j));
      const double qv_hi = q(i, j + 1) * 0.5 * (V(i - 1, j + 1) + V(i, j + 1));
      out.u(i, j) += 0.5 * (qv_lo + qv_hi) - (bern(i, j) - bern(i - 1, j)) / dx;
    }
  }
  for (int j = 2; j <= d; ++j) {
    for (int i = 1; i <= d; ++i) {
      const double qu_lo = q(i, j) * 0.5 * (U(i, j - 1) + U(i, j));
      const double qu_hi = q(i + 1, j) * 0.5 * (U(i + 1, j - 1) + U(i + 1, j));
      out.v(i, j) += -0.5 * (qu_lo + qu_hi) - (bern(i, j) - bern(i, j - 1)) / dx;
    }
  }
  for (int j = 1; j <= d; ++j) {
    for (int i = 1; i <= d; ++i) {
      out.eta(i, j) += -(U(i + 1, j) - U(i, j) + V(i, j + 1) - V(i, j)) / dx;
    }
  }
}

// Bernoulli function of the drift: eta/Fr^2 plus kinetic energy at centers.
void drift_bernoulli(const StaggeredState& y, double ifr2, Field& bern) {
  const int d = y.d();
  for (int j = 0; j <= d + 1; ++j) {
    for (int i = 0; i <= d; ++i) {
      const double k = 0.25 * (y.u(i, j) * y.u(i, j) + y.u(i + 1, j) * y.u(i + 1, j) +
                               y.v(i, j) * y.v(i, j) + y.v(i, j + 1) * y.v(i, j + 1));
      bern(i, j) = ifr2 * y.eta(i, j) + k;
    }
  }
}

// Bernoulli function of the noise: u . xi averaged to centers.
void noise_bernoulli(const StaggeredState& y, const Field& eff_u, const Field& eff_v,
                     Field& bern) {
  const int d = y.d();
  for (int j = 0; j <= d + 1; ++j) {
    for (int i = 0; i <= d; ++i) {
      bern(i, j) = 0.5 * (y.u(i, j) * eff_u(i, j) + y.u(i + 1, j) * eff_u(i + 1, j)) +
                   0.5 * (y.v(i, j) * eff_v(i, j) + y.v(i, j + 1) * eff_v(i, j + 1));
    }
  }
}

void add_viscosity(const StaggeredState& y, double nu, StaggeredState& out) {
  if (nu == 0.0) return;
  const int d = y.d();
  const double idx2 = static_cast<double>(d) * d;
  for (int j = 1; j <= d; ++j) {
    for (int i = 1; i <= d; ++i) {
      out.u(i, j) += nu * idx2 *
                     (y.u(i + 1, j) + y.u(i - 1, j) + y.u(i, j + 1) + y.u(i, j - 1) -
                      4.0 * y.u(i, j));
    }
  }
  for (int j = 2; j <= d; ++j) {
    for (int i = 1; i <= d; ++i) {
      out.v(i, j) += nu * idx2 *
                     (y.v(i + 1, j) + y.v(i - 1, j) + y.v(i, j + 1) + y.v(i, j - 1) -
                      4.0 * y.v(i, j));
    }
  }
}

// Core drift computation without input validation; stage states inside a
// step may be transiently nonfinite and are caught by the step-level check.
void drift_tendency(const StaggeredState& state, const ModelParams& p, StaggeredState& out) {
  const int d = state.d();
  GridSpec g{d};
  out.u.fill(0.0);
  out.v.fill(0.0);
  out.eta.fill(0.0);
  Field q = Field::for_grid(g);
  Field bern = Field::for_grid(g);
  corner_potential_vorticity(state, p.coriolis / p.rossby, q);
  drift_bernoulli(state, 1.0 / (p.froude * p.froude), bern);
  rotational_increment(state, q, state.u, state.v, bern, out);
  add_viscosity(state, p.viscosity, out);
}

double max_interior_abs(const Field& f, int d) {
  double mx = 0.0;
  for (int j = 1; j <= d; ++j) {
    for (int i = 1; i <= d; ++i) mx = std::max(mx, std::abs(f(i, j)));
  }
  return mx;
}

}  // namespace

void deterministic_tendency(const StaggeredState& state, const ModelParams& p,
                            StaggeredState& out) {
  if (!all_finite(state)) throw InvalidArgument("nonfinite values in state");
  drift_tendency(state, p, out);
}

void stochastic_tendency(const StaggeredState& state, const NoiseBasis& basis,
                         std::span<const double> dW, const ModelParams& params,
                         StaggeredState& out) {
  const int d = state.d();
  GridSpec g{d};
  Field eff_u = Field::for_grid(g), eff_v = Field::for_grid(g);
  basis.combine(dW, eff_u, eff_v);
  out.u.fill(0.0);
  out.v.fill(0.0);
  out.eta.fill(0.0);
  Field q = Field::for_grid(g);
  Field bern = Field::for_grid(g);
  corner_potential_vorticity(state, params.coriolis / params.rossby, q);
  noise_bernoulli(state, eff_u, eff_v, bern);
  rotational_increment(state, q, eff_u, eff_v, bern, out);
}

Propagator::Propagator(GridSpec grid, ModelParams params, const NoiseBasis* basis)
    : grid_(grid), params_(params), basis_(basis) {
  eff_u_ = Field::for_grid(grid_);
  eff_v_ = Field::for_grid(grid_);
  q_ = Field::for_grid(grid_);
  bern_ = Field::for_grid(grid_);
  for (auto& k : k_) k = StaggeredState::zeros(grid_);
  stage_ = StaggeredState::zeros(grid_);
  stoch_ = StaggeredState::zeros(grid_);
}

void Propagator::increment(const StaggeredState& y, StaggeredState& out) {
  out.u.fill(0.0);
  out.v.fill(0.0);
  out.eta.fill(0.0);
  corner_potential_vorticity(y, params_.coriolis / params_.rossby, q_);
  drift_bernoulli(y, 1.0 / (params_.froude * params_.froude), bern_);
  rotational_increment(y, q_, y.u, y.v, bern_, out);
  add_viscosity(y, params_.viscosity, out);
  out.scale(params_.dt);
  if (noise_active_) {
    noise_bernoulli(y, eff_u_, eff_v_, bern_);
    rotational_increment(y, q_, eff_u_, eff_v_, bern_, stoch_);
    out.axpy(1.0, stoch_);
  }
  if (substep_scale_ != 1.0) out.scale(substep_scale_);
}

int Propagator::stability_substeps(const StaggeredState& state) const {
  const int d = grid_.d;
  const double dx = 1.0 / d;
  const double max_eta = max_interior_abs(state.eta, d);
  const double wave = 2.0 * std::sqrt(std::max(max_eta, 0.0)) / params_.froude;
  const double adv = max_interior_abs(state.u, d) + max_interior_abs(state.v, d);
  double courant = params_.dt * (wave + adv) / dx;
  if (noise_active_) {
    // transport increments act like an advection distance of |eff| per step
    courant += (max_interior_abs(eff_u_, d) + max_interior_abs(eff_v_, d)) / dx;
  }
  // RK4 is neutrally stable up to ~2.8 on the imaginary axis; stay below.
  return std::max(1, static_cast<int>(std::ceil(courant / 2.5)));
}

void Propagator::step(StaggeredState& state, std::span<const double> dW, long step_index) {
  noise_active_ = basis_ != nullptr && !dW.empty();
  if (noise_active_) {
    basis_->combine(dW, eff_u_, eff_v_);
  }

  // Integrate the frozen-increment flow; tail noise draws or fast states can
  // push the one-shot update outside the stable region, so split the
  // increment into equal sub-steps chosen from a Courant estimate.
  const int m = stability_substeps(state);
  if (m > 64) {
    throw SolverBlowup(step_index, "state too stiff for the step size");
  }
  substep_scale_ = 1.0 / m;

  static constexpr double stage_coef[3] = {0.5, 0.5, 1.0};
  for (int sub = 0; sub < m; ++sub) {
    increment(state, k_[0]);
    for (int s = 0; s < 3; ++s) {
      stage_ = state;
      stage_.axpy(stage_coef[s], k_[s]);
      apply_boundary_conditions(stage_);
      increment(stage_, k_[s + 1]);
    }
    state.axpy(1.0 / 6.0, k_[0]);
    state.axpy(2.0 / 6.0, k_[1]);
    state.axpy(2.0 / 6.0, k_[2]);
    state.axpy(1.0 / 6.0, k_[3]);
    apply_boundary_conditions(state);
  }
  substep_scale_ = 1.0;

  if (!all_finite(state)) {
    throw SolverBlowup(step_index, "solver produced nonfinite values");
  }
}

void Propagator::propagate(StaggeredState& state, int n_steps, RngStream& stream,
                           std::vector<double>* record, long step_offset) {
  if (n_steps < 0) throw InvalidArgument("n_steps must be nonnegative");
  apply_boundary_conditions(state);
  const int n_modes = basis_ ? basis_->n_modes() : 0;
  const double sdt = std::sqrt(params_.dt);
  std::vector<double> dW(n_modes);
  for (int s = 0; s < n_steps; ++s) {
    for (int m = 0; m < n_modes; ++m) dW[m] = sdt * stream.normal();
    if (record) record->insert(record->end(), dW.begin(), dW.end());
    step(state, dW, step_offset + s);
  }
}

void Propagator::propagate_with_noise(StaggeredState& state, int n_steps,
                                      std::span<const double> dW_seq, long step_offset) {
  const int n_modes = basis_ ? basis_->n_modes() : 0;
  if (static_cast<int>(dW_seq.size()) != n_steps * n_modes) {
    throw InvalidArgument("noise sequence length does not match steps * modes");
  }
  apply_boundary_conditions(state);
  for (int s = 0; s < n_steps; ++s) {
    step(state, dW_seq.subspan(static_cast<std::size_t>(s) * n_modes, n_modes), step_offset + s);
  }
}

StaggeredState rk4_step(const StaggeredState& state, const NoiseBasis* basis,
                        const ModelParams& params, RngStream& stream) {
  GridSpec g{state.d()};
  Propagator prop(g, params, basis);
  StaggeredState out = state;
  prop.propagate(out, 1, stream);
  return out;
}

StaggeredState propagate(const StaggeredState& state, int n_steps, const NoiseBasis* basis,
                         const ModelParams& params, RngStream& stream) {
  GridSpec g{state.d()};
  Propagator prop(g, params, basis);
  StaggeredState out = state;
  prop.propagate(out, n_steps, stream);
  return out;
}

double total_mass(const StaggeredState& s) {
  const int d = s.d();
  const double cell = 1.0 / (static_cast<double>(d) * d);
  double sum = 0.0;
  for (int j = 1; j <= d; ++j) {
    for (int i = 1; i <= d; ++i) sum += s.eta(i, j);
  }
  return sum * cell;
}

double l2_interior(const Field& f, int d) {
  const double cell = 1.0 / (static_cast<double>(d) * d);
  double sum = 0.0;
  for (int j = 1; j <= d; ++j) {
    for (int i = 1; i <= d; ++i) sum += f(i, j) * f(i, j);
  }
  return std::sqrt(sum * cell);
}

}  // namespace lpf
