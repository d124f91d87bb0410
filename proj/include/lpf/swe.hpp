#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "lpf/grid.hpp"
#include "lpf/noise.hpp"
#include "lpf/rng.hpp"

namespace lpf {

enum class Regime { S, M };

// Dimensionless parameters of the rotating shallow water system.
struct ModelParams {
  double rossby = 0.9;
  double froude = 0.3;
  double coriolis = 1.0;
  double viscosity = 1e-5;
  double dt = 1e-3;

  static ModelParams preset(Regime r) {
    ModelParams p;
    if (r == Regime::S) {
      p.rossby = 0.9;
      p.froude = 0.3;
      p.dt = 1e-3;
    } else {
      p.rossby = 0.05;
      p.froude = 0.05;
      p.dt = 1e-4;
    }
    return p;
  }
};

// Drift increments (per unit time) of the deterministic system at the
// staggered points:
//   momentum: -(u.grad)u - (f/Ro) z x u - (1/Fr^2) grad eta + nu lap u
//   height:   -div(eta u)
// Boundary conditions must have been applied to `state`. Wall rows of v and
// all ghost rows of the output are zero.
void deterministic_tendency(const StaggeredState& state, const ModelParams& params,
                            StaggeredState& out);

// Increment from the transport noise for a given vector of Brownian
// increments dW (one entry per mode, each ~ N(0, dt)):
//   momentum: -sum_n [ (xi_n.grad)u + (grad xi_n)^T u + (f/Ro) z x xi_n ] dW_n
//   height:   -sum_n div(eta xi_n) dW_n
void stochastic_tendency(const StaggeredState& state, const NoiseBasis& basis,
                         std::span<const double> dW, const ModelParams& params,
                         StaggeredState& out);

// Classical RK4 update for an increment function G: y' = y + (k1 + 2k2 + 2k3 + k4)/6
// with k_s = G(stage state). Used with the full per-step increment
// G(y) = drift(y) dt + noise(y) dW so one Brownian realization is shared by
// all four stages. Also the order-check hook: any State with axpy/scale works.
template <class State, class G>
State rk4_increment_step(const State& y0, G&& g) {
  State k1 = g(y0);
  State y = y0;
  y.axpy(0.5, k1);
  State k2 = g(y);
  y = y0;
  y.axpy(0.5, k2);
  State k3 = g(y);
  y = y0;
  y.axpy(1.0, k3);
  State k4 = g(y);
  State out = y0;
  out.axpy(1.0 / 6.0, k1);
  out.axpy(2.0 / 6.0, k2);
  out.axpy(2.0 / 6.0, k3);
  out.axpy(1.0 / 6.0, k4);
  return out;
}

// Time stepper owning scratch storage. Reentrant across distinct instances;
// distinct particles propagate with their own Propagator or sequentially.
class Propagator {
 public:
  Propagator(GridSpec grid, ModelParams params, const NoiseBasis* basis);

  const ModelParams& params() const { return params_; }
  const GridSpec& grid() const { return grid_; }

  // One step of length dt. dW must hold one N(0,dt) increment per mode and
  // is reused at every stage; pass an empty span (or have no basis) for the
  // deterministic system. Boundary conditions are applied to each stage
  // state and to the result. Throws SolverBlowup on nonfinite output.
  void step(StaggeredState& state, std::span<const double> dW, long step_index = 0);

  // n_steps with fresh increments drawn from `stream` (n_modes normals per
  // step, scaled by sqrt(dt)). If `record` is nonnull the raw increments are
  // appended step by step (n_steps * n_modes values).
  void propagate(StaggeredState& state, int n_steps, RngStream& stream,
                 std::vector<double>* record = nullptr, long step_offset = 0);

  // n_steps driven by a recorded increment sequence (n_steps * n_modes).
  void propagate_with_noise(StaggeredState& state, int n_steps, std::span<const double> dW_seq,
                            long step_offset = 0);

 private:
  void increment(const StaggeredState& y, StaggeredState& out);
  int stability_substeps(const StaggeredState& state) const;

  GridSpec grid_;
  ModelParams params_;
  const NoiseBasis* basis_;
  bool noise_active_ = false;
  double substep_scale_ = 1.0;
  Field eff_u_, eff_v_;  // combined transport field for the current step
  Field q_, bern_;       // corner vorticity and Bernoulli scratch
  StaggeredState k_[4];
  StaggeredState stage_;
  StaggeredState stoch_;
};

// Convenience wrappers matching the operation contracts.
StaggeredState rk4_step(const StaggeredState& state, const NoiseBasis* basis,
                        const ModelParams& params, RngStream& stream);
StaggeredState propagate(const StaggeredState& state, int n_steps, const NoiseBasis* basis,
                         const ModelParams& params, RngStream& stream);

// Interior mass sum(eta) dx^2.
double total_mass(const StaggeredState& s);

// Interior L2 norm of one field, sqrt(sum f^2 dx^2).
double l2_interior(const Field& f, int d);

}  // namespace lpf
