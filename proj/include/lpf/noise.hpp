#pragma once

#include <span>
#include <vector>

#include "lpf/grid.hpp"
#include "lpf/rng.hpp"

namespace lpf {

// Spatial basis of the transport noise: mode n has velocity components
//   xi_u = (sigma/n^p) cos(2 pi n y) (a_n sin(2 pi n x) + b_n cos(2 pi n x))
//   xi_v = (sigma/n^p) sin(2 pi n y) (g_n sin(2 pi n x) + d_n cos(2 pi n x))
// evaluated at the staggered u- and v-points (ghosts included). The fields
// are EW-periodic and xi_v vanishes on the SN walls.
class NoiseBasis {
 public:
  struct ModeCoeffs {
    double a = 0, b = 0, g = 0, dd = 0;
  };

  NoiseBasis() = default;

  int n_modes() const { return static_cast<int>(coeffs_.size()); }
  double sigma() const { return sigma_; }
  double decay_exponent() const { return p_; }
  const std::vector<ModeCoeffs>& coeffs() const { return coeffs_; }
  const Field& mode_u(int n) const { return xi_u_[n]; }
  const Field& mode_v(int n) const { return xi_v_[n]; }

  // Effective transport field sum_n xi_n dW_n accumulated into (out_u, out_v).
  void combine(std::span<const double> dW, Field& out_u, Field& out_v) const;

  friend NoiseBasis build_noise_basis(const GridSpec& grid, int n_modes, double p,
                                      double sigma_noise, RngStream& rng);
  friend NoiseBasis build_noise_basis_with_coeffs(const GridSpec& grid,
                                                  const std::vector<ModeCoeffs>& coeffs, double p,
                                                  double sigma_noise);

 private:
  double sigma_ = 0.0;
  double p_ = 2.0;
  std::vector<ModeCoeffs> coeffs_;
  std::vector<Field> xi_u_, xi_v_;
};

// Coefficients a,b,g,d drawn iid Uniform(0,1) from the stream.
NoiseBasis build_noise_basis(const GridSpec& grid, int n_modes, double p, double sigma_noise,
                             RngStream& rng);
NoiseBasis build_noise_basis_with_coeffs(const GridSpec& grid,
                                         const std::vector<NoiseBasis::ModeCoeffs>& coeffs,
                                         double p, double sigma_noise);

// Coefficient of t in the quadratic variation of the driving noise:
// (sigma^2/4) * sum_n (a^2+b^2+g^2+d^2) / n^(2p). Analytic in the mode
// coefficients; independent of the grid.
double quad_variation_rate(const NoiseBasis& basis);

// Amplitude giving noise magnitude ~ target_fraction of the mean speed:
// sigma = target_fraction * mean_speed * sqrt(3) / sqrt(sum n^-2p).
double calibrate_sigma_noise(double mean_speed, double p, int n_modes, double target_fraction);

// Smooth perturbation basis for roughening. Mode n carries the fields
//   zeta_u = zeta_v = (cos(2 pi n y) + sin(2 pi n y + pi/2)) (sin(2 pi n x) + cos(2 pi n x))
//   zeta_eta = (sin(2 pi n y) - cos(2 pi n y + pi/2)) (sin(2 pi n x) + cos(2 pi n x))
// with amplitude decay 1/n^2, evaluated at the matching staggered points.
class JitterBasis {
 public:
  JitterBasis() = default;
  JitterBasis(const GridSpec& grid, int n_modes, double sigma_jit);

  int n_modes() const { return static_cast<int>(zeta_u_.size()); }
  double sigma() const { return sigma_; }
  const Field& mode_u(int n) const { return zeta_u_[n]; }
  const Field& mode_v(int n) const { return zeta_v_[n]; }
  const Field& mode_eta(int n) const { return zeta_eta_[n]; }

  // Full-grid perturbation sigma * sum_n zeta_n Z_n / n^2, Z_n iid N(0,1).
  StaggeredState sample(RngStream& rng) const;

  // Same draw restricted to a box: adds the perturbation to the block in
  // place. Drawing consumes one normal per mode regardless of the box.
  void sample_into_block(FieldBlock& block, int d, RngStream& rng) const;

 private:
  double sigma_ = 0.0;
  std::vector<Field> zeta_u_, zeta_v_, zeta_eta_;
};

}  // namespace lpf
