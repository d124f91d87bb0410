#include "lpf/noise.hpp"

#include <cmath>
#include <string>

#include "lpf/errors.hpp"

namespace lpf {

namespace {

constexpr double kTwoPi = 2.0 * M_PI;

// Staggered coordinates for array index (i, j), interior range 1..d.
inline double x_at_u(int i, double dx) { return (i - 1.0) * dx; }
inline double y_at_u(int j, double dx) { return (j - 0.5) * dx; }
inline double x_at_v(int i, double dx) { return (i - 0.5) * dx; }
inline double y_at_v(int j, double dx) { return (j - 1.0) * dx; }
inline double x_at_eta(int i, double dx) { return (i - 0.5) * dx; }
inline double y_at_eta(int j, double dx) { return (j - 0.5) * dx; }

// Rounded trig evaluation breaks the exact x-period at the ghost columns;
// fill them by wrapping instead.
void wrap_x_ghosts(Field& f, int d) {
  for (int j = 0; j < f.ny(); ++j) {
    f(0, j) = f(d, j);
    f(d + 1, j) = f(1, j);
  }
}

}  // namespace

NoiseBasis build_noise_basis_with_coeffs(const GridSpec& grid,
                                         const std::vector<NoiseBasis::ModeCoeffs>& coeffs,
                                         double p, double sigma_noise) {
  if (coeffs.empty()) throw InvalidArgument("noise basis needs at least one mode");
  NoiseBasis b;
  b.sigma_ = sigma_noise;
  b.p_ = p;
  b.coeffs_ = coeffs;
  const int n_modes = static_cast<int>(coeffs.size());
  const int ext = grid.extent();
  const double dx = grid.dx();
  b.xi_u_.reserve(n_modes);
  b.xi_v_.reserve(n_modes);
  for (int m = 0; m < n_modes; ++m) {
    const int n = m + 1;
    const double amp = sigma_noise / std::pow(static_cast<double>(n), p);
    Field fu(ext, ext), fv(ext, ext);
    for (int j = 0; j < ext; ++j) {
      for (int i = 0; i < ext; ++i) {
        const double xu = x_at_u(i, dx), yu = y_at_u(j, dx);
        fu(i, j) = amp * std::cos(kTwoPi * n * yu) *
                   (coeffs[m].a * std::sin(kTwoPi * n * xu) + coeffs[m].b * std::cos(kTwoPi * n * xu));
        const double xv = x_at_v(i, dx), yv = y_at_v(j, dx);
        fv(i, j) = amp * std::sin(kTwoPi * n * yv) *
                   (coeffs[m].g * std::sin(kTwoPi * n * xv) + coeffs[m].dd * std::cos(kTwoPi * n * xv));
      }
    }
    // sin(2 pi n y) vanishes on both walls; pin the rounded values to zero
    for (int i = 0; i < ext; ++i) {
      fv(i, 1) = 0.0;
      fv(i, ext - 1) = 0.0;
    }
    wrap_x_ghosts(fu, grid.d);
    wrap_x_ghosts(fv, grid.d);
    b.xi_u_.push_back(std::move(fu));
    b.xi_v_.push_back(std::move(fv));
  }
  return b;
}

NoiseBasis build_noise_basis(const GridSpec& grid, int n_modes, double p, double sigma_noise,
                             RngStream& rng) {
  if (n_modes < 1) throw InvalidArgument("n_modes must be >= 1");
  std::vector<NoiseBasis::ModeCoeffs> coeffs(n_modes);
  for (auto& c : coeffs) {
    c.a = rng.uniform_closed();
    c.b = rng.uniform_closed();
    c.g = rng.uniform_closed();
    c.dd = rng.uniform_closed();
  }
  return build_noise_basis_with_coeffs(grid, coeffs, p, sigma_noise);
}

void NoiseBasis::combine(std::span<const double> dW, Field& out_u, Field& out_v) const {
  if (static_cast<int>(dW.size()) != n_modes()) {
    throw InvalidArgument("noise increment length " + std::to_string(dW.size()) +
                          " does not match mode count " + std::to_string(n_modes()));
  }
  out_u.fill(0.0);
  out_v.fill(0.0);
  const std::size_t sz = xi_u_[0].size();
  for (int m = 0; m < n_modes(); ++m) {
    const double w = dW[m];
    if (w == 0.0) continue;
    const double* su = xi_u_[m].data();
    const double* sv = xi_v_[m].data();
    double* pu = out_u.data();
    double* pv = out_v.data();
    for (std::size_t i = 0; i < sz; ++i) {
      pu[i] += w * su[i];
      pv[i] += w * sv[i];
    }
  }
}

double quad_variation_rate(const NoiseBasis& basis) {
  double sum = 0.0;
  const auto& cs = basis.coeffs();
  for (std::size_t m = 0; m < cs.size(); ++m) {
    const double n = static_cast<double>(m + 1);
    const double c2 = cs[m].a * cs[m].a + cs[m].b * cs[m].b + cs[m].g * cs[m].g + cs[m].dd * cs[m].dd;
    sum += c2 / std::pow(n, 2.0 * basis.decay_exponent());
  }
  return basis.sigma() * basis.sigma() / 4.0 * sum;
}

double calibrate_sigma_noise(double mean_speed, double p, int n_modes, double target_fraction) {
  if (mean_speed <= 0.0) throw InvalidArgument("mean_speed must be positive");
  if (n_modes < 1) throw InvalidArgument("n_modes must be >= 1");
  if (target_fraction < 0.0) throw InvalidArgument("target_fraction must be nonnegative");
  double s = 0.0;
  for (int n = 1; n <= n_modes; ++n) s += std::pow(static_cast<double>(n), -2.0 * p);
  return target_fraction * mean_speed * std::sqrt(3.0) / std::sqrt(s);
}

JitterBasis::JitterBasis(const GridSpec& grid, int n_modes, double sigma_jit) : sigma_(sigma_jit) {
  if (n_modes < 1) throw InvalidArgument("jitter basis needs at least one mode");
  const int ext = grid.extent();
  const double dx = grid.dx();
  zeta_u_.reserve(n_modes);
  zeta_v_.reserve(n_modes);
  zeta_eta_.reserve(n_modes);
  for (int m = 0; m < n_modes; ++m) {
    const int n = m + 1;
    Field fu(ext, ext), fv(ext, ext), fe(ext, ext);
    auto xfac = [n](double x) { return std::sin(kTwoPi * n * x) + std::cos(kTwoPi * n * x); };
    auto yfac_uv = [n](double y) { return std::cos(kTwoPi * n * y) + std::sin(kTwoPi * n * y + M_PI / 2.0); };
    auto yfac_eta = [n](double y) { return std::sin(kTwoPi * n * y) - std::cos(kTwoPi * n * y + M_PI / 2.0); };
    for (int j = 0; j < ext; ++j) {
      for (int i = 0; i < ext; ++i) {
        fu(i, j) = yfac_uv(y_at_u(j, dx)) * xfac(x_at_u(i, dx));
        fv(i, j) = yfac_uv(y_at_v(j, dx)) * xfac(x_at_v(i, dx));
        fe(i, j) = yfac_eta(y_at_eta(j, dx)) * xfac(x_at_eta(i, dx));
      }
    }
    wrap_x_ghosts(fu, grid.d);
    wrap_x_ghosts(fv, grid.d);
    wrap_x_ghosts(fe, grid.d);
    zeta_u_.push_back(std::move(fu));
    zeta_v_.push_back(std::move(fv));
    zeta_eta_.push_back(std::move(fe));
  }
}

StaggeredState JitterBasis::sample(RngStream& rng) const {
  const int ext = zeta_u_[0].nx();
  GridSpec g{ext - 2};
  StaggeredState out = StaggeredState::zeros(g);
  for (int m = 0; m < n_modes(); ++m) {
    const int n = m + 1;
    const double w = sigma_ * rng.normal() / (static_cast<double>(n) * n);
    const double* su = zeta_u_[m].data();
    const double* sv = zeta_v_[m].data();
    const double* se = zeta_eta_[m].data();
    double* pu = out.u.data();
    double* pv = out.v.data();
    double* pe = out.eta.data();
    const std::size_t sz = out.u.size();
    for (std::size_t i = 0; i < sz; ++i) {
      pu[i] += w * su[i];
      pv[i] += w * sv[i];
      pe[i] += w * se[i];
    }
  }
  return out;
}

void JitterBasis::sample_into_block(FieldBlock& block, int d, RngStream& rng) const {
  for (int m = 0; m < n_modes(); ++m) {
    const int n = m + 1;
    const double w = sigma_ * rng.normal() / (static_cast<double>(n) * n);
    const Field& zu = zeta_u_[m];
    const Field& zv = zeta_v_[m];
    const Field& ze = zeta_eta_[m];
    for (int bj = 0; bj < block.box.h; ++bj) {
      const int gj = block.box.y0 + bj + 1;
      for (int bi = 0; bi < block.box.w; ++bi) {
        const int gi = (block.box.x0 + bi) % d + 1;
        block.u(bi, bj) += w * zu(gi, gj);
        block.v(bi, bj) += w * zv(gi, gj);
        block.eta(bi, bj) += w * ze(gi, gj);
      }
    }
  }
}

}  // namespace lpf
