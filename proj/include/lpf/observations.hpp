#pragma once

#include <iosfwd>
#include <vector>

#include "lpf/grid.hpp"
#include "lpf/rng.hpp"

namespace lpf {

struct GridPoint {
  int ix = 0;  // interior cell indices, 0..d-1
  int iy = 0;
  bool operator==(const GridPoint& o) const { return ix == o.ix && iy == o.iy; }
};

// Where and how often the height field is observed.
// fixed_grid: d_obs x d_obs equispaced interior cells, the same every step.
// moving_strip: a vertical strip `strip_width` cells wide whose x position
// cycles through `strip_positions` (grid columns) as k advances.
struct ObservationSchedule {
  enum class Kind { fixed_grid, moving_strip };

  Kind kind = Kind::fixed_grid;
  int d_obs = 32;
  int strip_width = 2;
  std::vector<int> strip_positions = {10, 90, 40, 120, 70, 20, 100, 50};
  int r = 10;              // assimilate every r model steps
  double sigma_obs = 0.05;
};

// Observation locations at assimilation index k >= 1.
std::vector<GridPoint> locations_at(const ObservationSchedule& schedule, int k, int d);

// One assimilation time's worth of height observations.
struct ObservationBatch {
  int k = 0;
  std::vector<GridPoint> locations;
  std::vector<double> values;
  double sigma = 0.05;
  // Optional per-location scales (diagonal noise covariance); empty means
  // the scalar `sigma` applies everywhere.
  std::vector<double> sigma_per_obs;

  double sigma_at(std::size_t s) const { return sigma_per_obs.empty() ? sigma : sigma_per_obs[s]; }
  std::size_t size() const { return locations.size(); }
};

// Y_s = eta(z_s) + sigma * xi_s with xi_s iid standard normal.
ObservationBatch synthesize(const Field& signal_eta, const std::vector<GridPoint>& locations,
                            double sigma_obs, RngStream& rng, int k = 0);

// Gaussian log-density up to its additive constant:
//   -(1/2) sum_s (Y_s - eta(z_s))^2 / sigma_s^2.
// The constant cancels in every weight normalization downstream.
double global_log_likelihood(const Field& particle_eta, const ObservationBatch& batch);

// CSV rows "k,x_index,y_index,value".
void write_batch_csv(std::ostream& os, const ObservationBatch& batch, bool header);

}  // namespace lpf
