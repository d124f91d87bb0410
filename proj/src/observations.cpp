#include "lpf/observations.hpp"

#include <cmath>
#include <ostream>
#include <string>

#include "lpf/errors.hpp"

namespace lpf {

std::vector<GridPoint> locations_at(const ObservationSchedule& schedule, int k, int d) {
  if (k < 1) throw InvalidArgument("assimilation index starts at 1");
  std::vector<GridPoint> pts;
  if (schedule.kind == ObservationSchedule::Kind::fixed_grid) {
    const int n = schedule.d_obs;
    if (n < 1 || n > d) throw InvalidArgument("d_obs must be in [1, d]");
    pts.reserve(static_cast<std::size_t>(n) * n);
    // Equispaced cell picks, centered within each stride.
    std::vector<int> idx(n);
    for (int m = 0; m < n; ++m) {
      idx[m] = static_cast<int>((2 * m + 1) * d / (2 * n));
    }
    for (int jy = 0; jy < n; ++jy) {
      for (int jx = 0; jx < n; ++jx) {
        pts.push_back({idx[jx], idx[jy]});
      }
    }
  } else {
    if (schedule.strip_positions.empty()) throw InvalidArgument("strip positions empty");
    const int pos = schedule.strip_positions[(k - 1) % schedule.strip_positions.size()];
    for (int iy = 0; iy < d; ++iy) {
      for (int w = 0; w < schedule.strip_width; ++w) {
        pts.push_back({(pos + w) % d, iy});
      }
    }
  }
  return pts;
}

ObservationBatch synthesize(const Field& signal_eta, const std::vector<GridPoint>& locations,
                            double sigma_obs, RngStream& rng, int k) {
  const int d = signal_eta.nx() - 2;
  ObservationBatch b;
  b.k = k;
  b.sigma = sigma_obs;
  b.locations = locations;
  b.values.reserve(locations.size());
  for (const auto& z : locations) {
    if (z.ix < 0 || z.ix >= d || z.iy < 0 || z.iy >= d) {
      throw InvalidArgument("observation location outside the interior");
    }
    b.values.push_back(signal_eta(z.ix + 1, z.iy + 1) + sigma_obs * rng.normal());
  }
  return b;
}

double global_log_likelihood(const Field& particle_eta, const ObservationBatch& batch) {
  double acc = 0.0;
  for (std::size_t s = 0; s < batch.size(); ++s) {
    const auto& z = batch.locations[s];
    const double r = batch.values[s] - particle_eta(z.ix + 1, z.iy + 1);
    const double sg = batch.sigma_at(s);
    const double iv = 1.0 / (sg * sg);
    acc += r * r * iv;
  }
  return -0.5 * acc;
}

void write_batch_csv(std::ostream& os, const ObservationBatch& batch, bool header) {
  if (header) os << "k,x_index,y_index,value\n";
  char buf[64];
  for (std::size_t s = 0; s < batch.size(); ++s) {
    std::snprintf(buf, sizeof(buf), "%.17g", batch.values[s]);
    os << batch.k << ',' << batch.locations[s].ix << ',' << batch.locations[s].iy << ',' << buf
       << '\n';
  }
}

}  // namespace lpf
