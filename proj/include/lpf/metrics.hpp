#pragma once

#include <iosfwd>
#include <vector>

#include "lpf/grid.hpp"
#include "lpf/observations.hpp"

namespace lpf {

// Relative L2 errors of an ensemble against the signal, interior points
// only with uniform dx^2 weights:
//   EMRE = (1/N) sum_i ||f - f_i|| / ||f||
//   RB   = ||f - mean_i f_i|| / ||f||
//   RES  = (1/(N-1)) sum_i ||f_i - mean|| / ||f||
double emre(const Field& signal, const std::vector<const Field*>& ensemble);
double rb(const Field& signal, const std::vector<const Field*>& ensemble);
double res(const Field& signal, const std::vector<const Field*>& ensemble);

// Per-location ensemble scores averaged over the observation locations.
double rmse_obs(const Field& signal, const std::vector<const Field*>& ensemble,
                const std::vector<GridPoint>& locations);
double crps_obs(const Field& signal, const std::vector<const Field*>& ensemble,
                const std::vector<GridPoint>& locations);

// CRPS of a scalar ensemble against a scalar truth, closed form:
//   mean_i |x_i - y| - (1/(2 N^2)) sum_ij |x_i - x_j|.
double crps_ensemble(const std::vector<double>& members, double truth);

// One row of the run metrics table.
struct MetricRecord {
  int k = 0;
  double emre_u = 0, rb_u = 0, res_u = 0;
  double emre_v = 0, rb_v = 0, res_v = 0;
  double emre_eta = 0, rb_eta = 0, res_eta = 0;
  double rmse_eta = 0, crps_eta = 0;
};

extern const char* const kMetricsCsvHeader;

void write_metric_csv_row(std::ostream& os, const MetricRecord& m);

MetricRecord compute_metrics(int k, const StaggeredState& signal,
                             const std::vector<const StaggeredState*>& ensemble,
                             const std::vector<GridPoint>& locations);

}  // namespace lpf
