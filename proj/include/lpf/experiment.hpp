#pragma once

#include <string>
#include <utility>
#include <vector>

#include "lpf/config.hpp"
#include "lpf/filter.hpp"
#include "lpf/localization.hpp"
#include "lpf/metrics.hpp"
#include "lpf/swe.hpp"

namespace lpf {

// Closed-form initial height surface, positive and EW-periodic on the grid,
// evaluated at the eta points (ghosts included).
Field initial_eta(const GridSpec& grid);

// Velocity in geostrophic balance with eta, each component rescaled by the
// inverse of its interior max magnitude (skipped for a vanishing component).
std::pair<Field, Field> geostrophic_velocity(const Field& eta, const ModelParams& params);

// sqrt(||u||^2 + ||v||^2) over the interior.
double mean_speed(const StaggeredState& s);

// Deterministic spin-up from the closed-form surface, then N+1 independent
// stochastic runs from the common state; one of them (chosen by the signal
// seed) becomes the signal, the rest the initial ensemble.
struct InitialConditions {
  StaggeredState signal;
  std::vector<StaggeredState> ensemble;
};
InitialConditions burn_in_pipeline(const ExperimentConfig& cfg, const NoiseBasis& basis);

// Advance every particle over one inter-assimilation window (fresh noise per
// particle and step, derived from the particle's stream seed and k). With
// `retain_window` the pre-window states and raw increments are kept for
// MCMC proposals.
void propagate_ensemble(Ensemble& ens, const GridSpec& grid, const ModelParams& params,
                        const NoiseBasis* basis, int n_steps, int k, bool retain_window,
                        int threads);

struct PhaseTimings {
  double burn_in = 0.0;
  double propagation = 0.0;
  double assimilation = 0.0;
  double metrics = 0.0;
  double io = 0.0;
};

struct RunRecord {
  ExperimentConfig config;
  std::vector<MetricRecord> metrics;
  std::vector<AssimilationDiagnostics> diagnostics;
  std::vector<std::pair<int, RegionDiagnostics>> region_diagnostics;
  std::vector<std::pair<long, double>> rb_trace;  // (model step, RB of eta)
  std::vector<ObservationBatch> observations;
  PhaseTimings timings;
};

// Full twin experiment: burn-in, signal + observation generation on the fly,
// assimilation with the configured filter, metric records per step.
RunRecord run_twin_experiment(const ExperimentConfig& cfg);

// Persist a run (metrics.csv, diagnostics.csv, regions.csv, observations.csv,
// rb_trace.csv, manifest.txt, config.echo.cfg) into cfg.output_dir.
void write_run_outputs(const RunRecord& record, const std::string& dir);

// Binary state snapshot: "LPF1", two u32 extents, then u, v, eta row-major
// as little-endian f64. Round-trips bit exactly.
void write_snapshot(const std::string& path, const StaggeredState& s);
StaggeredState read_snapshot(const std::string& path);

std::string snapshot_name(const std::string& dir, const std::string& tag, int k, int member);

// Recompute the metric table of a stored run from its snapshots.
std::vector<MetricRecord> recompute_metrics_from_snapshots(const ExperimentConfig& cfg,
                                                           const std::string& run_dir);

}  // namespace lpf
