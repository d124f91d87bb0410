#pragma once

#include <vector>

#include "lpf/decomposition.hpp"
#include "lpf/filter.hpp"
#include "lpf/grid.hpp"
#include "lpf/observations.hpp"

namespace lpf {

struct LocalizationConfig {
  int n_loc = 4;
  double alpha = 500.0;
  int overlap_halfwidth = 6;
  Decomposition decomposition;
};

// Observation damping: 1 inside the region, exp(-alpha * distance) outside.
double gaspari_cohn(const IndexBox& box, GridPoint z, double alpha, const GridSpec& grid,
                    bool wrap_ew);

// Subregion assigned to an observation as seen from home region j: j itself
// when the observation lies in D_j, otherwise the smallest index among the
// regions containing it. `owners` must be ascending and nonempty.
int assign_region(const std::vector<int>& owners, int j);

// Owner lists (ascending region indices) for a batch of locations.
std::vector<std::vector<int>> owners_per_observation(const Decomposition& dec,
                                                     const std::vector<GridPoint>& locations);

// Linear blends of two conformal blocks. interp_ew weights its first
// argument fully at the eastern edge (last column) and the second at the
// western edge; interp_sn weights the first fully at the southern edge
// (first row). Endpoints are exact and equal inputs pass through unchanged.
Field interp_ew(const Field& east, const Field& west);
Field interp_sn(const Field& south, const Field& north);

// Rebuild a global state from one particle's region blocks: cores verbatim,
// EW strips blended west-to-east, SN strips south-to-north, corner patches
// by the EW-then-SN composition. Boundary conditions applied to the result.
StaggeredState merge_global(const std::vector<const FieldBlock*>& blocks,
                            const Decomposition& dec);

// Local likelihoods for one region: the observations inside the region are
// evaluated against the region's own (current) blocks, everything else
// against the frozen pre-tempering snapshot, damped by gaspari_cohn.
// The frozen part is constant during tempering, so it is precomputed per
// particle; see lpf_assimilate.
struct LocalObsTerm {
  int bx = 0;  // block-local coordinates of the observation
  int by = 0;
  double value = 0.0;
  double inv_var = 0.0;  // 1 / sigma_s^2
};

double local_log_likelihood(const FieldBlock& own_block, const std::vector<LocalObsTerm>& own_obs,
                            double frozen_external_term);

struct RegionDiagnostics {
  int region = 0;
  double ess = 0.0;
  int temper_steps = 0;
};

struct LpfDiagnostics {
  int k = 0;
  double ess_before = 0.0;
  bool tempered = false;
  std::vector<RegionDiagnostics> regions;
};

// One localized analysis step (Algorithm: global ESS gate, split, local
// weights and tempering per region against the frozen external snapshot,
// interpolation merge, weight reset). Regions run independently; `threads`
// only changes scheduling, never results.
LpfDiagnostics lpf_assimilate(Ensemble& ens, const ObservationBatch& batch,
                              const LocalizationConfig& loc, const TemperingConfig& cfg,
                              const FilterContext& fctx, int threads = 1);

extern const char* const kRegionCsvHeader;
void write_region_csv_row(std::ostream& os, int k, const RegionDiagnostics& r);

}  // namespace lpf
