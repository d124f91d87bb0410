#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "lpf/grid.hpp"
#include "lpf/noise.hpp"
#include "lpf/observations.hpp"
#include "lpf/swe.hpp"

namespace lpf {

// Subtract the max, exponentiate, normalize to sum 1. Throws
// DegenerateWeights when no entry is finite.
std::vector<double> normalize_weights(std::span<const double> log_weights);

// Effective sample size 1 / sum w_i^2 of normalized weights.
double ess(std::span<const double> weights);

// w_i^phi renormalized, computed in the log domain. phi in (0, 1].
std::vector<double> tempered_weights(std::span<const double> weights, double phi);

// Temperature increment delta in (0, remaining] with
// ess(tempered(weights, delta)) ~= n_ess, found by bisection on the
// increment; the search runs until the bracket is narrower than tol.
// Requires ess(tempered(weights, remaining)) < n_ess, else returns remaining.
double find_temperature(std::span<const double> weights, double n_ess, double remaining,
                        double tol);

// Stochastic universal sampling: comb points u0 + r/N over the cumulative
// weight bins. Offspring counts sum to N and each lies in
// {floor(N w_i), ceil(N w_i)}. u0 must be in [0, 1/N).
std::vector<int> resample_sus(std::span<const double> weights, double u0);
std::vector<int> resample_sus(std::span<const double> weights, RngStream& rng);

// Deterministic child-to-parent assignment: surviving slots keep their own
// state; zero-count slots become children of surplus parents in index order.
struct ResampleAssignment {
  std::vector<int> source_of;  // source slot per slot (identity for survivors)
  std::vector<int> children;   // slots that were overwritten, ascending
};
ResampleAssignment assign_children(const std::vector<int>& counts);

enum class JitterKind { roughening, mcmc };

struct McmcParams {
  double rho = 0.99;
  int m_jit = 10;
};

struct TemperingConfig {
  double bisection_tol = 1e-4;
  int max_temper_iters = 200;
  JitterKind jitter_kind = JitterKind::roughening;
  McmcParams mcmc;
  // When false the assimilation keeps the computed weights and never
  // resamples, tempers or jitters: the plain weight recursion.
  bool resample_enabled = true;
};

// Names the assimilation step and region so every random draw inside
// tempering has a scheduling-independent key.
struct TemperContext {
  std::uint64_t filter_seed = 0;
  int k = 1;
  int region = 0;
};

// What tempering needs from an ensemble: likelihood evaluation against the
// current states, slot reassignment after resampling, and jitter of the
// freshly copied children. jitter returns the largest number of rejected
// MCMC proposals among the children (0 for roughening).
class TemperTarget {
 public:
  virtual ~TemperTarget() = default;
  virtual int size() const = 0;
  virtual std::vector<double> log_likelihoods() const = 0;
  virtual void resample(const ResampleAssignment& a) = 0;
  virtual double jitter(const ResampleAssignment& a, const TemperContext& ctx, int iter) = 0;
};

struct TemperStats {
  int iterations = 0;        // ESS-triggered stages (the final residual stage not counted)
  double avg_mcmc_iters = 0; // mean over stages of the per-stage max rejections
  double cumulative = 0.0;   // total temperature assimilated; 1 on completion
};

// Tempering loop: while the weights tempered at the remaining power fail
// the ESS threshold, pick a temperature increment by bisection, resample by
// the incrementally tempered weights, jitter the children and recompute the
// weights; finish with one resample+jitter at the residual power.
// `combined_log_weights` seeds the first stage (prior log-weights plus
// log-likelihoods); recomputations use the target's likelihoods alone.
TemperStats temper(TemperTarget& target, std::vector<double> combined_log_weights, double n_ess,
                   const TemperingConfig& cfg, const TemperContext& ctx);

// Particle ensemble plus its normalized weights and per-particle stream
// seeds. Window data (state at the window start plus the raw Brownian
// increments used) is retained only when MCMC jittering asks for it.
struct Ensemble {
  std::vector<StaggeredState> particles;
  std::vector<double> weights;
  std::vector<std::uint64_t> stream_seeds;
  double n_ess_threshold = 0.0;

  std::vector<StaggeredState> window_start;
  std::vector<std::vector<double>> window_noise;

  int n() const { return static_cast<int>(particles.size()); }

  static Ensemble from_states(std::vector<StaggeredState> states, double ess_fraction,
                              std::uint64_t sim_seed);
};

// Everything an assimilation step needs besides the ensemble and batch.
struct FilterContext {
  std::uint64_t filter_seed = 0;
  int k = 1;
  const JitterBasis* jitter_basis = nullptr;
  // MCMC proposals re-solve the model over the window:
  const NoiseBasis* noise_basis = nullptr;
  ModelParams params{};
  int window_steps = 0;
};

struct AssimilationDiagnostics {
  int k = 0;
  double ess_before = 0.0;
  int temper_steps = 0;
  double avg_mcmc_iters = 0.0;
};

// One particle filter analysis step (weights, ESS gate, tempering). The
// incoming weights multiply the likelihood; on the tempering branch the
// weights come out uniform, otherwise they carry to the next step.
AssimilationDiagnostics pf_assimilate(Ensemble& ens, const ObservationBatch& batch,
                                      const TemperingConfig& cfg, const FilterContext& fctx);

extern const char* const kDiagnosticsCsvHeader;
void write_diagnostics_csv_row(std::ostream& os, const AssimilationDiagnostics& d);

}  // namespace lpf
