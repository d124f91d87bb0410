#include "lpf/filter.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <string>

#include "lpf/errors.hpp"

namespace lpf {

std::vector<double> normalize_weights(std::span<const double> log_weights) {
  if (log_weights.empty()) throw InvalidArgument("empty weight vector");
  double mx = -std::numeric_limits<double>::infinity();
  for (double lw : log_weights) mx = std::max(mx, lw);
  if (!std::isfinite(mx)) {
    throw DegenerateWeights("all log-weights are -inf");
  }
  std::vector<double> w(log_weights.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    w[i] = std::exp(log_weights[i] - mx);
    sum += w[i];
  }
  for (double& x : w) x /= sum;
  return w;
}

double ess(std::span<const double> weights) {
  double s2 = 0.0;
  for (double w : weights) s2 += w * w;
  return 1.0 / s2;
}

std::vector<double> tempered_weights(std::span<const double> weights, double phi) {
  if (!(phi > 0.0) || phi > 1.0) throw InvalidArgument("phi must lie in (0, 1]");
  std::vector<double> lw(weights.size());
  for (std::size_t i = 0; i < lw.size(); ++i) {
    lw[i] = weights[i] > 0.0 ? phi * std::log(weights[i]) : -std::numeric_limits<double>::infinity();
  }
  return normalize_weights(lw);
}

double find_temperature(std::span<const double> weights, double n_ess, double remaining,
                        double tol) {
  if (remaining <= 0.0) throw InvalidArgument("remaining temperature must be positive");
  if (ess(tempered_weights(weights, remaining)) >= n_ess) return remaining;
  double lo = 0.0;  // ess -> N as delta -> 0
  double hi = remaining;
  while (hi - lo >= tol) {
    const double mid = 0.5 * (lo + hi);
    if (ess(tempered_weights(weights, mid)) >= n_ess) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

std::vector<int> resample_sus(std::span<const double> weights, double u0) {
  const int n = static_cast<int>(weights.size());
  if (n == 0) throw InvalidArgument("empty weight vector");
  if (u0 < 0.0 || u0 >= 1.0 / n) throw InvalidArgument("u0 outside [0, 1/N)");
  std::vector<int> counts(n, 0);
  int idx = 0;
  double cum = weights[0];
  for (int r = 0; r < n; ++r) {
    const double point = u0 + static_cast<double>(r) / n;
    while (point >= cum && idx < n - 1) {
      ++idx;
      cum += weights[idx];
    }
    ++counts[idx];
  }
  return counts;
}

std::vector<int> resample_sus(std::span<const double> weights, RngStream& rng) {
  return resample_sus(weights, rng.uniform() / static_cast<double>(weights.size()));
}

ResampleAssignment assign_children(const std::vector<int>& counts) {
  ResampleAssignment a;
  const int n = static_cast<int>(counts.size());
  a.source_of.resize(n);
  for (int i = 0; i < n; ++i) {
    a.source_of[i] = i;
    if (counts[i] == 0) a.children.push_back(i);
  }
  std::size_t next_child = 0;
  for (int p = 0; p < n && next_child < a.children.size(); ++p) {
    for (int extra = counts[p] - 1; extra > 0 && next_child < a.children.size(); --extra) {
      a.source_of[a.children[next_child++]] = p;
    }
  }
  return a;
}

TemperStats temper(TemperTarget& target, std::vector<double> combined_log_weights, double n_ess,
                   const TemperingConfig& cfg, const TemperContext& ctx) {
  TemperStats stats;
  std::vector<double> w = normalize_weights(combined_log_weights);
  double remaining = 1.0;
  double mcmc_sum = 0.0;
  int jitter_calls = 0;

  auto stage = [&](const std::vector<double>& stage_weights, int iter) {
    RngStream rs(ctx.filter_seed, {tag(Stream::resample), static_cast<std::uint64_t>(ctx.k),
                                   static_cast<std::uint64_t>(ctx.region),
                                   static_cast<std::uint64_t>(iter)});
    const auto counts = resample_sus(stage_weights, rs);
    const auto assignment = assign_children(counts);
    target.resample(assignment);
    mcmc_sum += target.jitter(assignment, ctx, iter);
    ++jitter_calls;
  };

  while (ess(tempered_weights(w, remaining)) < n_ess) {
    if (stats.iterations >= cfg.max_temper_iters) {
      throw TemperLimit("tempering exceeded " + std::to_string(cfg.max_temper_iters) +
                        " iterations at step " + std::to_string(ctx.k) + ", region " +
                        std::to_string(ctx.region) + " (remaining " + std::to_string(remaining) +
                        ")");
    }
    const double delta = find_temperature(w, n_ess, remaining, cfg.bisection_tol);
    stage(tempered_weights(w, delta), stats.iterations);
    w = normalize_weights(target.log_likelihoods());
    remaining -= delta;
    stats.cumulative += delta;
    ++stats.iterations;
  }
  // Residual stage: assimilate whatever temperature is left.
  stage(tempered_weights(w, remaining), stats.iterations);
  stats.cumulative += remaining;

  stats.avg_mcmc_iters = jitter_calls > 0 ? mcmc_sum / jitter_calls : 0.0;
  return stats;
}

Ensemble Ensemble::from_states(std::vector<StaggeredState> states, double ess_fraction,
                               std::uint64_t sim_seed) {
  Ensemble e;
  const int n = static_cast<int>(states.size());
  e.particles = std::move(states);
  e.weights.assign(n, 1.0 / n);
  e.stream_seeds.resize(n);
  for (int i = 0; i < n; ++i) {
    e.stream_seeds[i] = derive_seed(sim_seed, {tag(Stream::propagation), static_cast<std::uint64_t>(i)});
  }
  e.n_ess_threshold = ess_fraction * n;
  return e;
}

namespace {

// Full-domain tempering target used by the global filter. Jittering runs
// through the same restricted-block path as the localized filter with the
// box covering the whole interior.
class GlobalTemperTarget : public TemperTarget {
 public:
  GlobalTemperTarget(Ensemble& ens, const ObservationBatch& batch, const TemperingConfig& cfg,
                     const FilterContext& fctx)
      : ens_(ens), batch_(batch), cfg_(cfg), fctx_(fctx) {
    const int d = ens_.particles.at(0).d();
    full_box_ = IndexBox{0, 0, d, d};
  }

  int size() const override { return ens_.n(); }

  std::vector<double> log_likelihoods() const override {
    std::vector<double> lw(ens_.n());
    for (int i = 0; i < ens_.n(); ++i) {
      lw[i] = global_log_likelihood(ens_.particles[i].eta, batch_);
    }
    return lw;
  }

  void resample(const ResampleAssignment& a) override {
    for (int c : a.children) {
      const int p = a.source_of[c];
      ens_.particles[c] = ens_.particles[p];
      if (cfg_.jitter_kind == JitterKind::mcmc) {
        ens_.window_start[c] = ens_.window_start[p];
        ens_.window_noise[c] = ens_.window_noise[p];
      }
    }
  }

  double jitter(const ResampleAssignment& a, const TemperContext& ctx, int iter) override {
    if (cfg_.jitter_kind == JitterKind::roughening) {
      rough_jitter(a, ctx, iter);
      return 0.0;
    }
    return mcmc_jitter(a, ctx, iter);
  }

 private:
  void rough_jitter(const ResampleAssignment& a, const TemperContext& ctx, int iter) {
    if (!fctx_.jitter_basis) return;
    const int d = ens_.particles.at(0).d();
    for (int c : a.children) {
      RngStream st(ctx.filter_seed,
                   {tag(Stream::jitter), static_cast<std::uint64_t>(ctx.k),
                    static_cast<std::uint64_t>(ctx.region), static_cast<std::uint64_t>(iter),
                    static_cast<std::uint64_t>(c)});
      FieldBlock block = restrict_field(ens_.particles[c], full_box_);
      fctx_.jitter_basis->sample_into_block(block, d, st);
      write_block(ens_.particles[c], block);
      apply_boundary_conditions(ens_.particles[c]);
    }
  }

  double mcmc_jitter(const ResampleAssignment& a, const TemperContext& ctx, int iter) {
    if (a.children.empty()) return 0.0;
    if (!fctx_.noise_basis || fctx_.window_steps <= 0) {
      throw InvalidArgument("mcmc jittering needs the noise basis and window length");
    }
    const int n_modes = fctx_.noise_basis->n_modes();
    const int steps = fctx_.window_steps;
    GridSpec g{ens_.particles.at(0).d()};
    Propagator prop(g, fctx_.params, fctx_.noise_basis);
    const double rho = cfg_.mcmc.rho;
    const double mix = std::sqrt(1.0 - rho * rho);
    const double sdt = std::sqrt(fctx_.params.dt);
    int max_rejections = 0;

    for (int c : a.children) {
      const int p = a.source_of[c];
      const double parent_ll = global_log_likelihood(ens_.particles[p].eta, batch_);
      const std::vector<double>& wp = ens_.window_noise[p];
      std::vector<double> blended(static_cast<std::size_t>(steps) * n_modes);
      int rejections = 0;
      for (int r = 0; r < cfg_.mcmc.m_jit; ++r) {
        RngStream noise(ctx.filter_seed,
                        {tag(Stream::mcmc_noise), static_cast<std::uint64_t>(ctx.k),
                         static_cast<std::uint64_t>(ctx.region), static_cast<std::uint64_t>(iter),
                         static_cast<std::uint64_t>(c), static_cast<std::uint64_t>(r)});
        for (std::size_t m = 0; m < blended.size(); ++m) {
          blended[m] = rho * wp[m] + mix * (sdt * noise.normal());
        }
        StaggeredState proposal = ens_.window_start[p];
        prop.propagate_with_noise(proposal, steps, blended);
        const double prop_ll = global_log_likelihood(proposal.eta, batch_);
        RngStream acc(ctx.filter_seed,
                      {tag(Stream::mcmc_accept), static_cast<std::uint64_t>(ctx.k),
                       static_cast<std::uint64_t>(ctx.region), static_cast<std::uint64_t>(iter),
                       static_cast<std::uint64_t>(c), static_cast<std::uint64_t>(r)});
        const double u = acc.uniform();
        if (std::log(std::max(u, 1e-300)) <= prop_ll - parent_ll) {
          ens_.particles[c] = std::move(proposal);
          ens_.window_noise[c] = std::move(blended);
          ens_.window_start[c] = ens_.window_start[p];
          break;
        }
        ++rejections;
        if (r + 1 == cfg_.mcmc.m_jit) {
          // Give up: the child stays the copy of its parent made at resampling.
          ens_.particles[c] = ens_.particles[p];
          ens_.window_noise[c] = wp;
          ens_.window_start[c] = ens_.window_start[p];
        }
      }
      max_rejections = std::max(max_rejections, rejections);
    }
    return static_cast<double>(max_rejections);
  }

  Ensemble& ens_;
  const ObservationBatch& batch_;
  const TemperingConfig& cfg_;
  const FilterContext& fctx_;
  IndexBox full_box_;
};

}  // namespace

AssimilationDiagnostics pf_assimilate(Ensemble& ens, const ObservationBatch& batch,
                                      const TemperingConfig& cfg, const FilterContext& fctx) {
  AssimilationDiagnostics diag;
  diag.k = fctx.k;
  const int n = ens.n();
  std::vector<double> combined(n);
  for (int i = 0; i < n; ++i) {
    const double ll = global_log_likelihood(ens.particles[i].eta, batch);
    combined[i] = std::log(ens.weights[i]) + ll;
  }
  std::vector<double> w = normalize_weights(combined);
  diag.ess_before = ess(w);

  if (!cfg.resample_enabled || diag.ess_before >= ens.n_ess_threshold) {
    ens.weights = std::move(w);
    return diag;
  }

  GlobalTemperTarget target(ens, batch, cfg, fctx);
  const TemperStats stats =
      temper(target, std::move(combined), ens.n_ess_threshold, cfg, {fctx.filter_seed, fctx.k, 0});
  diag.temper_steps = stats.iterations;
  diag.avg_mcmc_iters = stats.avg_mcmc_iters;
  ens.weights.assign(n, 1.0 / n);
  return diag;
}

const char* const kDiagnosticsCsvHeader = "k,ess_before,temper_steps,avg_mcmc_iters";

void write_diagnostics_csv_row(std::ostream& os, const AssimilationDiagnostics& d) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%d,%.17g,%d,%.17g", d.k, d.ess_before, d.temper_steps,
                d.avg_mcmc_iters);
  os << buf << '\n';
}

}  // namespace lpf
