#include "lpf/localization.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <ostream>
#include <string>

#include "lpf/errors.hpp"
#include "lpf/parallel.hpp"

namespace lpf {

double gaspari_cohn(const IndexBox& box, GridPoint z, double alpha, const GridSpec& grid,
                    bool wrap_ew) {
  if (box.contains(z.ix, z.iy, grid.d, wrap_ew)) return 1.0;
  return std::exp(-alpha * region_distance(box, z.ix, z.iy, grid, wrap_ew));
}

int assign_region(const std::vector<int>& owners, int j) {
  if (owners.empty()) throw InvalidArgument("observation lies in no subregion");
  if (std::binary_search(owners.begin(), owners.end(), j)) return j;
  return owners.front();
}

std::vector<std::vector<int>> owners_per_observation(const Decomposition& dec,
                                                     const std::vector<GridPoint>& locations) {
  std::vector<std::vector<int>> owners(locations.size());
  for (std::size_t s = 0; s < locations.size(); ++s) {
    owners[s] = dec.owners_of(locations[s].ix, locations[s].iy);
    if (owners[s].empty()) throw InvalidArgument("observation lies in no subregion");
  }
  return owners;
}

namespace {

// lerp with exact endpoints; equal inputs pass through exactly.
inline double lerp(double a, double b, double s) {
  if (s == 0.0) return a;
  if (s == 1.0) return b;
  return a + s * (b - a);
}

void check_conformal(const Field& a, const Field& b) {
  if (!a.same_shape(b)) throw InvalidArgument("blocks are not conformal");
}

}  // namespace

Field interp_ew(const Field& east, const Field& west) {
  check_conformal(east, west);
  if (east.nx() < 2) throw InvalidArgument("horizontal interpolation needs at least 2 columns");
  Field out(east.nx(), east.ny());
  const double denom = east.nx() - 1;
  for (int j = 0; j < east.ny(); ++j) {
    for (int i = 0; i < east.nx(); ++i) {
      out(i, j) = lerp(west(i, j), east(i, j), i / denom);
    }
  }
  return out;
}

Field interp_sn(const Field& south, const Field& north) {
  check_conformal(south, north);
  if (south.ny() < 2) throw InvalidArgument("vertical interpolation needs at least 2 rows");
  Field out(south.nx(), south.ny());
  const double denom = south.ny() - 1;
  for (int j = 0; j < south.ny(); ++j) {
    for (int i = 0; i < south.nx(); ++i) {
      out(i, j) = lerp(south(i, j), north(i, j), j / denom);
    }
  }
  return out;
}

namespace {

// Copy the sub-rectangle `span` (global coordinates) out of a region block.
Field extract_span(const Field& f, const IndexBox& owner_box, const IndexBox& span, int d) {
  Field out(span.w, span.h);
  for (int j = 0; j < span.h; ++j) {
    const int ly = span.y0 + j - owner_box.y0;
    for (int i = 0; i < span.w; ++i) {
      int lx = ((span.x0 + i) - owner_box.x0) % d;
      if (lx < 0) lx += d;
      out(i, j) = f(lx, ly);
    }
  }
  return out;
}

void write_span(StaggeredState& s, const IndexBox& span, const Field& u, const Field& v,
                const Field& eta, int d) {
  for (int j = 0; j < span.h; ++j) {
    const int gj = span.y0 + j + 1;
    for (int i = 0; i < span.w; ++i) {
      const int gi = (span.x0 + i) % d + 1;
      s.u(gi, gj) = u(i, j);
      s.v(gi, gj) = v(i, j);
      s.eta(gi, gj) = eta(i, j);
    }
  }
}

void copy_core(StaggeredState& s, const FieldBlock& block, const IndexBox& core, int d) {
  for (int j = 0; j < core.h; ++j) {
    const int gy = core.y0 + j;
    const int ly = gy - block.box.y0;
    for (int i = 0; i < core.w; ++i) {
      const int gx = (core.x0 + i) % d;
      int lx = (gx - block.box.x0) % d;
      if (lx < 0) lx += d;
      s.u(gx + 1, gy + 1) = block.u(lx, ly);
      s.v(gx + 1, gy + 1) = block.v(lx, ly);
      s.eta(gx + 1, gy + 1) = block.eta(lx, ly);
    }
  }
}

}  // namespace

StaggeredState merge_global(const std::vector<const FieldBlock*>& blocks,
                            const Decomposition& dec) {
  if (static_cast<int>(blocks.size()) != dec.n_loc) {
    throw InvalidArgument("merge needs one block per region");
  }
  for (int j = 0; j < dec.n_loc; ++j) {
    if (!blocks[j]) throw InvalidArgument("missing block for region " + std::to_string(j));
    if (!(blocks[j]->box == dec.boxes[j])) {
      throw InvalidArgument("block box does not match the decomposition");
    }
  }
  const int d = dec.d;
  GridSpec grid{d};
  StaggeredState out = StaggeredState::zeros(grid);

  for (int j = 0; j < dec.n_loc; ++j) {
    copy_core(out, *blocks[j], dec.cores[j], d);
  }
  for (const auto& f : dec.ew_overlaps) {
    const FieldBlock& bw = *blocks[f.west];
    const FieldBlock& be = *blocks[f.east];
    const Field u = interp_ew(extract_span(be.u, be.box, f.span, d), extract_span(bw.u, bw.box, f.span, d));
    const Field v = interp_ew(extract_span(be.v, be.box, f.span, d), extract_span(bw.v, bw.box, f.span, d));
    const Field eta =
        interp_ew(extract_span(be.eta, be.box, f.span, d), extract_span(bw.eta, bw.box, f.span, d));
    write_span(out, f.span, u, v, eta, d);
  }
  for (const auto& g : dec.sn_overlaps) {
    const FieldBlock& bs = *blocks[g.south];
    const FieldBlock& bn = *blocks[g.north];
    const Field u = interp_sn(extract_span(bs.u, bs.box, g.span, d), extract_span(bn.u, bn.box, g.span, d));
    const Field v = interp_sn(extract_span(bs.v, bs.box, g.span, d), extract_span(bn.v, bn.box, g.span, d));
    const Field eta =
        interp_sn(extract_span(bs.eta, bs.box, g.span, d), extract_span(bn.eta, bn.box, g.span, d));
    write_span(out, g.span, u, v, eta, d);
  }
  for (const auto& hh : dec.corner_overlaps) {
    auto blend = [&](const Field FieldBlock::* fld) {
      const Field sw = extract_span(blocks[hh.sw]->*fld, blocks[hh.sw]->box, hh.span, d);
      const Field se = extract_span(blocks[hh.se]->*fld, blocks[hh.se]->box, hh.span, d);
      const Field nw = extract_span(blocks[hh.nw]->*fld, blocks[hh.nw]->box, hh.span, d);
      const Field ne = extract_span(blocks[hh.ne]->*fld, blocks[hh.ne]->box, hh.span, d);
      // EW first with the stated argument order, then SN.
      return interp_sn(interp_ew(sw, se), interp_ew(nw, ne));
    };
    write_span(out, hh.span, blend(&FieldBlock::u), blend(&FieldBlock::v), blend(&FieldBlock::eta), d);
  }

  apply_boundary_conditions(out);
  return out;
}

double local_log_likelihood(const FieldBlock& own_block, const std::vector<LocalObsTerm>& own_obs,
                            double frozen_external_term) {
  double acc = 0.0;
  for (const auto& t : own_obs) {
    const double r = t.value - own_block.eta(t.bx, t.by);
    acc += r * r * t.inv_var;
  }
  return -0.5 * acc + frozen_external_term;
}

namespace {

// Tempering target for one region: likelihoods from the region's current
// blocks plus the carried frozen-external terms; jitter restricted to the
// region's box.
class LocalTemperTarget : public TemperTarget {
 public:
  LocalTemperTarget(std::vector<FieldBlock>& blocks, std::vector<double>& external,
                    const std::vector<LocalObsTerm>& own_obs, const JitterBasis* jitter, int d)
      : blocks_(blocks), external_(external), own_obs_(own_obs), jitter_(jitter), d_(d) {}

  int size() const override { return static_cast<int>(blocks_.size()); }

  std::vector<double> log_likelihoods() const override {
    std::vector<double> lw(blocks_.size());
    for (std::size_t i = 0; i < blocks_.size(); ++i) {
      lw[i] = local_log_likelihood(blocks_[i], own_obs_, external_[i]);
    }
    return lw;
  }

  void resample(const ResampleAssignment& a) override {
    for (int c : a.children) {
      const int p = a.source_of[c];
      blocks_[c] = blocks_[p];
      external_[c] = external_[p];
    }
  }

  double jitter(const ResampleAssignment& a, const TemperContext& ctx, int iter) override {
    if (!jitter_) return 0.0;
    for (int c : a.children) {
      RngStream st(ctx.filter_seed,
                   {tag(Stream::jitter), static_cast<std::uint64_t>(ctx.k),
                    static_cast<std::uint64_t>(ctx.region), static_cast<std::uint64_t>(iter),
                    static_cast<std::uint64_t>(c)});
      jitter_->sample_into_block(blocks_[c], d_, st);
    }
    return 0.0;
  }

 private:
  std::vector<FieldBlock>& blocks_;
  std::vector<double>& external_;
  const std::vector<LocalObsTerm>& own_obs_;
  const JitterBasis* jitter_;
  int d_;
};

}  // namespace

LpfDiagnostics lpf_assimilate(Ensemble& ens, const ObservationBatch& batch,
                              const LocalizationConfig& loc, const TemperingConfig& cfg,
                              const FilterContext& fctx, int threads) {
  LpfDiagnostics diag;
  diag.k = fctx.k;
  const int n = ens.n();
  const Decomposition& dec = loc.decomposition;
  const GridSpec grid{dec.d};

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
  if (cfg.jitter_kind == JitterKind::mcmc) {
    // Re-propagating a single block through the model is only defined when
    // the block is the whole domain; in that case the localized step is the
    // global one.
    if (dec.n_loc > 1) {
      throw InvalidArgument("mcmc jittering is only defined for a single region");
    }
    const AssimilationDiagnostics gd = pf_assimilate(ens, batch, cfg, fctx);
    diag.tempered = gd.temper_steps > 0;
    diag.regions.push_back({0, gd.ess_before, gd.temper_steps});
    return diag;
  }

  diag.tempered = true;

  // Split the ensemble into per-region blocks. The blocks as created here
  // are the frozen snapshot: external likelihood terms are evaluated on
  // them once, before any region is updated.
  std::vector<std::vector<FieldBlock>> blocks(dec.n_loc);
  for (int j = 0; j < dec.n_loc; ++j) {
    blocks[j].reserve(n);
    for (int i = 0; i < n; ++i) {
      blocks[j].push_back(restrict_field(ens.particles[i], dec.boxes[j]));
    }
  }

  const auto owners = owners_per_observation(dec, batch.locations);

  // Own-observation terms per region, in batch order, in the block's local
  // coordinates.
  std::vector<std::vector<LocalObsTerm>> own_obs(dec.n_loc);
  for (std::size_t s = 0; s < batch.size(); ++s) {
    const GridPoint z = batch.locations[s];
    const double sg = batch.sigma_at(s);
    for (int j : owners[s]) {
      const IndexBox& box = dec.boxes[j];
      int lx = (z.ix - box.x0) % dec.d;
      if (lx < 0) lx += dec.d;
      own_obs[j].push_back({lx, z.iy - box.y0, batch.values[s], 1.0 / (sg * sg)});
    }
  }

  // Frozen external terms: observations outside region j evaluated on the
  // snapshot block of the assigned region, damped by the localization
  // function. Constant per particle lineage for the whole analysis step.
  std::vector<std::vector<double>> external(dec.n_loc, std::vector<double>(n, 0.0));
  for (int j = 0; j < dec.n_loc; ++j) {
    for (std::size_t s = 0; s < batch.size(); ++s) {
      if (std::binary_search(owners[s].begin(), owners[s].end(), j)) continue;
      const GridPoint z = batch.locations[s];
      const double rho = gaspari_cohn(dec.boxes[j], z, loc.alpha, grid, dec.wrap_ew);
      if (rho == 0.0) continue;
      const int f = assign_region(owners[s], j);
      const IndexBox& fbox = dec.boxes[f];
      int lx = (z.ix - fbox.x0) % dec.d;
      if (lx < 0) lx += dec.d;
      const int ly = z.iy - fbox.y0;
      const double sg = batch.sigma_at(s);
      for (int i = 0; i < n; ++i) {
        const double r = batch.values[s] - blocks[f][i].eta(lx, ly);
        external[j][i] += -0.5 * rho * r * r / (sg * sg);
      }
    }
  }

  // Local analysis, independently per region.
  diag.regions.resize(dec.n_loc);
  std::exception_ptr region_error;
  std::mutex err_mu;
  parallel_for(dec.n_loc, threads, [&](int j) {
    try {
      std::vector<double> local_combined(n);
      for (int i = 0; i < n; ++i) {
        const double ll = local_log_likelihood(blocks[j][i], own_obs[j], external[j][i]);
        local_combined[i] = std::log(ens.weights[i]) + ll;
      }
      const std::vector<double> wloc = normalize_weights(local_combined);
      RegionDiagnostics rd;
      rd.region = j;
      rd.ess = ess(wloc);
      if (rd.ess < ens.n_ess_threshold) {
        LocalTemperTarget target(blocks[j], external[j], own_obs[j], fctx.jitter_basis, dec.d);
        const TemperStats stats = temper(target, std::move(local_combined), ens.n_ess_threshold,
                                         cfg, {fctx.filter_seed, fctx.k, j});
        rd.temper_steps = stats.iterations;
      }
      diag.regions[j] = rd;
    } catch (...) {
      std::lock_guard<std::mutex> lock(err_mu);
      if (!region_error) region_error = std::current_exception();
    }
  });
  if (region_error) std::rethrow_exception(region_error);

  // Interpolation merge, then reset weights.
  std::vector<const FieldBlock*> slot(dec.n_loc);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < dec.n_loc; ++j) slot[j] = &blocks[j][i];
    ens.particles[i] = merge_global(slot, dec);
  }
  ens.weights.assign(n, 1.0 / n);
  return diag;
}

const char* const kRegionCsvHeader = "k,region,ess,temper_steps";

void write_region_csv_row(std::ostream& os, int k, const RegionDiagnostics& r) {
  char buf[120];
  std::snprintf(buf, sizeof(buf), "%d,%d,%.17g,%d", k, r.region, r.ess, r.temper_steps);
  os << buf << '\n';
}

}  // namespace lpf
