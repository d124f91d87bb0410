#include "lpf/experiment.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "lpf/errors.hpp"
#include "lpf/parallel.hpp"

namespace lpf {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

}  // namespace

Field initial_eta(const GridSpec& grid) {
  const int ext = grid.extent();
  const double dx = grid.dx();
  Field eta(ext, ext);
  for (int j = 0; j < ext; ++j) {
    const double y = (j - 0.5) * dx;
    for (int i = 0; i < ext; ++i) {
      const double x = (i - 0.5) * dx;
      const double s = std::sin(y);
      eta(i, j) = 1.5 + 0.1 * std::atan(y - 0.5) - 0.05 * std::atan(0.5 * y) +
                  0.03 * std::atan(0.9 * x * (1.0 - x)) + 0.2 * std::sin(2.0 * M_PI * x) +
                  0.03 * std::sin(4.0 * M_PI * x) * s * s * s * s -
                  0.05 * std::exp(-0.5 * x * (1.0 - x)) + 0.05 * std::exp(-0.5 * y) +
                  0.1 * std::sin(2.0 * M_PI * y) * std::cos(2.0 * M_PI * x) +
                  0.3 * std::cos(6.0 * M_PI * x) * std::cos(6.0 * M_PI * x);
    }
  }
  return eta;
}

std::pair<Field, Field> geostrophic_velocity(const Field& eta, const ModelParams& params) {
  const int ext = eta.nx();
  const int d = ext - 2;
  const double dx = 1.0 / d;
  const double coef = params.rossby / (params.coriolis * params.froude * params.froude);
  Field u(ext, ext), v(ext, ext);
  // Stationary balance of the momentum equation: u = -C d(eta)/dy at
  // u-points, v = +C d(eta)/dx at v-points, centered. Differences are
  // grouped per column/row so flat directions stay exactly zero and survive
  // the rescaling below.
  for (int j = 1; j <= d; ++j) {
    for (int i = 1; i <= d; ++i) {
      const double detady =
          ((eta(i - 1, j + 1) - eta(i - 1, j - 1)) + (eta(i, j + 1) - eta(i, j - 1))) / (4.0 * dx);
      u(i, j) = -coef * detady;
      const double detadx =
          ((eta(i + 1, j - 1) - eta(i - 1, j - 1)) + (eta(i + 1, j) - eta(i - 1, j))) / (4.0 * dx);
      v(i, j) = coef * detadx;
    }
  }
  auto rescale = [d](Field& f) {
    double mx = 0.0;
    for (int j = 1; j <= d; ++j) {
      for (int i = 1; i <= d; ++i) mx = std::max(mx, std::abs(f(i, j)));
    }
    if (mx == 0.0) return;  // flat surface: leave the component at zero
    for (int j = 0; j < f.ny(); ++j) {
      for (int i = 0; i < f.nx(); ++i) f(i, j) /= mx;
    }
  };
  rescale(u);
  rescale(v);
  return {std::move(u), std::move(v)};
}

double mean_speed(const StaggeredState& s) {
  const int d = s.d();
  const double nu = l2_interior(s.u, d);
  const double nv = l2_interior(s.v, d);
  return std::sqrt(nu * nu + nv * nv);
}

InitialConditions burn_in_pipeline(const ExperimentConfig& cfg, const NoiseBasis& basis) {
  const GridSpec grid{cfg.d};
  const ModelParams params = cfg.model_params();

  StaggeredState base = StaggeredState::zeros(grid);
  base.eta = initial_eta(grid);
  auto [u0, v0] = geostrophic_velocity(base.eta, params);
  base.u = std::move(u0);
  base.v = std::move(v0);
  apply_boundary_conditions(base);

  // Deterministic spin-up washes out the artificial structure.
  {
    Propagator prop(grid, params, nullptr);
    RngStream unused(0);
    prop.propagate(base, cfg.pde_burn_steps, unused);
  }

  // N+1 independent stochastic continuations from the common state.
  const int members = cfg.n_particles + 1;
  std::vector<StaggeredState> states(members, base);
  parallel_for(members, cfg.threads, [&](int m) {
    Propagator prop(grid, params, &basis);
    RngStream st(cfg.seeds.ensemble, {tag(Stream::burn_in), static_cast<std::uint64_t>(m)});
    prop.propagate(states[m], cfg.spde_burn_steps, st);
  });

  RngStream pick(cfg.seeds.signal, {tag(Stream::select_signal)});
  const int signal_idx = static_cast<int>(pick.uniform_index(members));

  InitialConditions ic;
  ic.signal = std::move(states[signal_idx]);
  ic.ensemble.reserve(cfg.n_particles);
  for (int m = 0; m < members; ++m) {
    if (m != signal_idx) ic.ensemble.push_back(std::move(states[m]));
  }
  return ic;
}

void propagate_ensemble(Ensemble& ens, const GridSpec& grid, const ModelParams& params,
                        const NoiseBasis* basis, int n_steps, int k, bool retain_window,
                        int threads) {
  const int n = ens.n();
  if (retain_window) {
    ens.window_start.resize(n);
    ens.window_noise.assign(n, {});
  }
  parallel_for(n, threads, [&](int i) {
    Propagator prop(grid, params, basis);
    RngStream st(ens.stream_seeds[i], {static_cast<std::uint64_t>(k)});
    if (retain_window) {
      ens.window_start[i] = ens.particles[i];
      prop.propagate(ens.particles[i], n_steps, st, &ens.window_noise[i],
                     static_cast<long>(k - 1) * n_steps);
    } else {
      prop.propagate(ens.particles[i], n_steps, st, nullptr, static_cast<long>(k - 1) * n_steps);
    }
  });
}

RunRecord run_twin_experiment(const ExperimentConfig& cfg) {
  RunRecord rec;
  rec.config = cfg;
  const GridSpec grid{cfg.d};
  const ModelParams params = cfg.model_params();

  RngStream basis_stream(cfg.seeds.signal, {tag(Stream::burn_in), 0xbadc0ffeULL});
  const NoiseBasis basis =
      build_noise_basis(grid, cfg.noise.n_modes, cfg.noise.p, cfg.noise.sigma_noise, basis_stream);
  const JitterBasis jitter(grid, cfg.jitter.n_modes, cfg.jitter.sigma_jit);

  auto t0 = Clock::now();
  InitialConditions ic = burn_in_pipeline(cfg, basis);
  rec.timings.burn_in = seconds_since(t0);

  Ensemble ens = Ensemble::from_states(std::move(ic.ensemble), cfg.n_ess_fraction,
                                       cfg.seeds.ensemble);
  StaggeredState signal = std::move(ic.signal);

  const TemperingConfig temper_cfg = cfg.tempering_config();
  FilterContext fctx;
  fctx.filter_seed = cfg.seeds.filter;
  fctx.jitter_basis = &jitter;
  fctx.noise_basis = &basis;
  fctx.params = params;
  fctx.window_steps = cfg.schedule.r;

  LocalizationConfig loc;
  if (cfg.filter == FilterKind::lpf) {
    loc.n_loc = cfg.localization.n_loc;
    loc.alpha = cfg.localization.alpha;
    loc.overlap_halfwidth = cfg.localization.overlap_halfwidth;
    loc.decomposition =
        build_decomposition(grid, cfg.localization.n_loc, cfg.localization.overlap_halfwidth, true);
  }

  const bool retain = cfg.jitter.kind == JitterKind::mcmc;
  const int r = cfg.schedule.r;
  // RB trace cadence: propagate in sub-chunks so the trace lands on
  // multiples of rb_every model steps; chunking never changes the draws.
  int chunk = r;
  if (cfg.rb_every > 0) chunk = std::gcd(r, cfg.rb_every);

  Propagator signal_prop(grid, params, &basis);
  std::vector<const StaggeredState*> members(ens.n());

  if (cfg.snapshots) {
    std::filesystem::create_directories(std::filesystem::path(cfg.output_dir) / "snapshots");
    write_snapshot(snapshot_name(cfg.output_dir, "sig", 0, -1), signal);
    for (int i = 0; i < ens.n(); ++i) {
      write_snapshot(snapshot_name(cfg.output_dir, "ens", 0, i), ens.particles[i]);
    }
  }

  long model_step = 0;
  for (int k = 1; k <= cfg.n_assimilations; ++k) {
    t0 = Clock::now();
    RngStream sig_stream(cfg.seeds.signal, {tag(Stream::signal), static_cast<std::uint64_t>(k)});
    if (chunk == r) {
      signal_prop.propagate(signal, r, sig_stream, nullptr, model_step);
      propagate_ensemble(ens, grid, params, &basis, r, k, retain, cfg.threads);
      model_step += r;
      rec.timings.propagation += seconds_since(t0);
    } else {
      // Chunked propagation with RB sampling between chunks. Window
      // retention for MCMC accumulates across the chunks of one window.
      if (retain) {
        ens.window_start.resize(ens.n());
        ens.window_noise.assign(ens.n(), {});
        for (int i = 0; i < ens.n(); ++i) ens.window_start[i] = ens.particles[i];
      }
      std::vector<RngStream> streams;
      streams.reserve(ens.n());
      for (int i = 0; i < ens.n(); ++i) {
        streams.emplace_back(ens.stream_seeds[i], std::initializer_list<std::uint64_t>{
                                                      static_cast<std::uint64_t>(k)});
      }
      for (int done = 0; done < r; done += chunk) {
        signal_prop.propagate(signal, chunk, sig_stream, nullptr, model_step);
        parallel_for(ens.n(), cfg.threads, [&](int i) {
          Propagator prop(grid, params, &basis);
          prop.propagate(ens.particles[i], chunk, streams[i],
                         retain ? &ens.window_noise[i] : nullptr, model_step);
        });
        model_step += chunk;
        if (cfg.rb_every > 0 && model_step % cfg.rb_every == 0 && done + chunk < r) {
          std::vector<const Field*> etas(ens.n());
          for (int i = 0; i < ens.n(); ++i) etas[i] = &ens.particles[i].eta;
          rec.rb_trace.emplace_back(model_step, rb(signal.eta, etas));
        }
      }
      rec.timings.propagation += seconds_since(t0);
    }

    const auto locations = locations_at(cfg.schedule, k, cfg.d);
    RngStream obs_stream(cfg.seeds.observation,
                         {tag(Stream::observation), static_cast<std::uint64_t>(k)});
    ObservationBatch batch = synthesize(signal.eta, locations, cfg.schedule.sigma_obs, obs_stream, k);

    t0 = Clock::now();
    fctx.k = k;
    if (cfg.filter == FilterKind::pf) {
      rec.diagnostics.push_back(pf_assimilate(ens, batch, temper_cfg, fctx));
    } else {
      const LpfDiagnostics ld = lpf_assimilate(ens, batch, loc, temper_cfg, fctx, cfg.threads);
      AssimilationDiagnostics ad;
      ad.k = k;
      ad.ess_before = ld.ess_before;
      int total_steps = 0;
      for (const auto& rd : ld.regions) {
        total_steps += rd.temper_steps;
        rec.region_diagnostics.emplace_back(k, rd);
      }
      ad.temper_steps = total_steps;
      rec.diagnostics.push_back(ad);
    }
    rec.timings.assimilation += seconds_since(t0);

    t0 = Clock::now();
    for (int i = 0; i < ens.n(); ++i) members[i] = &ens.particles[i];
    rec.metrics.push_back(compute_metrics(k, signal, members, locations));
    if (cfg.rb_every > 0 && model_step % cfg.rb_every == 0) {
      rec.rb_trace.emplace_back(model_step, rec.metrics.back().rb_eta);
    }
    rec.timings.metrics += seconds_since(t0);

    rec.observations.push_back(std::move(batch));

    if (cfg.snapshots) {
      t0 = Clock::now();
      write_snapshot(snapshot_name(cfg.output_dir, "sig", k, -1), signal);
      for (int i = 0; i < ens.n(); ++i) {
        write_snapshot(snapshot_name(cfg.output_dir, "ens", k, i), ens.particles[i]);
      }
      rec.timings.io += seconds_since(t0);
    }
  }
  return rec;
}

void write_run_outputs(const RunRecord& record, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  {
    std::ofstream os(fs::path(dir) / "metrics.csv");
    if (!os) throw IoError("cannot write metrics.csv under '" + dir + "'");
    os << kMetricsCsvHeader << '\n';
    for (const auto& m : record.metrics) write_metric_csv_row(os, m);
  }
  {
    std::ofstream os(fs::path(dir) / "diagnostics.csv");
    os << kDiagnosticsCsvHeader << '\n';
    for (const auto& d : record.diagnostics) write_diagnostics_csv_row(os, d);
  }
  if (!record.region_diagnostics.empty()) {
    std::ofstream os(fs::path(dir) / "regions.csv");
    os << kRegionCsvHeader << '\n';
    for (const auto& [k, rd] : record.region_diagnostics) write_region_csv_row(os, k, rd);
  }
  {
    std::ofstream os(fs::path(dir) / "observations.csv");
    bool header = true;
    for (const auto& b : record.observations) {
      write_batch_csv(os, b, header);
      header = false;
    }
  }
  if (!record.rb_trace.empty()) {
    std::ofstream os(fs::path(dir) / "rb_trace.csv");
    os << "model_step,rb_eta\n";
    char buf[80];
    for (const auto& [step, val] : record.rb_trace) {
      std::snprintf(buf, sizeof(buf), "%ld,%.17g", step, val);
      os << buf << '\n';
    }
  }
  {
    std::ofstream os(fs::path(dir) / "config.echo.cfg");
    os << config_echo(record.config);
  }
  {
    std::ofstream os(fs::path(dir) / "manifest.txt");
    os << "version " << kVersionString << "\n";
    os << "seeds " << record.config.seeds.signal << ' ' << record.config.seeds.ensemble << ' '
       << record.config.seeds.observation << ' ' << record.config.seeds.filter << "\n";
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "wall_seconds burn_in=%.3f propagation=%.3f assimilation=%.3f metrics=%.3f "
                  "io=%.3f\n",
                  record.timings.burn_in, record.timings.propagation,
                  record.timings.assimilation, record.timings.metrics, record.timings.io);
    os << buf;
    os << "config_echo config.echo.cfg\n";
  }
}

void write_snapshot(const std::string& path, const StaggeredState& s) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot write snapshot '" + path + "'");
  os.write("LPF1", 4);
  const std::uint32_t nx = static_cast<std::uint32_t>(s.u.nx());
  const std::uint32_t ny = static_cast<std::uint32_t>(s.u.ny());
  os.write(reinterpret_cast<const char*>(&nx), 4);
  os.write(reinterpret_cast<const char*>(&ny), 4);
  // Little-endian hosts only; fields stored row-major as written.
  for (const Field* f : {&s.u, &s.v, &s.eta}) {
    os.write(reinterpret_cast<const char*>(f->data()),
             static_cast<std::streamsize>(f->size() * sizeof(double)));
  }
  if (!os) throw IoError("short write for snapshot '" + path + "'");
}

StaggeredState read_snapshot(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open snapshot '" + path + "'");
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "LPF1", 4) != 0) {
    throw IoError("bad snapshot magic in '" + path + "'");
  }
  std::uint32_t nx = 0, ny = 0;
  is.read(reinterpret_cast<char*>(&nx), 4);
  is.read(reinterpret_cast<char*>(&ny), 4);
  if (!is || nx < 3 || ny < 3 || nx != ny) throw IoError("bad snapshot extents in '" + path + "'");
  GridSpec g{static_cast<int>(nx) - 2};
  StaggeredState s = StaggeredState::zeros(g);
  for (Field* f : {&s.u, &s.v, &s.eta}) {
    is.read(reinterpret_cast<char*>(f->data()),
            static_cast<std::streamsize>(f->size() * sizeof(double)));
  }
  if (!is) throw IoError("short read for snapshot '" + path + "'");
  return s;
}

std::string snapshot_name(const std::string& dir, const std::string& tag, int k, int member) {
  char buf[64];
  if (member < 0) {
    std::snprintf(buf, sizeof(buf), "snapshots/%s_%05d.bin", tag.c_str(), k);
  } else {
    std::snprintf(buf, sizeof(buf), "snapshots/%s_%05d_%03d.bin", tag.c_str(), k, member);
  }
  return (std::filesystem::path(dir) / buf).string();
}

std::vector<MetricRecord> recompute_metrics_from_snapshots(const ExperimentConfig& cfg,
                                                           const std::string& run_dir) {
  std::vector<MetricRecord> out;
  for (int k = 1; k <= cfg.n_assimilations; ++k) {
    const std::string sig_path = snapshot_name(run_dir, "sig", k, -1);
    if (!std::filesystem::exists(sig_path)) break;
    const StaggeredState signal = read_snapshot(sig_path);
    std::vector<StaggeredState> members;
    members.reserve(cfg.n_particles);
    for (int i = 0; i < cfg.n_particles; ++i) {
      members.push_back(read_snapshot(snapshot_name(run_dir, "ens", k, i)));
    }
    std::vector<const StaggeredState*> ptrs;
    ptrs.reserve(members.size());
    for (const auto& m : members) ptrs.push_back(&m);
    out.push_back(compute_metrics(k, signal, ptrs, locations_at(cfg.schedule, k, cfg.d)));
  }
  return out;
}

}  // namespace lpf
