#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "lpf/filter.hpp"
#include "lpf/observations.hpp"
#include "lpf/swe.hpp"

namespace lpf {

enum class FilterKind { pf, lpf };

struct NoiseConfig {
  int n_modes = 25;
  double p = 2.0;
  double sigma_noise = 0.1;
};

struct JitterConfig {
  JitterKind kind = JitterKind::roughening;
  double sigma_jit = 0.01;
  int n_modes = 50;
  double rho = 0.99;
  int m_jit = 10;
};

struct LocalizationSettings {
  int n_loc = 4;
  double alpha = 500.0;
  int overlap_halfwidth = 6;
};

struct Seeds {
  std::uint64_t signal = 1;
  std::uint64_t ensemble = 2;
  std::uint64_t observation = 3;
  std::uint64_t filter = 4;

  // One master seed fixes all four streams.
  static Seeds from_master(std::uint64_t master);
};

struct ExperimentConfig {
  Regime regime = Regime::S;
  int d = 128;
  int n_particles = 50;
  double n_ess_fraction = 0.8;
  int n_assimilations = 100;
  FilterKind filter = FilterKind::lpf;
  int pde_burn_steps = 2000;
  int spde_burn_steps = 500;
  int threads = 1;
  bool snapshots = false;
  int rb_every = 0;  // 0 disables the between-assimilation RB trace
  std::string output_dir = "out";

  // Regime preset with optional explicit overrides.
  bool has_dt_override = false;
  double dt_override = 0.0;
  double viscosity = 1e-5;
  double coriolis = 1.0;

  NoiseConfig noise;
  ObservationSchedule schedule;
  JitterConfig jitter;
  LocalizationSettings localization;
  Seeds seeds;

  double bisection_tol = 1e-4;
  int max_temper_iters = 200;
  bool resampling = true;

  ModelParams model_params() const;
  TemperingConfig tempering_config() const;
};

// Flat key=value file with [section] headers and '#' comments. Unknown
// sections or keys are errors.
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config(const std::string& path);

// Echo of the effective configuration, itself parseable.
std::string config_echo(const ExperimentConfig& cfg);

extern const char* const kVersionString;

}  // namespace lpf
