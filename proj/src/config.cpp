#include "lpf/config.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "lpf/errors.hpp"
#include "lpf/rng.hpp"

namespace lpf {

const char* const kVersionString = "0.1.0";

Seeds Seeds::from_master(std::uint64_t master) {
  Seeds s;
  s.signal = derive_seed(master, {1});
  s.ensemble = derive_seed(master, {2});
  s.observation = derive_seed(master, {3});
  s.filter = derive_seed(master, {4});
  return s;
}

ModelParams ExperimentConfig::model_params() const {
  ModelParams p = ModelParams::preset(regime);
  if (has_dt_override) p.dt = dt_override;
  p.viscosity = viscosity;
  p.coriolis = coriolis;
  return p;
}

TemperingConfig ExperimentConfig::tempering_config() const {
  TemperingConfig t;
  t.bisection_tol = bisection_tol;
  t.max_temper_iters = max_temper_iters;
  t.jitter_kind = jitter.kind;
  t.mcmc.rho = jitter.rho;
  t.mcmc.m_jit = jitter.m_jit;
  t.resample_enabled = resampling;
  return t;
}

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("bad numeric value for " + key + ": '" + v + "'");
  }
}

long to_long(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const long x = std::stol(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("bad integer value for " + key + ": '" + v + "'");
  }
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const unsigned long long x = std::stoull(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return static_cast<std::uint64_t>(x);
  } catch (const std::exception&) {
    throw ConfigError("bad seed value for " + key + ": '" + v + "'");
  }
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "on") return true;
  if (v == "0" || v == "false" || v == "off") return false;
  throw ConfigError("bad boolean value for " + key + ": '" + v + "'");
}

std::vector<int> to_int_list(const std::string& key, const std::string& v) {
  std::vector<int> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    out.push_back(static_cast<int>(to_long(key, item)));
  }
  if (out.empty()) throw ConfigError("empty list for " + key);
  return out;
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string line;
  std::string section = "experiment";
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("malformed section at line " + std::to_string(lineno));
      section = trim(line.substr(1, line.size() - 2));
      if (section != "experiment" && section != "model" && section != "noise" &&
          section != "observations" && section != "jitter" && section != "tempering" &&
          section != "localization") {
        throw ConfigError("unknown section [" + section + "]");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("expected key=value at line " + std::to_string(lineno));
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    const std::string qual = section + "." + key;

    if (qual == "experiment.regime") {
      if (val == "S") cfg.regime = Regime::S;
      else if (val == "M") cfg.regime = Regime::M;
      else throw ConfigError("regime must be S or M, got '" + val + "'");
    } else if (qual == "experiment.d") {
      cfg.d = static_cast<int>(to_long(qual, val));
    } else if (qual == "experiment.n_particles") {
      cfg.n_particles = static_cast<int>(to_long(qual, val));
    } else if (qual == "experiment.n_ess_fraction") {
      cfg.n_ess_fraction = to_double(qual, val);
    } else if (qual == "experiment.n_assimilations") {
      cfg.n_assimilations = static_cast<int>(to_long(qual, val));
    } else if (qual == "experiment.filter") {
      if (val == "pf") cfg.filter = FilterKind::pf;
      else if (val == "lpf") cfg.filter = FilterKind::lpf;
      else throw ConfigError("filter must be pf or lpf, got '" + val + "'");
    } else if (qual == "experiment.pde_burn_steps") {
      cfg.pde_burn_steps = static_cast<int>(to_long(qual, val));
    } else if (qual == "experiment.spde_burn_steps") {
      cfg.spde_burn_steps = static_cast<int>(to_long(qual, val));
    } else if (qual == "experiment.threads") {
      cfg.threads = static_cast<int>(to_long(qual, val));
    } else if (qual == "experiment.snapshots") {
      cfg.snapshots = to_bool(qual, val);
    } else if (qual == "experiment.rb_every") {
      cfg.rb_every = static_cast<int>(to_long(qual, val));
    } else if (qual == "experiment.output_dir") {
      cfg.output_dir = val;
    } else if (qual == "experiment.seed_signal") {
      cfg.seeds.signal = to_u64(qual, val);
    } else if (qual == "experiment.seed_ensemble") {
      cfg.seeds.ensemble = to_u64(qual, val);
    } else if (qual == "experiment.seed_observation") {
      cfg.seeds.observation = to_u64(qual, val);
    } else if (qual == "experiment.seed_filter") {
      cfg.seeds.filter = to_u64(qual, val);
    } else if (qual == "experiment.seed") {
      cfg.seeds = Seeds::from_master(to_u64(qual, val));
    } else if (qual == "experiment.r") {
      cfg.schedule.r = static_cast<int>(to_long(qual, val));
    } else if (qual == "model.dt") {
      cfg.has_dt_override = true;
      cfg.dt_override = to_double(qual, val);
    } else if (qual == "model.viscosity") {
      cfg.viscosity = to_double(qual, val);
    } else if (qual == "model.coriolis") {
      cfg.coriolis = to_double(qual, val);
    } else if (qual == "noise.n_modes") {
      cfg.noise.n_modes = static_cast<int>(to_long(qual, val));
    } else if (qual == "noise.p") {
      cfg.noise.p = to_double(qual, val);
    } else if (qual == "noise.sigma_noise") {
      cfg.noise.sigma_noise = to_double(qual, val);
    } else if (qual == "observations.kind") {
      if (val == "fixed_grid") cfg.schedule.kind = ObservationSchedule::Kind::fixed_grid;
      else if (val == "moving_strip") cfg.schedule.kind = ObservationSchedule::Kind::moving_strip;
      else throw ConfigError("observations.kind must be fixed_grid or moving_strip");
    } else if (qual == "observations.d_obs") {
      cfg.schedule.d_obs = static_cast<int>(to_long(qual, val));
    } else if (qual == "observations.strip_width") {
      cfg.schedule.strip_width = static_cast<int>(to_long(qual, val));
    } else if (qual == "observations.strip_positions") {
      cfg.schedule.strip_positions = to_int_list(qual, val);
    } else if (qual == "observations.sigma_obs") {
      cfg.schedule.sigma_obs = to_double(qual, val);
    } else if (qual == "jitter.kind") {
      if (val == "roughening") cfg.jitter.kind = JitterKind::roughening;
      else if (val == "mcmc") cfg.jitter.kind = JitterKind::mcmc;
      else throw ConfigError("jitter.kind must be roughening or mcmc");
    } else if (qual == "jitter.sigma_jit") {
      cfg.jitter.sigma_jit = to_double(qual, val);
    } else if (qual == "jitter.n_modes") {
      cfg.jitter.n_modes = static_cast<int>(to_long(qual, val));
    } else if (qual == "jitter.rho") {
      cfg.jitter.rho = to_double(qual, val);
    } else if (qual == "jitter.m_jit") {
      cfg.jitter.m_jit = static_cast<int>(to_long(qual, val));
    } else if (qual == "tempering.bisection_tol") {
      cfg.bisection_tol = to_double(qual, val);
    } else if (qual == "tempering.max_iters") {
      cfg.max_temper_iters = static_cast<int>(to_long(qual, val));
    } else if (qual == "tempering.resampling") {
      cfg.resampling = to_bool(qual, val);
    } else if (qual == "localization.n_loc") {
      cfg.localization.n_loc = static_cast<int>(to_long(qual, val));
    } else if (qual == "localization.alpha") {
      cfg.localization.alpha = to_double(qual, val);
    } else if (qual == "localization.overlap_halfwidth") {
      cfg.localization.overlap_halfwidth = static_cast<int>(to_long(qual, val));
    } else {
      throw ConfigError("unknown key '" + key + "' in section [" + section + "]");
    }
  }

  if (cfg.d < 4) throw ConfigError("d must be at least 4");
  if (cfg.n_particles < 2) throw ConfigError("n_particles must be at least 2");
  if (cfg.schedule.r < 1) throw ConfigError("r must be at least 1");
  if (cfg.n_assimilations < 0) throw ConfigError("n_assimilations must be nonnegative");
  if (cfg.n_ess_fraction <= 0.0 || cfg.n_ess_fraction > 1.0) {
    throw ConfigError("n_ess_fraction must lie in (0, 1]");
  }
  if (cfg.schedule.sigma_obs <= 0.0) throw ConfigError("sigma_obs must be positive");
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

std::string config_echo(const ExperimentConfig& cfg) {
  std::ostringstream os;
  char buf[64];
  auto num = [&buf](double x) {
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return std::string(buf);
  };
  os << "[experiment]\n";
  os << "regime = " << (cfg.regime == Regime::S ? "S" : "M") << "\n";
  os << "d = " << cfg.d << "\n";
  os << "n_particles = " << cfg.n_particles << "\n";
  os << "n_ess_fraction = " << num(cfg.n_ess_fraction) << "\n";
  os << "r = " << cfg.schedule.r << "\n";
  os << "n_assimilations = " << cfg.n_assimilations << "\n";
  os << "filter = " << (cfg.filter == FilterKind::pf ? "pf" : "lpf") << "\n";
  os << "pde_burn_steps = " << cfg.pde_burn_steps << "\n";
  os << "spde_burn_steps = " << cfg.spde_burn_steps << "\n";
  os << "threads = " << cfg.threads << "\n";
  os << "snapshots = " << (cfg.snapshots ? 1 : 0) << "\n";
  os << "rb_every = " << cfg.rb_every << "\n";
  os << "output_dir = " << cfg.output_dir << "\n";
  os << "seed_signal = " << cfg.seeds.signal << "\n";
  os << "seed_ensemble = " << cfg.seeds.ensemble << "\n";
  os << "seed_observation = " << cfg.seeds.observation << "\n";
  os << "seed_filter = " << cfg.seeds.filter << "\n";
  os << "\n[model]\n";
  const ModelParams mp = cfg.model_params();
  os << "dt = " << num(mp.dt) << "\n";
  os << "viscosity = " << num(mp.viscosity) << "\n";
  os << "coriolis = " << num(mp.coriolis) << "\n";
  os << "\n[noise]\n";
  os << "n_modes = " << cfg.noise.n_modes << "\n";
  os << "p = " << num(cfg.noise.p) << "\n";
  os << "sigma_noise = " << num(cfg.noise.sigma_noise) << "\n";
  os << "\n[observations]\n";
  os << "kind = "
     << (cfg.schedule.kind == ObservationSchedule::Kind::fixed_grid ? "fixed_grid" : "moving_strip")
     << "\n";
  os << "d_obs = " << cfg.schedule.d_obs << "\n";
  os << "strip_width = " << cfg.schedule.strip_width << "\n";
  os << "strip_positions = ";
  for (std::size_t i = 0; i < cfg.schedule.strip_positions.size(); ++i) {
    if (i) os << ",";
    os << cfg.schedule.strip_positions[i];
  }
  os << "\n";
  os << "sigma_obs = " << num(cfg.schedule.sigma_obs) << "\n";
  os << "\n[jitter]\n";
  os << "kind = " << (cfg.jitter.kind == JitterKind::roughening ? "roughening" : "mcmc") << "\n";
  os << "sigma_jit = " << num(cfg.jitter.sigma_jit) << "\n";
  os << "n_modes = " << cfg.jitter.n_modes << "\n";
  os << "rho = " << num(cfg.jitter.rho) << "\n";
  os << "m_jit = " << cfg.jitter.m_jit << "\n";
  os << "\n[tempering]\n";
  os << "bisection_tol = " << num(cfg.bisection_tol) << "\n";
  os << "max_iters = " << cfg.max_temper_iters << "\n";
  os << "resampling = " << (cfg.resampling ? 1 : 0) << "\n";
  os << "\n[localization]\n";
  os << "n_loc = " << cfg.localization.n_loc << "\n";
  os << "alpha = " << num(cfg.localization.alpha) << "\n";
  os << "overlap_halfwidth = " << cfg.localization.overlap_halfwidth << "\n";
  return os.str();
}

}  // namespace lpf
