#include "mhd/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <string_view>
#include <vector>

#include "mhd/diagnostics.hpp"
#include "mhd/dynamics.hpp"
#include "mhd/errors.hpp"
#include "mhd/lagrangian.hpp"
#include "mhd/manufactured.hpp"
#include "mhd/rng.hpp"
#include "mhd/spectral.hpp"

// The snapshot format is little-endian by contract; raw writes below rely on
// the host matching it.
static_assert(std::endian::native == std::endian::little);

namespace mhd {

namespace {

using nlohmann::json;

std::string trim(std::string s) {
  const auto issp = [](unsigned char c) { return std::isspace(c) != 0; };
  while (!s.empty() && issp(s.front())) s.erase(s.begin());
  while (!s.empty() && issp(s.back())) s.pop_back();
  return s;
}

double to_double(const std::string& v, const std::string& key) {
  try {
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': cannot parse number from '" + v + "'");
  }
}

int to_int(const std::string& v, const std::string& key) {
  const double x = to_double(v, key);
  if (x != std::floor(x) || std::abs(x) > 1e9)
    throw ConfigError("config key '" + key + "': expected an integer, got '" + v + "'");
  return static_cast<int>(x);
}

std::uint64_t to_u64(const std::string& v, const std::string& key) {
  try {
    std::size_t used = 0;
    const std::uint64_t x = std::stoull(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': cannot parse unsigned integer from '" + v + "'");
  }
}

bool to_bool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "1" || v == "on" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "off" || v == "no") return false;
  throw ConfigError("config key '" + key + "': expected a boolean, got '" + v + "'");
}

void apply_key(RunConfig& c, const std::string& key, const std::string& value) {
  if (key == "n") c.n = to_int(value, key);
  else if (key == "length") c.length = to_double(value, key);
  else if (key == "mu") c.mu = to_double(value, key);
  else if (key == "lambda") c.lambda = to_double(value, key);
  else if (key == "rho_tilde") c.rho_tilde = to_double(value, key);
  else if (key == "h_tilde_1") c.h_tilde_1 = to_double(value, key);
  else if (key == "h_tilde_2") c.h_tilde_2 = to_double(value, key);
  else if (key == "h_tilde_3") c.h_tilde_3 = to_double(value, key);
  else if (key == "pressure") c.pressure = value;
  else if (key == "pressure_k") c.pressure_k = to_double(value, key);
  else if (key == "gamma") c.gamma = to_double(value, key);
  else if (key == "pressure_scale") c.pressure_scale = to_double(value, key);
  else if (key == "rho_prime") c.rho_prime = to_double(value, key);
  else if (key == "rho_double_prime") c.rho_double_prime = to_double(value, key);
  else if (key == "rho_lower") c.rho_lower = to_double(value, key);
  else if (key == "rho_upper") c.rho_upper = to_double(value, key);
  else if (key == "margin_d") c.margin_d = to_double(value, key);
  else if (key == "init") c.init = value;
  else if (key == "seed") c.seed = to_u64(value, key);
  else if (key == "spectral_decay_rate") c.spectral_decay_rate = to_double(value, key);
  else if (key == "target_c0") c.target_c0 = to_double(value, key);
  else if (key == "init_max_mode") c.init_max_mode = to_int(value, key);
  else if (key == "t_end") c.t_end = to_double(value, key);
  else if (key == "dt") c.dt = to_double(value, key);
  else if (key == "cfl") c.cfl = to_double(value, key);
  else if (key == "diagnostics_every") c.diagnostics_every = to_int(value, key);
  else if (key == "snapshot_every") c.snapshot_every = to_int(value, key);
  else if (key == "particles_every") c.particles_every = to_int(value, key);
  else if (key == "particles_per_axis") c.particles_per_axis = to_int(value, key);
  else if (key == "dealias") c.dealias = to_bool(value, key);
  else if (key == "deterministic") c.deterministic = to_bool(value, key);
  else if (key == "spectral_interp") c.spectral_interp = to_bool(value, key);
  else if (key == "output") c.output = value;
  else throw ConfigError("unknown config key '" + key + "'");
}

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// Zero-mean Gaussian field restricted to modes with max axis index <=
// max_mode (Nyquist excluded) and shaped by exp(-rate |m|).
ScalarField shaped_noise(const GridSpec& g, std::uint64_t seed, int max_mode, double rate) {
  Spectrum s = fft(white_noise(g, seed));
  const int n = g.n;
  const auto signed_of = [n](int i) { return i <= n / 2 ? i : i - n; };
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k <= n / 2; ++k) {
        const int m1 = signed_of(i), m2 = signed_of(j), m3 = k;
        const int amax = std::max({std::abs(m1), std::abs(m2), m3});
        auto& cc = s.c[s.index(i, j, k)];
        const bool nyquist = std::abs(m1) == n / 2 || std::abs(m2) == n / 2 || m3 == n / 2;
        if (amax == 0 || amax > max_mode || nyquist) {
          cc = 0.0;
        } else {
          cc *= std::exp(-rate * std::sqrt(double(m1) * m1 + double(m2) * m2 + double(m3) * m3));
        }
      }
  return ifft(s);
}

void project_solenoidal(std::array<Spectrum, 3>& b, const GridSpec& g) {
  for_each_mode(g, [&](std::size_t idx, double k1, double k2, double k3) {
    const double ksq = k1 * k1 + k2 * k2 + k3 * k3;
    if (ksq == 0.0) return;
    const std::complex<double> kb = k1 * b[0].c[idx] + k2 * b[1].c[idx] + k3 * b[2].c[idx];
    b[0].c[idx] -= k1 * kb / ksq;
    b[1].c[idx] -= k2 * kb / ksq;
    b[2].c[idx] -= k3 * kb / ksq;
  });
}

void write_u32(std::ofstream& f, std::uint32_t v) {
  f.write(reinterpret_cast<const char*>(&v), sizeof v);
}

void write_f64(std::ofstream& f, double v) {
  f.write(reinterpret_cast<const char*>(&v), sizeof v);
}

std::uint32_t read_u32(std::ifstream& f) {
  std::uint32_t v = 0;
  f.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!f) throw IoError("snapshot truncated in header");
  return v;
}

double read_f64(std::ifstream& f) {
  double v = 0;
  f.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!f) throw IoError("snapshot truncated in header");
  return v;
}

}  // namespace

ModelParams RunConfig::model_params() const {
  PressureLaw law = pressure == "gamma"
                        ? PressureLaw(GammaLaw{pressure_k, gamma})
                        : PressureLaw(NonMonotone(pressure_scale, rho_prime, rho_double_prime));
  return make_model_params(mu, lambda, rho_tilde, {h_tilde_1, h_tilde_2, h_tilde_3}, law,
                           rho_lower, rho_upper, margin_d);
}

void RunConfig::validate() const {
  if (n < 4 || n % 2 != 0) throw ConfigError("config: n must be even and at least 4");
  if (!(length > 0.0)) throw ConfigError("config: length must be positive");
  if (!(t_end > 0.0)) throw ConfigError("config: t_end must be positive");
  if (dt < 0.0) throw ConfigError("config: dt must be nonnegative");
  if (dt == 0.0 && !(cfl > 0.0)) throw ConfigError("config: cfl must be positive when dt = 0");
  if (diagnostics_every < 1 || snapshot_every < 1 || particles_every < 1)
    throw ConfigError("config: cadences must be at least 1");
  if (particles_per_axis < 1) throw ConfigError("config: particles_per_axis must be at least 1");
  if (pressure != "gamma" && pressure != "nonmonotone")
    throw ConfigError("config: pressure must be 'gamma' or 'nonmonotone'");
  if (init != "equilibrium" && init != "random_smooth" && init != "manufactured")
    throw ConfigError("config: init must be 'equilibrium', 'random_smooth' or 'manufactured'");
  if (init == "random_smooth") {
    if (!(target_c0 > 0.0)) throw ConfigError("config: target_c0 must be positive");
    if (init_max_mode < 1 || init_max_mode >= n / 2)
      throw ConfigError("config: init_max_mode must lie in [1, n/2)");
    if (!(spectral_decay_rate >= 0.0))
      throw ConfigError("config: spectral_decay_rate must be nonnegative");
  }
  if (output.empty()) throw ConfigError("config: output directory must not be empty");
}

RunConfig parse_run_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open config file: " + file.string());
  RunConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(file.string() + ":" + std::to_string(lineno) + ": expected key = value");
    apply_key(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return cfg;
}

FluidState generate_initial_data(const RunConfig& config, const ModelParams& params,
                                 double* achieved_c0) {
  const GridSpec g = config.grid();
  if (achieved_c0) *achieved_c0 = 0.0;

  if (config.init == "equilibrium") return equilibrium_state(g, params);
  if (config.init == "manufactured") return make_manufactured_case(g).state_at(0.0);

  // random_smooth. Draw the seven perturbation fields from disjoint streams
  // of the one config seed.
  ScalarField drho = shaped_noise(g, config.seed * 7919 + 1, config.init_max_mode,
                                  config.spectral_decay_rate);
  VectorField u(g), b(g);
  std::array<Spectrum, 3> bs;
  for (int j = 0; j < 3; ++j) {
    u[j] = shaped_noise(g, config.seed * 7919 + 2 + j, config.init_max_mode,
                        config.spectral_decay_rate);
    bs[j] = fft(shaped_noise(g, config.seed * 7919 + 5 + j, config.init_max_mode,
                             config.spectral_decay_rate));
  }
  project_solenoidal(bs, g);
  for (int j = 0; j < 3; ++j) b[j] = ifft(bs[j]);

  const double raw = sobolev_norm(drho, 2) + sobolev_norm(u, 2) + sobolev_norm(b, 2);
  if (!(raw > 0.0)) throw ConfigError("generate_initial_data: degenerate random draw");

  // One common factor: the triple norm is homogeneous of degree 1, so this
  // hits target_c0 to round-off. Halve while the density leaves the open
  // corridor; each halving halves the achieved size.
  double scale = config.target_c0 / raw;
  FluidState s(g);
  for (int attempt = 0;; ++attempt) {
    s.rho.values() = params.rho_tilde + scale * drho.values();
    const double lo = s.rho.values().minCoeff();
    const double hi = s.rho.values().maxCoeff();
    if (lo > params.rho_lower + params.d && hi < params.rho_upper - params.d) break;
    if (attempt >= 60)
      throw ConfigError("generate_initial_data: corridor unachievable at any amplitude");
    scale *= 0.5;
  }
  for (int j = 0; j < 3; ++j) {
    s.u[j].values() = scale * u[j].values();
    s.H[j].values() = params.H_tilde[j] + scale * b[j].values();
  }

  if (achieved_c0) {
    ScalarField fluct(g);
    fluct.values() = s.rho.values() - params.rho_tilde;
    *achieved_c0 =
        sobolev_norm(fluct, 2) + sobolev_norm(s.u, 2) + sobolev_norm(b_fluctuation(s, params), 2);
  }
  return s;
}

void write_snapshot(const FluidState& state, const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open snapshot for writing: " + path.string());
  const GridSpec& g = state.grid();
  f.write("MHD0", 4);
  write_u32(f, 1);  // format version
  write_u32(f, static_cast<std::uint32_t>(g.n));
  write_f64(f, g.length);
  write_f64(f, state.t);
  const std::size_t count = static_cast<std::size_t>(g.n) * g.n * g.n;
  const auto dump = [&](const ScalarField& field) {
    f.write(reinterpret_cast<const char*>(field.values().data()),
            static_cast<std::streamsize>(count * sizeof(double)));
  };
  dump(state.rho);
  for (int j = 0; j < 3; ++j) dump(state.u[j]);
  for (int j = 0; j < 3; ++j) dump(state.H[j]);
  f.flush();
  if (!f) throw IoError("write failed for snapshot: " + path.string());
}

FluidState read_snapshot(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open snapshot: " + path.string());
  char magic[4] = {};
  f.read(magic, 4);
  if (!f || std::string_view(magic, 4) != "MHD0")
    throw IoError("not a snapshot file (bad magic): " + path.string());
  if (const auto version = read_u32(f); version != 1)
    throw IoError("unsupported snapshot version " + std::to_string(version));
  const std::uint32_t n = read_u32(f);
  const double length = read_f64(f);
  const double t = read_f64(f);
  if (n < 4 || n > 4096 || n % 2 != 0 || !(length > 0.0) || !std::isfinite(t))
    throw IoError("snapshot header invalid: " + path.string());

  FluidState state(GridSpec(static_cast<int>(n), length), t);
  const std::size_t count = static_cast<std::size_t>(n) * n * n;
  const auto slurp = [&](ScalarField& field) {
    f.read(reinterpret_cast<char*>(field.values().data()),
           static_cast<std::streamsize>(count * sizeof(double)));
    if (!f) throw IoError("snapshot truncated: " + path.string());
  };
  slurp(state.rho);
  for (int j = 0; j < 3; ++j) slurp(state.u[j]);
  for (int j = 0; j < 3; ++j) slurp(state.H[j]);
  if (f.peek() != std::ifstream::traits_type::eof())
    throw IoError("snapshot has trailing bytes: " + path.string());
  return state;
}

FluidState read_snapshot(const std::filesystem::path& path, const GridSpec& expect) {
  FluidState s = read_snapshot(path);
  if (s.grid().n != expect.n || s.grid().length != expect.length)
    throw IoError("snapshot grid mismatch: file has n=" + std::to_string(s.grid().n) +
                  ", expected n=" + std::to_string(expect.n));
  return s;
}

int run(const RunConfig& config) {
  config.validate();
  const GridSpec g = config.grid();
  namespace fs = std::filesystem;

  // The manufactured traveling wave brings its own parameters and forcing.
  std::optional<ManufacturedCase> mcase;
  Forcing forcing;
  const Forcing* forcing_ptr = nullptr;
  if (config.init == "manufactured") {
    mcase.emplace(make_manufactured_case(g));
    forcing = mcase->forcing();
    forcing_ptr = &forcing;
  }
  const ModelParams params = mcase ? mcase->params : config.model_params();

  int threads_cap = 1;
  if (const char* env = std::getenv("MHD0_THREADS"))
    threads_cap = std::max(1, std::atoi(env));  // single-threaded solver, cap is honored trivially

  double achieved_c0 = 0.0;
  FluidState state = generate_initial_data(config, params, &achieved_c0);

  fs::create_directories(config.output);
  const fs::path dir(config.output);
  std::ofstream csv(dir / "run.csv");
  std::ofstream pcsv(dir / "particles.csv");
  if (!csv || !pcsv) throw IoError("cannot create output CSVs in " + config.output);
  csv << "t,E_pot,E_kin,E_mag,dissipation,energy_residual,norm_H2_rho,norm_H2_u,norm_H2_B,"
         "norm_L2_rho_t,norm_L2_u_t,norm_L2_B_t,A_func,res_momdecomp,res_poissonflux,res_wv,"
         "divH_L2,rho_min,rho_max\n";
  pcsv << "t,seed_id,x1,x2,x3,rho_interp,rho_carried,flux_integral\n";

  const auto snapshot_name = [&](int step) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "snapshot_%06d.bin", step);
    return dir / buf;
  };
  write_snapshot(state, snapshot_name(0));

  const Interp interp = config.spectral_interp ? Interp::Spectral : Interp::Trilinear;
  ParticleSet particles = seed_particles(state, config.particles_per_axis, {}, interp);
  std::vector<ParticleSet> particle_history;

  const StepOptions sopts{.rhs = {.dealias = config.dealias, .forcing = forcing_ptr},
                          .want_stages = true};
  const RhsOptions ropts = sopts.rhs;

  AFunctionalAccumulator a_acc;
  const double mass0 = integral(state.rho);
  double dissipation_integral = 0.0;
  double e0 = 0.0;
  bool have_e0 = false;
  bool cfl_warned = false;

  // Run-wide trackers for the summary.
  double rho_min_seen = std::numeric_limits<double>::infinity();
  double rho_max_seen = -std::numeric_limits<double>::infinity();
  double max_mass_drift = 0.0, max_res_mom = 0.0, max_res_poisson = 0.0, max_res_wv = 0.0;
  double max_div_h = 0.0;
  double last_energy_residual = 0.0, last_a = 0.0, last_recorded_t = 0.0;
  int steps = 0, rows = 0;
  std::string blowup_field, blowup_what;

  const auto emit_diagnostics = [&]() {
    const StateDerivative deriv = rhs(state, params, ropts);
    const DiagnosticsRecord rec = collect_diagnostics(state, deriv, params);
    a_acc = a_functional_update(a_acc, state, deriv, params);
    const double energy = rec.energy_potential + rec.energy_kinetic + rec.energy_magnetic;
    if (!have_e0) {
      e0 = energy;
      have_e0 = true;
    }
    const double energy_residual = energy - e0 + dissipation_integral;

    csv << fmt(rec.t) << ',' << fmt(rec.energy_potential) << ',' << fmt(rec.energy_kinetic) << ','
        << fmt(rec.energy_magnetic) << ',' << fmt(rec.dissipation) << ','
        << fmt(energy_residual) << ',' << fmt(rec.norm_h2_rho) << ',' << fmt(rec.norm_h2_u) << ','
        << fmt(rec.norm_h2_b) << ',' << fmt(rec.norm_l2_rho_t) << ',' << fmt(rec.norm_l2_u_t)
        << ',' << fmt(rec.norm_l2_b_t) << ',' << fmt(a_acc.value()) << ','
        << fmt(rec.res_momentum_decomposition) << ',' << fmt(rec.res_poisson_flux) << ','
        << fmt(rec.res_wv_identity) << ',' << fmt(rec.div_h_l2) << ',' << fmt(rec.rho_min) << ','
        << fmt(rec.rho_max) << '\n';
    ++rows;

    rho_min_seen = std::min(rho_min_seen, rec.rho_min);
    rho_max_seen = std::max(rho_max_seen, rec.rho_max);
    max_mass_drift = std::max(max_mass_drift, std::abs(integral(state.rho) - mass0) /
                                                  std::abs(mass0));
    max_res_mom = std::max(max_res_mom, rec.res_momentum_decomposition);
    max_res_poisson = std::max(max_res_poisson, rec.res_poisson_flux);
    max_res_wv = std::max(max_res_wv, rec.res_wv_identity);
    max_div_h = std::max(max_div_h, rec.div_h_l2);
    last_energy_residual = energy_residual;
    last_a = a_acc.value();
    last_recorded_t = rec.t;

    if (!rec.finite()) throw BlowupError("diagnostics", "non-finite diagnostics record");
    if (const DivergenceReport div = check_solenoidal(state); !div.ok)
      throw BlowupError("H", "div H " + std::to_string(div.div_l2) + " exceeds tolerance " +
                                 std::to_string(div.tolerance));

    if (config.dt > 0.0 && !cfl_warned) {
      const double limit = cfl_dt(state, params, config.cfl);
      if (config.dt > limit) {
        std::cerr << "warning: fixed dt " << config.dt << " exceeds the CFL estimate " << limit
                  << " at t = " << state.t << "\n";
        cfl_warned = true;
      }
    }
  };

  const auto emit_particles = [&]() {
    const ScalarSampler rho_at(state.rho, interp);
    for (std::size_t i = 0; i < particles.size(); ++i) {
      const Eigen::Vector3d& x = particles.positions[i];
      pcsv << fmt(state.t) << ',' << particles.seed_ids[i] << ',' << fmt(x[0]) << ','
           << fmt(x[1]) << ',' << fmt(x[2]) << ',' << fmt(rho_at(x)) << ','
           << fmt(std::exp(particles.log_rho_carried[i])) << ','
           << fmt(particles.flux_integral[i]) << '\n';
    }
    particle_history.push_back(particles);
  };

  const auto write_summary = [&](const std::string& status, int exit_code) {
    json j;
    j["status"] = status;
    j["exit_code"] = exit_code;
    j["t_final"] = state.t;
    j["steps"] = steps;
    j["rows"] = rows;
    j["achieved_c0"] = achieved_c0;
    j["a_final"] = last_a;
    j["energy_residual_final"] = last_energy_residual;
    j["max_mass_drift"] = max_mass_drift;
    j["max_res_momdecomp"] = max_res_mom;
    j["max_res_poissonflux"] = max_res_poisson;
    j["max_res_wv"] = max_res_wv;
    j["max_divH_L2"] = max_div_h;
    j["rho_min"] = rho_min_seen;
    j["rho_max"] = rho_max_seen;
    j["last_recorded_t"] = last_recorded_t;
    j["threads_cap"] = threads_cap;
    if (!particle_history.empty()) {
      const CorridorCertificate cert =
          corridor_certificate(particle_history, params, rho_min_seen, rho_max_seen);
      j["corridor"] = cert.corridor_ok ? "PASS" : "FAIL";
      j["max_particle_log_excursion"] =
          *std::max_element(cert.max_log_excursion.begin(), cert.max_log_excursion.end());
      j["max_particle_flux_window"] =
          *std::max_element(cert.max_flux_window.begin(), cert.max_flux_window.end());
    }
    if (!blowup_field.empty()) {
      j["blowup_field"] = blowup_field;
      j["blowup_reason"] = blowup_what;
    }
    std::ofstream out(dir / "summary.json");
    out << j.dump(2) << '\n';
    std::cout << j.dump(2) << std::endl;
  };

  try {
    emit_diagnostics();
    emit_particles();

    const double T = config.t_end;
    const double t_eps = 1e-12 * std::max(1.0, T);
    while (state.t < T - t_eps) {
      double dt = config.dt > 0.0 ? config.dt : cfl_dt(state, params, config.cfl);
      dt = std::min(dt, T - state.t);
      if (!(dt > 0.0)) throw ConfigError("run: time step collapsed to zero");

      const StepResult r = step_rk4(state, params, dt, sopts);
      particles = carry_log_density(particles, *r.stages, params, dt, interp);
      state = r.state;
      dissipation_integral += r.dissipation_increment;
      ++steps;

      if (steps % config.diagnostics_every == 0) emit_diagnostics();
      if (steps % config.particles_every == 0) emit_particles();
      if (steps % config.snapshot_every == 0) write_snapshot(state, snapshot_name(steps));
      if (steps > 5'000'000) throw ConfigError("run: step limit exceeded");
    }
  } catch (const BlowupError& e) {
    blowup_field = e.field_name;
    blowup_what = e.what();
    csv.flush();
    pcsv.flush();
    write_summary("blowup", 3);
    return 3;
  }

  if (steps % config.snapshot_every != 0) write_snapshot(state, snapshot_name(steps));
  write_summary("ok", 0);
  return 0;
}

}  // namespace mhd
