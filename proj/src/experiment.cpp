#include "catmem/experiment.hpp"

#include "catmem/analytic_oracle.hpp"
#include "catmem/cat_sampler.hpp"
#include "catmem/mode_functions.hpp"
#include "catmem/signatures.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <set>
#include <sstream>

namespace catmem {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

std::uint64_t fnv1a(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double parse_double(std::string_view text) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc{} || ptr != t.data() + t.size() || t.empty())
    throw InvalidParameter("expected a number, got '" + t + "'");
  return v;
}

std::uint64_t parse_u64(std::string_view text) {
  const std::string t = trim(text);
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc{} || ptr != t.data() + t.size() || t.empty())
    throw InvalidParameter("expected a non-negative integer, got '" + t + "'");
  return v;
}

bool parse_bool(std::string_view text) {
  const std::string t = trim(text);
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  throw InvalidParameter("expected true/false, got '" + t + "'");
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

std::string fmt_short(double v) {
  std::ostringstream os;
  os << std::setprecision(10) << v;
  return os.str();
}

const std::set<std::string>& sweep_axis_names() {
  static const std::set<std::string> names{"t_store", "n_bar", "alpha0", "gamma_int"};
  return names;
}

void apply_key(ExperimentConfig& c, const std::string& key, const std::string& value) {
  if (key == "preset") {
    c = preset_config(value);
  } else if (key == "gamma_ext") {
    c.params.gamma_ext = parse_double(value);
  } else if (key == "gamma_int") {
    // Rates are in units of gamma_o, so moving loss to the internal channel shrinks gamma_ext.
    c.params.gamma_int = parse_double(value);
    c.params.gamma_ext = 1.0 - c.params.gamma_int;
  } else if (key == "gamma_m") {
    c.params.gamma_m = parse_double(value);
  } else if (key == "g_eff") {
    c.params.g_eff = parse_double(value);
  } else if (key == "n_th_mech" || key == "n_bar") {
    c.params.n_th_mech = parse_double(value);
  } else if (key == "n_init_mech") {
    c.params.n_init_mech = parse_double(value);
  } else if (key == "alpha0") {
    c.alpha0 = parse_double(value);
  } else if (key == "t_store") {
    c.t_store = parse_storage_time(value);
  } else if (key == "t_write") {
    c.t_write = parse_double(value);
  } else if (key == "dt") {
    c.dt = parse_double(value);
  } else if (key == "n_samples") {
    c.n_samples = parse_u64(value);
  } else if (key == "n_samples_zero_temperature") {
    c.n_samples_zero_temperature = parse_u64(value);
  } else if (key == "stratified") {
    c.stratified = parse_bool(value);
  } else if (key == "seed") {
    c.seed = parse_u64(value);
  } else if (key == "workers") {
    c.workers = static_cast<unsigned>(parse_u64(value));
  } else if (key == "signatures") {
    c.signatures.clear();
    for (const auto& name : split(value, ','))
      if (!name.empty()) c.signatures.push_back(parse_signature(name));
  } else if (key == "quad_step") {
    c.grids.quad_step = parse_double(value);
  } else if (key == "quad_extent") {
    c.grids.quad_extent = parse_double(value);
  } else if (key == "wigner_h") {
    c.grids.wigner_h = parse_double(value);
  } else if (key == "wigner_extent") {
    c.grids.wigner_extent = parse_double(value);
  } else if (key == "density_step") {
    c.grids.density_step = parse_double(value);
  } else if (key == "density_extent") {
    c.grids.density_extent = parse_double(value);
  } else if (key == "jackknife_blocks") {
    c.jackknife_blocks = parse_u64(value);
  } else if (key == "timestep_error") {
    c.timestep_error = parse_bool(value);
  } else if (key == "phase_correction") {
    c.phase_correction = parse_bool(value);
  } else if (key == "out_dir") {
    c.out_dir = value;
  } else if (key.rfind("sweep.", 0) == 0) {
    const std::string axis = key.substr(6);
    if (!sweep_axis_names().contains(axis))
      throw InvalidParameter("unknown sweep axis (expected t_store, n_bar, alpha0 or gamma_int)");
    SweepAxis a{axis, {}};
    for (const auto& item : split(value, ',')) {
      if (item.empty()) continue;
      if (axis == "t_store") {
        a.values.push_back(parse_storage_time(item));
      } else {
        a.values.push_back({parse_double(item), false});
      }
    }
    if (a.values.empty()) throw InvalidParameter("sweep axis needs at least one value");
    std::erase_if(c.sweep, [&](const SweepAxis& s) { return s.name == axis; });
    c.sweep.push_back(std::move(a));
  } else {
    throw InvalidParameter("unknown key");
  }
}

WignerGrid wigner_grid_for(const ExperimentConfig& c) {
  const double extent = c.grids.wigner_extent > 0.0 ? c.grids.wigner_extent : std::abs(c.alpha0) + 4.0;
  return {Axis::symmetric(extent, c.grids.wigner_h, AxisTag::PhaseSpaceRe),
          Axis::symmetric(extent, c.grids.wigner_h, AxisTag::PhaseSpaceIm)};
}

QuadratureGrid quadrature_grid_for(const ExperimentConfig& c, double theta) {
  QuadratureGrid g = QuadratureGrid::standard(theta, std::abs(c.alpha0));
  const double extent = c.grids.quad_extent > 0.0 ? c.grids.quad_extent : -g.points.min;
  g.points = Axis::symmetric(extent, c.grids.quad_step, g.points.tag);
  return g;
}

double negativity_only(const ExperimentConfig& c, const ProtocolSchedule& schedule) {
  const auto samples = sample_cat({CatParams{c.alpha0}, c.effective_samples(), c.seed, c.stratified});
  auto results = run_ensemble(samples, c.params, schedule, c.seed, c.workers);
  if (c.phase_correction) apply_phase_correction(results, coherent_gain(c.params, schedule));
  return wigner_negativity(wigner_estimate(results, wigner_grid_for(c)));
}

void check_finite(const std::string& what, double v) {
  if (!std::isfinite(v)) throw NumericalError("non-finite value in " + what);
}

void check_finite(const std::string& what, const std::optional<double>& v) {
  if (v) check_finite(what, *v);
}

std::vector<std::string> csv_header_comments(const ExperimentConfig& c, std::string_view kind) {
  return {"catmem " + std::string(kind), "config_hash=" + hex64(c.hash()),
          "preset=" + (c.preset.empty() ? std::string("none") : c.preset), "seed=" + std::to_string(c.seed)};
}

ordered_json config_json(const ExperimentConfig& c) {
  ordered_json j = ordered_json::object();
  std::istringstream is(c.canonical());
  std::string line;
  while (std::getline(is, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    j[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return j;
}

void put(ordered_json& j, const char* key, const std::optional<double>& v) {
  if (v) j[key] = *v;
}

ordered_json point_json(const PointResult& r) {
  ordered_json j;
  j["n_samples"] = r.n_samples;
  j["t_store"] = r.t_store;
  j["coherent_gain"] = {{"re", r.coherent_gain.real()}, {"im", r.coherent_gain.imag()}};
  j["channel_gain_abs"] = std::abs(r.channel.gain);
  j["channel_added_noise"] = r.channel.added_noise;
  j["equivalent_storage_time"] = r.t_equivalent;
  j["equivalent_n_bar"] = r.n_equivalent;
  put(j, "negativity", r.negativity);
  put(j, "negativity_sampling_error", r.negativity_se);
  put(j, "negativity_timestep_error", r.negativity_dt_error);
  put(j, "negativity_total_error", r.negativity_total_error());
  put(j, "oracle_negativity_storage", r.oracle_negativity_storage);
  put(j, "oracle_negativity_channel", r.oracle_negativity_channel);
  put(j, "wigner_integral", r.wigner_integral);
  put(j, "wigner_imag_residual", r.wigner_imag_residual);
  put(j, "variance_in", r.variance_in);
  put(j, "variance_out", r.variance_out);
  put(j, "variance_imag_residual", r.variance_imag_residual);
  return j;
}

std::string opt_cell(const std::optional<double>& v) { return v ? fmt(*v) : std::string(); }

}  // namespace

double StorageTime::resolve(const SystemParams& params) const {
  return in_lifetimes ? storage_time_from_lifetimes(value, params) : value;
}

std::string StorageTime::to_string() const { return fmt(value) + (in_lifetimes ? "/Gamma_m" : ""); }

StorageTime parse_storage_time(std::string_view text) {
  const std::string t = trim(text);
  const auto slash = t.find('/');
  if (slash == std::string::npos) return {parse_double(t), false};
  const std::string unit = trim(std::string_view(t).substr(slash + 1));
  if (unit != "Gamma_m" && unit != "gamma_m" && unit != "Γ_m" && unit != "Γm")
    throw InvalidParameter("storage time unit must be /Gamma_m, got '/" + unit + "'");
  return {parse_double(std::string_view(t).substr(0, slash)), true};
}

std::string to_string(Signature s) {
  switch (s) {
    case Signature::PDistribution: return "p_distribution";
    case Signature::XDistribution: return "x_distribution";
    case Signature::Wigner: return "wigner";
    case Signature::Negativity: return "negativity";
    case Signature::Density: return "density";
    case Signature::Variance: return "variance";
  }
  return "?";
}

Signature parse_signature(std::string_view name) {
  for (Signature s : {Signature::PDistribution, Signature::XDistribution, Signature::Wigner, Signature::Negativity,
                      Signature::Density, Signature::Variance})
    if (to_string(s) == name) return s;
  throw InvalidParameter("unknown signature '" + std::string(name) + "'");
}

void ExperimentConfig::validate() const {
  params.validate();
  if (std::abs(params.gamma_o() - 1.0) > 1e-12)
    throw InvalidParameter("gamma_ext + gamma_int must equal 1 (rates are in units of gamma_o)");
  if (!(alpha0 >= 0.0)) throw InvalidParameter("alpha0 must be a real amplitude >= 0");
  if (!(t_write >= 0.0)) throw InvalidParameter("t_write must be >= 0 (0 selects the default)");
  SamplerConfig{CatParams{alpha0}, effective_samples(), seed, stratified}.validate();
  if (workers == 0) throw InvalidParameter("workers must be >= 1");
  if (!(grids.quad_step > 0.0) || !(grids.wigner_h > 0.0) || !(grids.density_step > 0.0))
    throw InvalidParameter("grid steps must be > 0");
  if (grids.wigner_h > 0.05 + 1e-12) throw InvalidParameter("wigner_h must be <= 0.05");
  if (sweep.size() > 2) throw InvalidParameter("at most two sweep axes");
  (void)schedule();
}

ProtocolSchedule ExperimentConfig::schedule() const {
  ProtocolSchedule s = default_schedule(params, t_store.resolve(params));
  if (t_write > 0.0) s.t_write = s.t_read = t_write;
  s.dt = dt;
  s.validate(params);
  return s;
}

std::size_t ExperimentConfig::effective_samples() const {
  const bool noiseless = params.n_th_mech == 0.0 && params.n_init_mech == 0.0;
  return noiseless && n_samples_zero_temperature > 0 ? n_samples_zero_temperature : n_samples;
}

bool ExperimentConfig::wants(Signature s) const { return std::ranges::find(signatures, s) != signatures.end(); }

std::string ExperimentConfig::canonical() const {
  std::ostringstream os;
  os << "gamma_ext = " << fmt(params.gamma_ext) << '\n'
     << "gamma_int = " << fmt(params.gamma_int) << '\n'
     << "gamma_m = " << fmt(params.gamma_m) << '\n'
     << "g_eff = " << fmt(params.g_eff) << '\n'
     << "n_th_mech = " << fmt(params.n_th_mech) << '\n'
     << "n_init_mech = " << fmt(params.n_init_mech) << '\n'
     << "alpha0 = " << fmt(alpha0) << '\n'
     << "t_store = " << t_store.to_string() << '\n'
     << "t_write = " << fmt(t_write) << '\n'
     << "dt = " << fmt(dt) << '\n'
     << "n_samples = " << n_samples << '\n'
     << "n_samples_zero_temperature = " << n_samples_zero_temperature << '\n'
     << "stratified = " << (stratified ? "true" : "false") << '\n'
     << "seed = " << seed << '\n';
  os << "signatures = ";
  for (std::size_t i = 0; i < signatures.size(); ++i) os << (i ? "," : "") << to_string(signatures[i]);
  os << '\n'
     << "quad_step = " << fmt(grids.quad_step) << '\n'
     << "quad_extent = " << fmt(grids.quad_extent) << '\n'
     << "wigner_h = " << fmt(grids.wigner_h) << '\n'
     << "wigner_extent = " << fmt(grids.wigner_extent) << '\n'
     << "density_step = " << fmt(grids.density_step) << '\n'
     << "density_extent = " << fmt(grids.density_extent) << '\n'
     << "jackknife_blocks = " << jackknife_blocks << '\n'
     << "timestep_error = " << (timestep_error ? "true" : "false") << '\n'
     << "phase_correction = " << (phase_correction ? "true" : "false") << '\n';
  for (const auto& axis : sweep) {
    os << "sweep." << axis.name << " = ";
    for (std::size_t i = 0; i < axis.values.size(); ++i) os << (i ? "," : "") << axis.values[i].to_string();
    os << '\n';
  }
  return os.str();
}

std::uint64_t ExperimentConfig::hash() const { return fnv1a(canonical()); }

void apply_config_text(ExperimentConfig& config, std::string_view text, std::string_view source) {
  std::istringstream is{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const auto hash_pos = line.find('#');
    if (hash_pos != std::string::npos) line.erase(hash_pos);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto where = std::string(source) + ":" + std::to_string(line_no) + ": ";
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw ConfigError(where + "expected 'key = value', got '" + body + "'");
    const std::string key = trim(std::string_view(body).substr(0, eq));
    const std::string value = trim(std::string_view(body).substr(eq + 1));
    try {
      apply_key(config, key, value);
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw ConfigError(where + key + ": " + e.what());
    }
  }
}

void apply_config_file(ExperimentConfig& config, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open config file");
  std::ostringstream ss;
  ss << in.rdbuf();
  apply_config_text(config, ss.str(), path);
}

std::vector<std::string> preset_names() {
  return {"table1", "fig5", "fig6", "fig9", "fig10", "fig11", "fig12", "fig13"};
}

ExperimentConfig preset_config(std::string_view name) {
  // Shared device: gamma_o/2pi = 170 kHz, gamma_m/2pi = 17.5 Hz, G = 0.6, dt = 1/(10 gamma_o).
  std::string text = "gamma_ext = 1\ngamma_int = 0\ngamma_m = " + fmt(17.5 / 170.0e3) + "\ng_eff = 0.6\ndt = 0.1\n";
  const std::string zero_t_times = "0.02/Gamma_m,0.05/Gamma_m,0.1/Gamma_m,0.15/Gamma_m,0.2/Gamma_m,0.25/Gamma_m,"
                                   "0.3/Gamma_m,0.3466/Gamma_m";
  const std::string thermal_times = "0/Gamma_m,0.01/Gamma_m,0.02/Gamma_m,0.03/Gamma_m,0.04/Gamma_m,0.05/Gamma_m,"
                                    "0.06/Gamma_m,0.07/Gamma_m,0.08/Gamma_m,0.0912/Gamma_m";
  if (name == "table1") {
    text += "alpha0 = 1\nt_store = 0.34657359027997264/Gamma_m\nn_samples = 4\nsignatures = variance\n"
            "sweep.alpha0 = 1,2,3,5\n";
  } else if (name == "fig5" || name == "fig6") {
    text += "alpha0 = 5\nn_samples = 4\nsignatures = p_distribution,x_distribution,wigner,negativity,density,variance\n";
    text += name == "fig5" ? "t_store = 0.02/Gamma_m\n" : "t_store = 0.3466/Gamma_m\n";
  } else if (name == "fig9" || name == "fig12") {
    text += "alpha0 = 5\nt_store = 0.02/Gamma_m\nn_samples = 4\nsignatures = negativity\n";
    text += "sweep.t_store = " + zero_t_times + "\nsweep.alpha0 = 2,3,4,5\n";
    if (name == "fig12") text += "gamma_int = 0.05\n";
  } else if (name == "fig10" || name == "fig13") {
    text += "alpha0 = 2\nn_th_mech = 2\nt_store = 0.01/Gamma_m\nn_samples = 200000\nsignatures = negativity\n"
            "timestep_error = false\n";
    text += "sweep.t_store = " + thermal_times + "\nsweep.alpha0 = 2,3,4,5\n";
    if (name == "fig13") text += "gamma_int = 0.05\nn_init_mech = 0.5\n";
  } else if (name == "fig11") {
    text += "alpha0 = 2\nt_store = 0.02/Gamma_m\nn_samples = 200000\nn_samples_zero_temperature = 4\n"
            "signatures = negativity\ntimestep_error = false\n"
            "sweep.n_bar = 0,0.5,1,1.5,2,2.5,3,3.5,4\n"
            "sweep.t_store = 0/Gamma_m,0.02/Gamma_m,0.04/Gamma_m,0.06/Gamma_m,0.08/Gamma_m,0.1/Gamma_m,"
            "0.15/Gamma_m,0.2/Gamma_m,0.25/Gamma_m,0.3/Gamma_m,0.3466/Gamma_m\n";
  } else {
    std::string known;
    for (const auto& n : preset_names()) known += (known.empty() ? "" : ", ") + n;
    throw ConfigError("unknown preset '" + std::string(name) + "' (known: " + known + ")");
  }
  ExperimentConfig c;
  apply_config_text(c, text, "preset:" + std::string(name));
  c.preset = std::string(name);
  c.out_dir = "catmem_" + std::string(name);
  return c;
}

std::optional<double> PointResult::negativity_total_error() const {
  if (!negativity_se && !negativity_dt_error) return std::nullopt;
  const double a = negativity_se.value_or(0.0);
  const double b = negativity_dt_error.value_or(0.0);
  return std::hypot(a, b);
}

PointResult evaluate_point(const ExperimentConfig& config, bool keep_fields) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  const SystemParams& params = config.params;
  const ProtocolSchedule schedule = config.schedule();

  PointResult out;
  out.n_samples = config.effective_samples();
  out.t_store = schedule.t_store;
  const auto samples = sample_cat({CatParams{config.alpha0}, out.n_samples, config.seed, config.stratified});
  auto results = run_ensemble(samples, params, schedule, config.seed, config.workers);
  out.coherent_gain = coherent_gain(params, schedule);
  if (config.phase_correction) apply_phase_correction(results, out.coherent_gain);
  out.channel = output_channel(params, schedule);
  const double transmission = std::abs(out.channel.gain);
  if (params.gamma_m > 0.0 && transmission > 0.0 && transmission < 1.0)
    std::tie(out.t_equivalent, out.n_equivalent) = out.channel.equivalent_decoherence(params.gamma_m);

  const bool wigner = config.wants(Signature::Wigner) || config.wants(Signature::Negativity);
  if (wigner) {
    const WignerGrid grid = wigner_grid_for(config);
    GridField w;
    const bool noisy = params.n_th_mech > 0.0 || params.n_init_mech > 0.0;
    const std::size_t blocks = balanced_block_count(results.size(), config.jackknife_blocks);
    if (config.wants(Signature::Negativity) && noisy && blocks >= 2) {
      NegativityEstimate est = wigner_negativity_jackknife(results, grid, blocks);
      out.negativity = est.negativity;
      out.negativity_se = est.standard_error;
      w = std::move(est.wigner);
    } else {
      w = wigner_estimate(results, grid);
      if (config.wants(Signature::Negativity)) {
        out.negativity = wigner_negativity(w);
        out.negativity_se = 0.0;
      }
    }
    out.wigner_integral = w.integrate();
    out.wigner_imag_residual = w.imag_residual;
    if (config.wants(Signature::Negativity)) {
      if (params.gamma_m > 0.0) {
        out.oracle_negativity_storage = wigner_negativity(
            evolved_wigner_field(grid.re, grid.im, schedule.t_store, config.alpha0, params.n_th_mech, params.gamma_m));
        if (transmission > 0.0 && transmission < 1.0)
          out.oracle_negativity_channel = wigner_negativity(
              evolved_wigner_field(grid.re, grid.im, out.t_equivalent, config.alpha0, out.n_equivalent, params.gamma_m));
      }
      if (config.timestep_error) {
        ExperimentConfig half = config;
        half.dt = 0.5 * config.dt;
        ProtocolSchedule half_schedule = schedule;
        half_schedule.dt = half.dt;
        out.negativity_dt_error = std::abs(*out.negativity - negativity_only(half, half_schedule));
      }
    }
    if (keep_fields && config.wants(Signature::Wigner)) out.fields["wigner"] = std::move(w);
  }

  if (config.wants(Signature::Variance)) {
    std::vector<TrajectoryResult> inputs;
    inputs.reserve(samples.size());
    for (const auto& s : samples) inputs.push_back({s.alpha_in, s.alpha_in_plus, s.weight, s.branch, {}, {}});
    out.variance_in = p_variance(inputs).variance;
    const VarianceEstimate v = p_variance(results);
    out.variance_out = v.variance;
    out.variance_imag_residual = v.imag_residual;
  }
  if (keep_fields && config.wants(Signature::PDistribution))
    out.fields["p_distribution"] = p_distribution(results, quadrature_grid_for(config, 0.5 * std::numbers::pi));
  if (keep_fields && config.wants(Signature::XDistribution))
    out.fields["x_distribution"] = p_distribution(results, quadrature_grid_for(config, 0.0));
  if (keep_fields && config.wants(Signature::Density)) {
    const double extent = config.grids.density_extent > 0.0 ? config.grids.density_extent : config.alpha0 + 2.0;
    out.fields["density"] = reconstruct_density(results, Axis::symmetric(extent, config.grids.density_step, AxisTag::CoherentA),
                                                Axis::symmetric(extent, config.grids.density_step, AxisTag::CoherentB));
  }

  for (const auto& [name, field] : out.fields)
    if (!field.all_finite()) throw NumericalError("non-finite value in field " + name);
  check_finite("coherent gain", std::abs(out.coherent_gain));
  check_finite("negativity", out.negativity);
  check_finite("negativity standard error", out.negativity_se);
  check_finite("variance_out", out.variance_out);
  check_finite("wigner integral", out.wigner_integral);
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

ExperimentConfig at_sweep_point(const ExperimentConfig& base, const std::vector<StorageTime>& coords) {
  if (coords.size() != base.sweep.size()) throw InvalidParameter("sweep coordinate count mismatch");
  ExperimentConfig c = base;
  for (std::size_t i = 0; i < coords.size(); ++i) {
    const std::string& axis = base.sweep[i].name;
    if (axis == "t_store") {
      c.t_store = coords[i];
    } else if (axis == "n_bar") {
      c.params.n_th_mech = coords[i].value;
    } else if (axis == "alpha0") {
      c.alpha0 = coords[i].value;
    } else if (axis == "gamma_int") {
      c.params.gamma_int = coords[i].value;
      c.params.gamma_ext = 1.0 - coords[i].value;
    }
  }
  c.sweep.clear();
  return c;
}

int cmd_run(const ExperimentConfig& config, std::ostream& log) {
  const auto wall_start = std::chrono::system_clock::now();
  const PointResult r = evaluate_point(config, true);
  fs::create_directories(config.out_dir);
  const auto comments = csv_header_comments(config, "run");

  ordered_json files = ordered_json::array();
  for (const auto& [name, field] : r.fields) {
    const fs::path csv = fs::path(config.out_dir) / (name + ".csv");
    const fs::path json = fs::path(config.out_dir) / (name + ".json");
    std::ofstream cs(csv);
    field.write_csv(cs, comments);
    std::ofstream js(json);
    field.write_json(js);
    files.push_back(csv.filename().string());
    files.push_back(json.filename().string());
  }

  ordered_json manifest;
  manifest["tool"] = "catmem";
  manifest["command"] = "run";
  manifest["preset"] = config.preset;
  manifest["config_hash"] = hex64(config.hash());
  manifest["seed"] = config.seed;
  manifest["workers"] = config.workers;
  manifest["config"] = config_json(config);
  manifest["results"] = point_json(r);
  manifest["files"] = files;
  manifest["wall_time_seconds"] = std::chrono::duration<double>(std::chrono::system_clock::now() - wall_start).count();
  std::ofstream(fs::path(config.out_dir) / "manifest.json") << manifest.dump(2) << '\n';

  log << "run " << (config.preset.empty() ? "custom" : config.preset) << " -> " << config.out_dir << '\n';
  log << point_json(r).dump() << '\n';
  return 0;
}

int cmd_sweep(const ExperimentConfig& config, std::ostream& log) {
  config.validate();
  if (config.sweep.empty()) throw ConfigError("sweep needs at least one sweep.<axis> key");
  fs::create_directories(config.out_dir);
  const std::string hash = hex64(config.hash());

  // Cartesian product, first axis slowest.
  std::vector<std::vector<StorageTime>> points{{}};
  for (const auto& axis : config.sweep) {
    std::vector<std::vector<StorageTime>> next;
    for (const auto& p : points)
      for (const auto& v : axis.values) {
        auto q = p;
        q.push_back(v);
        next.push_back(std::move(q));
      }
    points = std::move(next);
  }

  std::vector<std::string> columns;
  for (const auto& axis : config.sweep) columns.push_back(axis.name);
  for (const char* c : {"t_store_tau", "n_samples", "negativity", "negativity_sampling_error",
                        "negativity_timestep_error", "negativity_total_error", "oracle_negativity_storage",
                        "oracle_negativity_channel", "variance_in", "variance_out", "channel_gain_abs",
                        "equivalent_storage_lifetimes", "equivalent_n_bar"})
    columns.emplace_back(c);

  const fs::path checkpoint = fs::path(config.out_dir) / "sweep.checkpoint";
  std::map<std::size_t, std::string> rows;
  {
    std::ifstream in(checkpoint);
    std::string line;
    if (in && std::getline(in, line) && line == "# config_hash=" + hash) {
      while (std::getline(in, line)) {
        const auto comma = line.find(',');
        if (comma == std::string::npos) continue;
        rows[parse_u64(line.substr(0, comma))] = line.substr(comma + 1);
      }
      if (!rows.empty()) log << "resuming sweep: " << rows.size() << " of " << points.size() << " points done\n";
    } else {
      std::ofstream(checkpoint) << "# config_hash=" << hash << '\n';
    }
  }

  std::ofstream ck(checkpoint, std::ios::app);
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (rows.contains(i)) continue;
    const ExperimentConfig pc = at_sweep_point(config, points[i]);
    const PointResult r = evaluate_point(pc, false);
    std::ostringstream row;
    for (const auto& v : points[i]) row << v.to_string() << ',';
    const double gm = pc.params.gamma_m;
    row << fmt(r.t_store) << ',' << r.n_samples << ',' << opt_cell(r.negativity) << ',' << opt_cell(r.negativity_se)
        << ',' << opt_cell(r.negativity_dt_error) << ',' << opt_cell(r.negativity_total_error()) << ','
        << opt_cell(r.oracle_negativity_storage) << ',' << opt_cell(r.oracle_negativity_channel) << ','
        << opt_cell(r.variance_in) << ',' << opt_cell(r.variance_out) << ',' << fmt(std::abs(r.channel.gain)) << ','
        << fmt(r.t_equivalent * gm) << ',' << fmt(r.n_equivalent);
    rows[i] = row.str();
    ck << i << ',' << rows[i] << '\n' << std::flush;
    log << "point " << (i + 1) << "/" << points.size() << " [" << fmt_short(r.seconds) << " s]: " << rows[i] << '\n';
  }

  std::ofstream csv(fs::path(config.out_dir) / "sweep.csv");
  for (const auto& c : csv_header_comments(config, "sweep")) csv << "# " << c << '\n';
  for (std::size_t i = 0; i < columns.size(); ++i) csv << (i ? "," : "") << columns[i];
  csv << '\n';
  for (const auto& [i, row] : rows) csv << row << '\n';

  ordered_json manifest;
  manifest["tool"] = "catmem";
  manifest["command"] = "sweep";
  manifest["preset"] = config.preset;
  manifest["config_hash"] = hash;
  manifest["seed"] = config.seed;
  manifest["workers"] = config.workers;
  manifest["config"] = config_json(config);
  manifest["points"] = points.size();
  manifest["columns"] = columns;
  manifest["error_model"] =
      "negativity_total_error = sqrt(sampling^2 + timestep^2); sampling error is a delete-a-block jackknife";
  manifest["files"] = {"sweep.csv"};
  std::ofstream(fs::path(config.out_dir) / "manifest.json") << manifest.dump(2) << '\n';
  log << "sweep " << points.size() << " points -> " << (fs::path(config.out_dir) / "sweep.csv").string() << '\n';
  return 0;
}

std::vector<std::string> oracle_queries() {
  return {"t_positive",        "t_p_bound",      "cat_variance", "transfer_amplitude", "derive_rates",
          "decohered_density", "evolved_wigner", "negativity",   "ideal_p_x",          "ideal_p_p"};
}

int cmd_oracle(std::string_view query, const std::vector<std::string>& args, std::ostream& out) {
  std::map<std::string, double> kv;
  for (const auto& a : args) {
    const auto eq = a.find('=');
    if (eq == std::string::npos) throw ConfigError("oracle argument '" + a + "' is not key=value");
    kv[trim(std::string_view(a).substr(0, eq))] = parse_double(std::string_view(a).substr(eq + 1));
  }
  std::set<std::string> used;
  auto get = [&](const std::string& key, double fallback) {
    used.insert(key);
    const auto it = kv.find(key);
    return it == kv.end() ? fallback : it->second;
  };
  auto system_params = [&] {
    SystemParams p;
    p.gamma_int = get("gamma_int", 0.0);
    p.gamma_ext = get("gamma_ext", 1.0 - p.gamma_int);
    p.gamma_m = get("gamma_m", p.gamma_m);
    p.g_eff = get("g_eff", p.g_eff);
    return p;
  };

  ordered_json j;
  j["query"] = std::string(query);
  if (query == "t_positive") {
    const double n = get("n_bar", 0.0), g = get("gamma", 1.0);
    j["n_bar"] = n;
    j["gamma"] = g;
    j["value"] = t_positive(n, g);
  } else if (query == "t_p_bound") {
    const double n = get("n_bar", 0.0), g = get("gamma", 1.0);
    j["n_bar"] = n;
    j["gamma"] = g;
    const double v = t_p_bound(n, g);
    if (std::isinf(v)) {
      j["value"] = "inf";
    } else {
      j["value"] = v;
    }
  } else if (query == "cat_variance") {
    const double a = get("alpha0", 2.0);
    j["alpha0"] = a;
    j["value"] = cat_variance(a);
  } else if (query == "transfer_amplitude") {
    const SystemParams p = system_params();
    j["gamma_ext"] = p.gamma_ext;
    j["gamma_int"] = p.gamma_int;
    j["gamma_m"] = p.gamma_m;
    j["g_eff"] = p.g_eff;
    j["value"] = transfer_amplitude(p);
  } else if (query == "derive_rates") {
    const SystemParams p = system_params();
    p.validate();
    const DerivedRates r = derive_rates(p);
    j["gamma_plus"] = r.gamma_plus;
    j["gamma_minus"] = r.gamma_minus;
    j["m_rate"] = {{"re", r.m_rate.real()}, {"im", r.m_rate.imag()}};
    j["gamma_bar"] = {{"re", r.gamma_bar.real()}, {"im", r.gamma_bar.imag()}};
  } else if (query == "decohered_density") {
    const double t = get("t", 0.0), a = get("alpha0", 5.0), g = get("gamma", 1.0);
    const DecoheredCat d = decohered_density(t, a, g);
    j["t"] = t;
    j["alpha0"] = a;
    j["gamma"] = g;
    j["amplitude"] = d.amplitude.real();
    j["coherence"] = d.coherence;
  } else if (query == "evolved_wigner") {
    const double re = get("re", 0.0), im = get("im", 0.0), t = get("t", 0.0), a = get("alpha0", 2.0),
                 n = get("n_bar", 0.0), g = get("gamma", 1.0);
    j["value"] = evolved_wigner(Complex(re, im), t, a, n, g);
  } else if (query == "negativity") {
    const double t = get("t", 0.0), a = get("alpha0", 2.0), n = get("n_bar", 0.0), g = get("gamma", 1.0),
                 h = get("h", 0.05);
    j["t"] = t;
    j["alpha0"] = a;
    j["n_bar"] = n;
    j["value"] = oracle_negativity(t, a, n, g, h);
  } else if (query == "ideal_p_x") {
    j["value"] = ideal_P_x(get("x", 0.0), get("alpha0", 2.0));
  } else if (query == "ideal_p_p") {
    j["value"] = ideal_P_p(get("p", 0.0), get("alpha0", 2.0));
  } else {
    std::string known;
    for (const auto& q : oracle_queries()) known += (known.empty() ? "" : ", ") + q;
    throw ConfigError("unknown oracle query '" + std::string(query) + "' (known: " + known + ")");
  }
  for (const auto& [k, v] : kv)
    if (!used.contains(k)) throw ConfigError("oracle " + std::string(query) + ": unused argument '" + k + "'");
  out << j.dump() << '\n';
  return 0;
}

}  // namespace catmem
