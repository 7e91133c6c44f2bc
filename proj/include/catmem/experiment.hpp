// Batch front-end: experiment configuration, presets, and the run / sweep /
// oracle commands that turn ensembles into CSV and JSON artifacts.

#ifndef CATMEM_EXPERIMENT_HPP
#define CATMEM_EXPERIMENT_HPP

#include "catmem/core_model.hpp"
#include "catmem/grid_field.hpp"
#include "catmem/sde_engine.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace catmem {

/// Config error that knows where it came from ("file:line: key: message").
class ConfigError : public InvalidParameter {
 public:
  using InvalidParameter::InvalidParameter;
};

/// Non-finite values in computed results.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A storage time as written by the user: raw tau, or a multiple of 1/gamma_m.
struct StorageTime {
  double value = 0.0;
  bool in_lifetimes = false;

  [[nodiscard]] double resolve(const SystemParams& params) const;
  [[nodiscard]] std::string to_string() const;
};

/// Accepts "12.5", "0.02/Gamma_m", "0.02/gamma_m" and "0.02/Γ_m".
[[nodiscard]] StorageTime parse_storage_time(std::string_view text);

enum class Signature { PDistribution, XDistribution, Wigner, Negativity, Density, Variance };

[[nodiscard]] std::string to_string(Signature s);
[[nodiscard]] Signature parse_signature(std::string_view name);

struct GridOverrides {
  double quad_step = 0.01;
  double quad_extent = 0.0;  ///< 0: max(12, sqrt(2)|a0| + 5)
  double wigner_h = 0.05;
  double wigner_extent = 0.0;  ///< 0: |a0| + 4
  double density_step = 0.1;
  double density_extent = 0.0;  ///< 0: |a0| + 2
};

/// One sweep axis: t_store, n_bar, alpha0 or gamma_int.
struct SweepAxis {
  std::string name;
  std::vector<StorageTime> values;  ///< in_lifetimes only meaningful for t_store
};

struct ExperimentConfig {
  std::string preset;
  SystemParams params;
  double alpha0 = 2.0;
  StorageTime t_store{0.0, false};
  double t_write = 0.0;  ///< 0: 10 / Re(gamma_bar)
  double dt = 0.1;
  std::size_t n_samples = 4;
  /// Sample count used instead when the run has no thermal noise at all (0: same as n_samples).
  std::size_t n_samples_zero_temperature = 0;
  bool stratified = true;
  std::uint64_t seed = 1;
  unsigned workers = 1;
  std::vector<Signature> signatures{Signature::Negativity, Signature::Variance};
  GridOverrides grids;
  std::size_t jackknife_blocks = 250;
  /// Re-run at dt/2 and report the negativity change as the time-step error.
  bool timestep_error = true;
  bool phase_correction = true;
  std::string out_dir = "catmem_out";
  std::vector<SweepAxis> sweep;

  void validate() const;
  [[nodiscard]] ProtocolSchedule schedule() const;
  [[nodiscard]] std::size_t effective_samples() const;
  [[nodiscard]] bool wants(Signature s) const;

  /// Resolved configuration as key = value lines; parsing it back gives the same config.
  [[nodiscard]] std::string canonical() const;
  /// FNV-1a of canonical(); excludes out_dir and workers, which do not change results.
  [[nodiscard]] std::uint64_t hash() const;
};

/// Apply key = value lines on top of `config`. `source` prefixes diagnostics.
void apply_config_text(ExperimentConfig& config, std::string_view text, std::string_view source);
void apply_config_file(ExperimentConfig& config, const std::string& path);

[[nodiscard]] std::vector<std::string> preset_names();
[[nodiscard]] ExperimentConfig preset_config(std::string_view name);

/// Everything computed at one parameter point.
struct PointResult {
  std::size_t n_samples = 0;
  double t_store = 0.0;
  Complex coherent_gain;
  OutputChannel channel;
  double t_equivalent = 0.0;
  double n_equivalent = 0.0;
  std::optional<double> negativity;
  std::optional<double> negativity_se;
  std::optional<double> negativity_dt_error;
  std::optional<double> oracle_negativity_storage;
  std::optional<double> oracle_negativity_channel;
  std::optional<double> wigner_integral;
  std::optional<double> wigner_imag_residual;
  std::optional<double> variance_in;
  std::optional<double> variance_out;
  std::optional<double> variance_imag_residual;
  std::map<std::string, GridField> fields;
  double seconds = 0.0;

  /// Quadrature sum of sampling and time-step errors.
  [[nodiscard]] std::optional<double> negativity_total_error() const;
};

[[nodiscard]] PointResult evaluate_point(const ExperimentConfig& config, bool keep_fields);

/// Config with the sweep coordinates of one grid point applied.
[[nodiscard]] ExperimentConfig at_sweep_point(const ExperimentConfig& base, const std::vector<StorageTime>& coords);

int cmd_run(const ExperimentConfig& config, std::ostream& log);
int cmd_sweep(const ExperimentConfig& config, std::ostream& log);
/// `args` are key=value pairs (e.g. "n_bar=2").
int cmd_oracle(std::string_view query, const std::vector<std::string>& args, std::ostream& out);
[[nodiscard]] std::vector<std::string> oracle_queries();

/// 64-bit FNV-1a.
[[nodiscard]] std::uint64_t fnv1a(std::string_view data);
[[nodiscard]] std::string hex64(std::uint64_t v);

}  // namespace catmem

#endif  // CATMEM_EXPERIMENT_HPP
