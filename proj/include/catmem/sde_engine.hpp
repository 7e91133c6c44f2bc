// Positive-P Langevin integration of the write / store / read protocol.
//
// The linearized optomechanical equations are integrated with classical RK4
// on a grid aligned to the stage boundaries (each stage gets the largest
// step <= dt that tiles it exactly). The only stochastic channel is the
// mechanical thermal bath, injected once per step at the midpoint.

#ifndef CATMEM_SDE_ENGINE_HPP
#define CATMEM_SDE_ENGINE_HPP

#include "catmem/core_model.hpp"
#include "catmem/mode_functions.hpp"
#include "catmem/rng.hpp"

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace catmem {

struct DriveContext {
  Complex alpha_in;
  Complex alpha_in_plus;
  ModeFunctionSpec<double> spec;
  ProtocolSchedule schedule;
};

[[nodiscard]] DriveContext make_drive_context(const WeightedSample& sample, const SystemParams& params,
                                              const ProtocolSchedule& schedule);

/// Coupling profile: g_eff on the closed write and read windows, 0 while storing.
[[nodiscard]] double g_of_t(double t, const ProtocolSchedule& schedule, double g_eff);

/// Deterministic right-hand side with the coupling evaluated at t.
[[nodiscard]] PhaseSpaceState drift(const PhaseSpaceState& state, double t, const DriveContext& ctx,
                                    const SystemParams& params);
/// Same, with the coupling supplied explicitly (used inside a step so g stays piecewise constant).
[[nodiscard]] PhaseSpaceState drift(const PhaseSpaceState& state, double t, double g, const DriveContext& ctx,
                                    const SystemParams& params);

/// Mechanical thermal increment sqrt(2 gamma_m) dphi_m with <dphi dphi+> = n_th dt.
[[nodiscard]] PhaseSpaceState noise_increment(double dt, const SystemParams& params, CounterStream& rng);

/// One RK4 step of the drift plus a single midpoint noise increment. The
/// coupling is held at its value at t + dt/2. Pass rng == nullptr for a
/// noiseless step.
[[nodiscard]] PhaseSpaceState step_rk4(const PhaseSpaceState& state, double t, double dt, const DriveContext& ctx,
                                       const SystemParams& params, CounterStream* rng);

/// Uniform sub-grid of one protocol stage.
struct Stage {
  double t0 = 0.0;
  double step = 0.0;
  long steps = 0;
  double g = 0.0;
};

/// Write, store, read stages (store may have zero steps).
[[nodiscard]] std::vector<Stage> stage_grid(const SystemParams& params, const ProtocolSchedule& schedule);

/// Integrates batches of independent trajectories through the protocol.
///
/// Trajectory k of a run uses CounterStream(master_seed, k) for its initial
/// mechanical amplitude and all noise increments, so results do not depend
/// on batching or worker count.
class ProtocolIntegrator {
 public:
  ProtocolIntegrator(const SystemParams& params, const ProtocolSchedule& schedule);

  void run_batch(std::span<const WeightedSample> samples, std::uint64_t first_index, std::uint64_t master_seed,
                 std::span<TrajectoryResult> out) const;

  /// Deterministic run with explicit initial mechanical amplitudes and no noise.
  [[nodiscard]] TrajectoryResult run_noiseless(const WeightedSample& sample, Complex beta0, Complex beta0_plus) const;

  [[nodiscard]] const std::vector<Stage>& stages() const { return stages_; }
  [[nodiscard]] const SystemParams& params() const { return params_; }
  [[nodiscard]] const ProtocolSchedule& schedule() const { return schedule_; }

 private:
  SystemParams params_;
  ProtocolSchedule schedule_;
  ModeFunctionSpec<double> spec_;
  std::vector<Stage> stages_;
};

/// Single trajectory. beta_init is the initial mechanical pair.
[[nodiscard]] TrajectoryResult run_protocol(const WeightedSample& sample, std::pair<Complex, Complex> beta_init,
                                            const SystemParams& params, const ProtocolSchedule& schedule,
                                            CounterStream& rng);

/// All samples, in index order, distributed over `workers` threads.
[[nodiscard]] std::vector<TrajectoryResult> run_ensemble(std::span<const WeightedSample> samples,
                                                         const SystemParams& params,
                                                         const ProtocolSchedule& schedule,
                                                         std::uint64_t master_seed, unsigned workers = 1);

/// alpha_out for a unit coherent input with noise and thermal initial state switched off.
[[nodiscard]] Complex coherent_gain(const SystemParams& params, const ProtocolSchedule& schedule);

/// Rotate output pairs by a common phase so that `gain` maps to a positive real number.
void apply_phase_correction(std::span<TrajectoryResult> results, Complex gain);

/// Retrieved-mode channel computed from the deterministic first and second
/// moment equations (no sampling): alpha_out = gain * alpha_in + xi with
/// normally ordered added noise <xi+ xi> = added_noise.
struct OutputChannel {
  Complex gain;
  double added_noise = 0.0;

  /// Storage time (in 1/gamma units) and occupation of the damped thermal
  /// channel exp(-gamma t), nbar (1 - exp(-2 gamma t)) with the same transmission and noise.
  [[nodiscard]] std::pair<double, double> equivalent_decoherence(double gamma) const;
};

[[nodiscard]] OutputChannel output_channel(const SystemParams& params, const ProtocolSchedule& schedule);

}  // namespace catmem

#endif  // CATMEM_SDE_ENGINE_HPP
