#include "catmem/sde_engine.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>
#include <thread>

namespace catmem {

namespace {

/// Structure-of-arrays batch of phase-space states.
struct Lanes {
  Eigen::ArrayXcd a, ap, b, bp;

  explicit Lanes(Eigen::Index n)
      : a(Eigen::ArrayXcd::Zero(n)), ap(Eigen::ArrayXcd::Zero(n)), b(Eigen::ArrayXcd::Zero(n)), bp(Eigen::ArrayXcd::Zero(n)) {}
};

long steps_for(double duration, double dt) {
  if (duration <= 0.0) return 0;
  return std::max(1L, static_cast<long>(std::ceil(duration / dt - 1e-9)));
}

}  // namespace

DriveContext make_drive_context(const WeightedSample& sample, const SystemParams& params,
                                const ProtocolSchedule& schedule) {
  return DriveContext{sample.alpha_in, sample.alpha_in_plus, ModeFunctionSpec<double>(params, schedule.t_store),
                      schedule};
}

double g_of_t(double t, const ProtocolSchedule& schedule, double g_eff) {
  const double slack = 1e-9 * std::max(1.0, schedule.t_end() - schedule.t_begin());
  if (t < schedule.t_begin() - slack || t > schedule.t_end() + slack) {
    std::ostringstream os;
    os << "t = " << t << " outside the protocol span [" << schedule.t_begin() << ", " << schedule.t_end() << "]";
    throw DomainError(os.str());
  }
  if (t <= 0.0 || t >= schedule.t_store) return g_eff;
  return 0.0;
}

PhaseSpaceState drift(const PhaseSpaceState& s, double t, double g, const DriveContext& ctx,
                      const SystemParams& params) {
  const Complex u = u_in(t, ctx.spec);
  const double sqrt_ext = std::sqrt(2.0 * params.gamma_ext);
  const double go = params.gamma_o();
  const double gm = params.gamma_m;
  return {
      -go * s.alpha - kI * g * s.beta + sqrt_ext * ctx.alpha_in * u,
      -go * s.alpha_plus + kI * g * s.beta_plus + sqrt_ext * ctx.alpha_in_plus * std::conj(u),
      -gm * s.beta - kI * g * s.alpha,
      -gm * s.beta_plus + kI * g * s.alpha_plus,
  };
}

PhaseSpaceState drift(const PhaseSpaceState& s, double t, const DriveContext& ctx, const SystemParams& params) {
  return drift(s, t, g_of_t(t, ctx.schedule, params.g_eff), ctx, params);
}

PhaseSpaceState noise_increment(double dt, const SystemParams& params, CounterStream& rng) {
  if (params.n_th_mech == 0.0 || params.gamma_m == 0.0) return {};
  const Complex eta = rng.complex_normal();
  const double amp = std::sqrt(2.0 * params.gamma_m) * std::sqrt(params.n_th_mech * dt);
  return {{}, {}, amp * eta, amp * std::conj(eta)};
}

PhaseSpaceState step_rk4(const PhaseSpaceState& s, double t, double dt, const DriveContext& ctx,
                         const SystemParams& params, CounterStream* rng) {
  const double g = g_of_t(t + 0.5 * dt, ctx.schedule, params.g_eff);
  const PhaseSpaceState k1 = drift(s, t, g, ctx, params);
  const PhaseSpaceState k2 = drift(s + (0.5 * dt) * k1, t + 0.5 * dt, g, ctx, params);
  const PhaseSpaceState k3 = drift(s + (0.5 * dt) * k2, t + 0.5 * dt, g, ctx, params);
  const PhaseSpaceState k4 = drift(s + dt * k3, t + dt, g, ctx, params);
  PhaseSpaceState next = s + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  if (rng != nullptr) {
    const PhaseSpaceState n = noise_increment(dt, params, *rng);
    // Injected at t + dt/2, carried over the remaining half step to first order.
    next.alpha += 0.5 * dt * (-kI * g * n.beta);
    next.alpha_plus += 0.5 * dt * (kI * g * n.beta_plus);
    next.beta += (1.0 - 0.5 * dt * params.gamma_m) * n.beta;
    next.beta_plus += (1.0 - 0.5 * dt * params.gamma_m) * n.beta_plus;
  }
  return next;
}

std::vector<Stage> stage_grid(const SystemParams& params, const ProtocolSchedule& schedule) {
  schedule.validate(params);
  std::vector<Stage> stages;
  const long nw = steps_for(schedule.t_write, schedule.dt);
  stages.push_back({-schedule.t_write, schedule.t_write / static_cast<double>(nw), nw, params.g_eff});
  const long ns = steps_for(schedule.t_store, schedule.dt);
  stages.push_back({0.0, ns > 0 ? schedule.t_store / static_cast<double>(ns) : 0.0, ns, 0.0});
  const long nr = steps_for(schedule.t_read, schedule.dt);
  stages.push_back({schedule.t_store, schedule.t_read / static_cast<double>(nr), nr, params.g_eff});
  return stages;
}

ProtocolIntegrator::ProtocolIntegrator(const SystemParams& params, const ProtocolSchedule& schedule)
    : params_(params), schedule_(schedule), spec_(params, schedule.t_store), stages_(stage_grid(params, schedule)) {}

namespace {

struct BatchInputs {
  Eigen::ArrayXcd alpha_in, alpha_in_plus;
  Eigen::ArrayXcd beta0, beta0_plus;
};

Eigen::Matrix2cd rk4_propagator(const Eigen::Matrix2cd& hm) {
  const Eigen::Matrix2cd id = Eigen::Matrix2cd::Identity();
  return id + hm * (id + hm / 2.0 * (id + hm / 3.0 * (id + hm / 4.0)));
}

/// Shared batch kernel. `streams` is either empty (noiseless) or one per lane.
void integrate_lanes(const SystemParams& params, const ModeFunctionSpec<double>& spec,
                     const std::vector<Stage>& stages, const BatchInputs& in, std::span<CounterStream> streams,
                     Eigen::ArrayXcd& out, Eigen::ArrayXcd& out_plus, Eigen::ArrayXcd& stored,
                     Eigen::ArrayXcd& stored_plus) {
  const Eigen::Index n = in.alpha_in.size();
  const double go = params.gamma_o();
  const double gm = params.gamma_m;
  const double sqrt_ext = std::sqrt(2.0 * params.gamma_ext);
  const bool noisy = !streams.empty() && params.n_th_mech > 0.0 && gm > 0.0;

  Lanes s(n), k1(n), k2(n), k3(n), k4(n), tmp(n);
  s.b = in.beta0;
  s.bp = in.beta0_plus;
  out = Eigen::ArrayXcd::Zero(n);
  out_plus = Eigen::ArrayXcd::Zero(n);

  auto eval = [&](const Lanes& x, double t, double g, Lanes& k) {
    const Complex d = sqrt_ext * u_in(t, spec);
    const Complex ig{0.0, g};
    k.a = -go * x.a - ig * x.b + d * in.alpha_in;
    k.ap = -go * x.ap + ig * x.bp + std::conj(d) * in.alpha_in_plus;
    k.b = -gm * x.b - ig * x.a;
    k.bp = -gm * x.bp + ig * x.ap;
  };
  auto axpy = [&](const Lanes& x, double h, const Lanes& k, Lanes& y) {
    y.a = x.a + h * k.a;
    y.ap = x.ap + h * k.ap;
    y.b = x.b + h * k.b;
    y.bp = x.bp + h * k.bp;
  };
  auto accumulate = [&](double t, double w) {
    const Complex uo = u_out(t, spec);
    const Complex ui = u_in(t, spec);
    if (uo == Complex{}) return;
    out += (w * uo) * (sqrt_ext * s.a - ui * in.alpha_in);
    out_plus += (w * std::conj(uo)) * (sqrt_ext * s.ap - std::conj(ui) * in.alpha_in_plus);
  };

  Eigen::ArrayXcd noise(n);
  for (std::size_t si = 0; si < stages.size(); ++si) {
    const Stage& st = stages[si];
    const bool read = si + 1 == stages.size();
    const double h = st.step;
    const Complex ig{0.0, st.g};
    const double amp = noisy ? std::sqrt(2.0 * gm) * std::sqrt(params.n_th_mech * h) : 0.0;
    // For t >= 0 the drive vanishes and one RK4 step of the autonomous linear
    // system is exactly multiplication by the degree-4 Taylor polynomial of exp(hM).
    const bool autonomous = st.t0 >= 0.0;
    Eigen::Matrix2cd prop, prop_plus;
    if (autonomous) {
      Eigen::Matrix2cd m;
      m << -go, -ig, -ig, -gm;
      prop = rk4_propagator(h * m);
      m << -go, ig, ig, -gm;
      prop_plus = rk4_propagator(h * m);
    }
    for (long j = 0; j < st.steps; ++j) {
      const double t = st.t0 + static_cast<double>(j) * h;
      if (read) accumulate(t, j == 0 ? 0.5 * h : h);
      if (autonomous) {
        tmp.a = prop(0, 0) * s.a + prop(0, 1) * s.b;
        s.b = prop(1, 0) * s.a + prop(1, 1) * s.b;
        s.a = tmp.a;
        tmp.ap = prop_plus(0, 0) * s.ap + prop_plus(0, 1) * s.bp;
        s.bp = prop_plus(1, 0) * s.ap + prop_plus(1, 1) * s.bp;
        s.ap = tmp.ap;
      } else {
        eval(s, t, st.g, k1);
        axpy(s, 0.5 * h, k1, tmp);
        eval(tmp, t + 0.5 * h, st.g, k2);
        axpy(s, 0.5 * h, k2, tmp);
        eval(tmp, t + 0.5 * h, st.g, k3);
        axpy(s, h, k3, tmp);
        eval(tmp, t + h, st.g, k4);
        const double h6 = h / 6.0;
        s.a += h6 * (k1.a + 2.0 * k2.a + 2.0 * k3.a + k4.a);
        s.ap += h6 * (k1.ap + 2.0 * k2.ap + 2.0 * k3.ap + k4.ap);
        s.b += h6 * (k1.b + 2.0 * k2.b + 2.0 * k3.b + k4.b);
        s.bp += h6 * (k1.bp + 2.0 * k2.bp + 2.0 * k3.bp + k4.bp);
      }
      if (noisy) {
        for (Eigen::Index k = 0; k < n; ++k) noise[k] = amp * streams[static_cast<std::size_t>(k)].complex_normal();
        const double keep = 1.0 - 0.5 * h * gm;
        s.a += (-0.5 * h) * ig * noise;
        s.ap += (0.5 * h) * ig * noise.conjugate();
        s.b += keep * noise;
        s.bp += keep * noise.conjugate();
      }
    }
    if (si == 0) {
      stored = s.b;
      stored_plus = s.bp;
    }
    if (read) accumulate(st.t0 + static_cast<double>(st.steps) * h, 0.5 * h);
  }
}

}  // namespace

void ProtocolIntegrator::run_batch(std::span<const WeightedSample> samples, std::uint64_t first_index,
                                   std::uint64_t master_seed, std::span<TrajectoryResult> out) const {
  if (out.size() != samples.size()) throw InvalidParameter("run_batch: output span size mismatch");
  const auto n = static_cast<Eigen::Index>(samples.size());
  BatchInputs in{Eigen::ArrayXcd(n), Eigen::ArrayXcd(n), Eigen::ArrayXcd::Zero(n), Eigen::ArrayXcd::Zero(n)};
  std::vector<CounterStream> streams;
  streams.reserve(samples.size());
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto& smp = samples[static_cast<std::size_t>(k)];
    in.alpha_in[k] = smp.alpha_in;
    in.alpha_in_plus[k] = smp.alpha_in_plus;
    streams.emplace_back(master_seed, first_index + static_cast<std::uint64_t>(k));
    if (params_.n_init_mech > 0.0) {
      const Complex z = std::sqrt(params_.n_init_mech) * streams.back().complex_normal();
      in.beta0[k] = z;
      in.beta0_plus[k] = std::conj(z);
    }
  }
  Eigen::ArrayXcd a_out, a_out_plus, stored, stored_plus;
  integrate_lanes(params_, spec_, stages_, in, streams, a_out, a_out_plus, stored, stored_plus);
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto& smp = samples[static_cast<std::size_t>(k)];
    out[static_cast<std::size_t>(k)] = {a_out[k], a_out_plus[k], smp.weight, smp.branch, stored[k], stored_plus[k]};
  }
}

TrajectoryResult ProtocolIntegrator::run_noiseless(const WeightedSample& sample, Complex beta0,
                                                   Complex beta0_plus) const {
  BatchInputs in{Eigen::ArrayXcd::Constant(1, sample.alpha_in), Eigen::ArrayXcd::Constant(1, sample.alpha_in_plus),
                 Eigen::ArrayXcd::Constant(1, beta0), Eigen::ArrayXcd::Constant(1, beta0_plus)};
  Eigen::ArrayXcd a_out, a_out_plus, stored, stored_plus;
  integrate_lanes(params_, spec_, stages_, in, {}, a_out, a_out_plus, stored, stored_plus);
  return {a_out[0], a_out_plus[0], sample.weight, sample.branch, stored[0], stored_plus[0]};
}

TrajectoryResult run_protocol(const WeightedSample& sample, std::pair<Complex, Complex> beta_init,
                              const SystemParams& params, const ProtocolSchedule& schedule, CounterStream& rng) {
  const ProtocolIntegrator integrator(params, schedule);
  BatchInputs in{Eigen::ArrayXcd::Constant(1, sample.alpha_in), Eigen::ArrayXcd::Constant(1, sample.alpha_in_plus),
                 Eigen::ArrayXcd::Constant(1, beta_init.first), Eigen::ArrayXcd::Constant(1, beta_init.second)};
  Eigen::ArrayXcd a_out, a_out_plus, stored, stored_plus;
  integrate_lanes(params, ModeFunctionSpec<double>(params, schedule.t_store), integrator.stages(), in,
                  std::span<CounterStream>(&rng, 1), a_out, a_out_plus, stored, stored_plus);
  return {a_out[0], a_out_plus[0], sample.weight, sample.branch, stored[0], stored_plus[0]};
}

std::vector<TrajectoryResult> run_ensemble(std::span<const WeightedSample> samples, const SystemParams& params,
                                           const ProtocolSchedule& schedule, std::uint64_t master_seed,
                                           unsigned workers) {
  const ProtocolIntegrator integrator(params, schedule);
  std::vector<TrajectoryResult> results(samples.size());
  constexpr std::size_t kChunk = 256;
  const std::size_t chunks = (samples.size() + kChunk - 1) / kChunk;
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t c = next++; c < chunks; c = next++) {
      const std::size_t lo = c * kChunk;
      const std::size_t len = std::min(kChunk, samples.size() - lo);
      integrator.run_batch(samples.subspan(lo, len), lo, master_seed, std::span(results).subspan(lo, len));
    }
  };
  workers = std::max(1U, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(chunks, 1))));
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  return results;
}

Complex coherent_gain(const SystemParams& params, const ProtocolSchedule& schedule) {
  SystemParams quiet = params;
  quiet.n_th_mech = 0.0;
  quiet.n_init_mech = 0.0;
  const ProtocolIntegrator integrator(quiet, schedule);
  return integrator.run_noiseless(WeightedSample{1.0, 1.0, 1.0, Branch::PlusPlus}, 0.0, 0.0).alpha_out;
}

void apply_phase_correction(std::span<TrajectoryResult> results, Complex gain) {
  if (std::abs(gain) == 0.0) return;
  const Complex phase = gain / std::abs(gain);
  for (auto& r : results) {
    r.alpha_out *= std::conj(phase);
    r.alpha_out_plus *= phase;
  }
}

std::pair<double, double> OutputChannel::equivalent_decoherence(double gamma) const {
  const double t = std::abs(gain);
  if (!(gamma > 0.0)) throw InvalidParameter("equivalent decoherence needs gamma > 0");
  if (!(t > 0.0)) throw DomainError("channel with zero transmission has no equivalent storage time");
  const double time = -std::log(t) / gamma;
  const double loss = 1.0 - t * t;
  const double nbar = loss > 0.0 ? added_noise / loss : 0.0;
  return {time, nbar};
}

OutputChannel output_channel(const SystemParams& params, const ProtocolSchedule& schedule) {
  // State (alpha, beta, A) with dA/dt = sqrt(2 gamma_ext) u_out(t) alpha. The
  // mean is driven by a unit coherent input; the covariance C = <dz dz^+>
  // obeys C' = M C + C M^+ + Q with thermal diffusion in the beta slot.
  const ModeFunctionSpec<double> spec(params, schedule.t_store);
  const auto stages = stage_grid(params, schedule);
  const double sqrt_ext = std::sqrt(2.0 * params.gamma_ext);
  Eigen::Matrix3cd q = Eigen::Matrix3cd::Zero();
  q(1, 1) = 2.0 * params.gamma_m * params.n_th_mech;

  auto system = [&](double t, double g) {
    Eigen::Matrix3cd m = Eigen::Matrix3cd::Zero();
    m(0, 0) = -params.gamma_o();
    m(0, 1) = Complex(0.0, -g);
    m(1, 0) = Complex(0.0, -g);
    m(1, 1) = -params.gamma_m;
    m(2, 0) = sqrt_ext * u_out(t, spec);
    return m;
  };
  auto drive = [&](double t) { return Eigen::Vector3cd(sqrt_ext * u_in(t, spec), 0.0, 0.0); };

  Eigen::Vector3cd z = Eigen::Vector3cd::Zero();
  Eigen::Matrix3cd c = Eigen::Matrix3cd::Zero();
  c(1, 1) = params.n_init_mech;
  for (const Stage& st : stages) {
    const double h = st.step;
    for (long j = 0; j < st.steps; ++j) {
      const double t = st.t0 + static_cast<double>(j) * h;
      const Eigen::Matrix3cd m0 = system(t, st.g);
      const Eigen::Matrix3cd mh = system(t + 0.5 * h, st.g);
      const Eigen::Matrix3cd m1 = system(t + h, st.g);
      const Eigen::Vector3cd d0 = drive(t), dh = drive(t + 0.5 * h), d1 = drive(t + h);

      const Eigen::Vector3cd z1 = m0 * z + d0;
      const Eigen::Vector3cd z2 = mh * (z + 0.5 * h * z1) + dh;
      const Eigen::Vector3cd z3 = mh * (z + 0.5 * h * z2) + dh;
      const Eigen::Vector3cd z4 = m1 * (z + h * z3) + d1;
      z += (h / 6.0) * (z1 + 2.0 * z2 + 2.0 * z3 + z4);

      auto lyap = [&](const Eigen::Matrix3cd& m, const Eigen::Matrix3cd& x) -> Eigen::Matrix3cd {
        return m * x + x * m.adjoint() + q;
      };
      const Eigen::Matrix3cd c1 = lyap(m0, c);
      const Eigen::Matrix3cd c2 = lyap(mh, c + 0.5 * h * c1);
      const Eigen::Matrix3cd c3 = lyap(mh, c + 0.5 * h * c2);
      const Eigen::Matrix3cd c4 = lyap(m1, c + h * c3);
      c += (h / 6.0) * (c1 + 2.0 * c2 + 2.0 * c3 + c4);
    }
  }
  return OutputChannel{z[2], c(2, 2).real()};
}

}  // namespace catmem
