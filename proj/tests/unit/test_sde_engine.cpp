#include "catmem/cat_sampler.hpp"
#include "catmem/sde_engine.hpp"

#include <doctest.h>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>

using namespace catmem;

namespace {

const Complex kImag{0.0, 1.0};

SystemParams thermal(double n_bar) {
  SystemParams p;
  p.n_th_mech = n_bar;
  return p;
}

// Scalar reference: step_rk4 through every stage, trapezoid readout with u_out.
TrajectoryResult reference_run(const WeightedSample& sample, const SystemParams& p, const ProtocolSchedule& s,
                               CounterStream* rng) {
  const DriveContext ctx = make_drive_context(sample, p, s);
  PhaseSpaceState st{};
  if (rng && p.n_init_mech > 0.0) {
    const Complex z = std::sqrt(p.n_init_mech) * rng->complex_normal();
    st.beta = z;
    st.beta_plus = std::conj(z);
  }
  const auto stages = stage_grid(p, s);
  TrajectoryResult r{};
  const double root = std::sqrt(2.0 * p.gamma_ext);
  for (std::size_t k = 0; k < stages.size(); ++k) {
    const Stage& g = stages[k];
    for (long j = 0; j <= g.steps; ++j) {
      const double t = g.t0 + j * g.step;
      if (k == 2) {
        const double w = (j == 0 || j == g.steps) ? 0.5 * g.step : g.step;
        r.alpha_out += w * u_out(t, ctx.spec) * root * st.alpha;
        r.alpha_out_plus += w * std::conj(u_out(t, ctx.spec)) * root * st.alpha_plus;
      }
      if (j < g.steps) st = step_rk4(st, t, g.step, ctx, p, rng);
    }
    if (k == 0) {
      r.beta_stored = st.beta;
      r.beta_stored_plus = st.beta_plus;
    }
  }
  return r;
}

}  // namespace

TEST_SUITE("sde_engine") {
  TEST_CASE("coupling profile") {
    const SystemParams p;
    const ProtocolSchedule s = default_schedule(p, 50.0);
    CHECK(g_of_t(-s.t_write / 2, s, p.g_eff) == 0.6);
    CHECK(g_of_t(25.0, s, p.g_eff) == 0.0);
    CHECK(g_of_t(50.0 + s.t_read / 2, s, p.g_eff) == 0.6);
    CHECK_THROWS_AS((void)g_of_t(-s.t_write - 1.0, s, p.g_eff), DomainError);
    CHECK_THROWS_AS((void)g_of_t(s.t_end() + 1.0, s, p.g_eff), DomainError);
    const ProtocolSchedule empty = default_schedule(p, 0.0);
    for (double t = -empty.t_write; t <= empty.t_end(); t += 0.37) CHECK(g_of_t(t, empty, p.g_eff) == 0.6);
  }

  TEST_CASE("drift examples") {
    const SystemParams p;
    const ProtocolSchedule s = default_schedule(p, 10.0);
    const DriveContext ctx = make_drive_context({1.0, 1.0, 1.0, Branch::PlusPlus}, p, s);
    const PhaseSpaceState zero{};
    const PhaseSpaceState d0 = drift(zero, 3.0, ctx, p);
    CHECK(std::abs(d0.alpha) + std::abs(d0.beta) + std::abs(d0.alpha_plus) + std::abs(d0.beta_plus) == 0.0);

    const DriveContext quiet = make_drive_context({0.0, 0.0, 1.0, Branch::PlusPlus}, p, s);
    const PhaseSpaceState d1 = drift({1.0, 0.0, 0.0, 0.0}, -5.0, 0.0, quiet, p);
    CHECK(std::abs(d1.alpha + 1.0) < 1e-15);
    const PhaseSpaceState d2 = drift({0.0, 0.0, 1.0, 0.0}, -5.0, quiet, p);
    CHECK(std::abs(d2.alpha + 0.6 * kImag) < 1e-15);
  }

  TEST_CASE("thermal increments") {
    CounterStream rng(11, 3);
    const double dt = 0.1;
    const PhaseSpaceState cold = noise_increment(dt, SystemParams{}, rng);
    CHECK(cold.beta == Complex{});

    const SystemParams p = thermal(2.0);
    const int n = 1000000;
    Complex cross{}, same{};
    for (int k = 0; k < n; ++k) {
      const PhaseSpaceState d = noise_increment(dt, p, rng);
      CHECK(d.alpha == Complex{});
      cross += d.beta * d.beta_plus;
      same += d.beta * d.beta;
    }
    const double scale = 2.0 * p.gamma_m * dt * n;
    CHECK((cross / scale).real() == doctest::Approx(2.0).epsilon(0.005));
    // Each term of `same` has standard deviation 2 |<dphi dphi+>|/sqrt(2) per unit scale.
    CHECK(std::abs(same / scale) < 3.0 * 2.0 * std::sqrt(2.0) / std::sqrt(double(n)));
  }

  TEST_CASE("RK4 reproduces pure decay") {
    SystemParams p;
    p.g_eff = 0.0;
    p.gamma_m = 0.0;
    const ProtocolSchedule s{20.0, 0.0, 20.0, 0.1};
    const DriveContext ctx = make_drive_context({0.0, 0.0, 1.0, Branch::PlusPlus}, p, s);
    PhaseSpaceState st{1.0, 1.0, 0.0, 0.0};
    for (int k = 0; k < 100; ++k) st = step_rk4(st, -15.0 + 0.1 * k, 0.1, ctx, p, nullptr);
    CHECK(std::abs(st.alpha - std::exp(-10.0)) < 1e-8);
  }

  TEST_CASE("write stage matches the matrix exponential") {
    const SystemParams p;
    const ProtocolSchedule s = default_schedule(p, 0.0);
    const ModeFunctionSpec<double> spec(p, 0.0);
    const double gp = spec.gamma_plus();
    const Complex m = spec.m_rate();
    const double root = std::sqrt(2.0 * p.gamma_ext);
    // (alpha, beta, e^{(g+ + m)t}, e^{(g+ - m)t}) is an autonomous linear system.
    Eigen::Matrix4cd mat = Eigen::Matrix4cd::Zero();
    mat(0, 0) = -1.0;
    mat(0, 1) = -0.6 * kImag;
    mat(0, 2) = 0.5 * root * spec.prefactor();
    mat(0, 3) = -0.5 * root * spec.prefactor();
    mat(1, 0) = -0.6 * kImag;
    mat(1, 1) = -p.gamma_m;
    mat(2, 2) = gp + m;
    mat(3, 3) = gp - m;
    const DriveContext ctx = make_drive_context({1.0, 1.0, 1.0, Branch::PlusPlus}, p, s);
    const Stage w = stage_grid(p, s).front();
    PhaseSpaceState st{};
    double worst = 0.0;
    for (long k = 0; k < w.steps; ++k) {
      st = step_rk4(st, w.t0 + k * w.step, w.step, ctx, p, nullptr);
      const double t = w.t0 + (k + 1) * w.step;
      const Eigen::Vector4cd z0(0.0, 0.0, std::exp((gp + m) * w.t0), std::exp((gp - m) * w.t0));
      const Eigen::Vector4cd z = (mat * (t - w.t0)).exp() * z0;
      worst = std::max({worst, std::abs(st.alpha - z[0]), std::abs(st.beta - z[1])});
    }
    CHECK(worst <= 1e-6);
  }

  TEST_CASE("batched kernel agrees with the scalar reference") {
    SystemParams p = thermal(2.0);
    p.n_init_mech = 0.5;
    const ProtocolSchedule s = default_schedule(p, storage_time_from_lifetimes(0.01, p));
    const auto samples = sample_cat({CatParams{Complex(2.0, 0.0)}, 8, 1, true});
    const auto batch = run_ensemble(samples, p, s, 42, 2);
    for (std::size_t k = 0; k < samples.size(); ++k) {
      CounterStream rng(42, k);
      const TrajectoryResult ref = reference_run(samples[k], p, s, &rng);
      CHECK(std::abs(batch[k].alpha_out - ref.alpha_out) < 1e-10);
      CHECK(std::abs(batch[k].alpha_out_plus - ref.alpha_out_plus) < 1e-10);
      CHECK(std::abs(batch[k].beta_stored - ref.beta_stored) < 1e-10);
    }
  }

  TEST_CASE("vacuum in, vacuum out") {
    const SystemParams p;
    const ProtocolIntegrator integ(p, default_schedule(p, 100.0));
    const TrajectoryResult r = integ.run_noiseless({0.0, 0.0, 1.0, Branch::PlusPlus}, 0.0, 0.0);
    CHECK(r.alpha_out == Complex{});
    CHECK(r.alpha_out_plus == Complex{});
  }

  TEST_CASE("conjugate pairs stay conjugate") {
    const SystemParams p = thermal(2.0);
    const ProtocolSchedule s = default_schedule(p, 500.0);
    const WeightedSample in{Complex(1.2, -0.3), Complex(1.2, 0.3), 1.0, Branch::PlusPlus};
    const std::vector<WeightedSample> samples(6, in);
    for (const auto& r : run_ensemble(samples, p, s, 5, 1)) {
      CHECK(std::abs(r.alpha_out_plus - std::conj(r.alpha_out)) < 1e-13);
    }
  }

  TEST_CASE("noiseless response is linear in the input") {
    const SystemParams p;
    const ProtocolIntegrator integ(p, default_schedule(p, 300.0));
    const TrajectoryResult one = integ.run_noiseless({1.0, 1.0, 1.0, Branch::PlusPlus}, 0.0, 0.0);
    const Complex a(0.7, -1.9), b(2.5, 0.4);
    const TrajectoryResult r = integ.run_noiseless({a, b, 1.0, Branch::PlusMinus}, 0.0, 0.0);
    CHECK(std::abs(r.alpha_out - a * one.alpha_out) < 1e-13);
    CHECK(std::abs(r.alpha_out_plus - b * one.alpha_out_plus) < 1e-13);
  }

  TEST_CASE("coherent transfer") {
    const SystemParams p;
    const Complex g0 = coherent_gain(p, default_schedule(p, 0.0));
    CHECK(std::abs(g0) >= 0.99);
    for (double lifetimes : {0.02, 0.1, 0.3466}) {
      const double ts = storage_time_from_lifetimes(lifetimes, p);
      const Complex g = coherent_gain(p, default_schedule(p, ts));
      CHECK(std::abs(g) / std::abs(g0) == doctest::Approx(std::exp(-lifetimes)).epsilon(0.005));
    }
    SystemParams lossy;
    lossy.gamma_ext = 0.95;
    lossy.gamma_int = 0.05;
    CHECK(std::abs(coherent_gain(lossy, default_schedule(lossy, 0.0))) ==
          doctest::Approx(0.9745 * 0.9745).epsilon(0.002 / (0.9745 * 0.9745)));
  }

  TEST_CASE("phase correction maps the gain to the positive real axis") {
    const SystemParams p;
    const Complex gain = coherent_gain(p, default_schedule(p, 0.0));
    std::vector<TrajectoryResult> r{{gain, std::conj(gain), 1.0, Branch::PlusPlus, {}, {}}};
    apply_phase_correction(r, gain);
    CHECK(std::abs(r[0].alpha_out - std::abs(gain)) < 1e-15);
    CHECK(std::abs(r[0].alpha_out_plus - std::abs(gain)) < 1e-15);
  }

  TEST_CASE("moment channel matches the simulated gain") {
    SystemParams p = thermal(2.0);
    const ProtocolSchedule s = default_schedule(p, storage_time_from_lifetimes(0.05, p));
    const OutputChannel ch = output_channel(p, s);
    // Both are RK4 at the same dt; they differ by time-discretization error only.
    CHECK(std::abs(ch.gain - coherent_gain(p, s)) < 1e-5);
    const auto [t_eq, n_eq] = ch.equivalent_decoherence(p.gamma_m);
    CHECK(t_eq * p.gamma_m == doctest::Approx(0.05).epsilon(0.05));
    CHECK(n_eq == doctest::Approx(2.0).epsilon(0.01));

    const OutputChannel cold = output_channel(SystemParams{}, s);
    CHECK(cold.added_noise == doctest::Approx(0.0));
  }

  TEST_CASE("ensemble runs are deterministic and worker independent") {
    const SystemParams p = thermal(2.0);
    const ProtocolSchedule s = default_schedule(p, 200.0);
    const auto samples = sample_cat({CatParams{Complex(2.0, 0.0)}, 1200, 1, true});
    const auto a = run_ensemble(samples, p, s, 9, 1);
    const auto b = run_ensemble(samples, p, s, 9, 3);
    const auto c = run_ensemble(samples, p, s, 10, 1);
    bool same = true, differs = false;
    for (std::size_t k = 0; k < a.size(); ++k) {
      same = same && a[k].alpha_out == b[k].alpha_out && a[k].alpha_out_plus == b[k].alpha_out_plus;
      differs = differs || a[k].alpha_out != c[k].alpha_out;
    }
    CHECK(same);
    CHECK(differs);
  }

  TEST_CASE("stage grid tiles the protocol") {
    const SystemParams p;
    const ProtocolSchedule s = default_schedule(p, 123.456);
    const auto stages = stage_grid(p, s);
    REQUIRE(stages.size() == 3);
    CHECK(stages[0].t0 + stages[0].steps * stages[0].step == doctest::Approx(0.0));
    CHECK(stages[1].steps * stages[1].step == doctest::Approx(123.456));
    CHECK(stages[2].t0 + stages[2].steps * stages[2].step == doctest::Approx(s.t_end()));
    for (const auto& st : stages) CHECK(st.step <= s.dt + 1e-15);
    CHECK(stage_grid(p, default_schedule(p, 0.0))[1].steps == 0);
  }
}
