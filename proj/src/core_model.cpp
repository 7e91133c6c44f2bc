#include "catmem/core_model.hpp"

#include <cmath>
#include <sstream>

namespace catmem {

void SystemParams::validate() const {
  auto fail = [](const std::string& what) { throw InvalidParameter("SystemParams: " + what); };
  if (!(gamma_ext >= 0.0)) fail("gamma_ext must be >= 0");
  if (!(gamma_int >= 0.0)) fail("gamma_int must be >= 0");
  if (!(gamma_m >= 0.0)) fail("gamma_m must be >= 0");
  if (!(g_eff >= 0.0)) fail("g_eff must be >= 0");
  if (!(gamma_o() > 0.0)) fail("gamma_o = gamma_ext + gamma_int must be > 0");
  if (!(gamma_m < gamma_o())) fail("gamma_m must be smaller than gamma_o");
  if (!(n_th_mech >= 0.0)) fail("n_th_mech must be >= 0");
  if (!(n_init_mech >= 0.0)) fail("n_init_mech must be >= 0");
}

double nondimensional_rate(double rate, double gamma_o_physical) {
  if (!(gamma_o_physical > 0.0)) throw InvalidParameter("optical decay rate must be > 0");
  return rate / gamma_o_physical;
}

DerivedRates derive_rates(const SystemParams& params) {
  DerivedRates r;
  r.gamma_plus = 0.5 * (params.gamma_o() + params.gamma_m);
  r.gamma_minus = 0.5 * (params.gamma_o() - params.gamma_m);
  // Imaginary part explicitly +0 so a negative radicand lands on +i.
  const Complex radicand{r.gamma_minus * r.gamma_minus - params.g_eff * params.g_eff, 0.0};
  r.m_rate = std::sqrt(radicand);
  r.gamma_bar = r.gamma_plus - r.m_rate;
  return r;
}

double CatParams::norm() const { return 2.0 * (1.0 + overlap()); }

double CatParams::overlap() const { return std::exp(-2.0 * std::norm(alpha0)); }

void ProtocolSchedule::validate(const SystemParams& params) const {
  auto fail = [](const std::string& what) { throw InvalidParameter("ProtocolSchedule: " + what); };
  if (!(t_write > 0.0)) fail("t_write must be > 0");
  if (!(t_store >= 0.0)) fail("t_store must be >= 0");
  if (!(t_read > 0.0)) fail("t_read must be > 0");
  if (t_read != t_write) fail("t_read must equal t_write");
  if (!(dt > 0.0)) fail("dt must be > 0");
  if (dt > 0.5 / params.gamma_o()) {
    std::ostringstream os;
    os << "dt = " << dt << " exceeds the sampling limit 1/(2 gamma_o) = " << 0.5 / params.gamma_o();
    fail(os.str());
  }
}

ProtocolSchedule default_schedule(const SystemParams& params, double t_store) {
  params.validate();
  const DerivedRates rates = derive_rates(params);
  const double envelope = rates.gamma_bar.real();
  if (!(envelope > 0.0)) throw InvalidParameter("Re(gamma_bar) must be > 0 to size the write window");
  ProtocolSchedule s;
  s.t_write = 10.0 / envelope;
  s.t_read = s.t_write;
  s.t_store = t_store;
  s.dt = 0.1 / params.gamma_o();
  s.validate(params);
  return s;
}

double storage_time_from_lifetimes(double lifetimes, const SystemParams& params) {
  if (!(params.gamma_m > 0.0)) throw InvalidParameter("storage in mechanical lifetimes needs gamma_m > 0");
  if (!(lifetimes >= 0.0)) throw InvalidParameter("storage time must be >= 0");
  return lifetimes / params.gamma_m;
}

std::string_view to_string(Branch b) {
  switch (b) {
    case Branch::PlusPlus: return "++";
    case Branch::MinusMinus: return "--";
    case Branch::PlusMinus: return "+-";
    case Branch::MinusPlus: return "-+";
  }
  return "?";
}

}  // namespace catmem
