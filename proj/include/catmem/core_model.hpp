// Shared domain types for the optomechanical cat-memory simulator.
//
// All quantities are dimensionless: rates are measured in units of the total
// optical decay rate (gamma_o == 1 by convention) and times in units of
// 1/gamma_o.

#ifndef CATMEM_CORE_MODEL_HPP
#define CATMEM_CORE_MODEL_HPP

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace catmem {

using Complex = std::complex<double>;

inline constexpr Complex kI{0.0, 1.0};

/// Raised when a parameter set violates a documented invariant.
class InvalidParameter : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a function is evaluated outside its mathematical domain.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Device parameters. gamma_o is not stored: it is always gamma_ext + gamma_int.
struct SystemParams {
  double gamma_ext = 1.0;
  double gamma_int = 0.0;
  double gamma_m = 17.5 / 170.0e3;
  double g_eff = 0.6;
  double n_th_mech = 0.0;
  double n_init_mech = 0.0;

  [[nodiscard]] double gamma_o() const { return gamma_ext + gamma_int; }

  /// Throws InvalidParameter on a broken invariant.
  void validate() const;
};

/// Convert a physical decay rate (any consistent unit) into the dimensionless
/// convention, i.e. divide by the optical decay rate.
[[nodiscard]] double nondimensional_rate(double rate, double gamma_o_physical);

struct DerivedRates {
  double gamma_plus = 0.0;
  double gamma_minus = 0.0;
  /// sqrt(gamma_minus^2 - g^2) on the principal branch. Imaginary when g > gamma_minus.
  Complex m_rate;
  /// gamma_plus - m_rate.
  Complex gamma_bar;
};

[[nodiscard]] DerivedRates derive_rates(const SystemParams& params);

/// Even cat (|a0> + |-a0>)/sqrt(norm).
struct CatParams {
  Complex alpha0{0.0, 0.0};

  [[nodiscard]] double norm() const;
  /// <a0|-a0> = exp(-2|a0|^2).
  [[nodiscard]] double overlap() const;
};

struct ProtocolSchedule {
  double t_write = 0.0;
  double t_store = 0.0;
  double t_read = 0.0;
  double dt = 0.1;

  [[nodiscard]] double t_begin() const { return -t_write; }
  [[nodiscard]] double t_end() const { return t_store + t_read; }

  void validate(const SystemParams& params) const;
};

/// Write window 10/Re(gamma_bar), read window of equal length, dt = 1/(10 gamma_o).
[[nodiscard]] ProtocolSchedule default_schedule(const SystemParams& params, double t_store);

/// Storage time given as a fraction of the mechanical lifetime 1/gamma_m.
[[nodiscard]] double storage_time_from_lifetimes(double lifetimes, const SystemParams& params);

/// Which delta-function term of the cat's positive-P distribution a sample came from.
enum class Branch : std::uint8_t { PlusPlus, MinusMinus, PlusMinus, MinusPlus };

[[nodiscard]] constexpr bool is_diagonal(Branch b) {
  return b == Branch::PlusPlus || b == Branch::MinusMinus;
}
[[nodiscard]] std::string_view to_string(Branch b);

struct WeightedSample {
  Complex alpha_in;
  Complex alpha_in_plus;
  double weight = 1.0;
  Branch branch = Branch::PlusPlus;
};

struct PhaseSpaceState {
  Complex alpha;
  Complex alpha_plus;
  Complex beta;
  Complex beta_plus;

  PhaseSpaceState& operator+=(const PhaseSpaceState& o) {
    alpha += o.alpha;
    alpha_plus += o.alpha_plus;
    beta += o.beta;
    beta_plus += o.beta_plus;
    return *this;
  }
  friend PhaseSpaceState operator+(PhaseSpaceState a, const PhaseSpaceState& b) { return a += b; }
  friend PhaseSpaceState operator*(double s, PhaseSpaceState a) {
    a.alpha *= s;
    a.alpha_plus *= s;
    a.beta *= s;
    a.beta_plus *= s;
    return a;
  }
};

struct TrajectoryResult {
  Complex alpha_out;
  Complex alpha_out_plus;
  double weight = 1.0;
  Branch branch = Branch::PlusPlus;
  /// Mechanical amplitude pair at the end of the write stage (t = 0).
  Complex beta_stored;
  Complex beta_stored_plus;
};

}  // namespace catmem

#endif  // CATMEM_CORE_MODEL_HPP
