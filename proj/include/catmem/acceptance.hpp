// Acceptance suite: one report per criterion, each built from named checks
// with tolerances fixed in the implementation.

#ifndef CATMEM_ACCEPTANCE_HPP
#define CATMEM_ACCEPTANCE_HPP

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace catmem {

struct AcceptanceOptions {
  bool dry_run = false;
  /// Criterion ids to run; empty runs all.
  std::vector<int> only;
  unsigned workers = 1;
  /// Multiplies every two-sided tolerance. Only the harness self-test changes it.
  double tolerance_scale = 1.0;
  /// Optional JSON report path.
  std::string json_path;
};

struct CheckResult {
  std::string name;
  bool passed = false;
  double measured = 0.0;
  double expected = 0.0;
  /// Allowed |measured - expected|; for one-sided checks the bound is `expected`.
  double tolerance = 0.0;
  std::string relation;  ///< "~=", "<=", ">=" or "in"
};

struct CriterionReport {
  int id = 0;
  std::string key;
  std::string title;
  std::vector<CheckResult> checks;
  /// Extra measured values that are reported but not asserted.
  std::vector<std::string> info;
  double seconds = 0.0;

  [[nodiscard]] bool passed() const;
};

struct CriterionSpec {
  int id;
  std::string key;
  std::string title;
  std::function<void(const AcceptanceOptions&, CriterionReport&)> run;
};

[[nodiscard]] const std::vector<CriterionSpec>& acceptance_criteria();

/// Runs one criterion and fills in id, key, title and timing.
[[nodiscard]] CriterionReport run_criterion(const CriterionSpec& spec, const AcceptanceOptions& options);

/// Prints one PASS/FAIL line per criterion (plus indented check lines) and
/// returns 0 iff every selected criterion passed.
int cmd_validate(const AcceptanceOptions& options, std::ostream& out);

}  // namespace catmem

#endif  // CATMEM_ACCEPTANCE_HPP
