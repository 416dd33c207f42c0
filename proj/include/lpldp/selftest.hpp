// selftest: the end-to-end verification battery shared by the CLI `selftest`
// subcommand and the acceptance test binary.
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace lpldp::selftest {

struct CriterionResult {
  std::string name;
  bool pass = false;
  std::string details;
  double seconds = 0.0;
};

/// Names of all criteria, in execution order.
std::vector<std::string> criterion_names();

/// Run one criterion by name.
CriterionResult run_criterion(const std::string& name, int threads,
                              bool inject_quadrature_fault = false);

/// Run every criterion whose name contains `only` (all when empty), printing
/// one "PASS name - details" / "FAIL name - details" line per criterion plus
/// a summary line. Returns 0 when all pass, 3 otherwise.
int run_all(const std::string& only, int threads, bool inject_quadrature_fault, std::ostream& out);

}  // namespace lpldp::selftest
