#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace stripgap {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

struct AcceptanceOptions {
  std::vector<int> only;  // empty = all criteria
  int threads = 0;
};

/// Runs the verification suite; prints one pass/fail line per criterion to
/// `log` as it goes. Heavy intermediate results (cell constants, dispersion
/// sweeps) are shared across criteria.
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opts, std::ostream& log);

bool all_passed(const std::vector<CriterionResult>& results);

}  // namespace stripgap
