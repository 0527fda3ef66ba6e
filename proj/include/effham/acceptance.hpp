#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace effham {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

struct AcceptanceOptions {
  int cell_grid = 128;       // PDE nodes per axis
  int lmax = 8;
  unsigned long long seed = 20240601;
  std::vector<int> only;     // criteria to run; all when empty
};

/// Runs the acceptance criteria; progress lines go to `log` when given.
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opts = {}, std::ostream* log = nullptr);

/// "PASS [n] name: detail (t s)"
std::string format_result(const CriterionResult& r);

}  // namespace effham
