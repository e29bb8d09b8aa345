#pragma once

#include <string>
#include <vector>

#include "gears/relative_hamiltonian.hpp"

namespace gears {

struct CheckResult {
  int id;
  std::string name;
  bool passed;
  std::string detail;
};

/// The numbered acceptance checks, in order. Tolerances are fixed inside.
std::vector<CheckResult> run_acceptance_checks(EigenSystemCache& cache = default_eigen_cache());

/// One check by number (1-based); throws std::out_of_range for unknown ids.
CheckResult run_acceptance_check(int id, EigenSystemCache& cache = default_eigen_cache());

int acceptance_check_count();

}  // namespace gears
