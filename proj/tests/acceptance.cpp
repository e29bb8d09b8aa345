// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.
#include <cstdio>

#include "gears/verify.hpp"

int main() {
  std::setvbuf(stdout, nullptr, _IOLBF, 0);
  gears::EigenSystemCache cache;
  int failed = 0;
  for (int id = 1; id <= gears::acceptance_check_count(); ++id) {
    const auto r = gears::run_acceptance_check(id, cache);
    std::printf("%s %2d %s: %s\n", r.passed ? "PASS" : "FAIL", r.id, r.name.c_str(), r.detail.c_str());
    failed += r.passed ? 0 : 1;
  }
  std::printf("%d/%d criteria passed\n", gears::acceptance_check_count() - failed, gears::acceptance_check_count());
  return failed == 0 ? 0 : 1;
}
