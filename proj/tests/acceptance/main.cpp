#include <cstdio>

#include "acceptance/acceptance_suite.hpp"

int main() {
  gridflow::acceptance::SuiteResult suite =
      gridflow::acceptance::run_acceptance_suite(true);
  int failed = 0;
  for (const auto& c : suite.criteria) failed += c.passed ? 0 : 1;
  std::printf("%zu criteria, %d failed\n", suite.criteria.size(), failed);
  return suite.all_passed() ? 0 : 1;
}
