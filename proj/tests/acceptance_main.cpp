#include <cstdlib>
#include <iostream>

#include "eigenflow/acceptance.hpp"

int main(int argc, char** argv) {
  eigenflow::acceptance::Options opt;
  if (argc > 1) opt.seed = std::strtoull(argv[1], nullptr, 10);
  int failed = 0;
  eigenflow::acceptance::run_all(opt, [&](const eigenflow::acceptance::CriterionResult& r) {
    std::cout << eigenflow::acceptance::format_line(r) << std::endl;
    if (!r.passed) ++failed;
  });
  std::cout << (failed == 0 ? "all 9 criteria passed" : std::to_string(failed) + " criteria failed") << std::endl;
  return failed == 0 ? 0 : 1;
}
