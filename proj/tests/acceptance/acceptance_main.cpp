#include <iostream>

#include "effham/acceptance.hpp"

int main() {
  const auto results = effham::run_acceptance({}, &std::cerr);
  bool all = true;
  for (const auto& r : results) {
    std::cout << effham::format_result(r) << '\n';
    all = all && r.pass;
  }
  return all ? 0 : 1;
}
