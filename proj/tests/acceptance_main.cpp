#include <iostream>
#include <string>
#include <vector>

#include "otkit/acceptance.hpp"

// Usage: acceptance [criterion-id ...]
int main(int argc, char** argv) {
  std::vector<int> ids;
  for (int i = 1; i < argc; ++i) ids.push_back(std::stoi(argv[i]));
  const auto outcomes = otkit::acceptance::run(std::cout, ids);
  int failed = 0;
  for (const auto& o : outcomes) failed += o.passed ? 0 : 1;
  std::cout << outcomes.size() - static_cast<std::size_t>(failed) << "/" << outcomes.size()
            << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
