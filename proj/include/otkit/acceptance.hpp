#pragma once

#include <functional>
#include <ostream>
#include <string>
#include <vector>

namespace otkit::acceptance {

struct Outcome {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

struct Criterion {
  int id;
  std::string name;
  std::function<Outcome()> run;
};

/// The nine acceptance criteria, in order.
const std::vector<Criterion>& criteria();

/// Runs one criterion. Exceptions become failures carrying the message.
Outcome run_one(const Criterion& criterion);

/// "PASS [id] name: detail (t s)".
std::string format(const Outcome& outcome);

/// Runs the selected criteria (all when `ids` is empty), printing one line
/// each as it finishes. Returns the outcomes.
std::vector<Outcome> run(std::ostream& out, const std::vector<int>& ids = {});

}  // namespace otkit::acceptance
