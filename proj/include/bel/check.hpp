#pragma once

#include <string>
#include <vector>

namespace bel {

/// One verified statement: the formula checked, its verdict, the measured
/// value and the tolerance it was held to.
struct Check {
  std::string name;
  std::string reference;
  bool pass = false;
  double value = 0.0;
  double tolerance = 0.0;
};

inline bool all_pass(const std::vector<Check>& checks) {
  for (const auto& c : checks) {
    if (!c.pass) return false;
  }
  return true;
}

}  // namespace bel
