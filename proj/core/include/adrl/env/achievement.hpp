#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "adrl/common.hpp"

namespace adrl::env {

// Bitmask of unlocked achievement ids (bit i = achievement i).
using UnlockMask = std::uint64_t;

// Prerequisite DAG over achievements. Edge (u,v) means u must be unlocked
// before v can be.
struct AchievementGraph {
  std::vector<std::string> names;
  std::vector<std::pair<int, int>> edges;

  int count() const { return static_cast<int>(names.size()); }

  // Throws ContractViolation on out-of-range edges, duplicate names or a
  // cycle.
  void validate() const;

  // Transitive prerequisites of id (excluding id).
  std::vector<int> ancestors(int id) const;

  // True iff every unlocked achievement has all its prerequisites unlocked.
  bool admissible(UnlockMask unlocked) const;

  int id_of(const std::string& name) const;  // -1 if absent
};

}  // namespace adrl::env
