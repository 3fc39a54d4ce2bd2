#include "adrl/env/achievement.hpp"

#include <set>

namespace adrl::env {

void AchievementGraph::validate() const {
  const int n = count();
  if (n > 64) throw ContractViolation("AchievementGraph: more than 64 achievements");
  std::set<std::string> seen;
  for (const auto& name : names) {
    if (name.empty() || !seen.insert(name).second) {
      throw ContractViolation("AchievementGraph: empty or duplicate name");
    }
  }
  for (auto [u, v] : edges) {
    if (u < 0 || u >= n || v < 0 || v >= n || u == v) {
      throw ContractViolation("AchievementGraph: bad edge");
    }
  }
  // Kahn's algorithm; leftover nodes mean a cycle.
  std::vector<int> indeg(static_cast<std::size_t>(n), 0);
  for (auto [u, v] : edges) ++indeg[static_cast<std::size_t>(v)];
  std::vector<int> queue;
  for (int i = 0; i < n; ++i) {
    if (indeg[static_cast<std::size_t>(i)] == 0) queue.push_back(i);
  }
  int processed = 0;
  while (!queue.empty()) {
    int u = queue.back();
    queue.pop_back();
    ++processed;
    for (auto [a, b] : edges) {
      if (a == u && --indeg[static_cast<std::size_t>(b)] == 0) queue.push_back(b);
    }
  }
  if (processed != n) throw ContractViolation("AchievementGraph: cycle");
}

std::vector<int> AchievementGraph::ancestors(int id) const {
  if (id < 0 || id >= count()) {
    throw ContractViolation("AchievementGraph::ancestors: bad id");
  }
  std::vector<bool> mark(static_cast<std::size_t>(count()), false);
  std::vector<int> stack{id};
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    for (auto [a, b] : edges) {
      if (b == v && !mark[static_cast<std::size_t>(a)]) {
        mark[static_cast<std::size_t>(a)] = true;
        stack.push_back(a);
      }
    }
  }
  std::vector<int> out;
  for (int i = 0; i < count(); ++i) {
    if (mark[static_cast<std::size_t>(i)]) out.push_back(i);
  }
  return out;
}

bool AchievementGraph::admissible(UnlockMask unlocked) const {
  for (auto [u, v] : edges) {
    if ((unlocked >> v) & 1u) {
      if (!((unlocked >> u) & 1u)) return false;
    }
  }
  return true;
}

int AchievementGraph::id_of(const std::string& name) const {
  for (int i = 0; i < count(); ++i) {
    if (names[static_cast<std::size_t>(i)] == name) return i;
  }
  return -1;
}

}  // namespace adrl::env
