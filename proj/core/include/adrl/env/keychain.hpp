#pragma once

#include <optional>

#include "adrl/env/env.hpp"
#include "adrl/rng.hpp"

namespace adrl::env {

// Multi-room corridor gridworld. Rooms are connected left to right by
// colored doors: door 0 (yellow) just needs an interact, every later door
// consumes the same-colored key, found one room earlier. An optional dead
// end branch hangs below room 2 behind a cyan door whose key lies in room
// 2. The goal sits in the last room and ends the episode. Achievements:
// picking up each key, opening each door, reaching the goal.
enum class CellKind : std::uint8_t {
  Floor = 0,
  Wall,
  DoorClosed,
  DoorOpen,
  Key,
  Goal,
};
inline constexpr int kCellKindCount = 6;

enum ColorId : std::uint8_t {
  kColorNone = 0,
  kColorYellow,
  kColorPurple,
  kColorCyan,
  kColorGreen,
  kColorRed,
  kColorBlue,
  kColorOrange,
};
inline constexpr int kColorCount = 8;

struct Cell {
  CellKind kind = CellKind::Wall;
  std::uint8_t color = kColorNone;
};

struct KeychainConfig {
  int main_rooms = 5;  // in [2,7]
  bool side_branch = true;  // requires main_rooms >= 3
  int room_w = 5;  // interior sizes, >= 3
  int room_h = 5;
  int step_limit = 400;
  bool randomize_palette = false;  // shuffles display colors only

  void validate() const;
};

enum KeychainAction {
  kActionUp = 0,
  kActionDown,
  kActionLeft,
  kActionRight,
  kActionInteract,
  kKeychainActionCount,
};

inline constexpr int kViewSize = 7;  // egocentric crop, agent centered
inline constexpr int kCellChannels = kCellKindCount + kColorCount;

class KeychainEnv : public Env {
 public:
  explicit KeychainEnv(KeychainConfig cfg);

  Observation reset(std::uint64_t seed) override;
  StepResult step(int action) override;

  int action_count() const override { return kKeychainActionCount; }
  std::vector<int> observation_shape() const override {
    return {kViewSize, kViewSize, kCellChannels};
  }
  const AchievementGraph& graph() const override { return graph_; }
  UnlockMask unlocked() const override { return unlocked_; }
  int steps_taken() const override { return steps_; }
  bool done() const override { return done_; }
  std::string kind() const override { return "keychain"; }
  nlohmann::json config_json() const override;
  std::unique_ptr<Env> clone_config() const override;

  const KeychainConfig& config() const { return cfg_; }
  int width() const { return w_; }
  int height() const { return h_; }
  // Canonical (pre-palette) cell content.
  const Cell& cell(int x, int y) const;
  std::pair<int, int> agent_xy() const { return {ax_, ay_}; }
  // Colors of keys currently held, oldest first.
  const std::vector<std::uint8_t>& held_keys() const { return held_; }

 private:
  friend std::optional<std::vector<int>> solve(const KeychainEnv&);

  void build_layout(Rng& rng);
  Observation observe() const;
  int key_achievement(std::uint8_t color) const;
  int door_achievement(std::uint8_t color) const;

  KeychainConfig cfg_;
  AchievementGraph graph_;
  int goal_achievement_ = -1;

  int w_ = 0, h_ = 0;
  std::vector<Cell> grid_;
  std::array<std::uint8_t, kColorCount> palette_{};
  int ax_ = 0, ay_ = 0;
  std::vector<std::uint8_t> held_;
  UnlockMask unlocked_ = 0;
  int steps_ = 0;
  bool done_ = false;
  bool live_ = false;  // reset happened
};

// Breadth-first search over (position, keys taken, doors opened) from the
// env's current state. Returns an action sequence that unlocks every
// achievement within the step limit, or nullopt if impossible.
std::optional<std::vector<int>> solve(const KeychainEnv& env);

}  // namespace adrl::env
