#include "adrl/env/keychain.hpp"

#include <algorithm>
#include <array>
#include <queue>

#include <nlohmann/json.hpp>

namespace adrl::env {
namespace {

constexpr std::array<std::uint8_t, 5> kLockedDoorColors = {
    kColorPurple, kColorGreen, kColorRed, kColorBlue, kColorOrange};

const char* color_name(std::uint8_t c) {
  switch (c) {
    case kColorYellow: return "yellow";
    case kColorPurple: return "purple";
    case kColorCyan: return "cyan";
    case kColorGreen: return "green";
    case kColorRed: return "red";
    case kColorBlue: return "blue";
    case kColorOrange: return "orange";
    default: return "none";
  }
}

// up, down, left, right; interact scans in this same order.
constexpr std::array<std::pair<int, int>, 4> kMoves = {
    {{0, -1}, {0, 1}, {-1, 0}, {1, 0}}};

}  // namespace

void KeychainConfig::validate() const {
  if (main_rooms < 2 || main_rooms > 7) {
    throw ContractViolation("KeychainConfig: main_rooms must be in [2,7]");
  }
  if (side_branch && main_rooms < 3) {
    throw ContractViolation("KeychainConfig: side branch needs main_rooms >= 3");
  }
  if (room_w < 3 || room_h < 3) {
    throw ContractViolation("KeychainConfig: rooms must be at least 3x3");
  }
  if (step_limit < 1) throw ContractViolation("KeychainConfig: step_limit < 1");
}

KeychainEnv::KeychainEnv(KeychainConfig cfg) : cfg_(cfg) {
  cfg_.validate();
  const int k = cfg_.main_rooms;
  auto add = [&](const std::string& name) {
    graph_.names.push_back(name);
    return static_cast<int>(graph_.names.size()) - 1;
  };
  auto door_name = [&](std::uint8_t c) {
    return std::string("open_") + color_name(c) + "_door";
  };
  auto key_name = [&](std::uint8_t c) {
    return std::string("get_") + color_name(c) + "_key";
  };

  int prev_door = add(door_name(kColorYellow));
  for (int d = 1; d <= k - 2; ++d) {
    const std::uint8_t c = kLockedDoorColors[static_cast<std::size_t>(d - 1)];
    int key = add(key_name(c));
    graph_.edges.emplace_back(prev_door, key);
    int door = add(door_name(c));
    graph_.edges.emplace_back(key, door);
    if (d == 1 && cfg_.side_branch) {
      int ckey = add(key_name(kColorCyan));
      graph_.edges.emplace_back(door, ckey);
      int cdoor = add(door_name(kColorCyan));
      graph_.edges.emplace_back(ckey, cdoor);
    }
    prev_door = door;
  }
  goal_achievement_ = add("reach_goal");
  graph_.edges.emplace_back(prev_door, goal_achievement_);
  graph_.validate();
}

int KeychainEnv::key_achievement(std::uint8_t color) const {
  return graph_.id_of(std::string("get_") + color_name(color) + "_key");
}

int KeychainEnv::door_achievement(std::uint8_t color) const {
  return graph_.id_of(std::string("open_") + color_name(color) + "_door");
}

const Cell& KeychainEnv::cell(int x, int y) const {
  if (x < 0 || x >= w_ || y < 0 || y >= h_) {
    throw ContractViolation("KeychainEnv::cell: out of bounds");
  }
  return grid_[static_cast<std::size_t>(y) * w_ + x];
}

void KeychainEnv::build_layout(Rng& rng) {
  const int k = cfg_.main_rooms;
  const int rw = cfg_.room_w, rh = cfg_.room_h;
  w_ = k * (rw + 1) + 1;
  h_ = rh + 2 + (cfg_.side_branch ? rh + 1 : 0);
  grid_.assign(static_cast<std::size_t>(w_) * h_, Cell{});

  auto at = [&](int x, int y) -> Cell& {
    return grid_[static_cast<std::size_t>(y) * w_ + x];
  };
  auto room_x0 = [&](int i) { return i * (rw + 1) + 1; };

  for (int i = 0; i < k; ++i) {
    for (int y = 1; y <= rh; ++y) {
      for (int x = room_x0(i); x < room_x0(i) + rw; ++x) {
        at(x, y) = {CellKind::Floor, kColorNone};
      }
    }
  }
  if (cfg_.side_branch) {
    for (int y = rh + 2; y <= 2 * rh + 1; ++y) {
      for (int x = room_x0(2); x < room_x0(2) + rw; ++x) {
        at(x, y) = {CellKind::Floor, kColorNone};
      }
    }
  }

  for (int d = 0; d <= k - 2; ++d) {
    const std::uint8_t c =
        d == 0 ? static_cast<std::uint8_t>(kColorYellow)
               : kLockedDoorColors[static_cast<std::size_t>(d - 1)];
    at((d + 1) * (rw + 1), 1 + rng.uniform_int(rh)) = {CellKind::DoorClosed, c};
  }
  if (cfg_.side_branch) {
    at(room_x0(2) + rng.uniform_int(rw), rh + 1) = {CellKind::DoorClosed,
                                                    kColorCyan};
  }

  auto place = [&](int room, CellKind kind, std::uint8_t color) {
    while (true) {
      const int x = room_x0(room) + rng.uniform_int(rw);
      const int y = 1 + rng.uniform_int(rh);
      if (at(x, y).kind == CellKind::Floor) {
        at(x, y) = {kind, color};
        return;
      }
    }
  };
  for (int d = 1; d <= k - 2; ++d) {
    place(d, CellKind::Key, kLockedDoorColors[static_cast<std::size_t>(d - 1)]);
  }
  if (cfg_.side_branch) place(2, CellKind::Key, kColorCyan);

  // The goal ends the episode on entry, so it must not sit next to a door:
  // it would block the doorway (or the only cell a door can be opened
  // from) and make full completion impossible.
  while (true) {
    const int x = room_x0(k - 1) + rng.uniform_int(rw);
    const int y = 1 + rng.uniform_int(rh);
    if (at(x, y).kind != CellKind::Floor) continue;
    bool near_door = false;
    for (auto [dx, dy] : kMoves) {
      const int nx = x + dx, ny = y + dy;
      if (nx < 0 || nx >= w_ || ny < 0 || ny >= h_) continue;
      if (at(nx, ny).kind == CellKind::DoorClosed) near_door = true;
    }
    if (near_door) continue;
    at(x, y) = {CellKind::Goal, kColorGreen};
    break;
  }

  while (true) {
    const int x = room_x0(0) + rng.uniform_int(rw);
    const int y = 1 + rng.uniform_int(rh);
    if (at(x, y).kind == CellKind::Floor) {
      ax_ = x;
      ay_ = y;
      break;
    }
  }

  for (int c = 0; c < kColorCount; ++c) {
    palette_[static_cast<std::size_t>(c)] = static_cast<std::uint8_t>(c);
  }
  if (cfg_.randomize_palette) {
    // Shuffle display colors; mechanics and achievement names stay put.
    std::array<std::uint8_t, 7> disp = {kColorYellow, kColorPurple, kColorCyan,
                                        kColorGreen,  kColorRed,    kColorBlue,
                                        kColorOrange};
    for (int i = 6; i > 0; --i) {
      std::swap(disp[static_cast<std::size_t>(i)],
                disp[static_cast<std::size_t>(rng.uniform_int(i + 1))]);
    }
    for (int c = 1; c < kColorCount; ++c) {
      palette_[static_cast<std::size_t>(c)] = disp[static_cast<std::size_t>(c - 1)];
    }
  }
}

Observation KeychainEnv::reset(std::uint64_t seed) {
  Rng rng(seed);
  build_layout(rng);
  held_.clear();
  unlocked_ = 0;
  steps_ = 0;
  done_ = false;
  live_ = true;
  return observe();
}

StepResult KeychainEnv::step(int action) {
  if (!live_) throw ContractViolation("KeychainEnv::step before reset");
  if (done_) throw ContractViolation("KeychainEnv::step after episode end");
  if (action < 0 || action >= kKeychainActionCount) {
    throw ContractViolation("KeychainEnv::step: bad action");
  }

  auto at = [&](int x, int y) -> Cell& {
    return grid_[static_cast<std::size_t>(y) * w_ + x];
  };
  std::optional<int> completion;

  if (action == kActionInteract) {
    for (auto [dx, dy] : kMoves) {
      const int x = ax_ + dx, y = ay_ + dy;
      if (x < 0 || x >= w_ || y < 0 || y >= h_) continue;
      Cell& c = at(x, y);
      if (c.kind != CellKind::DoorClosed) continue;
      const bool openable =
          c.color == kColorYellow ||
          std::find(held_.begin(), held_.end(), c.color) != held_.end();
      if (!openable) continue;
      if (c.color != kColorYellow) {
        held_.erase(std::find(held_.begin(), held_.end(), c.color));
      }
      c.kind = CellKind::DoorOpen;
      completion = door_achievement(c.color);
      break;
    }
  } else {
    const auto [dx, dy] = kMoves[static_cast<std::size_t>(action)];
    const int x = ax_ + dx, y = ay_ + dy;
    if (x >= 0 && x < w_ && y >= 0 && y < h_) {
      Cell& c = at(x, y);
      switch (c.kind) {
        case CellKind::Wall:
        case CellKind::DoorClosed:
          break;
        case CellKind::Key:
          held_.push_back(c.color);
          completion = key_achievement(c.color);
          c = {CellKind::Floor, kColorNone};
          ax_ = x;
          ay_ = y;
          break;
        case CellKind::Goal:
          completion = goal_achievement_;
          done_ = true;
          ax_ = x;
          ay_ = y;
          break;
        default:
          ax_ = x;
          ay_ = y;
          break;
      }
    }
  }

  ++steps_;
  if (steps_ >= cfg_.step_limit) done_ = true;

  StepResult r;
  if (completion) {
    r.unlocked = completion;
    if (!((unlocked_ >> *completion) & 1u)) {
      unlocked_ |= UnlockMask{1} << *completion;
      r.reward = 1;
      r.first_unlock = true;
    }
  }
  r.done = done_;
  r.obs = observe();
  return r;
}

Observation KeychainEnv::observe() const {
  Observation o;
  o.data.assign(static_cast<std::size_t>(kViewSize) * kViewSize * kCellChannels,
                0);
  const int rad = kViewSize / 2;
  for (int vy = 0; vy < kViewSize; ++vy) {
    for (int vx = 0; vx < kViewSize; ++vx) {
      const int gx = ax_ + vx - rad;
      const int gy = ay_ + vy - rad;
      Cell c{CellKind::Wall, kColorNone};
      if (gx >= 0 && gx < w_ && gy >= 0 && gy < h_) {
        c = grid_[static_cast<std::size_t>(gy) * w_ + gx];
      }
      if (vx == rad && vy == rad && !held_.empty()) {
        // The agent's own cell shows the most recently picked-up held key.
        c = {CellKind::Key, held_.back()};
      }
      const std::size_t base =
          (static_cast<std::size_t>(vy) * kViewSize + vx) * kCellChannels;
      o.data[base + static_cast<std::size_t>(c.kind)] = 1;
      o.data[base + kCellKindCount + palette_[c.color]] = 1;
    }
  }
  return o;
}

nlohmann::json KeychainEnv::config_json() const {
  return nlohmann::json{{"main_rooms", cfg_.main_rooms},
                        {"side_branch", cfg_.side_branch},
                        {"room_w", cfg_.room_w},
                        {"room_h", cfg_.room_h},
                        {"step_limit", cfg_.step_limit},
                        {"randomize_palette", cfg_.randomize_palette}};
}

std::unique_ptr<Env> KeychainEnv::clone_config() const {
  return std::make_unique<KeychainEnv>(cfg_);
}

std::optional<std::vector<int>> solve(const KeychainEnv& env) {
  if (!env.live_) throw ContractViolation("solve: env not reset");

  // Enumerate dynamic cells: keys and doors.
  struct KeyCell { int x, y; std::uint8_t color; };
  struct DoorCell { int x, y; std::uint8_t color; };
  std::vector<KeyCell> keys;
  std::vector<DoorCell> doors;
  int gx = -1, gy = -1;
  for (int y = 0; y < env.h_; ++y) {
    for (int x = 0; x < env.w_; ++x) {
      const Cell& c = env.grid_[static_cast<std::size_t>(y) * env.w_ + x];
      if (c.kind == CellKind::Key) keys.push_back({x, y, c.color});
      if (c.kind == CellKind::DoorClosed) doors.push_back({x, y, c.color});
      if (c.kind == CellKind::Goal) {
        gx = x;
        gy = y;
      }
    }
  }
  // Keys already held at solve time count as taken.
  const int nk = static_cast<int>(keys.size());
  const int nd = static_cast<int>(doors.size());
  if (nk > 10 || nd > 10) throw ContractViolation("solve: layout too large");

  const int cells = env.w_ * env.h_;
  const std::size_t nstates = static_cast<std::size_t>(cells) * (1u << nk) *
                              (1u << nd);
  auto state_of = [&](int pos, unsigned taken, unsigned open) {
    return (static_cast<std::size_t>(pos) * (1u << nk) + taken) * (1u << nd) +
           open;
  };

  auto held_with = [&](unsigned taken, unsigned open) {
    // Multiset of held colors = taken keys minus keys consumed by opened
    // locked doors.
    std::array<int, kColorCount> held{};
    for (int i = 0; i < nk; ++i) {
      if ((taken >> i) & 1u) ++held[keys[static_cast<std::size_t>(i)].color];
    }
    for (int i = 0; i < nd; ++i) {
      if (((open >> i) & 1u) &&
          doors[static_cast<std::size_t>(i)].color != kColorYellow) {
        --held[doors[static_cast<std::size_t>(i)].color];
      }
    }
    for (std::uint8_t c : env.held_) ++held[c];
    return held;
  };

  std::vector<std::int32_t> parent(nstates, -2);  // -2 unvisited, -1 root
  std::vector<std::int8_t> parent_action(nstates, -1);
  std::vector<std::int32_t> dist(nstates, 0);

  const unsigned all_taken = (1u << nk) - 1u;
  const unsigned all_open = (1u << nd) - 1u;

  const int start_pos = env.ay_ * env.w_ + env.ax_;
  const std::size_t start = state_of(start_pos, 0, 0);
  parent[start] = -1;
  std::queue<std::size_t> q;
  q.push(start);

  auto base_cell = [&](int x, int y) -> const Cell& {
    return env.grid_[static_cast<std::size_t>(y) * env.w_ + x];
  };

  std::size_t found = static_cast<std::size_t>(-1);
  while (!q.empty() && found == static_cast<std::size_t>(-1)) {
    const std::size_t s = q.front();
    q.pop();
    const unsigned open = static_cast<unsigned>(s % (1u << nd));
    const unsigned taken = static_cast<unsigned>((s / (1u << nd)) % (1u << nk));
    const int pos = static_cast<int>(s / ((1u << nd) * (1u << nk)));
    const int x = pos % env.w_, y = pos / env.w_;
    if (dist[s] >= env.cfg_.step_limit) continue;
    // Standing on the goal ends the episode; never expanded (see below).

    for (int a = 0; a < kKeychainActionCount; ++a) {
      int npos = pos;
      unsigned ntaken = taken, nopen = open;
      if (a == kActionInteract) {
        auto held = held_with(taken, open);
        bool opened = false;
        for (auto [dx, dy] : kMoves) {
          const int tx = x + dx, ty = y + dy;
          if (tx < 0 || tx >= env.w_ || ty < 0 || ty >= env.h_) continue;
          for (int i = 0; i < nd && !opened; ++i) {
            const auto& dc = doors[static_cast<std::size_t>(i)];
            if (dc.x != tx || dc.y != ty || ((open >> i) & 1u)) continue;
            if (dc.color == kColorYellow || held[dc.color] > 0) {
              nopen = open | (1u << i);
              opened = true;
            }
          }
          if (opened) break;
        }
        if (!opened) continue;  // no-op action, skip
      } else {
        const auto [dx, dy] = kMoves[static_cast<std::size_t>(a)];
        const int tx = x + dx, ty = y + dy;
        if (tx < 0 || tx >= env.w_ || ty < 0 || ty >= env.h_) continue;
        const Cell& c = base_cell(tx, ty);
        CellKind kind = c.kind;
        for (int i = 0; i < nk; ++i) {
          const auto& kc = keys[static_cast<std::size_t>(i)];
          if (kc.x == tx && kc.y == ty && ((taken >> i) & 1u)) kind = CellKind::Floor;
        }
        for (int i = 0; i < nd; ++i) {
          const auto& dc = doors[static_cast<std::size_t>(i)];
          if (dc.x == tx && dc.y == ty && ((open >> i) & 1u)) kind = CellKind::DoorOpen;
        }
        if (kind == CellKind::Wall || kind == CellKind::DoorClosed) continue;
        if (kind == CellKind::Key) {
          for (int i = 0; i < nk; ++i) {
            const auto& kc = keys[static_cast<std::size_t>(i)];
            if (kc.x == tx && kc.y == ty) ntaken = taken | (1u << i);
          }
        }
        npos = ty * env.w_ + tx;
      }

      const std::size_t ns = state_of(npos, ntaken, nopen);
      if (parent[ns] != -2) continue;
      parent[ns] = static_cast<std::int32_t>(s);
      parent_action[ns] = static_cast<std::int8_t>(a);
      dist[ns] = dist[s] + 1;

      const bool on_goal = npos == gy * env.w_ + gx;
      if (on_goal) {
        if (ntaken == all_taken && nopen == all_open) {
          found = ns;
          break;
        }
        continue;  // terminal but incomplete; not expanded
      }
      q.push(ns);
    }
  }

  if (found == static_cast<std::size_t>(-1)) return std::nullopt;
  std::vector<int> actions;
  for (std::size_t s = found; parent[s] != -1;
       s = static_cast<std::size_t>(parent[s])) {
    actions.push_back(parent_action[s]);
  }
  std::reverse(actions.begin(), actions.end());
  return actions;
}

}  // namespace adrl::env
