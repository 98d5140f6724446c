#pragma once

#include <string>
#include <vector>

#include "stacklab/effects.hpp"
#include "stacklab/renderer.hpp"
#include "stacklab/simulator.hpp"

namespace stacklab {

struct MemberSnapshot {
  int object_id = 0;
  Pose pose;
  int slot = 1;
  NormalizedImage image;
};

// One record per placement: the compound before the release, the released
// object, and the observed effect triple.
struct InteractionRecord {
  int episode = 0;
  int step = 0;  // 1-based within the episode
  Mode mode = Mode::Linear;
  std::vector<MemberSnapshot> members;
  int new_id = 0;
  int slot = 1;
  Orientation orientation = Orientation::Upright;
  NormalizedImage new_image;
  Pose new_settled_pose;
  SettleKind outcome = SettleKind::StackedOnTop;
  std::vector<std::array<double, 2>> e1;  // decimeters, one per member
  std::vector<std::array<double, 4>> e2;
  int e3 = 0;
};

// Runs one exploration episode: repeatedly draws an object (and slot /
// orientation in Nonlinear mode) uniformly without replacement, places it,
// records the effect triple against every compound member, and stops at the
// first collapse or when the inventory is exhausted. Deterministic in `seed`.
std::vector<InteractionRecord> run_episode(std::uint64_t seed,
                                           const std::vector<ObjectSpec>& inventory,
                                           Mode mode);

// Episode batch with per-episode seeds seed + index; results are identical
// for any worker count. Inventories are drawn per episode from `pool`
// (without replacement), sizes uniform in [2, max_inventory].
std::vector<InteractionRecord> generate_dataset(std::uint64_t seed, int episodes,
                                                const std::vector<ObjectSpec>& pool,
                                                Mode mode, int max_inventory);

// Object pool used for episode sampling in each mode. Linear: the standard
// catalog. Nonlinear: cubes and cups replicated with fresh ids so that
// equal-height bridge legs exist.
std::vector<ObjectSpec> episode_pool(Mode mode);

std::string record_to_json(const InteractionRecord& rec);
InteractionRecord record_from_json(const std::string& line);

void write_jsonl(const std::string& path, const std::vector<InteractionRecord>& records);
std::vector<InteractionRecord> read_jsonl(const std::string& path);

}  // namespace stacklab
