#pragma once

#include <array>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "stacklab/geometry.hpp"
#include "stacklab/rng.hpp"

namespace stacklab {

enum class Mode { Linear, Nonlinear };

const char* to_string(Mode m);
Mode mode_from_string(const std::string& s);

// Discrete x-axis release locations.
inline constexpr std::array<double, 3> kSlotX = {-0.09, 0.0, 0.09};
inline constexpr double kReleaseClearance = 0.15;

// Collapse thresholds: lateral displacement and orientation deviation.
inline constexpr double kCollapsePosThreshold = 0.20;   // meters
inline constexpr double kCollapseOriThreshold = 60.0;   // degrees

enum class SettleKind {
  StackedOnTop,
  InsertedInCavity,
  PassedOverPole,
  RestsOnRim,
  ToppledOff,
  CompoundCollapsed,
};

const char* to_string(SettleKind k);

struct Placement {
  ObjectSpec spec;
  Pose pose;                 // settled pose
  int step = 0;              // release order, 1-based
  int slot = 1;
  double release_x = 0;      // bottom-center coordinates at release time
  double release_y = 0;
  double release_z = 0;
  bool tipped = false;       // orientation deviated >= 60 deg (toppled / collapsed)
  SettleKind kind = SettleKind::StackedOnTop;
  std::vector<int> supports; // indices of the placements it rests on; empty = table
};

struct SettleOutcome {
  SettleKind kind = SettleKind::StackedOnTop;
  Pose final_pose;
};

struct CompoundState {
  std::vector<Placement> placements;
  Pose base_pose;        // pose of placement #1 at settle time
  bool collapsed = false;

  int size() const { return static_cast<int>(placements.size()); }
};

struct PlacementOnCollapsed : std::runtime_error {
  PlacementOnCollapsed() : std::runtime_error("placement on a collapsed compound") {}
};

// Height of the highest upward-facing support surface reachable at the slot's
// x column (the table when empty; an empty upright cup exposes its cavity
// floor because the walls do not cover the column center).
double support_top(const CompoundState& compound, int slot);

// Releases the object bottom-centered over the slot at support_top + 15 cm and
// settles it: drop until first analytic contact, then constraint
// classification (pass-over / cavity insert) or a contact-patch stability
// test. Pure function of its arguments.
std::pair<CompoundState, SettleOutcome> place(const CompoundState& compound,
                                              const ObjectSpec& spec, int slot,
                                              Orientation orientation);

// Same settle at an explicit release column; slot is recorded as given.
std::pair<CompoundState, SettleOutcome> place_at(const CompoundState& compound,
                                                 const ObjectSpec& spec, int slot,
                                                 double cx, double cy,
                                                 Orientation orientation);

// True iff any object moved laterally >= 20 cm from its release position or
// its orientation deviated >= 60 degrees.
bool check_collapse(const CompoundState& compound);

// Recomputes supports and constraint classification from poses alone; used
// for compounds assembled outside place() (the planner's hypothetical states).
void refresh_contact_annotations(CompoundState& compound);

// No pair of settled solids may interpenetrate; sampled check used by the
// property tests (returns the worst overlap depth found, 0 when clean).
bool scene_interpenetrates(const CompoundState& compound, Rng& rng, int lines_per_pair);

}  // namespace stacklab
