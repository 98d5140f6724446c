#pragma once

#include <array>
#include <vector>

#include "stacklab/simulator.hpp"

namespace stacklab {

// Per-queried-object effect values, in decimeters.
struct EffectEntry {
  std::array<double, 2> e1{};  // signed |top-top|, |bottom-bottom|
  std::array<double, 4> e2{};  // signed lateral offsets x+, x-, y+, y-
};

struct EffectRow {
  std::vector<EffectEntry> entries;  // one per compound member, placement order
  int e3 = 0;                        // shared collapse flag
};

// Sign rule: negative iff the new object's face center lies strictly closer
// to the queried object's center than the queried face center does; ties and
// zero values are positive.
double sign_adjust(double face_value, const Vec3& new_surface_center,
                   const Vec3& queried_surface_center, const Vec3& queried_center);

// Signed bounding-box height differences (top, bottom), decimeters.
std::array<double, 2> compute_e1(const Placement& placed, const Placement& queried);

// Four rays along +-x / +-y through the placed object's center at its
// mid-height; 0 exactly where a ray misses the queried object. Decimeters.
std::array<double, 4> compute_e2(const Placement& placed, const Placement& queried);

// 1 iff the post-placement compound fails the collapse check.
int compute_e3(const CompoundState& compound_after);

// One (e1, e2) entry per member of `before`, plus the shared e3 flag computed
// on `after` (= before + the settled placement).
EffectRow effect_row(const CompoundState& before, const Placement& placed,
                     const CompoundState& after);

}  // namespace stacklab
