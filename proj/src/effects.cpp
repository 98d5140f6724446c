#include "stacklab/effects.hpp"

#include <cmath>

namespace stacklab {

namespace {
constexpr double kMetersToDm = 10.0;

double axis_coord(const Vec3& p, int axis) { return axis == 0 ? p.x : p.y; }
}  // namespace

double sign_adjust(double face_value, const Vec3& new_surface_center,
                   const Vec3& queried_surface_center, const Vec3& queried_center) {
  if (face_value == 0.0) return 0.0;  // zero-difference sign fixed to +
  const double d_new = (new_surface_center - queried_center).norm();
  const double d_queried = (queried_surface_center - queried_center).norm();
  return d_new < d_queried - 1e-12 ? -face_value : face_value;
}

std::array<double, 2> compute_e1(const Placement& placed, const Placement& queried) {
  const Aabb n = bounding_box(placed.spec, placed.pose);
  const Aabb q = bounding_box(queried.spec, queried.pose);
  const Vec3 qc = q.center();

  const double top_value = std::abs(q.z_max - n.z_max);
  const Vec3 n_top{(n.x_min + n.x_max) / 2, (n.y_min + n.y_max) / 2, n.z_max};
  const Vec3 q_top{qc.x, qc.y, q.z_max};

  const double bot_value = std::abs(q.z_min - n.z_min);
  const Vec3 n_bot{(n.x_min + n.x_max) / 2, (n.y_min + n.y_max) / 2, n.z_min};
  const Vec3 q_bot{qc.x, qc.y, q.z_min};

  return {kMetersToDm * sign_adjust(top_value, n_top, q_top, qc),
          kMetersToDm * sign_adjust(bot_value, n_bot, q_bot, qc)};
}

std::array<double, 4> compute_e2(const Placement& placed, const Placement& queried) {
  const Aabb n = bounding_box(placed.spec, placed.pose);
  const Aabb q = bounding_box(queried.spec, queried.pose);
  const Vec3 qc = q.center();
  const Vec3 origin = n.center();  // rays through the center at mid-height

  const std::array<Vec3, 4> dirs = {Vec3{1, 0, 0}, Vec3{-1, 0, 0}, Vec3{0, 1, 0},
                                    Vec3{0, -1, 0}};
  const std::array<int, 4> axes = {0, 0, 1, 1};

  std::array<double, 4> out{};
  for (int k = 0; k < 4; ++k) {
    const Ray ray{origin, dirs[k]};
    const auto new_hits = ray_intersect(placed.spec, placed.pose, ray);
    const auto q_hits = ray_intersect(queried.spec, queried.pose, ray);
    if (new_hits.empty() || q_hits.empty()) {
      out[k] = 0.0;  // a miss is exactly zero
      continue;
    }
    // outermost crossing along the ray = the face the ray exits through
    const Vec3& n_face = new_hits.back();
    const Vec3& q_face = q_hits.back();
    const double value = std::abs(axis_coord(n_face, axes[k]) - axis_coord(q_face, axes[k]));
    out[k] = kMetersToDm * sign_adjust(value, n_face, q_face, qc);
  }
  return out;
}

int compute_e3(const CompoundState& compound_after) {
  return check_collapse(compound_after) ? 1 : 0;
}

EffectRow effect_row(const CompoundState& before, const Placement& placed,
                     const CompoundState& after) {
  EffectRow row;
  const std::size_t k = before.placements.size();
  row.entries.reserve(k);
  // queried members are read from the post-placement scene so that a collapse
  // measures the displaced poses
  for (std::size_t i = 0; i < k; ++i) {
    const Placement& member = after.placements[i];
    EffectEntry e;
    e.e1 = compute_e1(placed, member);
    e.e2 = compute_e2(placed, member);
    row.entries.push_back(e);
  }
  row.e3 = compute_e3(after);
  return row;
}

}  // namespace stacklab
