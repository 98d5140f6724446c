#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "stacklab/geometry.hpp"
#include "stacklab/rng.hpp"
#include "test_oracles.hpp"

using namespace stacklab;

namespace {

ObjectSpec by_kind(ObjectKind kind, int nth = 0) {
  int seen = 0;
  for (const ObjectSpec& s : catalog_standard())
    if (s.kind == kind && seen++ == nth) return s;
  REQUIRE(false);
  return {};
}

Ray make_ray(const Vec3& origin, Vec3 dir) {
  const double n = dir.norm();
  return Ray{origin, dir * (1.0 / n)};
}

}  // namespace

TEST_CASE("standard catalog matches the inventory table") {
  const auto specs = catalog_standard();
  CHECK(specs.size() == 15);  // 1 pole, 5 balls, 1 cube, 5 rings, 3 cups
  CHECK(specs[0].kind == ObjectKind::Pole);
  CHECK(specs[0].height == doctest::Approx(0.17));
  CHECK(specs[0].outer_width == doctest::Approx(0.14));
  CHECK(std::count_if(specs.begin(), specs.end(),
                      [](const ObjectSpec& s) { return s.kind == ObjectKind::Ball; }) == 5);
  CHECK(std::count_if(specs.begin(), specs.end(),
                      [](const ObjectSpec& s) { return s.kind == ObjectKind::Ring; }) == 5);
  CHECK(std::count_if(specs.begin(), specs.end(),
                      [](const ObjectSpec& s) { return s.kind == ObjectKind::Cup; }) == 3);
  for (const ObjectSpec& s : specs) {
    CHECK(s.height > 0);
    CHECK(s.hole_radius < s.outer_width / 2);
    CHECK(s.cavity_radius < s.outer_width / 2);
    CHECK(s.cavity_depth < s.height);
    if (s.kind == ObjectKind::Cup)
      CHECK(s.cavity_depth == doctest::Approx(s.height - s.wall_thickness));
    if (s.kind == ObjectKind::Ring)  // every ring must pass over the pole shaft
      CHECK(s.hole_radius > catalog_standard()[0].hole_radius);
  }
}

TEST_CASE("bounding boxes") {
  const ObjectSpec cube = by_kind(ObjectKind::Cube);
  const Aabb b = bounding_box(cube, Pose{0, 0, 0, Orientation::Upright});
  CHECK(b.x_min == doctest::Approx(-0.05));
  CHECK(b.x_max == doctest::Approx(0.05));
  CHECK(b.z_min == doctest::Approx(0.0));
  CHECK(b.z_max == doctest::Approx(0.10));

  const ObjectSpec ball = by_kind(ObjectKind::Ball);
  const Aabb bb = bounding_box(ball, Pose{0.3, -0.1, 0, Orientation::Upright});
  CHECK(bb.z_max == doctest::Approx(0.05));

  // Aabb extents are orientation-symmetric for every catalog object
  for (const ObjectSpec& s : catalog_standard()) {
    const Aabb up = bounding_box(s, Pose{0.01, 0.02, 0.03, Orientation::Upright});
    const Aabb inv = bounding_box(s, Pose{0.01, 0.02, 0.03, Orientation::Inverted});
    CHECK(up.x_min == inv.x_min);
    CHECK(up.x_max == inv.x_max);
    CHECK(up.y_min == inv.y_min);
    CHECK(up.y_max == inv.y_max);
    CHECK(up.z_min == inv.z_min);
    CHECK(up.z_max == inv.z_max);
  }
}

TEST_CASE("ray through a centered cube") {
  const ObjectSpec cube = by_kind(ObjectKind::Cube);
  const Pose pose{0, 0, 0, Orientation::Upright};
  const Ray ray = make_ray({-1, 0, 0.05}, {1, 0, 0});
  const auto pts = ray_intersect(cube, pose, ray);
  REQUIRE(pts.size() == 2);
  CHECK(pts[0].x == doctest::Approx(-0.05));
  CHECK(pts[1].x == doctest::Approx(0.05));
}

TEST_CASE("ray through a ring hits four walls") {
  const ObjectSpec ring = by_kind(ObjectKind::Ring);
  const Pose pose{0, 0, 0, Orientation::Upright};
  const Ray ray = make_ray({-1, 0, ring.height / 2}, {1, 0, 0});
  const auto pts = ray_intersect(ring, pose, ray);
  REQUIRE(pts.size() == 4);
  CHECK(pts[0].x == doctest::Approx(-0.06));
  CHECK(pts[1].x == doctest::Approx(-0.04));
  CHECK(pts[2].x == doctest::Approx(0.04));
  CHECK(pts[3].x == doctest::Approx(0.06));
}

TEST_CASE("ray above the object misses") {
  const ObjectSpec cube = by_kind(ObjectKind::Cube);
  const Ray ray = make_ray({-1, 0, 0.2}, {1, 0, 0});
  CHECK(ray_intersect(cube, Pose{0, 0, 0, Orientation::Upright}, ray).empty());
}

TEST_CASE("ray crossings match the marching oracle on every catalog object") {
  Rng rng(20240901);
  const auto specs = catalog_standard();
  int checked = 0;
  for (int trial = 0; trial < 400; ++trial) {
    const ObjectSpec& spec = specs[static_cast<std::size_t>(rng.index(static_cast<int>(specs.size())))];
    const Pose pose{rng.uniform(-0.05, 0.05), rng.uniform(-0.05, 0.05),
                    rng.uniform(0.0, 0.05),
                    rng.index(2) == 0 ? Orientation::Upright : Orientation::Inverted};
    // random origin on a sphere well outside the object, aimed near it
    const double ang = rng.uniform(0, 6.283185307179586);
    const double elev = rng.uniform(-0.3, 0.3);
    const Vec3 origin{pose.x + 0.5 * std::cos(ang), pose.y + 0.5 * std::sin(ang),
                      pose.z + 0.1 + elev};
    const Vec3 target{pose.x + rng.uniform(-0.07, 0.07), pose.y + rng.uniform(-0.07, 0.07),
                      pose.z + rng.uniform(0.0, spec.height)};
    const Ray ray = make_ray(origin, target - origin);

    const auto pts = ray_intersect(spec, pose, ray);
    const auto oracle = testing::marching_crossings(spec, pose, ray, 1.2);
    REQUIRE(pts.size() == oracle.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const double t = (pts[i] - ray.origin).dot(ray.direction);
      CHECK(std::abs(t - oracle[i]) < 1e-4);
    }
    checked += static_cast<int>(pts.size());
  }
  CHECK(checked > 100);  // the sample must actually exercise hits
}

TEST_CASE("crossing count is even and points stay inside the bounding box") {
  Rng rng(7);
  const auto specs = catalog_standard();
  for (int trial = 0; trial < 10000; ++trial) {
    const ObjectSpec& spec = specs[static_cast<std::size_t>(rng.index(static_cast<int>(specs.size())))];
    const Pose pose{rng.uniform(-0.1, 0.1), rng.uniform(-0.1, 0.1), rng.uniform(0.0, 0.1),
                    rng.index(2) == 0 ? Orientation::Upright : Orientation::Inverted};
    const double ang = rng.uniform(0, 6.283185307179586);
    const Vec3 origin{pose.x + 0.6 * std::cos(ang), pose.y + 0.6 * std::sin(ang),
                      rng.uniform(0.0, 0.4)};
    const Vec3 target{pose.x + rng.uniform(-0.08, 0.08), pose.y + rng.uniform(-0.08, 0.08),
                      pose.z + rng.uniform(-0.02, spec.height + 0.02)};
    const Ray ray = make_ray(origin, target - origin);
    const auto pts = ray_intersect(spec, pose, ray);
    CHECK(pts.size() % 2 == 0);
    const Aabb box = bounding_box(spec, pose);
    for (const Vec3& p : pts) CHECK(box.contains(p, 1e-9));
  }
}

TEST_CASE("catalog export is valid JSON with six decimals") {
  const std::string json = catalog_to_json(catalog_standard());
  CHECK(json.find("\"kind\": \"pole\"") != std::string::npos);
  CHECK(json.find("0.170000") != std::string::npos);
  CHECK(std::count(json.begin(), json.end(), '{') == 15);
}
