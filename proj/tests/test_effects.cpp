#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "stacklab/dataset.hpp"
#include "stacklab/effects.hpp"

using namespace stacklab;

namespace {

ObjectSpec by_kind(ObjectKind kind, int nth = 0) {
  int seen = 0;
  for (const ObjectSpec& s : catalog_standard())
    if (s.kind == kind && seen++ == nth) return s;
  REQUIRE(false);
  return {};
}

const ObjectSpec kPole = by_kind(ObjectKind::Pole);
const ObjectSpec kCube = by_kind(ObjectKind::Cube);
const ObjectSpec kBall = by_kind(ObjectKind::Ball);
const ObjectSpec kRing0 = by_kind(ObjectKind::Ring, 0);
const ObjectSpec kBigCup = by_kind(ObjectKind::Cup, 0);
const ObjectSpec kSmallCup = by_kind(ObjectKind::Cup, 2);

CompoundState translated(const CompoundState& c, double dx, double dy) {
  CompoundState out = c;
  for (Placement& p : out.placements) {
    p.pose.x += dx;
    p.pose.y += dy;
    p.release_x += dx;
    p.release_y += dy;
  }
  return out;
}

}  // namespace

TEST_CASE("sign rule basics") {
  // new top above the queried top points away from the queried center
  CHECK(sign_adjust(0.1, {0, 0, 0.2}, {0, 0, 0.1}, {0, 0, 0.05}) == doctest::Approx(0.1));
  // new face closer to the queried center is negative
  CHECK(sign_adjust(0.12, {0, 0, 0.05}, {0, 0, 0.17}, {0, 0, 0.085}) ==
        doctest::Approx(-0.12));
  // coincident faces: value 0, sign fixed positive
  CHECK(sign_adjust(0.0, {0, 0, 0.1}, {0, 0, 0.1}, {0, 0, 0.05}) == 0.0);
  CHECK(!std::signbit(sign_adjust(0.0, {0, 0, 0.0}, {0, 0, 0.1}, {0, 0, 0.05})));
}

TEST_CASE("e1 for cube stacked on cube is (+1, +1) dm") {
  auto [c1, _] = place(CompoundState{}, kCube, 1, Orientation::Upright);
  ObjectSpec cube2 = kCube;
  cube2.id = 90;
  auto [c2, o2] = place(c1, cube2, 1, Orientation::Upright);
  REQUIRE(o2.kind == SettleKind::StackedOnTop);
  const auto e1 = compute_e1(c2.placements[1], c2.placements[0]);
  CHECK(e1[0] == doctest::Approx(1.0));
  CHECK(e1[1] == doctest::Approx(1.0));
}

TEST_CASE("e1 for a ring passed onto the pole base is negative on both faces") {
  auto [c1, _] = place(CompoundState{}, kPole, 1, Orientation::Upright);
  auto [c2, o2] = place(c1, kRing0, 1, Orientation::Upright);
  REQUIRE(o2.kind == SettleKind::PassedOverPole);
  const auto e1 = compute_e1(c2.placements[1], c2.placements[0]);
  // ring top 0.05 vs pole top 0.17; ring bottom 0.02 vs pole bottom 0
  CHECK(e1[0] == doctest::Approx(-1.2));
  CHECK(e1[1] == doctest::Approx(-0.2));
}

TEST_CASE("e1 of an object against itself is zero") {
  auto [c1, _] = place(CompoundState{}, kCube, 1, Orientation::Upright);
  const auto e1 = compute_e1(c1.placements[0], c1.placements[0]);
  CHECK(e1[0] == 0.0);
  CHECK(e1[1] == 0.0);
}

TEST_CASE("e2 is zero for vertically separated stacks") {
  auto [c1, _] = place(CompoundState{}, kCube, 1, Orientation::Upright);
  ObjectSpec cube2 = kCube;
  cube2.id = 90;
  auto [c2, o2] = place(c1, cube2, 1, Orientation::Upright);
  const auto e2 = compute_e2(c2.placements[1], c2.placements[0]);
  for (double v : e2) CHECK(v == 0.0);  // rays at the new mid-height miss below
}

TEST_CASE("e2 for a ring around the pole shaft: positive shaft-to-wall gaps") {
  auto [c1, _] = place(CompoundState{}, kPole, 1, Orientation::Upright);
  auto [c2, o2] = place(c1, kRing0, 1, Orientation::Upright);
  REQUIRE(o2.kind == SettleKind::PassedOverPole);
  const auto e2 = compute_e2(c2.placements[1], c2.placements[0]);
  // ring outer face 0.06 vs shaft face 0.015, in dm, enclosing = positive
  for (double v : e2) CHECK(v == doctest::Approx(0.45));
}

TEST_CASE("e2 for a ball inserted in the big cup: negative half-extent gaps") {
  auto [c1, _] = place(CompoundState{}, kBigCup, 1, Orientation::Upright);
  auto [c2, o2] = place(c1, kBall, 1, Orientation::Upright);
  REQUIRE(o2.kind == SettleKind::InsertedInCavity);
  const auto e2 = compute_e2(c2.placements[1], c2.placements[0]);
  // closed-form Aabb arithmetic: ball half extent 0.025, cup half extent
  // 0.0525, inserted = negative
  for (double v : e2) CHECK(v == doctest::Approx(-(0.0525 - 0.025) * 10));
  const auto e1 = compute_e1(c2.placements[1], c2.placements[0]);
  CHECK(e1[0] == doctest::Approx(-0.4));  // ball top 0.06 vs cup top 0.10
  CHECK(e1[1] == doctest::Approx(-0.1));  // ball bottom 0.01 vs cup bottom 0
}

TEST_CASE("covering cup produces positive lateral effects on the covered cup") {
  auto [c1, _] = place(CompoundState{}, kSmallCup, 1, Orientation::Upright);
  auto [c2, o2] = place(c1, kBigCup, 1, Orientation::Inverted);
  REQUIRE(c2.placements[1].pose.z == doctest::Approx(0.0));
  const auto e2 = compute_e2(c2.placements[1], c2.placements[0]);
  // big cup wall outer 0.0525 vs small cup wall outer 0.0325 at ray height
  for (double v : e2) CHECK(v == doctest::Approx((0.0525 - 0.0325) * 10));
}

TEST_CASE("e3 mirrors the collapse check") {
  auto [c1, _] = place(CompoundState{}, kCube, 1, Orientation::Upright);
  CHECK(compute_e3(c1) == 0);
  auto [c2, o2] = place(c1, kBall, 1, Orientation::Upright);  // point contact
  CHECK(o2.kind == SettleKind::ToppledOff);
  CHECK(compute_e3(c2) == 1);
  ObjectSpec cube2 = kCube;
  cube2.id = 91;
  auto [c3, o3] = place(c1, cube2, 1, Orientation::Upright);
  CHECK(compute_e3(c3) == 0);
}

TEST_CASE("effect row cardinality and self-consistency") {
  auto [c1, _1] = place(CompoundState{}, kPole, 1, Orientation::Upright);
  auto [c2, _2] = place(c1, kRing0, 1, Orientation::Upright);
  auto [c3, _3] = place(c2, by_kind(ObjectKind::Ring, 1), 1, Orientation::Upright);
  ObjectSpec ring3 = by_kind(ObjectKind::Ring, 2);
  auto [c4, o4] = place(c3, ring3, 1, Orientation::Upright);
  const EffectRow row = effect_row(c3, c4.placements.back(), c4);
  REQUIRE(row.entries.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    const auto e1 = compute_e1(c4.placements.back(), c4.placements[i]);
    const auto e2 = compute_e2(c4.placements.back(), c4.placements[i]);
    CHECK(row.entries[i].e1 == e1);
    CHECK(row.entries[i].e2 == e2);
  }
  // first placement: empty entry list, e3 defined
  const EffectRow first = effect_row(CompoundState{}, c1.placements[0], c1);
  CHECK(first.entries.empty());
  CHECK(first.e3 == 0);
}

TEST_CASE("effects are translation invariant") {
  auto [c1, _1] = place(CompoundState{}, kBigCup, 1, Orientation::Upright);
  auto [c2, _2] = place(c1, kBall, 1, Orientation::Upright);
  const CompoundState moved = translated(c2, 0.35, -0.2);
  const auto a1 = compute_e1(c2.placements[1], c2.placements[0]);
  const auto b1 = compute_e1(moved.placements[1], moved.placements[0]);
  CHECK(a1 == b1);
  const auto a2 = compute_e2(c2.placements[1], c2.placements[0]);
  const auto b2 = compute_e2(moved.placements[1], moved.placements[0]);
  for (int i = 0; i < 4; ++i) CHECK(a2[i] == doctest::Approx(b2[i]).epsilon(1e-12));
}

TEST_CASE("decimeter units are exactly 10x the meter geometry") {
  auto [c1, _1] = place(CompoundState{}, kPole, 1, Orientation::Upright);
  auto [c2, _2] = place(c1, kRing0, 1, Orientation::Upright);
  const auto e1 = compute_e1(c2.placements[1], c2.placements[0]);
  const Aabb n = bounding_box(kRing0, c2.placements[1].pose);
  const Aabb q = bounding_box(kPole, c2.placements[0].pose);
  CHECK(std::abs(e1[0]) == doctest::Approx(10.0 * std::abs(q.z_max - n.z_max)));
}

TEST_CASE("e3 equals the simulator collapsed flag over a fuzz run") {
  const auto records =
      generate_dataset(1234, 400, episode_pool(Mode::Linear), Mode::Linear, 5);
  REQUIRE(records.size() >= 400);
  for (const auto& r : records) {
    const bool fell = r.outcome == SettleKind::ToppledOff ||
                      r.outcome == SettleKind::CompoundCollapsed;
    CHECK(r.e3 == (fell ? 1 : 0));
  }
}
