#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "stacklab/planner.hpp"

using namespace stacklab;

namespace {

ObjectSpec by_kind(ObjectKind kind, int nth = 0) {
  for (int seen = 0; const ObjectSpec& s : catalog_standard())
    if (s.kind == kind && seen++ == nth) return s;
  REQUIRE(false);
  return {};
}

const ObjectSpec kPole = by_kind(ObjectKind::Pole);
const ObjectSpec kCube = by_kind(ObjectKind::Cube);
const ObjectSpec kBall = by_kind(ObjectKind::Ball);
const ObjectSpec kRing0 = by_kind(ObjectKind::Ring, 0);
const ObjectSpec kRing1 = by_kind(ObjectKind::Ring, 1);
const ObjectSpec kBigCup = by_kind(ObjectKind::Cup, 0);

ObjectSpec with_id(ObjectSpec s, int id) {
  s.id = id;
  return s;
}

}  // namespace

TEST_CASE("expand produces one child per allowed action") {
  OraclePredictor oracle;
  Task linear{TaskKind::Tallest, Mode::Linear};
  PlanNode root;
  root.remaining = {kPole, kRing0, kCube};
  const auto children = expand(root, oracle, linear, 0.5);
  CHECK(children.size() == 3);  // linear: slot 1, upright only

  Task nonlinear{TaskKind::Tallest, Mode::Nonlinear};
  PlanNode nroot;
  nroot.remaining = {kCube};
  const auto nchildren = expand(nroot, oracle, nonlinear, 0.5);
  CHECK(nchildren.size() == 6);  // 3 slots x 2 orientations
}

TEST_CASE("ball-on-ball children are collapse-pruned under the oracle") {
  OraclePredictor oracle;
  Task task{TaskKind::Tallest, Mode::Linear};
  PlanNode root;
  root.remaining = {kBall, with_id(kBall, 50)};
  auto children = expand(root, oracle, task, 0.5);
  REQUIRE(children.size() == 2);
  for (const PlanNode& c : children) {
    CHECK_FALSE(c.collapse_pruned);  // first ball on the table is fine
    const auto grand = expand(c, oracle, task, 0.5);
    REQUIRE(grand.size() == 1);
    CHECK(grand[0].collapse_pruned);  // second ball tops the first: e3 = 1
  }
  // and search returns NoFeasiblePlan rather than a collapsing plan
  const auto plan = search(root.remaining, task, oracle);
  CHECK_FALSE(plan.has_value());
}

TEST_CASE("shortest plan for pole and two rings uses the pole as the base") {
  OraclePredictor oracle;
  Task task{TaskKind::Shortest, Mode::Linear};
  const std::vector<ObjectSpec> inventory{kPole, kRing0, kRing1};
  const auto plan = search(inventory, task, oracle);
  REQUIRE(plan.has_value());
  CHECK(plan->actions[0].object_id == kPole.id);
  CHECK(plan->predicted_height_dm == doctest::Approx(1.7));
  const VerifyReport report = execute_and_verify(plan, task, inventory);
  CHECK(report.executed);
  CHECK(report.success);
  CHECK(report.achieved == doctest::Approx(1.7));
}

TEST_CASE("tallest plan stacks the rings first and the pole last") {
  OraclePredictor oracle;
  Task task{TaskKind::Tallest, Mode::Linear};
  const std::vector<ObjectSpec> inventory{kPole, kRing0, kRing1};
  const auto plan = search(inventory, task, oracle);
  REQUIRE(plan.has_value());
  CHECK(plan->actions.back().object_id == kPole.id);
  CHECK(plan->actions[0].object_id != kPole.id);
  CHECK(plan->predicted_height_dm == doctest::Approx(2.25));
  const VerifyReport report = execute_and_verify(plan, task, inventory);
  CHECK(report.success);
  CHECK(report.achieved == doctest::Approx(2.25));
}

TEST_CASE("single cube at a specific height") {
  OraclePredictor oracle;
  Task task{TaskKind::SpecificHeight, Mode::Linear};
  task.target_dm = 1.0;
  const std::vector<ObjectSpec> inventory{kCube};
  const auto plan = search(inventory, task, oracle);
  REQUIRE(plan.has_value());
  CHECK(plan->actions.size() == 1);
  CHECK(plan->predicted_score == doctest::Approx(0.0));  // -|error|
  const VerifyReport report = execute_and_verify(plan, task, inventory);
  CHECK(report.success);
}

TEST_CASE("search is deterministic including tie-breaks") {
  OraclePredictor oracle;
  Task task{TaskKind::Tallest, Mode::Linear};
  // two identical balls inserted into the cup: symmetric tie
  const std::vector<ObjectSpec> inventory{kBigCup, with_id(kBall, 30), with_id(kBall, 31)};
  const auto a = search(inventory, task, oracle);
  const auto b = search(inventory, task, oracle);
  REQUIRE(a.has_value());
  REQUIRE(b.has_value());
  CHECK(a->actions == b->actions);
  // lexicographic tie-break places the smaller object id first
  bool saw30_before31 = false;
  for (const PlanAction& act : a->actions) {
    if (act.object_id == 30) saw30_before31 = true;
    if (act.object_id == 31) CHECK(saw30_before31);
  }
}

TEST_CASE("occluded task favours insertion") {
  OraclePredictor oracle;
  Task task{TaskKind::Occluded, Mode::Linear};
  const std::vector<ObjectSpec> inventory{kBigCup, kBall};
  const auto plan = search(inventory, task, oracle);
  REQUIRE(plan.has_value());
  // cup first, then the ball disappears into it
  CHECK(plan->actions[0].object_id == kBigCup.id);
  const VerifyReport report = execute_and_verify(plan, task, inventory);
  CHECK(report.success);
  CHECK(report.achieved == doctest::Approx(1.0));
}

TEST_CASE("pair constraint maximizes the height gap") {
  OraclePredictor oracle;
  Task task{TaskKind::PairConstraint, Mode::Linear};
  task.pair_a = kPole.id;
  task.pair_b = kRing0.id;
  task.pair_maximize = true;
  const std::vector<ObjectSpec> inventory{kPole, kRing0, kCube};
  const auto plan = search(inventory, task, oracle);
  REQUIRE(plan.has_value());
  const VerifyReport report = execute_and_verify(plan, task, inventory);
  CHECK(report.executed);
  CHECK(report.success);
}

TEST_CASE("oracle planner is perfect for tallest and shortest at sizes 2 and 3") {
  OraclePredictor oracle;
  const auto pool = episode_pool(Mode::Linear);
  for (TaskKind kind : {TaskKind::Tallest, TaskKind::Shortest}) {
    Task task{kind, Mode::Linear};
    for (int size : {2, 3}) {
      int verified = 0, trials = 0;
      for (std::uint64_t seed = 1; trials < 4; ++seed) {
        Rng rng(seed * 977);
        std::vector<ObjectSpec> available = pool;
        std::vector<ObjectSpec> inventory;
        for (int i = 0; i < size; ++i) {
          const int pick = rng.index(static_cast<int>(available.size()));
          inventory.push_back(available[static_cast<std::size_t>(pick)]);
          available.erase(available.begin() + pick);
        }
        if (achievable_metrics(inventory, task).empty()) continue;  // vacuous
        ++trials;
        const auto plan = search(inventory, task, oracle);
        const VerifyReport report = execute_and_verify(plan, task, inventory);
        verified += report.success ? 1 : 0;
      }
      CHECK(verified == trials);
    }
  }
}

TEST_CASE("pruning soundness: no pruned branch contains the optimum") {
  OraclePredictor oracle;
  Task task{TaskKind::Tallest, Mode::Linear};
  const std::vector<ObjectSpec> inventory{kBigCup, kBall, kCube};
  const auto plan = search(inventory, task, oracle);
  REQUIRE(plan.has_value());
  const VerifyReport report = execute_and_verify(plan, task, inventory);
  // the brute-force optimum over non-collapsing orderings is reached even
  // though collapse pruning cut parts of the tree
  CHECK(report.success);
}

TEST_CASE("bridge with three cubes under the oracle") {
  OraclePredictor oracle;
  Task task;
  task.mode = Mode::Nonlinear;
  task.bridge = true;
  const std::vector<ObjectSpec> inventory{with_id(kCube, 0), with_id(kCube, 1),
                                          with_id(kCube, 2)};
  const auto plan = search(inventory, task, oracle, 200000, 0.5);
  REQUIRE(plan.has_value());
  CHECK(plan->actions.back().slot == 1);  // deck in the middle
  const VerifyReport report = execute_and_verify(plan, task, inventory);
  CHECK(report.executed);
  CHECK(report.success);

  // executing it really builds a bridge
  CompoundState c;
  for (const PlanAction& a : plan->actions) {
    const auto it = std::find_if(inventory.begin(), inventory.end(),
                                 [&](const ObjectSpec& s) { return s.id == a.object_id; });
    auto [next, _] = place(c, *it, a.slot, a.orientation);
    c = next;
  }
  CHECK(bridge_predicate(c));
}

TEST_CASE("bridge needs equal legs: unequal heights give no feasible plan") {
  OraclePredictor oracle;
  Task task;
  task.mode = Mode::Nonlinear;
  task.bridge = true;
  // cube leg vs ball leg: deck always rests on one side only and topples
  const std::vector<ObjectSpec> inventory{with_id(kCube, 0), with_id(kBall, 1),
                                          with_id(kCube, 2)};
  const auto plan = search(inventory, task, oracle, 200000, 0.5);
  if (plan) {
    const VerifyReport report = execute_and_verify(plan, task, inventory);
    CHECK_FALSE(report.success);
  } else {
    CHECK_FALSE(plan.has_value());
  }
}
