#pragma once

#include <optional>
#include <string>

#include "stacklab/predictor.hpp"

namespace stacklab {

enum class TaskKind { Tallest, Shortest, Occluded, Occluding, SpecificHeight, PairConstraint };

const char* to_string(TaskKind k);
TaskKind task_kind_from_string(const std::string& s);

struct Task {
  TaskKind kind = TaskKind::Tallest;
  Mode mode = Mode::Linear;
  double target_dm = 0;            // SpecificHeight
  int pair_a = -1, pair_b = -1;    // PairConstraint object ids, a != b
  bool pair_maximize = true;
  bool bridge = false;             // goal shape for the nonlinear bridge task
};

struct PlanAction {
  int object_id = 0;
  int slot = 1;
  Orientation orientation = Orientation::Upright;

  bool operator==(const PlanAction&) const = default;
};

// Search-tree node: partial plan with predicted member extents (top-surface
// chain from e1 top components), the accumulated per-pair effect ledger, and
// collapse pruning state.
struct PlanNode {
  struct Member {
    ObjectSpec spec;
    int slot = 1;
    Orientation orientation = Orientation::Upright;
    LatentFeature feature;
    double top_m = 0;     // predicted extents, meters
    double bottom_m = 0;
  };

  std::vector<PlanAction> actions;
  std::vector<Member> members;
  std::vector<ObjectSpec> remaining;
  std::vector<std::vector<EffectEntry>> pair_rows;  // per placed member: rows vs earlier
  double pair_metric_dm = -1;  // L1 |e1| between the task pair once both placed
  int occluded_events = 0;     // new object inserted inside a member
  int occluding_events = 0;    // member enclosed by the new object
  double max_collapse_prob = 0;
  bool collapse_pruned = false;
  double score = 0;

  double height_dm() const;  // max predicted member top, decimeters
  CompoundState hypothetical_compound() const;
  std::vector<LatentFeature> member_features() const;
};

struct Plan {
  std::vector<PlanAction> actions;
  double predicted_score = 0;
  double predicted_height_dm = 0;
  double max_collapse_prob = 0;
};

// Lateral enclosure signature: all four components at least this large (dm).
inline constexpr double kEnclosureThresholdDm = 0.05;

// One child per (remaining object x slot x orientation) allowed by the task's
// mode; children whose predicted collapse probability reaches `cutoff` are
// marked collapse-pruned and get no successors.
std::vector<PlanNode> expand(const PlanNode& node, EffectPredictor& predictor,
                             const Task& task, double cutoff);

// Leaf/partial score, larger is better.
double score(const PlanNode& node, const Task& task);

struct SearchStats {
  long expansions = 0;
  bool exhaustive = true;
};

// Exhaustive depth-first enumeration with collapse pruning when the action
// tree fits the budget, best-first otherwise. Empty result = NoFeasiblePlan.
std::optional<Plan> search(const std::vector<ObjectSpec>& inventory, const Task& task,
                           EffectPredictor& predictor, long budget = 200000,
                           double cutoff = 0.5, SearchStats* stats = nullptr);

struct VerifyReport {
  bool plan_found = false;
  bool executed = false;  // ran to completion without collapse
  bool success = false;   // metric matches the brute-force optimum / predicate
  double achieved = 0;
  double optimum = 0;
  double predicted = 0;
  std::string failure;
};

// Executes the plan in the simulator and scores it against the ground-truth
// optimum (brute-force enumeration over orderings for linear tasks, the
// bridge predicate for the bridge goal).
VerifyReport execute_and_verify(const std::optional<Plan>& plan, const Task& task,
                                const std::vector<ObjectSpec>& inventory);

// Ground-truth task metric of a fully executed compound.
double task_metric(const CompoundState& compound,
                   const std::vector<std::vector<EffectEntry>>& rows, const Task& task);

// All achievable (non-collapsing, complete) metric values for the inventory.
std::vector<double> achievable_metrics(const std::vector<ObjectSpec>& inventory,
                                       const Task& task);

bool bridge_predicate(const CompoundState& compound);

}  // namespace stacklab
