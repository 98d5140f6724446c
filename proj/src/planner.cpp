#include "stacklab/planner.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <queue>

namespace stacklab {

const char* to_string(TaskKind k) {
  switch (k) {
    case TaskKind::Tallest: return "tallest";
    case TaskKind::Shortest: return "shortest";
    case TaskKind::Occluded: return "occluded";
    case TaskKind::Occluding: return "occluding";
    case TaskKind::SpecificHeight: return "specific_height";
    case TaskKind::PairConstraint: return "pair_constraint";
  }
  return "?";
}

TaskKind task_kind_from_string(const std::string& s) {
  for (TaskKind k : {TaskKind::Tallest, TaskKind::Shortest, TaskKind::Occluded,
                     TaskKind::Occluding, TaskKind::SpecificHeight,
                     TaskKind::PairConstraint})
    if (s == to_string(k)) return k;
  throw std::invalid_argument("unknown task: " + s);
}

double PlanNode::height_dm() const {
  double top = 0;
  for (const Member& m : members) top = std::max(top, m.top_m);
  return top * 10.0;
}

CompoundState PlanNode::hypothetical_compound() const {
  CompoundState c;
  for (const Member& m : members) {
    Placement p;
    p.spec = m.spec;
    p.slot = m.slot;
    p.step = c.size() + 1;
    p.pose = Pose{kSlotX[static_cast<std::size_t>(m.slot)], 0.0, m.bottom_m, m.orientation};
    p.release_x = p.pose.x;  // keeps the hypothetical compound collapse-free
    p.release_y = p.pose.y;
    c.placements.push_back(p);
  }
  refresh_contact_annotations(c);
  return c;
}

std::vector<LatentFeature> PlanNode::member_features() const {
  std::vector<LatentFeature> out;
  for (const Member& m : members) out.push_back(m.feature);
  return out;
}

namespace {

bool columns_overlap(const ObjectSpec& a, int slot_a, const ObjectSpec& b, int slot_b) {
  const double ax = kSlotX[static_cast<std::size_t>(slot_a)];
  const double bx = kSlotX[static_cast<std::size_t>(slot_b)];
  return std::abs(ax - bx) <= (a.outer_width + b.outer_width) / 2 + 0.001;
}

// chain the new object's top against the tallest member its column reaches
double chained_top(const PlanNode& node, const CandidateAction& action,
                   const std::vector<EffectEntry>& rows) {
  int best = -1;
  double best_top = 0;
  for (std::size_t i = 0; i < node.members.size(); ++i) {
    const PlanNode::Member& m = node.members[i];
    if (!columns_overlap(action.spec, action.slot, m.spec, m.slot)) continue;
    if (best < 0 || m.top_m > best_top) {
      best = static_cast<int>(i);
      best_top = m.top_m;
    }
  }
  if (best < 0) return action.spec.height;  // lands on the table
  return best_top + rows[static_cast<std::size_t>(best)].e1[0] / 10.0;
}

bool all_at_least(const std::array<double, 4>& v, double threshold, int sign) {
  for (double x : v) {
    if (std::abs(x) < threshold) return false;
    if (sign > 0 && x <= 0) return false;
    if (sign < 0 && x >= 0) return false;
  }
  return true;
}

std::vector<CandidateAction> action_set(const PlanNode& node, const Task& task) {
  std::vector<CandidateAction> actions;
  std::vector<ObjectSpec> remaining = node.remaining;
  std::sort(remaining.begin(), remaining.end(),
            [](const ObjectSpec& a, const ObjectSpec& b) { return a.id < b.id; });
  const bool last = remaining.size() == 1;
  for (const ObjectSpec& spec : remaining) {
    if (task.mode == Mode::Linear) {
      actions.push_back({spec, 1, Orientation::Upright});
      continue;
    }
    std::vector<int> slots{0, 1, 2};
    if (task.bridge) slots = last ? std::vector<int>{1} : std::vector<int>{0, 2};
    for (int slot : slots)
      for (Orientation o : {Orientation::Upright, Orientation::Inverted})
        actions.push_back({spec, slot, o});
  }
  return actions;
}

PlanNode make_child(const PlanNode& node, const CandidateAction& action,
                    const CandidatePrediction& pred, EffectPredictor& predictor,
                    const Task& task, double cutoff) {
  PlanNode child = node;
  child.actions.push_back({action.spec.id, action.slot, action.orientation});
  for (std::size_t i = 0; i < child.remaining.size(); ++i) {
    if (child.remaining[i].id == action.spec.id) {
      child.remaining.erase(child.remaining.begin() + static_cast<long>(i));
      break;
    }
  }
  PlanNode::Member m;
  m.spec = action.spec;
  m.slot = action.slot;
  m.orientation = action.orientation;
  m.feature = predictor.feature_of(action.spec, action.orientation);
  m.top_m = node.members.empty() ? action.spec.height
                                 : chained_top(node, action, pred.per_member);
  m.bottom_m = m.top_m - action.spec.height;
  child.members.push_back(m);
  child.pair_rows.push_back(pred.per_member);

  for (std::size_t i = 0; i < pred.per_member.size(); ++i) {
    const EffectEntry& e = pred.per_member[i];
    if (all_at_least(e.e2, kEnclosureThresholdDm, -1)) child.occluded_events += 1;
    if (all_at_least(e.e2, kEnclosureThresholdDm, +1)) child.occluding_events += 1;
    if (task.kind == TaskKind::PairConstraint) {
      const int earlier = node.members[i].spec.id;
      const int later = action.spec.id;
      const bool is_pair = (earlier == task.pair_a && later == task.pair_b) ||
                           (earlier == task.pair_b && later == task.pair_a);
      if (is_pair) child.pair_metric_dm = std::abs(e.e1[0]) + std::abs(e.e1[1]);
    }
  }
  child.max_collapse_prob = std::max(node.max_collapse_prob, pred.collapse_prob);
  child.collapse_pruned = pred.collapse_prob >= cutoff;
  child.score = score(child, task);
  return child;
}

}  // namespace

std::vector<PlanNode> expand(const PlanNode& node, EffectPredictor& predictor,
                             const Task& task, double cutoff) {
  std::vector<PlanNode> children;
  if (node.collapse_pruned) return children;
  const CompoundState compound = node.hypothetical_compound();
  const std::vector<LatentFeature> features = node.member_features();
  for (const CandidateAction& action : action_set(node, task)) {
    const CandidatePrediction pred = predictor.predict(compound, features, action);
    children.push_back(make_child(node, action, pred, predictor, task, cutoff));
  }
  return children;
}

double score(const PlanNode& node, const Task& task) {
  if (task.bridge) {
    double h0 = 0, h2 = 0;
    for (const PlanNode::Member& m : node.members) {
      if (m.slot == 0) h0 = std::max(h0, m.top_m);
      if (m.slot == 2) h2 = std::max(h2, m.top_m);
    }
    return -std::abs(h0 - h2) * 10.0 - node.max_collapse_prob;
  }
  switch (task.kind) {
    case TaskKind::Tallest: return node.height_dm();
    case TaskKind::Shortest: return -node.height_dm();
    case TaskKind::SpecificHeight: return -std::abs(node.height_dm() - task.target_dm);
    case TaskKind::Occluded: return static_cast<double>(node.occluded_events);
    case TaskKind::Occluding: return static_cast<double>(node.occluding_events);
    case TaskKind::PairConstraint: {
      if (node.pair_metric_dm < 0) return -1e9;  // pair not realized yet
      return task.pair_maximize ? node.pair_metric_dm : -node.pair_metric_dm;
    }
  }
  return 0;
}

namespace {

bool lexicographic_less(const std::vector<PlanAction>& a, const std::vector<PlanAction>& b) {
  for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) {
    if (a[i].object_id != b[i].object_id) return a[i].object_id < b[i].object_id;
    if (a[i].slot != b[i].slot) return a[i].slot < b[i].slot;
    if (a[i].orientation != b[i].orientation)
      return static_cast<int>(a[i].orientation) < static_cast<int>(b[i].orientation);
  }
  return a.size() < b.size();
}

long tree_leaves_estimate(std::size_t n, const Task& task) {
  long per_step = 1;
  if (task.mode == Mode::Nonlinear) per_step = task.bridge ? 4 : 6;
  long total = 1;
  for (std::size_t d = 1; d <= n; ++d) {
    if (total > 100000000L / (static_cast<long>(d) * per_step)) return 100000000L;
    total *= static_cast<long>(d) * per_step;
  }
  return total;
}

Plan plan_from(const PlanNode& leaf) {
  Plan p;
  p.actions = leaf.actions;
  p.predicted_score = leaf.score;
  p.predicted_height_dm = leaf.height_dm();
  p.max_collapse_prob = leaf.max_collapse_prob;
  return p;
}

}  // namespace

std::optional<Plan> search(const std::vector<ObjectSpec>& inventory, const Task& task,
                           EffectPredictor& predictor, long budget, double cutoff,
                           SearchStats* stats) {
  PlanNode root;
  root.remaining = inventory;
  std::optional<PlanNode> best;
  long expansions = 0;

  auto consider_leaf = [&](const PlanNode& leaf) {
    if (leaf.collapse_pruned) return;
    if (!best || leaf.score > best->score ||
        (leaf.score == best->score && lexicographic_less(leaf.actions, best->actions)))
      best = leaf;
  };

  const bool exhaustive = tree_leaves_estimate(inventory.size(), task) <= budget;
  if (exhaustive) {
    std::function<void(const PlanNode&)> dfs = [&](const PlanNode& node) {
      ++expansions;
      for (const PlanNode& child : expand(node, predictor, task, cutoff)) {
        if (child.collapse_pruned) continue;  // terminated branch
        if (child.remaining.empty())
          consider_leaf(child);
        else
          dfs(child);
      }
    };
    dfs(root);
  } else {
    // best-first on partial scores with a node budget
    auto cmp = [](const std::pair<double, std::shared_ptr<PlanNode>>& a,
                  const std::pair<double, std::shared_ptr<PlanNode>>& b) {
      return a.first < b.first;
    };
    std::priority_queue<std::pair<double, std::shared_ptr<PlanNode>>,
                        std::vector<std::pair<double, std::shared_ptr<PlanNode>>>,
                        decltype(cmp)>
        frontier(cmp);
    frontier.push({0.0, std::make_shared<PlanNode>(root)});
    while (!frontier.empty() && expansions < budget) {
      const auto [prio, node] = frontier.top();
      frontier.pop();
      ++expansions;
      for (PlanNode& child : expand(*node, predictor, task, cutoff)) {
        if (child.collapse_pruned) continue;
        if (child.remaining.empty()) {
          consider_leaf(child);
        } else {
          const double p = child.score;
          frontier.push({p, std::make_shared<PlanNode>(std::move(child))});
        }
      }
    }
  }
  if (stats) {
    stats->expansions = expansions;
    stats->exhaustive = exhaustive;
  }
  if (!best) return std::nullopt;  // NoFeasiblePlan
  return plan_from(*best);
}

namespace {

struct Execution {
  CompoundState compound;
  std::vector<std::vector<EffectEntry>> rows;
  bool collapsed = false;
};

Execution run_plan(const std::vector<PlanAction>& actions,
                   const std::vector<ObjectSpec>& inventory) {
  Execution ex;
  for (const PlanAction& a : actions) {
    const auto it = std::find_if(inventory.begin(), inventory.end(),
                                 [&](const ObjectSpec& s) { return s.id == a.object_id; });
    auto [after, outcome] = place(ex.compound, *it, a.slot, a.orientation);
    const EffectRow row = effect_row(ex.compound, after.placements.back(), after);
    ex.rows.push_back(row.entries);
    ex.compound = std::move(after);
    if (row.e3 == 1) {
      ex.collapsed = true;
      break;
    }
  }
  return ex;
}

}  // namespace

double task_metric(const CompoundState& compound,
                   const std::vector<std::vector<EffectEntry>>& rows, const Task& task) {
  if (task.bridge) return bridge_predicate(compound) ? 1.0 : 0.0;
  switch (task.kind) {
    case TaskKind::Tallest:
    case TaskKind::Shortest:
    case TaskKind::SpecificHeight: {
      double top = 0;
      for (const Placement& p : compound.placements)
        top = std::max(top, p.pose.z + p.spec.height);
      return top * 10.0;
    }
    case TaskKind::Occluded: {
      int events = 0;
      for (const auto& step_rows : rows)
        for (const EffectEntry& e : step_rows)
          events += all_at_least(e.e2, kEnclosureThresholdDm, -1);
      return events;
    }
    case TaskKind::Occluding: {
      int events = 0;
      for (const auto& step_rows : rows)
        for (const EffectEntry& e : step_rows)
          events += all_at_least(e.e2, kEnclosureThresholdDm, +1);
      return events;
    }
    case TaskKind::PairConstraint: {
      for (std::size_t later = 0; later < compound.placements.size(); ++later) {
        for (std::size_t earlier = 0; earlier < later; ++earlier) {
          const int id_l = compound.placements[later].spec.id;
          const int id_e = compound.placements[earlier].spec.id;
          const bool is_pair = (id_e == task.pair_a && id_l == task.pair_b) ||
                               (id_e == task.pair_b && id_l == task.pair_a);
          if (is_pair) {
            const EffectEntry& e = rows[later][earlier];
            return std::abs(e.e1[0]) + std::abs(e.e1[1]);
          }
        }
      }
      return 0;
    }
  }
  return 0;
}

std::vector<double> achievable_metrics(const std::vector<ObjectSpec>& inventory,
                                       const Task& task) {
  std::vector<double> metrics;
  std::vector<PlanAction> actions;
  std::vector<char> used(inventory.size(), 0);

  std::function<void(Execution&)> dfs = [&](Execution& ex) {
    bool complete = true;
    for (std::size_t i = 0; i < inventory.size(); ++i) {
      if (used[i]) continue;
      complete = false;
      std::vector<int> slots{1};
      std::vector<Orientation> orients{Orientation::Upright};
      if (task.mode == Mode::Nonlinear) {
        slots = {0, 1, 2};
        orients = {Orientation::Upright, Orientation::Inverted};
      }
      for (int slot : slots) {
        for (Orientation o : orients) {
          auto [after, outcome] = place(ex.compound, inventory[i], slot, o);
          const EffectRow row = effect_row(ex.compound, after.placements.back(), after);
          if (row.e3 == 1) continue;  // collapsing orderings are excluded
          Execution next;
          next.compound = std::move(after);
          next.rows = ex.rows;
          next.rows.push_back(row.entries);
          used[i] = 1;
          dfs(next);
          used[i] = 0;
        }
      }
    }
    if (complete) metrics.push_back(task_metric(ex.compound, ex.rows, task));
  };
  Execution root;
  dfs(root);
  std::sort(metrics.begin(), metrics.end());
  metrics.erase(std::unique(metrics.begin(), metrics.end(),
                            [](double a, double b) { return std::abs(a - b) < 1e-9; }),
                metrics.end());
  return metrics;
}

bool bridge_predicate(const CompoundState& compound) {
  for (const Placement& p : compound.placements) {
    if (p.slot != 1 || p.tipped || p.pose.z <= 0.02) continue;
    bool on_left = false, on_right = false;
    for (int s : p.supports) {
      const Placement& below = compound.placements[static_cast<std::size_t>(s)];
      on_left |= below.slot == 0;
      on_right |= below.slot == 2;
    }
    if (on_left && on_right) return true;
  }
  return false;
}

VerifyReport execute_and_verify(const std::optional<Plan>& plan, const Task& task,
                                const std::vector<ObjectSpec>& inventory) {
  VerifyReport report;
  if (!plan) {
    report.failure = "no_feasible_plan";
    return report;
  }
  report.plan_found = true;
  report.predicted = plan->predicted_score;
  const Execution ex = run_plan(plan->actions, inventory);
  if (ex.collapsed || ex.compound.size() != static_cast<int>(inventory.size())) {
    report.failure = "collapse_during_execution";
    return report;
  }
  report.executed = true;
  report.achieved = task_metric(ex.compound, ex.rows, task);

  if (task.bridge) {
    report.optimum = 1.0;
    report.success = report.achieved == 1.0;
    if (!report.success) report.failure = "not_a_bridge";
    return report;
  }

  const std::vector<double> metrics = achievable_metrics(inventory, task);
  if (metrics.empty()) {
    report.failure = "no_complete_ordering_exists";
    return report;
  }
  switch (task.kind) {
    case TaskKind::Shortest: report.optimum = metrics.front(); break;
    case TaskKind::SpecificHeight: {
      // closest achievable value to the target
      double best = metrics.front();
      for (double m : metrics)
        if (std::abs(m - task.target_dm) < std::abs(best - task.target_dm)) best = m;
      report.optimum = best;
      break;
    }
    case TaskKind::PairConstraint:
      report.optimum = task.pair_maximize ? metrics.back() : metrics.front();
      break;
    default: report.optimum = metrics.back(); break;  // maximize
  }
  report.success = std::abs(report.achieved - report.optimum) < 1e-9;
  if (!report.success) report.failure = "suboptimal_metric";
  return report;
}

}  // namespace stacklab
