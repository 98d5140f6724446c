#include "stacklab/simulator.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>

namespace stacklab {

namespace {

constexpr double kContactTol = 1e-9;
constexpr double kStableMargin = 0.01;   // support patch eroded by 1 cm
constexpr double kToppleShift = 0.30;
constexpr double kTwoPi = 6.283185307179586;

// ---------------------------------------------------------------------------
// 2-D footprint regions of solid pieces

struct Region {
  enum class Shape { Rect, Ring };
  Shape shape;
  double cx, cy;
  double hx = 0, hy = 0;          // Rect half extents
  double inner = 0, outer = 0;    // Ring radii

  bool contains(double x, double y) const {
    if (shape == Shape::Rect) return std::abs(x - cx) <= hx && std::abs(y - cy) <= hy;
    const double d2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
    return d2 >= inner * inner && d2 <= outer * outer;
  }
};

double point_to_region_distance(double x, double y, const Region& r) {
  if (r.shape == Region::Shape::Rect) {
    const double dx = std::max(std::abs(x - r.cx) - r.hx, 0.0);
    const double dy = std::max(std::abs(y - r.cy) - r.hy, 0.0);
    return std::hypot(dx, dy);
  }
  const double d = std::hypot(x - r.cx, y - r.cy);
  if (d < r.inner) return r.inner - d;
  if (d > r.outer) return d - r.outer;
  return 0.0;
}

double point_to_rect_max_distance(double x, double y, const Region& r) {
  const double dx = std::max(std::abs(x - r.cx - r.hx), std::abs(x - r.cx + r.hx));
  const double dy = std::max(std::abs(y - r.cy - r.hy), std::abs(y - r.cy + r.hy));
  return std::hypot(dx, dy);
}

bool regions_overlap(const Region& a, const Region& b) {
  if (a.shape == Region::Shape::Rect && b.shape == Region::Shape::Rect)
    return std::abs(a.cx - b.cx) <= a.hx + b.hx && std::abs(a.cy - b.cy) <= a.hy + b.hy;
  if (a.shape == Region::Shape::Ring && b.shape == Region::Shape::Ring) {
    const double d = std::hypot(a.cx - b.cx, a.cy - b.cy);
    return d < a.outer + b.outer && d + b.outer > a.inner && d + a.outer > b.inner;
  }
  const Region& ring = a.shape == Region::Shape::Ring ? a : b;
  const Region& rect = a.shape == Region::Shape::Ring ? b : a;
  // distance from the ring center over a connected rect spans an interval
  const double dmin = point_to_region_distance(ring.cx, ring.cy, rect);
  const double dmax = point_to_rect_max_distance(ring.cx, ring.cy, rect);
  return dmin <= ring.outer && dmax >= ring.inner;
}

Region piece_region(const Piece& p, double cx, double cy) {
  Region r;
  r.cx = cx;
  r.cy = cy;
  switch (p.form) {
    case Piece::Form::Box:
      r.shape = Region::Shape::Rect;
      r.hx = p.hx;
      r.hy = p.hy;
      break;
    case Piece::Form::Annulus:
      r.shape = Region::Shape::Ring;
      r.inner = p.inner_r;
      r.outer = p.outer_r;
      break;
    case Piece::Form::Sphere:
      r.shape = Region::Shape::Ring;
      r.inner = 0;
      r.outer = p.r;
      break;
  }
  return r;
}

// ---------------------------------------------------------------------------
// Pairwise analytic drop contact.
//
// Returns the z of the falling object's origin at which piece `a` (belonging
// to the falling object centered at (ax, ay)) first touches piece `b` of a
// settled object at pose `bp`; -inf when they never meet on the way down.

double pair_contact_z(const Piece& a, double ax, double ay, const Piece& b, const Pose& bp) {
  const double neg_inf = -std::numeric_limits<double>::infinity();
  const bool a_flat = a.form != Piece::Form::Sphere;
  const bool b_flat = b.form != Piece::Form::Sphere;
  const Region ra = piece_region(a, ax, ay);
  const Region rb = piece_region(b, bp.x, bp.y);

  if (a_flat && b_flat) {
    if (!regions_overlap(ra, rb)) return neg_inf;
    return (bp.z + b.z1) - a.z0;
  }
  if (a_flat && !b_flat) {
    // flat bottom descending onto a sphere: touches at the footprint point
    // nearest to the sphere axis
    const double d = point_to_region_distance(bp.x, bp.y, ra);
    if (d >= b.r) return neg_inf;
    return bp.z + b.cz + std::sqrt(b.r * b.r - d * d) - a.z0;
  }
  if (!a_flat && b_flat) {
    const double d = point_to_region_distance(ax, ay, rb);
    if (d >= a.r) return neg_inf;
    return (bp.z + b.z1) + std::sqrt(a.r * a.r - d * d) - a.cz;
  }
  // sphere on sphere
  const double d = std::hypot(ax - bp.x, ay - bp.y);
  const double rr = a.r + b.r;
  if (d >= rr) return neg_inf;
  return bp.z + b.cz + std::sqrt(rr * rr - d * d) - a.cz;
}

// Lowest solid offset of the falling object (0 for flat bottoms and spheres).
double bottom_offset(const std::vector<Piece>& pieces) {
  double best = std::numeric_limits<double>::infinity();
  for (const Piece& p : pieces)
    best = std::min(best, p.form == Piece::Form::Sphere ? p.cz - p.r : p.z0);
  return best;
}

struct ContactSample {
  double x, y;
};

// Sample the contact set of a winning pair for the stability test.
void contact_samples(const Piece& a, double ax, double ay, const Piece& b, const Pose& bp,
                     std::vector<ContactSample>& out) {
  const bool a_flat = a.form != Piece::Form::Sphere;
  const bool b_flat = b.form != Piece::Form::Sphere;
  const Region ra = piece_region(a, ax, ay);
  const Region rb = piece_region(b, bp.x, bp.y);

  if (a_flat && b_flat) {
    // grid over the falling piece's footprint, kept where both regions hold
    const double ext_x = ra.shape == Region::Shape::Rect ? ra.hx : ra.outer;
    const double ext_y = ra.shape == Region::Shape::Rect ? ra.hy : ra.outer;
    constexpr int n = 48;
    for (int i = 0; i <= n; ++i) {
      for (int j = 0; j <= n; ++j) {
        const double x = ax - ext_x + 2 * ext_x * i / n;
        const double y = ay - ext_y + 2 * ext_y * j / n;
        if (ra.contains(x, y) && rb.contains(x, y)) out.push_back({x, y});
      }
    }
    return;
  }

  // curved contacts: a point, or a full circle for the concentric rim case
  double px, py;            // nearest point realizing the contact
  double circle_r = -1.0;   // >= 0: contact is a circle of this radius around (cx, cy)
  double ccx, ccy;
  if (a_flat) {
    // region ra resting on sphere b
    const double d = std::hypot(bp.x - ax, bp.y - ay);
    if (ra.shape == Region::Shape::Ring && d < kContactTol && ra.inner > 0) {
      circle_r = ra.inner;
      ccx = ax;
      ccy = ay;
    } else {
      // nearest point of ra to the sphere axis
      if (point_to_region_distance(bp.x, bp.y, ra) <= 0) {
        px = bp.x;
        py = bp.y;
      } else if (ra.shape == Region::Shape::Rect) {
        px = std::clamp(bp.x, ra.cx - ra.hx, ra.cx + ra.hx);
        py = std::clamp(bp.y, ra.cy - ra.hy, ra.cy + ra.hy);
      } else {
        const double rr = std::clamp(d, ra.inner, ra.outer);
        px = ax + (bp.x - ax) * (d > 0 ? rr / d : 0);
        py = ay + (bp.y - ay) * (d > 0 ? rr / d : 0);
      }
    }
  } else if (b_flat) {
    const double d = std::hypot(ax - bp.x, ay - bp.y);
    if (rb.shape == Region::Shape::Ring && d < kContactTol && rb.inner > 0) {
      circle_r = rb.inner;
      ccx = bp.x;
      ccy = bp.y;
    } else if (point_to_region_distance(ax, ay, rb) <= 0) {
      px = ax;
      py = ay;
    } else if (rb.shape == Region::Shape::Rect) {
      px = std::clamp(ax, rb.cx - rb.hx, rb.cx + rb.hx);
      py = std::clamp(ay, rb.cy - rb.hy, rb.cy + rb.hy);
    } else {
      const double rr = std::clamp(d, rb.inner, rb.outer);
      px = bp.x + (ax - bp.x) * (d > 0 ? rr / d : 0);
      py = bp.y + (ay - bp.y) * (d > 0 ? rr / d : 0);
    }
  } else {
    // sphere on sphere: touch point on the center line
    const double d = std::hypot(ax - bp.x, ay - bp.y);
    if (d < kContactTol) {
      px = ax;
      py = ay;
    } else {
      const double f = b.r / (a.r + b.r);
      px = bp.x + (ax - bp.x) * f;
      py = bp.y + (ay - bp.y) * f;
    }
  }
  if (circle_r >= 0) {
    constexpr int n = 32;
    for (int i = 0; i < n; ++i) {
      const double ang = kTwoPi * i / n;
      out.push_back({ccx + circle_r * std::cos(ang), ccy + circle_r * std::sin(ang)});
    }
  } else {
    out.push_back({px, py});
  }
}

// footprint samples of an object's own pieces (used as a table contact patch)
void footprint_samples(const std::vector<Piece>& pieces, double cx, double cy, double at_z0,
                       std::vector<ContactSample>& out) {
  for (const Piece& p : pieces) {
    const double lo = p.form == Piece::Form::Sphere ? p.cz - p.r : p.z0;
    if (lo > at_z0 + kContactTol) continue;  // piece does not reach the bottom plane
    const Region r = piece_region(p, cx, cy);
    const double ex = r.shape == Region::Shape::Rect ? r.hx : r.outer;
    const double ey = r.shape == Region::Shape::Rect ? r.hy : r.outer;
    if (p.form == Piece::Form::Sphere) {
      out.push_back({cx, cy});
      continue;
    }
    constexpr int n = 32;
    for (int i = 0; i <= n; ++i)
      for (int j = 0; j <= n; ++j) {
        const double x = cx - ex + 2 * ex * i / n;
        const double y = cy - ey + 2 * ey * j / n;
        if (r.contains(x, y)) out.push_back({x, y});
      }
  }
}

// min over directions of the support extent from (cx, cy)
double min_support_extent(const std::vector<ContactSample>& samples, double cx, double cy) {
  if (samples.empty()) return -1.0;
  constexpr int kDirs = 24;
  double worst = std::numeric_limits<double>::infinity();
  for (int k = 0; k < kDirs; ++k) {
    const double ang = kTwoPi * k / kDirs;
    const double dx = std::cos(ang), dy = std::sin(ang);
    double ext = -std::numeric_limits<double>::infinity();
    for (const ContactSample& s : samples)
      ext = std::max(ext, (s.x - cx) * dx + (s.y - cy) * dy);
    worst = std::min(worst, ext);
  }
  return worst;
}

double object_volume(const ObjectSpec& spec) {
  double v = 0;
  for (const Piece& p : solid_pieces(spec, Orientation::Upright)) v += p.volume();
  return v;
}

// deterministic unit direction for displacing a toppled object
std::pair<double, double> topple_direction(const ObjectSpec& spec, int slot,
                                           Orientation orientation, int step) {
  std::uint64_t h = Rng::hash_mix(static_cast<std::uint64_t>(spec.id) * 0x9e3779b97f4a7c15ull ^
                                  (static_cast<std::uint64_t>(slot) << 17) ^
                                  (static_cast<std::uint64_t>(orientation) << 21) ^
                                  (static_cast<std::uint64_t>(step) << 25));
  const double ang = kTwoPi * (static_cast<double>(h >> 11) * 0x1.0p-53);
  return {std::cos(ang), std::sin(ang)};
}

struct DropResult {
  double z_rest = 0;
  std::vector<int> supporters;              // placement indices at the rest height
  std::vector<ContactSample> patch;         // contact samples (empty for pure table rest)
  bool on_table = false;
};

DropResult drop(const CompoundState& compound, const std::vector<Piece>& pieces,
                double cx, double cy) {
  DropResult res;
  const double b0 = bottom_offset(pieces);
  res.z_rest = -b0;  // table contact (lowest solid point at z = 0)

  std::vector<std::vector<std::pair<Piece, Piece>>> winning(compound.placements.size());
  for (std::size_t i = 0; i < compound.placements.size(); ++i) {
    const Placement& p = compound.placements[i];
    const auto other = solid_pieces(p.spec, p.pose.orientation);
    for (const Piece& a : pieces) {
      for (const Piece& b : other) {
        const double z = pair_contact_z(a, cx, cy, b, p.pose);
        if (z > res.z_rest + kContactTol) {
          res.z_rest = z;
          for (auto& w : winning) w.clear();
          winning[i].push_back({a, b});
        } else if (std::abs(z - res.z_rest) <= kContactTol) {
          winning[i].push_back({a, b});
        }
      }
    }
  }

  res.on_table = res.z_rest <= -b0 + kContactTol;
  for (std::size_t i = 0; i < winning.size(); ++i) {
    if (winning[i].empty()) continue;
    res.supporters.push_back(static_cast<int>(i));
    // contact sets are horizontal, so the rest height does not enter the patch
    for (const auto& [a, b] : winning[i])
      contact_samples(a, cx, cy, b, compound.placements[i].pose, res.patch);
  }
  return res;
}

bool is_ring_around_shaft(const CompoundState& compound, const ObjectSpec& spec,
                          double cx, double cy, double z_rest, int* pole_index) {
  if (spec.kind != ObjectKind::Ring) return false;
  for (std::size_t i = 0; i < compound.placements.size(); ++i) {
    const Placement& p = compound.placements[i];
    if (p.tipped || p.spec.kind != ObjectKind::Pole) continue;
    if (p.pose.orientation != Orientation::Upright) continue;
    if (std::hypot(p.pose.x - cx, p.pose.y - cy) > 1e-3) continue;
    if (spec.hole_radius <= p.spec.hole_radius) continue;  // hole must clear the shaft
    const double shaft_top = p.pose.z + p.spec.height;
    if (z_rest < shaft_top - kContactTol && z_rest + spec.height > p.pose.z) {
      if (pole_index) *pole_index = static_cast<int>(i);
      return true;
    }
  }
  return false;
}

bool is_in_cavity(const CompoundState& compound, const ObjectSpec& spec, double cx,
                  double cy, double z_rest, int* cup_index) {
  const double circum = footprint_circumradius(spec);
  for (std::size_t i = 0; i < compound.placements.size(); ++i) {
    const Placement& p = compound.placements[i];
    if (p.tipped || p.spec.kind != ObjectKind::Cup) continue;
    if (p.pose.orientation != Orientation::Upright) continue;
    if (std::hypot(p.pose.x - cx, p.pose.y - cy) > 1e-3) continue;
    if (circum >= p.spec.cavity_radius - 1e-6) continue;
    const double rim_top = p.pose.z + p.spec.height;
    const double floor_top = p.pose.z + p.spec.wall_thickness;
    if (z_rest >= floor_top - kContactTol && z_rest < rim_top - kContactTol) {
      if (cup_index) *cup_index = static_cast<int>(i);
      return true;
    }
  }
  return false;
}

bool rests_on_cup_rim(const CompoundState& compound, const std::vector<int>& supporters,
                      const ObjectSpec& spec, Orientation orientation, double cx, double cy) {
  for (int idx : supporters) {
    const Placement& p = compound.placements[idx];
    if (p.spec.kind != ObjectKind::Cup || p.pose.orientation != Orientation::Upright)
      continue;
    // overhangs the opening: some footprint piece reaches over the cavity
    for (const Piece& piece : solid_pieces(spec, orientation)) {
      const Region r = piece_region(piece, cx, cy);
      if (point_to_region_distance(p.pose.x, p.pose.y, r) < p.spec.cavity_radius)
        return true;
    }
  }
  return false;
}

// share of each placement's volume carried by every (transitive) supporter
void distribute_load(const CompoundState& compound, std::vector<double>& mass,
                     std::vector<double>& mx, std::vector<double>& my) {
  const int n = compound.size();
  mass.assign(n, 0.0);
  mx.assign(n, 0.0);
  my.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    const Placement& p = compound.placements[i];
    const double v = object_volume(p.spec);
    mass[i] += v;
    mx[i] += v * p.pose.x;
    my[i] += v * p.pose.y;
  }
  // placements settle in order, so supports always point to earlier indices
  for (int i = n - 1; i >= 0; --i) {
    const Placement& p = compound.placements[i];
    if (p.supports.empty() || p.tipped) continue;
    const double share = 1.0 / static_cast<double>(p.supports.size());
    for (int s : p.supports) {
      mass[s] += mass[i] * share;
      mx[s] += mx[i] * share;
      my[s] += my[i] * share;
    }
  }
}

}  // namespace

const char* to_string(Mode m) { return m == Mode::Linear ? "linear" : "nonlinear"; }

Mode mode_from_string(const std::string& s) {
  if (s == "linear") return Mode::Linear;
  if (s == "nonlinear") return Mode::Nonlinear;
  throw std::invalid_argument("unknown mode: " + s);
}

const char* to_string(SettleKind k) {
  switch (k) {
    case SettleKind::StackedOnTop: return "stacked_on_top";
    case SettleKind::InsertedInCavity: return "inserted_in_cavity";
    case SettleKind::PassedOverPole: return "passed_over_pole";
    case SettleKind::RestsOnRim: return "rests_on_rim";
    case SettleKind::ToppledOff: return "toppled_off";
    case SettleKind::CompoundCollapsed: return "compound_collapsed";
  }
  return "?";
}

double support_top(const CompoundState& compound, int slot) {
  const double sx = kSlotX[static_cast<std::size_t>(slot)];
  const double sy = 0.0;
  const double probe = 0.01;  // column probe radius
  double top = 0.0;
  for (const Placement& p : compound.placements) {
    if (p.tipped) continue;
    for (const Piece& piece : solid_pieces(p.spec, p.pose.orientation)) {
      const Region r = piece_region(piece, p.pose.x, p.pose.y);
      if (point_to_region_distance(sx, sy, r) < probe)
        top = std::max(top, p.pose.z + piece.top_z());
    }
  }
  return top;
}

std::pair<CompoundState, SettleOutcome> place_at(const CompoundState& compound,
                                                 const ObjectSpec& spec, int slot,
                                                 double cx, double cy,
                                                 Orientation orientation) {
  if (compound.collapsed) throw PlacementOnCollapsed();

  const auto pieces = solid_pieces(spec, orientation);
  DropResult dr = drop(compound, pieces, cx, cy);

  Placement placed;
  placed.spec = spec;
  placed.step = compound.size() + 1;
  placed.slot = slot;
  placed.release_x = cx;
  placed.release_y = cy;
  placed.release_z = support_top(compound, slot) + kReleaseClearance;
  placed.pose = Pose{cx, cy, dr.z_rest, orientation};
  placed.supports = dr.supporters;

  SettleOutcome outcome;
  outcome.kind = SettleKind::StackedOnTop;

  bool stable = dr.on_table;  // contact with the table never tips
  if (!stable) {
    if (is_ring_around_shaft(compound, spec, cx, cy, dr.z_rest, nullptr)) {
      outcome.kind = SettleKind::PassedOverPole;
      stable = true;
    } else if (is_in_cavity(compound, spec, cx, cy, dr.z_rest, nullptr)) {
      outcome.kind = SettleKind::InsertedInCavity;
      stable = true;
    } else if (min_support_extent(dr.patch, cx, cy) >= kStableMargin) {
      stable = true;
      if (rests_on_cup_rim(compound, dr.supporters, spec, orientation, cx, cy))
        outcome.kind = SettleKind::RestsOnRim;
    }
  } else if (is_ring_around_shaft(compound, spec, cx, cy, dr.z_rest, nullptr)) {
    outcome.kind = SettleKind::PassedOverPole;
  }
  placed.kind = outcome.kind;

  CompoundState next = compound;
  if (!stable) {
    auto [dx, dy] = topple_direction(spec, slot, orientation, placed.step);
    placed.pose.x = cx + kToppleShift * dx;
    placed.pose.y = cy + kToppleShift * dy;
    placed.pose.z = 0.0;
    placed.tipped = true;
    placed.supports.clear();
    outcome.kind = SettleKind::ToppledOff;
    placed.kind = outcome.kind;
    outcome.final_pose = placed.pose;
    next.placements.push_back(placed);
    if (next.size() == 1) next.base_pose = placed.pose;
    return {next, outcome};
  }

  next.placements.push_back(placed);
  if (next.size() == 1) next.base_pose = placed.pose;

  // Combined center of mass of each support chain must stay over the
  // supporter's own contact patch (eroded by the stability margin).
  std::vector<double> mass, mx, my;
  distribute_load(next, mass, mx, my);
  int violated = -1;
  for (int i = 0; i < next.size() && violated < 0; ++i) {
    const Placement& s = next.placements[i];
    if (s.tipped) continue;
    // laterally constrained placements cannot tip over their contact point
    if (is_ring_around_shaft(next, s.spec, s.pose.x, s.pose.y, s.pose.z, nullptr) ||
        is_in_cavity(next, s.spec, s.pose.x, s.pose.y, s.pose.z, nullptr))
      continue;
    const double comx = mx[i] / mass[i];
    const double comy = my[i] / mass[i];
    std::vector<ContactSample> patch;
    if (s.supports.empty()) {
      // table contact never tips a lone object; with a load the footprint
      // acts as the support patch
      if (mass[i] <= object_volume(s.spec) * (1 + 1e-9)) continue;
      footprint_samples(solid_pieces(s.spec, s.pose.orientation), s.pose.x, s.pose.y,
                        0.0, patch);
    } else {
      for (int idx : s.supports) {
        const Placement& below = next.placements[idx];
        const auto a_pieces = solid_pieces(s.spec, s.pose.orientation);
        const auto b_pieces = solid_pieces(below.spec, below.pose.orientation);
        for (const Piece& a : a_pieces)
          for (const Piece& b : b_pieces) {
            const double z = pair_contact_z(a, s.pose.x, s.pose.y, b, below.pose);
            if (std::abs(z - s.pose.z) <= 1e-7)
              contact_samples(a, s.pose.x, s.pose.y, b, below.pose, patch);
          }
      }
    }
    if (min_support_extent(patch, comx, comy) < kStableMargin) violated = i;
  }

  if (violated >= 0) {
    // the whole tower above the violated support goes down
    std::vector<char> falls(static_cast<std::size_t>(next.size()), 0);
    falls[static_cast<std::size_t>(violated)] = 1;
    for (int i = 0; i < next.size(); ++i)
      for (int s : next.placements[i].supports)
        if (falls[static_cast<std::size_t>(s)]) falls[static_cast<std::size_t>(i)] = 1;
    for (int i = 0; i < next.size(); ++i) {
      if (!falls[static_cast<std::size_t>(i)]) continue;
      Placement& p = next.placements[i];
      auto [dx, dy] = topple_direction(p.spec, p.slot, p.pose.orientation, p.step);
      p.pose.x = p.release_x + kToppleShift * dx;
      p.pose.y = p.release_y + kToppleShift * dy;
      p.pose.z = 0.0;
      p.tipped = true;
      p.kind = SettleKind::CompoundCollapsed;
      p.supports.clear();
    }
    next.collapsed = true;
    outcome.kind = SettleKind::CompoundCollapsed;
    outcome.final_pose = next.placements.back().pose;
    return {next, outcome};
  }

  outcome.final_pose = placed.pose;
  return {next, outcome};
}

std::pair<CompoundState, SettleOutcome> place(const CompoundState& compound,
                                              const ObjectSpec& spec, int slot,
                                              Orientation orientation) {
  return place_at(compound, spec, slot, kSlotX[static_cast<std::size_t>(slot)], 0.0,
                  orientation);
}

bool check_collapse(const CompoundState& compound) {
  for (const Placement& p : compound.placements) {
    if (p.tipped) return true;  // orientation deviation >= 60 deg
    if (std::hypot(p.pose.x - p.release_x, p.pose.y - p.release_y) >= kCollapsePosThreshold)
      return true;
  }
  return compound.collapsed;
}

void refresh_contact_annotations(CompoundState& compound) {
  for (int i = 0; i < compound.size(); ++i) {
    Placement& p = compound.placements[static_cast<std::size_t>(i)];
    p.supports.clear();
    if (p.tipped) continue;
    const auto pieces = solid_pieces(p.spec, p.pose.orientation);
    for (int j = 0; j < compound.size(); ++j) {
      if (j == i) continue;
      const Placement& other = compound.placements[static_cast<std::size_t>(j)];
      if (other.tipped || other.pose.z > p.pose.z + kContactTol) continue;
      bool touches = false;
      const auto other_pieces = solid_pieces(other.spec, other.pose.orientation);
      for (const Piece& a : pieces) {
        for (const Piece& b : other_pieces) {
          if (std::abs(pair_contact_z(a, p.pose.x, p.pose.y, b, other.pose) - p.pose.z) <=
              1e-7) {
            touches = true;
            break;
          }
        }
        if (touches) break;
      }
      if (touches) p.supports.push_back(j);
    }
    if (is_ring_around_shaft(compound, p.spec, p.pose.x, p.pose.y, p.pose.z, nullptr))
      p.kind = SettleKind::PassedOverPole;
    else if (is_in_cavity(compound, p.spec, p.pose.x, p.pose.y, p.pose.z, nullptr))
      p.kind = SettleKind::InsertedInCavity;
    else if (p.kind == SettleKind::PassedOverPole || p.kind == SettleKind::InsertedInCavity)
      p.kind = SettleKind::StackedOnTop;
  }
}

bool scene_interpenetrates(const CompoundState& compound, Rng& rng, int lines_per_pair) {
  const int n = compound.size();
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const Placement& a = compound.placements[i];
      const Placement& b = compound.placements[j];
      const Aabb ba = bounding_box(a.spec, a.pose);
      const Aabb bb = bounding_box(b.spec, b.pose);
      if (!ba.intersects(bb, 0)) continue;
      for (int l = 0; l < lines_per_pair; ++l) {
        // segment between random points of the two boxes, sampled densely
        const Vec3 p0{rng.uniform(ba.x_min, ba.x_max), rng.uniform(ba.y_min, ba.y_max),
                      rng.uniform(ba.z_min, ba.z_max)};
        const Vec3 p1{rng.uniform(bb.x_min, bb.x_max), rng.uniform(bb.y_min, bb.y_max),
                      rng.uniform(bb.z_min, bb.z_max)};
        for (int s = 0; s <= 32; ++s) {
          const double t = s / 32.0;
          const Vec3 p = p0 + (p1 - p0) * t;
          // interior test with a tolerance pull-in to skip boundary touches
          if (point_inside(a.spec, a.pose, p) && point_inside(b.spec, b.pose, p)) {
            const Vec3 eps{1e-7, 1e-7, 1e-7};
            if (point_inside(a.spec, a.pose, p - eps) && point_inside(a.spec, a.pose, p + eps) &&
                point_inside(b.spec, b.pose, p - eps) && point_inside(b.spec, b.pose, p + eps))
              return true;
          }
        }
      }
    }
  }
  return false;
}

}  // namespace stacklab
