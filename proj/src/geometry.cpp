#include "stacklab/geometry.hpp"

#include <algorithm>
#include <cassert>
#include <cstdio>
#include <limits>
#include <stdexcept>

namespace stacklab {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kTangentEps = 1e-12;
constexpr double kInf = std::numeric_limits<double>::infinity();
}  // namespace

const char* to_string(ObjectKind k) {
  switch (k) {
    case ObjectKind::Pole: return "pole";
    case ObjectKind::Ball: return "ball";
    case ObjectKind::Cube: return "cube";
    case ObjectKind::Ring: return "ring";
    case ObjectKind::Cup: return "cup";
  }
  return "?";
}

const char* to_string(Orientation o) {
  return o == Orientation::Upright ? "upright" : "inverted";
}

ObjectKind object_kind_from_string(const std::string& s) {
  if (s == "pole") return ObjectKind::Pole;
  if (s == "ball") return ObjectKind::Ball;
  if (s == "cube") return ObjectKind::Cube;
  if (s == "ring") return ObjectKind::Ring;
  if (s == "cup") return ObjectKind::Cup;
  throw std::invalid_argument("unknown object kind: " + s);
}

Orientation orientation_from_string(const std::string& s) {
  if (s == "upright") return Orientation::Upright;
  if (s == "inverted") return Orientation::Inverted;
  throw std::invalid_argument("unknown orientation: " + s);
}

double Piece::volume() const {
  switch (form) {
    case Form::Box: return 4.0 * hx * hy * (z1 - z0);
    case Form::Annulus: return kPi * (outer_r * outer_r - inner_r * inner_r) * (z1 - z0);
    case Form::Sphere: return 4.0 / 3.0 * kPi * r * r * r;
  }
  return 0;
}

std::vector<ObjectSpec> catalog_standard() {
  std::vector<ObjectSpec> specs;
  int id = 0;
  auto pole = [&](double h, double w, double shaft_r) {
    ObjectSpec s;
    s.id = id++;
    s.kind = ObjectKind::Pole;
    s.height = h;
    s.outer_width = s.outer_depth = w;
    s.hole_radius = shaft_r;
    specs.push_back(s);
  };
  auto ball = [&](double d) {
    ObjectSpec s;
    s.id = id++;
    s.kind = ObjectKind::Ball;
    s.height = s.outer_width = s.outer_depth = d;
    specs.push_back(s);
  };
  auto cube = [&](double a) {
    ObjectSpec s;
    s.id = id++;
    s.kind = ObjectKind::Cube;
    s.height = s.outer_width = s.outer_depth = a;
    specs.push_back(s);
  };
  auto ring = [&](double h, double w, double hole_r) {
    ObjectSpec s;
    s.id = id++;
    s.kind = ObjectKind::Ring;
    s.height = h;
    s.outer_width = s.outer_depth = w;
    s.hole_radius = hole_r;
    specs.push_back(s);
  };
  auto cup = [&](double h, double w) {
    ObjectSpec s;
    s.id = id++;
    s.kind = ObjectKind::Cup;
    s.height = h;
    s.outer_width = s.outer_depth = w;
    s.wall_thickness = 0.01;
    s.cavity_radius = w / 2.0 - s.wall_thickness;
    s.cavity_depth = h - s.wall_thickness;
    specs.push_back(s);
  };

  pole(0.17, 0.14, 0.015);
  for (int i = 0; i < 5; ++i) ball(0.05);
  cube(0.10);
  // Hole radii chosen larger than the pole shaft so every ring passes over it.
  ring(0.030, 0.120, 0.040);
  ring(0.025, 0.105, 0.035);
  ring(0.024, 0.097, 0.032);
  ring(0.020, 0.090, 0.030);
  ring(0.015, 0.080, 0.026);
  cup(0.100, 0.105);
  cup(0.085, 0.075);
  cup(0.075, 0.065);

  for (const ObjectSpec& s : specs) {
    assert(s.height > 0 && s.outer_width > 0);
    assert(s.hole_radius < s.outer_width / 2);
    assert(s.cavity_radius < s.outer_width / 2);
    assert(s.cavity_depth < s.height);
  }
  return specs;
}

namespace {

double flip_z(double z, double h) { return h - z; }

}  // namespace

std::vector<Piece> solid_pieces(const ObjectSpec& spec, Orientation orientation) {
  std::vector<Piece> ps;
  const double h = spec.height;
  auto annulus = [&](double ri, double ro, double z0, double z1) {
    Piece p;
    p.form = Piece::Form::Annulus;
    p.inner_r = ri;
    p.outer_r = ro;
    p.z0 = z0;
    p.z1 = z1;
    ps.push_back(p);
  };
  switch (spec.kind) {
    case ObjectKind::Ball: {
      Piece p;
      p.form = Piece::Form::Sphere;
      p.r = h / 2;
      p.cz = h / 2;
      ps.push_back(p);
      break;
    }
    case ObjectKind::Cube: {
      Piece p;
      p.form = Piece::Form::Box;
      p.hx = spec.outer_width / 2;
      p.hy = spec.outer_depth / 2;
      p.z0 = 0;
      p.z1 = h;
      ps.push_back(p);
      break;
    }
    case ObjectKind::Ring:
      annulus(spec.hole_radius, spec.outer_radius(), 0, h);
      break;
    case ObjectKind::Pole:
      // shaft through the full height plus a base disk around it
      annulus(0, spec.hole_radius, 0, h);
      annulus(spec.hole_radius, spec.outer_radius(), 0, kPoleBaseHeight);
      break;
    case ObjectKind::Cup:
      annulus(spec.cavity_radius, spec.outer_radius(), 0, h);       // wall
      annulus(0, spec.cavity_radius, 0, spec.wall_thickness);       // floor
      break;
  }
  if (orientation == Orientation::Inverted) {
    for (Piece& p : ps) {
      if (p.form == Piece::Form::Sphere) {
        p.cz = flip_z(p.cz, h);
      } else {
        double nz0 = flip_z(p.z1, h);
        double nz1 = flip_z(p.z0, h);
        p.z0 = nz0;
        p.z1 = nz1;
      }
    }
  }
  return ps;
}

Aabb bounding_box(const ObjectSpec& spec, const Pose& pose) {
  Aabb b;
  b.x_min = pose.x - spec.outer_width / 2;
  b.x_max = pose.x + spec.outer_width / 2;
  b.y_min = pose.y - spec.outer_depth / 2;
  b.y_max = pose.y + spec.outer_depth / 2;
  b.z_min = pose.z;
  b.z_max = pose.z + spec.height;
  return b;
}

double top_profile(const ObjectSpec& spec, Orientation orientation, double u, double v) {
  double best = -1.0;
  const double rho2 = u * u + v * v;
  for (const Piece& p : solid_pieces(spec, orientation)) {
    switch (p.form) {
      case Piece::Form::Box:
        if (std::abs(u) <= p.hx && std::abs(v) <= p.hy) best = std::max(best, p.z1);
        break;
      case Piece::Form::Annulus:
        if (rho2 >= p.inner_r * p.inner_r && rho2 <= p.outer_r * p.outer_r)
          best = std::max(best, p.z1);
        break;
      case Piece::Form::Sphere:
        if (rho2 <= p.r * p.r) best = std::max(best, p.cz + std::sqrt(p.r * p.r - rho2));
        break;
    }
  }
  return best;
}

double footprint_circumradius(const ObjectSpec& spec) {
  double best = 0;
  for (const Piece& p : solid_pieces(spec, Orientation::Upright)) {
    switch (p.form) {
      case Piece::Form::Box: best = std::max(best, std::hypot(p.hx, p.hy)); break;
      case Piece::Form::Annulus: best = std::max(best, p.outer_r); break;
      case Piece::Form::Sphere: best = std::max(best, p.r); break;
    }
  }
  return best;
}

bool point_inside(const ObjectSpec& spec, const Pose& pose, const Vec3& p) {
  const double u = p.x - pose.x;
  const double v = p.y - pose.y;
  const double w = p.z - pose.z;
  const double rho2 = u * u + v * v;
  for (const Piece& pc : solid_pieces(spec, pose.orientation)) {
    switch (pc.form) {
      case Piece::Form::Box:
        if (std::abs(u) <= pc.hx && std::abs(v) <= pc.hy && w >= pc.z0 && w <= pc.z1)
          return true;
        break;
      case Piece::Form::Annulus:
        if (rho2 >= pc.inner_r * pc.inner_r && rho2 <= pc.outer_r * pc.outer_r &&
            w >= pc.z0 && w <= pc.z1)
          return true;
        break;
      case Piece::Form::Sphere: {
        const double dz = w - pc.cz;
        if (rho2 + dz * dz <= pc.r * pc.r) return true;
        break;
      }
    }
  }
  return false;
}

namespace {

struct Interval {
  double t0, t1;
};

// t-range with rho(t) <= r for the 2-D ray projection; full line when the
// direction has no horizontal component and the origin is inside.
bool cylinder_interval(double ox, double oy, double dx, double dy, double r, Interval& out) {
  const double a = dx * dx + dy * dy;
  if (a < kTangentEps) {
    if (ox * ox + oy * oy <= r * r) {
      out = {-kInf, kInf};
      return true;
    }
    return false;
  }
  const double b = 2 * (ox * dx + oy * dy);
  const double c = ox * ox + oy * oy - r * r;
  const double disc = b * b - 4 * a * c;
  if (disc <= kTangentEps) return false;
  const double sq = std::sqrt(disc);
  out = {(-b - sq) / (2 * a), (-b + sq) / (2 * a)};
  return true;
}

bool slab_interval(double oz, double dz, double z0, double z1, Interval& out) {
  if (std::abs(dz) < kTangentEps) {
    if (oz >= z0 && oz <= z1) {
      out = {-kInf, kInf};
      return true;
    }
    return false;
  }
  double ta = (z0 - oz) / dz;
  double tb = (z1 - oz) / dz;
  if (ta > tb) std::swap(ta, tb);
  out = {ta, tb};
  return true;
}

void add_clipped(std::vector<Interval>& dst, Interval v, double lo, double hi) {
  v.t0 = std::max(v.t0, lo);
  v.t1 = std::min(v.t1, hi);
  if (v.t1 - v.t0 > kTangentEps) dst.push_back(v);
}

// solid intervals of one piece along the ray (canonical frame)
void piece_intervals(const Piece& p, const Vec3& o, const Vec3& d, std::vector<Interval>& out) {
  switch (p.form) {
    case Piece::Form::Box: {
      Interval ix, iy, iz;
      if (!slab_interval(o.x, d.x, -p.hx, p.hx, ix)) return;
      if (!slab_interval(o.y, d.y, -p.hy, p.hy, iy)) return;
      if (!slab_interval(o.z, d.z, p.z0, p.z1, iz)) return;
      Interval v{std::max({ix.t0, iy.t0, iz.t0}), std::min({ix.t1, iy.t1, iz.t1})};
      if (v.t1 - v.t0 > kTangentEps) out.push_back(v);
      break;
    }
    case Piece::Form::Annulus: {
      Interval outer, slab;
      if (!cylinder_interval(o.x, o.y, d.x, d.y, p.outer_r, outer)) return;
      if (!slab_interval(o.z, d.z, p.z0, p.z1, slab)) return;
      Interval v{std::max(outer.t0, slab.t0), std::min(outer.t1, slab.t1)};
      if (v.t1 - v.t0 <= kTangentEps) return;
      Interval inner;
      if (p.inner_r > 0 && cylinder_interval(o.x, o.y, d.x, d.y, p.inner_r, inner)) {
        // subtract the hole
        add_clipped(out, {v.t0, std::min(v.t1, inner.t0)}, v.t0, v.t1);
        add_clipped(out, {std::max(v.t0, inner.t1), v.t1}, v.t0, v.t1);
      } else {
        out.push_back(v);
      }
      break;
    }
    case Piece::Form::Sphere: {
      const Vec3 oc{o.x, o.y, o.z - p.cz};
      const double b = 2 * oc.dot(d);
      const double c = oc.dot(oc) - p.r * p.r;
      const double disc = b * b - 4 * c;  // |d| = 1
      if (disc <= kTangentEps) return;
      const double sq = std::sqrt(disc);
      out.push_back({(-b - sq) / 2, (-b + sq) / 2});
      break;
    }
  }
}

}  // namespace

std::vector<Vec3> ray_intersect(const ObjectSpec& spec, const Pose& pose, const Ray& ray) {
  assert(std::abs(ray.direction.norm() - 1.0) < 1e-9);
  const Vec3 o = ray.origin - Vec3{pose.x, pose.y, pose.z};
  const Vec3& d = ray.direction;

  std::vector<Interval> ivs;
  for (const Piece& p : solid_pieces(spec, pose.orientation)) piece_intervals(p, o, d, ivs);
  if (ivs.empty()) return {};

  std::sort(ivs.begin(), ivs.end(), [](const Interval& a, const Interval& b) { return a.t0 < b.t0; });
  std::vector<Interval> merged;
  for (const Interval& iv : ivs) {
    if (!merged.empty() && iv.t0 <= merged.back().t1 + 1e-12)
      merged.back().t1 = std::max(merged.back().t1, iv.t1);
    else
      merged.push_back(iv);
  }

  std::vector<Vec3> points;
  for (const Interval& iv : merged) {
    for (double t : {iv.t0, iv.t1})
      if (t > 1e-12) points.push_back(ray.origin + d * t);
  }
  return points;
}

std::string catalog_to_json(const std::vector<ObjectSpec>& specs) {
  std::string out = "[\n";
  char buf[512];
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const ObjectSpec& s = specs[i];
    std::snprintf(buf, sizeof(buf),
                  "  {\"id\": %d, \"kind\": \"%s\", \"height\": %.6f, \"outer_width\": %.6f, "
                  "\"outer_depth\": %.6f, \"hole_radius\": %.6f, \"cavity_radius\": %.6f, "
                  "\"cavity_depth\": %.6f, \"wall_thickness\": %.6f}%s\n",
                  s.id, to_string(s.kind), s.height, s.outer_width, s.outer_depth,
                  s.hole_radius, s.cavity_radius, s.cavity_depth, s.wall_thickness,
                  i + 1 < specs.size() ? "," : "");
    out += buf;
  }
  out += "]\n";
  return out;
}

}  // namespace stacklab
