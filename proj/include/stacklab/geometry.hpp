#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace stacklab {

struct Vec3 {
  double x = 0, y = 0, z = 0;

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  double norm() const { return std::sqrt(dot(*this)); }
};

enum class ObjectKind { Pole, Ball, Cube, Ring, Cup };
enum class Orientation { Upright, Inverted };

const char* to_string(ObjectKind k);
const char* to_string(Orientation o);
ObjectKind object_kind_from_string(const std::string& s);
Orientation orientation_from_string(const std::string& s);

// Parametric description of one toy. All lengths in meters.
struct ObjectSpec {
  int id = 0;
  ObjectKind kind = ObjectKind::Cube;
  double height = 0;
  double outer_width = 0;
  double outer_depth = 0;
  double hole_radius = 0;     // Ring: inner radius; Pole: shaft radius; 0 otherwise
  double cavity_radius = 0;   // Cup inner radius
  double cavity_depth = 0;    // Cup
  double wall_thickness = 0;

  double outer_radius() const { return outer_width / 2.0; }
};

// Object frame origin is the bottom-center of the object.
struct Pose {
  double x = 0, y = 0, z = 0;
  Orientation orientation = Orientation::Upright;
};

struct Aabb {
  double x_min = 0, x_max = 0, y_min = 0, y_max = 0, z_min = 0, z_max = 0;

  Vec3 center() const { return {(x_min + x_max) / 2, (y_min + y_max) / 2, (z_min + z_max) / 2}; }
  double mid_z() const { return (z_min + z_max) / 2; }
  bool contains(const Vec3& p, double tol) const {
    return p.x >= x_min - tol && p.x <= x_max + tol && p.y >= y_min - tol &&
           p.y <= y_max + tol && p.z >= z_min - tol && p.z <= z_max + tol;
  }
  bool intersects(const Aabb& o, double inflate) const {
    return x_min - inflate <= o.x_max && o.x_min - inflate <= x_max &&
           y_min - inflate <= o.y_max && o.y_min - inflate <= y_max &&
           z_min - inflate <= o.z_max && o.z_min - inflate <= z_max;
  }
};

struct Ray {
  Vec3 origin;
  Vec3 direction;  // unit length
};

// Pole internals shared by the whole catalog (a single pole design exists).
inline constexpr double kPoleBaseHeight = 0.02;

// One axisymmetric or box-shaped convex piece of a solid, in the canonical
// frame (origin at the object's bottom-center, orientation already applied).
struct Piece {
  enum class Form { Box, Annulus, Sphere };
  Form form = Form::Box;
  double hx = 0, hy = 0;            // Box half extents
  double inner_r = 0, outer_r = 0;  // Annulus radii (inner_r = 0 for a full cylinder)
  double z0 = 0, z1 = 0;            // Box/Annulus z range
  double r = 0, cz = 0;             // Sphere radius and center height

  double volume() const;
  double top_z() const { return form == Form::Sphere ? cz + r : z1; }
};

// The 15 toys of the standard inventory (1 pole, 5 balls, 1 cube, 5 rings,
// 3 cups), ids 0..14 in that order.
std::vector<ObjectSpec> catalog_standard();

Aabb bounding_box(const ObjectSpec& spec, const Pose& pose);

// All entry/exit points of the ray with the object's solid surface, sorted by
// ray parameter. Tangencies count as no intersection. Only crossings with
// t > 0 are reported.
std::vector<Vec3> ray_intersect(const ObjectSpec& spec, const Pose& pose, const Ray& ray);

bool point_inside(const ObjectSpec& spec, const Pose& pose, const Vec3& p);

// Solid decomposition used by the settle model; pieces do not overlap.
std::vector<Piece> solid_pieces(const ObjectSpec& spec, Orientation orientation);

// Height of the object's top surface at horizontal offset (u, v) from its
// axis, or a negative value when the solid has no material there.
double top_profile(const ObjectSpec& spec, Orientation orientation, double u, double v);

// Radius of the smallest vertical cylinder containing the object.
double footprint_circumradius(const ObjectSpec& spec);

// Catalog export: JSON array of ObjectSpec records, lengths in meters with
// six decimal places.
std::string catalog_to_json(const std::vector<ObjectSpec>& specs);

}  // namespace stacklab
