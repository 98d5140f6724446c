#pragma once

#include <string>
#include <vector>

#include "stacklab/geometry.hpp"

namespace stacklab {

inline constexpr int kImageSize = 32;
inline constexpr int kImagePixels = kImageSize * kImageSize;
inline constexpr double kCameraHeight = 1.0;  // virtual camera plane above the table

// Top-down depth image: pixel value is the distance from the camera plane,
// so the table background is exactly kCameraHeight.
struct DepthImage {
  std::vector<double> pixels;  // row-major, kImagePixels values, meters
  double d_min = 0;
  double d_max = 0;
};

struct NormalizedImage {
  std::vector<double> values;  // in [0, 1]
  double d_min = 0;
  double d_max = 0;
};

// Orthographic render over a square window 1.2x the object's larger footprint
// dimension, 4x4 supersampling with mean pooling. (dx, dy) shifts the object
// within the window; used for sub-pixel jitter augmentation.
DepthImage render_object(const ObjectSpec& spec, Orientation orientation,
                         double dx = 0.0, double dy = 0.0);
DepthImage render_object_serial(const ObjectSpec& spec, Orientation orientation,
                                double dx = 0.0, double dy = 0.0);

NormalizedImage normalize(const DepthImage& img);

void write_pgm(const std::string& path, const NormalizedImage& img);

}  // namespace stacklab
