#include "stacklab/renderer.hpp"

#include <algorithm>
#include <cstdio>
#include <stdexcept>

namespace stacklab {

namespace {

constexpr int kSupersample = 4;

double pixel_value(const ObjectSpec& spec, Orientation orientation, double window,
                   double dx, double dy, int row, int col) {
  const double px = window / kImageSize;
  const double x0 = -window / 2 + col * px;
  const double y0 = -window / 2 + row * px;
  double acc = 0.0;
  for (int sy = 0; sy < kSupersample; ++sy) {
    for (int sx = 0; sx < kSupersample; ++sx) {
      const double u = x0 + (sx + 0.5) / kSupersample * px - dx;
      const double v = y0 + (sy + 0.5) / kSupersample * px - dy;
      const double top = std::max(0.0, top_profile(spec, orientation, u, v));
      acc += kCameraHeight - top;
    }
  }
  return acc / (kSupersample * kSupersample);
}

DepthImage finalize(std::vector<double> pixels) {
  DepthImage img;
  img.pixels = std::move(pixels);
  img.d_min = *std::min_element(img.pixels.begin(), img.pixels.end());
  img.d_max = *std::max_element(img.pixels.begin(), img.pixels.end());
  return img;
}

}  // namespace

DepthImage render_object_serial(const ObjectSpec& spec, Orientation orientation,
                                double dx, double dy) {
  const double window = 1.2 * std::max(spec.outer_width, spec.outer_depth);
  std::vector<double> pixels(kImagePixels);
  for (int row = 0; row < kImageSize; ++row)
    for (int col = 0; col < kImageSize; ++col)
      pixels[row * kImageSize + col] = pixel_value(spec, orientation, window, dx, dy, row, col);
  return finalize(std::move(pixels));
}

DepthImage render_object(const ObjectSpec& spec, Orientation orientation, double dx, double dy) {
  const double window = 1.2 * std::max(spec.outer_width, spec.outer_depth);
  std::vector<double> pixels(kImagePixels);
#pragma omp parallel for schedule(static)
  for (int row = 0; row < kImageSize; ++row)
    for (int col = 0; col < kImageSize; ++col)
      pixels[row * kImageSize + col] = pixel_value(spec, orientation, window, dx, dy, row, col);
  return finalize(std::move(pixels));
}

NormalizedImage normalize(const DepthImage& img) {
  NormalizedImage out;
  out.d_min = img.d_min;
  out.d_max = img.d_max;
  out.values.resize(img.pixels.size());
  const double range = img.d_max - img.d_min;
  if (range <= 0) {
    std::fill(out.values.begin(), out.values.end(), 0.0);
    return out;
  }
  for (std::size_t i = 0; i < img.pixels.size(); ++i)
    out.values[i] = (img.d_max - img.pixels[i]) / range;
  return out;
}

void write_pgm(const std::string& path, const NormalizedImage& img) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw std::runtime_error("cannot open " + path);
  std::fprintf(f, "P2\n%d %d\n255\n", kImageSize, kImageSize);
  for (int row = 0; row < kImageSize; ++row) {
    for (int col = 0; col < kImageSize; ++col)
      std::fprintf(f, "%d ", static_cast<int>(img.values[row * kImageSize + col] * 255.0 + 0.5));
    std::fprintf(f, "\n");
  }
  std::fclose(f);
}

}  // namespace stacklab
