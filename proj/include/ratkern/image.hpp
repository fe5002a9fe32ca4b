#pragma once

#include <cstddef>
#include <vector>

namespace ratkern {

/// Grayscale image, row-major, with the dynamic-range maximum carried along.
struct ImageF {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<double> samples;
  double peak = 255.0;

  ImageF() = default;
  ImageF(std::size_t h, std::size_t w, double fill = 0.0, double peak_value = 255.0)
      : height(h), width(w), samples(h * w, fill), peak(peak_value) {}

  double& at(std::size_t row, std::size_t col) { return samples[row * width + col]; }
  double at(std::size_t row, std::size_t col) const { return samples[row * width + col]; }

  bool operator==(const ImageF&) const = default;
};

/// Throws InvalidArgument on zero dimensions, a size mismatch or a non-finite
/// sample.
void validate(const ImageF& image);

/// uint8 emulation: clamp to [0, peak] and round half away from zero.
ImageF quantize(const ImageF& image);

double max_abs_difference(const ImageF& a, const ImageF& b);

}  // namespace ratkern
