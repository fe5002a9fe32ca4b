#include "ratkern/image.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "ratkern/error.hpp"

namespace ratkern {

void validate(const ImageF& image) {
  if (image.height == 0 || image.width == 0)
    throw Error(ErrorCode::InvalidArgument,
                fmt::format("image dimensions must be positive, got {}x{}", image.height,
                            image.width));
  if (image.samples.size() != image.height * image.width)
    throw Error(ErrorCode::InvalidArgument,
                fmt::format("image holds {} samples, expected {}", image.samples.size(),
                            image.height * image.width));
  if (!(image.peak > 0.0) || !std::isfinite(image.peak))
    throw Error(ErrorCode::InvalidArgument, "image peak must be positive and finite");
  for (double v : image.samples)
    if (!std::isfinite(v)) throw Error(ErrorCode::InvalidArgument, "image has a non-finite sample");
}

ImageF quantize(const ImageF& image) {
  ImageF out = image;
  for (double& v : out.samples) v = std::round(std::clamp(v, 0.0, image.peak));
  return out;
}

double max_abs_difference(const ImageF& a, const ImageF& b) {
  if (a.height != b.height || a.width != b.width)
    throw Error(ErrorCode::DimMismatch,
                fmt::format("{}x{} vs {}x{}", a.height, a.width, b.height, b.width));
  double worst = 0.0;
  for (std::size_t i = 0; i < a.samples.size(); ++i)
    worst = std::max(worst, std::abs(a.samples[i] - b.samples[i]));
  return worst;
}

}  // namespace ratkern
