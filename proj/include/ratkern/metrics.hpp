#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "ratkern/image.hpp"

namespace ratkern::metrics {

enum class Metric { Psnr, Ssim, Fsim };

std::string_view to_string(Metric metric);
std::optional<Metric> metric_from_name(std::string_view name);

/// 10 log10(peak^2 / MSE). Identical images give +infinity.
double psnr(const ImageF& a, const ImageF& b);

struct SsimOptions {
  int window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
};

/// Mean of the SSIM map over the valid (unpadded) window positions.
double ssim(const ImageF& a, const ImageF& b, const SsimOptions& options = {});

/// Luminance FSIM (phase congruency and Scharr gradient similarity), on the
/// 0..255 scale.
double fsim(const ImageF& a, const ImageF& b);

/// Phase congruency map of a 0..255 image (4 scales, 4 orientations).
std::vector<double> phase_congruency(const ImageF& image);

double compute(Metric metric, const ImageF& reference, const ImageF& test);

struct MetricReport {
  double psnr = 0.0;
  double ssim = 0.0;
  double fsim = 0.0;
};

MetricReport evaluate(const ImageF& reference, const ImageF& test);

/// PSNR of identical images is reported as the string "inf".
nlohmann::json metric_value_json(double value);
nlohmann::json to_json(const MetricReport& report);

struct Normalized {
  std::vector<double> values;
  bool degenerate = false;  // max == min; every value mapped to 0
};

/// (v - min) / (max - min) elementwise.
Normalized normalize_unity(const std::vector<double>& values);

}  // namespace ratkern::metrics
