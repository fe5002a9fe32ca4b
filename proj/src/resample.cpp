#include "ratkern/resample.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "ratkern/error.hpp"
#include "ratkern/parallel.hpp"

namespace ratkern::resample {

namespace {

struct Mapping {
  double scale;
  double kernel_scale;  // h(s) = kernel_scale * phi(kernel_scale * s)
  double radius;
};

Mapping make_mapping(std::size_t in_len, std::size_t out_len, const PiecewiseRationalKernel& k,
                     bool antialias) {
  if (in_len == 0 || out_len == 0)
    throw Error(ErrorCode::InvalidArgument, "resample lengths must be positive");
  const double scale = static_cast<double>(out_len) / static_cast<double>(in_len);
  if (antialias && scale < 1.0) return {scale, scale, k.support() / scale};
  return {scale, 1.0, k.support()};
}

// Right-sided limit of h: the box kernel becomes [-1/2, 1/2) as in imresize;
// continuous kernels are unaffected.
double tap(const PiecewiseRationalKernel& k, const Mapping& map, double s) {
  return map.kernel_scale * k.derivative(map.kernel_scale * s, 0, kernel::Side::Right);
}

double source_coordinate(std::size_t x, double scale) {
  return (static_cast<double>(x) + 0.5) / scale - 0.5;
}

}  // namespace

std::size_t fold_index(long long index, std::size_t n) {
  const long long period = 2 * static_cast<long long>(n);
  long long m = index % period;
  if (m < 0) m += period;
  return static_cast<std::size_t>(m < static_cast<long long>(n) ? m : period - 1 - m);
}

ResizeWeights compute_weights(std::size_t in_len, std::size_t out_len,
                              const PiecewiseRationalKernel& kernel, bool antialias) {
  const Mapping map = make_mapping(in_len, out_len, kernel, antialias);
  const long long taps = static_cast<long long>(std::ceil(2.0 * map.radius)) + 2;

  ResizeWeights plan{in_len, out_len, {}};
  plan.rows.reserve(out_len);
  std::vector<double> dense(in_len);
  for (std::size_t x = 0; x < out_len; ++x) {
    const double u = source_coordinate(x, map.scale);
    const long long left = static_cast<long long>(std::floor(u - map.radius));
    std::fill(dense.begin(), dense.end(), 0.0);
    double sum = 0.0;
    std::size_t lo = in_len, hi = 0;
    for (long long p = 0; p < taps; ++p) {
      const long long j = left + p;
      const double w = tap(kernel, map, u - static_cast<double>(j));
      if (w == 0.0) continue;
      const std::size_t f = fold_index(j, in_len);
      dense[f] += w;
      sum += w;
      lo = std::min(lo, f);
      hi = std::max(hi, f);
    }
    if (sum == 0.0 || lo > hi)
      throw Error(ErrorCode::EmptyRow,
                  fmt::format("output index {} of {} receives no input weight", x, out_len));
    WeightRow row;
    row.start = lo;
    row.weights.assign(dense.begin() + static_cast<std::ptrdiff_t>(lo),
                       dense.begin() + static_cast<std::ptrdiff_t>(hi) + 1);
    for (double& w : row.weights) w /= sum;
    row.anchor = static_cast<std::size_t>(
        std::max_element(row.weights.begin(), row.weights.end(),
                         [](double a, double b) { return std::abs(a) < std::abs(b); }) -
        row.weights.begin());
    plan.rows.push_back(std::move(row));
  }
  return plan;
}

namespace {

// Both passes accumulate ref + sum w_k (x_k - ref) with ref the anchor tap,
// so constant input is reproduced exactly even though the weights sum to 1
// only up to rounding.

// Resamples along the contiguous axis (within each row).
ImageF pass_rows(const ImageF& in, const ResizeWeights& plan, unsigned threads) {
  ImageF out(in.height, plan.out_len, 0.0, in.peak);
  parallel_for(
      in.height,
      [&](std::size_t r) {
        const double* src = &in.samples[r * in.width];
        double* dst = &out.samples[r * out.width];
        for (std::size_t x = 0; x < plan.out_len; ++x) {
          const WeightRow& row = plan.rows[x];
          const double* base = src + row.start;
          const double ref = base[row.anchor];
          double acc = 0.0;
          for (std::size_t k = 0; k < row.weights.size(); ++k)
            acc += row.weights[k] * (base[k] - ref);
          dst[x] = ref + acc;
        }
      },
      threads);
  return out;
}

ImageF pass_columns(const ImageF& in, const ResizeWeights& plan, unsigned threads) {
  ImageF out(plan.out_len, in.width, 0.0, in.peak);
  parallel_for(
      plan.out_len,
      [&](std::size_t y) {
        const WeightRow& row = plan.rows[y];
        double* dst = &out.samples[y * out.width];
        const double* ref = &in.samples[(row.start + row.anchor) * in.width];
        for (std::size_t k = 0; k < row.weights.size(); ++k) {
          if (k == row.anchor) continue;
          const double w = row.weights[k];
          const double* src = &in.samples[(row.start + k) * in.width];
          for (std::size_t c = 0; c < in.width; ++c) dst[c] += w * (src[c] - ref[c]);
        }
        for (std::size_t c = 0; c < in.width; ++c) dst[c] += ref[c];
      },
      threads);
  return out;
}

}  // namespace

ImageF resize(const ImageF& image, std::size_t out_h, std::size_t out_w,
              const PiecewiseRationalKernel& kernel, const ResizeOptions& options) {
  validate(image);
  const ResizeWeights wx = compute_weights(image.width, out_w, kernel, options.antialias);
  const ResizeWeights wy = compute_weights(image.height, out_h, kernel, options.antialias);
  auto finish = [&](ImageF img) { return options.quantize_each_pass ? quantize(img) : img; };
  if (options.order == PassOrder::RowsFirst)
    return finish(pass_columns(finish(pass_rows(image, wx, options.threads)), wy, options.threads));
  return finish(pass_rows(finish(pass_columns(image, wy, options.threads)), wx, options.threads));
}

namespace {

// Dense out_len x in_len matrix built by visiting every integer within the
// effective radius, independently of the tap-count formula used above.
std::vector<std::vector<double>> dense_weights(std::size_t in_len, std::size_t out_len,
                                               const PiecewiseRationalKernel& kernel,
                                               bool antialias) {
  const Mapping map = make_mapping(in_len, out_len, kernel, antialias);
  std::vector<std::vector<double>> w(out_len, std::vector<double>(in_len, 0.0));
  for (std::size_t x = 0; x < out_len; ++x) {
    const double u = source_coordinate(x, map.scale);
    const auto first = static_cast<long long>(std::ceil(u - map.radius)) - 1;
    const auto last = static_cast<long long>(std::floor(u + map.radius)) + 1;
    double sum = 0.0;
    for (long long j = first; j <= last; ++j) {
      const double v = tap(kernel, map, u - static_cast<double>(j));
      w[x][fold_index(j, in_len)] += v;
      sum += v;
    }
    for (double& v : w[x]) v /= sum;
  }
  return w;
}

}  // namespace

ImageF naive_resize(const ImageF& image, std::size_t out_h, std::size_t out_w,
                    const PiecewiseRationalKernel& kernel, bool antialias) {
  validate(image);
  const auto wx = dense_weights(image.width, out_w, kernel, antialias);
  const auto wy = dense_weights(image.height, out_h, kernel, antialias);
  ImageF out(out_h, out_w, 0.0, image.peak);
  for (std::size_t y = 0; y < out_h; ++y)
    for (std::size_t x = 0; x < out_w; ++x) {
      double acc = 0.0;
      for (std::size_t i = 0; i < image.height; ++i)
        for (std::size_t j = 0; j < image.width; ++j)
          acc += wy[y][i] * wx[x][j] * image.at(i, j);
      out.at(y, x) = acc;
    }
  return out;
}

ImageF pipeline_reduce(const ImageF& image, const PipelineOptions& options) {
  validate(image);
  const std::size_t f = options.factor;
  if (f == 0 || image.height % f != 0 || image.width % f != 0)
    throw Error(ErrorCode::DimsNotDivisible,
                fmt::format("{}x{} image is not divisible by the factor {}", image.height,
                            image.width, f));
  static const PiecewiseRationalKernel bicubic =
      kernel::build_kernel(kernel::KernelSpec::cubic(-2.5));
  const ResizeOptions reduce{.antialias = true,
                             .quantize_each_pass = options.quantize && options.quantize_each_pass,
                             .threads = options.threads};
  ImageF reduced = resize(image, image.height / f, image.width / f, bicubic, reduce);
  return options.quantize ? quantize(reduced) : reduced;
}

ImageF pipeline_magnify(const ImageF& reduced, std::size_t out_h, std::size_t out_w,
                        const PiecewiseRationalKernel& magnify_kernel,
                        const PipelineOptions& options) {
  const ResizeOptions magnify{.antialias = false,
                              .quantize_each_pass = options.quantize && options.quantize_each_pass,
                              .threads = options.threads};
  ImageF out = resize(reduced, out_h, out_w, magnify_kernel, magnify);
  return options.quantize ? quantize(out) : out;
}

PipelineResult experiment_pipeline(const ImageF& image,
                                   const PiecewiseRationalKernel& magnify_kernel,
                                   const PipelineOptions& options) {
  PipelineResult result;
  result.reduced = pipeline_reduce(image, options);
  result.magnified =
      pipeline_magnify(result.reduced, image.height, image.width, magnify_kernel, options);
  return result;
}

}  // namespace ratkern::resample
