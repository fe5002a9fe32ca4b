#include "ratkern/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <mutex>
#include <numbers>

#include <fftw3.h>
#include <fmt/format.h>

#include "ratkern/error.hpp"

namespace ratkern::metrics {

namespace {

void require_same(const ImageF& a, const ImageF& b) {
  validate(a);
  validate(b);
  if (a.height != b.height || a.width != b.width)
    throw Error(ErrorCode::DimMismatch, fmt::format("image sizes differ: {}x{} vs {}x{}",
                                                    a.height, a.width, b.height, b.width));
  if (a.peak != b.peak)
    throw Error(ErrorCode::DimMismatch,
                fmt::format("image peaks differ: {} vs {}", a.peak, b.peak));
}

void require_min_size(const ImageF& a, std::size_t n, std::string_view metric) {
  if (a.height < n || a.width < n)
    throw Error(ErrorCode::TooSmall, fmt::format("{} needs at least {}x{} pixels, got {}x{}",
                                                 metric, n, n, a.height, a.width));
}

}  // namespace

std::string_view to_string(Metric metric) {
  switch (metric) {
    case Metric::Psnr: return "psnr";
    case Metric::Ssim: return "ssim";
    case Metric::Fsim: return "fsim";
  }
  return "?";
}

std::optional<Metric> metric_from_name(std::string_view name) {
  for (Metric m : {Metric::Psnr, Metric::Ssim, Metric::Fsim})
    if (to_string(m) == name) return m;
  return std::nullopt;
}

double psnr(const ImageF& a, const ImageF& b) {
  require_same(a, b);
  double sse = 0.0;
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    const double d = a.samples[i] - b.samples[i];
    sse += d * d;
  }
  if (sse == 0.0) return std::numeric_limits<double>::infinity();
  const double mse = sse / static_cast<double>(a.samples.size());
  return 10.0 * std::log10(a.peak * a.peak / mse);
}

// ---------------------------------------------------------------------------
// SSIM

namespace {

// Valid-region correlation with a separable, normalized Gaussian window.
std::vector<double> filter_valid(const std::vector<double>& img, std::size_t h, std::size_t w,
                                 const std::vector<double>& g) {
  const std::size_t n = g.size();
  const std::size_t oh = h - n + 1, ow = w - n + 1;
  std::vector<double> tmp(h * ow);
  for (std::size_t r = 0; r < h; ++r)
    for (std::size_t c = 0; c < ow; ++c) {
      double acc = 0.0;
      for (std::size_t k = 0; k < n; ++k) acc += g[k] * img[r * w + c + k];
      tmp[r * ow + c] = acc;
    }
  std::vector<double> out(oh * ow);
  for (std::size_t r = 0; r < oh; ++r)
    for (std::size_t c = 0; c < ow; ++c) {
      double acc = 0.0;
      for (std::size_t k = 0; k < n; ++k) acc += g[k] * tmp[(r + k) * ow + c];
      out[r * ow + c] = acc;
    }
  return out;
}

}  // namespace

double ssim(const ImageF& a, const ImageF& b, const SsimOptions& options) {
  require_same(a, b);
  if (options.window < 1) throw Error(ErrorCode::InvalidArgument, "SSIM window must be positive");
  const auto n = static_cast<std::size_t>(options.window);
  require_min_size(a, n, "SSIM");

  std::vector<double> g(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = static_cast<double>(i) - static_cast<double>(n - 1) / 2.0;
    g[i] = std::exp(-x * x / (2.0 * options.sigma * options.sigma));
    total += g[i];
  }
  for (double& v : g) v /= total;

  const std::size_t h = a.height, w = a.width, size = h * w;
  std::vector<double> aa(size), bb(size), ab(size);
  for (std::size_t i = 0; i < size; ++i) {
    aa[i] = a.samples[i] * a.samples[i];
    bb[i] = b.samples[i] * b.samples[i];
    ab[i] = a.samples[i] * b.samples[i];
  }
  const auto mu1 = filter_valid(a.samples, h, w, g);
  const auto mu2 = filter_valid(b.samples, h, w, g);
  const auto e11 = filter_valid(aa, h, w, g);
  const auto e22 = filter_valid(bb, h, w, g);
  const auto e12 = filter_valid(ab, h, w, g);

  const double c1 = std::pow(options.k1 * a.peak, 2);
  const double c2 = std::pow(options.k2 * a.peak, 2);
  double sum = 0.0;
  for (std::size_t i = 0; i < mu1.size(); ++i) {
    const double m11 = mu1[i] * mu1[i], m22 = mu2[i] * mu2[i], m12 = mu1[i] * mu2[i];
    const double s11 = e11[i] - m11, s22 = e22[i] - m22, s12 = e12[i] - m12;
    sum += ((2 * m12 + c1) * (2 * s12 + c2)) / ((m11 + m22 + c1) * (s11 + s22 + c2));
  }
  return sum / static_cast<double>(mu1.size());
}

// ---------------------------------------------------------------------------
// FSIM

namespace {

std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

// Complex 2-D DFT of size rows x cols. The FFTW planner is not thread-safe;
// execution of an existing plan is.
class Fft2 {
 public:
  Fft2(std::size_t rows, std::size_t cols)
      : n_(rows * cols),
        in_(fftw_alloc_complex(n_)),
        out_(fftw_alloc_complex(n_)) {
    std::lock_guard lock(fftw_planner_mutex());
    const int r = static_cast<int>(rows), c = static_cast<int>(cols);
    forward_ = fftw_plan_dft_2d(r, c, in_, out_, FFTW_FORWARD, FFTW_ESTIMATE);
    backward_ = fftw_plan_dft_2d(r, c, in_, out_, FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  ~Fft2() {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(backward_);
    fftw_free(in_);
    fftw_free(out_);
  }
  Fft2(const Fft2&) = delete;
  Fft2& operator=(const Fft2&) = delete;

  std::vector<std::complex<double>> forward(const std::vector<std::complex<double>>& x) {
    return run(forward_, x, 1.0);
  }
  // Normalized by 1/N like MATLAB's ifft2.
  std::vector<std::complex<double>> inverse(const std::vector<std::complex<double>>& x) {
    return run(backward_, x, 1.0 / static_cast<double>(n_));
  }

 private:
  std::vector<std::complex<double>> run(fftw_plan plan, const std::vector<std::complex<double>>& x,
                                        double scale) {
    for (std::size_t i = 0; i < n_; ++i) {
      in_[i][0] = x[i].real();
      in_[i][1] = x[i].imag();
    }
    fftw_execute_dft(plan, in_, out_);
    std::vector<std::complex<double>> y(n_);
    for (std::size_t i = 0; i < n_; ++i) y[i] = {out_[i][0] * scale, out_[i][1] * scale};
    return y;
  }

  std::size_t n_;
  fftw_complex* in_;
  fftw_complex* out_;
  fftw_plan forward_;
  fftw_plan backward_;
};

// Normalized frequency of FFT bin j (the ifftshift-ed grid of the reference
// implementation): even n uses step 1/n, odd n uses 1/(n-1).
double frequency(std::size_t j, std::size_t n) {
  const auto signed_index =
      j < (n + 1) / 2 ? static_cast<double>(j) : static_cast<double>(j) - static_cast<double>(n);
  const double denom = n % 2 == 0 ? static_cast<double>(n) : static_cast<double>(n - 1);
  return denom > 0 ? signed_index / denom : 0.0;
}

double median(std::vector<double> v) {
  const std::size_t n = v.size();
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(n / 2), v.end());
  const double hi = v[n / 2];
  if (n % 2 == 1) return hi;
  const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(n / 2));
  return 0.5 * (lo + hi);
}

constexpr int kScales = 4;
constexpr int kOrients = 4;
constexpr double kMinWaveLength = 6.0;
constexpr double kMult = 2.0;
constexpr double kSigmaOnf = 0.55;
constexpr double kDThetaOnSigma = 1.2;
constexpr double kNoiseK = 2.0;
constexpr double kEpsilon = 1e-4;

std::vector<double> phase_congruency_raw(const std::vector<double>& im, std::size_t rows,
                                         std::size_t cols) {
  using cd = std::complex<double>;
  const std::size_t n = rows * cols;
  const double pi = std::numbers::pi;
  Fft2 fft(rows, cols);
  std::vector<cd> spectrum(n);
  for (std::size_t i = 0; i < n; ++i) spectrum[i] = im[i];
  spectrum = fft.forward(spectrum);

  std::vector<double> radius(n), sin_t(n), cos_t(n), lowpass(n);
  for (std::size_t r = 0; r < rows; ++r) {
    const double y = frequency(r, rows);
    for (std::size_t c = 0; c < cols; ++c) {
      const double x = frequency(c, cols);
      const std::size_t i = r * cols + c;
      const double rad = std::sqrt(x * x + y * y);
      const double theta = std::atan2(-y, x);
      lowpass[i] = 1.0 / (1.0 + std::pow(rad / 0.45, 2 * 15));
      radius[i] = rad;
      sin_t[i] = std::sin(theta);
      cos_t[i] = std::cos(theta);
    }
  }
  radius[0] = 1.0;

  std::vector<std::vector<double>> log_gabor(kScales, std::vector<double>(n));
  const double log_sigma = std::log(kSigmaOnf);
  for (int s = 0; s < kScales; ++s) {
    const double fo = 1.0 / (kMinWaveLength * std::pow(kMult, s));
    for (std::size_t i = 0; i < n; ++i) {
      const double l = std::log(radius[i] / fo);
      log_gabor[s][i] = std::exp(-(l * l) / (2.0 * log_sigma * log_sigma)) * lowpass[i];
    }
    log_gabor[s][0] = 0.0;
  }

  const double theta_sigma = pi / kOrients / kDThetaOnSigma;
  std::vector<double> energy_all(n, 0.0), an_all(n, 0.0);
  std::vector<double> filter(n);
  std::vector<std::vector<double>> ifft_filters(kScales, std::vector<double>(n));
  std::vector<std::vector<cd>> eo(kScales);

  for (int o = 0; o < kOrients; ++o) {
    const double angle = o * pi / kOrients;
    std::vector<double> spread(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double ds = sin_t[i] * std::cos(angle) - cos_t[i] * std::sin(angle);
      const double dc = cos_t[i] * std::cos(angle) + sin_t[i] * std::sin(angle);
      const double dtheta = std::abs(std::atan2(ds, dc));
      spread[i] = std::exp(-(dtheta * dtheta) / (2.0 * theta_sigma * theta_sigma));
    }

    std::vector<double> sum_e(n, 0.0), sum_o(n, 0.0), sum_an(n, 0.0), energy(n, 0.0);
    double em_n = 0.0;
    for (int s = 0; s < kScales; ++s) {
      std::vector<cd> product(n), filt_c(n);
      for (std::size_t i = 0; i < n; ++i) {
        filter[i] = log_gabor[s][i] * spread[i];
        product[i] = spectrum[i] * filter[i];
        filt_c[i] = filter[i];
      }
      const auto spatial = fft.inverse(filt_c);
      const double root_n = std::sqrt(static_cast<double>(n));
      for (std::size_t i = 0; i < n; ++i) ifft_filters[s][i] = spatial[i].real() * root_n;
      eo[s] = fft.inverse(product);
      for (std::size_t i = 0; i < n; ++i) {
        sum_an[i] += std::abs(eo[s][i]);
        sum_e[i] += eo[s][i].real();
        sum_o[i] += eo[s][i].imag();
      }
      if (s == 0)
        for (std::size_t i = 0; i < n; ++i) em_n += filter[i] * filter[i];
    }

    for (std::size_t i = 0; i < n; ++i) {
      const double x_energy = std::sqrt(sum_e[i] * sum_e[i] + sum_o[i] * sum_o[i]) + kEpsilon;
      const double mean_e = sum_e[i] / x_energy, mean_o = sum_o[i] / x_energy;
      for (int s = 0; s < kScales; ++s) {
        const double e = eo[s][i].real(), od = eo[s][i].imag();
        energy[i] += e * mean_e + od * mean_o - std::abs(e * mean_o - od * mean_e);
      }
    }

    // Noise threshold from the median response of the smallest scale.
    std::vector<double> e2(n);
    for (std::size_t i = 0; i < n; ++i) e2[i] = std::norm(eo[0][i]);
    const double mean_e2n = -median(std::move(e2)) / std::log(0.5);
    const double noise_power = mean_e2n / em_n;
    double sum_an2 = 0.0, sum_aiaj = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (int s = 0; s < kScales; ++s) sum_an2 += ifft_filters[s][i] * ifft_filters[s][i];
      for (int si = 0; si < kScales - 1; ++si)
        for (int sj = si + 1; sj < kScales; ++sj)
          sum_aiaj += ifft_filters[si][i] * ifft_filters[sj][i];
    }
    const double noise_energy2 = 2 * noise_power * sum_an2 + 4 * noise_power * sum_aiaj;
    const double tau = std::sqrt(noise_energy2 / 2);
    const double noise_energy = tau * std::sqrt(pi / 2);
    const double noise_sigma = std::sqrt((2 - pi / 2) * tau * tau);
    const double threshold = (noise_energy + kNoiseK * noise_sigma) / 1.7;

    for (std::size_t i = 0; i < n; ++i) {
      energy_all[i] += std::max(energy[i] - threshold, 0.0);
      an_all[i] += sum_an[i];
    }
  }

  std::vector<double> pc(n);
  for (std::size_t i = 0; i < n; ++i) pc[i] = an_all[i] > 0.0 ? energy_all[i] / an_all[i] : 0.0;
  return pc;
}

// conv2(im, k, 'same') with zero padding for a 3x3 kernel.
std::vector<double> conv3_same(const std::vector<double>& im, std::size_t rows, std::size_t cols,
                               const double (&k)[3][3]) {
  std::vector<double> out(rows * cols, 0.0);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) {
      double acc = 0.0;
      for (int dr = -1; dr <= 1; ++dr)
        for (int dc = -1; dc <= 1; ++dc) {
          const auto rr = static_cast<long long>(r) - dr;
          const auto cc = static_cast<long long>(c) - dc;
          if (rr < 0 || cc < 0 || rr >= static_cast<long long>(rows) ||
              cc >= static_cast<long long>(cols))
            continue;
          acc += k[dr + 1][dc + 1] * im[static_cast<std::size_t>(rr) * cols +
                                        static_cast<std::size_t>(cc)];
        }
      out[r * cols + c] = acc;
    }
  return out;
}

struct Prepared {
  std::vector<double> y;
  std::size_t rows;
  std::size_t cols;
};

// Scale to 0..255, then average-filter and subsample by F = round(min/256).
Prepared prepare(const ImageF& img) {
  const double scale = 255.0 / img.peak;
  const std::size_t h = img.height, w = img.width;
  const auto f = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::lround(static_cast<double>(std::min(h, w)) / 256.0)));
  std::vector<double> y(h * w);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = img.samples[i] * scale;
  if (f == 1) return {std::move(y), h, w};

  // conv2(Y, ones(F)/F^2, 'same') sampled at 1:F:end.
  const auto half = static_cast<long long>((f - 1) / 2);
  const std::size_t oh = (h + f - 1) / f, ow = (w + f - 1) / f;
  std::vector<double> out(oh * ow);
  for (std::size_t r = 0; r < oh; ++r)
    for (std::size_t c = 0; c < ow; ++c) {
      double acc = 0.0;
      for (std::size_t i = 0; i < f; ++i)
        for (std::size_t j = 0; j < f; ++j) {
          const long long rr = static_cast<long long>(r * f + i) - half;
          const long long cc = static_cast<long long>(c * f + j) - half;
          if (rr < 0 || cc < 0 || rr >= static_cast<long long>(h) || cc >= static_cast<long long>(w))
            continue;
          acc += y[static_cast<std::size_t>(rr) * w + static_cast<std::size_t>(cc)];
        }
      out[r * ow + c] = acc / static_cast<double>(f * f);
    }
  return {std::move(out), oh, ow};
}

}  // namespace

std::vector<double> phase_congruency(const ImageF& image) {
  validate(image);
  return phase_congruency_raw(image.samples, image.height, image.width);
}

double fsim(const ImageF& a, const ImageF& b) {
  require_same(a, b);
  require_min_size(a, 32, "FSIM");
  const Prepared pa = prepare(a), pb = prepare(b);
  const std::size_t rows = pa.rows, cols = pa.cols, n = rows * cols;
  const auto pc1 = phase_congruency_raw(pa.y, rows, cols);
  const auto pc2 = phase_congruency_raw(pb.y, rows, cols);

  static constexpr double dx[3][3] = {{3 / 16.0, 0, -3 / 16.0},
                                      {10 / 16.0, 0, -10 / 16.0},
                                      {3 / 16.0, 0, -3 / 16.0}};
  static constexpr double dy[3][3] = {{3 / 16.0, 10 / 16.0, 3 / 16.0},
                                      {0, 0, 0},
                                      {-3 / 16.0, -10 / 16.0, -3 / 16.0}};
  const auto gx1 = conv3_same(pa.y, rows, cols, dx), gy1 = conv3_same(pa.y, rows, cols, dy);
  const auto gx2 = conv3_same(pb.y, rows, cols, dx), gy2 = conv3_same(pb.y, rows, cols, dy);

  constexpr double t1 = 0.85, t2 = 160.0;
  double num = 0.0, den = 0.0, unweighted = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double g1 = std::hypot(gx1[i], gy1[i]), g2 = std::hypot(gx2[i], gy2[i]);
    const double pc_sim = (2 * pc1[i] * pc2[i] + t1) / (pc1[i] * pc1[i] + pc2[i] * pc2[i] + t1);
    const double g_sim = (2 * g1 * g2 + t2) / (g1 * g1 + g2 * g2 + t2);
    const double pcm = std::max(pc1[i], pc2[i]);
    num += g_sim * pc_sim * pcm;
    den += pcm;
    unweighted += g_sim * pc_sim;
  }
  // Featureless pairs (no phase congruency anywhere) fall back to the plain mean.
  return den > 0.0 ? num / den : unweighted / static_cast<double>(n);
}

double compute(Metric metric, const ImageF& reference, const ImageF& test) {
  switch (metric) {
    case Metric::Psnr: return psnr(reference, test);
    case Metric::Ssim: return ssim(reference, test);
    case Metric::Fsim: return fsim(reference, test);
  }
  throw Error(ErrorCode::InvalidArgument, "unknown metric");
}

MetricReport evaluate(const ImageF& reference, const ImageF& test) {
  return {psnr(reference, test), ssim(reference, test), fsim(reference, test)};
}

nlohmann::json metric_value_json(double value) {
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  return value;
}

nlohmann::json to_json(const MetricReport& report) {
  return {{"psnr", metric_value_json(report.psnr)},
          {"ssim", report.ssim},
          {"fsim", report.fsim}};
}

Normalized normalize_unity(const std::vector<double>& values) {
  if (values.empty()) throw Error(ErrorCode::InvalidArgument, "cannot normalize an empty list");
  Normalized out;
  out.values.resize(values.size());
  // +inf (identical images under PSNR) ranks above every finite value.
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  bool any_inf = false;
  for (double v : values) {
    if (std::isnan(v)) throw Error(ErrorCode::InvalidArgument, "cannot normalize NaN");
    if (std::isinf(v) && v > 0) {
      any_inf = true;
      continue;
    }
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const bool all_inf = !std::isfinite(lo) && any_inf;
  if (all_inf || (!any_inf && hi == lo)) {
    out.degenerate = true;
    std::fill(out.values.begin(), out.values.end(), 0.0);
    return out;
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double v = values[i];
    if (std::isinf(v) && v > 0)
      out.values[i] = 1.0;
    else
      out.values[i] = hi == lo ? 0.0 : (v - lo) / (hi - lo);
  }
  return out;
}

}  // namespace ratkern::metrics
