#include "ratkern/verify.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <fmt/format.h>

#include "ratkern/error.hpp"

namespace ratkern::verify {

using kernel::Family;
using kernel::Side;

namespace {

std::vector<double> junctions(const PiecewiseRationalKernel& k) {
  std::vector<double> out{0.0};
  for (const auto& p : k.pieces()) out.push_back(p.hi);
  return out;
}

int shift_radius(const PiecewiseRationalKernel& k) {
  return static_cast<int>(std::ceil(k.support())) + 1;
}

}  // namespace

double check_partition_of_unity(const PiecewiseRationalKernel& kernel, std::size_t grid_points) {
  if (grid_points < 2) throw Error(ErrorCode::InvalidArgument, "grid_points must be >= 2");
  const int r = shift_radius(kernel);
  double worst = 0.0;
  for (std::size_t j = 0; j < grid_points; ++j) {
    const double t = static_cast<double>(j) / static_cast<double>(grid_points - 1);
    double sum = 0.0;
    // Right-sided limits so that half-open boxes tile the line.
    for (int i = -r; i <= r; ++i) sum += kernel.derivative(t - i, 0, Side::Right);
    worst = std::max(worst, std::abs(sum - 1.0));
  }
  return worst;
}

std::vector<JunctionMismatch> check_continuity(const PiecewiseRationalKernel& kernel,
                                               int max_order) {
  if (max_order < 0 || max_order > 3)
    throw Error(ErrorCode::InvalidArgument, "max_order must be in 0..3");
  std::vector<JunctionMismatch> table;
  for (double t : junctions(kernel)) {
    for (int k = 0; k <= max_order; ++k) {
      JunctionMismatch m;
      m.t = t;
      m.order = k;
      m.left = kernel.derivative(t, k, Side::Left);
      m.right = kernel.derivative(t, k, Side::Right);
      m.mismatch = std::abs(m.left - m.right);
      table.push_back(m);
    }
  }
  return table;
}

double max_mismatch(const std::vector<JunctionMismatch>& table, int order) {
  double worst = 0.0;
  for (const auto& m : table)
    if (m.order == order) worst = std::max(worst, m.mismatch);
  return worst;
}

double mismatch_at(const std::vector<JunctionMismatch>& table, double t, int order) {
  for (const auto& m : table)
    if (m.t == t && m.order == order) return m.mismatch;
  throw Error(ErrorCode::InvalidArgument, fmt::format("no junction at t={} order={}", t, order));
}

ApproximationOrder approximation_order_detail(const PiecewiseRationalKernel& kernel, int max_L,
                                              std::size_t grid_points) {
  if (max_L < 1 || max_L > 4) throw Error(ErrorCode::InvalidArgument, "max_L must be in 1..4");
  const int r = shift_radius(kernel);
  ApproximationOrder result;
  bool reproducing = true;
  for (int d = 0; d < max_L; ++d) {
    const auto g = [&](double t) {
      double sum = 0.0;
      for (int i = -r; i <= r; ++i) sum += std::pow(t - i, d) * kernel(t - i);
      return sum;
    };
    const double c = g(0.0);
    double dev = 0.0;
    for (std::size_t j = 0; j < grid_points; ++j) {
      const double t = static_cast<double>(j) / static_cast<double>(grid_points - 1);
      dev = std::max(dev, std::abs(g(t) - c));
    }
    result.constants.push_back(c);
    result.deviations.push_back(dev);
    if (reproducing && dev <= kApproximationTolerance)
      result.order = d + 1;
    else
      reproducing = false;
  }
  return result;
}

double check_integral(const PiecewiseRationalKernel& kernel) {
  using boost::math::quadrature::gauss_kronrod;
  double total = 0.0;
  for (const auto& piece : kernel.pieces()) {
    double error = 0.0;
    double l1 = 0.0;
    const double part = gauss_kronrod<double, 31>::integrate(
        [&piece](double u) { return piece.value(u); }, piece.lo, piece.hi, 10, 1e-13, &error,
        &l1);
    // Rounding noise in N/D grows with the coefficient magnitudes, not with |phi|.
    double scale = std::max(1.0, l1);
    double coef = 0.0;
    for (double c : piece.num) coef += std::abs(c);
    const double dmin = std::min(std::abs(piece.denominator(piece.lo)),
                                 std::abs(piece.denominator(piece.hi)));
    scale = std::max(scale, coef / dmin);
    if (!std::isfinite(part) || error > 1e-11 * scale)
      throw Error(ErrorCode::QuadratureNonconvergence,
                  fmt::format("quadrature on [{}, {}] did not converge (error {})", piece.lo,
                              piece.hi, error));
    total += part;
  }
  return 2.0 * total;
}

std::vector<double> sinc_residuals(const PiecewiseRationalKernel& kernel) {
  std::vector<double> out{std::abs(kernel(0.0) - 1.0)};
  for (int n = 1; n <= static_cast<int>(kernel.support()); ++n) out.push_back(std::abs(kernel(n)));
  return out;
}

double symmetry_residual(const PiecewiseRationalKernel& kernel, std::size_t grid_points) {
  double worst = 0.0;
  const double s = kernel.support();
  for (std::size_t j = 0; j < grid_points; ++j) {
    const double t = -s + 2 * s * static_cast<double>(j) / static_cast<double>(grid_points - 1);
    worst = std::max(worst, std::abs(kernel(t) - kernel(-t)));
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Constraint systems

RawCoefficients raw_coefficients(const PiecewiseRationalKernel& kernel) {
  if (kernel.pieces().size() != 2)
    throw Error(ErrorCode::UnsupportedFamily,
                fmt::format("{} has no rational constraint system", to_string(kernel.spec())));
  RawCoefficients raw;
  const auto fill = [&](std::size_t index, std::array<double, 5>& a, double& b) {
    const auto num = kernel.global_numerator(index);
    const auto den = kernel.global_denominator(index);
    if (den[0] == 0.0)
      throw Error(ErrorCode::DenominatorNormalization,
                  fmt::format("{}: denominator of piece {} has no constant term",
                              to_string(kernel.spec()), index));
    for (int i = 0; i < 5; ++i) a[i] = num[i] / den[0];
    b = den[1] / den[0];
  };
  fill(0, raw.a0, raw.b01);
  fill(1, raw.a1, raw.b11);
  return raw;
}

std::array<double, 4> cubic_linear_unity_system(double a01, double a03, double a13, double b) {
  const double a01s = a01 * a01, bs = b * b;
  return {
      (2 * b + 1) * (a03 * b - a13 * a01 - a01 * b + a03 - a01 - a13 - 2 * b - 2),
      a13 * a01s + 2 * a13 * a01s * b - 4 * a03 * a01 * bs - a13 * a01 - 6 * a03 * a01 * b -
          4 * a13 * a01 * b + a03 * bs + 3 * a03 * b - a01 * bs - 3 * a01 * b - 2 * a03 * a01 +
          a03 - a01 - 4 * a13 * b - a13 - 2 * bs - 6 * b - 2,
      a13 * a01s + 8 * a13 * a01s * b + 2 * a03 * a01 * bs - 6 * a03 * a01 * b -
          2 * a13 * a01 * b - a03 * bs + a01 * bs - 2 * a03 * a01 - 2 * a13 * b + 2 * bs,
      a01 * b * (a03 * b + a13 * a01),
  };
}

std::vector<Residual> constraint_residuals(const KernelSpec& spec) {
  if (spec.family == Family::Nearest || spec.family == Family::Linear)
    throw Error(ErrorCode::UnsupportedFamily,
                fmt::format("{} has no rational constraint system", to_string(spec)));
  const auto kernel = kernel::build_kernel(spec, {.allow_removable_boundary = true});
  const RawCoefficients raw = raw_coefficients(kernel);
  const auto& [a00, a01, a02, a03, a04] = raw.a0;
  const auto& [a10, a11, a12, a13, a14] = raw.a1;
  const double b01 = raw.b01, b11 = raw.b11;

  std::vector<Residual> out;
  const auto add = [&](std::string name, double value) {
    out.push_back({std::move(name), std::abs(value)});
  };

  add("interp: a00 = 1", a00 - 1);
  add("interp: phi(1-) = 0", (a00 + a01 + a02 + a03 + a04) / (1 + b01));
  add("interp: phi(1+) = 0", (a10 + a11 + a12 + a13 + a14) / (1 + b11));
  add("interp: phi(2-) = 0", (a10 + 2 * a11 + 4 * a12 + 8 * a13 + 16 * a14) / (1 + 2 * b11));
  add("c1: phi'(0+) = phi'(0-)", (-a01 + b01) - (a01 - b01));

  // The removable-boundary kernels lose C1 at t = 1 and t = 2.
  const bool only_c0 = spec.family == Family::S2 || spec.family == Family::CubicAlt ||
                       ((spec.family == Family::S31 || spec.family == Family::S41v2) &&
                        spec.a01 == -1.0);
  const bool cubic_numerators = spec.family == Family::S2 || spec.family == Family::Cubic ||
                                spec.family == Family::CubicAlt || spec.family == Family::S31;
  if (cubic_numerators) {
    add("interp: a02 = -1-a01-a03", a02 - (-1 - a01 - a03));
    add("interp: a11 = 2a13-3a10/2", a11 - (2 * a13 - 1.5 * a10));
    add("interp: a12 = -3a13+a10/2", a12 - (-3 * a13 + 0.5 * a10));
    if (!only_c0) {
      add("c1: phi'(1-) = phi'(1+)",
          (-2 - a01 + a03) / (1 + b01) + (2 * a13 + a10) / (2 + 2 * b11));
      add("c1: phi'(2-) = 0", (4 * a13 + a10) / (2 + 4 * b11));
    }
  } else {
    add("interp: a04 = -1-a01-a02-a03", a04 - (-1 - a01 - a02 - a03));
    add("interp: a13", a13 - (-15.0 / 8 * a10 - 7.0 / 4 * a11 - 1.5 * a12));
    add("interp: a14", a14 - (7.0 / 8 * a10 + 3.0 / 4 * a11 + 0.5 * a12));
    if (!only_c0) {
      add("c1: phi'(1-) = phi'(1+)", (4 + 3 * a01 + 2 * a02 + a03) / (1 + b01) -
                                          (17 * a10 + 10 * a11 + 4 * a12) / (8 + 8 * b11));
      add("c1: phi'(2-) = 0", (11 * a10 + 8 * a11 + 4 * a12) / (2 + 4 * b11));
    }
  }

  switch (spec.family) {
    case Family::S31: {
      add("c1 solution: a10 = -4a13", a10 + 4 * a13);
      add("c1 solution: b01 = a01", b01 - a01);
      add("c1 solution: a03",
          a03 - (2 + a13 + a01 + a13 * a01 + 2 * b11 + a01 * b11) / (1 + b11));
      add("solution (vi): a03 = 1", a03 - 1);
      add("solution (vi): a13 = -1-b11", a13 - (-1 - b11));
      add("solution (vi): a01 = b11/(1+b11)", a01 - b11 / (1 + b11));
      const auto unity = cubic_linear_unity_system(a01, a03, a13, b11);
      for (std::size_t i = 0; i < unity.size(); ++i)
        add(fmt::format("unity system eq {}", i + 1), unity[i]);
      break;
    }
    case Family::S41v1:
    case Family::S41v2:
    case Family::S41v3: {
      add("c1 solution 1: a03 = -4-3a01-2a02", a03 - (-4 - 3 * a01 - 2 * a02));
      add("c1 solution 1: a11 = -3a10", a11 + 3 * a10);
      add("c1 solution 1: a12 = 13a10/4", a12 - 13.0 / 4 * a10);
      add("c1 solution 1: b01 = a01", b01 - a01);
      if (spec.family == Family::S41v1) {
        add("unity: a10 = -4(3+a02)/(1+2a01)", a10 + 4 * (3 + a02) / (1 + 2 * a01));
        add("unity: b11 = -a01/(1+2a01)", b11 + a01 / (1 + 2 * a01));
      } else if (spec.family == Family::S41v2) {
        add("unity: a10 = -4(3+a02)/(1-a01)", a10 + 4 * (3 + a02) / (1 - a01));
        add("unity: b11 = a01/(1-a01)", b11 - a01 / (1 - a01));
      } else {
        add("unity: a01 = -1/2", a01 + 0.5);
        add("unity: a10 = -8(3+a02)/3", a10 + 8 * (3 + a02) / 3);
        add("unity: b11 = -1/3", b11 + 1.0 / 3);
      }
      break;
    }
    case Family::S4:
    case Family::S41v4:
    case Family::S41v5: {
      add("c1 solution 2: a12 = (-11a10-8a11)/4", a12 - (-11 * a10 - 8 * a11) / 4);
      add("c1 solution 2: b01 = a01", b01 - a01);
      const double slope = 4 + 3 * a01 + 2 * a02 + a03;
      // Solving the t = 1 C1 equation for b11 also yields a 3 a10 term.
      if (slope != 0.0)
        add("c1 solution 2: b11",
            b11 - (-16 - 12 * a01 - 8 * a02 - 4 * a03 + 3 * a10 + 3 * a01 * a10 + a11 +
                   a01 * a11) /
                      (4 * slope));
      if (spec.family == Family::S41v5) {
        add("unity: a10", a10 - 4 * (5 + 6 * a01 + 3 * a02 + 2 * a03) / (1 + 2 * a01));
        add("unity: a11", a11 + 4 * (11 + 15 * a01 + 7 * a02 + 5 * a03) / (1 + 2 * a01));
      } else {
        add("unity: a10", a10 - 4 *
                                    (-5 + a01 + 3 * a01 * a01 - 3 * a02 + 3 * a01 * a02 -
                                     2 * a03 + a01 * a03) /
                                    (-1 + a01 * a01));
        add("unity: a11", a11 - 4 *
                                    (-11 + 6 * a01 + 9 * a01 * a01 - 7 * a02 + 9 * a01 * a02 -
                                     5 * a03 + 3 * a01 * a03) /
                                    (1 - a01 * a01));
      }
      break;
    }
    default:
      break;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Reports

PropertyReport make_report(const KernelSpec& spec, int max_continuity_order) {
  const auto k = kernel::build_kernel(spec, {.allow_removable_boundary = true});
  PropertyReport r;
  r.kernel = spec;
  r.partition_residual = check_partition_of_unity(k, 1001);
  r.continuity = check_continuity(k, max_continuity_order);
  r.sinc_residuals = sinc_residuals(k);
  r.integral = check_integral(k);
  const auto order = approximation_order_detail(k, 4);
  r.approx_order = order.order;
  r.approx_constants = order.constants;
  r.symmetry_residual = symmetry_residual(k);
  r.derivative_left_at_one = k.derivative(1.0, 1, Side::Left);
  r.derivative_right_at_one = k.derivative(1.0, 1, Side::Right);
  return r;
}

namespace {

// Highest k such that every junction matches to 1e-9 for all orders <= k.
int detected_continuity(const PropertyReport& r) {
  int max_order = -1;
  for (const auto& m : r.continuity) max_order = std::max(max_order, m.order);
  for (int k = 0; k <= max_order; ++k)
    if (max_mismatch(r.continuity, k) > 1e-9) return k - 1;
  return max_order;
}

}  // namespace

nlohmann::json to_json(const PropertyReport& r) {
  nlohmann::json j;
  j["kernel"] = kernel::to_string(r.kernel);
  j["family"] = kernel::family_info(r.kernel.family).name;
  j["partition_residual"] = r.partition_residual;
  j["continuity_class"] = detected_continuity(r);
  nlohmann::json cont = nlohmann::json::array();
  for (const auto& m : r.continuity)
    cont.push_back({{"t", m.t}, {"order", m.order}, {"left", m.left}, {"right", m.right},
                    {"mismatch", m.mismatch}});
  j["continuity"] = cont;
  j["sinc_residuals"] = r.sinc_residuals;
  j["integral"] = r.integral;
  j["approx_order"] = r.approx_order;
  j["approx_constants"] = r.approx_constants;
  j["symmetry_residual"] = r.symmetry_residual;
  j["derivative_at_one"] = {{"left", r.derivative_left_at_one},
                            {"right", r.derivative_right_at_one}};
  return j;
}

std::string format_table(const std::vector<PropertyReport>& reports) {
  std::ostringstream os;
  os << fmt::format("{:<44} {:>10} {:>6} {:>10} {:>22} {:>14} {:>6} {:>10}\n", "Kernel",
                    "Support", "Params", "Continuity", "Derivative(t=1-/1+)", "Integral",
                    "Order", "PoU resid");
  for (const auto& r : reports) {
    const auto& info = kernel::family_info(r.kernel.family);
    const int params = info.uses_a01 + info.uses_a02 + info.uses_a03;
    const int cls = detected_continuity(r);
    const std::string cont = cls < 0 ? "C^-1" : fmt::format("C^{}", cls);
    os << fmt::format("{:<44} {:>10} {:>6} {:>10} {:>22} {:>14.10f} {:>6} {:>10.2e}\n",
                      kernel::to_string(r.kernel), fmt::format("[-{0},{0}]", info.support),
                      params, cont,
                      fmt::format("{:.6g}/{:.6g}", r.derivative_left_at_one,
                                  r.derivative_right_at_one),
                      r.integral, r.approx_order, r.partition_residual);
  }
  return os.str();
}

}  // namespace ratkern::verify
