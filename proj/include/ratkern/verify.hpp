#pragma once

// Numerical certification of kernel properties: partition of unity,
// junction continuity, interpolation of sinc at the integers, unit integral,
// approximation order, and the residuals of the constraint systems.

#include <string>
#include <vector>

#include "json.hpp"

#include "ratkern/kernel.hpp"

namespace ratkern::verify {

using kernel::KernelSpec;
using kernel::PiecewiseRationalKernel;

/// max over a uniform grid of [0, 1] of |sum_i phi(t - i) - 1|.
double check_partition_of_unity(const PiecewiseRationalKernel& kernel,
                                std::size_t grid_points = 1001);

struct JunctionMismatch {
  double t = 0.0;
  int order = 0;
  double left = 0.0;
  double right = 0.0;
  double mismatch = 0.0;
};

/// One-sided limits of phi^(k) at 0, at every interior piece boundary and at
/// the support radius, for k = 0..max_order.
std::vector<JunctionMismatch> check_continuity(const PiecewiseRationalKernel& kernel,
                                               int max_order);

double max_mismatch(const std::vector<JunctionMismatch>& table, int order);
double mismatch_at(const std::vector<JunctionMismatch>& table, double t, int order);

struct ApproximationOrder {
  int order = 0;
  std::vector<double> constants;   // realized C_P for P(t) = t^d
  std::vector<double> deviations;  // max_t |g_d(t) - g_d(0)|
};

inline constexpr double kApproximationTolerance = 1e-9;

ApproximationOrder approximation_order_detail(const PiecewiseRationalKernel& kernel,
                                              int max_L = 4, std::size_t grid_points = 2001);

inline int approximation_order(const PiecewiseRationalKernel& kernel, int max_L = 4) {
  return approximation_order_detail(kernel, max_L).order;
}

/// Integral of phi over [-support, support] by adaptive Gauss-Kronrod on each
/// piece. Throws QuadratureNonconvergence when the error estimate exceeds
/// 1e-11 relative to the piece's coefficient scale.
double check_integral(const PiecewiseRationalKernel& kernel);

/// |phi(0) - 1| followed by |phi(n)| for integers 0 < n <= support.
std::vector<double> sinc_residuals(const PiecewiseRationalKernel& kernel);

double symmetry_residual(const PiecewiseRationalKernel& kernel, std::size_t grid_points = 4001);

struct Residual {
  std::string name;
  double value = 0.0;
};

/// Reconstructs a00..a14, b01, b11 from the compiled kernel and evaluates the
/// interpolation, C1 and (where defined) solution-block equations.
std::vector<Residual> constraint_residuals(const KernelSpec& spec);

/// Raw coefficients of the normalized form (denominators 1 + b*|t|).
struct RawCoefficients {
  std::array<double, 5> a0{};
  std::array<double, 5> a1{};
  double b01 = 0.0;
  double b11 = 0.0;
};
RawCoefficients raw_coefficients(const PiecewiseRationalKernel& kernel);

/// The four polynomials obtained from the cubic/linear partition-of-unity
/// system, evaluated at (a01, a03, a13, b11).
std::array<double, 4> cubic_linear_unity_system(double a01, double a03, double a13, double b11);

struct PropertyReport {
  KernelSpec kernel;
  double partition_residual = 0.0;
  std::vector<JunctionMismatch> continuity;
  std::vector<double> sinc_residuals;
  double integral = 0.0;
  int approx_order = 0;
  std::vector<double> approx_constants;
  double symmetry_residual = 0.0;
  double derivative_left_at_one = 0.0;
  double derivative_right_at_one = 0.0;
};

PropertyReport make_report(const KernelSpec& spec, int max_continuity_order = 3);

nlohmann::json to_json(const PropertyReport& report);

/// Human-readable table: support, parameter count, continuity, phi'(1), integral, order.
std::string format_table(const std::vector<PropertyReport>& reports);

}  // namespace ratkern::verify
