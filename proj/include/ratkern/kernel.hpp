#pragma once

// Piecewise rational interpolation kernels supported on [-2, 2] (plus the
// classical nearest and linear kernels).
//
// Every kernel is even and is stored as a list of pieces tiling [0, support).
// Each piece is N(s) / D(s) with a quartic numerator and a linear denominator
// in the local coordinate s = |t| - lo, where lo is the left end of the piece.

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ratkern::kernel {

enum class Family {
  Nearest,
  Linear,
  S2,
  Cubic,
  CubicAlt,
  S4,
  S31,
  S41v1,
  S41v2,
  S41v3,
  S41v4,
  S41v5,
};

inline constexpr std::array<Family, 12> kAllFamilies = {
    Family::Nearest, Family::Linear, Family::S2,    Family::Cubic,
    Family::CubicAlt, Family::S4,    Family::S31,   Family::S41v1,
    Family::S41v2,   Family::S41v3,  Family::S41v4, Family::S41v5,
};

/// Families whose construction involves a rational constraint system.
inline constexpr std::array<Family, 6> kRationalFamilies = {
    Family::S31,   Family::S41v1, Family::S41v2,
    Family::S41v3, Family::S41v4, Family::S41v5,
};

/// Static description of a family, used for validation and the catalog export.
struct FamilyInfo {
  Family family;
  std::string_view name;  // lowercase spec-string name
  std::string_view display;
  bool uses_a01;
  bool uses_a02;
  bool uses_a03;
  double support;
  std::string_view domain;             // human-readable parameter domain
  std::string_view derivative_at_one;  // formula string for phi'(1)
  std::string_view continuity;
};

const FamilyInfo& family_info(Family family);
std::optional<Family> family_from_name(std::string_view name);

struct KernelSpec {
  Family family = Family::Linear;
  std::optional<double> a01;
  std::optional<double> a02;
  std::optional<double> a03;

  static KernelSpec make(Family f, std::optional<double> a01 = std::nullopt,
                         std::optional<double> a02 = std::nullopt,
                         std::optional<double> a03 = std::nullopt) {
    KernelSpec s;
    s.family = f;
    s.a01 = a01;
    s.a02 = a02;
    s.a03 = a03;
    return s;
  }
  static KernelSpec nearest() { return make(Family::Nearest); }
  static KernelSpec linear() { return make(Family::Linear); }
  static KernelSpec s2() { return make(Family::S2); }
  static KernelSpec cubic(double a02) { return make(Family::Cubic, {}, a02); }
  static KernelSpec cubic_alt(double a02) { return make(Family::CubicAlt, {}, a02); }
  static KernelSpec s4(double a02, double a03) { return make(Family::S4, {}, a02, a03); }
  static KernelSpec s31(double a01) { return make(Family::S31, a01); }
  static KernelSpec s41v1(double a01, double a02) { return make(Family::S41v1, a01, a02); }
  static KernelSpec s41v2(double a01, double a02) { return make(Family::S41v2, a01, a02); }
  static KernelSpec s41v3(double a02) { return make(Family::S41v3, {}, a02); }
  static KernelSpec s41v4(double a01, double a02, double a03) {
    return make(Family::S41v4, a01, a02, a03);
  }
  static KernelSpec s41v5(double a01, double a02, double a03) {
    return make(Family::S41v5, a01, a02, a03);
  }

  bool operator==(const KernelSpec&) const = default;
};

/// Throws InvalidSpec when the parameter set does not match the family and
/// ParameterOutOfDomain when a singularity bound is violated.
void validate(const KernelSpec& spec, bool allow_removable_boundary = false);

/// Printable form `family:a01=..,a02=..`; parse_spec(to_string(s)) == s.
std::string to_string(const KernelSpec& spec);
KernelSpec parse_spec(std::string_view text);

enum class Side { Left, Right };

struct Piece {
  double lo = 0.0;
  double hi = 0.0;
  std::array<double, 5> num{};  // c0..c4 in s = |t| - lo
  std::array<double, 2> den{1.0, 0.0};
  // When N vanishes at the right end (up to rounding), N(s) = (w - s) Q(s)
  // with w = hi - lo. Evaluating the factored form avoids cancellation where
  // both N and D are small; used on the right half of the piece. Filled in
  // by PiecewiseRationalKernel.
  bool deflated = false;
  std::array<double, 4> quotient{};

  double value(double u) const;
  /// k-th derivative with respect to |t| (k = 0..4) at u in [lo, hi].
  double derivative(double u, int order) const;
  double numerator(double u) const;
  double denominator(double u) const;
};

class PiecewiseRationalKernel {
 public:
  /// Checks that pieces tile [0, support) and that no denominator vanishes
  /// on its closed interval.
  PiecewiseRationalKernel(KernelSpec spec, std::vector<Piece> pieces);

  const KernelSpec& spec() const noexcept { return spec_; }
  double support() const noexcept { return support_; }
  std::span<const Piece> pieces() const noexcept { return pieces_; }

  /// phi(t); exactly 0 for |t| >= support.
  double operator()(double t) const;

  /// One-sided k-th derivative (k = 0..3). Order 0 gives the one-sided limit.
  double derivative(double t, int order, Side side) const;

  /// Monomial coefficients of piece `index` in |t| rather than in the local
  /// coordinate.
  std::array<double, 5> global_numerator(std::size_t index) const;
  std::array<double, 2> global_denominator(std::size_t index) const;

 private:
  const Piece* find_piece(double u, Side side) const;

  KernelSpec spec_;
  std::vector<Piece> pieces_;
  double support_ = 0.0;
};

struct BuildOptions {
  // Accept a01 = -1 for S41v1 by cancelling the common factor (1 - |t|),
  // which yields the cubic kernel.
  bool allow_removable_boundary = false;
};

PiecewiseRationalKernel build_kernel(const KernelSpec& spec, BuildOptions options = {});

inline double eval(const PiecewiseRationalKernel& kernel, double t) { return kernel(t); }

inline double eval_derivative(const PiecewiseRationalKernel& kernel, double t, int order,
                              Side side) {
  return kernel.derivative(t, order, side);
}

/// Returns the simpler family a spec reduces to when its parameters sit on a
/// documented degeneration locus.
std::optional<KernelSpec> degenerate(const KernelSpec& spec);

enum class Target { Order2, Order3, C2, C3 };

std::string_view to_string(Target target);
std::optional<Target> target_from_name(std::string_view name);

/// Instantiates parameters that reach a higher approximation order or
/// smoothness. `free_param` is the remaining free parameter where one exists
/// (a02 for order-2 targets, a01 for the C2 targets).
KernelSpec special_params(Family family, Target target,
                          std::optional<double> free_param = std::nullopt);

/// Real roots of -12 + 10x + 26x^2 + 14x^3 + 3x^4 in [-1, 10], found by
/// scanning and bisection to 1e-14.
std::vector<double> c3_quartic_roots();

}  // namespace ratkern::kernel
