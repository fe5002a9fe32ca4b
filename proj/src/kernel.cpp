#include "ratkern/kernel.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <functional>
#include <limits>

#include <fmt/format.h>

#include "ratkern/error.hpp"

namespace ratkern::kernel {
namespace {

// clang-format off
constexpr std::array<FamilyInfo, 12> kFamilyTable = {{
  {Family::Nearest,  "nearest",  "S0",       false, false, false, 0.5, "none", "/", "C^-1"},
  {Family::Linear,   "linear",   "S1",       false, false, false, 1.0, "none", "/", "C^0"},
  {Family::S2,       "s2",       "S2",       false, false, false, 2.0, "none", "-2 (left), -1 (right)", "C^0"},
  {Family::Cubic,    "cubic",    "S3",       false, true,  false, 2.0, "a02 real", "-3-a02", "C^1"},
  {Family::CubicAlt, "cubicalt", "S3'",      false, true,  false, 2.0, "a02 real", "0 (left: -3-a02)", "C^0"},
  {Family::S4,       "s4",       "S4",       false, true,  true,  2.0, "a02, a03 real", "-(4+2a02+a03)", "C^1"},
  {Family::S31,      "s31",      "S3/1",     true,  false, false, 2.0, "a01 >= -1", "-1", "C^1"},
  {Family::S41v1,    "s41v1",    "S4/1^1",   true,  true,  false, 2.0, "a01 > -1", "0", "C^1"},
  {Family::S41v2,    "s41v2",    "S4/1^2",   true,  true,  false, 2.0, "a01 >= -1", "0", "C^1"},
  {Family::S41v3,    "s41v3",    "S4/1^3",   false, true,  false, 2.0, "a02 real", "0", "C^1"},
  {Family::S41v4,    "s41v4",    "S4/1^4",   true,  true,  true,  2.0, "a01 > -1", "-(4+3a01+2a02+a03)/(1+a01)", "C^1 (C^2 on a curve)"},
  {Family::S41v5,    "s41v5",    "S4/1^5",   true,  true,  true,  2.0, "a01 > -1", "-(4+3a01+2a02+a03)/(1+a01)", "C^1 (C^2 on a curve)"},
}};
// clang-format on

// Dense polynomial in the local coordinate s; coefficient i multiplies s^i.
struct Poly {
  std::vector<double> c;

  static Poly constant(double v) { return Poly{{v}}; }
  // |t| expressed in the local coordinate of a piece starting at lo.
  static Poly abs_t(double lo) { return Poly{{lo, 1.0}}; }

  std::size_t degree() const {
    std::size_t d = c.empty() ? 0 : c.size() - 1;
    while (d > 0 && c[d] == 0.0) --d;
    return d;
  }
};

Poly operator+(const Poly& a, const Poly& b) {
  Poly r{std::vector<double>(std::max(a.c.size(), b.c.size()), 0.0)};
  for (std::size_t i = 0; i < a.c.size(); ++i) r.c[i] += a.c[i];
  for (std::size_t i = 0; i < b.c.size(); ++i) r.c[i] += b.c[i];
  return r;
}

Poly operator*(const Poly& a, const Poly& b) {
  Poly r{std::vector<double>(a.c.size() + b.c.size() - 1, 0.0)};
  for (std::size_t i = 0; i < a.c.size(); ++i)
    for (std::size_t j = 0; j < b.c.size(); ++j) r.c[i + j] += a.c[i] * b.c[j];
  return r;
}

Poly operator*(double k, const Poly& a) { return Poly::constant(k) * a; }
Poly operator+(double k, const Poly& a) { return Poly::constant(k) + a; }
Poly operator-(const Poly& a) { return -1.0 * a; }
Poly operator-(double k, const Poly& a) { return k + (-a); }
Poly operator-(const Poly& a, const Poly& b) { return a + (-b); }

Piece make_piece(double lo, double hi, const Poly& num, const Poly& den = Poly::constant(1.0)) {
  if (num.degree() > 4 || den.degree() > 1)
    throw Error(ErrorCode::InvalidSpec, "piece exceeds quartic/linear degree");
  Piece p;
  p.lo = lo;
  p.hi = hi;
  for (std::size_t i = 0; i < num.c.size() && i < 5; ++i) p.num[i] = num.c[i];
  p.den = {den.c.empty() ? 0.0 : den.c[0], den.c.size() > 1 ? den.c[1] : 0.0};
  return p;
}

bool near(double x, double y) {
  return std::abs(x - y) <= 1e-12 * std::max({1.0, std::abs(x), std::abs(y)});
}

double horner(const double* c, int n, double s) {
  double acc = 0.0;
  for (int i = n - 1; i >= 0; --i) acc = acc * s + c[i];
  return acc;
}

// Closed forms below follow the factored kernel definitions. U is |t|.

std::vector<Piece> cubic_pieces(double a02) {
  const Poly U0 = Poly::abs_t(0.0), U1 = Poly::abs_t(1.0);
  return {make_piece(0, 1, (1 - U0) * (1 + U0 + (1 + a02) * U0 * U0)),
          make_piece(1, 2, (3 + a02) * (1 - U1) * (2 - U1) * (2 - U1))};
}

std::vector<Piece> cubic_alt_pieces(double a02) {
  const Poly U0 = Poly::abs_t(0.0), U1 = Poly::abs_t(1.0);
  return {make_piece(0, 1, (1 - U0) * (1 + U0 + (1 + a02) * U0 * U0)),
          make_piece(1, 2, -(3 + a02) * (2 - U1) * (1 - U1) * (1 - U1))};
}

std::vector<Piece> s2_pieces() {
  const Poly U0 = Poly::abs_t(0.0), U1 = Poly::abs_t(1.0);
  return {make_piece(0, 1, 1 - U0 * U0), make_piece(1, 2, (1 - U1) * (2 - U1))};
}

// Shared first piece of the nonzero-derivative quartic/linear kernels.
Piece nonzero_derivative_inner(double a01, double a02, double a03) {
  const Poly U = Poly::abs_t(0.0);
  const Poly cubic = 1 + (1 + a01) * U + (1 + a01 + a02) * U * U +
                     (1 + a01 + a02 + a03) * U * U * U;
  return make_piece(0, 1, (1 - U) * cubic, 1 + a01 * U);
}

// Shared first piece of the zero-derivative quartic/linear kernels.
Piece zero_derivative_inner(double a01, double a02) {
  const Poly U = Poly::abs_t(0.0);
  return make_piece(0, 1,
                    (1 - U) * (1 - U) * (1 + (2 + a01) * U + (3 + 2 * a01 + a02) * U * U),
                    1 + a01 * U);
}

std::vector<Piece> compile(const KernelSpec& spec) {
  const double a01 = spec.a01.value_or(0.0);
  const double a02 = spec.a02.value_or(0.0);
  const double a03 = spec.a03.value_or(0.0);
  const Poly U0 = Poly::abs_t(0.0), U1 = Poly::abs_t(1.0);
  const Poly tail2 = (1 - U1) * (2 - U1) * (2 - U1);            // (1-u)(2-u)^2
  const Poly tail22 = (1 - U1) * (1 - U1) * (2 - U1) * (2 - U1);  // (1-u)^2(2-u)^2

  switch (spec.family) {
    case Family::Nearest:
      return {make_piece(0, 0.5, Poly::constant(1.0))};
    case Family::Linear:
      return {make_piece(0, 1, 1 - U0)};
    case Family::S2:
      return s2_pieces();
    case Family::Cubic:
      return cubic_pieces(a02);
    case Family::CubicAlt:
      return cubic_alt_pieces(a02);
    case Family::S4:
      return {make_piece(0, 1,
                         (1 - U0) * (1 + U0 + (1 + a02) * U0 * U0 + (1 + a02 + a03) * U0 * U0 * U0)),
              make_piece(1, 2, tail2 * ((5 + 3 * a02 + 2 * a03) - (1 + a02 + a03) * U1))};
    case Family::S31:
      if (a01 == -1.0) return s2_pieces();  // common factor (1 - |t|) cancelled
      return {make_piece(0, 1, (1 - U0) * (1 + (1 + a01) * U0 - U0 * U0), 1 + a01 * U0),
              make_piece(1, 2, tail2, (1 - a01) + a01 * U1)};
    case Family::S41v1:
      if (a01 == -1.0) return cubic_pieces(a02);
      return {zero_derivative_inner(a01, a02),
              make_piece(1, 2, (3 + a02) * tail22, (-1 - 2 * a01) + a01 * U1)};
    case Family::S41v2:
      if (a01 == -1.0) return cubic_alt_pieces(a02);
      return {zero_derivative_inner(a01, a02),
              make_piece(1, 2, (3 + a02) * tail22, (-1 + a01) - a01 * U1)};
    case Family::S41v3:
      return {make_piece(0, 1, (1 - U0) * (1 - U0) * (2 + 3 * U0 + (2 * a02 + 4) * U0 * U0),
                         2 - U0),
              make_piece(1, 2, (6 + 2 * a02) * tail22, -3 + U1)};
    case Family::S41v4: {
      const double A = 5 - a01 - 3 * a01 * a01 + 3 * a02 - 3 * a01 * a02 + 2 * a03 - a01 * a03;
      const double B = -1 + 4 * a01 + 3 * a01 * a01 - a02 + 3 * a01 * a02 - a03 + a01 * a03;
      return {nonzero_derivative_inner(a01, a02, a03),
              make_piece(1, 2, tail2 * (A + B * U1),
                         (1 + a01) * ((1 - a01) + a01 * U1))};
    }
    case Family::S41v5:
      return {nonzero_derivative_inner(a01, a02, a03),
              make_piece(1, 2,
                         tail2 * ((5 + 6 * a01 + 3 * a02 + 2 * a03) -
                                  (1 + 3 * a01 + a02 + a03) * U1),
                         (1 + 2 * a01) - a01 * U1)};
  }
  throw Error(ErrorCode::InvalidSpec, "unknown family");
}

void require_param(const KernelSpec& spec, const std::optional<double>& value, bool used,
                   std::string_view name) {
  const auto& info = family_info(spec.family);
  if (used && !value)
    throw Error(ErrorCode::InvalidSpec, fmt::format("{} requires {}", info.name, name));
  if (!used && value)
    throw Error(ErrorCode::InvalidSpec, fmt::format("{} takes no {}", info.name, name));
  if (value && !std::isfinite(*value))
    throw Error(ErrorCode::ParameterOutOfDomain,
                fmt::format("{}: {} must be finite", info.name, name));
}

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

}  // namespace

const FamilyInfo& family_info(Family family) {
  for (const auto& info : kFamilyTable)
    if (info.family == family) return info;
  throw Error(ErrorCode::InvalidSpec, "unknown family");
}

std::optional<Family> family_from_name(std::string_view name) {
  for (const auto& info : kFamilyTable)
    if (info.name == name) return info.family;
  return std::nullopt;
}

void validate(const KernelSpec& spec, bool allow_removable_boundary) {
  const auto& info = family_info(spec.family);
  require_param(spec, spec.a01, info.uses_a01, "a01");
  require_param(spec, spec.a02, info.uses_a02, "a02");
  require_param(spec, spec.a03, info.uses_a03, "a03");

  const auto out_of_domain = [&](std::string_view bound) {
    throw Error(ErrorCode::ParameterOutOfDomain,
                fmt::format("{}: a01 = {} violates {}", info.name, *spec.a01, bound));
  };
  switch (spec.family) {
    case Family::S31:
    case Family::S41v2:
      if (!(*spec.a01 >= -1.0)) out_of_domain("a01 >= -1");
      break;
    case Family::S41v1:
      if (allow_removable_boundary ? !(*spec.a01 >= -1.0) : !(*spec.a01 > -1.0))
        out_of_domain(allow_removable_boundary ? "a01 >= -1" : "a01 > -1");
      break;
    case Family::S41v4:
    case Family::S41v5:
      if (!(*spec.a01 > -1.0)) out_of_domain("a01 > -1");
      break;
    default:
      break;
  }
}

std::string to_string(const KernelSpec& spec) {
  const auto& info = family_info(spec.family);
  std::string out(info.name);
  char sep = ':';
  const auto add = [&](std::string_view key, const std::optional<double>& v) {
    if (!v) return;
    out += sep;
    out += key;
    out += '=';
    out += format_double(*v);
    sep = ',';
  };
  add("a01", spec.a01);
  add("a02", spec.a02);
  add("a03", spec.a03);
  return out;
}

KernelSpec parse_spec(std::string_view text) {
  const auto trim = [](std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
  };
  const auto colon = text.find(':');
  std::string name(trim(text.substr(0, colon)));
  std::transform(name.begin(), name.end(), name.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  const auto family = family_from_name(name);
  if (!family) throw Error(ErrorCode::ParseError, fmt::format("unknown kernel family '{}'", name));

  KernelSpec spec = KernelSpec::make(*family);
  if (colon != std::string_view::npos) {
    std::string_view rest = text.substr(colon + 1);
    while (!rest.empty()) {
      const auto comma = rest.find(',');
      const std::string_view item = trim(rest.substr(0, comma));
      rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
      const auto eq = item.find('=');
      if (eq == std::string_view::npos)
        throw Error(ErrorCode::ParseError, fmt::format("expected key=value, got '{}'", item));
      const std::string_view key = trim(item.substr(0, eq));
      const std::string_view val = trim(item.substr(eq + 1));
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(val.data(), val.data() + val.size(), v);
      if (ec != std::errc{} || ptr != val.data() + val.size())
        throw Error(ErrorCode::ParseError, fmt::format("bad number '{}' for {}", val, key));
      std::optional<double>* slot = key == "a01"   ? &spec.a01
                                    : key == "a02" ? &spec.a02
                                    : key == "a03" ? &spec.a03
                                                   : nullptr;
      if (slot == nullptr) throw Error(ErrorCode::ParseError, fmt::format("unknown key '{}'", key));
      if (slot->has_value())
        throw Error(ErrorCode::ParseError, fmt::format("duplicate key '{}'", key));
      *slot = v;
    }
  }
  try {
    validate(spec, /*allow_removable_boundary=*/true);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::InvalidSpec) throw Error(ErrorCode::ParseError, e.what());
    // Domain violations are reported when the kernel is built.
  }
  return spec;
}

// ---------------------------------------------------------------------------
// Piece

double Piece::numerator(double u) const {
  const double s = u - lo;
  if (deflated && 2 * s > hi - lo) return ((hi - lo) - s) * horner(quotient.data(), 4, s);
  return horner(num.data(), 5, s);
}

double Piece::denominator(double u) const { return den[0] + den[1] * (u - lo); }

double Piece::value(double u) const { return numerator(u) / denominator(u); }

double Piece::derivative(double u, int order) const {
  // f * D = N, so f^(k) = (N^(k) - k * D' * f^(k-1)) / D since D'' = 0.
  const double s = u - lo;
  const double d = den[0] + den[1] * s;
  // n[k] = N^(k)(s); for the factored form N^(k) = (w - s) Q^(k) - k Q^(k-1).
  std::array<double, 5> n{};
  if (deflated && 2 * s > hi - lo) {
    const double w = (hi - lo) - s;
    std::array<double, 4> q = quotient;
    double prev = 0.0;
    for (int k = 0; k <= order; ++k) {
      const double qk = horner(q.data(), 4, s);
      n[k] = w * qk - k * prev;
      prev = qk;
      for (int i = 0; i + 1 < 4; ++i) q[i] = q[i + 1] * (i + 1);
      q[3] = 0.0;
    }
  } else {
    std::array<double, 5> c = num;
    for (int k = 0; k <= order; ++k) {
      n[k] = horner(c.data(), 5, s);
      for (int i = 0; i + 1 < 5; ++i) c[i] = c[i + 1] * (i + 1);
      c[4] = 0.0;
    }
  }
  double f = n[0] / d;
  for (int k = 1; k <= order; ++k) f = (n[k] - k * den[1] * f) / d;
  return f;
}

// ---------------------------------------------------------------------------
// PiecewiseRationalKernel

PiecewiseRationalKernel::PiecewiseRationalKernel(KernelSpec spec, std::vector<Piece> pieces)
    : spec_(spec), pieces_(std::move(pieces)) {
  if (pieces_.empty()) throw Error(ErrorCode::InvalidSpec, "kernel has no pieces");
  double expected_lo = 0.0;
  for (auto& p : pieces_) {
    if (p.lo != expected_lo || !(p.hi > p.lo))
      throw Error(ErrorCode::InvalidSpec, "pieces must tile [0, support) in order");
    expected_lo = p.hi;
    const double w = p.hi - p.lo;
    double scale = 0.0, wk = 1.0;
    for (double c : p.num) {
      scale += std::abs(c) * wk;
      wk *= w;
    }
    if (scale > 0.0 && std::abs(horner(p.num.data(), 5, w)) <= 1e-12 * scale) {
      // Synthetic division by (s - w); the remainder is rounding noise.
      std::array<double, 4> b{};
      b[3] = p.num[4];
      for (int i = 2; i >= 0; --i) b[i] = p.num[i + 1] + w * b[i + 1];
      for (int i = 0; i < 4; ++i) p.quotient[i] = -b[i];
      p.deflated = true;
    }
    const double d_lo = p.denominator(p.lo);
    const double d_hi = p.denominator(p.hi);
    if (d_lo == 0.0 || d_hi == 0.0 || std::signbit(d_lo) != std::signbit(d_hi))
      throw Error(ErrorCode::DenominatorRoot,
                  fmt::format("{}: denominator vanishes on [{}, {}]", to_string(spec_), p.lo, p.hi));
  }
  support_ = expected_lo;
}

const Piece* PiecewiseRationalKernel::find_piece(double u, Side side) const {
  for (const auto& p : pieces_) {
    if (side == Side::Right ? (p.lo <= u && u < p.hi) : (p.lo < u && u <= p.hi)) return &p;
  }
  return nullptr;
}

double PiecewiseRationalKernel::operator()(double t) const {
  const double u = std::abs(t);
  const Piece* p = find_piece(u, Side::Right);
  return p != nullptr ? p->value(u) : 0.0;
}

double PiecewiseRationalKernel::derivative(double t, int order, Side side) const {
  if (order < 0 || order > 3)
    throw Error(ErrorCode::InvalidArgument, "derivative order must be in 0..3");
  const double sign = (order % 2 == 0) ? 1.0 : -1.0;
  const Side flipped = side == Side::Left ? Side::Right : Side::Left;
  if (t < 0.0) return sign * derivative(-t, order, flipped);
  if (t == 0.0 && side == Side::Left) return sign * derivative(0.0, order, Side::Right);
  const Piece* p = find_piece(t, side);
  return p != nullptr ? p->derivative(t, order) : 0.0;
}

std::array<double, 5> PiecewiseRationalKernel::global_numerator(std::size_t index) const {
  const Piece& p = pieces_.at(index);
  // Expand sum_k c_k (u - lo)^k by the binomial theorem.
  std::array<double, 5> out{};
  for (int k = 0; k < 5; ++k) {
    double binom = 1.0;
    for (int j = 0; j <= k; ++j) {
      out[j] += p.num[k] * binom * std::pow(-p.lo, k - j);
      binom = binom * (k - j) / (j + 1);
    }
  }
  return out;
}

std::array<double, 2> PiecewiseRationalKernel::global_denominator(std::size_t index) const {
  const Piece& p = pieces_.at(index);
  return {p.den[0] - p.den[1] * p.lo, p.den[1]};
}

PiecewiseRationalKernel build_kernel(const KernelSpec& spec, BuildOptions options) {
  validate(spec, options.allow_removable_boundary);
  return PiecewiseRationalKernel(spec, compile(spec));
}

// ---------------------------------------------------------------------------
// Degenerations and special parameters

std::optional<KernelSpec> degenerate(const KernelSpec& spec) {
  try {
    validate(spec, /*allow_removable_boundary=*/true);
  } catch (const Error&) {
    return std::nullopt;
  }
  const double a01 = spec.a01.value_or(0.0);
  const double a02 = spec.a02.value_or(0.0);
  const double a03 = spec.a03.value_or(0.0);
  const bool on_cubic_locus = near(a03, -1 - a02 + a01 * a02);

  switch (spec.family) {
    case Family::S31:
      if (a01 == -1.0) return KernelSpec::s2();
      break;
    case Family::S41v1:
      if (a01 == -1.0) return KernelSpec::cubic(a02);
      break;
    case Family::S41v2:
      if (a01 == -1.0) return KernelSpec::cubic_alt(a02);
      break;
    case Family::S41v4:
      if (a01 == 0.0) return KernelSpec::s4(a02, a03);
      if (on_cubic_locus) return KernelSpec::cubic(a02);
      if (near(a02, -2 - a01) && near(a03, 1.0)) return KernelSpec::s31(a01);
      break;
    case Family::S41v5:
      if (a01 == 0.0) return KernelSpec::s4(a02, a03);
      if (on_cubic_locus) return KernelSpec::cubic(a02);
      break;
    case Family::S4:
      if (near(a03, -1 - a02)) return KernelSpec::cubic(a02);
      break;
    default:
      break;
  }
  return std::nullopt;
}

std::string_view to_string(Target target) {
  switch (target) {
    case Target::Order2: return "order2";
    case Target::Order3: return "order3";
    case Target::C2: return "c2";
    case Target::C3: return "c3";
  }
  return "unknown";
}

std::optional<Target> target_from_name(std::string_view name) {
  for (Target t : {Target::Order2, Target::Order3, Target::C2, Target::C3})
    if (to_string(t) == name) return t;
  return std::nullopt;
}

std::vector<double> c3_quartic_roots() {
  const auto q = [](double x) { return -12 + x * (10 + x * (26 + x * (14 + 3 * x))); };
  std::vector<double> roots;
  constexpr double lo = -1.0, hi = 10.0;
  constexpr int steps = 11000;
  for (int i = 0; i < steps; ++i) {
    double a = lo + (hi - lo) * i / steps;
    double b = lo + (hi - lo) * (i + 1) / steps;
    double fa = q(a), fb = q(b);
    if (fa == 0.0) {
      roots.push_back(a);
      continue;
    }
    if ((fa < 0) == (fb < 0)) continue;
    while (b - a > 1e-14) {
      const double m = 0.5 * (a + b);
      if (m <= a || m >= b) break;
      const double fm = q(m);
      if ((fm < 0) == (fa < 0)) {
        a = m;
        fa = fm;
      } else {
        b = m;
      }
    }
    roots.push_back(0.5 * (a + b));
  }
  return roots;
}

KernelSpec special_params(Family family, Target target, std::optional<double> free_param) {
  const auto need_free = [&](std::string_view what) {
    if (!free_param)
      throw Error(ErrorCode::InvalidSpec,
                  fmt::format("{} / {} needs the free parameter {}", family_info(family).name,
                              to_string(target), what));
    return *free_param;
  };
  const auto order2_a03 = [](double a02) { return (-7 - 4 * a02) / 2; };
  const auto c2_a03 = [](double a01, double a02) { return (-36 - 18 * a01 - 17 * a02) / 6; };

  switch (family) {
    case Family::Cubic:
      if (target == Target::Order2 || target == Target::Order3) return KernelSpec::cubic(-2.5);
      break;
    case Family::S31:
      if (target == Target::Order2) return KernelSpec::s31(-1.0);
      break;
    case Family::S41v1:
      if (target == Target::Order3) return KernelSpec::s41v1(-1.0, -2.5);
      break;
    case Family::S41v2:
      if (target == Target::Order2) return KernelSpec::s41v2(-1.0, -4.0);
      break;
    case Family::S4:
      if (target == Target::Order3) return KernelSpec::s4(-2.5, 1.5);
      if (target == Target::Order2) {
        const double a02 = need_free("a02");
        return KernelSpec::s4(a02, order2_a03(a02));
      }
      break;
    case Family::S41v4:
    case Family::S41v5: {
      const auto make = [&](double a01, double a02, double a03) {
        return family == Family::S41v4 ? KernelSpec::s41v4(a01, a02, a03)
                                       : KernelSpec::s41v5(a01, a02, a03);
      };
      if (target == Target::Order3) return make(0.0, -2.5, 1.5);
      if (target == Target::Order2) {
        const double a02 = need_free("a02");
        return make(0.0, a02, order2_a03(a02));
      }
      if (target == Target::C2) {
        const double a01 = need_free("a01");
        if (!(a01 > -1.0))
          throw Error(ErrorCode::ParameterOutOfDomain, "C2 parameters need a01 > -1");
        if (family == Family::S41v4) {
          const double a02 = -6 * (3 + a01) / (6 + a01);
          return make(a01, a02, c2_a03(a01, a02));
        }
        return make(a01, -3.0, (15 - 4 * a01 - 9 * a01 * a01) / (2 * (3 + 2 * a01)));
      }
      if (target == Target::C3 && family == Family::S41v4) {
        const auto roots = c3_quartic_roots();
        const auto it = std::find_if(roots.begin(), roots.end(), [](double r) { return r > -1.0; });
        if (it == roots.end())
          throw Error(ErrorCode::RootNotBracketed, "no root of the C3 quartic in (-1, 10]");
        const double a01 = *it;
        const double a02 = -3 * (94 + 2 * a01 - 4 * a01 * a01 + 3 * a01 * a01 * a01) / 136;
        return make(a01, a02, c2_a03(a01, a02));
      }
      break;
    }
    default:
      break;
  }
  throw Error(ErrorCode::NoSuchTarget, fmt::format("{} has no {} parameterization",
                                                   family_info(family).name, to_string(target)));
}

}  // namespace ratkern::kernel
