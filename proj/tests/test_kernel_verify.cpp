#include <chrono>
#include <cmath>
#include <random>

#include "doctest.h"
#include "ratkern/error.hpp"
#include "ratkern/verify.hpp"
#include "support.hpp"

using namespace ratkern::kernel;
using namespace ratkern::verify;

namespace {

PiecewiseRationalKernel k_of(const KernelSpec& s) { return build_kernel(s); }

}  // namespace

TEST_CASE("partition of unity examples") {
  CHECK(check_partition_of_unity(k_of(KernelSpec::cubic(-2.5)), 1001) <= 1e-12);
  CHECK(check_partition_of_unity(k_of(KernelSpec::s41v4(30, 20, -121.5512)), 1001) <= 1e-12);
  CHECK(check_partition_of_unity(k_of(KernelSpec::nearest()), 1001) <= 1e-12);
  CHECK(check_partition_of_unity(k_of(KernelSpec::linear()), 1001) <= 1e-12);
}

TEST_CASE("continuity examples") {
  const auto s31 = check_continuity(k_of(KernelSpec::s31(0.5)), 1);
  CHECK(max_mismatch(s31, 0) <= 1e-12);
  CHECK(max_mismatch(s31, 1) <= 1e-12);

  const auto c2 = check_continuity(k_of(special_params(Family::S41v4, Target::C2, 1.0)), 2);
  CHECK(mismatch_at(c2, 1.0, 2) <= 1e-9);

  const auto lin = check_continuity(k_of(KernelSpec::linear()), 1);
  CHECK(mismatch_at(lin, 1.0, 1) == doctest::Approx(1.0));
}

TEST_CASE("approximation order examples") {
  CHECK(approximation_order(k_of(KernelSpec::cubic(-2.5))) == 3);
  CHECK(approximation_order(k_of(KernelSpec::s2())) == 2);
  CHECK(approximation_order(k_of(KernelSpec::s41v3(0.0))) == 1);
  CHECK(approximation_order(k_of(KernelSpec::s4(-2.5, 1.5))) == 3);
  CHECK(approximation_order(k_of(KernelSpec::s41v2(-1, -4))) == 2);
  CHECK(approximation_order(k_of(KernelSpec::s31(-1))) == 2);
  CHECK(approximation_order(build_kernel(KernelSpec::s41v1(-1, -2.5), {true})) == 3);
  CHECK(approximation_order(k_of(KernelSpec::cubic(-2.0))) == 1);

  // Independent oracle: reproduce t^1 by direct summation for Cubic{-5/2}.
  const auto k = k_of(KernelSpec::cubic(-2.5));
  for (double t : {0.1, 0.35, 0.9}) {
    double g = 0.0;
    for (int i = -3; i <= 3; ++i) g += (t - i) * k(t - i);
    CHECK(std::abs(g) <= 1e-12);
  }
}

TEST_CASE("integral examples") {
  CHECK(check_integral(k_of(KernelSpec::linear())) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(std::abs(check_integral(k_of(KernelSpec::s41v5(30, 10, -90.1572))) - 1.0) <= 1e-10);
  CHECK(std::abs(check_integral(k_of(KernelSpec::s31(2))) - 1.0) <= 1e-10);
  CHECK(std::abs(check_integral(k_of(KernelSpec::nearest())) - 1.0) <= 1e-14);
}

TEST_CASE("constraint residuals") {
  for (const auto& spec : {KernelSpec::s31(0.25), KernelSpec::s41v1(1, -2), KernelSpec::cubic(-2),
                           KernelSpec::s41v2(2, 3), KernelSpec::s41v3(1.5),
                           KernelSpec::s41v4(3, 2, -7), KernelSpec::s41v5(3, 2, -7),
                           KernelSpec::s4(-2.5, 1.5), KernelSpec::s2(), KernelSpec::cubic_alt(-1)}) {
    const auto res = constraint_residuals(spec);
    CHECK(!res.empty());
    for (const auto& r : res) {
      INFO(to_string(spec), " ", r.name);
      CHECK(r.value <= 1e-12);
    }
  }
  CHECK_THROWS_AS(constraint_residuals(KernelSpec::linear()), ratkern::Error);
}

TEST_CASE("cubic/linear unity system at solution (vi)") {
  // Oracle: direct substitution of a03 = 1, a13 = -1 - b11, a01 = b11 / (1 + b11).
  for (double b11 : {-0.5, 0.25, 1.0, 3.0, 40.0}) {
    const auto r = cubic_linear_unity_system(b11 / (1 + b11), 1.0, -1.0 - b11, b11);
    for (double v : r) CHECK(std::abs(v) <= 1e-12 * (1 + b11 * b11));
  }
}

TEST_CASE("property suite on random specs") {
  std::mt19937_64 rng(101);
  for (Family f : kRationalFamilies) {
    for (int i = 0; i < 200; ++i) {
      const auto spec = testsupport::random_spec(f, rng);
      const auto k = k_of(spec);
      INFO(to_string(spec));
      CHECK(check_partition_of_unity(k) <= 1e-11);
      const auto cont = check_continuity(k, 1);
      CHECK(max_mismatch(cont, 0) <= 1e-10);
      CHECK(max_mismatch(cont, 1) <= 1e-10);
      for (double r : sinc_residuals(k)) CHECK(r <= 1e-12);
      CHECK(symmetry_residual(k) == 0.0);
      CHECK(std::abs(check_integral(k) - 1.0) <= 1e-9);
      CHECK(approximation_order(k) == 1);
    }
  }
}

TEST_CASE("report and table") {
  const auto rep = make_report(KernelSpec::s41v4(30, 20, -121.5512));
  CHECK(rep.approx_order == 1);
  const auto j = to_json(rep);
  CHECK(j.contains("partition_residual"));
  const auto table = format_table({rep, make_report(KernelSpec::cubic(-2.5))});
  CHECK(table.find("s41v4") != std::string::npos);
}
