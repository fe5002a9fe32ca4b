#pragma once

// Shared generators for the property tests. Fixed seeds keep runs repeatable.

#include <random>

#include "ratkern/kernel.hpp"

namespace testsupport {

using ratkern::kernel::Family;
using ratkern::kernel::KernelSpec;

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

/// Draws a valid parameterization: a01 in (-0.99, 100], a02 in [-150, 150],
/// a03 in [-500, 500].
inline KernelSpec random_spec(Family family, std::mt19937_64& rng) {
  const double a01 = uniform(rng, -0.99, 100.0);
  const double a02 = uniform(rng, -150.0, 150.0);
  const double a03 = uniform(rng, -500.0, 500.0);
  switch (family) {
    case Family::Cubic: return KernelSpec::cubic(a02);
    case Family::CubicAlt: return KernelSpec::cubic_alt(a02);
    case Family::S4: return KernelSpec::s4(a02, a03);
    case Family::S31: return KernelSpec::s31(a01);
    case Family::S41v1: return KernelSpec::s41v1(a01, a02);
    case Family::S41v2: return KernelSpec::s41v2(a01, a02);
    case Family::S41v3: return KernelSpec::s41v3(a02);
    case Family::S41v4: return KernelSpec::s41v4(a01, a02, a03);
    case Family::S41v5: return KernelSpec::s41v5(a01, a02, a03);
    default: return KernelSpec::make(family);
  }
}

}  // namespace testsupport
