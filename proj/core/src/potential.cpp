#include "biharm/potential.hpp"

#include <algorithm>
#include <cmath>

namespace biharm {

RadialPotential::RadialPotential(std::vector<Bump> bumps) : bumps_(std::move(bumps)) {
  for (const auto& b : bumps_) {
    if (!(b.halfwidth > 0.0))
      throw validation_error("RadialPotential: bump halfwidth must be positive");
    if (b.center - b.halfwidth < 0.0)
      throw validation_error("RadialPotential: bump support must stay in r >= 0");
    if (!std::isfinite(b.amplitude))
      throw validation_error("RadialPotential: bump amplitude must be finite");
  }
}

double RadialPotential::operator()(double r) const {
  double v = 0.0;
  for (const auto& b : bumps_) {
    const double x = (r - b.center) / b.halfwidth;
    if (std::abs(x) >= 1.0) continue;
    const double y = 1.0 - x * x;
    const double y2 = y * y;
    v += b.amplitude * y2 * y2;
  }
  return v;
}

double RadialPotential::support_radius() const {
  double s = 0.0;
  for (const auto& b : bumps_) s = std::max(s, b.center + b.halfwidth);
  return s;
}

std::vector<double> RadialPotential::edges() const {
  std::vector<double> e;
  for (const auto& b : bumps_) {
    e.push_back(b.center - b.halfwidth);
    e.push_back(b.center + b.halfwidth);
  }
  std::sort(e.begin(), e.end());
  return e;
}

void RadialProblem::validate() const {
  if (dimension < 5)
    throw validation_error("RadialProblem: dimension must be >= 5");
  if (dimension > 12)
    throw validation_error("RadialProblem: dimension above desk scale (max 12)");
  if (potential.empty())
    throw validation_error("RadialProblem: potential has no bumps");
}

}  // namespace biharm
