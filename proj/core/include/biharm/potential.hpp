// Compactly supported radial potentials built from polynomial bumps.
#pragma once

#include <vector>

#include "biharm/types.hpp"

namespace biharm {

// amplitude * (1 - ((r - center)/halfwidth)^2)^4 on |r - center| < halfwidth.
// The profile is C^3 at the support edges and its square root is C^1.
struct Bump {
  double center = 0.0;
  double halfwidth = 0.0;
  double amplitude = 0.0;
};

class RadialPotential {
 public:
  RadialPotential() = default;
  explicit RadialPotential(std::vector<Bump> bumps);

  double operator()(double r) const;
  const std::vector<Bump>& bumps() const { return bumps_; }
  bool empty() const { return bumps_.empty(); }
  double support_radius() const;
  // bump edges, for use as grid/quadrature breakpoints
  std::vector<double> edges() const;

 private:
  std::vector<Bump> bumps_;
};

struct RadialProblem {
  int dimension = 5;
  RadialPotential potential;

  void validate() const;
};

}  // namespace biharm
