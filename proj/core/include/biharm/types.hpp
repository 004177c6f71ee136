// Shared scalar/matrix aliases and the spectral-parameter type.
#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace biharm {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using RMat = Eigen::MatrixXd;
using Vec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;

// Raised when inputs violate a documented precondition (CLI exit code 2).
class validation_error : public std::runtime_error {
 public:
  explicit validation_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Raised when an algorithm fails to converge or an internal numerical
// invariant is violated (CLI exit code 3).
class numerical_error : public std::runtime_error {
 public:
  explicit numerical_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Raised when a computed quantity contradicts a structural property the
// method guarantees (e.g. an operator that must be definite turns out
// singular); indicates a discretization failure rather than bad input.
class invariant_violation : public numerical_error {
 public:
  explicit invariant_violation(const std::string& msg) : numerical_error(msg) {}
};

// An operator the inversion formula requires to be invertible turned out
// singular. Callers escalate (deeper projection stage) or give up.
class singular_operator : public numerical_error {
 public:
  explicit singular_operator(const std::string& msg) : numerical_error(msg) {}
};

// A series step failed to contract at the given spectral parameter; the
// caller should retry with smaller |mu|.
class step_size_error : public numerical_error {
 public:
  explicit step_size_error(const std::string& msg) : numerical_error(msg) {}
};

// A limit extrapolation (boundary values of the resolvent in the ray angle)
// did not show the expected convergence order; the result is unreliable.
class extrapolation_error : public numerical_error {
 public:
  explicit extrapolation_error(const std::string& msg)
      : numerical_error(msg) {}
};

enum class BoundarySide { upper, lower, interior };

// The spectral parameter mu in the first quadrant, z = mu^4.
// Boundary points are represented by a small positive ray angle eps that the
// caller extrapolates to zero; mu itself always stays strictly interior.
struct SpectralPoint {
  cplx mu;
  BoundarySide side = BoundarySide::interior;

  SpectralPoint() : mu(0.0, 0.0) {}
  explicit SpectralPoint(cplx m, BoundarySide s = BoundarySide::interior)
      : mu(m), side(s) {
    const double a = std::arg(m);
    if (std::abs(m) > 0.0 && (a <= -1e-15 || a >= 1.5707963267948966))
      throw validation_error("SpectralPoint: arg(mu) must lie in [0, pi/2)");
  }

  static SpectralPoint on_ray(double modulus, double angle,
                              BoundarySide s = BoundarySide::interior) {
    return SpectralPoint(std::polar(modulus, angle), s);
  }

  cplx z() const { return mu * mu * mu * mu; }  // recomputed, never stored
  double ray_angle() const { return std::arg(mu); }
};

enum class ThresholdClass { Regular, FirstKind, SecondKind, Eigenvalue };

inline const char* to_string(ThresholdClass c) {
  switch (c) {
    case ThresholdClass::Regular: return "Regular";
    case ThresholdClass::FirstKind: return "FirstKind";
    case ThresholdClass::SecondKind: return "SecondKind";
    case ThresholdClass::Eigenvalue: return "Eigenvalue";
  }
  return "?";
}

ThresholdClass threshold_class_from_string(const std::string& s);

// ladder depth ordering: Regular < FirstKind < SecondKind < Eigenvalue
inline int class_depth(ThresholdClass c) { return static_cast<int>(c); }

// Surface area of the unit sphere S^{d-1}.
double sphere_area(int d);

}  // namespace biharm
