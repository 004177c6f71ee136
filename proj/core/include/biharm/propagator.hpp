// Time evolution on the absolutely continuous subspace:
//   <f, e^{itH} P_ac g> = integral_0^inf e^{it lambda^4} rho(lambda) 4 lambda^3 d lambda,
// evaluated as integral e^{itu} rho_z(u) du after u = lambda^4. The amplitude
// is interpolated once per (f, g) pair by Chebyshev polynomials on geometric
// panels; each time value then costs only the oscillatory Chebyshev moments,
// which stay accurate for arbitrarily large t (Filon-type quadrature).
#pragma once

#include <functional>
#include <string>
#include <vector>

#include "biharm/density.hpp"

namespace biharm {

struct PropagatorOptions {
  double lambda_max = 8.0;  // spectral truncation; the context's average
                            // table must cover this kappa range
  double u_min = 1e-9;      // below this, a two-term power model in u
  int degree = 16;          // Chebyshev degree per panel, 4 to 20 (higher
                            // degrees would destabilize the oscillatory
                            // moment evaluation near its quadrature-to-
                            // recurrence crossover)
  // optional multiplier chi(lambda) on the spectral density (low-energy
  // cutoff studies); empty means chi = 1
  std::function<double(double)> cutoff;
};

// integral_0^{u_max} amplitude(u) e^{itu} du on geometric ratio-2 panels
// with Chebyshev amplitude interpolation; the piece below u_min uses a
// two-point power-law model with the e^{itu} = 1 + itu correction, so the
// endpoint may carry an integrable singularity u^p, p > -1.
cplx oscillatory_integral(double u_min, double u_max,
                          const std::function<double(double)>& amplitude,
                          double t, int degree = 16);

class Propagator {
 public:
  // samples the spectral density of the pair (f, g) once; the density work
  // (three resolvent solves per node) dominates construction time
  Propagator(const LadderState& ladder, const ProblemContext& ctx,
             const RadialProfile& f, const RadialProfile& g,
             PropagatorOptions opts = {});

  // negative times come from the reflection e^{-itH} = conj(e^{itH}) valid
  // for real profiles
  cplx operator()(double t) const;

  // panels whose Chebyshev coefficient tails stayed above the resolution
  // target are reported here rather than silently accepted
  const std::vector<std::string>& warnings() const { return warnings_; }

 private:
  struct Panel {
    double mid = 0.0;
    double half = 0.0;
    RVec coef;  // Chebyshev coefficients of the amplitude, first/last halved
  };
  std::vector<Panel> panels_;
  double u_min_ = 0.0;
  double endpoint_value_ = 0.0;  // amplitude at u_min
  double endpoint_power_ = 0.0;  // local exponent p of amplitude ~ u^p
  int degree_ = 16;
  std::vector<std::string> warnings_;

  cplx evaluate(double t) const;
};

}  // namespace biharm
