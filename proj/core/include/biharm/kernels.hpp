// Radial free-resolvent kernels in dimension d.
//
//   laplace_kernel(d, k, r): kernel of (-Delta - k^2)^{-1} at |x-y| = r,
//     outgoing branch (Im k >= 0).  Odd d uses the closed exponential form,
//     even d the modified-Bessel route.
//
//   biharm_kernel(d, p, r): kernel of ((-Delta)^2 - mu^4)^{-1} via the
//     second-order splitting for moderate |mu| r and a convergent power
//     series near the threshold.  d >= 5.
#pragma once

#include "biharm/types.hpp"

namespace biharm {

cplx laplace_kernel(int d, cplx k, double r);

cplx biharm_kernel(int d, const SpectralPoint& p, double r);

// Riesz constant c_d = Gamma((d-4)/2) / (2^4 pi^{d/2}); the mu = 0 kernel is
// c_d r^{4-d}.  Requires d >= 5.
double riesz_constant(int d);

// Branch internals, exposed so tests can compare them on the overlap band.
cplx biharm_kernel_series(int d, cplx mu, double r);
cplx biharm_kernel_split(int d, cplx mu, double r);

// |mu| r below this uses the series branch.
inline constexpr double kSeriesBranchCut = 1e-2;

}  // namespace biharm
