// Modified Bessel function K_nu(w) for complex w with Re w > 0 (or w on the
// imaginary axis away from 0), for the orders that appear in radial resolvent
// kernels: integer nu (even dimensions) and half-integer nu (odd dimensions).
#pragma once

#include "biharm/types.hpp"

namespace biharm {

// K_{n+1/2}(w) via the closed Bessel-polynomial form; exact up to rounding.
cplx bessel_k_half(int n, cplx w);

// K_m(w), integer m >= 0: ascending series with log term for |w| <= 10,
// asymptotic expansion beyond. Relative accuracy ~1e-12 near the real axis,
// degrading to ~e^{-2|w|} worst case at the crossover (see tests).
cplx bessel_k_int(int m, cplx w);

// Dispatch on doubled order: bessel_k(2*nu, w).
cplx bessel_k2(int two_nu, cplx w);

}  // namespace biharm
