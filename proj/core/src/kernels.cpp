#include "biharm/kernels.hpp"

#include <cmath>
#include <vector>

#include "biharm/complex_bessel.hpp"
#include "biharm/expansion_tables.hpp"

namespace biharm {

namespace {

// (2 pi)^{-d/2} (kappa/r)^{nu} K_nu(kappa r), nu = d/2 - 1, kappa = -i k.
// Shared by both parities; the public odd-d path below avoids the Bessel
// dispatch entirely.
cplx helmholtz_unified(int d, cplx kappa, double r) {
  const cplx w = kappa * r;
  const cplx kv = bessel_k2(d - 2, w);
  const double half_nu2 = 0.5 * (d - 2);  // nu = d/2 - 1
  return std::pow(2.0 * M_PI, -0.5 * d) * std::pow(kappa / r, half_nu2) * kv;
}

}  // namespace

cplx laplace_kernel(int d, cplx k, double r) {
  if (d < 3) throw validation_error("laplace_kernel: dimension must be >= 3");
  if (!(r > 0.0)) throw validation_error("laplace_kernel: r must be positive");
  if (k.imag() < 0.0)
    throw validation_error("laplace_kernel: Im k must be >= 0 (outgoing branch)");

  if (k == cplx(0.0, 0.0))
    return std::tgamma(0.5 * d - 1.0) / (4.0 * std::pow(M_PI, 0.5 * d)) *
           std::pow(r, 2.0 - d);

  const cplx kappa = cplx(0.0, -1.0) * k;
  if (d % 2 == 0) return helmholtz_unified(d, kappa, r);

  // Odd d: C_d r^{2-d} e^{-w} sum_j beta_{n,j} w^{n-j}, n = (d-3)/2.
  const int n = (d - 3) / 2;
  std::vector<double> beta(n + 1);
  beta[0] = 1.0;
  for (int j = 0; j + 1 <= n; ++j)
    beta[j + 1] = beta[j] * (n + j + 1) * (n - j) / (2.0 * (j + 1));

  const cplx w = kappa * r;
  cplx poly(beta[0], 0.0);  // Horner, descending powers: coef of w^i is beta[n-i]
  for (int i = 1; i <= n; ++i) poly = poly * w + beta[i];

  const double cd = std::pow(2.0 * M_PI, -0.5 * d) * std::sqrt(M_PI / 2.0);
  return cd * std::pow(r, 2.0 - d) * std::exp(-w) * poly;
}

double riesz_constant(int d) {
  if (d < 5) throw validation_error("riesz_constant: dimension must be >= 5");
  return std::tgamma(0.5 * (d - 4)) / (16.0 * std::pow(M_PI, 0.5 * d));
}

cplx biharm_kernel_series(int d, cplx mu, double r) {
  return expansion_coefficients(d).evaluate(mu, r);
}

cplx biharm_kernel_split(int d, cplx mu, double r) {
  // ((-Delta)^2 - mu^4)^{-1} = (2 mu^2)^{-1} [(-Delta - mu^2)^{-1} - (-Delta + mu^2)^{-1}]
  // with k = mu resp. k = i mu, i.e. kappa = -i mu resp. kappa = mu.
  const cplx g1 = helmholtz_unified(d, cplx(0.0, -1.0) * mu, r);
  const cplx g2 = helmholtz_unified(d, mu, r);
  return (g1 - g2) / (2.0 * mu * mu);
}

cplx biharm_kernel(int d, const SpectralPoint& p, double r) {
  if (d < 5) throw validation_error("biharm_kernel: dimension must be >= 5");
  if (!(r > 0.0)) throw validation_error("biharm_kernel: r must be positive");

  const cplx mu = p.mu;
  cplx val;
  if (mu == cplx(0.0, 0.0)) {
    val = riesz_constant(d) * std::pow(r, 4.0 - d);
  } else if (std::abs(mu) * r < kSeriesBranchCut) {
    val = biharm_kernel_series(d, mu, r);
  } else {
    val = biharm_kernel_split(d, mu, r);
  }
  return p.side == BoundarySide::lower ? std::conj(val) : val;
}

}  // namespace biharm
