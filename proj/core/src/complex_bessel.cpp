#include "biharm/complex_bessel.hpp"

#include <cmath>

namespace biharm {

namespace {

// Harmonic-number form of digamma at positive integers: psi(n+1) = -gamma + H_n.
double digamma_int(int np1) {
  static const double egamma = 0.57721566490153286060651209008240243;
  double h = 0.0;
  for (int k = 1; k < np1; ++k) h += 1.0 / k;
  return -egamma + h;
}

}  // namespace

cplx bessel_k_half(int n, cplx w) {
  // K_{n+1/2}(w) = sqrt(pi/(2w)) e^{-w} sum_j beta_{n,j} w^{-j},
  // beta_{n,j} = (n+j)! / (j! (n-j)! 2^j)
  if (n < 0) n = -n - 1;  // K_{-nu} = K_{nu}
  cplx poly = 0.0;
  double beta = 1.0;  // beta_{n,0}
  cplx winv = 1.0 / w;
  cplx wj = 1.0;
  for (int j = 0; j <= n; ++j) {
    poly += beta * wj;
    wj *= winv;
    // beta_{n,j+1}/beta_{n,j} = (n+j+1)(n-j) / (2 (j+1))
    beta *= double(n + j + 1) * double(n - j) / (2.0 * (j + 1));
  }
  return std::sqrt(M_PI / (2.0 * w)) * std::exp(-w) * poly;
}

namespace {

cplx bessel_i_int(int m, cplx w) {
  // ascending series, adequate for |w| <= 10 where it is used
  const cplx q = 0.25 * w * w;
  cplx term = std::pow(0.5 * w, m);
  for (int k = 1; k <= m; ++k) term /= double(k);
  cplx sum = term;
  for (int k = 1; k < 200; ++k) {
    term *= q / (double(k) * double(k + m));
    sum += term;
    if (std::abs(term) < 1e-18 * std::abs(sum)) break;
  }
  return sum;
}

cplx bessel_k_int_series(int m, cplx w) {
  // K_m(w) = 1/2 (w/2)^{-m} sum_{k=0}^{m-1} ((m-k-1)!/k!) (-w^2/4)^k
  //          + (-1)^{m+1} ln(w/2) I_m(w)
  //          + (-1)^m 1/2 (w/2)^m sum_k [psi(k+1)+psi(m+k+1)]/(k!(m+k)!) (w^2/4)^k
  const cplx half_w = 0.5 * w;
  const cplx q = half_w * half_w;
  cplx finite = 0.0;
  if (m > 0) {
    cplx term = 0.5 * std::pow(half_w, -m);
    double fac = 1.0;  // (m-1)!/0!
    for (int k = 1; k < m; ++k) fac *= k;
    term *= fac;
    finite = term;
    for (int k = 1; k < m; ++k) {
      // ratio: ((m-k-1)!/k!) / ((m-k)!/(k-1)!) = 1/(k (m-k))
      term *= -q / (double(k) * double(m - k));
      finite += term;
    }
  }
  const double sgn = (m % 2 == 0) ? 1.0 : -1.0;
  const cplx logpart = -sgn * std::log(half_w) * bessel_i_int(m, w);
  cplx psum = 0.0;
  {
    cplx term = 0.5 * std::pow(half_w, m);
    double kfac_mkfac = 1.0;
    for (int k = 1; k <= m; ++k) kfac_mkfac *= k;  // (m)! at k=0
    term /= kfac_mkfac;
    for (int k = 0; k < 400; ++k) {
      const cplx contrib = term * (digamma_int(k + 1) + digamma_int(m + k + 1));
      psum += contrib;
      if (k > 2 && std::abs(contrib) < 1e-18 * (std::abs(psum) + 1e-300)) break;
      term *= q / (double(k + 1) * double(m + k + 1));
    }
  }
  return finite + logpart + sgn * psum;
}

cplx bessel_k_int_asymptotic(int m, cplx w) {
  // K_m(w) ~ sqrt(pi/(2w)) e^{-w} [1 + sum_k a_k], a_k = prod_j (4m^2-(2j-1)^2)/(8w k!)
  const double fm2 = 4.0 * double(m) * double(m);
  cplx sum = 1.0, term = 1.0;
  cplx inv8w = 1.0 / (8.0 * w);
  double prev_mag = 1e300;
  for (int k = 1; k <= 60; ++k) {
    const double num = fm2 - double(2 * k - 1) * double(2 * k - 1);
    term *= num * inv8w / double(k);
    const double mag = std::abs(term);
    if (mag > prev_mag) break;  // passed the smallest term; stop
    sum += term;
    prev_mag = mag;
    if (mag < 1e-17 * std::abs(sum)) break;
  }
  return std::sqrt(M_PI / (2.0 * w)) * std::exp(-w) * sum;
}

}  // namespace

cplx bessel_k_int(int m, cplx w) {
  if (m < 0) m = -m;
  return (std::abs(w) <= 10.0) ? bessel_k_int_series(m, w)
                               : bessel_k_int_asymptotic(m, w);
}

cplx bessel_k2(int two_nu, cplx w) {
  if (two_nu < 0) two_nu = -two_nu;
  if (two_nu % 2 == 0) return bessel_k_int(two_nu / 2, w);
  return bessel_k_half((two_nu - 1) / 2, w);
}

}  // namespace biharm
