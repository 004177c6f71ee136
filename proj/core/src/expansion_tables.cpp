#include "biharm/expansion_tables.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace biharm {

namespace {

constexpr double kEulerGamma = 0.57721566490153286060651209008240;

// Power series of S(w) = w^nu K_nu(w), nu = d/2 - 1, as
//   S(w) = sum_q (A[q] + B[q] * ln(w/2)) w^q.
struct WeightedSeries {
  std::vector<double> A;
  std::vector<double> B;
  std::vector<double> amag;  // sum of |summand| feeding A[q]; detects exact
                             // cancellations (half-integer orders zero out all
                             // odd powers below w^{d-2})
};

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

double digamma_int(int np1) {
  double h = 0.0;
  for (int i = 1; i < np1; ++i) h += 1.0 / i;
  return -kEulerGamma + h;
}

WeightedSeries series_odd(int d, int qmax) {
  // S(w) = sqrt(pi/2) e^{-w} sum_j beta_{n,j} w^{n-j}, n = (d-3)/2
  const int n = (d - 3) / 2;
  std::vector<double> beta(n + 1);
  beta[0] = 1.0;
  for (int j = 0; j + 1 <= n; ++j)
    beta[j + 1] = beta[j] * (n + j + 1) * (n - j) / (2.0 * (j + 1));

  WeightedSeries s;
  s.A.assign(qmax + 1, 0.0);
  s.B.assign(qmax + 1, 0.0);
  s.amag.assign(qmax + 1, 0.0);
  const double pref = std::sqrt(M_PI / 2.0);
  for (int j = 0; j <= n; ++j) {
    const int p = n - j;  // power contributed by the polynomial factor
    for (int q = p; q <= qmax; ++q) {
      const int k = q - p;  // order in exp(-w)
      const double sgn = (k % 2 == 0) ? 1.0 : -1.0;
      const double summand = pref * beta[j] * sgn / factorial(k);
      s.A[q] += summand;
      s.amag[q] += std::abs(summand);
    }
  }
  // snap cancelled coefficients to exact zero
  for (int q = 0; q <= qmax; ++q)
    if (std::abs(s.A[q]) <= 1e-13 * s.amag[q]) s.A[q] = 0.0;
  return s;
}

WeightedSeries series_even(int d, int qmax) {
  // S(w) = w^m K_m(w), integer m = d/2 - 1, from the ascending series of K_m.
  const int m = d / 2 - 1;
  WeightedSeries s;
  s.A.assign(qmax + 1, 0.0);
  s.B.assign(qmax + 1, 0.0);
  s.amag.assign(qmax + 1, 0.0);  // no cancelling sums on the even side

  // finite part: 2^{m-1} sum_{k<m} (m-k-1)! (-1)^k / (k! 4^k) w^{2k}
  double four_k = 1.0;
  for (int k = 0; k < m && 2 * k <= qmax; ++k) {
    const double sgn = (k % 2 == 0) ? 1.0 : -1.0;
    s.A[2 * k] +=
        std::pow(2.0, m - 1) * factorial(m - k - 1) * sgn / (factorial(k) * four_k);
    four_k *= 4.0;
  }

  // log part: (-1)^{m+1} ln(w/2) w^m I_m(w),
  //   w^m I_m(w) = 2^{-m} sum_k w^{2m+2k} / (k! (m+k)! 4^k)
  // psi part: (-1)^m 2^{-m-1} sum_k [psi(k+1)+psi(m+k+1)] w^{2m+2k} / (k!(m+k)! 4^k)
  const double msgn = (m % 2 == 0) ? 1.0 : -1.0;
  four_k = 1.0;
  for (int k = 0; 2 * m + 2 * k <= qmax; ++k) {
    const int q = 2 * m + 2 * k;
    const double base = 1.0 / (factorial(k) * factorial(m + k) * four_k);
    s.B[q] += -msgn * std::pow(2.0, -m) * base;
    s.A[q] += msgn * std::pow(2.0, -m - 1) * (digamma_int(k + 1) + digamma_int(m + k + 1)) * base;
    four_k *= 4.0;
  }
  return s;
}

KernelTable build_table(int d) {
  const int qmax = 26;
  const WeightedSeries s = (d % 2 == 1) ? series_odd(d, qmax) : series_even(d, qmax);

  KernelTable table;
  table.dimension = d;

  const double front = 0.5 * std::pow(2.0 * M_PI, -0.5 * d);

  // Combine S(-i u) - S(u), u = mu r, using ln(-i u/2) = ln(u/2) - i pi/2
  // (principal branch, arg u in [0, pi/2)).  Per power u^q:
  //   bracket = (-i)^q - 1
  //   const   = A_q * bracket - (i pi/2) B_q (-i)^q - ln 2 * B_q * bracket
  //   log     = B_q * bracket          (multiplies ln mu + ln r)
  const cplx mi(0.0, -1.0);
  cplx miq(1.0, 0.0);  // (-i)^q
  for (int q = 0; q <= qmax; ++q, miq *= mi) {
    const cplx bracket = miq - 1.0;
    cplx c = s.A[q] * bracket - cplx(0.0, M_PI / 2.0) * s.B[q] * miq -
             std::log(2.0) * s.B[q] * bracket;
    cplx lc = s.B[q] * bracket;
    c *= front;
    lc *= front;
    // A_q was snapped to zero when it cancels exactly, and the bracket is an
    // exact complex zero for q = 0 mod 4, so vanished terms are exact zeros here.
    if (std::abs(c) < 1e-30 && std::abs(lc) < 1e-30) continue;
    if (q < 2)
      throw std::logic_error("expansion table: nonzero coefficient below mu^0");
    table.terms.push_back({q - 2, q + 2 - d, c, lc});
  }
  return table;
}

}  // namespace

const ExpansionTerm* KernelTable::term_with_mu_pow(int a) const {
  for (const auto& t : terms)
    if (t.mu_pow == a) return &t;
  return nullptr;
}

cplx KernelTable::evaluate(cplx mu, double r) const {
  return evaluate_prefix(mu, r, static_cast<int>(terms.size()));
}

cplx KernelTable::evaluate_prefix(cplx mu, double r, int nterms) const {
  const cplx logs = std::log(mu) + std::log(r);
  cplx sum(0.0, 0.0);
  const int n = std::min<int>(nterms, static_cast<int>(terms.size()));
  for (int i = 0; i < n; ++i) {
    const auto& t = terms[i];
    cplx c = t.coeff;
    if (t.log_coeff != cplx(0.0, 0.0)) c += t.log_coeff * logs;
    sum += std::pow(mu, t.mu_pow) * std::pow(r, t.r_pow) * c;
  }
  return sum;
}

const KernelTable& expansion_coefficients(int d) {
  if (d < 5) throw validation_error("expansion_coefficients: dimension must be >= 5");
  static std::mutex mu;
  static std::map<int, KernelTable> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(d);
  if (it == cache.end()) it = cache.emplace(d, build_table(d)).first;
  return it->second;
}

}  // namespace biharm
