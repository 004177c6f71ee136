// Small-mu expansion of the fourth-order free-resolvent radial kernel.
//
// The kernel of ((-Delta)^2 - mu^4)^{-1} at distance r expands as
//   sum_q  mu^{a_q} r^{b_q} [ coeff_q + log_coeff_q * (ln mu + ln r) ],
// with b_q - a_q = 4 - d for every term. Only even dimensions carry logs.
// The table is generated from the Bessel series of the two second-order
// kernels in the splitting identity; realness/complexness of the leading
// coefficients is pinned by tests.
#pragma once

#include <vector>

#include "biharm/types.hpp"

namespace biharm {

struct ExpansionTerm {
  int mu_pow;      // a_q
  int r_pow;       // b_q
  cplx coeff;      // constant part
  cplx log_coeff;  // multiplies ln(mu) + ln(r); zero for odd d
};

struct KernelTable {
  int dimension = 0;
  std::vector<ExpansionTerm> terms;  // ascending mu_pow, up to mu^24

  // mu^0 coefficient: the Riesz-kernel constant c_d (term r^{4-d})
  double riesz_constant() const { return terms.front().coeff.real(); }

  // first term with the given mu power, or nullptr
  const ExpansionTerm* term_with_mu_pow(int a) const;

  // evaluate the table sum at (mu, r); converged to machine precision for
  // |mu| r <~ 5e-2
  cplx evaluate(cplx mu, double r) const;

  // evaluate the partial sum of the first nterms terms
  cplx evaluate_prefix(cplx mu, double r, int nterms) const;
};

// Cached table for dimension d >= 5.
const KernelTable& expansion_coefficients(int d);

}  // namespace biharm
