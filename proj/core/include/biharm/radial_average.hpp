// Angular averaging of radial kernels: for |x| = r, |y| = s,
//   avg(r, s) = (1/sigma_{d-1}) int_{S^{d-1}} K(|r e_1 - s omega|) d omega,
// reduced to an integral over the distance variable rho in [|r-s|, r+s].
//
// Three layers:
//   - radial_average: adaptive evaluation for one pair, the accuracy anchor
//   - averaged_power / averaged_log_kernel: closed forms for the ladder
//   - AverageTable: precomputed pair quadratures over a shared panel grid so
//     the kernel matrix at a new spectral point costs one kernel evaluation
//     per panel node plus a dot product per pair
#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "biharm/types.hpp"

namespace biharm {

cplx radial_average(int d, const std::function<cplx(double)>& kernel, double r,
                    double s);

// Exact averages of integer powers rho^p. Supported: p = 2 (any d), the
// surface power p = 4 - d, and the ladder powers (d, p) = (5, 3), (7, 1),
// (9, -1). Everything else throws.
double averaged_power(int d, int p, double r, double s);

// avg rho^{4-d}, the mu = 0 kernel shape: r_>^{4-d} (1 - ((d-4)/d) t^2)
double averaged_riesz(int d, double r, double s);

// Logarithmic ladder kernels on the even side: d = 6 gives avg rho^2 ln rho,
// d = 8 gives avg ln rho. Numerically integrated.
double averaged_log_kernel(int d, double r, double s);

class AverageTable {
 public:
  // radii: grid nodes, ascending, positive. kappa_max: largest |mu| that
  // fill() will see; panel widths are capped so oscillation stays resolvable.
  AverageTable(int d, std::vector<double> radii, double kappa_max,
               double rel_tol = 1e-12);

  int dimension() const { return d_; }
  const std::vector<double>& radii() const { return radii_; }

  // matrix of averaged fourth-order kernels at spectral point p
  Mat fill(const SpectralPoint& p) const;
  // matrix of averaged values of an arbitrary radial kernel
  Mat fill(const std::function<cplx(double)>& kernel) const;

  int panel_count() const { return static_cast<int>(edges_.size()) - 1; }
  std::size_t coefficient_count() const { return phi_.size(); }

 private:
  struct PairBlock {
    std::uint32_t offset;       // into phi_
    std::uint16_t first_panel;  // contiguous panel range
    std::uint16_t panel_count;
  };

  Mat fill_impl(const std::function<cplx(double)>& flattened) const;
  std::size_t pair_index(int i, int j) const;  // i <= j

  int d_ = 0;
  int degree_ = 0;
  std::vector<double> radii_;
  std::vector<double> edges_;
  std::vector<double> nodes_;  // panel-wise Chebyshev nodes, flat
  std::vector<double> phi_;
  std::vector<PairBlock> blocks_;
};

}  // namespace biharm
