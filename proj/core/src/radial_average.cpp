#include "biharm/radial_average.hpp"

#include <algorithm>
#include <cmath>

#include "biharm/kernels.hpp"
#include "biharm/quadrature.hpp"

namespace biharm {

namespace {

// avg(r,s) = C(d) (rs)^{2-d} int_a^b K(rho) [(rho^2-a^2)(b^2-rho^2)]^{(d-3)/2} rho drho
double angular_constant(int d) {
  return sphere_area(d - 1) / sphere_area(d) * std::pow(2.0, 3 - d);
}

// the full weight against which K is integrated; products are grouped as
// (rho - a)(rho + a)(b - rho)(b + rho) to keep accuracy near the endpoints
double pair_weight(int d, double a, double b, double rho) {
  const double prod = (rho - a) * (rho + a) * (b - rho) * (b + rho);
  if (prod <= 0.0) return 0.0;
  return std::pow(prod, 0.5 * (d - 3)) * rho;
}

}  // namespace

cplx radial_average(int d, const std::function<cplx(double)>& kernel, double r,
                    double s) {
  if (d < 3) throw validation_error("radial_average: dimension must be >= 3");
  if (!(r > 0.0) || !(s > 0.0))
    throw validation_error("radial_average: radii must be positive");
  const double a = std::abs(r - s), b = r + s;
  const double front = angular_constant(d) * std::pow(r * s, 2 - d);
  const cplx integral = tanh_sinh_c(
      [&](double rho) -> cplx {
        const double w = pair_weight(d, a, b, rho);
        if (w == 0.0) return cplx(0.0, 0.0);
        return w * kernel(rho);
      },
      a, b, 1e-13, 11);
  return front * integral;
}

double averaged_riesz(int d, double r, double s) {
  if (d < 5) throw validation_error("averaged_riesz: dimension must be >= 5");
  const double rg = std::max(r, s), rl = std::min(r, s);
  const double t2 = (rl / rg) * (rl / rg);
  return std::pow(rg, 4 - d) * (1.0 - t2 * double(d - 4) / double(d));
}

double averaged_power(int d, int p, double r, double s) {
  if (p == 2) return r * r + s * s;
  if (p == 4 - d) return averaged_riesz(d, r, s);
  const double rg = std::max(r, s), rl = std::min(r, s);
  const double t2 = (rl / rg) * (rl / rg);
  if (d == 5 && p == 3)
    return rg * rg * rg *
           (1.0 + t2 * (9.0 / 5.0 + t2 * (9.0 / 35.0 - t2 / 105.0)));
  if (d == 7 && p == 1)
    return rg * (1.0 + t2 * (3.0 / 7.0 + t2 * (-1.0 / 21.0 + t2 / 231.0)));
  if (d == 9 && p == -1)
    return (1.0 + t2 * (-1.0 / 3.0 + t2 * (1.0 / 11.0 - t2 * 5.0 / 429.0))) / rg;
  throw validation_error("averaged_power: unsupported (dimension, power) pair");
}

double averaged_log_kernel(int d, double r, double s) {
  if (d == 6)
    return radial_average(
               6, [](double rho) { return cplx(rho * rho * std::log(rho), 0.0); }, r, s)
        .real();
  if (d == 8)
    return radial_average(8, [](double rho) { return cplx(std::log(rho), 0.0); }, r, s)
        .real();
  throw validation_error("averaged_log_kernel: defined for d = 6 and d = 8 only");
}

// ---------------------------------------------------------------------------
// AverageTable

AverageTable::AverageTable(int d, std::vector<double> radii, double kappa_max,
                           double rel_tol)
    : d_(d), degree_(20), radii_(std::move(radii)) {
  if (d_ < 5) throw validation_error("AverageTable: dimension must be >= 5");
  if (radii_.empty()) throw validation_error("AverageTable: empty radius set");
  for (std::size_t i = 0; i < radii_.size(); ++i) {
    if (!(radii_[i] > 0.0) || (i > 0 && radii_[i] <= radii_[i - 1]))
      throw validation_error("AverageTable: radii must be ascending and positive");
  }

  const double rho_max = 2.0 * radii_.back();
  const double floor_rho = 1e-9 * radii_.back();
  const double wcap = 8.0 / std::max(kappa_max, 1e-12);
  edges_.push_back(floor_rho);
  while (edges_.back() < rho_max) {
    const double x = edges_.back();
    edges_.push_back(std::min(x + std::min(x, wcap), rho_max));
  }
  const int npanels = static_cast<int>(edges_.size()) - 1;
  if (npanels > 60000)
    throw numerical_error("AverageTable: panel layout exploded");

  nodes_.resize(std::size_t(npanels) * degree_);
  for (int p = 0; p < npanels; ++p) {
    const auto xs = chebyshev_nodes(degree_, edges_[p], edges_[p + 1]);
    std::copy(xs.begin(), xs.end(), nodes_.begin() + std::size_t(p) * degree_);
  }

  const int n = static_cast<int>(radii_.size());
  blocks_.resize(std::size_t(n) * (n + 1) / 2);
  std::vector<double> tcol(degree_);

  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      const double r = radii_[i], s = radii_[j];
      const double a = std::abs(r - s), b = r + s;
      const double front = angular_constant(d_) * std::pow(r * s, 2 - d_);
      const double target = averaged_riesz(d_, r, s);

      // pick the refinement level: enough nodes for the worst oscillation,
      // then verified against the exact averaged Riesz kernel
      int level =
          std::max(3, 1 + static_cast<int>(std::ceil(
                            std::log2(std::max(kappa_max * (b - a) / 2.0, 1.0)))));
      QuadRule rule;
      double sum = 0.0;
      for (;; ++level) {
        rule = tanh_sinh_rule(a, b, level);
        sum = 0.0;
        for (std::size_t k = 0; k < rule.x.size(); ++k)
          sum += rule.w[k] * pair_weight(d_, a, b, rule.x[k]) *
                 std::pow(rule.x[k], 4 - d_);
        if (std::abs(front * sum - target) <= rel_tol * target || level >= 9) break;
      }
      if (std::abs(front * sum - target) > 100 * rel_tol * target)
        throw numerical_error("AverageTable: pair quadrature failed to converge");

      // combined weights W_k = w_k g(rho_k) rho_k^{4-d} (the flattening power
      // rho^{d-4} is applied to the kernel in fill), pruned and binned
      PairBlock blk{static_cast<std::uint32_t>(phi_.size()), 0, 0};
      int pfirst = -1, plast = -1;
      std::vector<std::pair<int, double>> kept;  // (panel, t) parallel to W
      std::vector<double> wkept;
      for (std::size_t k = 0; k < rule.x.size(); ++k) {
        const double rho = rule.x[k];
        if (rho <= edges_.front() || rho >= edges_.back()) continue;
        const double W = front * rule.w[k] * pair_weight(d_, a, b, rho) *
                         std::pow(rho, 4 - d_);
        if (std::abs(W) < 1e-17 * target) continue;
        int p = static_cast<int>(std::upper_bound(edges_.begin(), edges_.end(), rho) -
                                 edges_.begin()) -
                1;
        p = std::clamp(p, 0, npanels - 1);
        const double t =
            std::clamp((2.0 * rho - edges_[p] - edges_[p + 1]) /
                           (edges_[p + 1] - edges_[p]),
                       -1.0, 1.0);
        kept.emplace_back(p, t);
        wkept.push_back(W);
        if (pfirst < 0 || p < pfirst) pfirst = p;
        if (p > plast) plast = p;
      }
      if (pfirst >= 0) {
        blk.first_panel = static_cast<std::uint16_t>(pfirst);
        blk.panel_count = static_cast<std::uint16_t>(plast - pfirst + 1);
        phi_.resize(phi_.size() + std::size_t(blk.panel_count) * degree_, 0.0);
        double* base = phi_.data() + blk.offset;
        for (std::size_t k = 0; k < kept.size(); ++k) {
          const auto [p, t] = kept[k];
          double* slot = base + std::size_t(p - pfirst) * degree_;
          // accumulate W * T_c(t) by the Chebyshev recurrence
          double tm2 = 1.0, tm1 = t;
          slot[0] += wkept[k];
          if (degree_ > 1) slot[1] += wkept[k] * t;
          for (int c = 2; c < degree_; ++c) {
            const double tc = 2.0 * t * tm1 - tm2;
            slot[c] += wkept[k] * tc;
            tm2 = tm1;
            tm1 = tc;
          }
        }
      }
      blocks_[pair_index(i, j)] = blk;
    }
  }
}

std::size_t AverageTable::pair_index(int i, int j) const {
  const std::size_t n = radii_.size();
  const std::size_t ii = static_cast<std::size_t>(i);
  return ii * n - ii * (ii + 1) / 2 + static_cast<std::size_t>(j);
}

Mat AverageTable::fill_impl(const std::function<cplx(double)>& flattened) const {
  const int npanels = panel_count();
  const int n = static_cast<int>(radii_.size());

  // per-panel Chebyshev coefficients of the flattened kernel
  std::vector<cplx> coeffs(std::size_t(npanels) * degree_);
  std::vector<cplx> vals(degree_);
  for (int p = 0; p < npanels; ++p) {
    for (int c = 0; c < degree_; ++c)
      vals[c] = flattened(nodes_[std::size_t(p) * degree_ + c]);
    const auto cf = chebyshev_coeffs(vals);
    std::copy(cf.begin(), cf.end(), coeffs.begin() + std::size_t(p) * degree_);
  }

  Mat out(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      const PairBlock& blk = blocks_[pair_index(i, j)];
      cplx acc(0.0, 0.0);
      const double* phi = phi_.data() + blk.offset;
      for (int p = 0; p < blk.panel_count; ++p) {
        const cplx* cf = coeffs.data() + std::size_t(blk.first_panel + p) * degree_;
        const double* ph = phi + std::size_t(p) * degree_;
        for (int c = 0; c < degree_; ++c) acc += ph[c] * cf[c];
      }
      out(i, j) = acc;
      out(j, i) = acc;
    }
  }
  return out;
}

Mat AverageTable::fill(const SpectralPoint& p) const {
  const int d = d_;
  return fill_impl([&, d](double rho) -> cplx {
    return biharm_kernel(d, p, rho) * std::pow(rho, double(d - 4));
  });
}

Mat AverageTable::fill(const std::function<cplx(double)>& kernel) const {
  const int d = d_;
  return fill_impl(
      [&, d](double rho) -> cplx { return kernel(rho) * std::pow(rho, double(d - 4)); });
}

}  // namespace biharm
