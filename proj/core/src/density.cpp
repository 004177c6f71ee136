#include "biharm/density.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "biharm/inversion.hpp"

namespace biharm {

namespace {

constexpr double kPi = 3.14159265358979323846;

RVec volume_weights(const ProblemContext& ctx) {
  const int n = static_cast<int>(ctx.grid.r.size());
  const double sigma = sphere_area(ctx.problem.dimension);
  RVec vw(n);
  for (int i = 0; i < n; ++i)
    vw[i] = sigma * ctx.grid.w[i] *
            std::pow(ctx.grid.r[i], ctx.problem.dimension - 1);
  return vw;
}

RVec sample_profile(const ProblemContext& ctx, const RadialProfile& f) {
  const int n = static_cast<int>(ctx.grid.r.size());
  RVec fv(n);
  for (int i = 0; i < n; ++i) fv[i] = f(ctx.grid.r[i]);
  if (!fv.allFinite())
    throw validation_error("density: profile is not finite at a grid node");
  return fv;
}

// M(kappa e^{i pi/4}) acts at z = -kappa^4 where the two half-kernels are
// complex conjugates, so the assembled operator must come out real.
RMat negative_energy_M(const ProblemContext& ctx, double kappa) {
  const Mat M = assemble_M(ctx, SpectralPoint::on_ray(kappa, kPi / 4.0));
  const double re = M.real().norm();
  const double im = M.imag().norm();
  if (im > 1e-8 * std::max(re, 1.0))
    throw invariant_violation(
        "find_bound_states: M at z = -kappa^4 has imaginary part " +
        std::to_string(im));
  return M.real();
}

int negative_count(const RMat& M) {
  Eigen::SelfAdjointEigenSolver<RMat> es(M, Eigen::EigenvaluesOnly);
  return static_cast<int>((es.eigenvalues().array() < 0.0).count());
}

// tail contribution to the L2 inner product of two multipole continuations
// beyond radius R: integral_R^inf (a1 r^{4-d} + b1 r^{2-d}) *
// (a2 r^{4-d} + b2 r^{2-d}) sigma r^{d-1} dr
double tail_inner(int d, double R, const GridFunction& u,
                  const GridFunction& v) {
  const double a1 = u.tail_lead, b1 = u.tail_next;
  const double a2 = v.tail_lead, b2 = v.tail_next;
  double s = 0.0;
  if (a1 * a2 != 0.0) {
    if (d <= 8)
      throw invariant_violation(
          "point_spectrum: a state with an r^{4-d} tail is not square "
          "integrable for d <= 8");
    s += a1 * a2 * std::pow(R, 8 - d) / (d - 8);
  }
  const double cross = a1 * b2 + a2 * b1;
  if (cross != 0.0) s += cross * std::pow(R, 6 - d) / (d - 6);
  if (b1 * b2 != 0.0) s += b1 * b2 * std::pow(R, 4 - d) / (d - 4);
  return sphere_area(d) * s;
}

}  // namespace

BoundaryValue boundary_rv_element(const LadderState& ladder,
                                  const ProblemContext& ctx, double lambda,
                                  const RadialProfile& f,
                                  const RadialProfile& g, BoundarySide side) {
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    throw validation_error("boundary_rv_element: lambda must be positive");
  if (side == BoundarySide::interior)
    throw validation_error(
        "boundary_rv_element: pick the upper or lower boundary");

  // the kernel layer realizes the lower side by conjugation at the same
  // small angle, so both sides sample arg(mu) = eps. The base angle is
  // small enough that the cubic term the extrapolation cannot remove stays
  // near 1e-9 of the element; larger angles leak a coherent error into
  // quadratures of the density (the leftover scales as the cube of the
  // base angle).
  BoundaryValue out;
  double eps = 5e-4;
  for (int k = 0; k < 3; ++k, eps *= 0.5)
    out.stages[k] = rv_element(
        ladder, ctx, SpectralPoint::on_ray(lambda, eps, side), f, g);

  const cplx d1 = out.stages[1] - out.stages[0];
  const cplx d2 = out.stages[2] - out.stages[1];
  const double scale = std::abs(out.stages[2]) + 1e-300;
  if (std::abs(d1) <= 1e-10 * scale && std::abs(d2) <= 1e-10 * scale) {
    // angle dependence already below noise; nothing to extrapolate
    out.value = out.stages[2];
    out.error_estimate = std::abs(d2);
    return out;
  }
  // linear-plus-quadratic in eps: halving the angle must at least roughly
  // halve the successive difference (ratio -> 1/2 linear, 1/4 quadratic)
  if (std::abs(d2) > 0.6 * std::abs(d1) + 1e-11 * scale)
    throw extrapolation_error(
        "boundary_rv_element: angle extrapolation at lambda = " +
        std::to_string(lambda) + " stalled (successive differences " +
        std::to_string(std::abs(d1)) + ", " + std::to_string(std::abs(d2)) +
        ")");

  const cplx r1a = 2.0 * out.stages[1] - out.stages[0];
  const cplx r1b = 2.0 * out.stages[2] - out.stages[1];
  out.value = (4.0 * r1b - r1a) / 3.0;
  out.error_estimate = std::abs(out.value - r1b);
  return out;
}

double spectral_density(const LadderState& ladder, const ProblemContext& ctx,
                        double lambda, const RadialProfile& f,
                        const RadialProfile& g) {
  return boundary_rv_element(ladder, ctx, lambda, f, g, BoundarySide::upper)
             .value.imag() /
         kPi;
}

std::vector<BoundState> find_bound_states(const ProblemContext& ctx,
                                          double kappa_lo, double kappa_hi,
                                          int scan_points) {
  if (!(kappa_lo > 0.0) || !(kappa_hi > kappa_lo))
    throw validation_error(
        "find_bound_states: need 0 < kappa_lo < kappa_hi");
  if (scan_points < 8)
    throw validation_error("find_bound_states: scan_points must be >= 8");

  // counts are monotone non-decreasing in kappa (eigenvalues of M strictly
  // decrease), so every unit step brackets exactly one crossing
  std::vector<std::pair<double, int>> crossings;  // (kappa, multiplicity)
  const std::function<void(double, double, int, int, int)> locate =
      [&](double lo, double hi, int n_lo, int n_hi, int depth) {
        if (n_hi <= n_lo) return;  // a decrease can only be roundoff flicker
        if (hi - lo <= 1e-12 * hi || depth > 64) {
          crossings.emplace_back(0.5 * (lo + hi), n_hi - n_lo);
          return;
        }
        const double mid = std::sqrt(lo * hi);
        const int n_mid = negative_count(negative_energy_M(ctx, mid));
        locate(lo, mid, n_lo, n_mid, depth + 1);
        locate(mid, hi, n_mid, n_hi, depth + 1);
      };

  std::vector<double> ks(scan_points);
  std::vector<int> counts(scan_points);
  const double ratio = std::pow(kappa_hi / kappa_lo, 1.0 / (scan_points - 1));
  for (int i = 0; i < scan_points; ++i) {
    ks[i] = kappa_lo * std::pow(ratio, i);
    counts[i] = negative_count(negative_energy_M(ctx, ks[i]));
  }
  for (int i = 0; i + 1 < scan_points; ++i)
    locate(ks[i], ks[i + 1], counts[i], counts[i + 1], 0);

  const RVec vw = volume_weights(ctx);
  const int n_grid = static_cast<int>(ctx.grid.r.size());
  const int na = static_cast<int>(ctx.basis.active.size());

  std::vector<BoundState> states;
  for (const auto& [kappa, mult] : crossings) {
    const RMat M = negative_energy_M(ctx, kappa);
    Eigen::SelfAdjointEigenSolver<RMat> es(M);
    // indices of the `mult` eigenvalues closest to zero
    std::vector<int> idx(na);
    for (int i = 0; i < na; ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](int a, int b) {
      return std::abs(es.eigenvalues()[a]) < std::abs(es.eigenvalues()[b]);
    });
    const double mnorm = es.eigenvalues().cwiseAbs().maxCoeff();
    const Mat full =
        ctx.table.fill(SpectralPoint::on_ray(kappa, kPi / 4.0));

    for (int s = 0; s < mult; ++s) {
      BoundState bs;
      bs.kappa = kappa;
      bs.energy = -std::pow(kappa, 4);
      bs.defect = std::abs(es.eigenvalues()[idx[s]]) / mnorm;
      const RVec phi = es.eigenvectors().col(idx[s]);
      bs.psi = RVec::Zero(n_grid);
      for (int j = 0; j < na; ++j) {
        const double y = ctx.basis.v[j] * ctx.basis.sw[j] * phi[j];
        if (y == 0.0) continue;
        for (int i = 0; i < n_grid; ++i)
          bs.psi[i] -= full(i, ctx.basis.active[j]).real() * y;
      }
      const double nrm2 = bs.psi.cwiseAbs2().dot(vw);
      if (!(nrm2 > 0.0))
        throw numerical_error(
            "find_bound_states: eigenfunction vanished on the grid");
      bs.psi /= std::sqrt(nrm2);
      states.push_back(std::move(bs));
    }
  }
  std::sort(states.begin(), states.end(),
            [](const BoundState& a, const BoundState& b) {
              return a.kappa < b.kappa;
            });
  return states;
}

PointSpectrum point_spectrum(const LadderState& ladder,
                             const ProblemContext& ctx, double kappa_lo,
                             double kappa_hi, int scan_points) {
  const int na = static_cast<int>(ctx.basis.active.size());
  if (static_cast<int>(ladder.T0.rows()) != na ||
      ladder.dimension != ctx.problem.dimension)
    throw validation_error(
        "point_spectrum: ladder and context disagree on the problem or grid");

  if (kappa_hi <= 0.0) {
    // H >= -max|V|, so every bound state has kappa^4 <= max|V|
    const double vmax2 = ctx.basis.v.size() > 0
                             ? ctx.basis.v.cwiseAbs2().maxCoeff()
                             : 0.0;
    kappa_hi = 1.1 * std::pow(vmax2, 0.25) + 0.05;
  }

  PointSpectrum ps;
  if (kappa_hi > kappa_lo)
    ps.bound_states = find_bound_states(ctx, kappa_lo, kappa_hi, scan_points);

  if (ladder.classification != ThresholdClass::Eigenvalue) return ps;

  const int d = ctx.problem.dimension;
  const int nsel = d <= 6   ? ladder.rank(3)
                   : d <= 8 ? ladder.rank(2)
                            : ladder.rank(1);
  if (nsel == 0)
    throw invariant_violation(
        "point_spectrum: Eigenvalue classification with an empty deepest "
        "subspace");
  const RMat B = adapted_threshold_basis(ladder);

  std::vector<GridFunction> states;
  for (int k = 0; k < nsel; ++k)
    states.push_back(resonance_function_on_grid(ladder, ctx, B.col(k)));

  // Gram matrix of exact L2 inner products: grid quadrature out to the grid
  // radius plus the closed-form multipole tail beyond it
  const RVec vw = volume_weights(ctx);
  const double R = ctx.grid.radius;
  RMat gram(nsel, nsel);
  for (int i = 0; i < nsel; ++i)
    for (int j = i; j < nsel; ++j) {
      const double gi =
          states[i].values.cwiseProduct(states[j].values).dot(vw) +
          tail_inner(d, R, states[i], states[j]);
      gram(i, j) = gi;
      gram(j, i) = gi;
    }
  Eigen::LLT<RMat> llt(gram);
  if (llt.info() != Eigen::Success)
    throw numerical_error(
        "point_spectrum: threshold states are numerically dependent");
  // new_k = sum_j old_j * (L^{-T})_{jk} has identity Gram
  const RMat C =
      llt.matrixL().transpose().solve(RMat::Identity(nsel, nsel));

  ps.threshold_states.resize(nsel);
  for (int k = 0; k < nsel; ++k) {
    GridFunction gf;
    gf.support_radius = states[0].support_radius;
    gf.values = RVec::Zero(states[0].values.size());
    for (int j = 0; j < nsel; ++j) {
      gf.values += states[j].values * C(j, k);
      gf.tail_lead += states[j].tail_lead * C(j, k);
      gf.tail_next += states[j].tail_next * C(j, k);
    }
    ps.threshold_states[k] = std::move(gf);
  }
  return ps;
}

double pac_overlap(const PointSpectrum& ps, const ProblemContext& ctx,
                   const RadialProfile& f, const RadialProfile& g) {
  const RVec vw = volume_weights(ctx);
  const RVec fv = sample_profile(ctx, f);
  const RVec gv = sample_profile(ctx, g);

  double total = fv.cwiseProduct(gv).dot(vw);
  for (const BoundState& bs : ps.bound_states)
    total -= fv.cwiseProduct(bs.psi).dot(vw) *
             gv.cwiseProduct(bs.psi).dot(vw);
  for (const GridFunction& ts : ps.threshold_states)
    total -= fv.cwiseProduct(ts.values).dot(vw) *
             gv.cwiseProduct(ts.values).dot(vw);
  return total;
}

}  // namespace biharm
