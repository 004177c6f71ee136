// Spectral measure of H = (-Delta)^2 + V in the radial sector: boundary
// values of the resolvent on the continuous spectrum, the point spectrum
// (negative bound states and the zero-energy eigenspace), and overlaps with
// the absolutely continuous projection.
#pragma once

#include <array>
#include <functional>
#include <vector>

#include "biharm/assembly.hpp"
#include "biharm/ladder.hpp"
#include "biharm/types.hpp"

namespace biharm {

using RadialProfile = std::function<double(double)>;

// <f, R_V(lambda^4 + i0) g> obtained from interior samples at ray angles
// eps in {5e-4, 2.5e-4, 1.25e-4} and one step of order-2 Richardson
// extrapolation in eps (the resolvent is analytic up to the boundary, so
// the angle dependence starts linearly). Throws extrapolation_error when
// the successive differences do not shrink the way a linear-plus-quadratic
// model demands.
struct BoundaryValue {
  cplx value;                  // extrapolated boundary value
  double error_estimate = 0.0; // magnitude of the last extrapolation step
  std::array<cplx, 3> stages;  // raw samples, largest angle first
};

BoundaryValue boundary_rv_element(const LadderState& ladder,
                                  const ProblemContext& ctx, double lambda,
                                  const RadialProfile& f,
                                  const RadialProfile& g,
                                  BoundarySide side = BoundarySide::upper);

// d/dz <f, E_z g> at z = lambda^4, i.e. pi^{-1} Im <f, R_V(lambda^4+i0) g>.
// Integrating this against 4 lambda^3 d(lambda) recovers spectral totals.
double spectral_density(const LadderState& ladder, const ProblemContext& ctx,
                        double lambda, const RadialProfile& f,
                        const RadialProfile& g);

// A negative eigenvalue -kappa^4 of H with its radial eigenfunction sampled
// on the grid. psi is L2-normalized by grid quadrature; for very shallow
// states (kappa * grid.radius small) the tail beyond the grid is not
// negligible and the reported defect will show it.
struct BoundState {
  double kappa = 0.0;
  double energy = 0.0;  // -kappa^4
  RVec psi;             // pointwise values at grid.r
  double defect = 0.0;  // |smallest eigenvalue of M| / ||M|| at kappa
};

// All negative eigenvalues with kappa in [kappa_lo, kappa_hi], located by
// counting negative eigenvalues of the real-symmetric Birman-Schwinger
// operator M(kappa e^{i pi/4}) (z = -kappa^4) on a geometric scan grid and
// bisecting every count change. Eigenvalues of M are strictly decreasing in
// kappa, so the count is monotone and each unit step is one bound state.
std::vector<BoundState> find_bound_states(const ProblemContext& ctx,
                                          double kappa_lo, double kappa_hi,
                                          int scan_points = 80);

// The point spectrum: bound states plus an L2-orthonormal basis of the
// zero-energy eigenspace (the deepest ladder subspace; empty unless the
// classification is Eigenvalue). Threshold eigenfunctions are normalized
// with the exact two-term multipole tail integral beyond the grid radius.
struct PointSpectrum {
  std::vector<BoundState> bound_states;
  std::vector<GridFunction> threshold_states;
};

// kappa_hi <= 0 selects the a-priori bound (1.1 * max|V|^{1/4} + 0.05); the
// context's average table must cover the resulting kappa range.
PointSpectrum point_spectrum(const LadderState& ladder,
                             const ProblemContext& ctx, double kappa_lo = 1e-3,
                             double kappa_hi = 0.0, int scan_points = 80);

// <f, P_ac g> = <f, g> - sum over point-spectrum states of <f,psi><psi,g>.
// Profiles are integrated by grid quadrature, so they must be negligible
// beyond the grid radius; the threshold states' own tails are handled in
// their normalization.
double pac_overlap(const PointSpectrum& ps, const ProblemContext& ctx,
                   const RadialProfile& f, const RadialProfile& g);

}  // namespace biharm
