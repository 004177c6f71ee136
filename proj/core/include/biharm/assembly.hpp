// Discretization of the Birman-Schwinger family M(mu) = U + v G(mu) v in the
// weighted radial basis. Quadrature weights carry the volume factor
// sigma_{d-1} r^{d-1}; nodes where the potential vanishes are excluded, so
// all operators below act on the active set only.
#pragma once

#include <functional>

#include "biharm/grid.hpp"
#include "biharm/potential.hpp"
#include "biharm/radial_average.hpp"
#include "biharm/types.hpp"

namespace biharm {

struct WeightedBasis {
  std::vector<int> active;  // indices into the grid
  RVec r;                   // active radii
  RVec sw;                  // sqrt(w_i sigma_{d-1} r_i^{d-1})
  RVec v;                   // |V(r_i)|^{1/2}
  RVec sign;                // sign V(r_i), +-1
};

WeightedBasis weighted_basis(const RadialProblem& problem, const Grid& grid);

// An AverageTable over the FULL grid, shared by every assembly on that grid.
AverageTable make_average_table(const RadialProblem& problem, const Grid& grid,
                                double kappa_max);

// diag(sign V) on the active set
RMat assemble_U(const RadialProblem& problem, const Grid& grid);

// rank-one projection onto the weighted potential vector: P = p p^T / ||p||^2,
// p_i = v_i sw_i
RMat assemble_P(const RadialProblem& problem, const Grid& grid);

// (v G v)_{ij} = v_i sw_i avgK(r_i, r_j) sw_j v_j at a spectral point, or for
// an explicit radial kernel (ladder stages)
Mat assemble_vGv(const RadialProblem& problem, const Grid& grid,
                 const AverageTable& table, const SpectralPoint& p);
Mat assemble_vGv(const RadialProblem& problem, const Grid& grid,
                 const AverageTable& table,
                 const std::function<cplx(double)>& kernel);

Mat assemble_M(const RadialProblem& problem, const Grid& grid,
               const AverageTable& table, const SpectralPoint& p);

// Everything needed to assemble operators for one problem on one grid; the
// pair-quadrature table dominates the construction cost and is reused by all
// downstream assemblies.
struct ProblemContext {
  RadialProblem problem;
  Grid grid;
  WeightedBasis basis;
  AverageTable table;
};

ProblemContext make_context(const RadialProblem& problem, const Grid& grid,
                            double kappa_max);

inline Mat assemble_vGv(const ProblemContext& c, const SpectralPoint& p) {
  return assemble_vGv(c.problem, c.grid, c.table, p);
}
inline Mat assemble_vGv(const ProblemContext& c,
                        const std::function<cplx(double)>& kernel) {
  return assemble_vGv(c.problem, c.grid, c.table, kernel);
}
inline Mat assemble_M(const ProblemContext& c, const SpectralPoint& p) {
  return assemble_M(c.problem, c.grid, c.table, p);
}

}  // namespace biharm
