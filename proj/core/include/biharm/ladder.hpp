// Threshold classification at mu = 0 via the nested projection chain
// T0 = U + v G0 v, then T1, T2, T3, where S_{j+1} projects onto the numerical
// kernel of T_j and each T_{j+1} is the next-order kernel of the free
// expansion restricted to ran S_{j+1}. The stage at which invertibility first
// holds fixes the threshold class.
//
// Radial sector: vector (first-order) moments vanish identically, so the
// second stage for d = 5, 6 tests the scalar second moment <r^2 v, phi>
// through a normalized rank-one Gram operator instead of the full-space
// kernel, whose radial average factorizes and vanishes on ran S2.
#pragma once

#include <string>
#include <vector>

#include "biharm/assembly.hpp"

namespace biharm {

struct NullspaceResult {
  RMat basis;  // orthonormal columns spanning the numerical kernel
  int rank = 0;
  double sigma_min = 0.0;
  double sigma_max = 0.0;
  double threshold = 0.0;  // absolute cut tau * scale
  bool gap_ambiguous = false;
  std::vector<double> smallest;  // up to five smallest |eigenvalues|, ascending

  RMat projection() const { return basis * basis.transpose(); }
};

// Orthogonal projection onto the span of eigenvectors of a symmetric T whose
// |eigenvalue| falls below tau * scale (scale <= 0 uses the largest
// |eigenvalue| of T itself). Any spectral value within a factor 10 of the cut
// flags the result as gap-ambiguous: the caller gets a warning, not a guess.
NullspaceResult nullspace_projection(const RMat& T, double tau,
                                     double scale = 0.0);

struct StageReport {
  std::string name;       // "T0".."T3"
  int subspace_dim = 0;   // dimension of the subspace the stage acts on
  int kernel_rank = 0;    // numerical kernel found at this stage
  double sigma_min = 0.0;
  double sigma_max = 0.0;
  double scale = 0.0;     // reference scale the cut is relative to
  double threshold = 0.0; // tau * scale
  bool invertible = false;
  bool gap_ambiguous = false;
  std::vector<double> smallest;
};

struct LadderState {
  int dimension = 0;
  double tau = 0.0;
  ThresholdClass classification = ThresholdClass::Regular;
  std::vector<StageReport> stages;  // one per stage visited, T0 first
  std::vector<std::string> warnings;

  WeightedBasis basis;  // the active-set basis all matrices refer to

  RMat T0;              // full operator on the active set
  RMat Q1, Q2, Q3;      // orthonormal bases of ran S1, S2, S3 (may be empty)
  RMat T1, T2, T3;      // stage operators restricted to the Q bases
  // D_j = (T_j + S_{j+1})^{-1} on ran S_j, lifted back to the active set
  // (zero on the orthogonal complement); D0 acts on the full active set.
  RMat D0, D1, D2, D3;

  // <v, phi_k> and <r^2 v, phi_k> for the columns of Q1
  std::vector<double> moment_v;
  std::vector<double> moment_r2v;

  int rank(int j) const;        // dim ran S_j, j in {1,2,3}
  RMat projection(int j) const; // S_j as a matrix on the active set
};

LadderState build_ladder(const ProblemContext& ctx, double tau = 1e-8);
LadderState build_ladder(const RadialProblem& problem, const Grid& grid,
                         double tau = 1e-8);

// Per basis vector of ran S1 (basis adapted to the chain: columns spanning
// ran S3 first, then ran S2, then the rest of ran S1).
struct ResonanceFunctionEntry {
  bool in_S2 = false;
  bool in_S3 = false;
  double moment_v = 0.0;    // <v, phi>
  double moment_r2v = 0.0;  // <r^2 v, phi>
  double residual = 0.0;    // ||psi + G0 V psi|| / ||psi|| on the grid
  // psi outside the support is exactly a two-term multipole; these are its
  // coefficients: psi(r) = tail_lead * r^{4-d} + tail_next * r^{2-d}
  double tail_lead = 0.0;
  double tail_next = 0.0;
  double tail_exponent = 0.0;  // log-log fit over the tail window (NaN if compact)
  bool compact_tail = false;   // |psi| below noise outside the support
};

struct ResonanceVerification {
  ThresholdClass classification = ThresholdClass::Regular;
  std::vector<ResonanceFunctionEntry> entries;
  // moment signature of every entry agrees with its subspace membership
  bool moments_consistent = false;
};

ResonanceVerification verify_resonance_function(const LadderState& ladder,
                                                const ProblemContext& ctx);
ResonanceVerification verify_resonance_function(const LadderState& ladder,
                                                const RadialProblem& problem,
                                                const Grid& grid);

// Orthonormal basis of ran S1 rotated so that the columns spanning ran S3
// come first, then the rest of ran S2, then the rest of ran S1.
RMat adapted_threshold_basis(const LadderState& ladder);

// A radial function sampled at the grid nodes, with its exact closed-form
// continuation outside the potential support (the s-wave average of the
// Riesz kernel has exactly two multipole terms, so the continuation is not
// a truncation):
//   f(r) = tail_lead * r^{4-d} + tail_next * r^{2-d}  for r > support_radius.
struct GridFunction {
  RVec values;  // pointwise values at grid.r
  double tail_lead = 0.0;
  double tail_next = 0.0;
  double support_radius = 0.0;
};

// psi = -G_0 v phi on the full grid for an active-set vector phi (a column
// of the adapted threshold basis). Moments below 1e-6 * ||p|| are snapped
// to zero so the tail coefficients vanish identically when the subspace
// membership says they must.
GridFunction resonance_function_on_grid(const LadderState& ladder,
                                        const ProblemContext& ctx,
                                        const RVec& phi);

}  // namespace biharm
