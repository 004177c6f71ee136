// Inversion of M(mu) = U + v R_0(mu^4) v near the threshold. A direct LU
// factorization degrades as mu -> 0 when M(0) is singular; the routines here
// peel off the singular subspaces identified by the ladder and treat each
// threshold block with a cancellation-free series, so the computed inverse
// stays accurate down to |mu| values where cond(M) overflows double range.
#pragma once

#include <functional>

#include "biharm/assembly.hpp"
#include "biharm/ladder.hpp"
#include "biharm/types.hpp"

namespace biharm {

// A^{-1} via the two-space formula. Q holds orthonormal columns spanning the
// patch subspace S = Q Q^T (possibly zero columns):
//   B = S - S (A+S)^{-1} S   on ran S,
//   A^{-1} = (A+S)^{-1} + (A+S)^{-1} S B^{-1} S (A+S)^{-1}.
// Requires A + S invertible; throws singular_operator when B (or A itself,
// in the Q-empty case) is not invertible.
Mat feshbach_invert(const Mat& A, const RMat& Q);

// Inverse of T(z) = T0 + z T1(z) for a family with an isolated kernel of T0
// spanned by the orthonormal columns of Q (so T0 Q = 0 and Q^T T0 = 0):
//   Ttilde(z) = sum_{j>=0} (-1)^j z^j S [T1(z) (T0+S)^{-1}]^{j+1} S,
//   T(z)^{-1} = (T(z)+S)^{-1} + z^{-1} (T(z)+S)^{-1} S Ttilde^{-1} S (T(z)+S)^{-1}.
// The series form avoids the catastrophic cancellation of the equivalent
// difference z^{-1}(S - S(T+S)^{-1}S) at small |z|. Throws step_size_error
// when the series fails to contract (|z| too large) and singular_operator
// when Ttilde is singular on ran S (T(z) is then not invertible).
Mat jensen_nenciu_invert(const Mat& T0, const std::function<Mat(cplx)>& T1_of_z,
                         cplx z, const RMat& Q);

// M(mu)^{-1} by recursing the two formulas above through the projection
// chain of the ladder: each level splits off the next kernel subspace and
// computes its threshold block by the cancellation-free series, until the
// chain ends and the final block inverts directly. Agrees with dense
// inversion wherever the latter is well conditioned, and remains accurate
// where it is not. Far from the threshold, where the series stops
// contracting but M is well conditioned, it falls back to a direct
// factorization, so the routine covers the whole first quadrant.
Mat invert_M(const LadderState& ladder, const ProblemContext& ctx,
             const SpectralPoint& p);

// w R_V(mu^4) w = U - M(mu)^{-1} on the active set (w = U v).
Mat rv_weighted(const LadderState& ladder, const ProblemContext& ctx,
                const SpectralPoint& p);

// Matrix element <f, R_V(mu^4) g> for radial test functions via the
// symmetric resolvent identity R_V = R_0 - R_0 v M^{-1} v R_0.
// f and g are sampled at the grid nodes.
cplx rv_element(const LadderState& ladder, const ProblemContext& ctx,
                const SpectralPoint& p, const std::function<double(double)>& f,
                const std::function<double(double)>& g);

}  // namespace biharm
