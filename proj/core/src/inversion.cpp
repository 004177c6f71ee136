#include "biharm/inversion.hpp"

#include <cmath>

namespace biharm {

namespace {

Mat to_complex(const RMat& X) { return X.cast<cplx>(); }

void check_patch_basis(const RMat& Q, Eigen::Index rows, const char* who) {
  if (Q.rows() != rows)
    throw validation_error(std::string(who) + ": patch basis row count mismatch");
  if (Q.cols() == 0) return;
  const RMat gram = Q.transpose() * Q;
  const double dev =
      (gram - RMat::Identity(Q.cols(), Q.cols())).cwiseAbs().maxCoeff();
  if (dev > 1e-10)
    throw validation_error(std::string(who) + ": patch basis is not orthonormal");
}

// B = sum_{j>=0} (-1)^j Q^T W [(A+S)^{-1} W]^j Q, the threshold block
// S(T+S)^{-1}-difference rewritten as a series so no large quantities are
// subtracted. lu factors A+S. Throws step_size_error when the series fails
// to settle within the term budget.
Mat threshold_block_series(const Mat& W, const Eigen::PartialPivLU<Mat>& lu,
                           const Mat& Qc) {
  const Eigen::Index r = Qc.cols();
  Mat B = Mat::Zero(r, r);
  Mat R = Qc;
  double baseline = 0.0;
  double sign = 1.0;
  int small_streak = 0;  // a single vanishing term can hide nested structure
  for (int j = 0; j < 200; ++j) {
    const Mat Y = W * R;
    const Mat term = Qc.transpose() * Y;
    B += sign * term;
    const double tn = term.norm();
    if (j <= 5) baseline = std::max(baseline, tn);
    if (tn <= 1e-15 * std::max(B.norm(), 1e-300)) {
      if (++small_streak >= 2) return B;
    } else {
      small_streak = 0;
    }
    if (j > 5 && tn > 1e12 * (baseline + 1e-300))
      throw step_size_error(
          "threshold block series diverges; reduce |mu| for this splitting");
    R = lu.solve(Y);
    sign = -sign;
  }
  throw step_size_error(
      "threshold block series did not converge in 200 terms; reduce |mu|");
}

Mat direct_inverse(const Mat& A, const char* who) {
  Eigen::FullPivLU<Mat> lu(A);
  if (!lu.isInvertible())
    throw singular_operator(std::string(who) + ": matrix is singular");
  return lu.inverse();
}

}  // namespace

Mat feshbach_invert(const Mat& A, const RMat& Q) {
  if (A.rows() != A.cols())
    throw validation_error("feshbach_invert: matrix must be square");
  check_patch_basis(Q, A.rows(), "feshbach_invert");
  if (Q.cols() == 0) return direct_inverse(A, "feshbach_invert");

  const Mat Qc = to_complex(Q);
  const Mat ApS = A + Qc * Qc.transpose();
  Eigen::FullPivLU<Mat> lu(ApS);
  if (!lu.isInvertible())
    throw validation_error("feshbach_invert: A + S is not invertible");
  const Mat ApS_inv = lu.inverse();

  // B restricted to ran S in the Q coordinates: I - Q^T (A+S)^{-1} Q
  const Mat sandwich = Qc.transpose() * ApS_inv * Qc;
  const Mat B_red = Mat::Identity(Q.cols(), Q.cols()) - sandwich;
  // the difference of two O(1) blocks can be pure roundoff; LU pivot ratios
  // cannot see that, so compare against the scale of what was subtracted
  const double b_scale = 1.0 + sandwich.norm();
  Eigen::FullPivLU<Mat> lu_b(B_red);
  if (B_red.norm() <= 1e-12 * b_scale || !lu_b.isInvertible())
    throw singular_operator(
        "feshbach_invert: threshold block B is singular on ran S");

  const Mat G = ApS_inv * Qc;            // (A+S)^{-1} S columns
  const Mat H = Qc.transpose() * ApS_inv;
  return ApS_inv + G * lu_b.inverse() * H;
}

Mat jensen_nenciu_invert(const Mat& T0, const std::function<Mat(cplx)>& T1_of_z,
                         cplx z, const RMat& Q) {
  if (T0.rows() != T0.cols())
    throw validation_error("jensen_nenciu_invert: T0 must be square");
  check_patch_basis(Q, T0.rows(), "jensen_nenciu_invert");
  if (z == cplx(0.0, 0.0))
    throw validation_error("jensen_nenciu_invert: z must be nonzero");

  const Mat T1z = T1_of_z(z);
  if (T1z.rows() != T0.rows() || T1z.cols() != T0.cols())
    throw validation_error("jensen_nenciu_invert: T1(z) shape mismatch");
  const Mat T = T0 + z * T1z;

  if (Q.cols() == 0) return direct_inverse(T, "jensen_nenciu_invert");

  const Mat Qc = to_complex(Q);
  const double t0_scale = std::max(T0.norm(), 1.0);
  if ((T0 * Qc).norm() > 1e-10 * t0_scale ||
      (Qc.transpose() * T0).norm() > 1e-10 * t0_scale)
    throw validation_error(
        "jensen_nenciu_invert: columns of Q do not annihilate T0");

  const Mat S = Qc * Qc.transpose();
  Eigen::PartialPivLU<Mat> lu0(T0 + S);
  // Ttilde = z^{-1} * series(W = z T1), inverted on ran S
  const Mat B_red = threshold_block_series(z * T1z, lu0, Qc);
  Eigen::FullPivLU<Mat> lu_b(B_red);
  if (!lu_b.isInvertible())
    throw singular_operator(
        "jensen_nenciu_invert: Ttilde is singular on ran S; T(z) has no "
        "bounded inverse");

  Eigen::FullPivLU<Mat> lu_t(T + S);
  if (!lu_t.isInvertible())
    throw step_size_error("jensen_nenciu_invert: T(z) + S singular; |z| too large");
  const Mat TpS_inv = lu_t.inverse();
  const Mat G = TpS_inv * Qc;
  const Mat H = Qc.transpose() * TpS_inv;
  // z^{-1} Ttilde^{-1} = (series sum)^{-1}
  return TpS_inv + G * lu_b.inverse() * H;
}

Mat invert_M(const LadderState& ladder, const ProblemContext& ctx,
             const SpectralPoint& p) {
  const Eigen::Index n = static_cast<Eigen::Index>(ctx.basis.active.size());
  if (ladder.T0.rows() != n || ladder.dimension != ctx.problem.dimension)
    throw validation_error(
        "invert_M: ladder and context disagree on the problem or grid");
  if (std::abs(p.mu) == 0.0)
    throw validation_error("invert_M: spectral point must be interior (mu != 0)");

  const Mat M = assemble_M(ctx, p);

  // kernel bases of the successive stage operators, each expressed in the
  // coordinates of the previous level's subspace
  std::vector<RMat> levels;
  if (ladder.rank(1) > 0) {
    levels.push_back(ladder.Q1);
    if (ladder.rank(2) > 0) {
      levels.push_back(ladder.Q1.transpose() * ladder.Q2);
      if (ladder.rank(3) > 0)
        levels.push_back(ladder.Q2.transpose() * ladder.Q3);
    }
  }

  const std::function<Mat(const Mat&, size_t)> invert_level =
      [&](const Mat& F, size_t lev) -> Mat {
    if (lev >= levels.size())
      return direct_inverse(F, "invert_M: terminal block");

    const Mat Nc = to_complex(levels[lev]);
    const Mat S = Nc * Nc.transpose();
    const Eigen::Index m = F.rows();
    // split so the static part annihilates ran S on both sides exactly;
    // everything S touches goes into W and is handled by the series
    const Mat P = Mat::Identity(m, m) - S;
    const Mat A = P * F * P;
    const Mat W = F - A;

    Eigen::PartialPivLU<Mat> lu_a(A + S);
    const Mat B_red = threshold_block_series(W, lu_a, Nc);
    const Mat B_inv = invert_level(B_red, lev + 1);

    Eigen::FullPivLU<Mat> lu_f(F + S);
    if (!lu_f.isInvertible())
      throw step_size_error(
          "invert_M: level matrix plus patch is singular; |mu| too large");
    const Mat FpS_inv = lu_f.inverse();
    const Mat G = FpS_inv * Nc;
    const Mat H = Nc.transpose() * FpS_inv;
    return FpS_inv + G * B_inv * H;
  };

  // The series recursion is the only accurate route near the threshold but
  // need not contract far from it. Where it gives up, M carries no small
  // singular values anymore and a direct factorization is accurate.
  try {
    return invert_level(M, 0);
  } catch (const step_size_error&) {
    return direct_inverse(M, "invert_M: far-from-threshold block");
  }
}

Mat rv_weighted(const LadderState& ladder, const ProblemContext& ctx,
                const SpectralPoint& p) {
  const Mat Minv = invert_M(ladder, ctx, p);
  Mat out = -Minv;
  for (Eigen::Index i = 0; i < out.rows(); ++i)
    out(i, i) += ctx.basis.sign[i];
  return out;
}

cplx rv_element(const LadderState& ladder, const ProblemContext& ctx,
                const SpectralPoint& p, const std::function<double(double)>& f,
                const std::function<double(double)>& g) {
  const Mat full = ctx.table.fill(p);  // averaged free kernel, full grid
  const int n_grid = static_cast<int>(ctx.grid.r.size());
  const double sigma = sphere_area(ctx.problem.dimension);

  RVec fv(n_grid), gv(n_grid), vw(n_grid);
  for (int i = 0; i < n_grid; ++i) {
    const double r = ctx.grid.r[i];
    vw[i] = sigma * ctx.grid.w[i] * std::pow(r, ctx.problem.dimension - 1);
    fv[i] = f(r);
    gv[i] = g(r);
  }

  const Vec r0g = full * (gv.cwiseProduct(vw)).cast<cplx>();
  const Vec r0f = full * (fv.cwiseProduct(vw)).cast<cplx>();
  // plain bilinear form (no conjugation): the resolvent is complex-symmetric
  const cplx free_term =
      ((fv.cwiseProduct(vw)).cast<cplx>().transpose() * r0g).value();

  // weighted coordinates: u_i = sw_i v_i (R_0 g)(r_i) on the active set
  const auto& b = ctx.basis;
  const Eigen::Index n = static_cast<Eigen::Index>(b.active.size());
  Vec uf(n), ug(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const int a = b.active[static_cast<size_t>(k)];
    uf[k] = b.sw[k] * b.v[k] * r0f[a];
    ug[k] = b.sw[k] * b.v[k] * r0g[a];
  }

  const Mat Minv = invert_M(ladder, ctx, p);
  return free_term - (uf.transpose() * Minv * ug).value();
}

}  // namespace biharm
