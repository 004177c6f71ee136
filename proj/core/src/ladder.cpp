#include "biharm/ladder.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "biharm/expansion_tables.hpp"
#include "biharm/kernels.hpp"

namespace biharm {

namespace {

// realness guard for operators that are real-symmetric at mu = 0
RMat to_real(const Mat& m, const char* what) {
  const double scale = m.norm();
  double imag = 0.0;
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) imag = std::max(imag, std::abs(m(i, j).imag()));
  if (imag > 1e-13 * std::max(scale, 1.0))
    throw numerical_error(std::string(what) +
                          ": operator expected real has imaginary part " +
                          std::to_string(imag));
  return m.real();
}

double real_coeff(cplx c, const char* what) {
  if (std::abs(c.imag()) > 1e-13 * std::abs(c))
    throw numerical_error(std::string(what) + ": coefficient expected real");
  return c.real();
}

// The mu^4-order kernel of the free expansion, which is the first term whose
// radial average does not factorize through the low moments. The pieces
// proportional to 1 and to r^2 + s^2 (including the ln(mu) companion of the
// log terms) act through <v, phi> and <r^2 v, phi> and vanish identically on
// the subspaces these stages are restricted to, so only the parts kept here
// survive.
std::function<cplx(double)> mu4_stage_kernel(int d) {
  const ExpansionTerm* t = expansion_coefficients(d).term_with_mu_pow(4);
  if (t == nullptr)
    throw numerical_error("ladder: expansion table lacks the mu^4 term");
  const int p = t->r_pow;
  if (d == 6 || d == 8) {
    const double c = real_coeff(t->log_coeff, "ladder mu^4 log coefficient");
    return [c, p](double rho) {
      return cplx(c * std::pow(rho, p) * std::log(rho), 0.0);
    };
  }
  const double c = real_coeff(t->coeff, "ladder mu^4 coefficient");
  return [c, p](double rho) { return cplx(c * std::pow(rho, p), 0.0); };
}

struct StageOutcome {
  StageReport report;
  NullspaceResult ns;
};

StageOutcome run_stage(const char* name, const RMat& T, double tau, double scale) {
  StageOutcome out;
  out.ns = nullspace_projection(T, tau, scale);
  out.report.name = name;
  out.report.subspace_dim = static_cast<int>(T.rows());
  out.report.kernel_rank = out.ns.rank;
  out.report.sigma_min = out.ns.sigma_min;
  out.report.sigma_max = out.ns.sigma_max;
  out.report.scale = scale > 0.0 ? scale : out.ns.sigma_max;
  out.report.threshold = out.ns.threshold;
  out.report.invertible = (out.ns.rank == 0);
  out.report.gap_ambiguous = out.ns.gap_ambiguous;
  out.report.smallest = out.ns.smallest;
  return out;
}

RMat inverse_on(const RMat& A) { return A.partialPivLu().inverse(); }

}  // namespace

NullspaceResult nullspace_projection(const RMat& T, double tau, double scale) {
  if (T.rows() != T.cols())
    throw validation_error("nullspace_projection: matrix must be square");
  if (!(tau > 0.0) || tau >= 1.0)
    throw validation_error("nullspace_projection: tau must lie in (0, 1)");
  const int n = static_cast<int>(T.rows());
  NullspaceResult res;
  if (n == 0) {
    res.basis = RMat(0, 0);
    return res;
  }
  if ((T - T.transpose()).norm() > 1e-12 * std::max(T.norm(), 1.0))
    throw validation_error("nullspace_projection: matrix must be symmetric");

  Eigen::SelfAdjointEigenSolver<RMat> es(0.5 * (T + T.transpose()));
  const RVec lam = es.eigenvalues();
  RVec mags = lam.cwiseAbs();

  res.sigma_max = mags.maxCoeff();
  res.sigma_min = mags.minCoeff();
  const double ref = scale > 0.0 ? scale : res.sigma_max;
  res.threshold = tau * ref;

  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return mags[a] < mags[b]; });
  for (int k = 0; k < std::min(n, 5); ++k) res.smallest.push_back(mags[order[k]]);

  std::vector<int> null_idx;
  for (int i = 0; i < n; ++i) {
    if (mags[i] <= res.threshold) null_idx.push_back(i);
    if (res.threshold > 0.0 && mags[i] > res.threshold / 10.0 &&
        mags[i] < res.threshold * 10.0)
      res.gap_ambiguous = true;
  }
  res.rank = static_cast<int>(null_idx.size());
  res.basis = RMat(n, res.rank);
  for (int k = 0; k < res.rank; ++k) res.basis.col(k) = es.eigenvectors().col(null_idx[k]);
  return res;
}

int LadderState::rank(int j) const {
  switch (j) {
    case 1: return static_cast<int>(Q1.cols());
    case 2: return static_cast<int>(Q2.cols());
    case 3: return static_cast<int>(Q3.cols());
    default: throw validation_error("LadderState::rank: j must be 1, 2 or 3");
  }
}

RMat LadderState::projection(int j) const {
  const int n = static_cast<int>(T0.rows());
  if (j == 0) return RMat::Identity(n, n);
  switch (j) {
    case 1: return Q1 * Q1.transpose();
    case 2: return Q2 * Q2.transpose();
    case 3: return Q3 * Q3.transpose();
    default: throw validation_error("LadderState::projection: j must be 0..3");
  }
}

LadderState build_ladder(const ProblemContext& ctx, double tau) {
  const int d = ctx.problem.dimension;
  LadderState L;
  L.dimension = d;
  L.tau = tau;
  L.basis = ctx.basis;
  const int n = static_cast<int>(ctx.basis.active.size());

  // stage 0: T0 = U + v G0 v
  {
    RMat vg0 = to_real(assemble_vGv(ctx, SpectralPoint()), "T0");
    for (int i = 0; i < n; ++i) vg0(i, i) += ctx.basis.sign[i];
    L.T0 = std::move(vg0);
  }
  StageOutcome s0 = run_stage("T0", L.T0, tau, 0.0);
  if (s0.report.gap_ambiguous)
    L.warnings.push_back("T0 spectrum straddles the nullspace cut");
  L.stages.push_back(s0.report);
  if (s0.ns.rank == 0) {
    L.classification = ThresholdClass::Regular;
    L.D0 = inverse_on(L.T0);
    return L;
  }
  L.Q1 = s0.ns.basis;
  L.D0 = inverse_on(L.T0 + L.Q1 * L.Q1.transpose());

  // moments of the threshold basis
  const RVec p = ctx.basis.v.cwiseProduct(ctx.basis.sw);
  const RVec m = ctx.basis.r.cwiseAbs2().cwiseProduct(p);
  for (int k = 0; k < L.Q1.cols(); ++k) {
    L.moment_v.push_back(p.dot(L.Q1.col(k)));
    L.moment_r2v.push_back(m.dot(L.Q1.col(k)));
  }

  // stage 1: S1 P S1 for d <= 8; for d >= 9 the mu^4 kernel enters directly
  RMat op1;
  double scale1 = 1.0;
  if (d <= 8) {
    op1 = assemble_P(ctx.problem, ctx.grid);
  } else {
    op1 = to_real(assemble_vGv(ctx, mu4_stage_kernel(d)), "T1");
    scale1 = op1.operatorNorm();
  }
  L.T1 = L.Q1.transpose() * op1 * L.Q1;
  StageOutcome s1 = run_stage("T1", L.T1, tau, scale1);
  if (s1.report.gap_ambiguous)
    L.warnings.push_back("T1 spectrum straddles the nullspace cut");
  L.stages.push_back(s1.report);
  if (s1.ns.rank == 0) {
    L.classification =
        d <= 8 ? ThresholdClass::FirstKind : ThresholdClass::Eigenvalue;
    L.D1 = L.Q1 * inverse_on(L.T1) * L.Q1.transpose();
    return L;
  }
  if (d >= 9)
    throw invariant_violation(
        "ladder: the stage-1 operator for d >= 9 is positive definite on its "
        "subspace and cannot be singular; refine the discretization");
  {
    const RMat N2 = s1.ns.basis;
    L.Q2 = L.Q1 * N2;
    L.D1 = L.Q1 * inverse_on(L.T1 + N2 * N2.transpose()) * L.Q1.transpose();
  }

  // stage 2: second-moment Gram for d = 5, 6; mu^4 kernel for d = 7, 8
  RMat op2;
  double scale2 = 1.0;
  if (d <= 6) {
    const RVec mh = m / m.norm();
    op2 = mh * mh.transpose();
  } else {
    op2 = to_real(assemble_vGv(ctx, mu4_stage_kernel(d)), "T2");
    scale2 = op2.operatorNorm();
  }
  L.T2 = L.Q2.transpose() * op2 * L.Q2;
  StageOutcome s2 = run_stage("T2", L.T2, tau, scale2);
  if (s2.report.gap_ambiguous)
    L.warnings.push_back("T2 spectrum straddles the nullspace cut");
  L.stages.push_back(s2.report);
  if (s2.ns.rank == 0) {
    L.classification =
        d <= 6 ? ThresholdClass::SecondKind : ThresholdClass::Eigenvalue;
    L.D2 = L.Q2 * inverse_on(L.T2) * L.Q2.transpose();
    return L;
  }
  if (d >= 7)
    throw invariant_violation(
        "ladder: the stage-2 operator for d = 7, 8 has trivial kernel on its "
        "subspace and cannot be singular; refine the discretization");
  {
    const RMat N3 = s2.ns.basis;
    L.Q3 = L.Q2 * N3;
    L.D2 = L.Q2 * inverse_on(L.T2 + N3 * N3.transpose()) * L.Q2.transpose();
  }

  // stage 3 (d = 5, 6 only): the mu^4 kernel restricted to ran S3
  RMat op3 = to_real(assemble_vGv(ctx, mu4_stage_kernel(d)), "T3");
  const double scale3 = op3.operatorNorm();
  L.T3 = L.Q3.transpose() * op3 * L.Q3;
  StageOutcome s3 = run_stage("T3", L.T3, tau, scale3);
  if (s3.report.gap_ambiguous)
    L.warnings.push_back("T3 spectrum straddles the nullspace cut");
  L.stages.push_back(s3.report);
  if (s3.ns.rank != 0)
    throw invariant_violation(
        "ladder: the stage-3 operator has trivial kernel on its subspace and "
        "cannot be singular; refine the discretization");
  L.classification = ThresholdClass::Eigenvalue;
  L.D3 = L.Q3 * inverse_on(L.T3) * L.Q3.transpose();
  return L;
}

LadderState build_ladder(const RadialProblem& problem, const Grid& grid,
                         double tau) {
  return build_ladder(make_context(problem, grid, 1.0), tau);
}

// columns of Q1 rotated so that ran S3 comes first, then the rest of ran S2,
// then the rest of ran S1; membership flags stay aligned with the columns
RMat adapted_threshold_basis(const LadderState& L) {
  const int n = static_cast<int>(L.T0.rows());
  const int r1 = static_cast<int>(L.Q1.cols());
  RMat B(n, r1);
  int filled = 0;
  auto append_complement = [&](const RMat& cols) {
    // orthogonalize against what is already in B
    for (int k = 0; k < cols.cols(); ++k) {
      RVec w = cols.col(k);
      for (int j = 0; j < filled; ++j) w -= B.col(j) * B.col(j).dot(w);
      const double nw = w.norm();
      if (nw > 1e-8) B.col(filled++) = w / nw;
    }
  };
  if (L.Q3.cols() > 0) append_complement(L.Q3);
  if (L.Q2.cols() > 0) append_complement(L.Q2);
  append_complement(L.Q1);
  if (filled != r1)
    throw numerical_error("adapted_threshold_basis: basis lost rank");
  return B;
}

GridFunction resonance_function_on_grid(const LadderState& L,
                                        const ProblemContext& ctx,
                                        const RVec& phi) {
  const int d = ctx.problem.dimension;
  const int na = static_cast<int>(ctx.basis.active.size());
  if (static_cast<int>(phi.size()) != na)
    throw validation_error(
        "resonance_function_on_grid: phi must live on the active set");
  const int n_grid = static_cast<int>(ctx.grid.r.size());
  const double cd = riesz_constant(d);

  const Mat full = ctx.table.fill(SpectralPoint());
  GridFunction out;
  out.support_radius = ctx.problem.potential.support_radius();
  out.values = RVec::Zero(n_grid);
  for (int j = 0; j < na; ++j) {
    const double y = ctx.basis.v[j] * ctx.basis.sw[j] * phi[j];
    if (y == 0.0) continue;
    for (int i = 0; i < n_grid; ++i)
      out.values[i] -= full(i, ctx.basis.active[j]).real() * y;
  }

  const RVec p = ctx.basis.v.cwiseProduct(ctx.basis.sw);
  const RVec m = ctx.basis.r.cwiseAbs2().cwiseProduct(p);
  const double moment_tol = 1e-6 * p.norm();
  const double mv = p.dot(phi);
  const double mr = m.dot(phi);
  out.tail_lead = std::abs(mv) < moment_tol ? 0.0 : -cd * mv;
  out.tail_next =
      std::abs(mr) < moment_tol ? 0.0 : cd * (double(d - 4) / double(d)) * mr;
  return out;
}

ResonanceVerification verify_resonance_function(const LadderState& L,
                                                const ProblemContext& ctx) {
  if (L.classification == ThresholdClass::Regular)
    throw validation_error(
        "verify_resonance_function: a regular fixture has no threshold "
        "subspace to verify");
  const int d = ctx.problem.dimension;
  const int n = static_cast<int>(ctx.basis.active.size());
  if (static_cast<int>(L.T0.rows()) != n || L.dimension != d)
    throw validation_error(
        "verify_resonance_function: ladder and context disagree on the "
        "problem or grid");
  const double cd = riesz_constant(d);
  const double suppR = ctx.problem.potential.support_radius();

  // weighted G0 on the active set (volume factors only, no v)
  const Mat full = ctx.table.fill(SpectralPoint());
  RMat g0w(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      g0w(i, j) = ctx.basis.sw[i] *
                  full(ctx.basis.active[i], ctx.basis.active[j]).real() *
                  ctx.basis.sw[j];

  const RVec p = ctx.basis.v.cwiseProduct(ctx.basis.sw);
  const RVec m = ctx.basis.r.cwiseAbs2().cwiseProduct(p);
  const RMat B = adapted_threshold_basis(L);
  const int r2 = static_cast<int>(L.Q2.cols());
  const int r3 = static_cast<int>(L.Q3.cols());

  ResonanceVerification out;
  out.classification = L.classification;
  out.moments_consistent = true;
  const double moment_tol = 1e-6 * p.norm();

  for (int k = 0; k < B.cols(); ++k) {
    const RVec phi = B.col(k);
    ResonanceFunctionEntry e;
    e.in_S3 = k < r3;
    e.in_S2 = k < r2;
    e.moment_v = p.dot(phi);
    e.moment_r2v = m.dot(phi);

    // psi in weighted coordinates and the eigenfunction residual
    const RVec vphi = ctx.basis.v.cwiseProduct(phi);
    const RVec psi_w = -(g0w * vphi);
    RVec Vpsi(n);
    for (int i = 0; i < n; ++i)
      Vpsi[i] = ctx.basis.sign[i] * ctx.basis.v[i] * ctx.basis.v[i] * psi_w[i];
    e.residual = (psi_w + g0w * Vpsi).norm() / psi_w.norm();

    // outside the support the average is an exact two-term multipole
    e.tail_lead = -cd * e.moment_v;
    e.tail_next = cd * (double(d - 4) / double(d)) * e.moment_r2v;
    const double psi_scale = psi_w.cwiseAbs().maxCoeff();
    const int npts = 16;
    std::vector<double> lr(npts), lpsi(npts);
    double tail_max = 0.0;
    for (int q = 0; q < npts; ++q) {
      const double r = 1.25 * suppR * std::pow(20.0, double(q) / (npts - 1));
      const double val = e.tail_lead * std::pow(r, 4 - d) +
                         e.tail_next * std::pow(r, 2 - d);
      lr[q] = std::log(r);
      lpsi[q] = std::log(std::max(std::abs(val), 1e-300));
      tail_max = std::max(tail_max, std::abs(val));
    }
    e.compact_tail = tail_max < 1e-6 * psi_scale;
    if (e.compact_tail) {
      e.tail_exponent = std::numeric_limits<double>::quiet_NaN();
    } else {
      double sx = 0, sy = 0, sxx = 0, sxy = 0;
      for (int q = 0; q < npts; ++q) {
        sx += lr[q];
        sy += lpsi[q];
        sxx += lr[q] * lr[q];
        sxy += lr[q] * lpsi[q];
      }
      e.tail_exponent =
          (npts * sxy - sx * sy) / (npts * sxx - sx * sx);
    }

    // moment signature must match subspace membership
    const bool v_zero = std::abs(e.moment_v) < moment_tol;
    const bool m_zero = std::abs(e.moment_r2v) < moment_tol;
    if (v_zero != e.in_S2) out.moments_consistent = false;
    if (d <= 6 && e.in_S2 && (m_zero != e.in_S3)) out.moments_consistent = false;

    out.entries.push_back(std::move(e));
  }
  return out;
}

ResonanceVerification verify_resonance_function(const LadderState& L,
                                                const RadialProblem& problem,
                                                const Grid& grid) {
  return verify_resonance_function(L, make_context(problem, grid, 1.0));
}

}  // namespace biharm
