// Small-mu expansion models for the weighted resolvent w R_V(mu^4) w and the
// least-squares machinery that fits sampled operator data to them. The term
// list of each model is fixed by the dimension and threshold class; in even
// dimensions the log families enter through the affine combination
// c(mu) = ln(mu) + s_d whose shift s_d comes from the kernel table, so the
// fitted matrices and the table stay consistent by construction.
#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "biharm/ladder.hpp"
#include "biharm/types.hpp"

namespace biharm {

struct BasisTerm {
  std::string name;                 // e.g. "mu^-4 c^-1"
  double mu_order = 0.0;            // power of |mu|, log factors excluded
  std::function<cplx(cplx)> eval;   // value at mu
};

struct ExpansionModel {
  int dimension = 0;
  ThresholdClass classification = ThresholdClass::Regular;
  std::vector<BasisTerm> terms;
  // mu-power of the first term the model omits; the fitted residual should
  // decay at least this fast (log factors shift the measured slope slightly)
  double residual_order = 0.0;
};

// The term list for one dimension/class cell. Duplicate powers that collide
// in low dimensions are merged into a single basis term.
ExpansionModel expansion_model(int d, ThresholdClass cls);

struct TermFit {
  std::string name;
  Mat fitted;
  double fnorm = 0.0;
  bool has_prediction = false;
  Mat predicted;
  double rel_agreement = 0.0;  // ||fitted - predicted|| / ||predicted||
};

struct ExpansionReport {
  std::vector<TermFit> terms;
  double residual_slope = 0.0;  // log-log slope of the post-fit residual
  bool residual_at_floor = false;
  double gram_condition = 0.0;  // of the column-scaled basis Gram matrix
  int sample_count = 0;
  std::vector<std::string> warnings;
};

// Entrywise complex least squares over the model basis with column scaling.
// Requires at least twice as many samples as terms, all on one ray.
ExpansionReport fit_expansion(
    const std::vector<std::pair<SpectralPoint, Mat>>& samples,
    const ExpansionModel& model);

// Fill in closed-form leading coefficients where the ladder provides them
// (samples assumed to be w R_V w matrices on the ladder's active set):
//   Regular: constant term U - D0, first remainder power a_d (D0 p)(D0 p)^T;
//   first kind (rank-1 subspace): leading term -S1 / (a_d <v, phi>^2);
//   eigenvalue: leading mu^-4 term -D_deepest.
void add_ladder_predictions(ExpansionReport& report, const ExpansionModel& model,
                            const LadderState& ladder);

}  // namespace biharm
