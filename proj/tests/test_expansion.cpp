// Term-list construction and least-squares fitting of small-mu expansion
// models. Oracles: synthetic data built from known coefficient matrices
// (exact recovery), and the closed-form leading coefficients the projection
// ladder provides for regular, first-kind, and eigenvalue cells.
#include <cmath>
#include <complex>
#include <string>
#include <utility>
#include <vector>

#include "biharm/assembly.hpp"
#include "biharm/expansion_fit.hpp"
#include "biharm/expansion_tables.hpp"
#include "biharm/grid.hpp"
#include "biharm/inversion.hpp"
#include "biharm/ladder.hpp"
#include "doctest.h"

using namespace biharm;

namespace {

RadialProblem bump_problem(int d, double amplitude) {
  RadialProblem pr;
  pr.dimension = d;
  pr.potential = RadialPotential({{1.5, 0.5, amplitude}});
  return pr;
}

double critical_amplitude(int d, const Grid& g) {
  const RadialProblem probe = bump_problem(d, -1.0);
  const ProblemContext ctx = make_context(probe, g, 1.0);
  const RMat B = assemble_vGv(ctx, SpectralPoint()).real();
  Eigen::SelfAdjointEigenSolver<RMat> es(B);
  return -1.0 / es.eigenvalues().maxCoeff();
}

// deterministic complex-symmetric test matrix
Mat symmetric_matrix(int n, unsigned seed) {
  Mat A(n, n);
  unsigned s = seed;
  auto next = [&s]() {
    s = s * 1664525u + 1013904223u;
    return double(s >> 8) / double(1u << 24) - 0.5;
  };
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      A(i, j) = cplx(next(), next());
      A(j, i) = A(i, j);
    }
  return A;
}

std::vector<std::pair<SpectralPoint, Mat>> sample_rv(const LadderState& L,
                                                     const ProblemContext& ctx,
                                                     double lo, double hi,
                                                     int count, double angle) {
  std::vector<std::pair<SpectralPoint, Mat>> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    const double mod = lo * std::pow(hi / lo, double(i) / (count - 1));
    const SpectralPoint p = SpectralPoint::on_ray(mod, angle);
    out.emplace_back(p, rv_weighted(L, ctx, p));
  }
  return out;
}

const TermFit* find_term(const ExpansionReport& rep, const std::string& name) {
  for (const TermFit& t : rep.terms)
    if (t.name == name) return &t;
  return nullptr;
}

}  // namespace

TEST_CASE("expansion_model term lists") {
  SUBCASE("term counts per cell") {
    CHECK(expansion_model(5, ThresholdClass::Regular).terms.size() == 3);
    CHECK(expansion_model(5, ThresholdClass::FirstKind).terms.size() == 3);
    CHECK(expansion_model(5, ThresholdClass::SecondKind).terms.size() == 4);
    CHECK(expansion_model(5, ThresholdClass::Eigenvalue).terms.size() == 5);
    CHECK(expansion_model(6, ThresholdClass::Regular).terms.size() == 4);
    CHECK(expansion_model(6, ThresholdClass::FirstKind).terms.size() == 3);
    CHECK(expansion_model(6, ThresholdClass::SecondKind).terms.size() == 5);
    CHECK(expansion_model(6, ThresholdClass::Eigenvalue).terms.size() == 6);
    CHECK(expansion_model(7, ThresholdClass::FirstKind).terms.size() == 4);
    CHECK(expansion_model(8, ThresholdClass::FirstKind).terms.size() == 4);
    CHECK(expansion_model(8, ThresholdClass::Eigenvalue).terms.size() == 5);
  }

  SUBCASE("dimension nine merges duplicate powers") {
    const ExpansionModel r = expansion_model(9, ThresholdClass::Regular);
    REQUIRE(r.terms.size() == 3);
    CHECK(r.terms[0].name == "1");
    CHECK(r.terms[1].name == "mu^4");
    CHECK(r.terms[2].name == "mu^5");
    const ExpansionModel e = expansion_model(9, ThresholdClass::Eigenvalue);
    REQUIRE(e.terms.size() == 3);
    CHECK(e.terms[0].name == "mu^-4");
    CHECK(e.terms[1].name == "mu^-3");
    CHECK(e.terms[2].name == "1");
  }

  SUBCASE("log-family shift comes from the kernel table") {
    const ExpansionTerm* t4 = expansion_coefficients(6).term_with_mu_pow(4);
    const cplx s = t4->coeff / t4->log_coeff;
    const ExpansionModel e = expansion_model(6, ThresholdClass::Eigenvalue);
    const cplx mu = std::polar(0.01, 0.3);
    const TermFit* dummy = nullptr;  // silence unused-warning patterns
    (void)dummy;
    for (const BasisTerm& bt : e.terms) {
      if (bt.name == "c")
        CHECK(std::abs(bt.eval(mu) - (std::log(mu) + s)) < 1e-14);
      if (bt.name == "c^2") {
        const cplx c = std::log(mu) + s;
        CHECK(std::abs(bt.eval(mu) - c * c) < 1e-13);
      }
      if (bt.name == "mu^-4 c^-1")
        CHECK(std::abs(bt.eval(mu) -
                       std::pow(mu, -4.0) / (std::log(mu) + s)) < 1e-2);
    }
  }

  SUBCASE("cells that cannot occur are rejected") {
    CHECK_THROWS_AS(expansion_model(7, ThresholdClass::SecondKind),
                    validation_error);
    CHECK_THROWS_AS(expansion_model(8, ThresholdClass::SecondKind),
                    validation_error);
    CHECK_THROWS_AS(expansion_model(9, ThresholdClass::FirstKind),
                    validation_error);
    CHECK_THROWS_AS(expansion_model(4, ThresholdClass::Regular),
                    validation_error);
    CHECK_THROWS_AS(expansion_model(10, ThresholdClass::Regular),
                    validation_error);
  }
}

TEST_CASE("fit_expansion recovers synthetic coefficients exactly") {
  const ExpansionModel model = expansion_model(5, ThresholdClass::FirstKind);
  const Mat C0 = symmetric_matrix(4, 5u);
  const Mat C1 = symmetric_matrix(4, 17u);
  const Mat C2 = symmetric_matrix(4, 31u);

  // moduli of order one keep the three data magnitudes comparable, which is
  // the regime where recovery is limited only by roundoff
  std::vector<std::pair<SpectralPoint, Mat>> samples;
  for (int i = 0; i < 8; ++i) {
    const double mod = 0.25 * std::pow(4.0, i / 7.0);
    const SpectralPoint p = SpectralPoint::on_ray(mod, 0.3);
    const Mat X = model.terms[0].eval(p.mu) * C0 +
                  model.terms[1].eval(p.mu) * C1 +
                  model.terms[2].eval(p.mu) * C2;
    samples.emplace_back(p, X);
  }

  const ExpansionReport rep = fit_expansion(samples, model);
  REQUIRE(rep.terms.size() == 3);
  CHECK((rep.terms[0].fitted - C0).norm() < 1e-12 * C0.norm());
  CHECK((rep.terms[1].fitted - C1).norm() < 1e-12 * C1.norm());
  CHECK((rep.terms[2].fitted - C2).norm() < 1e-12 * C2.norm());
  CHECK(rep.residual_at_floor);
  CHECK(rep.gram_condition < 1e8);
}

TEST_CASE("fit_expansion flags a degenerate sample set") {
  const ExpansionModel model = expansion_model(5, ThresholdClass::Regular);
  const Mat C = symmetric_matrix(3, 7u);
  std::vector<std::pair<SpectralPoint, Mat>> samples;
  for (int i = 0; i < 6; ++i) {
    const double mod = 1e-3 * (1.0 + 1e-10 * i);
    samples.emplace_back(SpectralPoint::on_ray(mod, 0.3), C);
  }
  const ExpansionReport rep = fit_expansion(samples, model);
  CHECK(rep.gram_condition > 1e8);
  bool warned = false;
  for (const std::string& w : rep.warnings)
    if (w.find("ill-conditioned") != std::string::npos) warned = true;
  CHECK(warned);
}

TEST_CASE("fit_expansion input validation") {
  const ExpansionModel model = expansion_model(5, ThresholdClass::Regular);
  const Mat C = symmetric_matrix(3, 9u);

  std::vector<std::pair<SpectralPoint, Mat>> few = {
      {SpectralPoint::on_ray(1e-2, 0.3), C},
      {SpectralPoint::on_ray(2e-2, 0.3), C}};
  CHECK_THROWS_AS(fit_expansion(few, model), validation_error);

  std::vector<std::pair<SpectralPoint, Mat>> mixed;
  for (int i = 0; i < 6; ++i)
    mixed.emplace_back(
        SpectralPoint::on_ray(1e-2 * (i + 1), i < 3 ? 0.3 : 0.4), C);
  CHECK_THROWS_AS(fit_expansion(mixed, model), validation_error);

  std::vector<std::pair<SpectralPoint, Mat>> ragged;
  for (int i = 0; i < 6; ++i)
    ragged.emplace_back(SpectralPoint::on_ray(1e-2 * (i + 1), 0.3),
                        i == 4 ? symmetric_matrix(4, 3u) : C);
  CHECK_THROWS_AS(fit_expansion(ragged, model), validation_error);
}

TEST_CASE("regular cell fit matches the ladder's closed forms (d = 5)") {
  const Grid g = build_grid(110, 6.0, GridScheme::gauss, {1.0, 2.0});
  const RadialProblem pr = bump_problem(5, -0.05);
  const ProblemContext ctx = make_context(pr, g, 1.0);
  const LadderState L = build_ladder(ctx);
  REQUIRE(L.classification == ThresholdClass::Regular);

  const ExpansionModel model = expansion_model(5, ThresholdClass::Regular);
  const auto samples = sample_rv(L, ctx, 1.5e-3, 3e-2, 10, 0.25);
  ExpansionReport rep = fit_expansion(samples, model);
  add_ladder_predictions(rep, model, L);

  const TermFit* t0 = find_term(rep, "1");
  REQUIRE(t0 != nullptr);
  REQUIRE(t0->has_prediction);
  CHECK(t0->rel_agreement < 1e-3);

  const TermFit* t1 = find_term(rep, "mu");
  REQUIRE(t1 != nullptr);
  REQUIRE(t1->has_prediction);
  CHECK(t1->rel_agreement < 0.02);

  CHECK_FALSE(rep.residual_at_floor);
  CHECK(rep.residual_slope > model.residual_order - 0.15);
  CHECK(rep.residual_slope < model.residual_order + 1.5);

  // least squares is entrywise linear, so symmetry of the data survives
  for (const TermFit& t : rep.terms)
    CHECK((t.fitted - t.fitted.transpose()).norm() < 1e-10 * (1.0 + t.fnorm));
}

TEST_CASE("regular cell fit with the log family (d = 6)") {
  const Grid g = build_grid(110, 6.0, GridScheme::gauss, {1.0, 2.0});
  const RadialProblem pr = bump_problem(6, -0.05);
  const ProblemContext ctx = make_context(pr, g, 1.0);
  const LadderState L = build_ladder(ctx);
  REQUIRE(L.classification == ThresholdClass::Regular);

  const ExpansionModel model = expansion_model(6, ThresholdClass::Regular);
  const auto samples = sample_rv(L, ctx, 2e-3, 3e-2, 12, 0.2);
  ExpansionReport rep = fit_expansion(samples, model);
  add_ladder_predictions(rep, model, L);

  const TermFit* t0 = find_term(rep, "1");
  REQUIRE(t0 != nullptr);
  REQUIRE(t0->has_prediction);
  CHECK(t0->rel_agreement < 1e-3);

  // the first remainder power is purely imaginary in this dimension
  const TermFit* t1 = find_term(rep, "mu^2");
  REQUIRE(t1 != nullptr);
  REQUIRE(t1->has_prediction);
  CHECK(t1->rel_agreement < 0.05);
  CHECK(t1->fitted.real().norm() < 0.05 * t1->fnorm);
}

TEST_CASE("first-kind leading coefficient matches the moment formula (d = 5)") {
  const Grid g = build_grid(110, 6.0, GridScheme::gauss, {1.0, 2.0});
  const double amp = critical_amplitude(5, g);
  const RadialProblem pr = bump_problem(5, amp);
  const ProblemContext ctx = make_context(pr, g, 1.0);
  const LadderState L = build_ladder(ctx);
  REQUIRE(L.classification == ThresholdClass::FirstKind);

  const ExpansionModel model = expansion_model(5, ThresholdClass::FirstKind);
  const auto samples = sample_rv(L, ctx, 1e-3, 1e-2, 10, 0.25);
  ExpansionReport rep = fit_expansion(samples, model);
  add_ladder_predictions(rep, model, L);

  const TermFit* lead = find_term(rep, "mu^-1");
  REQUIRE(lead != nullptr);
  REQUIRE(lead->has_prediction);
  CHECK(lead->rel_agreement < 0.05);

  CHECK_FALSE(rep.residual_at_floor);
  CHECK(rep.residual_slope > 1.5);
}

TEST_CASE("eigenvalue leading operator matches the deepest block (d = 9)") {
  const Grid g = build_grid(110, 6.0, GridScheme::gauss, {1.0, 2.0});
  const double amp = critical_amplitude(9, g);
  const RadialProblem pr = bump_problem(9, amp);
  const ProblemContext ctx = make_context(pr, g, 1.0);
  const LadderState L = build_ladder(ctx);
  REQUIRE(L.classification == ThresholdClass::Eigenvalue);

  const ExpansionModel model = expansion_model(9, ThresholdClass::Eigenvalue);
  const auto samples = sample_rv(L, ctx, 1e-3, 1e-2, 8, 0.25);
  ExpansionReport rep = fit_expansion(samples, model);
  add_ladder_predictions(rep, model, L);

  const TermFit* lead = find_term(rep, "mu^-4");
  REQUIRE(lead != nullptr);
  REQUIRE(lead->has_prediction);
  CHECK(lead->rel_agreement < 0.05);

  // The first omitted term blows up like mu^-2, but for this fixture the
  // residual is dominated by kernel-evaluation noise amplified through the
  // near-singular threshold channel, which decays faster. The order law only
  // bounds the slope from below.
  CHECK_FALSE(rep.residual_at_floor);
  CHECK(rep.residual_slope > model.residual_order - 0.15);
}

TEST_CASE("add_ladder_predictions validation") {
  const Grid g = build_grid(110, 6.0, GridScheme::gauss, {1.0, 2.0});
  const RadialProblem pr = bump_problem(5, -0.05);
  const ProblemContext ctx = make_context(pr, g, 1.0);
  const LadderState L = build_ladder(ctx);

  const ExpansionModel model = expansion_model(5, ThresholdClass::Regular);
  const auto samples = sample_rv(L, ctx, 2e-3, 2e-2, 8, 0.25);
  ExpansionReport rep = fit_expansion(samples, model);

  const ExpansionModel wrong_cls =
      expansion_model(5, ThresholdClass::FirstKind);
  CHECK_THROWS_AS(add_ladder_predictions(rep, wrong_cls, L), validation_error);
  const ExpansionModel wrong_dim = expansion_model(6, ThresholdClass::Regular);
  CHECK_THROWS_AS(add_ladder_predictions(rep, wrong_dim, L), validation_error);
}
