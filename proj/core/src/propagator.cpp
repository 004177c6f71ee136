#include "biharm/propagator.hpp"

#include <algorithm>
#include <cmath>

namespace biharm {

namespace {

constexpr double kPi = 3.14159265358979323846;
// crossover between direct quadrature and the forward recurrence for the
// oscillatory Chebyshev moments; the recurrence's homogeneous growth factor
// 2(k+1)/theta stays harmless for k <= 20 once theta exceeds this, and the
// 40-point quadrature below it covers combined frequencies theta + k <= 45
constexpr double kMomentSplit = 25.0;

// nodes and weights of n-point Gauss-Legendre on [-1, 1] (Newton on P_n)
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
      }
      pp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
    w[n - 1 - i] = w[i];
  }
}

// M_k(theta) = integral_{-1}^{1} T_k(x) e^{i theta x} dx, k = 0..N
Eigen::VectorXcd cheb_moments(double theta, int N) {
  Eigen::VectorXcd M(N + 1);
  if (theta == 0.0) {
    for (int k = 0; k <= N; ++k)
      M[k] = (k % 2 == 0) ? cplx(2.0 / (1.0 - double(k) * double(k)), 0.0)
                          : cplx(0.0, 0.0);
    M[0] = cplx(2.0, 0.0);
    return M;
  }
  if (theta < kMomentSplit) {
    static std::vector<double> gx, gw;
    if (gx.empty()) gauss_legendre(40, gx, gw);
    M.setZero();
    for (size_t q = 0; q < gx.size(); ++q) {
      const double xq = gx[q];
      const cplx e = gw[q] * std::exp(cplx(0.0, theta * xq));
      double t0 = 1.0, t1 = xq;
      M[0] += e;
      if (N >= 1) M[1] += e * xq;
      for (int k = 2; k <= N; ++k) {
        const double tk = 2.0 * xq * t1 - t0;
        M[k] += e * tk;
        t0 = t1;
        t1 = tk;
      }
    }
    return M;
  }
  // forward integration by parts: from 2 T_k = T'_{k+1}/(k+1) - T'_{k-1}/(k-1),
  //   I_{k+1} = (k+1) (B_k - 2 I_k)/(i theta) + (k+1)/(k-1) I_{k-1},
  //   B_k = -2/(k^2-1) (e^{i theta} + (-1)^k e^{-i theta})
  const double s = std::sin(theta), c = std::cos(theta);
  M[0] = cplx(2.0 * s / theta, 0.0);
  if (N >= 1) M[1] = cplx(0.0, 2.0) * (s / (theta * theta) - c / theta);
  if (N >= 2) {
    const double ix2 = 2.0 * (s / theta + 2.0 * c / (theta * theta) -
                              2.0 * s / (theta * theta * theta));
    M[2] = 2.0 * ix2 - M[0];
  }
  const cplx eip(c, s), eim(c, -s);
  for (int k = 2; k < N; ++k) {
    const double par = (k % 2 == 0) ? 1.0 : -1.0;
    const cplx B = (-2.0 / double(k * k - 1)) * (eip + par * eim);
    M[k + 1] = double(k + 1) * (B - 2.0 * M[k]) / cplx(0.0, theta) +
               (double(k + 1) / double(k - 1)) * M[k - 1];
  }
  return M;
}

// Chebyshev coefficients of G on [mid-half, mid+half] at Lobatto nodes,
// with the first and last entries already halved so that the interpolant
// is plain sum_k coef[k] T_k
RVec cheb_coefficients(const std::function<double(double)>& G, double mid,
                       double half, int N, RVec* samples_out = nullptr) {
  RVec g(N + 1);
  for (int j = 0; j <= N; ++j)
    g[j] = G(mid + half * std::cos(kPi * j / N));
  if (samples_out != nullptr) *samples_out = g;
  RVec a(N + 1);
  for (int k = 0; k <= N; ++k) {
    double s = 0.5 * (g[0] + (k % 2 == 0 ? 1.0 : -1.0) * g[N]);
    for (int j = 1; j < N; ++j) s += g[j] * std::cos(kPi * j * k / N);
    a[k] = 2.0 * s / N;
  }
  a[0] *= 0.5;
  a[N] *= 0.5;
  return a;
}

cplx panel_value(double mid, double half, const RVec& coef, double t) {
  const Eigen::VectorXcd M =
      cheb_moments(t * half, static_cast<int>(coef.size()) - 1);
  cplx s(0.0, 0.0);
  for (int k = 0; k < coef.size(); ++k) s += coef[k] * M[k];
  return half * std::exp(cplx(0.0, t * mid)) * s;
}

// amplitude ~ value (u/u_min)^p on [0, u_min] with e^{itu} ~ 1 + itu:
// integral = value u_min [1/(p+1) + i t u_min/(p+2)]
cplx endpoint_value(double value, double p, double u_min, double t) {
  return value * u_min *
         (cplx(1.0 / (p + 1.0), 0.0) + cplx(0.0, t * u_min / (p + 2.0)));
}

// local exponent from samples at u_min and u_min/2; falls back to linear
// when the samples do not look like one power
double endpoint_exponent(double at_u_min, double at_half) {
  if (at_u_min == 0.0 || at_half == 0.0 ||
      (at_u_min > 0.0) != (at_half > 0.0) ||
      !std::isfinite(at_u_min) || !std::isfinite(at_half))
    return 1.0;
  const double p = std::log(std::abs(at_u_min / at_half)) / std::log(2.0);
  return std::clamp(p, -0.95, 8.0);
}

int panel_count(double u_min, double u_max) {
  return static_cast<int>(std::ceil(std::log2(u_max / u_min)));
}

void validate_range(double u_min, double u_max, int degree, const char* who) {
  if (!(u_min > 0.0) || !(u_max > 2.0 * u_min))
    throw validation_error(std::string(who) +
                           ": need 0 < u_min < u_max / 2");
  if (degree < 4 || degree > 20)
    throw validation_error(std::string(who) + ": degree must be in [4, 20]");
}

}  // namespace

cplx oscillatory_integral(double u_min, double u_max,
                          const std::function<double(double)>& amplitude,
                          double t, int degree) {
  validate_range(u_min, u_max, degree, "oscillatory_integral");
  if (!std::isfinite(t))
    throw validation_error("oscillatory_integral: t must be finite");

  const bool reflect = t < 0.0;
  const double ta = std::abs(t);

  const double a0 = amplitude(u_min);
  const double ah = amplitude(0.5 * u_min);
  cplx total = endpoint_value(a0, endpoint_exponent(a0, ah), u_min, ta);
  const int np = panel_count(u_min, u_max);
  for (int i = 0; i < np; ++i) {
    const double a = u_min * std::pow(2.0, i);
    const double b = std::min(a * 2.0, u_max);
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    total += panel_value(mid, half,
                         cheb_coefficients(amplitude, mid, half, degree), ta);
  }
  return reflect ? std::conj(total) : total;
}

Propagator::Propagator(const LadderState& ladder, const ProblemContext& ctx,
                       const RadialProfile& f, const RadialProfile& g,
                       PropagatorOptions opts) {
  if (!(opts.lambda_max > 0.0))
    throw validation_error("Propagator: lambda_max must be positive");
  const double u_max = std::pow(opts.lambda_max, 4);
  validate_range(opts.u_min, u_max, opts.degree, "Propagator");
  u_min_ = opts.u_min;
  degree_ = opts.degree;

  const auto amplitude = [&](double u) {
    const double lam = std::pow(u, 0.25);
    const double chi = opts.cutoff ? opts.cutoff(lam) : 1.0;
    if (chi == 0.0) return 0.0;  // spare the resolvent solves beyond support
    return chi * spectral_density(ladder, ctx, lam, f, g);
  };

  const int np = panel_count(u_min_, u_max);
  std::vector<RVec> samples(np);
  panels_.resize(np);
  double global_scale = 0.0;
  for (int i = 0; i < np; ++i) {
    const double a = u_min_ * std::pow(2.0, i);
    const double b = std::min(a * 2.0, u_max);
    panels_[i].mid = 0.5 * (a + b);
    panels_[i].half = 0.5 * (b - a);
    panels_[i].coef = cheb_coefficients(amplitude, panels_[i].mid,
                                        panels_[i].half, degree_,
                                        &samples[i]);
    global_scale =
        std::max(global_scale, samples[i].cwiseAbs().maxCoeff());
  }

  int rough = 0;
  for (int i = 0; i < np; ++i) {
    const RVec& c = panels_[i].coef;
    const double tail =
        std::abs(c[degree_]) + std::abs(c[degree_ - 1]);
    if (tail > 1e-8 * std::max(global_scale, 1e-300)) ++rough;
  }
  if (rough > 0)
    warnings_.push_back(
        std::to_string(rough) +
        " panel(s) did not resolve the density to the coefficient target");

  // left edge of the first panel is the Lobatto node j = degree
  endpoint_value_ = samples[0][degree_];
  endpoint_power_ =
      endpoint_exponent(endpoint_value_, amplitude(0.5 * u_min_));
}

cplx Propagator::evaluate(double t) const {
  cplx total = endpoint_value(endpoint_value_, endpoint_power_, u_min_, t);
  for (const Panel& p : panels_)
    total += panel_value(p.mid, p.half, p.coef, t);
  return total;
}

cplx Propagator::operator()(double t) const {
  if (!std::isfinite(t))
    throw validation_error("Propagator: t must be finite");
  return t < 0.0 ? std::conj(evaluate(-t)) : evaluate(t);
}

}  // namespace biharm
