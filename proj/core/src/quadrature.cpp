#include "biharm/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

namespace biharm {

double sphere_area(int d) {
  // 2 pi^{d/2} / Gamma(d/2)
  return 2.0 * std::pow(M_PI, 0.5 * d) / std::tgamma(0.5 * d);
}

ThresholdClass threshold_class_from_string(const std::string& s) {
  if (s == "Regular") return ThresholdClass::Regular;
  if (s == "FirstKind") return ThresholdClass::FirstKind;
  if (s == "SecondKind") return ThresholdClass::SecondKind;
  if (s == "Eigenvalue") return ThresholdClass::Eigenvalue;
  throw validation_error("unknown threshold class: " + s);
}

namespace {

QuadRule make_gauss_legendre(int n) {
  // Newton iteration on Legendre polynomials; standard Golub-free approach.
  QuadRule r;
  r.x.resize(n);
  r.w.resize(n);
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    // Chebyshev-based initial guess
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
      }
      pp = n * (x * p0 - p1) / (x * x - 1.0);
      const double dx = p0 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    r.x[i] = -x;
    r.x[n - 1 - i] = x;
    const double w = 2.0 / ((1.0 - x * x) * pp * pp);
    r.w[i] = w;
    r.w[n - 1 - i] = w;
  }
  return r;
}

std::mutex g_gl_mutex;
std::map<int, QuadRule> g_gl_cache;

}  // namespace

const QuadRule& gauss_legendre(int n) {
  if (n < 1) throw validation_error("gauss_legendre: n must be positive");
  std::lock_guard<std::mutex> lock(g_gl_mutex);
  auto it = g_gl_cache.find(n);
  if (it == g_gl_cache.end())
    it = g_gl_cache.emplace(n, make_gauss_legendre(n)).first;
  return it->second;
}

QuadRule gauss_legendre(int n, double a, double b) {
  const QuadRule& base = gauss_legendre(n);
  QuadRule r;
  r.x.resize(n);
  r.w.resize(n);
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  for (int i = 0; i < n; ++i) {
    r.x[i] = mid + half * base.x[i];
    r.w[i] = half * base.w[i];
  }
  return r;
}

QuadRule composite_gauss(const std::vector<double>& breakpoints, int per_panel) {
  if (breakpoints.size() < 2)
    throw validation_error("composite_gauss: need at least two breakpoints");
  QuadRule out;
  for (size_t k = 0; k + 1 < breakpoints.size(); ++k) {
    const QuadRule panel =
        gauss_legendre(per_panel, breakpoints[k], breakpoints[k + 1]);
    out.x.insert(out.x.end(), panel.x.begin(), panel.x.end());
    out.w.insert(out.w.end(), panel.w.begin(), panel.w.end());
  }
  return out;
}

namespace {

// tanh-sinh node for the interval (a, b) at parameter t. The abscissa is
// built from the nearest endpoint via 1 - |tanh v| = 2 / (e^{2|v|} + 1), which
// keeps full relative accuracy in the endpoint distance (exact when that
// endpoint is 0); the weight includes the interval jacobian.
inline void ts_node(double t, double a, double b, double& xx, double& ww) {
  const double v = 0.5 * M_PI * std::sinh(t);
  const double c = std::cosh(v);
  ww = 0.25 * M_PI * (b - a) * std::cosh(t) / (c * c);
  const double delta = (b - a) / (1.0 + std::exp(2.0 * std::abs(v)));
  xx = (t < 0.0) ? a + delta : b - delta;
}

constexpr double kTsCut = 6.4;  // |x| reaches 1 to within ~1e-300 here

}  // namespace

QuadRule tanh_sinh_rule(double a, double b, int level) {
  QuadRule r;
  const double h = 1.0 / (1 << level);
  const int nmax = static_cast<int>(kTsCut / h);
  for (int i = -nmax; i <= nmax; ++i) {
    double xx, ww;
    ts_node(i * h, a, b, xx, ww);
    if (xx <= a || xx >= b || ww <= 0.0) continue;  // underflow to the endpoint
    r.x.push_back(xx);
    r.w.push_back(h * ww);
  }
  return r;
}

namespace {

template <typename T>
T tanh_sinh_impl(const std::function<T(double)>& f, double a, double b,
                 double rel_tol, int max_level) {
  double h = 0.5;
  // level 1 seed: evaluate on the coarse lattice
  T sum = T{};
  {
    const int nmax = static_cast<int>(kTsCut / h);
    for (int i = -nmax; i <= nmax; ++i) {
      double xx, ww;
      ts_node(i * h, a, b, xx, ww);
      if (xx <= a || xx >= b || ww <= 0.0) continue;
      sum += f(xx) * ww;
    }
    sum *= h;
  }
  T prev = sum;
  for (int level = 2; level <= max_level; ++level) {
    h *= 0.5;
    // add the odd lattice points of the refined grid
    T add = T{};
    const int nmax = static_cast<int>(kTsCut / h);
    for (int i = -nmax; i <= nmax; ++i) {
      if (i % 2 == 0) continue;
      double xx, ww;
      ts_node(i * h, a, b, xx, ww);
      if (xx <= a || xx >= b || ww <= 0.0) continue;
      add += f(xx) * ww;
    }
    T cur = prev * 0.5 + add * h;
    const double scale = std::abs(cur) + 1e-300;
    if (level >= 4 && std::abs(cur - prev) <= rel_tol * scale) return cur;
    prev = cur;
  }
  return prev;
}

}  // namespace

double tanh_sinh(const std::function<double(double)>& f, double a, double b,
                 double rel_tol, int max_level) {
  return tanh_sinh_impl<double>(f, a, b, rel_tol, max_level);
}

cplx tanh_sinh_c(const std::function<cplx(double)>& f, double a, double b,
                 double rel_tol, int max_level) {
  return tanh_sinh_impl<cplx>(f, a, b, rel_tol, max_level);
}

std::vector<double> chebyshev_nodes(int n, double a, double b) {
  // Chebyshev points of the second kind (Clenshaw-Curtis abscissas), ascending
  std::vector<double> x(n);
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  for (int i = 0; i < n; ++i)
    x[i] = mid - half * std::cos(M_PI * double(i) / (n - 1));
  return x;
}

cplx chebyshev_eval(const std::vector<double>& nodes,
                    const std::vector<cplx>& values, double x) {
  // barycentric weights for Chebyshev-2 points: (-1)^i, halved at the ends
  const int n = static_cast<int>(nodes.size());
  cplx num = 0.0, den_sum = 0.0;
  for (int i = 0; i < n; ++i) {
    double wi = (i % 2 == 0) ? 1.0 : -1.0;
    if (i == 0 || i == n - 1) wi *= 0.5;
    const double diff = x - nodes[i];
    if (std::abs(diff) < 1e-300) return values[i];
    const double q = wi / diff;
    num += values[i] * q;
    den_sum += q;
  }
  return num / den_sum;
}

std::vector<cplx> chebyshev_coeffs(const std::vector<cplx>& values) {
  // values at x_i = -cos(pi i/(n-1)) on the panel; type-I DCT by direct sums
  // (n is small here, <= 33, so O(n^2) is fine).
  const int n = static_cast<int>(values.size());
  std::vector<cplx> c(n, cplx(0.0));
  for (int k = 0; k < n; ++k) {
    cplx acc = 0.0;
    for (int i = 0; i < n; ++i) {
      // our nodes ascend: x_i = -cos(pi i/(n-1)) = cos(pi (n-1-i)/(n-1))
      const double theta = M_PI * double(n - 1 - i) / (n - 1);
      double fac = std::cos(k * theta);
      if (i == 0 || i == n - 1) fac *= 0.5;
      acc += values[i] * fac;
    }
    c[k] = acc * (2.0 / (n - 1));
  }
  c[0] *= 0.5;
  c[n - 1] *= 0.5;
  return c;
}

}  // namespace biharm
