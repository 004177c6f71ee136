#include "biharm/grid.hpp"

#include <algorithm>
#include <cmath>

#include "biharm/quadrature.hpp"

namespace biharm {

GridScheme grid_scheme_from_string(const std::string& s) {
  if (s == "gauss") return GridScheme::gauss;
  if (s == "graded") return GridScheme::graded;
  throw validation_error("unknown grid scheme: " + s);
}

const char* to_string(GridScheme s) {
  return s == GridScheme::gauss ? "gauss" : "graded";
}

Grid build_grid(int target_nodes, double radius, GridScheme scheme,
                const std::vector<double>& breakpoints) {
  if (target_nodes < 8 || target_nodes > 4000)
    throw validation_error("build_grid: node budget out of range [8, 4000]");
  if (!(radius > 0.0)) throw validation_error("build_grid: radius must be positive");

  std::vector<double> edges{0.0, radius};
  for (double b : breakpoints)
    if (b > 1e-12 * radius && b < radius * (1.0 - 1e-12)) edges.push_back(b);

  if (scheme == GridScheme::graded) {
    // quadratic grading toward the origin
    const int m = std::max(3, target_nodes / 8);
    for (int j = 1; j < m; ++j) {
      const double x = radius * std::pow(double(j) / m, 2.0);
      if (x > 1e-12 * radius) edges.push_back(x);
    }
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end(),
                          [&](double a, double b) {
                            return std::abs(b - a) < 1e-12 * radius;
                          }),
              edges.end());

  const int npanels = static_cast<int>(edges.size()) - 1;
  Grid g;
  g.radius = radius;
  g.scheme = scheme;

  // distribute the budget in proportion to panel length, at least 4 per panel
  for (int p = 0; p < npanels; ++p) {
    const double len = edges[p + 1] - edges[p];
    int q = std::max(4, static_cast<int>(std::lround(target_nodes * len / radius)));
    if (scheme == GridScheme::graded) q = std::max(4, std::min(q, 8));
    const QuadRule rule = gauss_legendre(q, edges[p], edges[p + 1]);
    g.r.insert(g.r.end(), rule.x.begin(), rule.x.end());
    g.w.insert(g.w.end(), rule.w.begin(), rule.w.end());
  }
  g.n = static_cast<int>(g.r.size());
  return g;
}

}  // namespace biharm
