// Radial quadrature grids on (0, R].
#pragma once

#include <string>
#include <vector>

#include "biharm/types.hpp"

namespace biharm {

enum class GridScheme { gauss, graded };

GridScheme grid_scheme_from_string(const std::string& s);
const char* to_string(GridScheme s);

struct Grid {
  int n = 0;
  double radius = 0.0;
  GridScheme scheme = GridScheme::gauss;
  std::vector<double> r;  // nodes, ascending, in (0, R)
  std::vector<double> w;  // weights for int_0^R f(r) dr (no volume factor)
};

// target_nodes is a budget, not an exact count; the actual count lands within
// a few nodes of it. breakpoints (e.g. potential edges) become panel
// boundaries so that piecewise-smooth integrands stay spectrally accurate.
Grid build_grid(int target_nodes, double radius, GridScheme scheme,
                const std::vector<double>& breakpoints = {});

}  // namespace biharm
