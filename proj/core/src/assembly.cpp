#include "biharm/assembly.hpp"

#include <cmath>

namespace biharm {

namespace {

Mat sandwich(const WeightedBasis& basis, const Mat& full) {
  const int n = static_cast<int>(basis.active.size());
  Mat out(n, n);
  // fill the upper triangle and mirror so the result is symmetric to the bit
  for (int i = 0; i < n; ++i) {
    const double fi = basis.v[i] * basis.sw[i];
    for (int j = i; j < n; ++j) {
      const cplx val =
          fi * full(basis.active[i], basis.active[j]) * basis.v[j] * basis.sw[j];
      out(i, j) = val;
      out(j, i) = val;
    }
  }
  return out;
}

}  // namespace

WeightedBasis weighted_basis(const RadialProblem& problem, const Grid& grid) {
  problem.validate();
  WeightedBasis b;
  const double area = sphere_area(problem.dimension);
  std::vector<double> r, sw, v, sign;
  for (int i = 0; i < grid.n; ++i) {
    const double V = problem.potential(grid.r[i]);
    if (V == 0.0) continue;
    b.active.push_back(i);
    r.push_back(grid.r[i]);
    sw.push_back(std::sqrt(grid.w[i] * area *
                           std::pow(grid.r[i], problem.dimension - 1)));
    v.push_back(std::sqrt(std::abs(V)));
    sign.push_back(V > 0.0 ? 1.0 : -1.0);
  }
  if (b.active.empty())
    throw validation_error("weighted_basis: potential vanishes on every grid node");
  const int n = static_cast<int>(b.active.size());
  b.r = Eigen::Map<RVec>(r.data(), n);
  b.sw = Eigen::Map<RVec>(sw.data(), n);
  b.v = Eigen::Map<RVec>(v.data(), n);
  b.sign = Eigen::Map<RVec>(sign.data(), n);
  return b;
}

AverageTable make_average_table(const RadialProblem& problem, const Grid& grid,
                                double kappa_max) {
  return AverageTable(problem.dimension, grid.r, kappa_max);
}

RMat assemble_U(const RadialProblem& problem, const Grid& grid) {
  const WeightedBasis b = weighted_basis(problem, grid);
  return b.sign.asDiagonal().toDenseMatrix();
}

RMat assemble_P(const RadialProblem& problem, const Grid& grid) {
  const WeightedBasis b = weighted_basis(problem, grid);
  const RVec p = (b.v.array() * b.sw.array()).matrix();
  return p * p.transpose() / p.squaredNorm();
}

Mat assemble_vGv(const RadialProblem& problem, const Grid& grid,
                 const AverageTable& table, const SpectralPoint& p) {
  return sandwich(weighted_basis(problem, grid), table.fill(p));
}

Mat assemble_vGv(const RadialProblem& problem, const Grid& grid,
                 const AverageTable& table,
                 const std::function<cplx(double)>& kernel) {
  return sandwich(weighted_basis(problem, grid), table.fill(kernel));
}

Mat assemble_M(const RadialProblem& problem, const Grid& grid,
               const AverageTable& table, const SpectralPoint& p) {
  const WeightedBasis b = weighted_basis(problem, grid);
  Mat m = sandwich(b, table.fill(p));
  for (int i = 0; i < m.rows(); ++i) m(i, i) += b.sign[i];
  return m;
}

ProblemContext make_context(const RadialProblem& problem, const Grid& grid,
                            double kappa_max) {
  return ProblemContext{problem, grid, weighted_basis(problem, grid),
                        make_average_table(problem, grid, kappa_max)};
}

}  // namespace biharm
