// Angular averages: closed forms, the adaptive reference integral, and the
// precomputed pair-quadrature table. Reference values were computed offline
// at 40-digit precision from the direct theta-integral (a different variable
// than the implementation uses).
#include "biharm/radial_average.hpp"

#include <cmath>

#include "biharm/kernels.hpp"
#include "doctest.h"

using namespace biharm;

namespace {

void check_close(cplx got, cplx want, double rel) {
  const double scale = std::abs(want);
  REQUIRE(scale > 0.0);
  CHECK(std::abs(got - want) <= rel * scale);
}

}  // namespace

TEST_CASE("averaged_riesz closed form against reference values") {
  check_close(averaged_riesz(5, 1.0, 0.5), 0.95, 1e-15);
  check_close(averaged_riesz(6, 1.1, 0.7), 0.714887416615440546481, 1e-14);
  check_close(averaged_riesz(7, 0.9, 0.8), 0.907236846880193751884, 1e-14);
  check_close(averaged_riesz(8, 1.5, 0.2), 0.195775034293552807393, 1e-14);
  check_close(averaged_riesz(9, 2.0, 1.9), 0.0155815972222222281974, 1e-14);
  // symmetric in (r, s)
  CHECK(averaged_riesz(7, 0.9, 0.8) == averaged_riesz(7, 0.8, 0.9));
}

TEST_CASE("averaged_power closed forms against reference values") {
  CHECK(averaged_power(5, 2, 1.3, 0.4) == doctest::Approx(1.3 * 1.3 + 0.16).epsilon(1e-15));
  check_close(averaged_power(5, 3, 1.3, 0.4), 2.57644598044953092925, 1e-14);
  check_close(averaged_power(7, 1, 0.9, 0.8), 1.17992823334996791424, 1e-14);
  check_close(averaged_power(9, -1, 2.0, 1.9), 0.382322592420600248972, 1e-14);
  check_close(averaged_power(6, -2, 1.1, 0.7), 0.714887416615440546481, 1e-14);
  CHECK_THROWS_AS(averaged_power(5, 1, 1.0, 0.5), validation_error);
  CHECK_THROWS_AS(averaged_power(6, 3, 1.0, 0.5), validation_error);
}

TEST_CASE("averaged_log_kernel against reference values") {
  check_close(averaged_log_kernel(6, 1.1, 0.7), 0.512828059258864813116, 1e-11);
  check_close(averaged_log_kernel(8, 1.5, 0.2), 0.412108117893258124865, 1e-11);
  CHECK_THROWS_AS(averaged_log_kernel(5, 1.0, 0.5), validation_error);
}

TEST_CASE("radial_average agrees with the closed forms") {
  for (int d : {5, 6, 7, 8, 9}) {
    for (auto [r, s] : {std::pair{1.0, 0.5}, {2.0, 1.9}, {0.3, 1.7}, {1.3, 1.3}}) {
      const cplx got = radial_average(
          d, [d](double rho) { return cplx(std::pow(rho, 4 - d), 0.0); }, r, s);
      check_close(got, cplx(averaged_riesz(d, r, s), 0.0), 1e-11);
    }
  }
}

TEST_CASE("radial_average on complex kernels against reference values") {
  check_close(radial_average(
                  5, [](double x) { return std::exp(cplx(0.0, x)) / x; }, 1.0, 0.5),
              cplx(0.45905132110055763336, 0.805829777772759188368), 1e-12);
  check_close(radial_average(
                  6, [](double x) { return std::exp(-cplx(1.0, -1.0) * x) / (x * x); },
                  1.2, 0.9),
              cplx(0.0645595917968071405517, 0.14274922232429305767), 1e-12);
}

TEST_CASE("AverageTable reproduces the adaptive averages") {
  const std::vector<double> radii{0.11, 0.23, 0.42, 0.61, 0.85,
                                  1.20, 1.70, 2.30, 3.10, 4.00};
  for (int d : {5, 6, 9}) {
    const AverageTable table(d, radii, 5.2);

    SUBCASE("riesz kernel") {
      const Mat got = table.fill(SpectralPoint());
      for (size_t i = 0; i < radii.size(); ++i)
        for (size_t j = 0; j < radii.size(); ++j)
          check_close(got(i, j),
                      cplx(riesz_constant(d) * averaged_riesz(d, radii[i], radii[j]),
                           0.0),
                      5e-11);
    }

    SUBCASE("quadratic kernel") {
      const Mat got = table.fill([](double rho) { return cplx(rho * rho, 0.0); });
      for (size_t i = 0; i < radii.size(); ++i)
        for (size_t j = i; j < radii.size(); ++j)
          check_close(got(i, j),
                      cplx(averaged_power(d, 2, radii[i], radii[j]), 0.0), 5e-11);
    }

    SUBCASE("spectral kernels across both branches and large |mu|") {
      for (double m : {1e-3, 0.05, 0.9, 5.0}) {
        const SpectralPoint p = SpectralPoint::on_ray(m, M_PI / 8.0);
        const Mat got = table.fill(p);
        for (size_t i = 0; i < radii.size(); i += 3) {
          for (size_t j = i; j < radii.size(); j += 2) {
            const cplx want = radial_average(
                d, [&](double rho) { return biharm_kernel(d, p, rho); }, radii[i],
                radii[j]);
            check_close(got(i, j), want, 5e-10);
          }
        }
      }
    }
  }
}
