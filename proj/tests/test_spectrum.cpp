#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>

#include "stableid/errors.hpp"
#include "stableid/matrix.hpp"
#include "stableid/spectrum.hpp"
#include "test_support.hpp"

using namespace stableid;
using namespace test_support;

namespace {

// The badly conditioned stabilization example pair used across suites.
const Matrix kSharkFin{{1.01, 10.0}, {0.01, 1.0}};
const Matrix kSharkFinClipped{{0.84, 4.77}, {0.005, 0.84}};
const Matrix kSharkFinShifted{{0.99, 10.0}, {0.0, 0.99}};

}  // namespace

TEST_SUITE("spectrum") {

TEST_CASE("identity eigenvalues") {
  const Spectrum sp = eigenvalues(Matrix::identity(3));
  REQUIRE(sp.eigenvalues.size() == 3);
  for (const auto& z : sp.eigenvalues) {
    CHECK(std::abs(z - std::complex<double>(1.0, 0.0)) < 1e-12);
  }
}

TEST_CASE("2x2 eigenvalues match the quadratic-formula oracle") {
  // char poly: lambda^2 - 2.01 lambda + 0.91
  const double tr = 2.01, det = 1.01 - 0.1;
  const double disc = std::sqrt(tr * tr / 4.0 - det);
  const double l1 = tr / 2.0 + disc, l2 = tr / 2.0 - disc;
  const Spectrum sp = eigenvalues(kSharkFin);
  CHECK(spectrum_distance(sp.eigenvalues, {{l1, 0.0}, {l2, 0.0}}) < 1e-10);
  CHECK(rel_err(spectral_radius(kSharkFin), l1) < 1e-10);
  CHECK(spectral_radius(kSharkFin) == doctest::Approx(1.3213).epsilon(1e-4));
}

TEST_CASE("companion matrix of lambda^2 - lambda - 1 yields golden ratio") {
  const Matrix c{{1.0, 1.0}, {1.0, 0.0}};
  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  const Spectrum sp = eigenvalues(c);
  CHECK(spectrum_distance(sp.eigenvalues, {{phi, 0.0}, {1.0 - phi, 0.0}}) < 1e-12);
}

TEST_CASE("characteristic polynomial residual vanishes at computed eigenvalues") {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    const std::size_t n = 2 + seed % 4;
    const Matrix a = randn(n, n, seed);
    const Spectrum sp = eigenvalues(a);
    double scale = 1.0;
    const double fn = frobenius_norm(a) + 1.0;
    for (std::size_t k = 0; k < n; ++k) scale *= fn;
    for (const auto& lambda : sp.eigenvalues) {
      CHECK(std::abs(charpoly_at(a, lambda)) <= 1e-7 * scale);
    }
  }
}

TEST_CASE("complex eigenvalues come in conjugate pairs") {
  for (std::uint64_t seed = 100; seed < 120; ++seed) {
    const Matrix a = randn(5, 5, seed);
    auto values = eigenvalues(a).eigenvalues;
    std::vector<std::complex<double>> conjugated;
    for (auto z : values) conjugated.push_back(std::conj(z));
    CHECK(spectrum_distance(values, conjugated) < 1e-12);
  }
}

TEST_CASE("eigenvalue multiset is invariant under similarity") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const std::size_t n = 2 + seed % 5;
    const Matrix a = randn(n, n, seed);
    const Matrix p = random_spd(n, seed + 500) + Matrix::identity(n);
    const Matrix sim = p * a * inverse(p);
    const double dist = spectrum_distance(eigenvalues(a).eigenvalues,
                                          eigenvalues(sim).eigenvalues);
    const double scale = std::max(spectral_radius(a), 1.0);
    CHECK(dist / scale < 1e-8);
  }
}

TEST_CASE("spectral radius basics") {
  CHECK(spectral_radius(Matrix(3, 3)) == 0.0);
  const Matrix y{{0.95, 0.1, 1.0}, {-0.1, 0.95, 0.0}, {0.0, 0.0, 0.9}};
  CHECK(spectral_radius(y) == doctest::Approx(std::sqrt(0.9125)).epsilon(1e-10));
  CHECK(spectral_radius(kSharkFinShifted) == doctest::Approx(0.99).epsilon(1e-12));
}

TEST_CASE("stability classification respects the boundary band") {
  CHECK(classify_stability(0.9) == StabilityClass::stable);
  CHECK(classify_stability(1.0) == StabilityClass::boundary);
  CHECK(classify_stability(1.0 - 1e-13) == StabilityClass::boundary);
  CHECK(classify_stability(1.0 + 1e-13) == StabilityClass::boundary);
  CHECK(classify_stability(1.0 + 1e-11) == StabilityClass::unstable);
  CHECK(is_stable(Matrix{{0.5}}));
  CHECK_FALSE(is_stable(Matrix{{1.0}}));
}

TEST_CASE("operator norm basics and the stabilization example distances") {
  CHECK(operator_norm(Matrix{{3, 0}, {0, -5}}) == doctest::Approx(5.0));
  CHECK(operator_norm(kSharkFin - kSharkFinShifted) ==
        doctest::Approx(0.02).epsilon(0.25));  // within 0.005 absolute
  CHECK(std::fabs(operator_norm(kSharkFin - kSharkFinShifted) - 0.02) < 0.005);
  CHECK(operator_norm(kSharkFin - kSharkFinClipped) >= 4.9);
}

TEST_CASE("norm ordering: rho <= operator norm <= frobenius norm") {
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const std::size_t n = 1 + seed % 6;
    const Matrix a = randn(n, n, seed, seed % 3 == 0 ? 100.0 : 1.0);
    const double rho = spectral_radius(a);
    const double op = operator_norm(a);
    const double fro = frobenius_norm(a);
    const double slack = 1e-12 * std::max(1.0, fro);
    CHECK(rho <= op + slack);
    CHECK(op <= fro + slack);
  }
}

TEST_CASE("condition number basics") {
  CHECK(condition_number(Matrix::identity(4)) == doctest::Approx(1.0));
  CHECK(condition_number(Matrix{{4, 0}, {0, 1}}, true) == doctest::Approx(4.0));
  CHECK_THROWS_AS(condition_number(Matrix{{1, 1}, {1, 1}}), SingularMatrixError);
  CHECK_THROWS_AS(condition_number(Matrix{{1, 0}, {0, -2}}, true), NonSpdError);
}

TEST_CASE("condition of the SPD square root squares to the condition") {
  for (std::uint64_t seed = 1; seed <= 15; ++seed) {
    const Matrix s = random_spd(5, seed, 0.05);
    const Matrix r = sqrt_spd(s);
    const double k_root = condition_number(r, true);
    CHECK(rel_err(k_root * k_root, condition_number(s, true)) < 1e-8);
  }
}

TEST_CASE("condition number is inversion invariant for SPD input") {
  for (std::uint64_t seed = 21; seed <= 35; ++seed) {
    const Matrix s = random_spd(4, seed, 0.05);
    CHECK(rel_err(condition_number(s, true), condition_number(inverse(s), true)) <
          1e-8);
  }
}

TEST_CASE("sqrt_spd basics and reconstruction") {
  CHECK(max_abs_diff(sqrt_spd(Matrix::identity(3)), Matrix::identity(3)) < 1e-14);
  const Matrix r = sqrt_spd(Matrix{{4, 0}, {0, 9}});
  CHECK(r(0, 0) == doctest::Approx(2.0));
  CHECK(r(1, 1) == doctest::Approx(3.0));
  for (std::uint64_t seed = 50; seed < 70; ++seed) {
    const Matrix s = random_spd(6, seed);
    const Matrix root = sqrt_spd(s);
    CHECK(frobenius_norm(root * root - s) <= 1e-10 * frobenius_norm(s));
    CHECK(is_symmetric(root));
  }
  CHECK_THROWS_AS(sqrt_spd(Matrix{{1, 0}, {0, -4}}), NonSpdError);
  CHECK_THROWS_AS(sqrt_spd(Matrix{{1, 2}, {0, 1}}), NonSpdError);
}

TEST_CASE("eigenvalues rejects non-square input") {
  CHECK_THROWS_AS(eigenvalues(Matrix(2, 3)), DimensionError);
}

TEST_CASE("eigen_basis reconstructs diagonalizable matrices") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const std::size_t n = 2 + seed % 4;
    const Matrix a = randn(n, n, seed);
    const EigenBasis basis = eigen_basis(a);
    // every (lambda, v) pair satisfies A v = lambda v
    for (std::size_t k = 0; k < n; ++k) {
      double resid = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        std::complex<double> av(0.0, 0.0);
        for (std::size_t j = 0; j < n; ++j) av += a(i, j) * basis.vec(j, k);
        resid = std::max(resid, std::abs(av - basis.values[k] * basis.vec(i, k)));
      }
      CHECK(resid < 1e-8 * std::max(1.0, frobenius_norm(a)));
    }
  }
}

TEST_CASE("eigen_basis rejects a defective matrix") {
  // Jordan block: one eigenvector short.
  CHECK_THROWS_AS(eigen_basis(Matrix{{1.0, 1.0}, {0.0, 1.0}}), DefectiveMatrixError);
}

}  // TEST_SUITE
