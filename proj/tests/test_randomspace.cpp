#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <boost/math/special_functions/beta.hpp>

#include "gpcsense/error.hpp"
#include "gpcsense/randomspace.hpp"
#include "helpers/test_util.hpp"

using namespace gpcsense;

namespace {

ParameterSpace seam_space(std::uint64_t seed) {
  return ParameterSpace({{"brightness", 1, 1, 0, 2}, {"rotation", 1, 1, -30, 30}, {"tilt", 1, 1, -20, 20}}, seed);
}

}  // namespace

TEST_CASE("lhs_unit places one point per stratum in every column") {
  for (std::size_t n : {1u, 2u, 4u, 17u, 250u}) {
    for (std::size_t d : {1u, 3u, 6u}) {
      const auto design = lhs_unit(n, d, 1234 + n * 10 + d);
      REQUIRE(design.rows() == static_cast<Eigen::Index>(n));
      for (Eigen::Index j = 0; j < design.cols(); ++j) {
        std::vector<std::size_t> strata;
        for (Eigen::Index i = 0; i < design.rows(); ++i) {
          const double u = design(i, j);
          REQUIRE(u >= 0.0);
          REQUIRE(u < 1.0);
          strata.push_back(static_cast<std::size_t>(std::floor(n * u)));
        }
        std::sort(strata.begin(), strata.end());
        for (std::size_t k = 0; k < n; ++k) CHECK(strata[k] == k);
      }
    }
  }
}

TEST_CASE("lhs_unit quartiles for n = 4") {
  const auto design = lhs_unit(4, 1, 99);
  std::vector<double> column(design.data(), design.data() + 4);
  std::sort(column.begin(), column.end());
  for (int k = 0; k < 4; ++k) {
    CHECK(column[k] >= k / 4.0);
    CHECK(column[k] < (k + 1) / 4.0);
  }
}

TEST_CASE("lhs_unit determinism and seed sensitivity") {
  CHECK(lhs_unit(50, 3, 5) == lhs_unit(50, 3, 5));
  CHECK(lhs_unit(50, 3, 5) != lhs_unit(50, 3, 6));
  const auto design = lhs_unit(50, 2, 5);
  CHECK(design.col(0) != design.col(1));
  CHECK_THROWS_AS(lhs_unit(0, 2, 1), ValidationError);
  CHECK_THROWS_AS(lhs_unit(3, 0, 1), ValidationError);
}

TEST_CASE("beta_icdf reference values") {
  CHECK(beta_icdf(0.25, 1, 1) == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(beta_icdf(0.25, 2, 1) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(beta_icdf(0.5, 3, 3) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(beta_icdf(0.0, 2, 5) == 0.0);
  CHECK(beta_icdf(1.0, 2, 5) == 1.0);
}

TEST_CASE("beta_icdf against closed-form inverses") {
  for (int k = 0; k <= 200; ++k) {
    const double u = k / 200.0;
    CHECK(std::abs(beta_icdf(u, 2, 1) - std::sqrt(u)) <= 1e-12);
    CHECK(std::abs(beta_icdf(u, 1, 2) - (1.0 - std::sqrt(1.0 - u))) <= 1e-12);
  }
}

TEST_CASE("beta_icdf inverts the regularized incomplete Beta function") {
  for (const auto [p, q] : {std::pair{0.5, 0.5}, std::pair{2.0, 5.0}, std::pair{7.0, 1.5}, std::pair{0.3, 4.0}}) {
    for (int k = 1; k < 100; ++k) {
      const double u = k / 100.0;
      const double x = beta_icdf(u, p, q);
      CHECK(boost::math::ibeta(p, q, x) == doctest::Approx(u).epsilon(1e-10));
    }
  }
  CHECK_THROWS_AS(beta_icdf(1.5, 1, 1), DomainError);
  CHECK_THROWS_AS(beta_icdf(0.5, 0, 1), DomainError);
}

TEST_CASE("ParameterSpace validation") {
  CHECK_THROWS_AS(ParameterSpace({}, 1), ValidationError);
  CHECK_THROWS_AS(ParameterSpace({{"a", 1, 1, 0, 1}, {"a", 1, 1, 0, 1}}, 1), ValidationError);
  CHECK_THROWS_AS(ParameterSpace({{"a", 1, 1, 1, 1}}, 1), ValidationError);
  CHECK_THROWS_AS(ParameterSpace({{"a", 0, 1, 0, 1}}, 1), ValidationError);
  CHECK_THROWS_AS(ParameterSpace({{"a", 1, -1, 0, 1}}, 1), ValidationError);
  const auto space = seam_space(1);
  CHECK(space.index_of("tilt") == 2);
  CHECK_THROWS_AS(space.index_of("zoom"), ValidationError);
}

TEST_CASE("sample maps LHS uniforms through the Beta inverse onto the limits") {
  const auto space = seam_space(42);
  const auto samples = sample(space, 64);
  const auto unit = lhs_unit(64, 3, 42);
  for (Eigen::Index i = 0; i < 64; ++i) {
    for (Eigen::Index j = 0; j < 3; ++j) {
      const auto& param = space.parameter(static_cast<std::size_t>(j));
      CHECK(samples.values(i, j) == doctest::Approx(param.lower + (param.upper - param.lower) * unit(i, j)).epsilon(1e-13));
    }
  }
}

TEST_CASE("uniform midpoint and boundary") {
  // The sampling map evaluated at u = 0.5 and u = 0.
  CHECK(0.0 + 2.0 * beta_icdf(0.5, 1, 1) == 1.0);
  CHECK(-30.0 + 60.0 * beta_icdf(0.0, 1, 1) == -30.0);
}

TEST_CASE("seam inspection limits: n = 1000 samples stay within limits") {
  const auto space = seam_space(2024);
  const auto samples = sample(space, 1000);
  REQUIRE(samples.rows() == 1000);
  for (std::size_t j = 0; j < 3; ++j) {
    const auto& param = space.parameter(j);
    CHECK(samples.values.col(static_cast<Eigen::Index>(j)).minCoeff() >= param.lower);
    CHECK(samples.values.col(static_cast<Eigen::Index>(j)).maxCoeff() <= param.upper);
  }
}

TEST_CASE("Beta(2, 5) sample mean within three standard errors") {
  const ParameterSpace space({{"x", 2, 5, 0, 1}}, 77);
  const std::size_t n = 100000;
  const auto samples = sample(space, n);
  const double mean = samples.values.col(0).mean();
  const double p = 2, q = 5;
  const double variance = p * q / ((p + q) * (p + q) * (p + q + 1));
  const double stderr_ = std::sqrt(variance / n);
  CHECK(std::abs(mean - p / (p + q)) <= 3 * stderr_);
}

TEST_CASE("standardize reference values") {
  const auto space = seam_space(1);
  const auto mid = standardize(space, std::vector<double>{1.0, 0.0, 0.0});
  CHECK(mid == std::vector<double>{0.0, 0.0, 0.0});
  const auto low = standardize(space, std::vector<double>{0.0, -30.0, -20.0});
  CHECK(low == std::vector<double>{-1.0, -1.0, -1.0});
  CHECK(standardize(space, std::vector<double>{1.5, 0.0, 0.0})[0] == 0.5);
  CHECK_THROWS_AS(standardize(space, std::vector<double>{2.5, 0.0, 0.0}), DomainError);
  CHECK_THROWS_AS(standardize(space, std::vector<double>{1.0, 0.0}), ValidationError);
}

TEST_CASE("standardize and destandardize round trip") {
  const auto space = seam_space(1);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const std::vector<double> t{u(rng), u(rng), u(rng)};
    const auto back = standardize(space, destandardize(space, t));
    for (std::size_t j = 0; j < 3; ++j) CHECK(std::abs(back[j] - t[j]) <= 1e-14);
  }
}

TEST_CASE("samples CSV is byte-identical for identical seeds and reads back exactly") {
  testutil::TempDir dir("samples");
  write_samples_csv(dir / "a.csv", sample(seam_space(11), 40), "abc123");
  write_samples_csv(dir / "b.csv", sample(seam_space(11), 40), "abc123");
  write_samples_csv(dir / "c.csv", sample(seam_space(12), 40), "abc123");
  CHECK(testutil::slurp(dir / "a.csv") == testutil::slurp(dir / "b.csv"));
  CHECK(testutil::slurp(dir / "a.csv") != testutil::slurp(dir / "c.csv"));

  std::string digest;
  const auto back = read_samples_csv(dir / "a.csv", &digest);
  CHECK(digest == "abc123");
  CHECK(back.names == std::vector<std::string>{"brightness", "rotation", "tilt"});
  CHECK(back.values == sample(seam_space(11), 40).values);
  CHECK(testutil::slurp(dir / "a.csv").rfind("# config_digest=abc123\nbrightness,rotation,tilt\n", 0) == 0);
}
