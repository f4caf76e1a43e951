#include <catch2/catch.hpp>

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "atmen/errors.hpp"
#include "atmen/group.hpp"
#include "atmen/kernel.hpp"
#include "atmen/measure.hpp"

using namespace atmen;
using kernels::Kernel;

namespace {

Kernel scalar_power_kernel(const std::vector<double>& points, double p) {
  const measure::FiniteMeasureSpace line({1.0});
  std::vector<measure::LpVector> pts;
  pts.reserve(points.size());
  for (double x : points) pts.emplace_back(line, std::vector<double>{x}, p);
  return kernels::lp_distance_kernel(pts, p);
}

}  // namespace

TEST_CASE("kernel construction validates shape and symmetry") {
  Eigen::MatrixXd bad(2, 2);
  bad << 0, 1, 2, 0;
  CHECK_THROWS_AS(Kernel({"x", "y"}, bad), input_error);
  CHECK_THROWS_AS(Kernel({"x"}, Eigen::MatrixXd::Zero(2, 2)), input_error);
  CHECK_THROWS_AS(Kernel({}, Eigen::MatrixXd(0, 0)), input_error);
  CHECK_NOTHROW(Kernel({"x", "y"}, Eigen::MatrixXd::Zero(2, 2)));
}

TEST_CASE("squared distances on the line are degenerately CND") {
  const auto K = scalar_power_kernel({0.0, 1.0, 2.0}, 2.0);
  const auto r = kernels::cnd_test(K);
  CHECK(r.is_cnd);
  // For K(x,y) = |x-y|^2, c^T K c = -2 (sum_i c_i x_i)^2 on mean-zero c,
  // so the extremal value over unit mean-zero c is exactly 0, attained by
  // any direction annihilating the coordinates (here +-(1,-2,1)/sqrt(6)).
  CHECK(r.extremal_value == Approx(0.0).margin(1e-9));
  REQUIRE(r.witness.size() == 3);
  double sum = 0.0;
  double norm2 = 0.0;
  double moment = 0.0;
  for (std::size_t i = 0; i < r.witness.size(); ++i) {
    sum += r.witness[i];
    norm2 += r.witness[i] * r.witness[i];
    moment += r.witness[i] * static_cast<double>(i);
  }
  CHECK(sum == Approx(0.0).margin(1e-9));
  CHECK(norm2 == Approx(1.0).margin(1e-9));
  CHECK(moment == Approx(0.0).margin(1e-7));
}

TEST_CASE("cubic distances fail with the derived witness") {
  const auto K = scalar_power_kernel({0.0, 1.0, 2.0, 3.0}, 3.0);
  const auto r = kernels::cnd_test(K);
  CHECK_FALSE(r.is_cnd);
  CHECK(r.extremal_value == Approx(5.0).margin(1e-6));  // (1,-1,-1,1)/2 gives +5
  REQUIRE(r.witness.size() == 4);
  for (double c : r.witness) CHECK(std::abs(c) == Approx(0.5).margin(1e-6));
  CHECK(r.witness[0] * r.witness[3] > 0);
  CHECK(r.witness[1] * r.witness[2] > 0);
  CHECK(r.witness[0] * r.witness[1] < 0);
  CHECK(r.verdict() == "not-CND");

  const auto r25 = kernels::cnd_test(scalar_power_kernel({0.0, 1.0, 2.0, 3.0}, 2.5));
  CHECK_FALSE(r25.is_cnd);
  CHECK(r25.extremal_value > 0.0);
}

TEST_CASE("single-point kernels are trivially CND") {
  const auto r = kernels::cnd_test(Kernel({"x"}, Eigen::MatrixXd::Zero(1, 1)));
  CHECK(r.is_cnd);
  CHECK(r.witness == std::vector<double>{0.0});
}

TEST_CASE("cnd verdict is invariant under relabeling") {
  const auto K = scalar_power_kernel({0.0, 1.0, 2.0, 3.0}, 3.0);
  // reverse the point order
  Eigen::MatrixXd m(4, 4);
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) m(i, j) = K.matrix()(3 - i, 3 - j);
  }
  const auto r1 = kernels::cnd_test(K);
  const auto r2 = kernels::cnd_test(Kernel({"3", "2", "1", "0"}, m));
  CHECK(r1.is_cnd == r2.is_cnd);
  CHECK(r1.extremal_value == Approx(r2.extremal_value).margin(1e-9));
}

TEST_CASE("power transform: domain checks and closure") {
  const auto K = kernels::random_cnd_kernel(8, 3, 2024);
  CHECK_THROWS_AS(kernels::power_transform(K, 0.0), input_error);
  CHECK_THROWS_AS(kernels::power_transform(K, 1.0), input_error);
  CHECK_THROWS_AS(kernels::power_transform(K, 1.3), input_error);
  CHECK(kernels::power_transform(K, 1.0, /*allow_identity=*/true).matrix() == K.matrix());

  for (const double alpha : {0.3, 0.7}) {
    const auto r = kernels::cnd_test(kernels::power_transform(K, alpha));
    CHECK(r.is_cnd);
  }

  // (K^a)^b = K^{ab} entrywise
  const auto Kab = kernels::power_transform(kernels::power_transform(K, 0.6), 0.5);
  const auto Kba = kernels::power_transform(K, 0.3);
  CHECK((Kab.matrix() - Kba.matrix()).cwiseAbs().maxCoeff() <= 1e-12);

  Eigen::MatrixXd neg(2, 2);
  neg << 0, -1, -1, 0;
  CHECK_THROWS_WITH(kernels::power_transform(Kernel({"u", "v"}, neg), 0.5),
                    Catch::Contains("u"));
}

TEST_CASE("schoenberg duality for the exponential family") {
  const auto K = scalar_power_kernel({0.0, 1.0, 2.0}, 2.0);
  for (const double t : {0.1, 1.0, 10.0}) {
    const auto r = kernels::exp_kernel_test(K, t);
    CHECK(r.passed);
    CHECK(r.shifted.is_cnd);
    CHECK(r.exp_psd);
    CHECK(r.exp_min_eigenvalue >= r.psd_threshold);
  }
  CHECK_THROWS_AS(kernels::exp_kernel_test(K, 0.0), input_error);
  CHECK_THROWS_AS(kernels::exp_kernel_test(K, -1.0), input_error);
}

TEST_CASE("frullani quadrature reproduces fractional powers") {
  CHECK(kernels::frullani_power(4.0, 0.5) == Approx(2.0).epsilon(1e-6));
  CHECK(kernels::frullani_power(1.0, 0.25) == Approx(1.0).epsilon(1e-6));
  for (const double x : {0.1, 1.0, 4.0, 10.0}) {
    for (const double alpha : {0.25, 0.5, 0.75}) {
      CHECK(kernels::frullani_power(x, alpha) == Approx(std::pow(x, alpha)).epsilon(1e-6));
    }
  }
  // the subordination constant at alpha = 1/2 is 1/(2 sqrt(pi))
  CHECK(0.5 / std::tgamma(0.5) == Approx(0.28209479177387814).epsilon(1e-12));

  CHECK_THROWS_AS(kernels::frullani_power(-1.0, 0.5), input_error);
  CHECK_THROWS_AS(kernels::frullani_power(1.0, 1.0), input_error);
  CHECK_THROWS_AS(kernels::frullani_power(1.0, 0.0), input_error);
}

TEST_CASE("random kernels are reproducible and CND") {
  const auto a = kernels::random_cnd_kernel(10, 2, 777);
  const auto b = kernels::random_cnd_kernel(10, 2, 777);
  CHECK(a.matrix() == b.matrix());
  const auto c = kernels::random_cnd_kernel(10, 2, 778);
  CHECK(a.matrix() != c.matrix());
  CHECK(kernels::cnd_test(a).is_cnd);
}

TEST_CASE("word-length functions induce kernels over balls") {
  const auto spec = groups::GroupSpec::parse("Z");
  const auto big = groups::ball(spec, 6);
  const auto small = groups::ball(spec, 3);
  const auto psi = kernels::word_length_function(big);
  psi.check_symmetry();
  const auto K = kernels::function_to_kernel(psi, small);
  REQUIRE(K.size() == 7);
  // K(i, j) = |i - j| once rows are matched through the labels
  const auto at = [&](const std::string& t) {
    return static_cast<Eigen::Index>(*small.find(groups::parse_element(spec, t)));
  };
  CHECK(K.matrix()(at("(3)"), at("(-3)")) == 6.0);
  CHECK(K.matrix()(at("(2)"), at("(2)")) == 0.0);
  CHECK(K.matrix()(at("(1)"), at("(-2)")) == 3.0);

  // the kernel needs psi on products of ball elements
  const auto shallow = kernels::word_length_function(small);
  CHECK_THROWS_AS(kernels::function_to_kernel(shallow, small), input_error);

  // inverse-asymmetric functions are rejected
  kernels::CndFunction skew{spec, {}};
  for (const auto& g : big.elements) skew.values[groups::to_token(g)] = 0.0;
  skew.values["(1)"] = 1.0;
  CHECK_THROWS_AS(skew.check_symmetry(), input_error);
}
