#include <catch2/catch.hpp>

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "atmen/defaults.hpp"
#include "atmen/embedding.hpp"
#include "atmen/errors.hpp"
#include "atmen/group.hpp"
#include "atmen/kernel.hpp"

using namespace atmen;

TEST_CASE("embeddings reproduce random CND kernels") {
  for (const unsigned seed : {11u, 12u, 13u}) {
    const auto K = kernels::random_cnd_kernel(10, 3, seed);
    const auto emb = embedding::gns_embed(K);
    CHECK(emb.gram_residual <= defaults::kGnsResidualTarget);
    CHECK(emb.labels == K.labels());
    CHECK(emb.dimension <= K.size() - 1);  // mean-zero Gram has a kernel direction
    REQUIRE(emb.coordinates.size() == K.size());
    for (const auto& row : emb.coordinates) CHECK(row.size() == emb.dimension);
  }
}

TEST_CASE("embeddings reproduce word-length kernels") {
  for (const char* name : {"Z", "Z^2", "F2"}) {
    const auto spec = groups::GroupSpec::parse(name);
    const auto psi = kernels::word_length_function(groups::ball(spec, 8));
    const auto K = kernels::function_to_kernel(psi, groups::ball(spec, 4));
    const auto emb = embedding::gns_embed(K);
    INFO(name);
    CHECK(emb.gram_residual <= defaults::kGnsResidualTarget);
  }
}

TEST_CASE("the zero kernel embeds to a single point") {
  const auto emb =
      embedding::gns_embed(kernels::Kernel({"a", "b", "c"}, Eigen::MatrixXd::Zero(3, 3)));
  CHECK(emb.dimension == 0);
  CHECK(emb.clamped == 3);
  CHECK(emb.gram_residual == 0.0);
}

TEST_CASE("a rejected kernel carries its witness") {
  Eigen::MatrixXd m(4, 4);
  const double xs[] = {0.0, 1.0, 2.0, 3.0};
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) m(i, j) = std::pow(std::abs(xs[i] - xs[j]), 3.0);
  }
  const kernels::Kernel cubic({"0", "1", "2", "3"}, m);
  CHECK_THROWS_AS(embedding::gns_embed(cubic), kernels::cnd_rejection);
  try {
    embedding::gns_embed(cubic);
    FAIL("expected rejection");
  } catch (const kernels::cnd_rejection& e) {
    CHECK(e.report.extremal_value == Approx(5.0).margin(1e-6));
    CHECK(e.report.witness.size() == 4);
  }
}

TEST_CASE("distance-type preconditions are enforced") {
  // CND (P annihilates the ones matrix) but the diagonal is not zero
  const kernels::Kernel ones({"u", "v"}, Eigen::MatrixXd::Ones(2, 2));
  CHECK_THROWS_WITH(embedding::gns_embed(ones), Catch::Contains("zero diagonal"));
}

TEST_CASE("escape profile over word length") {
  const auto spec = groups::GroupSpec::parse("Z");
  const auto psi = kernels::word_length_function(groups::ball(spec, 5));
  const auto rows = embedding::escape_profile(psi, {0, 1, 2, 3, 4, 5});
  REQUIRE(rows.size() == 6);
  CHECK(rows[0].sphere_size == 1);
  CHECK(rows[0].min_value == 0.0);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    CHECK(rows[i].radius == static_cast<long>(i));
    CHECK(rows[i].sphere_size == 2);  // +r and -r
    CHECK(rows[i].min_value == static_cast<double>(i));
  }
}

TEST_CASE("escape profile omits empty spheres of finite groups") {
  const auto spec = groups::GroupSpec::parse("C3");
  const auto psi = kernels::word_length_function(groups::ball(spec, 5));
  const auto rows = embedding::escape_profile(psi, {0, 1, 2, 3});
  REQUIRE(rows.size() == 2);  // C3 has no elements past word length 1
  CHECK(rows[1].radius == 1);
  CHECK(rows[1].sphere_size == 2);

  CHECK_THROWS_AS(embedding::escape_profile(psi, {}), input_error);
  CHECK_THROWS_AS(embedding::escape_profile(psi, {-1}), input_error);
}
