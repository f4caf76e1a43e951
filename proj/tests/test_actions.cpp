#include <catch2/catch.hpp>

#include <cmath>
#include <string>
#include <vector>

#include "atmen/action.hpp"
#include "atmen/errors.hpp"
#include "atmen/group.hpp"
#include "atmen/measure.hpp"

using namespace atmen;
using actions::SignedPermutation;

namespace {

/// pi(k) rotates the n atoms by k steps; exact homomorphism of C_n.
actions::LinearRep rotation_rep(const groups::GroupSpec& spec, std::size_t n) {
  actions::LinearRep rep{spec, measure::FiniteMeasureSpace::uniform_probability(n), {}};
  for (const auto& g : groups::ball(spec, static_cast<long>(n)).elements) {
    const auto token = groups::to_token(g);
    const auto shift = static_cast<std::size_t>(std::stoul(token));
    SignedPermutation perm;
    perm.target.resize(n);
    perm.sign.assign(n, 1);
    for (std::size_t i = 0; i < n; ++i) perm.target[i] = (i + shift) % n;
    rep.assignment.emplace(token, std::move(perm));
  }
  return rep;
}

}  // namespace

TEST_CASE("signed permutation algebra") {
  SignedPermutation a{{1, 2, 0}, {1, -1, 1}};
  SignedPermutation b{{2, 0, 1}, {-1, 1, 1}};
  REQUIRE(a.is_bijection());
  REQUIRE(b.is_bijection());

  const std::vector<double> v{1.0, 2.0, 3.0};
  CHECK(b.apply(v) == std::vector<double>{2.0, 3.0, -1.0});
  // compose applies the right factor first
  CHECK(compose(a, b).apply(v) == a.apply(b.apply(v)));
  CHECK(compose(a.inverse(), a) == SignedPermutation::identity(3));
  CHECK(compose(a, a.inverse()) == SignedPermutation::identity(3));
  CHECK(a.inverse().apply(a.apply(v)) == v);

  SignedPermutation broken{{0, 0, 2}, {1, 1, 1}};
  CHECK_FALSE(broken.is_bijection());
}

TEST_CASE("rotation representation is isometric in every exponent") {
  const auto spec = groups::GroupSpec::parse("C6");
  const auto rep = rotation_rep(spec, 6);
  const auto b = groups::ball(spec, 3);
  for (const double p : {0.5, 1.0, 2.0, 3.0}) {
    const auto report = actions::verify_isometry(rep, p, b);
    INFO("p = " << p);
    CHECK(report.passed);
    CHECK(report.failures.empty());
    CHECK(report.pairs_checked == 36);  // all products stay in the full group
  }
}

TEST_CASE("weight-moving permutations are rejected with a named witness") {
  const auto spec = groups::GroupSpec::parse("C2");
  actions::LinearRep rep{spec, measure::FiniteMeasureSpace({1.0, 2.0}), {}};
  rep.assignment.emplace("0", SignedPermutation::identity(2));
  rep.assignment.emplace("1", SignedPermutation{{1, 0}, {1, 1}});
  const auto report = actions::verify_isometry(rep, 2.0, groups::ball(spec, 1));
  CHECK_FALSE(report.passed);
  REQUIRE_FALSE(report.failures.empty());
  CHECK(report.failures.front().find("moves atom") != std::string::npos);
}

TEST_CASE("non-homomorphic assignments are caught on pairs") {
  const auto spec = groups::GroupSpec::parse("C2");
  actions::LinearRep rep{spec, measure::FiniteMeasureSpace::uniform_probability(2), {}};
  rep.assignment.emplace("0", SignedPermutation::identity(2));
  // a signed swap squares to a sign flip, not to pi(0)
  rep.assignment.emplace("1", SignedPermutation{{1, 0}, {1, -1}});
  const auto report = actions::verify_isometry(rep, 2.0, groups::ball(spec, 1));
  CHECK_FALSE(report.passed);
  bool named = false;
  for (const auto& f : report.failures) {
    if (f.find("pi(1)pi(1)") != std::string::npos) named = true;
  }
  CHECK(named);
}

TEST_CASE("coboundaries satisfy the cocycle identity exactly") {
  const auto spec = groups::GroupSpec::parse("C6");
  const auto b = groups::ball(spec, 3);
  // integer-valued w keeps every telescoping difference exact
  const std::vector<double> w{5.0, -3.0, 2.0, 0.0, 7.0, 1.0};
  const auto action = actions::coboundary_action(rotation_rep(spec, 6), w, 1.5, b);
  const auto report = actions::verify_cocycle(action, b);
  CHECK(report.passed);
  CHECK(report.max_residual == 0.0);
  CHECK(report.pairs_checked == 36);
}

TEST_CASE("verification demands the cocycle on the whole ball") {
  const auto spec = groups::GroupSpec::parse("C6");
  const std::vector<double> w{5.0, -3.0, 2.0, 0.0, 7.0, 1.0};
  const auto action =
      actions::coboundary_action(rotation_rep(spec, 6), w, 2.0, groups::ball(spec, 1));
  CHECK_THROWS_WITH(actions::verify_cocycle(action, groups::ball(spec, 2)),
                    Catch::Contains("no value at element"));
}

TEST_CASE("tree cocycle realizes word length in every exponent") {
  for (const double p : {0.5, 1.5}) {
    const auto act = actions::tree_cocycle(2, p, 3);
    const auto spec = act.rep.spec;
    const auto b = groups::ball(spec, 3);
    const auto& weights = act.rep.carrier.weights();
    for (const auto& g : b.elements) {
      const double power = measure::pth_power_sum(weights, act.cocycle_at(g), p);
      CHECK(power == static_cast<double>(groups::word_length(g)));  // sums of exact ones
    }
    const auto coc = actions::verify_cocycle(act, b);
    CHECK(coc.passed);
    CHECK(coc.max_residual == 0.0);
    const auto iso = actions::verify_isometry(act.rep, p, b);
    CHECK(iso.passed);
  }
  CHECK_THROWS_AS(actions::tree_cocycle(0, 1.0, 2), input_error);
  CHECK_THROWS_AS(actions::tree_cocycle(2, 1.0, -1), input_error);
}

TEST_CASE("tree properness grows as the gauge convention dictates") {
  const auto act2 = actions::tree_cocycle(2, 2.0, 3);
  const auto prof2 = actions::properness_profile(act2, 3);
  REQUIRE(prof2.rows.size() == 3);
  CHECK(prof2.convention == "norm");
  CHECK(prof2.strictly_increasing());
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(prof2.rows[i].min_gauge == Approx(std::sqrt(static_cast<double>(i + 1))));
  }
  CHECK(prof2.rows[2].sphere_size == 36);

  const auto act_half = actions::tree_cocycle(2, 0.5, 3);
  const auto prof_half = actions::properness_profile(act_half, 3);
  CHECK(prof_half.convention == "power_sum");
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(prof_half.rows[i].min_gauge == static_cast<double>(i + 1));
  }

  CHECK_THROWS_AS(actions::properness_profile(act2, 0), input_error);
}

TEST_CASE("tree haagerup function is CND for p below 2") {
  const auto act = actions::tree_cocycle(2, 1.5, 4);
  const auto spec = act.rep.spec;
  const auto result = actions::haagerup_function(act, groups::ball(spec, 2));
  CHECK(result.report.is_cnd);
  CHECK(result.psi.values.at("ab") == 2.0);
  CHECK(result.psi.values.at("e") == 0.0);
  CHECK(result.kernel.size() == 17);

  const auto act2 = actions::tree_cocycle(2, 2.0, 1);
  CHECK_THROWS_AS(actions::haagerup_function(act2, groups::ball(spec, 0)), input_error);
}
