#include <catch2/catch.hpp>

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "atmen/construction.hpp"
#include "atmen/errors.hpp"
#include "atmen/group.hpp"
#include "atmen/measure.hpp"
#include "atmen/rational.hpp"

using namespace atmen;
using construction::majority_discrepancy;
using construction::majority_measure;

namespace {

/// Independent oracle: enumerate every configuration of the union of the
/// two majority windows and count where the majorities disagree.
Rational brute_discrepancy(long n, const std::vector<long long>& shift) {
  std::map<std::vector<long long>, int> index;
  auto window_cells = [&](const std::vector<long long>& offset) {
    std::vector<std::vector<long long>> cells{{}};
    for (std::size_t d = 0; d < shift.size(); ++d) {
      std::vector<std::vector<long long>> next;
      for (const auto& c : cells) {
        for (long x = 0; x < n; ++x) {
          auto cc = c;
          cc.push_back(offset[d] + x);
          next.push_back(std::move(cc));
        }
      }
      cells = std::move(next);
    }
    std::vector<int> ids;
    ids.reserve(cells.size());
    for (auto& c : cells) {
      ids.push_back(index.emplace(std::move(c), static_cast<int>(index.size())).first->second);
    }
    return ids;
  };
  const auto w1 = window_cells(std::vector<long long>(shift.size(), 0));
  const auto w2 = window_cells(shift);
  const int bits = static_cast<int>(index.size());
  REQUIRE(bits <= 20);
  const auto t = static_cast<int>((w1.size() + 1) / 2);
  long long disagreements = 0;
  for (std::uint64_t cfg = 0; cfg < (std::uint64_t{1} << bits); ++cfg) {
    int ones1 = 0;
    for (int id : w1) ones1 += static_cast<int>((cfg >> id) & 1u);
    int ones2 = 0;
    for (int id : w2) ones2 += static_cast<int>((cfg >> id) & 1u);
    if ((ones1 >= t) != (ones2 >= t)) ++disagreements;
  }
  return Rational(disagreements, BigInt(1) << static_cast<unsigned>(bits));
}

}  // namespace

TEST_CASE("majority sets have measure exactly one half") {
  for (const long n : {1L, 3L, 5L, 9L}) {
    CHECK(majority_measure(n, 1) == Rational(1, 2));
  }
  CHECK(majority_measure(3, 2) == Rational(1, 2));
  CHECK(majority_measure(5, 2) == Rational(1, 2));
  CHECK_THROWS_AS(majority_measure(2, 1), input_error);
  CHECK_THROWS_AS(majority_measure(-1, 1), input_error);
  CHECK_THROWS_AS(majority_measure(3, 0), input_error);
}

TEST_CASE("discrepancies match the hand-derived table") {
  CHECK(majority_discrepancy(1, {1}) == Rational(1, 2));
  CHECK(majority_discrepancy(3, {1}) == Rational(1, 4));
  CHECK(majority_discrepancy(3, {2}) == Rational(3, 8));
  CHECK(majority_discrepancy(3, {3}) == Rational(1, 2));
  CHECK(majority_discrepancy(5, {1}) == Rational(3, 16));
  CHECK(majority_discrepancy(5, {2}) == Rational(9, 32));
  CHECK(majority_discrepancy(7, {1}) == Rational(5, 32));
  CHECK(majority_discrepancy(9, {1}) == Rational(35, 256));
  CHECK(majority_discrepancy(9, {4}) == Rational(625, 2048));
  // two-dimensional windows
  CHECK(majority_discrepancy(3, {1, 0}) == Rational(265, 1024));
  CHECK(majority_discrepancy(3, {1, 1}) == Rational(1423, 4096));

  CHECK(majority_discrepancy(3, {0}) == Rational(0));       // identical windows
  CHECK(majority_discrepancy(3, {5}) == Rational(1, 2));    // disjoint windows
  CHECK(majority_discrepancy(9, {-4}) == majority_discrepancy(9, {4}));
  CHECK_THROWS_AS(majority_discrepancy(4, {1}), input_error);
  CHECK_THROWS_AS(majority_discrepancy(3, {}), input_error);
}

TEST_CASE("discrepancies match brute-force enumeration") {
  for (const long n : {1L, 3L, 5L}) {
    for (long long s = 1; s <= n; ++s) {
      INFO("n = " << n << ", shift = " << s);
      CHECK(majority_discrepancy(n, {s}) == brute_discrepancy(n, {s}));
    }
  }
  CHECK(majority_discrepancy(9, {4}) == brute_discrepancy(9, {4}));
  const std::vector<std::vector<long long>> shifts2d{{1, 0}, {1, 1}, {2, 1}, {2, 2}, {3, 2}};
  for (const auto& s : shifts2d) {
    INFO("shift = (" << s[0] << ", " << s[1] << ")");
    CHECK(majority_discrepancy(3, s) == brute_discrepancy(3, s));
  }
}

TEST_CASE("discrepancy grows with the shift and saturates") {
  Rational prev(0);
  for (long long s = 0; s <= 9; ++s) {
    const auto d = majority_discrepancy(9, {s});
    CHECK(d >= prev);
    prev = d;
  }
  CHECK(prev == Rational(1, 2));
}

TEST_CASE("measured escape radii") {
  CHECK(construction::measure_escape_radius(1, 1) == 0);
  CHECK(construction::measure_escape_radius(3, 1) == 2);
  CHECK(construction::measure_escape_radius(5, 1) == 4);
  CHECK(construction::measure_escape_radius(9, 1) == 8);
  CHECK(construction::measure_escape_radius(3, 2) == 4);  // (2,2) passes, every length-5 shift is disjoint
}

TEST_CASE("block skeletons carry the separation target") {
  const auto b = construction::build_block(5, 1.5);
  CHECK(b.n == 5);
  CHECK(b.delta == std::pow(2.0, -1.5));
  CHECK(b.escape_radius == 4);
  CHECK(b.gauge_factor() == std::pow(2.0, -0.5));
  CHECK_THROWS_AS(construction::build_block(4, 1.5), input_error);
  CHECK_THROWS_AS(construction::build_block(5, 0.0), input_error);
}

TEST_CASE("mixing table pairs each discrepancy with the correlation") {
  const auto rows = construction::mixing_decay(3, {{1}, {2}, {3}});
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].inner == Rational(1, 8));
  CHECK(rows[1].inner == Rational(1, 16));
  CHECK(rows[2].inner == Rational(0));
  for (const auto& r : rows) {
    CHECK(r.inner == Rational(1, 4) - r.discrepancy / 2);
  }
}

TEST_CASE("schedule selection finds the minimal odd windows") {
  const auto spec = groups::GroupSpec::parse("Z");
  const auto schedule = construction::select_block_schedule({0.1, 0.05, 0.02}, 1.5, spec);
  REQUIRE(schedule.blocks.size() == 3);
  CHECK(schedule.blocks[0].n == 9);
  CHECK(schedule.blocks[1].n == 73);
  CHECK(schedule.blocks[2].n == 701);
  const double factor = std::pow(2.0, -0.5);
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(schedule.blocks[k].calibration_radius == static_cast<long>(k + 1));
    CHECK(schedule.blocks[k].near_invariance <= schedule.eps[k]);
  }
  CHECK(schedule.blocks[0].near_invariance == factor * to_double(Rational(35, 256)));
  // minimality: the next odd window down misses the bound
  CHECK(factor * to_double(construction::detail::worst_discrepancy(7, 1, spec)) > 0.1);
  CHECK(factor * to_double(construction::detail::worst_discrepancy(71, 2, spec)) > 0.05);

  CHECK_THROWS_AS(construction::select_block_schedule({}, 1.5, spec), input_error);
  CHECK_THROWS_AS(construction::select_block_schedule({0.1, 0.1}, 1.5, spec), input_error);
  CHECK_THROWS_AS(construction::select_block_schedule({-0.1}, 1.5, spec), input_error);
  CHECK_THROWS_AS(construction::select_block_schedule({0.1}, 1.5, groups::GroupSpec::parse("F2")),
                  input_error);
  CHECK_THROWS_WITH(construction::select_block_schedule({1e-9}, 1.5, spec),
                    Catch::Contains("best achievable"));
}

TEST_CASE("assembly sums exact tables and materializes small windows") {
  const auto spec = groups::GroupSpec::parse("Z");
  const std::vector<construction::BlockData> blocks{construction::build_block(3, 1.5),
                                                    construction::build_block(5, 1.5)};
  const auto tc = construction::assemble_cocycle(spec, blocks, 1.5, 3);
  CHECK(tc.radius == 3);
  CHECK(tc.materialize_radius == 3);
  CHECK_NOTHROW(tc.psi.check_symmetry());
  // psi(g) = 2^{p-2} (disc_3(g) + disc_5(g)), one rounding at the end
  CHECK(tc.psi.values.at("(1)") == std::pow(2.0, -0.5) * to_double(Rational(7, 16)));
  CHECK(tc.psi.values.at("(0)") == 0.0);

  REQUIRE(tc.materialized.size() == 2);
  CHECK(tc.materialized[0].n == 3);
  CHECK(tc.materialized[0].torus_side == 9);
  CHECK(tc.materialized[0].configs == 512);
  CHECK(tc.materialized[1].n == 5);
  CHECK(tc.materialized[1].configs == 2048);
  for (const auto& mat : tc.materialized) {
    CHECK(mat.max_bridge_error <= 1e-12);
    CHECK(mat.w.size() == mat.configs);
  }

  // duplicate windows are materialized once
  const std::vector<construction::BlockData> dup{construction::build_block(3, 1.5),
                                                 construction::build_block(3, 1.5)};
  CHECK(construction::assemble_cocycle(spec, dup, 1.5, 2).materialized.size() == 1);

  const auto none = construction::assemble_cocycle(spec, blocks, 1.5, 3,
                                                   construction::MaterializePolicy::Never);
  CHECK(none.materialized.empty());

  CHECK_THROWS_AS(construction::assemble_cocycle(spec, blocks, 1.5, 2,
                                                 construction::MaterializePolicy::Auto, 3),
                  input_error);
  CHECK_THROWS_AS(construction::assemble_cocycle(spec, {}, 1.5, 2), input_error);
  const std::vector<construction::BlockData> big{construction::build_block(41, 1.5)};
  CHECK_THROWS_AS(construction::assemble_cocycle(spec, big, 1.5, 3,
                                                 construction::MaterializePolicy::Always),
                  resource_error);
}

TEST_CASE("materialized block vectors realize the exact correlations") {
  const auto spec = groups::GroupSpec::parse("Z");
  const auto mat = construction::detail::materialize_block(spec, 3, 2.0, 3);
  const auto& weights = mat.action.rep.carrier.weights();
  const auto& v = mat.w;
  // v takes the two values +-1/2, so every sum below is exact dyadic arithmetic
  for (double x : v) CHECK(std::abs(x) == 0.5);

  const auto inner_with_translate = [&](long shift) {
    const auto g = groups::parse_element(spec, "(" + std::to_string(shift) + ")");
    const auto moved = mat.action.rep.at(g).apply(v);
    double acc = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) acc += weights[i] * v[i] * moved[i];
    return acc;
  };
  CHECK(inner_with_translate(1) == to_double(Rational(1, 8)));   // 1/4 - disc/2, disc = 1/4
  CHECK(inner_with_translate(2) == to_double(Rational(1, 16)));  // disc = 3/8
  CHECK(inner_with_translate(3) == 0.0);                         // disjoint windows

  // at disjoint windows the distance is 1/sqrt(2) = sqrt(2) ||v||_2
  const double norm_v = measure::lp_gauge(weights, v, 2.0);
  CHECK(norm_v == 0.5);
  const auto g3 = groups::parse_element(spec, "(3)");
  CHECK(measure::lp_gauge(weights, mat.action.cocycle_at(g3), 2.0) == std::sqrt(0.5));
}

TEST_CASE("closed-form profile grows strictly below saturation") {
  const auto spec = groups::GroupSpec::parse("Z");
  const std::vector<construction::BlockData> blocks{construction::build_block(3, 1.5),
                                                    construction::build_block(5, 1.5)};
  const auto tc = construction::assemble_cocycle(spec, blocks, 1.5, 3,
                                                 construction::MaterializePolicy::Never);
  const auto profile = construction::closed_form_profile(tc, 3);
  REQUIRE(profile.rows.size() == 3);
  CHECK(profile.convention == "norm");
  CHECK(profile.strictly_increasing());
  CHECK(profile.rows[0].min_gauge ==
        std::pow(std::pow(2.0, -0.5) * to_double(Rational(7, 16)), 1.0 / 1.5));
  CHECK_THROWS_AS(construction::closed_form_profile(tc, 4), input_error);
  CHECK_THROWS_AS(construction::closed_form_profile(tc, 0), input_error);
}

TEST_CASE("certification passes at desk scale") {
  const auto spec = groups::GroupSpec::parse("Z");
  const auto report = construction::construct_and_certify(spec, 1.5, 2, {0.4, 0.2});
  CHECK(report.passed);
  CHECK(report.failed_stage.empty());
  REQUIRE(report.blocks.size() == 2);
  CHECK(report.blocks[0].n == 1);
  CHECK(report.blocks[1].n == 5);
  CHECK_FALSE(report.p_outside_theorem_range);
  CHECK(report.profile_strictly_increasing);
  CHECK(report.cnd.is_cnd);
  REQUIRE(report.materialized.size() == 2);
  for (const auto& checks : report.materialized) {
    CHECK(checks.isometry.passed);
    CHECK(checks.cocycle.passed);
    CHECK(checks.bridge_error <= report.tolerances.bridge);
  }
}

TEST_CASE("saturated schedules fail the properness stage honestly") {
  const auto spec = groups::GroupSpec::parse("Z");
  // a single unit window saturates immediately: flat profile, honest failure
  const auto report = construction::construct_and_certify(spec, 1.5, 2, {0.4});
  CHECK_FALSE(report.passed);
  CHECK(report.failed_stage == "properness_profile");
  CHECK(report.diagnostic.find("saturated") != std::string::npos);
}

TEST_CASE("certification rejects out-of-range inputs with the stage name") {
  const auto spec = groups::GroupSpec::parse("Z");
  CHECK_THROWS_WITH(construction::construct_and_certify(spec, 2.5, 2, {0.4, 0.2}),
                    Catch::Contains("stage validate"));
  CHECK_THROWS_WITH(construction::construct_and_certify(spec, 2.0, 2, {0.4, 0.2}),
                    Catch::Contains("(0,2)"));
  CHECK_THROWS_WITH(construction::construct_and_certify(spec, 1.5, 0, {0.4}),
                    Catch::Contains("radius"));
  CHECK_THROWS_WITH(
      construction::construct_and_certify(groups::GroupSpec::parse("F2"), 1.5, 2, {0.4, 0.2}),
      Catch::Contains("abelian translation structure"));
}

TEST_CASE("the machinery range below one is flagged, not rejected") {
  const auto spec = groups::GroupSpec::parse("Z");
  const auto report = construction::construct_and_certify(spec, 0.9, 1, {0.4});
  CHECK(report.passed);
  CHECK(report.p_outside_theorem_range);
  CHECK(report.profile.convention == "power_sum");
}
