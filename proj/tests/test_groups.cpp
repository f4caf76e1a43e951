#include <catch2/catch.hpp>

#include "atmen/errors.hpp"
#include "atmen/group.hpp"

using namespace atmen;
using groups::GroupSpec;

TEST_CASE("group specs parse and print") {
  CHECK(GroupSpec::parse("Z").to_string() == "Z");
  CHECK(GroupSpec::parse("Z^2").to_string() == "Z^2");
  CHECK(GroupSpec::parse("F2").to_string() == "F2");
  CHECK(GroupSpec::parse("Z^2 x C3").to_string() == "Z^2 x C3");
  CHECK(GroupSpec::parse("F1 x Z x C6").to_string() == "F1 x Z x C6");
  CHECK(GroupSpec::parse(" Z  x  C4 ") == GroupSpec::parse("Z x C4"));

  CHECK_THROWS_AS(GroupSpec::parse(""), input_error);
  CHECK_THROWS_AS(GroupSpec::parse("Q5"), input_error);
  CHECK_THROWS_AS(GroupSpec::parse("F0"), input_error);
  CHECK_THROWS_AS(GroupSpec::parse("F27"), input_error);  // token alphabet is a..z
  CHECK_THROWS_AS(GroupSpec::parse("Zx"), input_error);
}

TEST_CASE("free group arithmetic reduces words") {
  const auto spec = GroupSpec::parse("F2");
  const auto g = groups::parse_element(spec, "ab");
  const auto h = groups::parse_element(spec, "BA");
  CHECK(groups::to_token(groups::multiply(g, h)) == "e");
  CHECK(groups::multiply(g, h) == groups::identity(spec));
  CHECK(groups::inverse(g) == h);
  CHECK(groups::word_length(g) == 2);

  const auto aBa = groups::parse_element(spec, "aBa");
  CHECK(groups::to_token(groups::multiply(aBa, groups::parse_element(spec, "Ab"))) == "a");
  CHECK(groups::word_length(groups::multiply(aBa, aBa)) == 6);  // aBaaBa

  CHECK_THROWS_AS(groups::parse_element(spec, "ac"), input_error);  // rank 2 has a, b only
  CHECK(groups::parse_element(spec, "e") == groups::identity(spec));
  CHECK(groups::parse_element(spec, "1") == groups::identity(spec));
}

TEST_CASE("abelian and cyclic arithmetic") {
  const auto z2 = GroupSpec::parse("Z^2");
  const auto v = groups::parse_element(z2, "(3,-4)");
  CHECK(groups::word_length(v) == 7);
  CHECK(groups::to_token(groups::inverse(v)) == "(-3,4)");
  CHECK(groups::to_token(groups::multiply(v, v)) == "(6,-8)");

  const auto c6 = GroupSpec::parse("C6");
  const auto r4 = groups::parse_element(c6, "4");
  CHECK(groups::word_length(r4) == 2);  // 4 = (-2) mod 6
  CHECK(groups::to_token(groups::multiply(r4, r4)) == "2");
  CHECK(groups::to_token(groups::inverse(r4)) == "2");
  CHECK(groups::parse_element(c6, "-2") == r4);

  const auto prod = GroupSpec::parse("Z x C4");
  const auto mixed = groups::parse_element(prod, "(2)|3");
  CHECK(groups::word_length(mixed) == 3);  // |2| + min(3, 1)
  CHECK(groups::to_token(groups::inverse(mixed)) == "(-2)|1");
  CHECK_THROWS_AS(groups::parse_element(prod, "(2)"), input_error);  // missing factor
  CHECK_THROWS_AS(groups::parse_element(z2, "(1)"), input_error);    // wrong arity
}

TEST_CASE("word length is a metric compatible with inversion") {
  for (const char* name : {"F2", "Z^2", "Z x C4"}) {
    const auto spec = GroupSpec::parse(name);
    const auto b = groups::ball(spec, 3);
    for (std::size_t i = 0; i < b.size(); i += 3) {
      const auto& g = b.elements[i];
      CHECK(groups::word_length(groups::inverse(g)) == groups::word_length(g));
      for (std::size_t j = 0; j < b.size(); j += 5) {
        const auto& h = b.elements[j];
        CHECK(groups::word_length(groups::multiply(g, h)) <=
              groups::word_length(g) + groups::word_length(h));
      }
    }
  }
}

TEST_CASE("ball sizes match closed forms") {
  const auto f2 = GroupSpec::parse("F2");
  // |B(r)| = 1 + 2(3^r - 1) in the rank-2 free group
  std::size_t expected = 1;
  long power = 1;
  for (long r = 0; r <= 5; ++r) {
    CHECK(groups::ball(f2, r).size() == expected);
    power *= 3;
    expected = 1 + 2 * static_cast<std::size_t>(power - 1);
  }

  const auto z = GroupSpec::parse("Z");
  for (long r = 0; r <= 6; ++r) CHECK(groups::ball(z, r).size() == 2 * static_cast<std::size_t>(r) + 1);

  // diamond: r^2 + (r+1)^2
  const auto z2 = GroupSpec::parse("Z^2");
  CHECK(groups::ball(z2, 4).size() == 41);

  const auto c3 = GroupSpec::parse("C3");
  CHECK(groups::ball(c3, 1).size() == 3);
  CHECK(groups::ball(c3, 5).size() == 3);  // saturates at the whole group
}

TEST_CASE("radius-1 ball of F2 is the generator star") {
  const auto b = groups::ball(GroupSpec::parse("F2"), 1);
  std::vector<std::string> tokens;
  for (const auto& g : b.elements) tokens.push_back(groups::to_token(g));
  // shortlex on signed letter indices: B = [-2] < A = [-1] < a = [1] < b = [2]
  CHECK(tokens == std::vector<std::string>{"e", "B", "A", "a", "b"});
}

TEST_CASE("ball ordering is shortlex and deterministic") {
  const auto spec = GroupSpec::parse("Z^2");
  const auto b1 = groups::ball(spec, 3);
  const auto b2 = groups::ball(spec, 3);
  REQUIRE(b1.size() == b2.size());
  for (std::size_t i = 0; i < b1.size(); ++i) CHECK(b1.elements[i] == b2.elements[i]);
  for (std::size_t i = 1; i < b1.size(); ++i) {
    CHECK(groups::word_length(b1.elements[i - 1]) <= groups::word_length(b1.elements[i]));
  }
  CHECK(b1.elements.front() == groups::identity(spec));

  // spheres partition the ball
  std::size_t total = 0;
  for (long r = 0; r <= 3; ++r) total += groups::sphere(b1, r).size();
  CHECK(total == b1.size());

  // nesting: ball(2) is a prefix-closed subset of ball(3)
  const auto small = groups::ball(spec, 2);
  for (const auto& g : small.elements) CHECK(b1.contains(g));
}

TEST_CASE("ball growth is capped") {
  CHECK_THROWS_AS(groups::ball(GroupSpec::parse("F2"), 12, 1000), resource_error);
}

TEST_CASE("token round trips") {
  for (const char* name : {"F2", "Z^2", "C5", "F1 x Z x C6"}) {
    const auto spec = GroupSpec::parse(name);
    for (const auto& g : groups::ball(spec, 2).elements) {
      CHECK(groups::parse_element(spec, groups::to_token(g)) == g);
    }
  }
}

TEST_CASE("generator lists dedup involutions") {
  CHECK(groups::generators(GroupSpec::parse("C2")).size() == 1);
  CHECK(groups::generators(GroupSpec::parse("C3")).size() == 2);
  CHECK(groups::generators(GroupSpec::parse("F2")).size() == 4);
  CHECK(groups::generators(GroupSpec::parse("Z^2")).size() == 4);
  CHECK(groups::ball(GroupSpec::parse("C2"), 1).size() == 2);
}
