#include <stdexcept>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "ctbn/state_space.hpp"

using namespace ctbn;

TEST_CASE("mixed-radix encoding round-trips", "[state_space]") {
  StateSpace sp({2, 3, 2});
  REQUIRE(sp.size() == 12);
  REQUIRE(sp.component_count() == 3);

  // Component 1 is the most significant digit.
  REQUIRE(sp.encode(std::vector<int>{0, 0, 0}) == 0);
  REQUIRE(sp.encode(std::vector<int>{0, 0, 1}) == 1);
  REQUIRE(sp.encode(std::vector<int>{0, 1, 0}) == 2);
  REQUIRE(sp.encode(std::vector<int>{1, 0, 0}) == 6);
  REQUIRE(sp.encode(std::vector<int>{1, 2, 1}) == 11);

  for (StateIndex i = 0; i < sp.size(); ++i) {
    JointState s = sp.decode(i);
    REQUIRE(sp.encode(s) == i);
  }
}

TEST_CASE("strides match the big-endian layout", "[state_space]") {
  StateSpace sp({2, 3, 2});
  REQUIRE(sp.stride(0) == 6);
  REQUIRE(sp.stride(1) == 2);
  REQUIRE(sp.stride(2) == 1);

  // Changing one coordinate moves the index by that coordinate's stride.
  JointState s{1, 1, 0};
  StateIndex base = sp.encode(s);
  s[1] = 2;
  REQUIRE(sp.encode(s) - base == sp.stride(1));
}

TEST_CASE("odometer enumerates states in index order", "[state_space]") {
  StateSpace sp({2, 2, 3});
  JointState s(3, 0);
  StateIndex i = 0;
  do {
    REQUIRE(sp.encode(s) == i);
    ++i;
  } while (sp.next(s));
  REQUIRE(i == sp.size());
  REQUIRE(s == JointState(3, 0));  // wrapped around to the origin
}

TEST_CASE("trivial spaces behave", "[state_space]") {
  StateSpace empty(std::vector<int>{});
  REQUIRE(empty.size() == 1);
  REQUIRE(empty.encode(std::vector<int>{}) == 0);
  JointState nothing;
  REQUIRE_FALSE(empty.next(nothing));

  StateSpace single({4});
  REQUIRE(single.size() == 4);
  REQUIRE(single.decode(3) == JointState{3});
}

TEST_CASE("encode and decode reject bad input", "[state_space]") {
  StateSpace sp({2, 2});
  REQUIRE_THROWS_AS(sp.encode(std::vector<int>{0}), std::invalid_argument);
  REQUIRE_THROWS_AS(sp.encode(std::vector<int>{0, 2}), std::out_of_range);
  REQUIRE_THROWS_AS(sp.encode(std::vector<int>{-1, 0}), std::out_of_range);
  REQUIRE_THROWS_AS(sp.decode(-1), std::out_of_range);
  REQUIRE_THROWS_AS(sp.decode(4), std::out_of_range);
  REQUIRE_THROWS_AS(StateSpace({2, 0}), std::invalid_argument);
}

TEST_CASE("contains distinguishes valid states", "[state_space]") {
  StateSpace sp({2, 3});
  REQUIRE(sp.contains(JointState{1, 2}));
  REQUIRE_FALSE(sp.contains(JointState{1, 3}));
  REQUIRE_FALSE(sp.contains(JointState{1}));
}
