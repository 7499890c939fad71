#include <gtest/gtest.h>

#include "silbot/model.hpp"
#include "test_support.hpp"

using namespace silbot;
using silbot::testing::random_valid_configuration;

namespace {

const auto C = ParticleState::contracted();
ParticleState X(Direction d) { return ParticleState::expanded(d); }

}  // namespace

TEST(Model, Occupied) {
  EXPECT_TRUE(occupied(Configuration{{{0, 0}, C}}, {0, 0}));
  EXPECT_FALSE(occupied(Configuration{{{0, 0}, X(Direction::SE)}}, {1, -1}));
  EXPECT_FALSE(occupied(Configuration{}, {3, 3}));
}

TEST(Model, SemiOccupied) {
  EXPECT_TRUE(semi_occupied(Configuration{{{0, 0}, X(Direction::E)}}, {1, 0}));
  EXPECT_FALSE(semi_occupied(Configuration{{{0, 0}, X(Direction::E)}, {{1, 0}, C}}, {1, 0}));
  EXPECT_FALSE(semi_occupied(Configuration{{{0, 0}, C}}, {1, 0}));
}

TEST(Model, UpperLower) {
  const auto pair = Configuration::contracted({{0, 0}, {0, 1}});
  EXPECT_TRUE(upper(pair, {0, 0}));
  EXPECT_FALSE(upper(pair, {0, 1}));
  EXPECT_TRUE(lower(pair, {0, 1}));
  EXPECT_FALSE(lower(pair, {0, 0}));
  const auto single = Configuration::contracted({{4, 4}});
  EXPECT_FALSE(upper(single, {4, 4}));
  EXPECT_FALSE(lower(single, {4, 4}));
}

TEST(Model, UpperLowerIgnoreSemiOccupiedNodes) {
  // (1,0) is only semi-occupied: the expanded particle's edge ends there.
  const Configuration c{{{0, 1}, X(Direction::SE)}};
  EXPECT_FALSE(lower(c, {0, 1}));
  // (0,1) is semi-occupied here and sits in the upper trapezoid of (2,0).
  EXPECT_FALSE(upper(Configuration{{{0, 0}, X(Direction::NE)}}, {2, 0}));
  EXPECT_TRUE(upper(Configuration{{{0, 1}, X(Direction::SE)}, {{1, -1}, C}}, {1, -1}));
}

TEST(Model, Pointed) {
  EXPECT_TRUE(pointed(Configuration{{{0, 0}, X(Direction::E)}, {{1, 0}, C}}, {1, 0}));
  EXPECT_TRUE(pointed(Configuration{{{0, 0}, X(Direction::E)}}, {1, 0}));
  EXPECT_FALSE(pointed(Configuration{{{0, 0}, C}}, {1, 0}));
  EXPECT_FALSE(pointed(Configuration{{{0, 0}, X(Direction::NE)}}, {1, 0}));
}

TEST(Model, Near) {
  EXPECT_TRUE(near(Configuration{{{0, 0}, C}, {{0, 1}, X(Direction::SE)}}, {0, 0}));
  EXPECT_FALSE(near(Configuration{{{0, 0}, X(Direction::E)}, {{1, 0}, C}}, {1, 0}));
  for (Direction d : kDirections) {
    EXPECT_FALSE(near(Configuration{{{0, 0}, C}}, neighbor({0, 0}, d)));
  }
  EXPECT_FALSE(near(Configuration{{{0, 0}, C}}, {0, 0}));
}

TEST(Model, Connectivity) {
  EXPECT_TRUE(is_connected(Configuration::contracted({{0, 0}, {1, 0}})));
  EXPECT_FALSE(is_connected(Configuration::contracted({{0, 0}, {2, 0}})));
  // Expansion edges do not connect bodies.
  EXPECT_FALSE(is_connected(Configuration{{{0, 0}, C}, {{0, 1}, X(Direction::SE)}, {{2, 0}, C}}));
  EXPECT_THROW(is_connected(Configuration{}), std::invalid_argument);
}

TEST(Model, InitialAndFinal) {
  const auto row = Configuration::contracted({{0, 0}, {1, 0}, {2, 0}});
  EXPECT_TRUE(is_initial(row));
  EXPECT_TRUE(is_final(row, 0));
  const auto pair = Configuration::contracted({{0, 0}, {0, 1}});
  EXPECT_TRUE(is_initial(pair));
  EXPECT_FALSE(is_final(pair, 0));
  const Configuration expanded{{{0, 0}, X(Direction::E)}};
  EXPECT_FALSE(is_initial(expanded));
  EXPECT_FALSE(is_final(expanded, 0));
  // The floor is the run's, not recomputed from the current configuration.
  EXPECT_FALSE(is_final(Configuration::contracted({{0, 1}, {1, 1}}), 0));
  EXPECT_TRUE(is_final(Configuration::contracted({{0, 1}, {1, 1}})));
}

TEST(Model, CanonicalKeys) {
  const Configuration c{{{0, 0}, C}, {{1, 0}, C}, {{0, 1}, X(Direction::SE)}};
  const Configuration shifted = c.translated({5, 0});
  EXPECT_NE(canonical_key(c), canonical_key(shifted));
  EXPECT_EQ(canonical_key(c, KeyMode::translated), canonical_key(shifted, KeyMode::translated));

  Configuration one_expanded = Configuration::contracted({{0, 0}, {1, 0}, {0, 1}});
  const Configuration before = one_expanded;
  one_expanded.set_state({1, 0}, X(Direction::E));
  EXPECT_NE(canonical_key(before), canonical_key(one_expanded));
  EXPECT_NE(canonical_key(before, KeyMode::translated), canonical_key(one_expanded, KeyMode::translated));

  EXPECT_NE(canonical_key(Configuration::contracted({{0, 0}, {1, 0}})),
            canonical_key(Configuration::contracted({{0, 0}, {0, 1}})));
  EXPECT_EQ(canonical_key(c), "0,0 0,1,SE 1,0");
}

TEST(Model, KeyRoundTripProperty) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const Configuration c = random_valid_configuration(seed, 1 + seed % 12);
    ASSERT_EQ(configuration_from_key(canonical_key(c)), c) << canonical_key(c);
    // Translation classes: translating never changes the translated key.
    const Node delta{static_cast<Coord>(seed % 7) - 3, static_cast<Coord>(seed % 5) - 2};
    ASSERT_EQ(canonical_key(c, KeyMode::translated),
              canonical_key(c.translated(delta), KeyMode::translated));
  }
}

TEST(Model, Validate) {
  const Configuration clash{{{0, 0}, X(Direction::E)}, {{1, 0}, X(Direction::W)}};
  EXPECT_EQ(validate(clash).size(), 1u);
  EXPECT_FALSE(validate(Configuration{}).empty());
  EXPECT_TRUE(validate(Configuration{{{0, 0}, X(Direction::E)}, {{1, 0}, X(Direction::E)}}).empty());
  EXPECT_TRUE(validate(Configuration::contracted({{0, 0}, {1, 0}})).empty());
}

// The predicates computed through the two-hop View agree with the direct
// definitions over the whole configuration, and the View ignores everything
// beyond two hops.
TEST(Model, ViewLocalityProperty) {
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    const Configuration c = random_valid_configuration(seed, 2 + seed % 14);
    const BoundingBox b = bounding_box(c.bodies());
    for (Coord q = b.q_min - 2; q <= b.q_max + 2; ++q) {
      for (Coord r = b.r_min - 2; r <= b.r_max + 2; ++r) {
        const Node v{q, r};
        const Predicates direct{upper(c, v), lower(c, v), pointed(c, v), near(c, v)};
        ASSERT_EQ(predicates(c, v), direct) << canonical_key(c) << " at " << v;

        Configuration local;
        for (const auto& [u, s] : c) {
          if (distance(u, v) <= 2) local.place(u, s);
        }
        ASSERT_EQ(predicates(local, v), direct);
      }
    }
  }
}

TEST(Model, SemiOccupiedAndNearRelation) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const Configuration c = random_valid_configuration(seed, 2 + seed % 10);
    const BoundingBox b = bounding_box(c.bodies());
    for (Coord q = b.q_min - 1; q <= b.q_max + 1; ++q) {
      for (Coord r = b.r_min - 1; r <= b.r_max + 1; ++r) {
        const Node v{q, r};
        if (semi_occupied(c, v)) {
          ASSERT_TRUE(pointed(c, v));
          ASSERT_FALSE(occupied(c, v));
        }
        bool any = false;
        for (Direction d : kDirections) any |= semi_occupied(c, neighbor(v, d));
        ASSERT_EQ(near(c, v), any);
      }
    }
  }
}
