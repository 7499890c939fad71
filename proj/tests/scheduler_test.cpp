#include <gtest/gtest.h>

#include <set>

#include "silbot/checkers.hpp"
#include "silbot/generate.hpp"
#include "silbot/scheduler.hpp"
#include "test_support.hpp"

using namespace silbot;
using silbot::testing::triangle;

namespace {

RunState state_with(std::size_t n) {
  return RunState::start(Configuration::contracted_from(hex_spiral(n)));
}

}  // namespace

// Reference outputs of the published SplitMix64 generator.
TEST(SplitMix64, ReferenceSequence) {
  SplitMix64 rng(1234567);
  EXPECT_EQ(rng.next(), 6457827717110365317ULL);
  EXPECT_EQ(rng.next(), 3203168211198807973ULL);
  EXPECT_EQ(rng.next(), 9817491932198370423ULL);
  EXPECT_EQ(rng.next(), 4593380528125082431ULL);
  EXPECT_EQ(rng.next(), 16408922859458223821ULL);
  EXPECT_EQ(SplitMix64(0).next(), 0xE220A8397B1DCDAFULL);
}

TEST(SplitMix64, UnitAndShuffle) {
  SplitMix64 rng(9);
  for (int i = 0; i < 1000; ++i) {
    const double u = rng.unit();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
  std::vector<int> v{0, 1, 2, 3, 4, 5, 6, 7};
  rng.shuffle(v);
  EXPECT_EQ(std::set<int>(v.begin(), v.end()).size(), 8u);
}

TEST(Scheduler, FullySyncActivatesEveryone) {
  FullySync sync;
  EXPECT_EQ(sync.next(state_with(3)), (std::vector<ParticleId>{0, 1, 2}));
}

TEST(Scheduler, SerialEpochsArePermutations) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    SerialRandom serial(seed);
    const RunState s = state_with(5);
    for (int epoch = 0; epoch < 10; ++epoch) {
      std::set<ParticleId> seen;
      for (int k = 0; k < 5; ++k) {
        const auto act = serial.next(s);
        ASSERT_EQ(act.size(), 1u);
        seen.insert(act[0]);
      }
      ASSERT_EQ(seen.size(), 5u);
    }
  }
}

TEST(Scheduler, SubsetWithCertaintyIsSynchronous) {
  SubsetRandom subset(4, 1.0);
  FullySync sync;
  const RunState s = state_with(7);
  for (int i = 0; i < 5; ++i) EXPECT_EQ(subset.next(s), sync.next(s));
  EXPECT_THROW(SubsetRandom(1, 0.0), std::invalid_argument);
  EXPECT_THROW(SubsetRandom(1, 1.5), std::invalid_argument);
}

TEST(Scheduler, SubsetIsNonemptyAndSorted) {
  SubsetRandom subset(11, 0.05);
  RunState s = state_with(6);
  for (int i = 0; i < 200; ++i) {
    const auto act = subset.next(s);
    ASSERT_FALSE(act.empty());
    ASSERT_TRUE(std::is_sorted(act.begin(), act.end()));
    ++s.step_count;
  }
}

TEST(Scheduler, SeededRunsAreDeterministic) {
  const Configuration c = generate(Shape::random, 9, 3);
  for (const char* spec : {"serial:5", "subset:5:0.3"}) {
    const Trace a = run(c, parse_scheduler_spec(spec), parse_adversary_spec("random:8"));
    const Trace b = run(c, parse_scheduler_spec(spec), parse_adversary_spec("random:8"));
    EXPECT_EQ(a, b) << spec;
    EXPECT_EQ(a.scheduler, spec);
    EXPECT_EQ(a.adversary, "random:8");
  }
  const Trace x = run(c, parse_scheduler_spec("serial:1"), parse_adversary_spec("first"));
  const Trace y = run(c, parse_scheduler_spec("serial:2"), parse_adversary_spec("first"));
  EXPECT_NE(x.records, y.records);
}

TEST(Scheduler, FairSchedulersStayWithinTheWindow) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const Configuration c = generate(Shape::random, 8, seed);
    const std::uint64_t window = 2 * c.size();
    for (const std::string& spec : {"serial:" + std::to_string(seed),
                                   "subset:" + std::to_string(seed) + ":0.1"}) {
      const Trace t = run(c, parse_scheduler_spec(spec), parse_adversary_spec("first"));
      ASSERT_TRUE(t.summary.terminated()) << spec << ": " << t.summary.detail;
      ASSERT_TRUE(check_fairness(t, window).passed()) << spec;
    }
  }
}

TEST(Adversary, Policies) {
  const ConflictGroup g{ConflictGroup::Kind::node, {1, 0}, {1, 0}, {2, 5, 9}};
  FirstById first;
  EXPECT_EQ(first.choose(g), 2u);

  RandomChoice a(77), b(77);
  for (int i = 0; i < 50; ++i) {
    const ParticleId x = a.choose(g);
    EXPECT_EQ(x, b.choose(g));
    EXPECT_TRUE(g.contains(x));
  }

  ExternalAdversary ext([](const ConflictGroup&) { return ParticleId{9}; });
  EXPECT_EQ(ext.choose(g), 9u);
  ExternalAdversary bad([](const ConflictGroup&) { return ParticleId{3}; });
  EXPECT_THROW(bad.choose(g), EngineError);

  const ConflictGroup empty{};
  EXPECT_THROW(first.choose(empty), EngineError);
  EXPECT_THROW(RandomChoice(1).choose(empty), EngineError);
}

TEST(Specs, ParseAndPrint) {
  EXPECT_EQ(parse_scheduler_spec("sync").kind, SchedulerSpec::Kind::sync);
  const auto serial = parse_scheduler_spec("serial:42");
  EXPECT_EQ(serial.kind, SchedulerSpec::Kind::serial);
  EXPECT_EQ(serial.seed, 42u);
  EXPECT_EQ(parse_scheduler_spec("serial", 7).seed, 7u);
  const auto subset = parse_scheduler_spec("subset:3:0.25");
  EXPECT_EQ(subset.seed, 3u);
  EXPECT_DOUBLE_EQ(subset.p, 0.25);
  EXPECT_EQ(subset.to_string(), "subset:3:0.25");
  EXPECT_EQ(parse_scheduler_spec("external").to_string(), "external");
  for (const char* bad : {"", "serial:x", "serial:1:2", "subset", "subset:1:0", "subset:1:1.5",
                          "subset:1:0.5x", "async", "sync:1"}) {
    EXPECT_THROW(parse_scheduler_spec(bad), std::invalid_argument) << bad;
  }
  EXPECT_EQ(parse_adversary_spec("random:5").to_string(), "random:5");
  EXPECT_EQ(parse_adversary_spec("first").kind, AdversarySpec::Kind::first);
  EXPECT_THROW(parse_adversary_spec("last"), std::invalid_argument);
  EXPECT_THROW(make_scheduler(parse_scheduler_spec("external")), std::invalid_argument);
  EXPECT_THROW(make_adversary(parse_adversary_spec("external")), std::invalid_argument);
}

TEST(Specs, SyncOnTheTriangle) {
  const Trace t = run(triangle(), parse_scheduler_spec("sync"), parse_adversary_spec("first"));
  EXPECT_EQ(t.summary.steps, 4u);
  EXPECT_EQ(t.summary.moves, 2u);
}
