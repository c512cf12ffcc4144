#include <gtest/gtest.h>

#include <cmath>

#include "gen.hpp"
#include "mlab/balls.hpp"
#include "mlab/evaluate.hpp"
#include "mlab/extractor.hpp"
#include "mlab/interleave_learner.hpp"
#include "mlab/majority.hpp"
#include "mlab/param_maps.hpp"
#include "mlab/weights.hpp"

using namespace mlab;
using mlab::testing::Gen;

namespace {

BitString B(const char* s) { return BitString(s); }

TablePtr table(const char* manifest) { return Table::from_manifest(json::parse(manifest)); }

// Binary expansion of 2/5 = 0.0110 0110...: a parameter prefix whose star
// keeps B(2/5) and excludes B(3/4).
BitString two_fifths(std::size_t n) { return BitSource::rational(Q(2, 5)).prefix(n); }

}  // namespace

TEST(BernoulliMap, EmptyStarIsUnconstrained) { EXPECT_TRUE(bernoulli_param_map()->star(BitString()).unconstrained()); }

TEST(BernoulliMap, StarOf01PinsZeroMassToQuarterHalf) {
  auto f = bernoulli_param_map();
  // the depth-1 pins under 01 cover the parameter interval [1/4, 1/2]
  Interval lo = ball_interval(f->star(B("010")), B("0"));
  Interval hi = ball_interval(f->star(B("011")), B("0"));
  EXPECT_EQ(lo.lo, Q(1, 4));
  EXPECT_EQ(hi.hi, Q(1, 2));
  EXPECT_TRUE(Interval::closed(Q(1, 4), Q(1, 2)).contains(lo));
  EXPECT_TRUE(Interval::closed(Q(1, 4), Q(1, 2)).contains(hi));
}

TEST(BernoulliMap, StarsNest) {
  auto f = bernoulli_param_map();
  Gen g(21);
  for (int k = 0; k < 40; ++k) {
    BitString s = g.bits(g.size(0, 14));
    BitString t = s + g.bits(g.size(1, 6));
    MeasureBall outer = f->star(s), inner = f->star(t);
    for (std::size_t n = 0; n <= 4; ++n)
      for (const auto& w : all_strings(n)) EXPECT_TRUE(ball_interval(outer, w).contains(ball_interval(inner, w)));
  }
}

TEST(BernoulliMap, ModulusMeetsSizeBound) {
  auto f = bernoulli_param_map();
  Gen g(22);
  for (std::size_t n = 0; n <= 6; ++n) {
    std::size_t h = f->modulus(n);
    for (int k = 0; k < 50; ++k) EXPECT_LE(ball_size(f->star(g.bits(h)), 3 * n + 4), pow2neg(3 * n)) << n;
  }
}

TEST(BernoulliMap, ModulusFrozenValues) {
  std::vector<std::size_t> want{0, 12, 21, 30, 39, 48, 57, 66};
  for (std::size_t n = 0; n < want.size(); ++n) EXPECT_EQ(bernoulli_modulus(n), want[n]);
}

TEST(BernoulliMap, CenterLiesInStar) {
  auto f = bernoulli_param_map();
  Gen g(23);
  for (int k = 0; k < 30; ++k) {
    BitString s = g.bits(g.size(1, 24));
    EXPECT_NE(ball_contains(f->star(s), f->center(s), 1 << 10), Tri::No);
  }
}

TEST(Extractor, EmptyInputGivesEmptyPrefix) {
  EXPECT_TRUE(extract_parameter(bernoulli_param_map(), ClosedClass::hat_image(), BitString(), Estimator(), 0).empty());
}

TEST(Extractor, ThirdSampleGivesPrefixOfItsParameter) {
  // B(1/3) has parameter 0.0101... = hat(000...), which lies in the hat image
  BitString x = sample_stream(Measure::bernoulli(Q(1, 3)), 4, 4096);
  BitString got = extract_parameter(bernoulli_param_map(), ClosedClass::hat_image(), x, Estimator(), 4096);
  EXPECT_FALSE(got.empty());
  BitString want = BitSource::hat(BitSource::constant(0)).prefix(got.size());
  EXPECT_EQ(got, want);
}

TEST(Extractor, OutputOnlyGrowsOnceSettled) {
  BitString x = sample_stream(Measure::bernoulli(Q(1, 3)), 5, 2048);
  Extractor h(bernoulli_param_map(), ClosedClass::hat_image(), Estimator(), x);
  Extraction prev = h.extract(1024);
  for (std::size_t n = 1025; n <= 2048; n += 64) {
    Extraction e = h.extract(n);
    if (e.c == prev.c) EXPECT_TRUE(prev.prefix.is_prefix_of(e.prefix)) << n;
    prev = e;
  }
}

TEST(LiftRealLearner, EmptyPrefixComposes) {
  auto t = table(R"({"entries":[{"kind":"real","source":{"kind":"rational","value":"1/3"}}]})");
  auto v = lift_real_learner(constant_learner(0), bernoulli_param_map(), ClosedClass::hat_image(), t, Estimator());
  EXPECT_EQ(v->guess(BitString()), t->param_lift(bernoulli_param_map(), 0));
}

TEST(WeightRule, ThreeTimesThreshold) {
  EXPECT_EQ(weight_rule({{1, Q(1, 2)}, {2, Q(1, 5)}}, 2), 2u);
  EXPECT_EQ(weight_rule({{1, Q(9, 10)}, {2, Q(1, 5)}}, 2), 1u);
  EXPECT_EQ(weight_rule({{5, Q(1)}}, 0), 5u);
  EXPECT_EQ(weight_rule({}, 4), 4u);
}

TEST(WeightRule, StableUnderBoundedFluctuation) {
  // Each index keeps within a factor below sqrt(3) of its base weight after
  // n1, so two steps never see a 3x gap between the argmax and the guess
  // that an earlier step made the argmax: at most one change after n1.
  Gen g(31);
  for (int trial = 0; trial < 50; ++trial) {
    std::size_t k = g.size(2, 5);
    std::vector<double> base(k);
    for (auto& b : base) b = 1 + static_cast<double>(g.below(1000));
    Index current = g.below(k);
    int changes = 0;
    for (int step = 0; step < 40; ++step) {
      std::map<Index, Q> w;
      for (std::size_t e = 0; e < k; ++e) {
        long jitter = static_cast<long>(g.below(730));  // factor in [1, 1.73)
        w[e] = Q(static_cast<long>(base[e]) * (1000 + jitter), 1000);
      }
      Index next = weight_rule(w, current);
      changes += next != current;
      current = next;
    }
    EXPECT_LE(changes, 1) << trial;
  }
}

TEST(WeightLearner, TwoLeafFirstStep) {
  auto t = table(R"({"entries":[{"kind":"uniform"},{"kind":"uniform"},{"kind":"uniform"},
    {"kind":"uniform"},{"kind":"uniform"},{"kind":"bernoulli","q":"1/2"}]})");
  auto l = ex_weight_learner(constant_learner(5), bernoulli_param_map(), t);
  auto steps = l->steps(BitString::zeros(bernoulli_modulus(1)));
  ASSERT_EQ(steps.size(), 1u);
  EXPECT_EQ(steps[0].before, 0u);
  EXPECT_EQ(steps[0].after, 5u);
  EXPECT_EQ(steps[0].w_candidate, 1.0L);
  EXPECT_EQ(steps[0].clause, 'a');
}

TEST(WeightLearner, StepsFollowTheExactRule) {
  auto t = Table::from_file(std::filesystem::path(MLAB_SOURCE_DIR) / "tables" / "family.json");
  auto v = frequency_learner(t, {34, 35, 36});
  auto f = bernoulli_param_map();
  auto l = ex_weight_learner(v, f, t);
  BitString x = two_fifths(bernoulli_modulus(5));
  for (const auto& st : l->steps(x)) {
    VoteWeights w = VoteWeights::compute(*v, f->center(x.prefix(st.length)), st.n, st.n);
    std::map<Index, Q> exact;
    for (Index e : w.indices()) exact[e] = w.exact(e);
    EXPECT_EQ(st.after, weight_rule(exact, st.before)) << st.n;
  }
}

TEST(WeightedSet, StageWeightsMonotoneAndBounded) {
  auto t = Table::from_file(std::filesystem::path(MLAB_SOURCE_DIR) / "tables" / "family.json");
  auto v = frequency_learner(t, {34, 35, 36});
  auto f = bernoulli_param_map();
  BitString x = two_fifths(bernoulli_modulus(4));
  for (std::size_t n = 1; n <= 4; ++n) {
    WeightedSet a = WeightedSet::from_votes(VoteWeights::compute(*v, f->center(x.prefix(bernoulli_modulus(n))), n, n));
    for (Stage s = 0; s < 70; ++s) {
      EXPECT_LE(a.total(s), Q(1));
      for (std::size_t i = 0; i < a.members.size(); ++i) EXPECT_LE(a.weight(i, s), a.weight(i, s + 1));
    }
  }
}

namespace {

const char* kEnumerated = R"({"entries":[
  {"kind":"enumerated","tuples":[["0","1/4","1/2",0],["1","1/2","3/4",0]]},
  {"kind":"enumerated","tuples":[["0","1/4","1/2",0],["1","1/4","3/4",0]]},
  {"kind":"enumerated","tuples":[["0","1/4","1/2",0],["1","1/2","1",0]]},
  {"kind":"bernoulli","q":"1/3"}]})";

std::vector<Interval> tuples_at(const Table& t, Index e, const char* sigma) { return t.entry(e).tuples(B(sigma), 8); }

}  // namespace

TEST(Majority, HeavyMemberTupleEmitted) {
  auto t = table(kEnumerated);
  Index m = majority_measure({{{0, Q(3, 5)}, {1, Q(3, 10)}}}, *t);
  EXPECT_EQ(tuples_at(*t, m, "1"), tuples_at(*t, 0, "1"));
}

TEST(Majority, SharedTupleEmitted) {
  auto t = table(kEnumerated);
  Index m = majority_measure({{{0, Q(2, 5)}, {1, Q(2, 5)}}}, *t);
  EXPECT_EQ(tuples_at(*t, m, "0"), tuples_at(*t, 0, "0"));
}

TEST(Majority, LightTupleDropped) {
  auto t = table(kEnumerated);
  Index m = majority_measure({{{0, Q(2, 5)}, {1, Q(2, 5)}}}, *t);
  EXPECT_TRUE(tuples_at(*t, m, "1").empty());
}

TEST(Majority, EvenThreeWaySplitKeepsOnlyCommonTuples) {
  auto t = table(kEnumerated);
  Index m = majority_measure({{{0, Q(1, 3)}, {1, Q(1, 3)}, {2, Q(1, 3)}}}, *t);
  EXPECT_EQ(tuples_at(*t, m, "0"), tuples_at(*t, 0, "0"));
  EXPECT_TRUE(tuples_at(*t, m, "1").empty());
}

TEST(Majority, AliasesOfOneMeasureAddUp) {
  auto t = table(kEnumerated);
  Index m = majority_measure({{{t->pad(3, 0), Q(1, 2)}, {t->pad(3, 1), Q(1, 2)}}}, *t);
  EXPECT_EQ(t->measures_equal(m, 3, 6, 64), Tri::Yes);
}

TEST(Majority, MemoizedPerSet) {
  auto t = table(kEnumerated);
  WeightedSet a{{{0, Q(1, 2)}, {2, Q(1, 4)}}};
  EXPECT_EQ(majority_measure(a, *t), majority_measure(a, *t));
}

TEST(Majority, ConstantVoteIsThatMeasure) {
  auto t = Table::from_file(std::filesystem::path(MLAB_SOURCE_DIR) / "tables" / "family.json");
  auto l = bc_majority_learner(constant_learner(52), bernoulli_param_map(), t);
  auto steps = l->steps(two_fifths(bernoulli_modulus(2)));
  ASSERT_EQ(steps.size(), 2u);
  for (const auto& st : steps) {
    ASSERT_EQ(st.set.members.size(), 1u);
    EXPECT_EQ(st.set.members[0].index, 52u);
    EXPECT_EQ(t->measures_equal(st.output, 52, 8, 64), Tri::Yes);
  }
}

namespace {

MeasureBall pin_zero_above_three_quarters() {
  MeasureBall c;
  c.constraints.push_back({B("0"), Interval{Q(3, 4), Q(1), true, false}});
  return c;
}

}  // namespace

TEST(HPredicate, ExcludesUniformFromHeavyZeroBall) {
  auto t = table(R"({"entries":[{"kind":"uniform"},{"kind":"bernoulli","q":"7/8"},{"kind":"stub"}]})");
  auto c = pin_zero_above_three_quarters();
  EXPECT_TRUE(h_predicate(c, 0, *t, 1000));
  for (Stage s : {0, 1, 10, 1000}) {
    EXPECT_FALSE(h_predicate(c, 1, *t, s));
    EXPECT_FALSE(h_predicate(c, 2, *t, s));
  }
}

TEST(HPredicate, MonotoneInStage) {
  auto t = Table::from_file(std::filesystem::path(MLAB_SOURCE_DIR) / "tables" / "family.json");
  auto f = bernoulli_param_map();
  Gen g(41);
  for (int k = 0; k < 20; ++k) {
    MeasureBall c = f->star(g.bits(g.size(3, 30)));
    for (Index e : {0, 34, 35, 36, 37, 52, 53, 54}) {
      bool fired = false;
      for (Stage s = 0; s <= 64; s += 4) {
        bool now = h_predicate(c, e, *t, s);
        if (fired) EXPECT_TRUE(now);
        fired = fired || now;
      }
    }
  }
}

namespace {

// 0: B(3/4), provably outside every star near 2/5; 1: B(2/5).
const char* kExclusion = R"({"entries":[{"kind":"bernoulli","q":"3/4"},{"kind":"bernoulli","q":"2/5"}]})";

}  // namespace

TEST(PartialExWeight, ExcludedCurrentSwitchesWithoutThreeTimesMargin) {
  auto t = table(kExclusion);
  auto v = hash_split_learner({{0, Q(1, 2)}, {1, Q(1, 2)}});
  auto l = partialex_weight_learner(v, bernoulli_param_map(), t);
  auto st = l->steps(two_fifths(bernoulli_modulus(1))).front();
  EXPECT_EQ(st.before, 0u);
  EXPECT_EQ(st.after, 1u);
  EXPECT_EQ(st.clause, 'b');
}

TEST(PartialExWeight, ExcludedHeavyIndexNotEligible) {
  auto t = table(R"({"entries":[{"kind":"bernoulli","q":"2/5"},{"kind":"bernoulli","q":"3/4"}]})");
  auto v = hash_split_learner({{1, Q(9, 10)}, {0, Q(1, 10)}});
  auto l = partialex_weight_learner(v, bernoulli_param_map(), t);
  auto st = l->steps(two_fifths(bernoulli_modulus(1))).front();
  EXPECT_EQ(st.after, 0u);
  EXPECT_EQ(st.eligible, 1u);
}

TEST(PartialExWeight, NoEligibleCandidateKeepsGuess) {
  auto t = table(kExclusion);
  auto l = partialex_weight_learner(constant_learner(0), bernoulli_param_map(), t);
  auto st = l->steps(two_fifths(bernoulli_modulus(1))).front();
  EXPECT_FALSE(st.candidate.has_value());
  EXPECT_EQ(st.after, 0u);
}

namespace {

const char* kInterleave = R"({"entries":[
  {"kind":"real","source":{"kind":"constant","bit":0}},
  {"kind":"real","source":{"kind":"constant","bit":1}},
  {"kind":"interleave","z":{"kind":"real","index":0}},
  {"kind":"interleave","z":{"kind":"real","index":1}},
  {"kind":"stub"}]})";

// μ_{0^ω} when the last input bit is 0, μ_{1^ω} otherwise.
class LastBitLearner final : public Learner {
 public:
  Index guess(const BitString& s) const override { return s.empty() || s.back() == 0 ? 2 : 3; }
  json describe() const override { return "last_bit"; }
};

}  // namespace

TEST(InterleaveDecoder, IdealVoteOnZeroReal) {
  auto t = table(kInterleave);
  EXPECT_EQ(interleave_decoder(*constant_learner(2), *t, B("00"), 64), std::optional<int>(0));
}

TEST(InterleaveDecoder, StubsStall) {
  auto t = table(kInterleave);
  EXPECT_FALSE(interleave_decoder(*constant_learner(4), *t, B("00"), 64).has_value());
}

TEST(InterleaveDecoder, EvenSplitStalls) {
  auto t = table(kInterleave);
  LastBitLearner v;
  EXPECT_FALSE(interleave_decoder(v, *t, B("00"), 64).has_value());
}

TEST(InterleaveExLearner, IdealVoteRecoversZeroReal) {
  auto t = table(kInterleave);
  auto l = interleave_ex_learner(constant_learner(2), t);
  BitString z = BitString::zeros(64);
  auto tr = l->trajectory(z);
  auto bits = read_real(*t, tr.back(), 32);
  ASSERT_TRUE(bits.has_value());
  EXPECT_EQ(*bits, BitString::zeros(32));
}

TEST(InterleaveExLearner, ContradictedGuessAdvancesN0) {
  auto t = table(kInterleave);
  // votes for μ_{1^ω} while Z is all zeros: the decoded real disagrees
  auto l = interleave_ex_learner(constant_learner(3), t);
  auto steps = l->steps(BitString::zeros(32));
  std::size_t last_n0 = 0;
  for (const auto& st : steps) last_n0 = std::max(last_n0, st.n0_disagreement);
  EXPECT_GT(last_n0, 0u);
}
