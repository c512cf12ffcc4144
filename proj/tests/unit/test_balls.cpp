#include <gtest/gtest.h>

#include "gen.hpp"
#include "mlab/balls.hpp"

using namespace mlab;
using mlab::testing::Gen;

namespace {
BitString B(const char* s) { return BitString(s); }

Q partial_distance(const std::vector<Q>& x, const std::vector<Q>& y, std::size_t depth) {
  // x, y: masses of the 2^depth leaves; level masses by summation
  Q total = 0;
  for (std::size_t n = 1; n <= depth; ++n) {
    std::size_t block = std::size_t{1} << (depth - n);
    Q best = 0;
    for (std::size_t i = 0; i < x.size(); i += block) {
      Q a = 0, b = 0;
      for (std::size_t k = i; k < i + block; ++k) a += x[k], b += y[k];
      best = std::max(best, Q(abs(a - b)));
    }
    total += pow2neg(n) * best;
  }
  return total;
}

// All distributions of `units` quanta of mass 1/units over `slots` leaves.
void compositions(std::size_t slots, std::size_t units, std::vector<std::size_t>& cur,
                  std::vector<std::vector<Q>>& out, std::size_t total) {
  if (cur.size() + 1 == slots) {
    cur.push_back(units);
    std::vector<Q> m;
    for (auto c : cur) m.push_back(Q(static_cast<long>(c), static_cast<long>(total)));
    for (auto& v : m) v.canonicalize();
    out.push_back(m);
    cur.pop_back();
    return;
  }
  for (std::size_t c = 0; c <= units; ++c) {
    cur.push_back(c);
    compositions(slots, units - c, cur, out, total);
    cur.pop_back();
  }
}
}  // namespace

TEST(BallSize, EmptyBallIsOne) {
  EXPECT_EQ(ball_size(MeasureBall{}, 8), 1);
  // grid search over depth-3 measures: the extremal pair attains 1 - 2^-3
  std::vector<std::vector<Q>> grid;
  std::vector<std::size_t> cur;
  compositions(8, 2, cur, grid, 2);
  Q best = 0;
  for (auto& x : grid)
    for (auto& y : grid) best = std::max(best, partial_distance(x, y, 3));
  EXPECT_EQ(best, Q(7, 8));
  EXPECT_EQ(ball_size(MeasureBall{}, 3), best + pow2neg(3));
}

TEST(BallSize, PinnedHalf) {
  MeasureBall c{{{B("0"), Interval::point(Q(1, 2))}}, nullptr};
  EXPECT_EQ(ball_size(c, 1), Q(1, 2));
  EXPECT_LE(ball_size(c, 6), Q(1, 2) + Q(1, 2));
  // grid check: level-1 gap is 0 for all members
  std::vector<std::vector<Q>> grid;
  std::vector<std::size_t> cur;
  compositions(4, 4, cur, grid, 4);
  Q best = 0;
  for (auto& x : grid)
    for (auto& y : grid) {
      if (x[0] + x[1] != Q(1, 2) || y[0] + y[1] != Q(1, 2)) continue;
      best = std::max(best, partial_distance(x, y, 2));
    }
  EXPECT_LE(best + pow2neg(2), ball_size(c, 2));
}

TEST(BallSize, ConstraintsNeverIncrease) {
  Gen g(31);
  for (int trial = 0; trial < 100; ++trial) {
    Measure mu = Measure::bernoulli(g.rational(10));
    MeasureBall c;
    Q prev = ball_size(c, 8);
    for (int k = 0; k < 5; ++k) {
      BitString s = g.bits(g.size(1, 5));
      Q v = mu.value(s);
      Q lo = v - g.rational(8) / 4, hi = v + g.rational(8) / 4;
      c.constraints.push_back({s, Interval::closed(lo < 0 ? Q(0) : lo, hi > 1 ? Q(1) : hi)});
      Q next = ball_size(c, 8);
      ASSERT_LE(next, prev);
      prev = next;
    }
  }
}

TEST(BallSize, BoundsMemberDistances) {
  Gen g(32);
  for (int trial = 0; trial < 60; ++trial) {
    Q q = g.rational(8);
    Measure mu = Measure::bernoulli(q);
    MeasureBall c;
    for (int k = 0; k < 3; ++k) {
      BitString s = g.bits(g.size(1, 3));
      Q v = mu.value(s);
      c.constraints.push_back({s, Interval::closed(v - Q(1, 16) < 0 ? Q(0) : v - Q(1, 16), v + Q(1, 16) > 1 ? Q(1) : v + Q(1, 16))});
    }
    std::vector<Measure> members;
    for (long k = 0; k <= 64; ++k) {
      Measure b = Measure::bernoulli(Q(k, 64));
      if (ball_contains(c, b, 0) == Tri::Yes) members.push_back(b);
    }
    Q size = ball_size(c, 8);
    for (auto& x : members)
      for (auto& y : members) ASSERT_LE(measure_distance(x, y, 8).partial, size);
  }
}

TEST(BallSize, InconsistentThrows) {
  MeasureBall c{{{B("0"), Interval::closed(Q(0), Q(1, 8))}, {B("1"), Interval::closed(Q(0), Q(1, 8))}}, nullptr};
  EXPECT_THROW(ball_size(c, 4), MeasureError);
}

TEST(BallSup, Propagation) {
  MeasureBall c;
  for (std::size_t n = 0; n <= 2; ++n)
    for (auto& s : all_strings(n)) c.constraints.push_back({s, Interval::point(pow2neg(n))});
  EXPECT_EQ(ball_sup(c, B("01")), Q(1, 4));
  EXPECT_EQ(ball_sup(c, B("011")), Q(1, 4));
  EXPECT_EQ(ball_sup(MeasureBall{}, B("0101")), 1);
  // sibling difference: μ(0) ∈ [1/4, 1/2] forces μ(1) ∈ [1/2, 3/4]
  MeasureBall d{{{B("0"), Interval::closed(Q(1, 4), Q(1, 2))}}, nullptr};
  EXPECT_EQ(ball_interval(d, B("1")), Interval::closed(Q(1, 2), Q(3, 4)));
}

TEST(BallContains, Examples) {
  MeasureBall in{{{B("0"), Interval::open(Q(1, 4), Q(3, 4))}}, nullptr};
  EXPECT_EQ(ball_contains(in, Measure::uniform(), 0), Tri::Yes);
  MeasureBall out{{{B("0"), Interval{Q(3, 4), Q(1), true, false}}}, nullptr};
  EXPECT_EQ(ball_contains(out, Measure::uniform(), 0), Tri::No);
  Measure vague = Measure::enumerated({{B("0"), Interval::open(Q(0), Q(1)), 0}});
  EXPECT_EQ(ball_contains(in, vague, 5), Tri::Unknown);
}

TEST(BallContains, VerdictsStableInStage) {
  Measure w = Measure::enumerated({{B("0"), Interval::open(Q(0), Q(1)), 0},
                                   {B("0"), Interval::open(Q(1, 3), Q(2, 3)), 4},
                                   {B("0"), Interval::open(Q(2, 5), Q(3, 5)), 9}});
  MeasureBall c{{{B("0"), Interval::open(Q(1, 4), Q(3, 4))}}, nullptr};
  MeasureBall far{{{B("0"), Interval::open(Q(0), Q(1, 5))}}, nullptr};
  Tri prev_c = Tri::Unknown, prev_f = Tri::Unknown;
  for (Stage s = 0; s < 12; ++s) {
    Tri vc = ball_contains(c, w, s), vf = ball_contains(far, w, s);
    if (prev_c != Tri::Unknown) ASSERT_EQ(vc, prev_c);
    if (prev_f != Tri::Unknown) ASSERT_EQ(vf, prev_f);
    prev_c = vc;
    prev_f = vf;
  }
  EXPECT_EQ(prev_c, Tri::Yes);
  EXPECT_EQ(prev_f, Tri::No);
}
