#include <gtest/gtest.h>

#include <set>

#include "gen.hpp"
#include "mlab/param_maps.hpp"
#include "mlab/programs.hpp"

using namespace mlab;
using mlab::testing::Gen;

namespace {
BitString B(const char* s) { return BitString(s); }

const char* kManifest = R"({
  "entries": [
    {"kind": "bernoulli", "q": "1/2"},
    {"kind": "stub"},
    {"kind": "real", "source": {"kind": "rational", "value": "1/3"}},
    {"kind": "real", "source": {"kind": "hat", "of": {"kind": "rational", "value": "1/3"}}},
    {"kind": "bernoulli", "q": "1/3"},
    {"kind": "bernoulli", "q": "2/3"},
    {"kind": "alias", "of": 0},
    {"kind": "real", "source": {"kind": "rational", "value": "1/2"}, "diverge_at": 5},
    {"kind": "bernoulli_lift", "of": 3},
    {"kind": "real", "source": {"kind": "rational", "value": "1/2"}},
    {"kind": "stub"},
    {"kind": "real", "source": {"kind": "hat", "of": {"kind": "rational", "value": "2/5"}}},
    {"kind": "real", "source": {"kind": "hat", "of": {"kind": "rational", "value": "2/3"}}},
    {"kind": "interleave", "z": {"kind": "real", "index": 2}}
  ],
  "flips": [{"entries": [2], "until": 500, "mode": "alternate"}]
})";

TablePtr table() { return Table::from_manifest(json::parse(kManifest)); }

std::vector<BitString> strings_upto(std::size_t n) {
  std::vector<BitString> out;
  for (std::size_t k = 0; k <= n; ++k)
    for (auto& s : all_strings(k)) out.push_back(s);
  return out;
}
}  // namespace

TEST(Programs, EvalMeasureExamples) {
  auto t = table();
  EXPECT_EQ(t->eval_measure(0, B("0"), 1000), Interval::point(Q(1, 2)));
  for (Stage s : {1, 10, 1000}) EXPECT_EQ(t->eval_measure(1, B("01"), s), Interval::unit());
  for (auto& sigma : strings_upto(4)) EXPECT_EQ(t->eval_measure(6, sigma, 7), t->eval_measure(0, sigma, 7));
}

TEST(Programs, EvalRealExamples) {
  auto t = table();
  int want[] = {0, 1, 0, 1};
  for (std::size_t j = 0; j < 4; ++j) EXPECT_EQ(t->eval_real(2, j, 1000), want[j]);
  for (Stage s : {1, 100, 10000}) EXPECT_FALSE(t->eval_real(1, 3, s).has_value());
  EXPECT_THROW(t->eval_real(0, 0, 10), ProgramError);
}

TEST(Programs, RealBitsNeverRetract) {
  auto t = table();
  for (Index e : t->real_entries()) {
    for (std::size_t j = 0; j < 40; ++j) {
      std::optional<int> seen;
      for (Stage s = 1; s <= 64; ++s) {
        auto b = t->eval_real(e, j, s);
        if (seen) {
          ASSERT_TRUE(b.has_value()) << e << " " << j << " " << s;
          EXPECT_EQ(*b, *seen);
        }
        if (b) seen = b;
      }
    }
  }
}

TEST(Programs, ManifestReferencesMustPointBack) {
  json bad = json::parse(R"({"entries": [{"kind": "alias", "of": 1}, {"kind": "stub"}]})");
  EXPECT_THROW(Table::from_manifest(bad), ProgramError);
  json unknown = json::parse(R"({"entries": [{"kind": "oracle"}]})");
  EXPECT_THROW(Table::from_manifest(unknown), ProgramError);
}

TEST(Programs, PadOrderAndDistinctness) {
  auto t = table();
  std::set<Index> seen;
  for (Index i = 0; i < t->base_size(); ++i) {
    EXPECT_LT(t->pad(i, 0), t->pad(i, 1));
    EXPECT_LT(t->pad(i, 1), t->pad(i, 2));
    for (Index j = 0; j < 5; ++j) {
      Index p = t->pad(i, j);
      EXPECT_GE(p, t->base_size());
      EXPECT_TRUE(seen.insert(p).second);
      EXPECT_TRUE(t->is_pad(p));
      EXPECT_EQ(t->resolve(p), t->resolve(i));
    }
  }
  EXPECT_THROW(t->pad(t->base_size(), 0), ProgramError);
}

TEST(Programs, PaddingSoundness) {
  auto t = table();
  Gen g(11);
  for (Index i = 0; i < t->base_size(); ++i) {
    for (int probe = 0; probe < 20; ++probe) {
      Index p = t->pad(i, g.below(1000));
      Stage s = 1 + g.below(200);
      if (t->kind(i) == EntryKind::Real) {
        std::size_t j = g.below(40);
        EXPECT_EQ(t->eval_real(p, j, s), t->eval_real(i, j, s));
      } else {
        BitString sigma = g.bits(g.below(8));
        EXPECT_EQ(t->eval_measure(p, sigma, s), t->eval_measure(i, sigma, s));
      }
    }
  }
}

TEST(Programs, BernoulliLiftShrinksToHalf) {
  auto t = table();
  Index e = t->bernoulli_lift(9);
  // stage 4 knows 0.1000, so the probability of a 0 lies in [1/2, 9/16]
  EXPECT_EQ(t->eval_measure(e, B("0"), 4), Interval::closed(Q(1, 2), Q(9, 16)));
  EXPECT_EQ(t->eval_measure(e, B("1"), 4), Interval::closed(Q(7, 16), Q(1, 2)));
  Interval late = t->eval_measure(e, B("0"), 40);
  EXPECT_TRUE(late.contains(Q(1, 2)));
  EXPECT_LE(late.width(), pow2neg(40));
}

TEST(Programs, BernoulliLiftStallsOnDivergingReal) {
  auto t = table();
  Index e = t->bernoulli_lift(7);
  BitString sigma = BitString::zeros(10);
  Interval a = t->eval_measure(e, sigma, 100), b = t->eval_measure(e, sigma, 10000);
  EXPECT_EQ(a, b);
  EXPECT_GT(a.width(), 0);
  EXPECT_EQ(t->eval_measure(e, B("0"), 100).width(), pow2neg(5));
}

TEST(Programs, LiftIsIndexFunctional) {
  auto t = table();
  EXPECT_EQ(t->bernoulli_lift(9), t->bernoulli_lift(9));
  EXPECT_EQ(t->bernoulli_lift(3), Index{8});
  EXPECT_EQ(t->bernoulli_lift(t->pad(3, 2)), Index{8});
  EXPECT_GE(t->bernoulli_lift(2), kDerivedBase);
  auto f = bernoulli_param_map();
  EXPECT_EQ(t->param_lift(f, 2), t->param_lift(f, t->pad(2, 7)));
  EXPECT_THROW(t->bernoulli_lift(0), ProgramError);
}

TEST(Programs, ParamLiftAgreesWithBernoulliLift) {
  auto t = table();
  auto f = bernoulli_param_map();
  for (Index real : {Index{3}, Index{11}, Index{12}}) {
    Index p = t->param_lift(f, real), b = t->bernoulli_lift(real);
    for (Stage s : {9, 18, 30}) {
      for (auto& sigma : strings_upto(s / 3)) EXPECT_EQ(t->eval_measure(p, sigma, s), t->eval_measure(b, sigma, s));
    }
  }
}

TEST(Programs, ParamLiftBallsNest) {
  auto t = table();
  for (const char* name : {"bernoulli", "interleave"}) {
    auto f = t->param_map(name);
    for (Index real : {Index{2}, Index{3}, Index{7}}) {
      Index p = t->param_lift(f, real);
      for (auto& sigma : strings_upto(6)) {
        Interval prev = t->eval_measure(p, sigma, 1);
        for (Stage s = 2; s <= 40; s += 3) {
          Interval cur = t->eval_measure(p, sigma, s);
          EXPECT_TRUE(prev.contains(cur)) << name << " " << real << " " << sigma.str() << " " << s;
          prev = cur;
        }
      }
    }
  }
}

TEST(Programs, ParamLiftStallsOnDivergingReal) {
  auto t = table();
  Index p = t->param_lift(bernoulli_param_map(), 7);
  for (auto& sigma : strings_upto(3)) EXPECT_EQ(t->eval_measure(p, sigma, 50), t->eval_measure(p, sigma, 5000));
}

TEST(Programs, InverseLiftRecoversHatReal) {
  auto t = table();
  auto f = bernoulli_param_map();
  auto hat = t->closed_class("hat");
  Index inv = t->inverse_lift(f, hat, 8);
  BitString got = t->real_source(inv).prefix(24);
  EXPECT_EQ(got.prefix(6), B("011001"));
  EXPECT_EQ(got, BitSource::hat(BitSource::rational(Q(1, 3))).prefix(24));
}

TEST(Programs, LiftInverseRoundTrip) {
  auto t = table();
  auto f = bernoulli_param_map();
  auto hat = t->closed_class("hat");
  for (Index real : {Index{3}, Index{11}, Index{12}}) {
    Index inv = t->inverse_lift(f, hat, t->param_lift(f, real));
    EXPECT_EQ(t->real_source(inv).prefix(24), t->real_source(real).prefix(24)) << real;
  }
}

TEST(Programs, InverseLiftOfStubNeverExtends) {
  auto t = table();
  Index inv = t->inverse_lift(bernoulli_param_map(), t->closed_class("hat"), 1);
  for (Stage s : {1, 8, 64, 200}) EXPECT_FALSE(t->eval_real(inv, 0, s).has_value());
}

TEST(Programs, InverseLiftStallsOnTwoSurvivors) {
  // 1/2 has the two expansions 0111… and 1000…; neither side can ever be pruned
  auto t = table();
  Index inv = t->inverse_lift(bernoulli_param_map(), t->closed_class("all"), 0);
  for (Stage s : {8, 64}) EXPECT_FALSE(t->eval_real(inv, 0, s).has_value());
}

TEST(Programs, TotalityOracleExamples) {
  auto t = table();
  for (Stage s : {0, 1, 2, 499, 500, 10000}) {
    EXPECT_EQ(t->totality_oracle(0, s), 1);
    EXPECT_EQ(t->totality_oracle(1, s), 0);
  }
  bool varied = false;
  for (Stage s = 0; s < 500; ++s) varied |= t->totality_oracle(2, s) != 1;
  EXPECT_TRUE(varied);
  for (Stage s = 500; s < 1500; ++s) EXPECT_EQ(t->totality_oracle(2, s), 1);
}

TEST(Programs, TotalityOracleLimit) {
  for (const char* mode : {"invert", "alternate", "list"}) {
    json m = json::parse(kManifest);
    m["flips"] = json::array({{{"until", 300}, {"mode", mode}, {"values", {1, 0, 0}}}});
    auto t = Table::from_manifest(m);
    for (Index e = 0; e < t->base_size(); ++e) {
      Stage h = t->flip_horizon(e);
      EXPECT_EQ(h, 300u);
      for (Stage s = h; s < h + 200; ++s) EXPECT_EQ(t->totality_oracle(e, s), t->ground_truth_total(e) ? 1 : 0);
    }
  }
}

TEST(Programs, MeasuresEqualExamples) {
  auto t = table();
  EXPECT_EQ(t->measures_equal(0, t->pad(0, 3), 8, 1000), Tri::Yes);
  EXPECT_EQ(t->measures_equal(4, 5, 1, 1000), Tri::No);
  EXPECT_EQ(t->measures_equal(1, 10, 4, 3), Tri::Unknown);
  EXPECT_EQ(t->measures_equal(0, 6, 8, 3), Tri::Yes);
  EXPECT_THROW(t->measures_equal(0, 2, 3, 3), ProgramError);
}

TEST(Programs, MeasuresEqualNoIsStable) {
  auto t = table();
  Index lift = t->bernoulli_lift(3);  // B(2/5)
  Stage first_no = 0;
  for (Stage s = 1; s <= 256; ++s) {
    Tri v = t->measures_equal(lift, 0, 4, s);
    if (v == Tri::No && first_no == 0) first_no = s;
    if (first_no) EXPECT_EQ(v, Tri::No) << s;
  }
  EXPECT_GT(first_no, 0u);
}

TEST(Programs, StageMonotonicity) {
  auto t = table();
  auto f = bernoulli_param_map();
  std::vector<Index> measures{0, 1, 4, 5, 6, 8, 10, 13, t->bernoulli_lift(7), t->param_lift(f, 11),
                              t->param_lift(interleave_param_map(), 3)};
  auto sigmas = strings_upto(6);
  for (Index e : measures) {
    for (auto& sigma : sigmas) {
      Interval prev = t->eval_measure(e, sigma, 1);
      for (Stage s = 2; s <= 4096; s *= 2) {
        Interval cur = t->eval_measure(e, sigma, s);
        ASSERT_TRUE(prev.contains(cur)) << e << " " << sigma.str() << " " << s;
        prev = cur;
      }
    }
  }
}

TEST(Programs, ManifestHashIsStable) {
  auto a = table(), b = table();
  EXPECT_EQ(a->manifest_hash(), b->manifest_hash());
  EXPECT_EQ(a->manifest_hash().size(), 16u);
  json m = json::parse(kManifest);
  m["entries"].push_back({{"kind", "stub"}});
  EXPECT_NE(Table::from_manifest(m)->manifest_hash(), a->manifest_hash());
}
