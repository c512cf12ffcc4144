// Acceptance criteria 1-11, one PASS/FAIL line each. Exit status 1 when any
// criterion fails.
#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "mlab/balls.hpp"
#include "mlab/harness.hpp"
#include "mlab/majority.hpp"
#include "mlab/measures.hpp"
#include "mlab/param_maps.hpp"
#include "mlab/programs.hpp"

using namespace mlab;

namespace {

const std::filesystem::path kSource = MLAB_SOURCE_DIR;

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string seconds_since(std::chrono::steady_clock::time_point t0) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f s", std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  return buf;
}

Report run(const std::string& name) { return run_experiment(load_config(kSource / "configs" / (name + ".json"))); }

Q binom(std::size_t n, std::size_t a) {
  mpz_class r;
  mpz_bin_uiui(r.get_mpz_t(), n, a);
  return Q(r);
}

Q random_unit(std::mt19937_64& g, int bits = 40) {
  Q out(mpz_class(static_cast<unsigned long>(g() >> (64 - bits))), mpz_class(1) << bits);
  out.canonicalize();
  return out;
}

// 1. additivity and unit mass for every constructor, |σ| <= 12
Outcome crit1() {
  std::vector<Measure> ms{Measure::uniform()};
  for (int k = 1; k <= 10; ++k) ms.push_back(Measure::bernoulli(Q(k, 11)));
  ms.push_back(Measure::interleave(BitSource::rational(Q(1, 3))));
  ms.push_back(Measure::interleave(BitSource::constant(0)));
  ms.push_back(Measure::interleave(BitSource::periodic(BitString("01"))));
  ms.push_back(Measure::interleave(BitSource::hat(BitSource::rational(Q(2, 5)))));
  ms.push_back(Measure::interleave(BitSource::rational(Q(5, 7))));
  Outcome o;
  std::size_t checked = 0;
  for (const auto& mu : ms) {
    if (mu.value(BitString()) != 1) return {false, mu.name() + ": μ(ε) != 1"};
    for (std::size_t n = 0; n < 12; ++n)
      for (const auto& s : all_strings(n)) {
        if (mu.value(s) != mu.value(s.child(0)) + mu.value(s.child(1))) return {false, mu.name() + " at " + s.str()};
        ++checked;
      }
  }
  o.detail = std::to_string(ms.size()) + " measures, " + std::to_string(checked) + " splits";
  return o;
}

// 2. metric symmetry and triangle, ball-size bound, level-sum bound
Outcome crit2() {
  std::mt19937_64 g(2);
  auto rnd = [&] { return Measure::bernoulli(random_unit(g, 16)); };
  const std::size_t depth = 16;
  const Q slack = 3 * pow2neg(depth);
  for (int i = 0; i < 100; ++i) {
    Measure a = rnd(), b = rnd(), c = rnd();
    Q ab = measure_distance(a, b, depth).partial, ba = measure_distance(b, a, depth).partial;
    if (ab != ba) return {false, "asymmetric distance"};
    Q ac = measure_distance(a, c, depth).partial, cb = measure_distance(c, b, depth).partial;
    if (ab > ac + cb + slack) return {false, "triangle inequality"};
  }
  auto f = bernoulli_param_map();
  for (std::size_t n = 1; n <= 6; ++n) {
    const std::size_t h = f->modulus(n);
    for (int k = 0; k < 50; ++k) {
      BitString sigma;
      for (std::size_t i = 0; i < h; ++i) sigma.push_back(static_cast<int>(g() & 1));
      MeasureBall ball = f->star(sigma);
      if (ball_size(ball, 3 * n + 8) > pow2neg(3 * n)) return {false, "ball size at n=" + std::to_string(n)};
      // two parameters in the same modulus ball
      auto param = ball.pinned->bernoulli_parameter();
      Q width = param->hi - param->lo;
      Q q = param->lo + width * random_unit(g), r = param->lo + width * random_unit(g);
      Q sum = 0;
      for (std::size_t a = 0; a <= n; ++a) {
        Q d = Measure::bernoulli(q).value_class(n, a) - Measure::bernoulli(r).value_class(n, a);
        sum += binom(n, a) * (d < 0 ? Q(-d) : d);
      }
      if (sum >= pow2neg(n)) return {false, "level sum at n=" + std::to_string(n)};
    }
  }
  return {true, "100 triples, 6x50 balls and pairs"};
}

// 3. μ_Z samples: even bits spell Z, odd bits look fair, forced conditionals
Outcome crit3() {
  std::vector<std::pair<std::string, BitSource>> zs{{"1/3", BitSource::rational(Q(1, 3))},
                                                   {"0^w", BitSource::constant(0)},
                                                   {"alternating", BitSource::periodic(BitString("01"))}};
  for (const auto& [name, z] : zs) {
    Measure mu = Measure::interleave(z);
    int fair = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      BitString x = sample_stream(mu, seed, 2048);
      std::size_t zeros = 0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        if (i % 2 == 0) {
          if (x[i] != z.bit(i / 2)) return {false, name + ": even bit " + std::to_string(i)};
          if (mu.conditional(x.prefix(i), z.bit(i / 2)) != 1) return {false, name + ": conditional at " + std::to_string(i)};
        } else {
          zeros += x[i] == 0;
        }
      }
      double freq = static_cast<double>(zeros) / 1024.0;
      fair += freq >= 0.46 && freq <= 0.54;
    }
    if (fair < 9) return {false, name + ": odd frequency in range on " + std::to_string(fair) + "/10 seeds"};
  }
  return {true, "3 reals x 10 seeds"};
}

// Runs configs and requires each to pass.
Outcome suites(const std::vector<std::string>& names) {
  Outcome o;
  std::ostringstream os;
  for (const auto& name : names) {
    Report r = run(name);
    os << name << '=' << r.success.success_fraction << ' ';
    if (!r.passed) o.pass = false;
  }
  o.detail = os.str();
  return o;
}

const std::vector<std::string> kZ{"z1", "z2", "z3"};

std::vector<std::string> per_z(const std::string& stem) {
  std::vector<std::string> out;
  for (const auto& z : kZ) out.push_back(stem + z);
  return out;
}

Outcome crit6() {
  ExperimentConfig cfg = load_config(kSource / "configs" / "crit6_majority_bc.json");
  TablePtr t = build_table(cfg);
  Estimator est = build_estimator(cfg.codecs);
  auto v = build_learner(cfg.learner.at("bc_majority").at("V"), t, est);
  auto l = bc_majority_learner(v, t->param_map("bernoulli"), t);
  Stream stream = sample_streams(*t, cfg.truth, cfg.seeds, cfg.eval.horizon).front();
  // n₁: first modulus point where one vote target carries weight above 1/2
  std::size_t n1 = 0, checked = 0;
  for (const auto& st : l->steps(stream.bits)) {
    if (st.n == 0) continue;
    bool majority = false;
    for (std::size_t i = 0; i < st.set.members.size(); ++i) majority = majority || st.set.members[i].limit > Q(1, 2);
    if (!n1 && majority) n1 = st.n;
    if (!n1) continue;
    if (t->measures_equal(st.output, cfg.truth, cfg.eval.depth, cfg.eval.horizon) != Tri::Yes)
      return {false, "output at n=" + std::to_string(st.n) + " does not denote the truth"};
    ++checked;
  }
  if (!n1) return {false, "no majority point"};
  EvalConfig ex = cfg.eval;
  ex.notion = Notion::EX;
  auto traj = l->trajectory(stream.bits);
  StreamRecord bc = judge_trajectory(*t, cfg.eval, stream, traj);
  StreamRecord exr = judge_trajectory(*t, ex, stream, traj);
  std::ostringstream os;
  os << "n1=" << n1 << ", " << checked << " modulus points true, BC " << (bc.success ? "succeeds" : "fails") << ", EX "
     << (exr.success ? "succeeds" : "fails");
  return {bc.success && !exr.success, os.str()};
}

// 7. majority measure against the tuple-weight definition, exhaustive
Outcome crit7() {
  json manifest = json::parse(R"({"entries":[
    {"kind":"enumerated","tuples":[["0","1/4","1/2",0],["00","0","1/4",1],["1","1/2","3/4",2],["01","1/8","1/4",3]]},
    {"kind":"enumerated","tuples":[["0","1/4","1/2",0],["00","1/8","1/4",2],["1","1/2","3/4",1],["10","1/4","1/2",4]]},
    {"kind":"enumerated","tuples":[["0","1/3","2/3",1],["00","0","1/4",1],["1","1/3","2/3",0],["11","1/8","1/2",3]]}]})");
  TablePtr t = Table::from_manifest(manifest);
  std::vector<BitString> strings;
  for (std::size_t n = 0; n <= 6; ++n)
    for (auto& s : all_strings(n)) strings.push_back(s);
  const std::vector<Stage> stages{0, 1, 2, 3, 4, 1024};
  std::size_t sets = 0;
  std::vector<int> w;
  std::vector<Index> idx;
  std::function<bool(std::size_t, int)> rec;
  std::string failure;
  auto check = [&]() {
    WeightedSet a;
    std::map<Index, Q> per_measure;
    for (std::size_t i = 0; i < idx.size(); ++i) {
      a.members.push_back({idx[i], Q(w[i], 8)});
      per_measure[idx[i]] += Q(w[i], 8);
    }
    int majorities = 0;
    for (auto& [e, q] : per_measure) majorities += q > Q(1, 2);
    if (majorities > 1) {
      failure = "two majorities";
      return false;
    }
    Index m = majority_measure(a, *t);
    const Entry& out = t->entry(m);
    for (Stage s : stages)
      for (const auto& sigma : strings) {
        std::vector<std::pair<Interval, Q>> brute;
        for (std::size_t i = 0; i < idx.size(); ++i) {
          std::vector<Interval> seen;
          for (const auto& tu : t->entry(idx[i]).tuples(sigma, s)) {
            if (std::find(seen.begin(), seen.end(), tu) != seen.end()) continue;
            seen.push_back(tu);
            auto it = std::find_if(brute.begin(), brute.end(), [&](const auto& p) { return p.first == tu; });
            if (it == brute.end())
              brute.emplace_back(tu, a.weight(i, s));
            else
              it->second += a.weight(i, s);
          }
        }
        std::vector<Interval> want;
        for (auto& [iv, q] : brute)
          if (q > Q(1, 2)) want.push_back(iv);
        std::vector<Interval> got = out.tuples(sigma, s);
        for (const auto& iv : want)
          if (std::find(got.begin(), got.end(), iv) == got.end()) {
            failure = "missing tuple at " + sigma.str() + " for " + a.key();
            return false;
          }
        for (const auto& iv : got)
          if (std::find(want.begin(), want.end(), iv) == want.end()) {
            failure = "extra tuple at " + sigma.str() + " for " + a.key();
            return false;
          }
      }
    ++sets;
    return true;
  };
  // multisets of members (nondecreasing index) with grid weights summing to at most 1
  rec = [&](std::size_t depth, int budget) -> bool {
    if (depth > 0 && !check()) return false;
    if (depth == 4) return true;
    Index from = idx.empty() ? 0 : idx.back();
    for (Index e = from; e < 3; ++e)
      for (int q = 0; q <= budget; ++q) {
        idx.push_back(e);
        w.push_back(q);
        bool ok = rec(depth + 1, budget - q);
        idx.pop_back();
        w.pop_back();
        if (!ok) return false;
      }
    return true;
  };
  if (!rec(0, 8)) return {false, failure};
  return {true, std::to_string(sets) + " weighted sets"};
}

Outcome crit8() {
  Outcome o;
  std::ostringstream os;
  for (const auto& z : kZ) {
    Report r = run("crit8_partialex_" + z);
    std::size_t switches = 0;
    for (const auto& stream : r.body.at("events"))
      for (const auto& e : stream.at("events")) switches += e.at("event") == "exclusion_switch";
    o.pass = o.pass && r.passed && switches > 0;
    os << z << '=' << r.success.success_fraction << " switches=" << switches << ' ';
  }
  o.detail = os.str();
  return o;
}

Outcome crit9() {
  Outcome a = suites(per_z("crit9_interleave_"));
  Outcome b = suites(per_z("crit9_lift_"));
  return {a.pass && b.pass, a.detail + b.detail};
}

Outcome crit11() {
  Outcome o;
  std::ostringstream os;
  for (const auto& z : kZ) {
    Report plain = run("crit11_cost_" + z);
    Report flipped = run("crit11_cost_flips_" + z);
    const Stage horizon = 500;
    bool same = plain.success.records.size() == flipped.success.records.size();
    for (std::size_t i = 0; same && i < plain.success.records.size(); ++i) {
      const auto& p = plain.success.records[i].trajectory;
      const auto& f = flipped.success.records[i].trajectory;
      same = std::equal(p.begin() + horizon, p.end(), f.begin() + horizon, f.end());
    }
    os << z << '=' << plain.success.success_fraction << '/' << flipped.success.success_fraction
       << (same ? " coincide " : " differ ");
    o.pass = o.pass && plain.passed && flipped.passed && same &&
             plain.success.success_fraction == flipped.success.success_fraction;
  }
  o.detail = os.str();
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"1 measure core exactness", crit1},
      {"2 metric and modulus", crit2},
      {"3 interleaving measure structure", crit3},
      {"4 real to measure lift", [] { return suites(per_z("crit4_lift_")); }},
      {"5 measure to real via weights", [] { return suites(per_z("crit5_weight_")); }},
      {"6 BC majority vs EX", crit6},
      {"7 majority brute force", crit7},
      {"8 partial EX extension", crit8},
      {"9 interleave round trip", crit9},
      {"10 universal partial learner", [] {
         return suites({"crit10_universal_0", "crit10_universal_2", "crit10_universal_4"});
       }},
      {"11 cost learner with totality oracle", crit11},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS " : "FAIL ") << "criterion " << name << " (" << seconds_since(t0) << "): " << o.detail
              << std::endl;
  }
  std::cout << (failed ? std::to_string(failed) + " criterion(s) failed" : std::string("all criteria passed")) << std::endl;
  return failed ? 1 : 0;
}
