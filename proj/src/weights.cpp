#include "mlab/weights.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>

namespace mlab {

namespace {

constexpr long double kRelTol = 1e-9L;

long double log2_binom(std::size_t n, std::size_t a) {
  return (std::lgammal(n + 1.0L) - std::lgammal(a + 1.0L) - std::lgammal(n - a + 1.0L)) / std::log(2.0L);
}

Q binom(std::size_t n, std::size_t a) {
  mpz_class r;
  mpz_bin_uiui(r.get_mpz_t(), n, a);
  return Q(r);
}

}  // namespace

VoteWeights VoteWeights::compute(const Learner& v, const Measure& center, std::size_t n, std::uint64_t seed) {
  if (!center.exact()) throw MeasureError("vote weights need an exact center");
  VoteWeights w;
  w.n_ = n;
  w.center_ = center;
  if (v.exchangeable() && center.exchangeable()) {
    w.mode_ = Mode::Classes;
    const long double q = center.q().get_d();
    const long double lq = q > 0 ? std::log2(q) : 0, lp = q < 1 ? std::log2(1 - q) : 0;
    for (std::size_t a = 0; a <= n; ++a) {
      if ((a > 0 && q == 0) || (a < n && q == 1)) continue;
      long double lw = log2_binom(n, a) + (a > 0 ? a * lq : 0) + (a < n ? (n - a) * lp : 0);
      Group& g = w.groups_[v.guess(class_representative(n, a))];
      g.weight += std::exp2(lw);
      g.members.push_back(a);
    }
    return w;
  }
  if (n <= kEnumerateBits) {
    w.mode_ = Mode::Strings;
    BitString sigma;
    std::function<void(std::uint64_t)> dfs = [&](std::uint64_t rank) {
      Q mass = center.value(sigma);
      if (mass == 0) return;
      if (sigma.size() == n) {
        Group& g = w.groups_[v.guess(sigma)];
        g.weight += mass.get_d();
        g.members.push_back(rank);
        return;
      }
      for (int b = 0; b < 2; ++b) {
        sigma.push_back(b);
        dfs(2 * rank + b);
        sigma.pop_back();
      }
    };
    dfs(0);
    return w;
  }
  w.mode_ = Mode::Sampled;
  std::map<Index, std::uint64_t> counts;
  for (std::size_t k = 0; k < kSamples; ++k) ++counts[v.guess(sample_stream(center, seed * kSamples + k, n))];
  for (const auto& [e, c] : counts) {
    Group& g = w.groups_[e];
    g.weight = static_cast<long double>(c) / kSamples;
    g.members.push_back(c);
  }
  return w;
}

std::vector<Index> VoteWeights::indices() const {
  std::vector<Index> out;
  for (const auto& [e, g] : groups_) out.push_back(e);
  return out;
}

long double VoteWeights::weight(Index e) const {
  auto it = groups_.find(e);
  return it == groups_.end() ? 0 : it->second.weight;
}

Q VoteWeights::exact(Index e) const {
  auto it = groups_.find(e);
  if (it == groups_.end()) return Q(0);
  Q total = 0;
  for (std::uint64_t m : it->second.members) {
    switch (mode_) {
      case Mode::Classes:
        total += binom(n_, m) * center_.value_class(n_, m);
        break;
      case Mode::Strings:
        total += center_.value(string_from_index(m, n_));
        break;
      case Mode::Sampled:
        total += Q(mpz_class(static_cast<unsigned long>(m)), mpz_class(static_cast<unsigned long>(kSamples)));
        break;
    }
  }
  total.canonicalize();
  return total;
}

int VoteWeights::compare(Index a, const Q& factor, Index b) const {
  const bool has_a = groups_.count(a) != 0, has_b = groups_.count(b) != 0;
  // an index without votes weighs exactly 0
  if (!has_b || factor == 0) return has_a ? 1 : 0;
  if (!has_a) return -1;
  long double x = weight(a), y = factor.get_d() * weight(b);
  if (std::fabs(x - y) > kRelTol * std::max(x, y)) return x > y ? 1 : -1;
  Q ex = exact(a), ey = factor * exact(b);
  return ex > ey ? 1 : (ex < ey ? -1 : 0);
}

bool VoteWeights::exceeds(Index a, const Q& factor, Index b) const { return compare(a, factor, b) > 0; }

std::optional<Index> VoteWeights::least_argmax(const std::function<bool(Index)>& eligible, bool* tie) const {
  std::optional<Index> best;
  bool tied = false;
  for (const auto& [e, g] : groups_) {
    if (eligible && !eligible(e)) continue;
    if (!best) {
      best = e;
      continue;
    }
    int c = compare(e, Q(1), *best);
    if (c > 0) {
      best = e;
      tied = false;
    } else if (c == 0) {
      tied = true;
    }
  }
  if (tie) *tie = tied;
  return best;
}

json VoteWeights::to_json() const {
  static const char* names[] = {"classes", "strings", "sampled"};
  json rows = json::array();
  for (const auto& [e, g] : groups_) rows.push_back({e, static_cast<double>(g.weight)});
  return {{"n", n_}, {"mode", names[static_cast<int>(mode_)]}, {"weights", rows}};
}

Index weight_rule(const std::map<Index, Q>& wgt, Index current) {
  const Index* best = nullptr;
  Q top = 0;
  for (const auto& [e, w] : wgt)
    if (w > top) best = &e, top = w;
  if (!best) return current;
  auto it = wgt.find(current);
  Q now = it == wgt.end() ? Q(0) : it->second;
  return top > 3 * now ? *best : current;
}

bool h_predicate(const MeasureBall& c, Index e, const Table& t, Stage s) {
  return ball_contains(c, t.knowledge(e, s)) == Tri::No;
}

WeightLearner::WeightLearner(LearnerPtr v, ParamMapPtr f, TablePtr t, Rule rule)
    : v_(std::move(v)), f_(std::move(f)), t_(std::move(t)), rule_(rule) {
  if (!v_ || !f_ || !t_) throw std::invalid_argument("weight learner needs V, f and a table");
}

WeightStep WeightLearner::step(const BitString& prefix, std::size_t n, Index current) const {
  WeightStep st;
  st.n = n;
  st.length = prefix.size();
  st.before = current;
  st.after = current;
  VoteWeights w = VoteWeights::compute(*v_, f_->center(prefix), n, n);
  st.voted = w.indices().size();
  st.w_current = w.weight(current);
  if (rule_ == Rule::EX) {
    st.candidate = w.least_argmax(nullptr, &st.tie);
    st.eligible = st.voted;
    if (st.candidate && w.exceeds(*st.candidate, Q(3), current)) {
      st.after = *st.candidate;
      st.clause = 'a';
    }
  } else {
    MeasureBall star = f_->star(prefix);
    std::map<Index, bool> excluded;
    auto is_excluded = [&](Index e) {
      auto it = excluded.find(e);
      if (it != excluded.end()) return it->second;
      bool x = h_predicate(star, e, *t_, n);
      excluded.emplace(e, x);
      return x;
    };
    st.candidate = w.least_argmax([&](Index e) { return !is_excluded(e); }, &st.tie);
    for (Index e : w.indices()) st.eligible += !is_excluded(e);
    if (st.candidate) {
      if (is_excluded(current)) {
        st.after = *st.candidate;
        st.clause = 'b';
      } else if (w.exceeds(*st.candidate, Q(3), current)) {
        st.after = *st.candidate;
        st.clause = 'a';
      }
    }
  }
  if (st.candidate) st.w_candidate = w.weight(*st.candidate);
  return st;
}

std::vector<WeightStep> WeightLearner::steps(const BitString& x) const {
  std::vector<WeightStep> out;
  Index current = 0;
  for (std::size_t n = 1;; ++n) {
    std::size_t m = f_->modulus(n);
    if (m > x.size()) break;
    out.push_back(step(x.prefix(m), n, current));
    current = out.back().after;
  }
  return out;
}

Index WeightLearner::guess(const BitString& sigma) const {
  auto st = steps(sigma);
  return st.empty() ? 0 : st.back().after;
}

std::vector<Index> WeightLearner::trajectory(const BitString& x) const {
  auto st = steps(x);
  std::vector<Index> out(x.size() + 1, 0);
  std::size_t k = 0;
  Index g = 0;
  for (std::size_t len = 0; len <= x.size(); ++len) {
    while (k < st.size() && st[k].length <= len) g = st[k++].after;
    out[len] = g;
  }
  return out;
}

json WeightLearner::describe() const {
  return {{rule_ == Rule::EX ? "ex_weight" : "partialex_weight", {{"V", v_->describe()}, {"map", f_->name()}}}};
}

json WeightLearner::events(const BitString& x) const {
  json out = json::array();
  for (const auto& st : steps(x)) {
    if (st.tie) out.push_back({{"event", "tie"}, {"n", st.n}, {"length", st.length}, {"candidate", *st.candidate}});
    if (st.clause == 'b')
      out.push_back({{"event", "exclusion_switch"}, {"n", st.n}, {"length", st.length}, {"from", st.before}, {"to", st.after}});
  }
  return out;
}

std::shared_ptr<const WeightLearner> ex_weight_learner(LearnerPtr v, ParamMapPtr f, TablePtr t) {
  return std::make_shared<WeightLearner>(std::move(v), std::move(f), std::move(t), WeightLearner::Rule::EX);
}

std::shared_ptr<const WeightLearner> partialex_weight_learner(LearnerPtr v, ParamMapPtr f, TablePtr t) {
  return std::make_shared<WeightLearner>(std::move(v), std::move(f), std::move(t), WeightLearner::Rule::PartialEX);
}

namespace {

class InverseLiftLearner final : public Learner {
 public:
  InverseLiftLearner(LearnerPtr l, ParamMapPtr f, ClosedClass d, TablePtr t)
      : l_(std::move(l)), f_(std::move(f)), d_(std::move(d)), t_(std::move(t)) {}
  Index guess(const BitString& sigma) const override { return t_->inverse_lift(f_, d_, l_->guess(sigma)); }
  std::vector<Index> trajectory(const BitString& x) const override {
    std::vector<Index> out = l_->trajectory(x);
    std::map<Index, Index> memo;
    for (Index& e : out) {
      auto it = memo.find(e);
      if (it == memo.end()) it = memo.emplace(e, t_->inverse_lift(f_, d_, e)).first;
      e = it->second;
    }
    return out;
  }
  json events(const BitString& x) const override { return l_->events(x); }
  json describe() const override {
    return {{"inverse_lift", {{"learner", l_->describe()}, {"map", f_->name()}, {"class", d_.name()}}}};
  }

 private:
  LearnerPtr l_;
  ParamMapPtr f_;
  ClosedClass d_;
  TablePtr t_;
};

}  // namespace

LearnerPtr inverse_lift_learner(LearnerPtr measures, ParamMapPtr f, ClosedClass d, TablePtr t) {
  return std::make_shared<InverseLiftLearner>(std::move(measures), std::move(f), std::move(d), std::move(t));
}

json weight_steps_json(const std::vector<WeightStep>& steps) {
  json out = json::array();
  for (const auto& s : steps) {
    json row{{"n", s.n},
             {"length", s.length},
             {"before", s.before},
             {"after", s.after},
             {"w_current", static_cast<double>(s.w_current)},
             {"voted", s.voted},
             {"eligible", s.eligible},
             {"tie", s.tie}};
    if (s.candidate) {
      row["candidate"] = *s.candidate;
      row["w_candidate"] = static_cast<double>(s.w_candidate);
    }
    if (s.clause) row["clause"] = std::string(1, s.clause);
    out.push_back(row);
  }
  return out;
}

}  // namespace mlab
