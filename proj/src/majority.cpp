#include "mlab/majority.hpp"

#include <algorithm>
#include <stdexcept>

namespace mlab {

Q WeightedSet::weight(std::size_t i, Stage s) const {
  const std::size_t k = static_cast<std::size_t>(std::min(s, kMaxBits));
  mpz_class scaled = members.at(i).limit.get_num() << k;
  mpz_fdiv_q(scaled.get_mpz_t(), scaled.get_mpz_t(), members[i].limit.get_den_mpz_t());
  Q out(scaled, mpz_class(1) << k);
  out.canonicalize();
  return out;
}

Q WeightedSet::total(Stage s) const {
  Q sum = 0;
  for (std::size_t i = 0; i < members.size(); ++i) sum += weight(i, s);
  return sum;
}

void WeightedSet::validate() const {
  Q sum = 0;
  for (const auto& m : members) {
    if (m.limit < 0) throw std::invalid_argument("weighted set: negative weight");
    sum += m.limit;
  }
  if (sum > 1) throw std::invalid_argument("weighted set: weights sum above 1");
}

std::string WeightedSet::key() const {
  std::string k = "majority:";
  for (const auto& m : members) k += std::to_string(m.index) + "@" + to_string(m.limit) + ";";
  return k;
}

json WeightedSet::to_json() const {
  json out = json::array();
  for (const auto& m : members) out.push_back({m.index, to_string(m.limit)});
  return out;
}

WeightedSet WeightedSet::from_votes(const VoteWeights& w) {
  WeightedSet a;
  for (Index e : w.indices()) {
    Q limit;
    if (w.sampled()) {
      limit = w.exact(e);
    } else {
      long double x = w.weight(e) * (1 - 1e-9L);
      limit = Q(mpz_class(static_cast<unsigned long>(std::ldexp(x, 60))), mpz_class(1) << 60);
      limit.canonicalize();
    }
    a.members.push_back({e, limit});
  }
  a.validate();
  return a;
}

namespace {

class MajorityEntry final : public Entry {
 public:
  MajorityEntry(const Table* t, WeightedSet a) : t_(t), a_(std::move(a)) {
    const Q half(1, 2);
    for (std::size_t i = 0; i < a_.members.size(); ++i)
      if (a_.members[i].limit > half) dominant_ = i;
    exchangeable_ = true;
    for (const auto& m : a_.members) exchangeable_ = exchangeable_ && t_->entry(m.index).exchangeable();
  }
  EntryKind kind() const override { return EntryKind::Measure; }
  bool total() const override { return dominant_ && t_->ground_truth_total(a_.members[*dominant_].index); }
  json describe() const override { return {{"kind", "majority"}, {"members", a_.to_json()}}; }
  bool exchangeable() const override { return exchangeable_; }

  Interval measure(const BitString& sigma, Stage s) const override {
    if (const Entry* d = delegate(s)) return d->measure(sigma, s);
    Interval out = Interval::unit();
    for (const auto& iv : tuples(sigma, s)) {
      out = out.intersect(iv);
      if (out.empty()) throw MeasureError("inconsistent majority at " + sigma.str());
    }
    return out;
  }
  Ext neglog_sup(const BitString& sigma, std::size_t zeros, Stage s) const override {
    if (const Entry* d = delegate(s)) return d->neglog_sup(sigma, zeros, s);
    return Entry::neglog_sup(sigma, zeros, s);
  }
  std::vector<Interval> tuples(const BitString& sigma, Stage s) const override {
    std::vector<std::pair<Interval, Q>> weighted;
    for (std::size_t i = 0; i < a_.members.size(); ++i) {
      Q w = a_.weight(i, s);
      // a member counts once per tuple however often it enumerates it
      std::vector<Interval> own = t_->entry(a_.members[i].index).tuples(sigma, s);
      for (std::size_t k = 0; k < own.size(); ++k) {
        const Interval& iv = own[k];
        if (std::find(own.begin(), own.begin() + k, iv) != own.begin() + k) continue;
        auto it = std::find_if(weighted.begin(), weighted.end(), [&](const auto& p) { return p.first == iv; });
        if (it == weighted.end())
          weighted.emplace_back(iv, w);
        else
          it->second += w;
      }
    }
    const Q half(1, 2);
    std::vector<Interval> out;
    for (auto& [iv, w] : weighted)
      if (w > half) out.push_back(iv);
    return out;
  }
  std::size_t definedness(Stage s) const override {
    if (const Entry* d = delegate(s)) return d->definedness(s);
    return Entry::definedness(s);
  }
  std::optional<Interval> bernoulli_parameter(Stage s) const override {
    if (const Entry* d = delegate(s)) return d->bernoulli_parameter(s);
    return std::nullopt;
  }

 private:
  // The member whose stage-s weight alone exceeds 1/2: its tuples are then
  // exactly the majority tuples.
  const Entry* delegate(Stage s) const {
    if (!dominant_ || a_.weight(*dominant_, s) <= Q(1, 2)) return nullptr;
    return &t_->entry(a_.members[*dominant_].index);
  }

  const Table* t_;
  WeightedSet a_;
  std::optional<std::size_t> dominant_;
  bool exchangeable_ = true;
};

}  // namespace

Index majority_measure(const WeightedSet& a, const Table& t) {
  a.validate();
  for (const auto& m : a.members)
    if (!t.is_measure(m.index)) throw ProgramError("majority member " + std::to_string(m.index) + " is not a measure");
  return t.allocate(a.key(), [&] { return std::make_shared<MajorityEntry>(&t, a); });
}

MajorityLearner::MajorityLearner(LearnerPtr v, ParamMapPtr f, TablePtr t)
    : v_(std::move(v)), f_(std::move(f)), t_(std::move(t)) {
  if (!v_ || !f_ || !t_) throw std::invalid_argument("majority learner needs V, f and a table");
}

std::vector<MajorityStep> MajorityLearner::steps(const BitString& x) const {
  std::vector<MajorityStep> out;
  for (std::size_t n = 1;; ++n) {
    std::size_t m = f_->modulus(n);
    if (m > x.size()) break;
    BitString prefix = x.prefix(m);
    MajorityStep st;
    st.n = n;
    st.length = m;
    st.set = WeightedSet::from_votes(VoteWeights::compute(*v_, f_->center(prefix), n, n));
    st.output = majority_measure(st.set, *t_);
    out.push_back(std::move(st));
  }
  return out;
}

Index MajorityLearner::guess(const BitString& sigma) const {
  auto st = steps(sigma);
  return st.empty() ? 0 : st.back().output;
}

std::vector<Index> MajorityLearner::trajectory(const BitString& x) const {
  auto st = steps(x);
  std::vector<Index> out(x.size() + 1, 0);
  std::size_t k = 0;
  Index g = 0;
  for (std::size_t len = 0; len <= x.size(); ++len) {
    while (k < st.size() && st[k].length <= len) g = st[k++].output;
    out[len] = g;
  }
  return out;
}

json MajorityLearner::describe() const {
  return {{"bc_majority", {{"V", v_->describe()}, {"map", f_->name()}}}};
}

std::shared_ptr<const MajorityLearner> bc_majority_learner(LearnerPtr v, ParamMapPtr f, TablePtr t) {
  return std::make_shared<MajorityLearner>(std::move(v), std::move(f), std::move(t));
}

}  // namespace mlab
