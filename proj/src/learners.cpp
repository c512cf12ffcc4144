#include "mlab/learners.hpp"

#include <algorithm>
#include <mutex>
#include <stdexcept>

namespace mlab {

std::vector<Index> Learner::trajectory(const BitString& x) const {
  std::vector<Index> out;
  out.reserve(x.size() + 1);
  for (std::size_t n = 0; n <= x.size(); ++n) out.push_back(guess(x.prefix(n)));
  return out;
}

std::vector<Index> run_learner(const Learner& l, const BitString& x) { return l.trajectory(x); }

namespace {

std::uint64_t splitmix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

std::vector<Index> sorted_family(std::vector<Index> family) {
  if (family.empty()) throw std::invalid_argument("learner family is empty");
  std::sort(family.begin(), family.end());
  family.erase(std::unique(family.begin(), family.end()), family.end());
  return family;
}

class ConstantLearner final : public Learner {
 public:
  explicit ConstantLearner(Index e) : e_(e) {}
  Index guess(const BitString&) const override { return e_; }
  bool exchangeable() const override { return true; }
  json describe() const override { return {{"learner", "constant"}, {"index", e_}}; }

 private:
  Index e_;
};

class AlternatingLearner final : public Learner {
 public:
  AlternatingLearner(Index a, Index b) : a_(a), b_(b) {}
  Index guess(const BitString& sigma) const override { return sigma.size() % 2 == 0 ? a_ : b_; }
  bool exchangeable() const override { return true; }
  json describe() const override { return {{"learner", "alternating"}, {"even", a_}, {"odd", b_}}; }

 private:
  Index a_, b_;
};

class ChurnAliasLearner final : public Learner {
 public:
  ChurnAliasLearner(TablePtr t, Index truth, std::size_t period) : t_(std::move(t)), truth_(truth), period_(period) {
    if (period_ == 0) throw std::invalid_argument("churn period must be positive");
    t_->pad(truth_, 0);  // truth must be a manifest entry
  }
  Index guess(const BitString& sigma) const override { return t_->pad(truth_, sigma.size() % period_); }
  bool exchangeable() const override { return true; }
  json describe() const override { return {{"learner", "churn_alias"}, {"truth", truth_}, {"period", period_}}; }

 private:
  TablePtr t_;
  Index truth_;
  std::size_t period_;
};

class HashSplitLearner final : public Learner {
 public:
  HashSplitLearner(std::vector<WeightedTarget> targets, std::uint64_t salt) : targets_(std::move(targets)), salt_(salt) {
    if (targets_.empty()) throw std::invalid_argument("hash_split needs targets");
    Q total = 0;
    for (const auto& t : targets_) {
      if (t.weight < 0) throw std::invalid_argument("hash_split weights must be nonnegative");
      total += t.weight;
    }
    if (total != 1) throw std::invalid_argument("hash_split weights must sum to 1");
  }
  Index guess(const BitString& sigma) const override {
    std::uint64_t h = splitmix(splitmix(sigma.size() ^ salt_) ^ sigma.zeros_count());
    mpz_class num;
    mpz_import(num.get_mpz_t(), 1, 1, sizeof h, 0, 0, &h);
    Q point(num, mpz_class(1) << 64);
    point.canonicalize();
    Q cum = 0;
    for (const auto& t : targets_) {
      cum += t.weight;
      if (point < cum) return t.index;
    }
    return targets_.back().index;
  }
  bool exchangeable() const override { return true; }
  json describe() const override {
    json out{{"learner", "hash_split"}, {"salt", salt_}, {"targets", json::array()}};
    for (const auto& t : targets_) out["targets"].push_back({t.index, to_string(t.weight)});
    return out;
  }

 private:
  std::vector<WeightedTarget> targets_;
  std::uint64_t salt_;
};

class IdealRealLearner final : public Learner {
 public:
  IdealRealLearner(TablePtr t, std::vector<Index> family) : t_(std::move(t)), family_(sorted_family(std::move(family))) {
    for (Index e : family_) {
      if (t_->kind(e) != EntryKind::Real || !t_->ground_truth_total(e))
        throw std::invalid_argument("ideal_real_learner: family entries must be total reals");
      sources_.push_back(t_->real_source(e));
    }
  }
  Index guess(const BitString& sigma) const override {
    for (std::size_t k = 0; k < family_.size(); ++k)
      if (sources_[k].prefix(sigma.size()) == sigma) return family_[k];
    return family_.front();
  }
  std::vector<Index> trajectory(const BitString& x) const override {
    std::vector<bool> alive(family_.size(), true);
    std::vector<Index> out{family_.front()};
    for (std::size_t n = 0; n < x.size(); ++n) {
      Index g = family_.front();
      bool found = false;
      for (std::size_t k = 0; k < family_.size(); ++k) {
        if (alive[k] && sources_[k].bit(n) != x[n]) alive[k] = false;
        if (alive[k] && !found) g = family_[k], found = true;
      }
      out.push_back(g);
    }
    return out;
  }
  json describe() const override { return {{"learner", "ideal_real"}, {"family", family_}}; }

 private:
  TablePtr t_;
  std::vector<Index> family_;
  std::vector<BitSource> sources_;
};

class IdealInterleaveLearner final : public Learner {
 public:
  IdealInterleaveLearner(TablePtr t, std::vector<Index> family)
      : t_(std::move(t)), family_(sorted_family(std::move(family))) {
    for (Index e : family_) {
      const Measure* mu = t_->entry(e).exact_measure();
      if (!mu || mu->kind() != Measure::Kind::Interleave)
        throw std::invalid_argument("ideal_interleave_learner: family entries must be μ_Z measures");
      z_.push_back(mu->z());
    }
  }
  Index guess(const BitString& sigma) const override {
    for (std::size_t k = 0; k < family_.size(); ++k) {
      bool ok = true;
      for (std::size_t i = 0; i < sigma.size() && ok; i += 2) ok = sigma[i] == z_[k].bit(i / 2);
      if (ok) return family_[k];
    }
    return family_.front();
  }
  std::vector<Index> trajectory(const BitString& x) const override {
    std::vector<bool> alive(family_.size(), true);
    std::vector<Index> out{family_.front()};
    for (std::size_t n = 0; n < x.size(); ++n) {
      Index g = family_.front();
      bool found = false;
      for (std::size_t k = 0; k < family_.size(); ++k) {
        if (n % 2 == 0 && alive[k] && z_[k].bit(n / 2) != x[n]) alive[k] = false;
        if (alive[k] && !found) g = family_[k], found = true;
      }
      out.push_back(g);
    }
    return out;
  }
  json describe() const override { return {{"learner", "ideal_interleave"}, {"family", family_}}; }

 private:
  TablePtr t_;
  std::vector<Index> family_;
  std::vector<BitSource> z_;
};

class FrequencyLearner final : public Learner {
 public:
  FrequencyLearner(TablePtr t, std::vector<Index> family) : t_(std::move(t)), family_(sorted_family(std::move(family))) {
    exchangeable_ = true;
    for (Index e : family_) {
      if (!t_->is_measure(e)) throw std::invalid_argument("frequency_learner: family entries must be measures");
      exchangeable_ = exchangeable_ && t_->entry(e).exchangeable();
    }
  }
  // K̂(σ) is common to every candidate, so the argmin of the deficiency is
  // the argmin of ceil(-log sup μ_e(σ)).
  Index guess(const BitString& sigma) const override { return pick(sigma, sigma.zeros_count()); }
  std::vector<Index> trajectory(const BitString& x) const override {
    std::vector<Index> out;
    out.reserve(x.size() + 1);
    BitString sigma;
    std::size_t zeros = 0;
    out.push_back(pick(sigma, 0));
    for (std::size_t n = 0; n < x.size(); ++n) {
      sigma.push_back(x[n]);
      zeros += x[n] == 0;
      out.push_back(pick(sigma, zeros));
    }
    return out;
  }
  bool exchangeable() const override { return exchangeable_; }
  json describe() const override { return {{"learner", "frequency"}, {"family", family_}}; }

 private:
  Index pick(const BitString& sigma, std::size_t zeros) const {
    Index best = family_.front();
    Ext best_u = kInfinity;
    bool first = true;
    for (Index e : family_) {
      Ext u = t_->entry(e).neglog_sup(sigma, zeros, sigma.size());
      if (first || u < best_u) best = e, best_u = u, first = false;
    }
    return best;
  }

  TablePtr t_;
  std::vector<Index> family_;
  bool exchangeable_ = true;
};

class CostOracleLearner final : public Learner {
 public:
  CostOracleLearner(TablePtr t, Estimator est, ParamMapPtr f) : t_(std::move(t)), est_(std::move(est)), f_(std::move(f)) {
    reals_ = t_->real_entries();
    for (Index r : reals_) lifts_.push_back(f_ ? t_->param_lift(f_, r) : t_->bernoulli_lift(r));
  }
  Index guess(const BitString& sigma) const override {
    Stage s = sigma.size();
    Ext k = est_.complexity_upper(sigma, std::max<Stage>(s, 1));
    return pick(sigma, sigma.zeros_count(), k);
  }
  std::vector<Index> trajectory(const BitString& x) const override {
    std::vector<Ext> k = est_.profile(x, std::max<Stage>(std::min<Stage>(x.size(), est_.ids().size()), 1));
    std::vector<Index> out;
    out.reserve(x.size() + 1);
    BitString sigma;
    std::size_t zeros = 0;
    for (std::size_t n = 0; n <= x.size(); ++n) {
      if (n > 0) {
        sigma.push_back(x[n - 1]);
        zeros += x[n - 1] == 0;
      }
      // the stage-n estimate uses only the first n codecs
      Ext kn = n < est_.ids().size() ? est_.complexity_upper(sigma, std::max<Stage>(n, 1)) : k[n];
      out.push_back(pick(sigma, zeros, kn));
    }
    return out;
  }
  bool exchangeable() const override {
    for (Index l : lifts_)
      if (!t_->entry(l).exchangeable()) return false;
    return true;
  }
  json describe() const override {
    return {{"learner", "cost_oracle"}, {"g", f_ ? "param_lift:" + f_->name() : "bernoulli_lift"}, {"codecs", est_.describe()}};
  }

 private:
  Index pick(const BitString& sigma, std::size_t zeros, Ext k) const {
    Stage s = sigma.size();
    bool found = false;
    Ext best_cost = 0;
    Index best = 0;
    for (std::size_t r = 0; r < reals_.size() && reals_[r] <= s; ++r) {
      // least alias of this real that the oracle currently accepts
      std::optional<Index> e;
      if (t_->totality_oracle(reals_[r], s) == 1) e = reals_[r];
      for (Index j = 0; !e; ++j) {
        Index p = t_->pad(reals_[r], j);
        if (p > s) break;
        if (t_->totality_oracle(p, s) == 1) e = p;
      }
      if (!e) continue;
      Ext d = ext_sub(t_->entry(lifts_[r]).neglog_sup(sigma, zeros, s), k);
      Ext cost = d == kInfinity ? kInfinity : static_cast<Ext>(*e) + d;
      if (!found || cost < best_cost || (cost == best_cost && *e < best)) {
        found = true;
        best_cost = cost;
        best = *e;
      }
    }
    if (!found) return 0;
    return f_ ? t_->param_lift(f_, best) : t_->bernoulli_lift(best);
  }

  TablePtr t_;
  Estimator est_;
  ParamMapPtr f_;
  std::vector<Index> reals_;
  std::vector<Index> lifts_;
};

class UniversalPartialLearner final : public Learner {
 public:
  UniversalPartialLearner(TablePtr t, Estimator est) : t_(std::move(t)), est_(std::move(est)) {
    for (Index i = 0; i < t_->base_size(); ++i)
      if (t_->is_measure(i)) candidates_.push_back(i);
  }
  Index guess(const BitString& sigma) const override { return trajectory(sigma).back(); }
  std::vector<Index> trajectory(const BitString& x) const override {
    const std::size_t m = candidates_.size();
    std::vector<std::size_t> best_len(m, 0);  // max_{t<s} ℓ_i[t]
    std::vector<Stage> last_gate(m, 0);       // last stage at which i was expansionary and gated
    std::vector<bool> ever(m, false);
    for (std::size_t c = 0; c < m; ++c) best_len[c] = t_->entry(candidates_[c]).definedness(0);

    std::vector<Ext> k = est_.profile(x, std::max<Stage>(std::min<Stage>(x.size(), est_.ids().size()), 1));
    std::vector<Index> out{0};
    out.reserve(x.size() + 1);
    BitString sigma;
    std::size_t zeros = 0;
    std::vector<bool> gated(m);
    for (std::size_t s = 1; s <= x.size(); ++s) {
      sigma.push_back(x[s - 1]);
      zeros += x[s - 1] == 0;
      Ext ks = s < est_.ids().size() ? est_.complexity_upper(sigma, s) : k[s];
      for (std::size_t c = 0; c < m; ++c) {
        const Entry& e = t_->entry(candidates_[c]);
        std::size_t len = e.definedness(s);
        bool expansionary = len > best_len[c];
        best_len[c] = std::max(best_len[c], len);
        gated[c] = expansionary && ext_sub(e.neglog_sup(sigma, zeros, s), ks) <= static_cast<Ext>(candidates_[c]);
      }
      Index g = out.back();
      Stage bound = 0;  // max gated stage t < s of the candidates below i
      for (std::size_t c = 0; c < m; ++c) {
        if (gated[c]) {
          Index i = candidates_[c];
          Index j = 0;
          while (t_->pad(i, j) <= bound) ++j;
          g = t_->pad(i, j);
          break;
        }
        if (ever[c]) bound = std::max(bound, last_gate[c]);
      }
      for (std::size_t c = 0; c < m; ++c)
        if (gated[c]) last_gate[c] = s, ever[c] = true;
      out.push_back(g);
    }
    return out;
  }
  json describe() const override { return {{"learner", "universal_partial"}, {"codecs", est_.describe()}}; }

 private:
  TablePtr t_;
  Estimator est_;
  std::vector<Index> candidates_;
};

}  // namespace

LearnerPtr constant_learner(Index e) { return std::make_shared<ConstantLearner>(e); }
LearnerPtr alternating_learner(Index a, Index b) { return std::make_shared<AlternatingLearner>(a, b); }
LearnerPtr churn_alias_learner(TablePtr t, Index truth, std::size_t period) {
  return std::make_shared<ChurnAliasLearner>(std::move(t), truth, period);
}
LearnerPtr hash_split_learner(std::vector<WeightedTarget> targets, std::uint64_t salt) {
  return std::make_shared<HashSplitLearner>(std::move(targets), salt);
}
LearnerPtr ideal_real_learner(TablePtr t, std::vector<Index> family) {
  return std::make_shared<IdealRealLearner>(std::move(t), std::move(family));
}
LearnerPtr ideal_interleave_learner(TablePtr t, std::vector<Index> family) {
  return std::make_shared<IdealInterleaveLearner>(std::move(t), std::move(family));
}
LearnerPtr frequency_learner(TablePtr t, std::vector<Index> family) {
  return std::make_shared<FrequencyLearner>(std::move(t), std::move(family));
}
LearnerPtr cost_oracle_learner(TablePtr t, Estimator est, ParamMapPtr f) {
  return std::make_shared<CostOracleLearner>(std::move(t), std::move(est), std::move(f));
}
LearnerPtr universal_partial_learner(TablePtr t, Estimator est) {
  return std::make_shared<UniversalPartialLearner>(std::move(t), std::move(est));
}

}  // namespace mlab
