#include "mlab/param_maps.hpp"

#include <map>
#include <mutex>

#include "mlab/programs.hpp"

namespace mlab {

namespace {

class BernoulliPinned final : public PinnedSource {
 public:
  BernoulliPinned(Q lo, Q hi, std::size_t k) : lo_(std::move(lo)), hi_(std::move(hi)), k_(k) {}
  std::size_t depth() const override { return k_; }
  bool exchangeable() const override { return true; }
  Interval at(const BitString& sigma) const override { return at_class(sigma.size(), sigma.zeros_count()); }
  Level level(std::size_t j) const override {
    Level out{Q(0), Q(0)};
    for (std::size_t a = 0; a <= j; ++a) {
      Interval iv = at_class(j, a);
      if (iv.width() > out.max_width) out.max_width = iv.width();
      if (iv.hi > out.max_hi) out.max_hi = iv.hi;
    }
    return out;
  }
  std::optional<Interval> bernoulli_parameter() const override { return Interval::closed(lo_, hi_); }
  json describe() const override {
    return {{"map", "bernoulli"}, {"lo", to_string(lo_)}, {"hi", to_string(hi_)}, {"depth", k_}};
  }

 private:
  Interval at_class(std::size_t n, std::size_t a) const {
    std::lock_guard<std::mutex> lock(m_);
    auto key = std::make_pair(n, a);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    Interval iv = bernoulli_range(lo_, hi_, a, n - a);
    cache_.emplace(key, iv);
    return iv;
  }

  Q lo_, hi_;
  std::size_t k_;
  mutable std::mutex m_;
  mutable std::map<std::pair<std::size_t, std::size_t>, Interval> cache_;
};

class BernoulliScorer final : public CylinderScorer {
 public:
  BernoulliScorer(Q lo, Q hi) : lo_(std::move(lo)), hi_(std::move(hi)) {}
  Ext next(int bit) override {
    ++n_;
    zeros_ += bit == 0;
    return bernoulli_neglog_sup(lo_, hi_, zeros_, n_ - zeros_);
  }

 private:
  Q lo_, hi_;
  std::size_t n_ = 0, zeros_ = 0;
};

class BernoulliMap final : public ParamMap {
 public:
  std::string name() const override { return "bernoulli"; }
  bool exchangeable() const override { return true; }
  MeasureBall star(const BitString& tau) const override {
    MeasureBall b;
    std::size_t k = tau.size() / 3;
    if (k == 0) return b;
    Q lo = dyadic_value(tau);
    b.pinned = std::make_shared<BernoulliPinned>(lo, lo + pow2neg(tau.size()), k);
    return b;
  }
  std::size_t modulus(std::size_t n) const override { return bernoulli_modulus(n); }
  std::unique_ptr<CylinderScorer> cylinder_scorer(const BitString& tau) const override {
    Q lo = dyadic_value(tau);
    return std::make_unique<BernoulliScorer>(lo, lo + pow2neg(tau.size()));
  }
  Measure center(const BitString& tau) const override {
    return Measure::bernoulli(dyadic_value(tau) + pow2neg(tau.size() + 1));
  }
};

class InterleavePinned final : public PinnedSource {
 public:
  explicit InterleavePinned(BitString tau) : tau_(std::move(tau)) {}
  std::size_t depth() const override { return 2 * tau_.size(); }
  Interval at(const BitString& sigma) const override {
    for (std::size_t i = 0; i < sigma.size(); i += 2)
      if (sigma[i] != tau_[i / 2]) return Interval::point(Q(0));
    return Interval::point(pow2neg(sigma.size() / 2));
  }
  Level level(std::size_t j) const override { return {Q(0), pow2neg(j / 2)}; }
  json describe() const override { return {{"map", "interleave"}, {"tau", tau_.str()}}; }

 private:
  BitString tau_;
};

// μ_Z(σ) = 2^-⌊|σ|/2⌋ when the even positions of σ spell a prefix of Z, else 0.
class InterleaveScorer final : public CylinderScorer {
 public:
  explicit InterleaveScorer(BitString tau) : tau_(std::move(tau)) {}
  Ext next(int bit) override {
    std::size_t i = n_++;
    if (i % 2 == 0 && i / 2 < tau_.size() && bit != tau_[i / 2]) dead_ = true;
    return dead_ ? kInfinity : static_cast<Ext>(n_ / 2);
  }

 private:
  BitString tau_;
  std::size_t n_ = 0;
  bool dead_ = false;
};

class InterleaveMap final : public ParamMap {
 public:
  std::string name() const override { return "interleave"; }
  MeasureBall star(const BitString& tau) const override {
    MeasureBall b;
    if (tau.empty()) return b;
    b.pinned = std::make_shared<InterleavePinned>(tau);
    return b;
  }
  std::size_t modulus(std::size_t n) const override { return n; }
  std::unique_ptr<CylinderScorer> cylinder_scorer(const BitString& tau) const override {
    return std::make_unique<InterleaveScorer>(tau);
  }
  Measure center(const BitString& tau) const override {
    return Measure::interleave(BitSource::rational(dyadic_value(tau)));
  }
};

}  // namespace

std::size_t bernoulli_modulus(std::size_t n) {
  static std::mutex m;
  static std::map<std::size_t, std::size_t> cache;
  std::lock_guard<std::mutex> lock(m);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  // With k = ⌊m/3⌋ every j <= k has j 2^-m < 1, so the bound is
  // 2^-m (2 - (k+2) 2^-k) + 2^-k. It decreases in m, and m < 9n leaves
  // 2^-k > 2^-3n, so the search starts at 9n.
  Q target = pow2neg(3 * n);
  std::size_t m_len = 9 * n;
  for (;; ++m_len) {
    std::size_t k = m_len / 3;
    Q total = pow2neg(m_len) * (Q(2) - Q(static_cast<long>(k + 2)) * pow2neg(k)) + pow2neg(k);
    if (total <= target) break;
  }
  cache.emplace(n, m_len);
  return m_len;
}

ParamMapPtr bernoulli_param_map() {
  static const ParamMapPtr map = std::make_shared<BernoulliMap>();
  return map;
}

ParamMapPtr interleave_param_map() {
  static const ParamMapPtr map = std::make_shared<InterleaveMap>();
  return map;
}

}  // namespace mlab
