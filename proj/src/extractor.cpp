#include "mlab/extractor.hpp"

#include <algorithm>
#include <stdexcept>

namespace mlab {

Extractor::Extractor(ParamMapPtr f, ClosedClass d, Estimator est, BitString x)
    : f_(std::move(f)), d_(std::move(d)), est_(std::move(est)), x_(std::move(x)) {}

void Extractor::use_stage(Stage s) {
  // K̂ at stage s only changes while s is below the number of codecs
  Stage eff = std::min<Stage>(std::max<Stage>(s, 1), est_.ids().size());
  if (eff == k_stage_) return;
  k_ = est_.profile(x_, eff);
  k_stage_ = eff;
  nodes_.clear();
  c_ = 0;
}

Ext Extractor::score(const BitString& tau, std::size_t n) {
  auto it = nodes_.find(tau);
  if (it == nodes_.end()) {
    Node fresh;
    fresh.scorer = f_->cylinder_scorer(tau);
    fresh.running = ext_sub(0, k_[0]);
    it = nodes_.emplace(tau, std::move(fresh)).first;
  }
  Node& node = it->second;
  while (node.fed < n) {
    Ext u = node.scorer->next(x_[node.fed]);
    ++node.fed;
    if (node.running != kInfinity) node.running = std::max(node.running, ext_sub(u, k_[node.fed]));
  }
  return node.running;
}

Extraction Extractor::extract(std::size_t n) {
  n = std::min(n, x_.size());
  if (n < last_n_) throw std::invalid_argument("extractor fed a shorter prefix");
  last_n_ = n;
  use_stage(n);
  const std::size_t max_depth = std::min<std::size_t>(kDepth, n);
  for (;;) {
    std::vector<BitString> last;
    if (score(BitString(), n) <= c_) last.push_back(BitString());
    bool vanished = last.empty();
    bool revivable = true;
    // survivors are alive at n, so a child is alive iff it is not itself forbidden
    const bool root_dead = d_.forbidden(BitString(), n);
    for (std::size_t depth = 0; depth < max_depth && !vanished; ++depth) {
      std::vector<BitString> next;
      Ext frontier = kInfinity;
      for (const auto& tau : last) {
        for (int b = 0; b < 2; ++b) {
          BitString c = tau.child(b);
          if (root_dead || d_.forbidden(c, n)) continue;
          Ext sc = score(c, n);
          if (sc <= c_)
            next.push_back(std::move(c));
          else
            frontier = std::min(frontier, sc);
        }
      }
      if (next.empty()) {
        vanished = true;
        revivable = frontier != kInfinity;
        break;
      }
      if (next.size() > kWidth) break;
      last = std::move(next);
    }
    if (!vanished) {
      Extraction out;
      out.prefix = longest_common_prefix(last);
      out.c = c_;
      out.depth = last.front().size();
      out.survivors = last.size();
      return out;
    }
    if (!revivable && !last.empty()) {
      // every child has mass 0 under its cylinder: no c revives the level
      Extraction out;
      out.prefix = longest_common_prefix(last);
      out.c = c_;
      out.depth = last.front().size();
      out.survivors = last.size();
      return out;
    }
    if (last.empty() && score(BitString(), n) == kInfinity) return Extraction{BitString(), c_, 0, 0};
    ++c_;
  }
}

BitString extract_parameter(const ParamMapPtr& f, const ClosedClass& d, const BitString& x, const Estimator& est,
                            Stage budget) {
  Extractor e(f, d, est, x.prefix(std::min<std::size_t>(x.size(), budget)));
  return e.extract(budget).prefix;
}

namespace {

class LiftRealLearner final : public Learner {
 public:
  LiftRealLearner(LearnerPtr l, ParamMapPtr f, ClosedClass d, TablePtr t, Estimator est)
      : l_(std::move(l)), f_(std::move(f)), d_(std::move(d)), t_(std::move(t)), est_(std::move(est)) {}
  Index guess(const BitString& sigma) const override {
    return g(l_->guess(extract_parameter(f_, d_, sigma, est_, sigma.size())));
  }
  std::vector<Index> trajectory(const BitString& x) const override {
    Extractor h(f_, d_, est_, x);
    std::vector<Index> out;
    out.reserve(x.size() + 1);
    BitString prev;
    Index prev_guess = 0;
    for (std::size_t n = 0; n <= x.size(); ++n) {
      BitString tau = h.extract(n).prefix;
      if (n == 0 || !(tau == prev)) prev_guess = g(l_->guess(tau));
      prev = std::move(tau);
      out.push_back(prev_guess);
    }
    return out;
  }
  json describe() const override {
    return {{"lift", {{"learner", l_->describe()}, {"map", f_->name()}, {"class", d_.name()}}}};
  }

 private:
  Index g(Index real) const { return t_->param_lift(f_, real); }

  LearnerPtr l_;
  ParamMapPtr f_;
  ClosedClass d_;
  TablePtr t_;
  Estimator est_;
};

}  // namespace

LearnerPtr lift_real_learner(LearnerPtr l, ParamMapPtr f, ClosedClass d, TablePtr t, Estimator est) {
  return std::make_shared<LiftRealLearner>(std::move(l), std::move(f), std::move(d), std::move(t), std::move(est));
}

}  // namespace mlab
