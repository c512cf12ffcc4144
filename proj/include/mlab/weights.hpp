// Vote weights wgt(e) = μ_σ({τ ∈ 2^n : V(τ) = e}) and the learners built on
// them: the 3x-rule EX learner, its partial variant with exclusion, and the
// composition with inverse_lift that turns measure guesses into reals.
#pragma once

#include <map>
#include <optional>

#include "mlab/learners.hpp"

namespace mlab {

class VoteWeights {
 public:
  static constexpr std::size_t kEnumerateBits = 20;
  static constexpr std::size_t kSamples = 4096;

  // Exchangeable V and center group 2^n by zero count; otherwise strings of
  // positive center mass are enumerated up to 2^20 leaves, and beyond that
  // kSamples strings are drawn from the center with `seed`.
  static VoteWeights compute(const Learner& v, const Measure& center, std::size_t n, std::uint64_t seed = 0);

  std::size_t n() const { return n_; }
  bool sampled() const { return mode_ == Mode::Sampled; }
  // Indices with positive weight, ascending.
  std::vector<Index> indices() const;
  long double weight(Index e) const;  // 0 when e received no vote
  Q exact(Index e) const;              // exact mass (sample frequency when sampled)
  // wgt(a) > factor * wgt(b), with an exact comparison near ties.
  bool exceeds(Index a, const Q& factor, Index b) const;
  // Least index of maximal weight among those passing `eligible`; `tie` is
  // set when another eligible index has the same weight.
  std::optional<Index> least_argmax(const std::function<bool(Index)>& eligible, bool* tie = nullptr) const;
  json to_json() const;

 private:
  enum class Mode { Classes, Strings, Sampled };
  struct Group {
    long double weight = 0;
    std::vector<std::uint64_t> members;  // zero counts, string ranks or sample counts
  };
  int compare(Index a, const Q& factor, Index b) const;

  Mode mode_ = Mode::Classes;
  std::size_t n_ = 0;
  Measure center_;
  std::map<Index, Group> groups_;
};

// Exact reference for one EX step: the least index of maximal weight
// replaces `current` iff its weight exceeds 3 wgt(current).
Index weight_rule(const std::map<Index, Q>& wgt, Index current);

// Provable exclusion: ball_contains(C, μ_e at stage s) = no.
bool h_predicate(const MeasureBall& c, Index e, const Table& t, Stage s);

struct WeightStep {
  std::size_t n = 0;       // weights over 2^n
  std::size_t length = 0;  // modulus(n)
  Index before = 0;
  std::optional<Index> candidate;  // e*
  Index after = 0;
  long double w_candidate = 0;
  long double w_current = 0;
  char clause = 0;  // 'a' (3x rule) or 'b' (exclusion) when the guess switched
  bool tie = false;
  std::size_t voted = 0;     // indices with positive weight
  std::size_t eligible = 0;  // of those, not excluded (partial variant)
};

// L*(ε) = 0; at |σ| = modulus(n) the guess moves to the least maximal-weight
// e* when wgt(e*) > 3 wgt(current); other lengths copy the last modulus point.
// The partial variant only considers e with h_predicate(star(σ), e, n) false
// and also switches when the current guess becomes excluded.
class WeightLearner final : public Learner {
 public:
  enum class Rule { EX, PartialEX };
  WeightLearner(LearnerPtr v, ParamMapPtr f, TablePtr t, Rule rule);

  Index guess(const BitString& sigma) const override;
  std::vector<Index> trajectory(const BitString& x) const override;
  json describe() const override;
  json events(const BitString& x) const override;
  // One record per modulus length <= |x|.
  std::vector<WeightStep> steps(const BitString& x) const;

 private:
  WeightStep step(const BitString& prefix, std::size_t n, Index current) const;

  LearnerPtr v_;
  ParamMapPtr f_;
  TablePtr t_;
  Rule rule_;
};

std::shared_ptr<const WeightLearner> ex_weight_learner(LearnerPtr v, ParamMapPtr f, TablePtr t);
std::shared_ptr<const WeightLearner> partialex_weight_learner(LearnerPtr v, ParamMapPtr f, TablePtr t);

// e -> inverse_lift(f, D, e) applied to every guess of a measure learner.
LearnerPtr inverse_lift_learner(LearnerPtr measures, ParamMapPtr f, ClosedClass d, TablePtr t);

json weight_steps_json(const std::vector<WeightStep>& steps);

}  // namespace mlab
