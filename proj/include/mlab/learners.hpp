// Learners L: 2^{<ω} -> N and the directly defined ones: toy learners for
// the evaluators, the frequency learner over a uniform family, the
// cost-based oracle learner and the universal partial learner.
#pragma once

#include <memory>
#include <vector>

#include "mlab/param_map.hpp"
#include "mlab/programs.hpp"
#include "mlab/randomness.hpp"

namespace mlab {

class Learner {
 public:
  virtual ~Learner() = default;
  virtual Index guess(const BitString& sigma) const = 0;
  // L(x↾n) for n = 0..|x|.
  virtual std::vector<Index> trajectory(const BitString& x) const;
  // guess() depends only on (|σ|, #0(σ)).
  virtual bool exchangeable() const { return false; }
  virtual json describe() const = 0;
  // Notable internal events along x (ties, exclusion switches), for reports.
  virtual json events(const BitString&) const { return json::array(); }
};

using LearnerPtr = std::shared_ptr<const Learner>;

std::vector<Index> run_learner(const Learner& l, const BitString& x);

LearnerPtr constant_learner(Index e);
// a on even lengths, b on odd ones.
LearnerPtr alternating_learner(Index a, Index b);
// pad(truth, |σ| mod period).
LearnerPtr churn_alias_learner(TablePtr t, Index truth, std::size_t period = 3);

struct WeightedTarget {
  Index index;
  Q weight;
};
// Each class (|σ|, #0(σ)) is hashed to a point of [0,1) and sent to the
// target whose cumulative-weight slot contains it.
LearnerPtr hash_split_learner(std::vector<WeightedTarget> targets, std::uint64_t salt = 0);

// On a prefix of some family real: the least family index whose bits agree
// with σ; the first family index when none does.
LearnerPtr ideal_real_learner(TablePtr t, std::vector<Index> family);
// On a prefix of a μ_Z-sample: the least μ_Z family entry whose Z agrees with
// the even positions of σ; the first family index when none does.
LearnerPtr ideal_interleave_learner(TablePtr t, std::vector<Index> family);

// argmin over the family of deficiency(e, σ, |σ|), ties to the least index.
LearnerPtr frequency_learner(TablePtr t, std::vector<Index> family);

// V(σ) = g(e) for the least real e <= |σ| minimizing e + d(g(e), σ)[|σ|]
// among those with totality_oracle(e, |σ|) = 1; 0 when none qualifies.
// g = bernoulli_lift when f is null, else param_lift(f, ·).
LearnerPtr cost_oracle_learner(TablePtr t, Estimator est, ParamMapPtr f = nullptr);

// Expansionary-stage learner over the manifest measures with padded output.
LearnerPtr universal_partial_learner(TablePtr t, Estimator est);

}  // namespace mlab
