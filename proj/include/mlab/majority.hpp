// Weighted sets of measure indices, the majority measure of a weighted set,
// and the BC learner that outputs the majority of the vote weights.
#pragma once

#include "mlab/weights.hpp"

namespace mlab {

struct WeightedMember {
  Index index = 0;
  Q limit;  // w_i = lim_s w_i[s]
};

// w_i[s] = floor(limit 2^k) 2^-k with k = min(s, 60): dyadic and
// nondecreasing in s.
struct WeightedSet {
  static constexpr Stage kMaxBits = 60;
  std::vector<WeightedMember> members;

  Q weight(std::size_t i, Stage s) const;
  Q total(Stage s) const;
  // Limits nonnegative with sum <= 1; throws std::invalid_argument.
  void validate() const;
  std::string key() const;
  json to_json() const;

  // Every index with positive vote weight, with limit a dyadic lower bound of
  // that weight (the sample frequency itself when sampled).
  static WeightedSet from_votes(const VoteWeights& w);
};

// Index of the measure whose stage-s tuples are the (σ, I) of stage-s weight
// above 1/2 among the members' stage-s tuples. Memoized per weighted set.
Index majority_measure(const WeightedSet& a, const Table& t);

struct MajorityStep {
  std::size_t n = 0;
  std::size_t length = 0;
  WeightedSet set;
  Index output = 0;
};

// L*(ε) = 0; at |σ| = modulus(n) the output is the majority measure of the
// vote weights over 2^n; other lengths copy the last modulus point.
class MajorityLearner final : public Learner {
 public:
  MajorityLearner(LearnerPtr v, ParamMapPtr f, TablePtr t);
  Index guess(const BitString& sigma) const override;
  std::vector<Index> trajectory(const BitString& x) const override;
  json describe() const override;
  std::vector<MajorityStep> steps(const BitString& x) const;

 private:
  LearnerPtr v_;
  ParamMapPtr f_;
  TablePtr t_;
};

std::shared_ptr<const MajorityLearner> bc_majority_learner(LearnerPtr v, ParamMapPtr f, TablePtr t);

}  // namespace mlab
