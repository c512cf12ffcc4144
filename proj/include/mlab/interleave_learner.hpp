// From a learner V for the measures μ_Z to a learner for the reals Z:
// the majority-vote decoder, the g0 real entries it defines, and the
// stabilized EX wrapper.
#pragma once

#include "mlab/learners.hpp"

namespace mlab {

// Vote strings σ of length m: all of 2^m for m <= kEnumerateBits, otherwise
// the length-m prefixes of kSamples fixed uniform samples.
inline constexpr std::size_t kVoteEnumerateBits = 8;
inline constexpr std::size_t kVoteSamples = 32;
std::vector<BitString> vote_strings(std::size_t m);

// Bit m of the real whose first m bits are `partial`: j when at least 2/3 of
// the vote strings σ have μ_e((partial⊕σ)∗j) provably above μ_e(partial⊕σ)/2
// at stage s, with e = V(partial⊕σ); nullopt (stall) otherwise.
std::optional<int> interleave_decoder(const Learner& v, const Table& t, const BitString& partial, Stage s);

// g0(prefix): the real entry copying `prefix` and decoding every later bit.
// Memoized by (V, prefix).
Index g0_index(const LearnerPtr& v, const Table& t, const BitString& prefix);

struct InterleaveStep {
  std::size_t n = 0;
  std::size_t n0 = 0;
  std::size_t n0_votes = 0;        // least n0 meeting clause (i)
  std::size_t n0_disagreement = 0;  // least n0 meeting clause (ii)
  Index output = 0;
};

// L(Z↾n) = g0(Z↾n0) for the least n0 <= n such that (i) at least 2/3 of the
// vote strings have kept their V-guess since n0 and (ii) no earlier guess
// L(Z↾i), n0 < i < n, has a bit below n contradicting Z at stage n.
class InterleaveExLearner final : public Learner {
 public:
  InterleaveExLearner(LearnerPtr v, TablePtr t);
  Index guess(const BitString& z) const override;
  std::vector<Index> trajectory(const BitString& z) const override;
  json describe() const override;
  std::vector<InterleaveStep> steps(const BitString& z) const;

 private:
  LearnerPtr v_;
  TablePtr t_;
};

std::shared_ptr<const InterleaveExLearner> interleave_ex_learner(LearnerPtr v, TablePtr t);
// L(Z↾n) = g0(Z↾n).
LearnerPtr interleave_bc_learner(LearnerPtr v, TablePtr t);

}  // namespace mlab
