// The parameter extractor h: from a sample prefix, the common prefix of the
// parameters τ whose cylinder image keeps the sample's deficiency below c,
// with c escalated whenever the survivors vanish.
#pragma once

#include <map>
#include <memory>

#include "mlab/learners.hpp"

namespace mlab {

struct Extraction {
  BitString prefix;
  Ext c = 0;
  std::size_t depth = 0;      // depth of the level whose common prefix was taken
  std::size_t survivors = 0;  // size of that level
};

// Incremental extractor over successive prefixes of one sample x.
class Extractor {
 public:
  static constexpr std::size_t kWidth = 16;
  static constexpr std::size_t kDepth = 64;

  Extractor(ParamMapPtr f, ClosedClass d, Estimator est, BitString x);
  // h(x↾n) with budget n. Calls with nondecreasing n reuse earlier work.
  Extraction extract(std::size_t n);

 private:
  struct Node {
    std::unique_ptr<CylinderScorer> scorer;
    std::size_t fed = 0;
    Ext running = 0;  // max_{j <= fed} neglog(j) - K̂(x↾j)
  };
  Ext score(const BitString& tau, std::size_t n);
  void use_stage(Stage s);

  ParamMapPtr f_;
  ClosedClass d_;
  Estimator est_;
  BitString x_;
  std::vector<Ext> k_;
  Stage k_stage_ = 0;
  std::map<BitString, Node> nodes_;
  Ext c_ = 0;
  std::size_t last_n_ = 0;
};

BitString extract_parameter(const ParamMapPtr& f, const ClosedClass& d, const BitString& x, const Estimator& est,
                            Stage budget);

// V(σ) = param_lift(f, L(h(σ))) with budget |σ|.
LearnerPtr lift_real_learner(LearnerPtr l, ParamMapPtr f, ClosedClass d, TablePtr t, Estimator est);

}  // namespace mlab
