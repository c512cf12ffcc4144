// Computable maps f: 2^ω -> M presented through f*, a modulus and a center
// selector. Concrete maps live in param_maps.hpp.
#pragma once

#include <memory>
#include <string>

#include "mlab/balls.hpp"

namespace mlab {

// ceil(-log2 sup{f(Z)(X↾j) : Z ∈ [τ]}) for j = 1, 2, ..., fed one bit of X
// at a time.
class CylinderScorer {
 public:
  virtual ~CylinderScorer() = default;
  virtual Ext next(int bit) = 0;
};

class ParamMap {
 public:
  virtual ~ParamMap() = default;
  virtual std::string name() const = 0;
  // f*(τ); monotone: σ ⪯ τ implies star(τ) ⊆ star(σ).
  virtual MeasureBall star(const BitString& tau) const = 0;
  // h(n): every star(σ) with |σ| = h(n) has size at most 2^-3n.
  virtual std::size_t modulus(std::size_t n) const = 0;
  // μ_σ: an exact measure inside star(σ).
  virtual Measure center(const BitString& tau) const = 0;
  virtual std::unique_ptr<CylinderScorer> cylinder_scorer(const BitString& tau) const = 0;
  // Stars and centers are exchangeable (depend on counts only).
  virtual bool exchangeable() const { return false; }
};

using ParamMapPtr = std::shared_ptr<const ParamMap>;

}  // namespace mlab
