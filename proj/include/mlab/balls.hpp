// Basic open balls [(σ0,I0),...,(σn,In)] of the measure space, their size
// bound and three-valued membership.
#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "mlab/measures.hpp"

namespace mlab {

enum class Tri { No, Unknown, Yes };
const char* tri_name(Tri t);

struct Constraint {
  BitString sigma;
  Interval interval;
};

// Implicit constraint set that fixes an interval for every string of length
// <= depth(). Used when a ball pins far too many strings to list.
class PinnedSource {
 public:
  struct Level {
    Q max_width;
    Q max_hi;
  };
  virtual ~PinnedSource() = default;
  virtual std::size_t depth() const = 0;
  // |σ| <= depth().
  virtual Interval at(const BitString& sigma) const = 0;
  // at() depends only on (|σ|, #0(σ)).
  virtual bool exchangeable() const { return false; }
  virtual Level level(std::size_t j) const;
  // Set when at(σ) is the range of x^#0(σ) (1-x)^#1(σ) over this interval.
  virtual std::optional<Interval> bernoulli_parameter() const { return std::nullopt; }
  virtual json describe() const = 0;
};

// Representative of the count class (n, zeros): 0^zeros 1^(n-zeros).
BitString class_representative(std::size_t n, std::size_t zeros);

struct MeasureBall {
  std::vector<Constraint> constraints;
  std::shared_ptr<const PinnedSource> pinned;

  bool unconstrained() const { return constraints.empty() && !pinned; }
  json to_json() const;
};

// What is known about a measure at some stage.
struct Knowledge {
  std::function<Interval(const BitString&)> at;
  bool exchangeable = false;
  // Set when at(σ) is the range of x^#0(σ) (1-x)^#1(σ) over this interval.
  std::optional<Interval> bernoulli;
};
Knowledge knowledge_of(const Measure& mu, Stage s);

// Upper bound on |C| accurate to 2^-depth. Explicit constraints are
// propagated over their prefix tree (sums upward, differences downward);
// strings below a leaf get [0, sup(leaf)].
Q ball_size(const MeasureBall& c, std::size_t depth);
// sup{μ(σ) : μ ∈ C} under the same propagation.
Q ball_sup(const MeasureBall& c, const BitString& sigma);
// Propagated interval of σ; throws MeasureError on an inconsistent ball.
Interval ball_interval(const MeasureBall& c, const BitString& sigma);

// Levels of a non-exchangeable pinned ball above this are not checked, so a
// pass there only yields Unknown.
inline constexpr std::size_t kContainsEnumLevels = 14;

Tri ball_contains(const MeasureBall& c, const Knowledge& k);
Tri ball_contains(const MeasureBall& c, const Measure& mu, Stage s);

}  // namespace mlab
