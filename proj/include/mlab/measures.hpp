// Measures on Cantor space: exact constructors, stage-bounded enumerations,
// the metric d and seeded sampling.
#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "mlab/cantor.hpp"
#include "mlab/rational.hpp"

namespace mlab {

// One enumerated constraint: μ(σ) ∈ I, known from stage `stage` on.
struct Tuple {
  BitString sigma;
  Interval interval;
  Stage stage = 0;
};

class Measure {
 public:
  enum class Kind { Uniform, Bernoulli, Interleave, Enumerated };

  static Measure uniform();
  // q is the probability of a 0.
  static Measure bernoulli(Q q);
  static Measure interleave(BitSource z);
  static Measure enumerated(std::vector<Tuple> tuples);

  Kind kind() const { return kind_; }
  bool exact() const { return kind_ != Kind::Enumerated; }
  // Value depends only on (|σ|, #0(σ)).
  bool exchangeable() const { return kind_ == Kind::Uniform || kind_ == Kind::Bernoulli; }
  // Parameter of a uniform or Bernoulli measure.
  const Q& q() const { return q_; }
  const BitSource& z() const { return z_; }
  const std::vector<Tuple>& tuples() const { return tuples_; }

  // Exact measures only.
  Q value(const BitString& sigma) const;
  Q value_class(std::size_t n, std::size_t zeros) const;  // exchangeable only
  // measure_eval: a point for exact kinds, the stage-s intersection otherwise.
  Interval eval(const BitString& sigma, Stage s) const;
  // μ(σ0)/μ(σ); throws MeasureError when μ(σ) = 0.
  Q conditional(const BitString& sigma, int b) const;

  json to_json() const;
  std::string name() const;

 private:
  Kind kind_ = Kind::Uniform;
  Q q_{1, 2};
  BitSource z_;
  std::vector<Tuple> tuples_;
};

// Resolves bit-source specs that the cantor layer does not know (program reals).
using SourceResolver = std::function<BitSource(const json&)>;
Measure measure_from_json(const json& spec, const SourceResolver& resolve = {});
Tuple tuple_from_json(const json& row);
json tuple_to_json(const Tuple& t);

Interval measure_eval(const Measure& mu, const BitString& sigma, Stage s);
Q conditional(const Measure& mu, const BitString& sigma, int b);

// Opt-in footnote check: each enumerated interval for σ meets
// [inf J0 + inf J1, sup J0 + sup J1] where J_b is the stage-s value at σb.
bool enumeration_consistent(const Measure& mu, Stage s, std::size_t max_len);

struct Distance {
  Q partial;  // Σ_{1≤n≤depth} 2^-n max_{|σ|=n} |μ(σ) - ν(σ)|
  Q bound;    // 2^-depth
};

// max_{|σ|=n} |μ(σ) - ν(σ)| for exact measures. Exchangeable pairs use
// count classes; other pairs enumerate 2^n strings (serial).
Q level_max_diff(const Measure& mu, const Measure& nu, std::size_t n);
Distance measure_distance(const Measure& mu, const Measure& nu, std::size_t depth);

// Seeded sampling. Bit i is 0 iff u * den < num * 2^64 where u is the next
// 64-bit draw and num/den = μ(σ0)/μ(σ); forced branches consume a draw too.
inline constexpr const char* kSamplerName = "mt19937_64/v1";
BitString sample_stream(const Measure& mu, std::uint64_t seed, std::size_t n);
// Pure bit source over the infinite sample; extends its cached prefix on demand.
BitSource sample_source(const Measure& mu, std::uint64_t seed);

}  // namespace mlab
