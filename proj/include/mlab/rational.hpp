// Exact rationals, rational intervals and the extended-integer type used for
// deficiencies.
#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>

namespace mlab {

using Q = mpq_class;

// Integers extended with +infinity. Deficiencies of mass-zero prefixes are
// kInfinity, which compares above every finite value.
using Ext = std::int64_t;
inline constexpr Ext kInfinity = std::numeric_limits<Ext>::max();

class MeasureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// "p/q", "p" or a decimal such as "0.25". Result is canonical.
Q parse_rational(std::string_view text);
std::string to_string(const Q& q);

// 2^-k as a rational.
Q pow2neg(std::size_t k);

// x^a * (1-x)^b, exact.
Q bernoulli_mass(const Q& x, std::size_t a, std::size_t b);

// ceil(-log2 x) for x > 0; kInfinity for x == 0.
Ext ceil_neglog2(const Q& x);

// Bit length of a nonnegative integer (0 for 0).
std::size_t bit_length(const mpz_class& z);

struct Interval {
  Q lo{0};
  Q hi{1};
  bool lo_open = false;
  bool hi_open = false;

  static Interval closed(Q lo, Q hi) { return {std::move(lo), std::move(hi), false, false}; }
  static Interval open(Q lo, Q hi) { return {std::move(lo), std::move(hi), true, true}; }
  static Interval point(const Q& v) { return {v, v, false, false}; }
  static Interval unit() { return closed(Q(0), Q(1)); }
  // Footnote shapes of basic intervals of [0,1]: [0,q), (p,1], (p,q).
  static Interval basic(Q lo, Q hi);

  bool empty() const;
  bool degenerate() const { return !empty() && lo == hi; }
  Q width() const { return hi - lo; }
  Q mid() const { return (lo + hi) / 2; }
  bool contains(const Q& v) const;
  // this ⊇ other
  bool contains(const Interval& other) const;
  bool disjoint(const Interval& other) const;
  Interval intersect(const Interval& other) const;
  Interval operator+(const Interval& other) const;

  friend bool operator==(const Interval& a, const Interval& b) {
    return a.lo == b.lo && a.hi == b.hi && a.lo_open == b.lo_open && a.hi_open == b.hi_open;
  }
  std::string str() const;
  friend std::ostream& operator<<(std::ostream& os, const Interval& i) { return os << i.str(); }
};

// Total order on intervals, used to group identical enumeration tuples.
bool interval_less(const Interval& a, const Interval& b);

}  // namespace mlab
