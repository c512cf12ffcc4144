#include "mlab/rational.hpp"

#include <sstream>

namespace mlab {

Q parse_rational(std::string_view text) {
  std::string s(text);
  if (s.empty()) throw std::invalid_argument("empty rational");
  auto dot = s.find('.');
  if (dot != std::string::npos) {
    std::string digits = s.substr(0, dot) + s.substr(dot + 1);
    std::size_t frac = s.size() - dot - 1;
    mpz_class num;
    if (num.set_str(digits.empty() ? "0" : digits, 10) != 0)
      throw std::invalid_argument("bad rational: " + s);
    mpz_class den;
    mpz_ui_pow_ui(den.get_mpz_t(), 10, frac);
    Q q(num, den);
    q.canonicalize();
    return q;
  }
  Q q;
  if (q.set_str(s, 10) != 0) throw std::invalid_argument("bad rational: " + s);
  if (q.get_den() == 0) throw std::invalid_argument("zero denominator: " + s);
  q.canonicalize();
  return q;
}

std::string to_string(const Q& q) { return q.get_str(10); }

Q pow2neg(std::size_t k) {
  mpz_class den;
  mpz_setbit(den.get_mpz_t(), k);
  return Q(mpz_class(1), den);
}

Q bernoulli_mass(const Q& x, std::size_t a, std::size_t b) {
  Q y = 1 - x;
  mpz_class num, den, t;
  mpz_pow_ui(num.get_mpz_t(), x.get_num_mpz_t(), a);
  mpz_pow_ui(t.get_mpz_t(), y.get_num_mpz_t(), b);
  num *= t;
  mpz_pow_ui(den.get_mpz_t(), x.get_den_mpz_t(), a);
  mpz_pow_ui(t.get_mpz_t(), y.get_den_mpz_t(), b);
  den *= t;
  Q r(num, den);
  r.canonicalize();
  return r;
}

std::size_t bit_length(const mpz_class& z) {
  if (z == 0) return 0;
  return mpz_sizeinbase(z.get_mpz_t(), 2);
}

Ext ceil_neglog2(const Q& x) {
  if (x < 0) throw MeasureError("negative mass");
  if (x == 0) return kInfinity;
  // least k with 2^-k <= x, i.e. den <= num * 2^k (k may be negative when x > 1)
  const mpz_class& n = x.get_num();
  const mpz_class& d = x.get_den();
  long guess = static_cast<long>(bit_length(d)) - static_cast<long>(bit_length(n));
  auto ok = [&](long k) {
    if (k >= 0) {
      mpz_class lhs = n;
      mpz_mul_2exp(lhs.get_mpz_t(), lhs.get_mpz_t(), static_cast<mp_bitcnt_t>(k));
      return d <= lhs;
    }
    mpz_class rhs = d;
    mpz_mul_2exp(rhs.get_mpz_t(), rhs.get_mpz_t(), static_cast<mp_bitcnt_t>(-k));
    return rhs <= n;
  };
  long k = guess - 1;
  while (!ok(k)) ++k;
  while (ok(k - 1)) --k;
  return k;
}

Interval Interval::basic(Q lo, Q hi) {
  Interval r{std::move(lo), std::move(hi), true, true};
  if (r.lo == 0) r.lo_open = false;
  if (r.hi == 1) r.hi_open = false;
  return r;
}

bool Interval::empty() const {
  if (lo > hi) return true;
  if (lo == hi) return lo_open || hi_open;
  return false;
}

bool Interval::contains(const Q& v) const {
  if (v < lo || (v == lo && lo_open)) return false;
  if (v > hi || (v == hi && hi_open)) return false;
  return true;
}

bool Interval::contains(const Interval& o) const {
  if (o.empty()) return true;
  bool lo_ok = lo < o.lo || (lo == o.lo && (!lo_open || o.lo_open));
  bool hi_ok = hi > o.hi || (hi == o.hi && (!hi_open || o.hi_open));
  return lo_ok && hi_ok;
}

Interval Interval::intersect(const Interval& o) const {
  Interval r;
  if (lo > o.lo) {
    r.lo = lo;
    r.lo_open = lo_open;
  } else if (lo < o.lo) {
    r.lo = o.lo;
    r.lo_open = o.lo_open;
  } else {
    r.lo = lo;
    r.lo_open = lo_open || o.lo_open;
  }
  if (hi < o.hi) {
    r.hi = hi;
    r.hi_open = hi_open;
  } else if (hi > o.hi) {
    r.hi = o.hi;
    r.hi_open = o.hi_open;
  } else {
    r.hi = hi;
    r.hi_open = hi_open || o.hi_open;
  }
  return r;
}

bool Interval::disjoint(const Interval& o) const { return intersect(o).empty(); }

Interval Interval::operator+(const Interval& o) const {
  return {lo + o.lo, hi + o.hi, lo_open || o.lo_open, hi_open || o.hi_open};
}

std::string Interval::str() const {
  std::ostringstream os;
  os << (lo_open ? '(' : '[') << to_string(lo) << ',' << to_string(hi) << (hi_open ? ')' : ']');
  return os.str();
}

bool interval_less(const Interval& a, const Interval& b) {
  if (a.lo != b.lo) return a.lo < b.lo;
  if (a.hi != b.hi) return a.hi < b.hi;
  if (a.lo_open != b.lo_open) return a.lo_open < b.lo_open;
  return a.hi_open < b.hi_open;
}

}  // namespace mlab
