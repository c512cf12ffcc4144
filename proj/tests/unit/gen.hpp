// Seeded generators for the property tests.
#pragma once

#include <random>

#include "mlab/cantor.hpp"

namespace mlab::testing {

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}
  std::uint64_t below(std::uint64_t n) { return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(rng_); }
  std::size_t size(std::size_t lo, std::size_t hi) { return lo + below(hi - lo + 1); }
  BitString bits(std::size_t n) {
    BitString b;
    for (std::size_t i = 0; i < n; ++i) b.push_back(static_cast<int>(below(2)));
    return b;
  }
  // p/q with 1 <= q <= max_den, 0 <= p <= q
  Q rational(long max_den) {
    long q = 1 + static_cast<long>(below(max_den));
    long p = static_cast<long>(below(q + 1));
    Q r(p, q);
    r.canonicalize();
    return r;
  }

 private:
  std::mt19937_64 rng_;
};

}  // namespace mlab::testing
