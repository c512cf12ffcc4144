#include "mlab/measures.hpp"

#include <algorithm>
#include <mutex>
#include <random>

namespace mlab {

Measure Measure::uniform() {
  Measure m;
  m.kind_ = Kind::Uniform;
  m.q_ = Q(1, 2);
  return m;
}

Measure Measure::bernoulli(Q q) {
  if (q < 0 || q > 1) throw MeasureError("bernoulli parameter outside [0,1]: " + to_string(q));
  Measure m;
  m.kind_ = Kind::Bernoulli;
  m.q_ = std::move(q);
  return m;
}

Measure Measure::interleave(BitSource z) {
  if (!z.valid()) throw MeasureError("interleave measure needs a source");
  Measure m;
  m.kind_ = Kind::Interleave;
  m.z_ = std::move(z);
  return m;
}

Measure Measure::enumerated(std::vector<Tuple> tuples) {
  Measure m;
  m.kind_ = Kind::Enumerated;
  for (const auto& t : tuples)
    if (t.interval.empty()) throw MeasureError("empty interval for " + t.sigma.str());
  m.tuples_ = std::move(tuples);
  return m;
}

Q Measure::value_class(std::size_t n, std::size_t zeros) const {
  switch (kind_) {
    case Kind::Uniform:
      return pow2neg(n);
    case Kind::Bernoulli:
      return bernoulli_mass(q_, zeros, n - zeros);
    default:
      throw MeasureError("value_class on a non-exchangeable measure");
  }
}

Q Measure::value(const BitString& sigma) const {
  switch (kind_) {
    case Kind::Uniform:
    case Kind::Bernoulli:
      return value_class(sigma.size(), sigma.zeros_count());
    case Kind::Interleave:
      for (std::size_t i = 0; i < sigma.size(); i += 2)
        if (sigma[i] != z_.bit(i / 2)) return Q(0);
      return pow2neg(sigma.size() / 2);
    case Kind::Enumerated:
      break;
  }
  throw MeasureError("value() on an enumerated measure");
}

Interval Measure::eval(const BitString& sigma, Stage s) const {
  if (exact()) return Interval::point(value(sigma));
  Interval acc = Interval::unit();
  for (const auto& t : tuples_) {
    if (t.stage > s || !(t.sigma == sigma)) continue;
    acc = acc.intersect(t.interval);
    if (acc.empty()) throw MeasureError("malformed measure: inconsistent intervals at " + sigma.str());
  }
  return acc;
}

Q Measure::conditional(const BitString& sigma, int b) const {
  switch (kind_) {
    case Kind::Uniform:
      return Q(1, 2);
    case Kind::Bernoulli: {
      Q whole = value(sigma);
      if (whole == 0) throw MeasureError("undefined conditional at " + sigma.str());
      return b == 0 ? q_ : 1 - q_;
    }
    case Kind::Interleave: {
      if (value(sigma) == 0) throw MeasureError("undefined conditional at " + sigma.str());
      if (sigma.size() % 2 == 1) return Q(1, 2);
      return z_.bit(sigma.size() / 2) == b ? Q(1) : Q(0);
    }
    case Kind::Enumerated:
      break;
  }
  throw MeasureError("conditional on an enumerated measure");
}

std::string Measure::name() const {
  switch (kind_) {
    case Kind::Uniform:
      return "uniform";
    case Kind::Bernoulli:
      return "B(" + to_string(q_) + ")";
    case Kind::Interleave:
      return "muZ(" + z_.spec().dump() + ")";
    case Kind::Enumerated:
      return "enumerated[" + std::to_string(tuples_.size()) + "]";
  }
  return "?";
}

json tuple_to_json(const Tuple& t) {
  std::string shape;
  if (!t.interval.lo_open && !t.interval.hi_open)
    shape = "closed";
  else if (t.interval.lo_open && t.interval.hi_open)
    shape = "open";
  else
    shape = t.interval.lo_open ? "left-open" : "right-open";
  return json::array({t.sigma.str(), to_string(t.interval.lo), to_string(t.interval.hi), t.stage, shape});
}

Tuple tuple_from_json(const json& row) {
  if (!row.is_array() || row.size() < 4 || row.size() > 5)
    throw MeasureError("tuple must be [sigma, lo, hi, stage(, shape)]");
  Tuple t;
  t.sigma = BitString(row[0].get<std::string>());
  Q lo = parse_rational(row[1].get<std::string>());
  Q hi = parse_rational(row[2].get<std::string>());
  std::string shape = row.size() == 5 ? row[4].get<std::string>() : "basic";
  if (shape == "basic")
    t.interval = Interval::basic(lo, hi);
  else if (shape == "closed")
    t.interval = Interval::closed(lo, hi);
  else if (shape == "open")
    t.interval = Interval::open(lo, hi);
  else if (shape == "left-open")
    t.interval = Interval{lo, hi, true, false};
  else if (shape == "right-open")
    t.interval = Interval{lo, hi, false, true};
  else
    throw MeasureError("unknown interval shape: " + shape);
  t.stage = row[3].get<Stage>();
  return t;
}

json Measure::to_json() const {
  switch (kind_) {
    case Kind::Uniform:
      return {{"kind", "uniform"}};
    case Kind::Bernoulli:
      return {{"kind", "bernoulli"}, {"q", to_string(q_)}};
    case Kind::Interleave:
      return {{"kind", "interleave"}, {"z", z_.spec()}};
    case Kind::Enumerated: {
      json rows = json::array();
      for (const auto& t : tuples_) rows.push_back(tuple_to_json(t));
      return {{"kind", "enumerated"}, {"tuples", rows}};
    }
  }
  return {};
}

Measure measure_from_json(const json& spec, const SourceResolver& resolve) {
  const std::string kind = spec.at("kind").get<std::string>();
  if (kind == "uniform") return Measure::uniform();
  if (kind == "bernoulli") return Measure::bernoulli(parse_rational(spec.at("q").get<std::string>()));
  if (kind == "interleave") {
    const json& z = spec.at("z");
    try {
      return Measure::interleave(bitsource_from_json(z));
    } catch (const CantorError&) {
      if (!resolve) throw;
      return Measure::interleave(resolve(z));
    }
  }
  if (kind == "enumerated") {
    std::vector<Tuple> tuples;
    for (const auto& row : spec.at("tuples")) tuples.push_back(tuple_from_json(row));
    return Measure::enumerated(std::move(tuples));
  }
  throw MeasureError("unknown measure kind: " + kind);
}

Interval measure_eval(const Measure& mu, const BitString& sigma, Stage s) { return mu.eval(sigma, s); }
Q conditional(const Measure& mu, const BitString& sigma, int b) { return mu.conditional(sigma, b); }

bool enumeration_consistent(const Measure& mu, Stage s, std::size_t max_len) {
  if (mu.exact()) return true;
  for (const auto& t : mu.tuples()) {
    if (t.stage > s || t.sigma.size() >= max_len) continue;
    Interval j0 = mu.eval(t.sigma.child(0), s);
    Interval j1 = mu.eval(t.sigma.child(1), s);
    Interval sum = Interval::closed(j0.lo + j1.lo, j0.hi + j1.hi);
    if (t.interval.disjoint(sum)) return false;
  }
  return true;
}

// ---------------------------------------------------------------- distance

Q level_max_diff(const Measure& mu, const Measure& nu, std::size_t n) {
  Q best = 0;
  if (mu.exchangeable() && nu.exchangeable()) {
    for (std::size_t a = 0; a <= n; ++a) {
      Q d = abs(mu.value_class(n, a) - nu.value_class(n, a));
      if (d > best) best = d;
    }
    return best;
  }
  if (n > 24) throw MeasureError("level_max_diff: level too deep for enumeration");
  for (std::uint64_t i = 0; i < (std::uint64_t{1} << n); ++i) {
    BitString s = string_from_index(i, n);
    Q d = abs(mu.value(s) - nu.value(s));
    if (d > best) best = d;
  }
  return best;
}

Distance measure_distance(const Measure& mu, const Measure& nu, std::size_t depth) {
  if (!mu.exact() || !nu.exact()) throw MeasureError("measure_distance needs exact measures");
  Distance d{Q(0), pow2neg(depth)};
  for (std::size_t n = 1; n <= depth; ++n) d.partial += pow2neg(n) * level_max_diff(mu, nu, n);
  return d;
}

// ---------------------------------------------------------------- sampling

namespace {

// 0 iff u/2^64 < p.
int draw_bit(std::uint64_t u, const Q& p) {
  if (p == 0) return 1;
  if (p == 1) return 0;
  const mpz_class& num = p.get_num();
  const mpz_class& den = p.get_den();
  if (mpz_sizeinbase(den.get_mpz_t(), 2) < 63) {
    unsigned __int128 lhs = static_cast<unsigned __int128>(u) * den.get_ui();
    unsigned __int128 rhs = static_cast<unsigned __int128>(num.get_ui()) << 64;
    return lhs < rhs ? 0 : 1;
  }
  mpz_class lhs(static_cast<unsigned long>(u >> 32));
  lhs <<= 32;
  lhs += static_cast<unsigned long>(u & 0xffffffffu);
  lhs *= den;
  mpz_class rhs = num;
  rhs <<= 64;
  return lhs < rhs ? 0 : 1;
}

class Sampler {
 public:
  Sampler(const Measure& mu, std::uint64_t seed) : mu_(mu), rng_(seed) {
    if (!mu_.exact()) throw MeasureError("sampling needs an exact measure");
  }
  int next(const BitString& sigma) {
    std::uint64_t u = rng_();
    switch (mu_.kind()) {
      case Measure::Kind::Uniform:
        return draw_bit(u, Q(1, 2));
      case Measure::Kind::Bernoulli:
        return draw_bit(u, mu_.q());
      case Measure::Kind::Interleave:
        if (sigma.size() % 2 == 0) return mu_.z().bit(sigma.size() / 2);
        return draw_bit(u, Q(1, 2));
      default:
        return draw_bit(u, mu_.conditional(sigma, 0));
    }
  }

 private:
  const Measure& mu_;
  std::mt19937_64 rng_;
};

class SampleSource final : public BitSourceImpl {
 public:
  SampleSource(Measure mu, std::uint64_t seed) : mu_(std::move(mu)), seed_(seed), sampler_(mu_, seed) {}
  int bit(std::size_t j) const override {
    std::lock_guard<std::mutex> lock(mu_lock_);
    while (cache_.size() <= j) cache_.push_back(sampler_.next(cache_));
    return cache_[j];
  }
  json spec() const override { return {{"kind", "sample"}, {"measure", mu_.to_json()}, {"seed", seed_}}; }

 private:
  Measure mu_;
  std::uint64_t seed_;
  mutable std::mutex mu_lock_;
  mutable Sampler sampler_;
  mutable BitString cache_;
};

}  // namespace

BitString sample_stream(const Measure& mu, std::uint64_t seed, std::size_t n) {
  if (mu.exact() && mu.value(BitString()) == 0) throw MeasureError("zero-mass measure");
  Sampler sampler(mu, seed);
  BitString out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(sampler.next(out));
  return out;
}

BitSource sample_source(const Measure& mu, std::uint64_t seed) {
  return BitSource(std::make_shared<SampleSource>(mu, seed));
}

}  // namespace mlab
