#include "mlab/balls.hpp"

#include <algorithm>
#include <map>

namespace mlab {

const char* tri_name(Tri t) {
  switch (t) {
    case Tri::No:
      return "no";
    case Tri::Unknown:
      return "unknown";
    case Tri::Yes:
      return "yes";
  }
  return "?";
}

BitString class_representative(std::size_t n, std::size_t zeros) {
  return BitString::zeros(zeros) + BitString::ones(n - zeros);
}

PinnedSource::Level PinnedSource::level(std::size_t j) const {
  Level out{Q(0), Q(0)};
  auto take = [&](const Interval& iv) {
    if (iv.width() > out.max_width) out.max_width = iv.width();
    if (iv.hi > out.max_hi) out.max_hi = iv.hi;
  };
  if (exchangeable()) {
    for (std::size_t a = 0; a <= j; ++a) take(at(class_representative(j, a)));
  } else {
    for (auto& s : all_strings(j)) take(at(s));
  }
  return out;
}

json MeasureBall::to_json() const {
  json rows = json::array();
  for (const auto& c : constraints) rows.push_back({c.sigma.str(), c.interval.str()});
  json out{{"constraints", rows}};
  if (pinned) out["pinned"] = pinned->describe();
  return out;
}

Knowledge knowledge_of(const Measure& mu, Stage s) {
  Knowledge k{[mu, s](const BitString& sigma) { return mu.eval(sigma, s); }, mu.exchangeable(), std::nullopt};
  if (mu.kind() == Measure::Kind::Bernoulli) k.bernoulli = Interval::point(mu.q());
  return k;
}

namespace {

Interval hull01(Q lo, Q hi) {
  if (lo < 0) lo = 0;
  if (hi > 1) hi = 1;
  return Interval::closed(std::move(lo), std::move(hi));
}

// Prefix tree of the explicit constraints, closed under siblings.
struct Trie {
  std::map<BitString, Interval> j;

  explicit Trie(const std::vector<Constraint>& cs) {
    j[BitString()] = Interval::point(Q(1));
    for (const auto& c : cs) {
      BitString p;
      for (std::size_t i = 0; i < c.sigma.size(); ++i) {
        j.try_emplace(p.child(0), Interval::unit());
        j.try_emplace(p.child(1), Interval::unit());
        p.push_back(c.sigma[i]);
      }
    }
    for (const auto& c : cs) narrow(c.sigma, c.interval);
    for (int round = 0; round < 8; ++round) {
      bool changed = false;
      // upward: J(σ) ∩= J(σ0) + J(σ1)
      for (auto it = j.rbegin(); it != j.rend(); ++it) {
        const BitString& s = it->first;
        auto c0 = j.find(s.child(0));
        if (c0 == j.end()) continue;
        const Interval& a = c0->second;
        const Interval& b = j.at(s.child(1));
        changed |= narrow(s, hull01(a.lo + b.lo, a.hi + b.hi));
      }
      // downward: J(σb) ∩= J(σ) - J(σ(1-b))
      for (auto& [s, iv] : j) {
        if (s.empty()) continue;
        BitString parent = s.prefix(s.size() - 1);
        BitString sib = parent.child(1 - s.back());
        const Interval& p = j.at(parent);
        const Interval& o = j.at(sib);
        changed |= narrow(s, hull01(p.lo - o.hi, p.hi - o.lo));
      }
      if (!changed) break;
    }
  }

  bool narrow(const BitString& s, const Interval& by) {
    Interval& cur = j.at(s);
    Interval next = cur.intersect(by);
    if (next.empty()) throw MeasureError("inconsistent ball at " + s.str());
    if (next == cur) return false;
    cur = std::move(next);
    return true;
  }

  // Interval of σ, or [0, sup] of its deepest tree ancestor.
  Interval lookup(const BitString& sigma) const {
    auto it = j.find(sigma);
    if (it != j.end()) return it->second;
    for (std::size_t n = sigma.size(); n-- > 0;) {
      auto a = j.find(sigma.prefix(n));
      if (a != j.end()) return Interval::closed(Q(0), a->second.hi);
    }
    return Interval::unit();
  }
};

Q pinned_size(const PinnedSource& p, std::size_t depth) {
  Q total = pow2neg(depth);
  std::size_t k = p.depth();
  for (std::size_t j = 1; j <= std::min(k, depth); ++j) total += pow2neg(j) * p.level(j).max_width;
  if (depth > k) {
    Q hi = p.level(k).max_hi;
    // Σ_{k<j<=depth} 2^-j = 2^-k - 2^-depth
    total += hi * (pow2neg(k) - pow2neg(depth));
  }
  return total;
}

Q explicit_size(const std::vector<Constraint>& cs, std::size_t depth) {
  Trie t(cs);
  std::vector<Q> width(depth + 1, Q(0));
  std::vector<Q> leaf_hi(depth + 1, Q(0));  // max sup of leaves at each length
  for (const auto& [s, iv] : t.j) {
    if (s.size() > depth) continue;
    if (iv.width() > width[s.size()]) width[s.size()] = iv.width();
    if (t.j.find(s.child(0)) == t.j.end() && iv.hi > leaf_hi[s.size()]) leaf_hi[s.size()] = iv.hi;
  }
  Q total = pow2neg(depth);
  Q below = 0;
  for (std::size_t n = 1; n <= depth; ++n) {
    if (leaf_hi[n - 1] > below) below = leaf_hi[n - 1];
    Q w = width[n] > below ? width[n] : below;
    total += pow2neg(n) * w;
  }
  return total;
}

Tri combine(Tri acc, Tri next) {
  if (acc == Tri::No || next == Tri::No) return Tri::No;
  if (acc == Tri::Unknown || next == Tri::Unknown) return Tri::Unknown;
  return Tri::Yes;
}

Tri check(const Interval& constraint, const Interval& value) {
  if (constraint.contains(value)) return Tri::Yes;
  if (constraint.disjoint(value)) return Tri::No;
  return Tri::Unknown;
}

}  // namespace

Q ball_size(const MeasureBall& c, std::size_t depth) {
  Q best = c.constraints.empty() ? Q(2) : explicit_size(c.constraints, depth);
  if (c.pinned) {
    Q p = pinned_size(*c.pinned, depth);
    if (p < best) best = p;
  }
  if (best > 1) best = explicit_size({}, depth);
  return best;
}

Interval ball_interval(const MeasureBall& c, const BitString& sigma) {
  Interval out = Trie(c.constraints).lookup(sigma);
  if (c.pinned) {
    std::size_t k = c.pinned->depth();
    Interval p = sigma.size() <= k ? c.pinned->at(sigma) : Interval::closed(Q(0), c.pinned->at(sigma.prefix(k)).hi);
    out = out.intersect(p);
    if (out.empty()) throw MeasureError("inconsistent ball at " + sigma.str());
  }
  return out;
}

Q ball_sup(const MeasureBall& c, const BitString& sigma) {
  if (c.constraints.empty()) {
    if (!c.pinned) return Q(1);
    std::size_t k = c.pinned->depth();
    return c.pinned->at(sigma.size() <= k ? sigma : sigma.prefix(k)).hi;
  }
  return ball_interval(c, sigma).hi;
}

Tri ball_contains(const MeasureBall& c, const Knowledge& k) {
  Tri acc = Tri::Yes;
  for (const auto& con : c.constraints) {
    acc = combine(acc, check(con.interval, k.at(con.sigma)));
    if (acc == Tri::No) return acc;
  }
  if (!c.pinned) return acc;
  const PinnedSource& p = *c.pinned;
  if (p.depth() == 0) return acc;
  auto param = p.bernoulli_parameter();
  if (param && k.bernoulli) {
    // Both sides are Bernoulli ranges, so the level-1 string "0" decides
    // disjointness and parameter containment gives containment everywhere.
    if (param->disjoint(*k.bernoulli)) return Tri::No;
    return combine(acc, param->contains(*k.bernoulli) ? Tri::Yes : Tri::Unknown);
  }
  bool classes = p.exchangeable() && k.exchangeable;
  for (std::size_t j = 0; j <= p.depth(); ++j) {
    if (classes) {
      for (std::size_t a = 0; a <= j; ++a) {
        BitString rep = class_representative(j, a);
        acc = combine(acc, check(p.at(rep), k.at(rep)));
        if (acc == Tri::No) return acc;
      }
      continue;
    }
    if (j > kContainsEnumLevels) {
      acc = combine(acc, Tri::Unknown);
      break;
    }
    for (std::uint64_t i = 0; i < (std::uint64_t{1} << j); ++i) {
      BitString s = string_from_index(i, j);
      acc = combine(acc, check(p.at(s), k.at(s)));
      if (acc == Tri::No) return acc;
    }
  }
  return acc;
}

Tri ball_contains(const MeasureBall& c, const Measure& mu, Stage s) {
  return ball_contains(c, knowledge_of(mu, s));
}

}  // namespace mlab
