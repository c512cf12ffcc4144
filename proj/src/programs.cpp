#include "mlab/programs.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "mlab/param_maps.hpp"

namespace mlab {

const char* entry_kind_name(EntryKind k) {
  switch (k) {
    case EntryKind::Measure:
      return "measure";
    case EntryKind::Real:
      return "real";
    case EntryKind::Stub:
      return "stub";
    case EntryKind::Alias:
      return "alias";
  }
  return "?";
}

Index cantor_pair(Index i, Index j) { return (i + j) * (i + j + 1) / 2 + j; }

std::pair<Index, Index> cantor_unpair(Index z) {
  // w = floor((sqrt(8z+1)-1)/2), corrected for rounding
  Index w = static_cast<Index>((std::sqrt(8.0L * static_cast<long double>(z) + 1.0L) - 1.0L) / 2.0L);
  while (w * (w + 1) / 2 > z) --w;
  while ((w + 1) * (w + 2) / 2 <= z) ++w;
  Index j = z - w * (w + 1) / 2;
  return {w - j, j};
}

// ---------------------------------------------------------------- numerics

Interval bernoulli_range(const Q& lo, const Q& hi, std::size_t a, std::size_t b) {
  std::size_t n = a + b;
  if (n == 0) return Interval::point(Q(1));
  Q star(static_cast<long>(a), static_cast<long>(n));
  star.canonicalize();
  if (star < lo) star = lo;
  if (star > hi) star = hi;
  Q top = bernoulli_mass(star, a, b);
  Q f_lo = bernoulli_mass(lo, a, b);
  Q f_hi = bernoulli_mass(hi, a, b);
  return Interval::closed(f_lo < f_hi ? f_lo : f_hi, top);
}

namespace {

long double log2_mass(long double x, std::size_t a, std::size_t b) {
  long double v = 0;
  if (a > 0) v += static_cast<long double>(a) * std::log2(x);
  if (b > 0) v += static_cast<long double>(b) * std::log2(1.0L - x);
  return v;
}

}  // namespace

Ext bernoulli_neglog_sup(const Q& lo, const Q& hi, std::size_t a, std::size_t b) {
  std::size_t n = a + b;
  if (n == 0) return 0;
  long double l = lo.get_d(), h = hi.get_d();
  long double x = static_cast<long double>(a) / static_cast<long double>(n);
  if (x < l) x = l;
  if (x > h) x = h;
  bool near_edge = (a > 0 && x < 1e-6L) || (b > 0 && x > 1.0L - 1e-6L);
  if (!near_edge) {
    long double v = -log2_mass(x, a, b);
    long double c = std::ceil(v);
    if (c - v > 1e-7L && v - (c - 1.0L) > 1e-7L) return static_cast<Ext>(c);
  }
  Q star(static_cast<long>(a), static_cast<long>(n));
  star.canonicalize();
  if (star < lo) star = lo;
  if (star > hi) star = hi;
  return ceil_neglog2(bernoulli_mass(star, a, b));
}

// ---------------------------------------------------------------- entries

Interval Entry::measure(const BitString&, Stage) const {
  throw ProgramError(std::string("wrong kind: measure query on ") + entry_kind_name(kind()) + " entry");
}

Ext Entry::neglog_sup(const BitString& sigma, std::size_t, Stage s) const {
  return ceil_neglog2(measure(sigma, s).hi);
}

std::vector<Interval> Entry::tuples(const BitString& sigma, Stage s) const { return {measure(sigma, s)}; }

std::size_t Entry::definedness(Stage s) const {
  constexpr std::size_t kCap = 12;
  std::size_t best = 0;
  for (std::size_t m = 1; m <= std::min<std::size_t>(s, kCap); ++m) {
    Q bound = pow2neg(m);
    bool ok = true;
    for (std::size_t len = 0; len <= m && ok; ++len) {
      if (exchangeable()) {
        for (std::size_t a = 0; a <= len && ok; ++a)
          ok = measure(class_representative(len, a), s).width() <= bound;
      } else {
        for (auto& w : all_strings(len)) {
          if (measure(w, s).width() > bound) {
            ok = false;
            break;
          }
        }
      }
    }
    if (!ok) break;
    best = m;
  }
  return best;
}

std::optional<int> Entry::bit(std::size_t, Stage) const {
  throw ProgramError(std::string("wrong kind: real query on ") + entry_kind_name(kind()) + " entry");
}

namespace {

class ExactMeasureEntry final : public Entry {
 public:
  ExactMeasureEntry(Measure m, bool total) : m_(std::move(m)), total_(total) {}
  EntryKind kind() const override { return EntryKind::Measure; }
  bool total() const override { return total_; }
  json describe() const override { return m_.to_json(); }
  Interval measure(const BitString& sigma, Stage s) const override { return m_.eval(sigma, s); }
  Ext neglog_sup(const BitString& sigma, std::size_t zeros, Stage s) const override {
    switch (m_.kind()) {
      case Measure::Kind::Uniform:
        return static_cast<Ext>(sigma.size());
      case Measure::Kind::Bernoulli:
        return bernoulli_neglog_sup(m_.q(), m_.q(), zeros, sigma.size() - zeros);
      case Measure::Kind::Interleave:
        for (std::size_t i = 0; i < sigma.size(); i += 2)
          if (sigma[i] != m_.z().bit(i / 2)) return kInfinity;
        return static_cast<Ext>(sigma.size() / 2);
      case Measure::Kind::Enumerated:
        break;
    }
    return ceil_neglog2(m_.eval(sigma, s).hi);
  }
  bool exchangeable() const override { return m_.exchangeable(); }
  std::vector<Interval> tuples(const BitString& sigma, Stage s) const override {
    if (m_.exact()) return {Interval::point(m_.value(sigma))};
    std::vector<Interval> out;
    for (const auto& t : m_.tuples())
      if (t.stage <= s && t.sigma == sigma) out.push_back(t.interval);
    return out;
  }
  std::size_t definedness(Stage s) const override { return m_.exact() ? s : Entry::definedness(s); }
  const Measure* exact_measure() const override { return m_.exact() ? &m_ : nullptr; }
  std::optional<Interval> bernoulli_parameter(Stage) const override {
    if (m_.kind() == Measure::Kind::Bernoulli) return Interval::point(m_.q());
    return std::nullopt;
  }

 private:
  Measure m_;
  bool total_;
};

class RealEntry final : public Entry {
 public:
  RealEntry(BitSource src, std::optional<std::size_t> diverge_at) : src_(std::move(src)), diverge_at_(diverge_at) {}
  EntryKind kind() const override { return EntryKind::Real; }
  bool total() const override { return !diverge_at_; }
  json describe() const override {
    json out{{"kind", "real"}, {"source", src_.spec()}};
    if (diverge_at_) out["diverge_at"] = *diverge_at_;
    return out;
  }
  // Bit j is computed at stage j+1.
  std::optional<int> bit(std::size_t j, Stage s) const override {
    if (diverge_at_ && j >= *diverge_at_) return std::nullopt;
    if (s <= j) return std::nullopt;
    return src_.bit(j);
  }

 private:
  BitSource src_;
  std::optional<std::size_t> diverge_at_;
};

class StubEntry final : public Entry {
 public:
  EntryKind kind() const override { return EntryKind::Stub; }
  bool total() const override { return false; }
  json describe() const override { return {{"kind", "stub"}}; }
  Interval measure(const BitString&, Stage) const override { return Interval::unit(); }
  Ext neglog_sup(const BitString&, std::size_t, Stage) const override { return 0; }
  bool exchangeable() const override { return true; }
  std::vector<Interval> tuples(const BitString&, Stage) const override { return {}; }
  std::size_t definedness(Stage) const override { return 0; }
  std::optional<int> bit(std::size_t, Stage) const override { return std::nullopt; }
};

class AliasEntry final : public Entry {
 public:
  explicit AliasEntry(Index of) : of_(of) {}
  EntryKind kind() const override { return EntryKind::Alias; }
  bool total() const override { return false; }
  json describe() const override { return {{"kind", "alias"}, {"of", of_}}; }
  Index target() const override { return of_; }

 private:
  Index of_;
};

// Prefix of a real entry known at stage s, read bit by bit and cached. Bits are
// fixed once defined, so the prefix is determined by its length.
class KnownPrefix {
 public:
  KnownPrefix(const Table* t, Index e) : t_(t), e_(e) {}
  std::size_t length(Stage s) const {
    std::lock_guard<std::mutex> lock(m_);
    return length_locked(s);
  }
  BitString at(Stage s) const {
    std::lock_guard<std::mutex> lock(m_);
    std::size_t n = length_locked(s);
    BitString out;
    out.reserve(n);
    for (std::size_t j = 0; j < n; ++j) out.push_back(bits_[j].first);
    return out;
  }
  // First min(length, 70) bits as a long double.
  long double value_ld(Stage s) const {
    std::lock_guard<std::mutex> lock(m_);
    std::size_t n = std::min<std::size_t>(length_locked(s), 70);
    long double v = 0, w = 0.5L;
    for (std::size_t j = 0; j < n; ++j, w /= 2) v += bits_[j].first * w;
    return v;
  }

 private:
  std::size_t length_locked(Stage s) const {
    auto it = lengths_.find(s);
    if (it != lengths_.end()) return it->second;
    std::size_t j = 0;
    for (; j < s; ++j) {
      if (j < bits_.size() && bits_[j].second <= s) continue;
      std::optional<int> b = t_->eval_real(e_, j, s);
      if (!b) break;
      if (j == bits_.size())
        bits_.emplace_back(*b, s);
      else
        bits_[j].second = s;
    }
    if (lengths_.size() > 65536) lengths_.clear();
    lengths_.emplace(s, j);
    return j;
  }

  const Table* t_;
  Index e_;
  mutable std::mutex m_;
  mutable std::vector<std::pair<int, Stage>> bits_;  // bit, a stage where it is defined
  mutable std::map<Stage, std::size_t> lengths_;
};

class BernoulliLiftEntry final : public Entry {
 public:
  BernoulliLiftEntry(const Table* t, Index real) : t_(t), real_(real), prefix_(t, real) {}
  EntryKind kind() const override { return EntryKind::Measure; }
  bool total() const override { return t_->ground_truth_total(real_); }
  json describe() const override { return {{"kind", "bernoulli_lift"}, {"of", real_}}; }
  bool exchangeable() const override { return true; }
  Interval measure(const BitString& sigma, Stage s) const override {
    BitString tau = prefix_.at(s);
    Q lo = dyadic_value(tau);
    Q hi = lo + pow2neg(tau.size());
    std::size_t a = sigma.zeros_count();
    return bernoulli_range(lo, hi, a, sigma.size() - a);
  }
  Ext neglog_sup(const BitString& sigma, std::size_t zeros, Stage s) const override {
    std::size_t a = zeros, b = sigma.size() - zeros;
    std::size_t n = a + b;
    if (n == 0) return 0;
    std::size_t k = prefix_.length(s);
    long double l = prefix_.value_ld(s);
    long double h = l + std::ldexp(1.0L, -static_cast<int>(std::min<std::size_t>(k, 16000)));
    long double x = static_cast<long double>(a) / static_cast<long double>(n);
    if (x < l) x = l;
    if (x > h) x = h;
    bool near_edge = (a > 0 && x < 1e-6L) || (b > 0 && x > 1.0L - 1e-6L);
    if (!near_edge) {
      long double v = -log2_mass(x, a, b);
      long double c = std::ceil(v);
      if (c - v > 1e-7L && v - (c - 1.0L) > 1e-7L) return static_cast<Ext>(c);
    }
    BitString tau = prefix_.at(s);
    Q lo = dyadic_value(tau);
    return bernoulli_neglog_sup(lo, lo + pow2neg(tau.size()), a, b);
  }
  std::vector<Interval> tuples(const BitString& sigma, Stage s) const override { return {measure(sigma, s)}; }
  std::optional<Interval> bernoulli_parameter(Stage s) const override {
    BitString tau = prefix_.at(s);
    Q lo = dyadic_value(tau);
    return Interval::closed(lo, lo + pow2neg(tau.size()));
  }

 private:
  const Table* t_;
  Index real_;
  KnownPrefix prefix_;
};

class ParamLiftEntry final : public Entry {
 public:
  ParamLiftEntry(const Table* t, ParamMapPtr f, Index real) : t_(t), f_(std::move(f)), real_(real), prefix_(t, real) {}
  EntryKind kind() const override { return EntryKind::Measure; }
  bool total() const override { return t_->ground_truth_total(real_); }
  json describe() const override { return {{"kind", "param_lift"}, {"map", f_->name()}, {"of", real_}}; }
  bool exchangeable() const override { return f_->exchangeable(); }
  Interval measure(const BitString& sigma, Stage s) const override { return ball_interval(ball(s), sigma); }
  Ext neglog_sup(const BitString& sigma, std::size_t zeros, Stage s) const override {
    MeasureBall b = ball(s);
    if (b.constraints.empty() && b.pinned) {
      if (auto p = b.pinned->bernoulli_parameter()) {
        // beyond the pinned depth the sup is that of the depth-k prefix
        std::size_t k = b.pinned->depth(), n = sigma.size();
        if (n > k) {
          zeros = 0;
          for (std::size_t i = 0; i < k; ++i) zeros += sigma[i] == 0;
          n = k;
        }
        return bernoulli_neglog_sup(p->lo, p->hi, zeros, n - zeros);
      }
      return ceil_neglog2(ball_sup(b, sigma));
    }
    return Entry::neglog_sup(sigma, zeros, s);
  }

 private:
  MeasureBall ball(Stage s) const {
    std::size_t k = prefix_.length(s);
    std::lock_guard<std::mutex> lock(m_);
    auto it = balls_.find(k);
    if (it != balls_.end()) return it->second;
    MeasureBall b = f_->star(prefix_.at(s));
    if (balls_.size() > 64) balls_.clear();
    balls_.emplace(k, b);
    return b;
  }

  const Table* t_;
  ParamMapPtr f_;
  Index real_;
  KnownPrefix prefix_;
  mutable std::mutex m_;
  mutable std::map<std::size_t, MeasureBall> balls_;
};

// Real whose stage-s prefix is the common prefix of the candidates τ alive in
// D whose f*(τ) is not provably disjoint from the measure's knowledge.
class InverseLiftEntry final : public Entry {
 public:
  static constexpr std::size_t kWidth = 16;
  static constexpr std::size_t kDepth = 64;

  InverseLiftEntry(const Table* t, ParamMapPtr f, ClosedClass d, Index measure)
      : t_(t), f_(std::move(f)), d_(std::move(d)), measure_(measure) {}
  EntryKind kind() const override { return EntryKind::Real; }
  bool total() const override { return t_->ground_truth_total(measure_); }
  json describe() const override {
    return {{"kind", "inverse_lift"}, {"map", f_->name()}, {"class", d_.name()}, {"of", measure_}};
  }
  std::optional<int> bit(std::size_t j, Stage s) const override {
    BitString out = output(s);
    if (j < out.size()) return out[j];
    return std::nullopt;
  }

 private:
  BitString output(Stage s) const {
    {
      std::lock_guard<std::mutex> lock(m_);
      auto it = cache_.find(s);
      if (it != cache_.end()) return it->second;
    }
    Knowledge k = t_->knowledge(measure_, s);
    std::vector<BitString> level{BitString()};
    for (std::size_t depth = 0; depth < std::min<std::size_t>(kDepth, s); ++depth) {
      std::vector<BitString> next;
      for (const auto& tau : level) {
        for (int b = 0; b < 2; ++b) {
          BitString c = tau.child(b);
          if (!d_.alive(c, s)) continue;
          if (ball_contains(f_->star(c), k) == Tri::No) continue;
          next.push_back(std::move(c));
        }
      }
      if (next.empty() || next.size() > kWidth) break;
      level = std::move(next);
    }
    BitString out = longest_common_prefix(level);
    std::lock_guard<std::mutex> lock(m_);
    if (cache_.size() > 256) cache_.clear();
    cache_.emplace(s, out);
    return out;
  }

  const Table* t_;
  ParamMapPtr f_;
  ClosedClass d_;
  Index measure_;
  mutable std::mutex m_;
  mutable std::map<Stage, BitString> cache_;
};

class RealBackedSource final : public BitSourceImpl {
 public:
  RealBackedSource(const Table* t, Index e) : t_(t), e_(e) {}
  int bit(std::size_t j) const override {
    {
      std::lock_guard<std::mutex> lock(m_);
      if (j < bits_.size() && bits_[j] >= 0) return bits_[j];
    }
    for (Stage s = j + 1; s < (Stage{1} << 20); s *= 2) {
      if (auto b = t_->eval_real(e_, j, s)) {
        std::lock_guard<std::mutex> lock(m_);
        if (bits_.size() <= j) bits_.resize(j + 1, -1);
        bits_[j] = static_cast<signed char>(*b);
        return *b;
      }
    }
    throw ProgramError("real entry " + std::to_string(e_) + " undefined at bit " + std::to_string(j));
  }
  json spec() const override { return {{"kind", "real"}, {"index", e_}}; }

 private:
  const Table* t_;
  Index e_;
  mutable std::mutex m_;
  mutable std::vector<signed char> bits_;  // -1 unknown
};

}  // namespace

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

EntryPtr make_measure_entry(Measure m, bool total) { return std::make_shared<ExactMeasureEntry>(std::move(m), total); }
EntryPtr make_real_entry(BitSource src, std::optional<std::size_t> diverge_at) {
  return std::make_shared<RealEntry>(std::move(src), diverge_at);
}
EntryPtr make_stub_entry() { return std::make_shared<StubEntry>(); }
EntryPtr make_alias_entry(Index of) { return std::make_shared<AliasEntry>(of); }

std::string bernoulli_lift_key(Index real) { return "bernoulli_lift:" + std::to_string(real); }
std::string param_lift_key(const std::string& map, Index real) {
  return "param_lift:" + map + ":" + std::to_string(real);
}

// ---------------------------------------------------------------- table

void Table::add_base(EntryPtr e, std::string key) {
  if (!key.empty()) base_keys_.emplace(std::move(key), base_.size());
  base_.push_back(std::move(e));
}

EntryPtr Table::build_entry(const json& spec, std::size_t position) {
  const std::string kind = spec.at("kind").get<std::string>();
  auto earlier = [&](const char* field) {
    Index of = spec.at(field).get<Index>();
    if (of >= position) throw ProgramError("entry " + std::to_string(position) + ": '" + field + "' must refer to an earlier entry");
    return of;
  };
  if (kind == "uniform" || kind == "bernoulli" || kind == "interleave" || kind == "enumerated" || kind == "measure") {
    const json& m = kind == "measure" ? spec.at("measure") : spec;
    SourceResolver resolve = [this, position](const json& z) {
      if (z.value("kind", "") != "real") throw ProgramError("unknown source");
      Index e = z.at("index").get<Index>();
      if (e >= position) throw ProgramError("interleave source must be an earlier real entry");
      return real_source(e);
    };
    Measure mu = measure_from_json(m, resolve);
    bool total = spec.value("total", mu.exact());
    return make_measure_entry(std::move(mu), total);
  }
  if (kind == "real") {
    std::optional<std::size_t> div;
    if (spec.contains("diverge_at")) div = spec.at("diverge_at").get<std::size_t>();
    return make_real_entry(bitsource_from_json(spec.at("source")), div);
  }
  if (kind == "stub") return make_stub_entry();
  if (kind == "alias") return make_alias_entry(earlier("of"));
  if (kind == "bernoulli_lift") return std::make_shared<BernoulliLiftEntry>(this, earlier("of"));
  if (kind == "param_lift")
    return std::make_shared<ParamLiftEntry>(this, param_map(spec.at("map").get<std::string>()), earlier("of"));
  throw ProgramError("entry " + std::to_string(position) + ": unknown kind '" + kind + "'");
}

std::shared_ptr<Table> Table::from_manifest(const json& manifest) {
  auto t = std::make_shared<Table>();
  t->manifest_ = manifest;
  const json& entries = manifest.at("entries");
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const json& spec = entries[i];
    std::string key;
    std::string kind = spec.at("kind").get<std::string>();
    if (kind == "bernoulli_lift") key = bernoulli_lift_key(spec.at("of").get<Index>());
    if (kind == "param_lift") key = param_lift_key(spec.at("map").get<std::string>(), spec.at("of").get<Index>());
    t->add_base(t->build_entry(spec, i), key);
  }
  if (manifest.contains("flips")) {
    std::vector<FlipSchedule> flips;
    for (const auto& f : manifest.at("flips")) {
      FlipSchedule fs;
      if (f.contains("entries") && f.at("entries").is_array()) fs.entries = f.at("entries").get<std::vector<Index>>();
      fs.until = f.at("until").get<Stage>();
      std::string mode = f.value("mode", "invert");
      if (mode == "invert")
        fs.mode = FlipSchedule::Mode::Invert;
      else if (mode == "alternate")
        fs.mode = FlipSchedule::Mode::Alternate;
      else if (mode == "list") {
        fs.mode = FlipSchedule::Mode::List;
        fs.values = f.at("values").get<std::vector<int>>();
        if (fs.values.empty()) throw ProgramError("flip schedule 'list' needs values");
      } else
        throw ProgramError("unknown flip mode: " + mode);
      flips.push_back(std::move(fs));
    }
    t->flips_ = std::move(flips);
  }
  return t;
}

std::shared_ptr<Table> Table::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ProgramError("cannot open manifest " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ProgramError("manifest " + path.string() + ": " + e.what());
  }
  return from_manifest(j);
}

std::string Table::manifest_hash() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(manifest_.dump())));
  return buf;
}

bool Table::is_pad(Index e) const { return e >= base_.size() && e < kDerivedBase; }

Index Table::pad(Index i, Index j) const {
  if (i >= base_.size()) throw ProgramError("pad: index " + std::to_string(i) + " is not a manifest entry");
  if (j >= kPadLimit) throw ProgramError("pad: j too large");
  return base_.size() + cantor_pair(i, j);
}

bool Table::contains(Index e) const {
  if (e < base_.size()) return true;
  if (e < kDerivedBase) {
    auto [i, j] = cantor_unpair(e - base_.size());
    return i < base_.size() && j < kPadLimit;
  }
  std::shared_lock lock(derived_lock_);
  return derived_.count(e) > 0;
}

Index Table::resolve(Index e) const {
  for (int step = 0; step < 64; ++step) {
    if (e < base_.size()) {
      if (base_[e]->kind() != EntryKind::Alias) return e;
      e = base_[e]->target();
      continue;
    }
    if (e < kDerivedBase) {
      auto [i, j] = cantor_unpair(e - base_.size());
      if (i >= base_.size() || j >= kPadLimit) throw ProgramError("index " + std::to_string(e) + " not in table");
      e = i;
      continue;
    }
    EntryPtr p;
    {
      std::shared_lock lock(derived_lock_);
      auto it = derived_.find(e);
      if (it == derived_.end()) throw ProgramError("index " + std::to_string(e) + " not in table");
      p = it->second;
    }
    if (p->kind() != EntryKind::Alias) return e;
    e = p->target();
  }
  throw ProgramError("alias cycle");
}

const Entry& Table::entry(Index e) const {
  Index r = resolve(e);
  if (r < base_.size()) return *base_[r];
  std::shared_lock lock(derived_lock_);
  return *derived_.at(r);
}

bool Table::is_measure(Index e) const {
  EntryKind k = kind(e);
  return k == EntryKind::Measure || k == EntryKind::Stub;
}

Interval Table::eval_measure(Index e, const BitString& sigma, Stage s) const { return entry(e).measure(sigma, s); }

std::optional<int> Table::eval_real(Index e, std::size_t j, Stage s) const {
  const Entry& x = entry(e);
  if (x.kind() == EntryKind::Measure) throw ProgramError("wrong kind: real query on measure entry " + std::to_string(e));
  return x.bit(j, s);
}

Knowledge Table::knowledge(Index e, Stage s) const {
  const Entry* x = &entry(e);
  return Knowledge{[x, s](const BitString& sigma) { return x->measure(sigma, s); }, x->exchangeable(),
                   x->bernoulli_parameter(s)};
}

Index Table::allocate(const std::string& key, const std::function<EntryPtr()>& make) const {
  if (auto hit = lookup_key(key)) return *hit;
  EntryPtr fresh = make();
  std::unique_lock lock(derived_lock_);
  auto it = derived_keys_.find(key);
  if (it != derived_keys_.end()) return it->second;
  Index idx = kDerivedBase + (fnv1a(key) & (kDerivedBase - 1));
  while (derived_.count(idx)) idx = idx + 1 == 0 ? kDerivedBase : idx + 1;
  derived_.emplace(idx, std::move(fresh));
  derived_keys_.emplace(key, idx);
  derived_order_.emplace_back(key, idx);
  return idx;
}

std::optional<Index> Table::lookup_key(const std::string& key) const {
  auto b = base_keys_.find(key);
  if (b != base_keys_.end()) return b->second;
  std::shared_lock lock(derived_lock_);
  auto it = derived_keys_.find(key);
  if (it != derived_keys_.end()) return it->second;
  return std::nullopt;
}

std::vector<std::pair<std::string, Index>> Table::derived() const {
  std::shared_lock lock(derived_lock_);
  return derived_order_;
}

Index Table::bernoulli_lift(Index real) const {
  Index r = resolve(real);
  if (kind(r) == EntryKind::Measure) throw ProgramError("bernoulli_lift of a measure entry");
  return allocate(bernoulli_lift_key(r), [&] { return std::make_shared<BernoulliLiftEntry>(this, r); });
}

Index Table::param_lift(const ParamMapPtr& f, Index real) const {
  Index r = resolve(real);
  if (kind(r) == EntryKind::Measure) throw ProgramError("param_lift of a measure entry");
  return allocate(param_lift_key(f->name(), r), [&] { return std::make_shared<ParamLiftEntry>(this, f, r); });
}

Index Table::inverse_lift(const ParamMapPtr& f, const ClosedClass& d, Index measure) const {
  Index r = resolve(measure);
  if (kind(r) == EntryKind::Real) throw ProgramError("inverse_lift of a real entry");
  std::string key = "inverse_lift:" + f->name() + ":" + d.name() + ":" + std::to_string(r);
  return allocate(key, [&] { return std::make_shared<InverseLiftEntry>(this, f, d, r); });
}

int Table::totality_oracle(Index e, Stage s) const {
  int truth = ground_truth_total(e) ? 1 : 0;
  for (const auto& f : flips_) {
    if (!f.entries.empty() && std::find(f.entries.begin(), f.entries.end(), e) == f.entries.end()) continue;
    if (s >= f.until) return truth;
    switch (f.mode) {
      case FlipSchedule::Mode::Invert:
        return 1 - truth;
      case FlipSchedule::Mode::Alternate:
        return s % 2 == 0 ? 1 - truth : truth;
      case FlipSchedule::Mode::List:
        return f.values[s % f.values.size()] ? 1 : 0;
    }
  }
  return truth;
}

Stage Table::flip_horizon(Index e) const {
  for (const auto& f : flips_)
    if (f.entries.empty() || std::find(f.entries.begin(), f.entries.end(), e) != f.entries.end()) return f.until;
  return 0;
}

Tri Table::measures_equal(Index a, Index b, std::size_t depth, Stage s) const {
  Index ra = resolve(a), rb = resolve(b);
  const Entry& x = entry(ra);
  const Entry& y = entry(rb);
  if (x.kind() == EntryKind::Real || y.kind() == EntryKind::Real) throw ProgramError("measures_equal on a real entry");
  if (ra == rb && x.kind() == EntryKind::Measure) return Tri::Yes;
  Q width_bound = pow2neg(depth + 2);
  Q mid_bound = pow2neg(depth + 1);
  bool all_tight = true;
  auto probe = [&](const BitString& sigma) {
    Interval i = x.measure(sigma, s), j = y.measure(sigma, s);
    if (i.disjoint(j)) return false;
    if (i.width() > width_bound || j.width() > width_bound || abs(i.mid() - j.mid()) > mid_bound) all_tight = false;
    return true;
  };
  bool classes = x.exchangeable() && y.exchangeable();
  for (std::size_t n = 0; n <= depth; ++n) {
    if (classes) {
      for (std::size_t c = 0; c <= n; ++c)
        if (!probe(class_representative(n, c))) return Tri::No;
    } else {
      for (std::uint64_t i = 0; i < (std::uint64_t{1} << n); ++i)
        if (!probe(string_from_index(i, n))) return Tri::No;
    }
  }
  return all_tight ? Tri::Yes : Tri::Unknown;
}

ParamMapPtr Table::param_map(const std::string& name) const {
  if (name == "bernoulli") return bernoulli_param_map();
  if (name == "interleave") return interleave_param_map();
  throw ProgramError("unknown parameter map: " + name);
}

ClosedClass Table::closed_class(const std::string& name) const {
  if (name == "all") return ClosedClass::everything();
  if (name == "hat") return ClosedClass::hat_image();
  if (manifest_.contains("classes") && manifest_.at("classes").contains(name)) {
    std::vector<std::pair<BitString, Stage>> items;
    for (const auto& row : manifest_.at("classes").at(name))
      items.emplace_back(BitString(row.at(0).get<std::string>()), row.at(1).get<Stage>());
    return ClosedClass::from_list(name, std::move(items));
  }
  throw ProgramError("unknown closed class: " + name);
}

std::vector<Index> Table::real_entries() const {
  std::vector<Index> out;
  for (Index i = 0; i < base_.size(); ++i)
    if (base_[i]->kind() == EntryKind::Real) out.push_back(i);
  return out;
}

BitSource Table::real_source(Index e) const { return BitSource(std::make_shared<RealBackedSource>(this, e)); }

}  // namespace mlab
