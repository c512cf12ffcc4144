#include "mlab/cantor.hpp"

#include <algorithm>
#include <mutex>

namespace mlab {

BitString::BitString(std::string_view text) : s_(text) {
  for (char c : s_)
    if (c != '0' && c != '1') throw CantorError("not a bit string: " + std::string(text));
}

std::size_t BitString::zeros_count() const {
  return static_cast<std::size_t>(std::count(s_.begin(), s_.end(), '0'));
}

std::vector<BitString> all_strings(std::size_t n) {
  if (n > 30) throw CantorError("all_strings: length too large");
  std::vector<BitString> out;
  out.reserve(std::size_t{1} << n);
  for (std::uint64_t i = 0; i < (std::uint64_t{1} << n); ++i) out.push_back(string_from_index(i, n));
  return out;
}

BitString string_from_index(std::uint64_t i, std::size_t n) {
  BitString r;
  r.reserve(n);
  for (std::size_t k = 0; k < n; ++k) r.push_back(static_cast<int>((i >> (n - 1 - k)) & 1));
  return r;
}

Q dyadic_value(const BitString& tau) {
  mpz_class num = 0;
  for (std::size_t i = 0; i < tau.size(); ++i) {
    num <<= 1;
    num += tau[i];
  }
  Q v(num, 1);
  v *= pow2neg(tau.size());
  v.canonicalize();
  return v;
}

BitString longest_common_prefix(const std::vector<BitString>& words) {
  if (words.empty()) throw CantorError("lcp of empty set");
  std::size_t len = words.front().size();
  for (const auto& w : words) {
    std::size_t k = 0;
    while (k < len && k < w.size() && w[k] == words.front()[k]) ++k;
    len = k;
  }
  return words.front().prefix(len);
}

BitString interleave(const BitString& z, const BitString& y) {
  if (!(z.size() == y.size() || z.size() == y.size() + 1))
    throw CantorError("interleave: |Z| must be |Y| or |Y|+1");
  BitString out;
  out.reserve(z.size() + y.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    out.push_back(z[i]);
    if (i < y.size()) out.push_back(y[i]);
  }
  return out;
}

std::pair<BitString, BitString> deinterleave(const BitString& x) {
  BitString z, y;
  for (std::size_t i = 0; i < x.size(); ++i) (i % 2 == 0 ? z : y).push_back(x[i]);
  return {z, y};
}

BitString hat_encode(const BitString& sigma) {
  BitString out;
  out.reserve(2 * sigma.size());
  for (std::size_t i = 0; i < sigma.size(); ++i) {
    out.push_back(sigma[i]);
    out.push_back(1 - sigma[i]);
  }
  return out;
}

BitString hat_decode(const BitString& tau) {
  BitString out;
  for (std::size_t i = 0; i + 1 < tau.size(); i += 2) {
    if (tau[i] == tau[i + 1]) throw CantorError("not a hat prefix: block " + std::to_string(i / 2));
    out.push_back(tau[i]);
  }
  return out;
}

// ---------------------------------------------------------------- sources

BitString BitSource::prefix(std::size_t n) const {
  BitString r;
  r.reserve(n);
  for (std::size_t j = 0; j < n; ++j) r.push_back(bit(j));
  return r;
}

namespace {

class LiteralSource final : public BitSourceImpl {
 public:
  explicit LiteralSource(BitString b) : bits_(std::move(b)) {}
  int bit(std::size_t j) const override {
    if (j >= bits_.size()) throw CantorError("literal source read past end at " + std::to_string(j));
    return bits_[j];
  }
  std::optional<std::size_t> length() const override { return bits_.size(); }
  json spec() const override { return {{"kind", "literal"}, {"bits", bits_.str()}}; }

 private:
  BitString bits_;
};

class RationalSource final : public BitSourceImpl {
 public:
  explicit RationalSource(Q v) : value_(std::move(v)) {
    if (value_ < 0 || value_ > 1) throw CantorError("rational source outside [0,1]");
  }
  // Long division, remembering every bit produced so far.
  int bit(std::size_t j) const override {
    if (value_ == 1) return 1;
    std::lock_guard<std::mutex> lock(m_);
    if (bits_.empty()) rem_ = value_.get_num();
    while (bits_.size() <= j) {
      rem_ *= 2;
      int b = rem_ >= value_.get_den() ? 1 : 0;
      if (b) rem_ -= value_.get_den();
      bits_.push_back(static_cast<char>(b));
    }
    return bits_[j];
  }
  json spec() const override { return {{"kind", "rational"}, {"value", to_string(value_)}}; }

 private:
  Q value_;
  mutable std::mutex m_;
  mutable std::vector<char> bits_;
  mutable mpz_class rem_;
};

class PeriodicSource final : public BitSourceImpl {
 public:
  explicit PeriodicSource(BitString p) : pattern_(std::move(p)) {
    if (pattern_.empty()) throw CantorError("empty period");
  }
  int bit(std::size_t j) const override { return pattern_[j % pattern_.size()]; }
  json spec() const override { return {{"kind", "periodic"}, {"pattern", pattern_.str()}}; }

 private:
  BitString pattern_;
};

class HatSource final : public BitSourceImpl {
 public:
  explicit HatSource(BitSource inner) : inner_(std::move(inner)) {}
  int bit(std::size_t j) const override {
    int b = inner_.bit(j / 2);
    return j % 2 == 0 ? b : 1 - b;
  }
  std::optional<std::size_t> length() const override {
    auto l = inner_.length();
    if (l) return 2 * *l;
    return std::nullopt;
  }
  json spec() const override { return {{"kind", "hat"}, {"of", inner_.spec()}}; }

 private:
  BitSource inner_;
};

class FlipSource final : public BitSourceImpl {
 public:
  FlipSource(BitSource inner, std::size_t at) : inner_(std::move(inner)), at_(at) {}
  int bit(std::size_t j) const override { return j == at_ ? 1 - inner_.bit(j) : inner_.bit(j); }
  std::optional<std::size_t> length() const override { return inner_.length(); }
  json spec() const override { return {{"kind", "flip"}, {"of", inner_.spec()}, {"at", at_}}; }

 private:
  BitSource inner_;
  std::size_t at_;
};

}  // namespace

BitSource BitSource::literal(BitString bits) {
  return BitSource(std::make_shared<LiteralSource>(std::move(bits)));
}
BitSource BitSource::rational(const Q& value) { return BitSource(std::make_shared<RationalSource>(value)); }
BitSource BitSource::periodic(BitString pattern) {
  return BitSource(std::make_shared<PeriodicSource>(std::move(pattern)));
}
BitSource BitSource::constant(int bit) { return periodic(BitString(bit ? "1" : "0")); }
BitSource BitSource::hat(BitSource inner) { return BitSource(std::make_shared<HatSource>(std::move(inner))); }
BitSource BitSource::flip(BitSource inner, std::size_t at) {
  return BitSource(std::make_shared<FlipSource>(std::move(inner), at));
}

BitSource bitsource_from_json(const json& spec) {
  const std::string kind = spec.at("kind").get<std::string>();
  if (kind == "literal") return BitSource::literal(BitString(spec.at("bits").get<std::string>()));
  if (kind == "rational") return BitSource::rational(parse_rational(spec.at("value").get<std::string>()));
  if (kind == "periodic") return BitSource::periodic(BitString(spec.at("pattern").get<std::string>()));
  if (kind == "constant") return BitSource::constant(spec.at("bit").get<int>());
  if (kind == "hat") return BitSource::hat(bitsource_from_json(spec.at("of")));
  if (kind == "flip") return BitSource::flip(bitsource_from_json(spec.at("of")), spec.at("at").get<std::size_t>());
  throw CantorError("unknown bit source kind: " + kind);
}

// ---------------------------------------------------------------- classes

ClosedClass ClosedClass::everything() {
  return ClosedClass("all", [](const BitString&, Stage) { return false; }, 0);
}

ClosedClass ClosedClass::hat_image() {
  return ClosedClass(
      "hat",
      [](const BitString& t, Stage s) {
        std::size_t n = t.size();
        if (n < 2 || n % 2 != 0) return false;
        if (n > 2 * (s + 1)) return false;
        return t[n - 2] == t[n - 1];
      },
      0);
}

ClosedClass ClosedClass::from_list(std::string name, std::vector<std::pair<BitString, Stage>> items) {
  std::size_t max_len = 0;
  for (auto& [w, st] : items) max_len = std::max(max_len, w.size());
  auto shared = std::make_shared<std::vector<std::pair<BitString, Stage>>>(std::move(items));
  return ClosedClass(
      std::move(name),
      [shared](const BitString& t, Stage s) {
        for (auto& [w, st] : *shared)
          if (st <= s && w == t) return true;
        return false;
      },
      max_len);
}

bool ClosedClass::alive(const BitString& tau, Stage s) const {
  BitString p;
  p.reserve(tau.size());
  if (forbidden_(p, s)) return false;
  for (std::size_t i = 0; i < tau.size(); ++i) {
    p.push_back(tau[i]);
    if (forbidden_(p, s)) return false;
  }
  return true;
}

std::vector<BitString> ClosedClass::forbid_set(Stage s, std::size_t max_len) const {
  std::vector<BitString> out;
  for (std::size_t n = 0; n <= max_len; ++n)
    for (auto& w : all_strings(n))
      if (forbidden_(w, s)) out.push_back(w);
  return out;
}

bool class_alive(const ClosedClass& d, const BitString& tau, Stage s) { return d.alive(tau, s); }

}  // namespace mlab
