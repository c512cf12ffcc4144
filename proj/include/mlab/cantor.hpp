// Finite words, infinite bit sources and effectively closed classes over {0,1}.
#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

#include "mlab/rational.hpp"

namespace mlab {

using Stage = std::uint64_t;
using json = nlohmann::json;

class BitString {
 public:
  BitString() = default;
  // Text of '0'/'1' characters; anything else is rejected.
  explicit BitString(std::string_view text);
  static BitString zeros(std::size_t n) { return BitString(std::string(n, '0'), {}); }
  static BitString ones(std::size_t n) { return BitString(std::string(n, '1'), {}); }

  std::size_t size() const { return s_.size(); }
  bool empty() const { return s_.empty(); }
  int operator[](std::size_t i) const { return s_[i] - '0'; }
  int back() const { return s_.back() - '0'; }
  void push_back(int b) { s_.push_back(b ? '1' : '0'); }
  void pop_back() { s_.pop_back(); }
  void reserve(std::size_t n) { s_.reserve(n); }

  BitString prefix(std::size_t n) const { return BitString(s_.substr(0, n), {}); }
  BitString child(int b) const {
    BitString r = *this;
    r.push_back(b);
    return r;
  }
  bool is_prefix_of(const BitString& other) const {
    return s_.size() <= other.s_.size() && other.s_.compare(0, s_.size(), s_) == 0;
  }
  std::size_t zeros_count() const;
  std::size_t ones_count() const { return size() - zeros_count(); }

  const std::string& str() const { return s_; }

  friend bool operator==(const BitString& a, const BitString& b) { return a.s_ == b.s_; }
  friend std::ostream& operator<<(std::ostream& os, const BitString& b) { return os << '"' << b.s_ << '"'; }
  friend bool operator<(const BitString& a, const BitString& b) {
    if (a.s_.size() != b.s_.size()) return a.s_.size() < b.s_.size();
    return a.s_ < b.s_;
  }
  BitString& operator+=(const BitString& o) {
    s_ += o.s_;
    return *this;
  }
  friend BitString operator+(BitString a, const BitString& b) { return a += b; }

 private:
  struct Trusted {};
  BitString(std::string s, Trusted) : s_(std::move(s)) {}
  std::string s_;
};

// All strings of length n in lexicographic order (n <= 30).
std::vector<BitString> all_strings(std::size_t n);
// The i-th string of length n, most significant bit first.
BitString string_from_index(std::uint64_t i, std::size_t n);
// The dyadic rational 0.τ.
Q dyadic_value(const BitString& tau);
// Longest common prefix of a nonempty set.
BitString longest_common_prefix(const std::vector<BitString>& words);

class CantorError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// interleave(Z, Y): Z bits at even positions, Y bits at odd positions.
BitString interleave(const BitString& z, const BitString& y);
std::pair<BitString, BitString> deinterleave(const BitString& x);
BitString hat_encode(const BitString& sigma);
BitString hat_decode(const BitString& tau);

// Position -> bit. Implementations are immutable; bit(j) is a pure function.
class BitSourceImpl {
 public:
  virtual ~BitSourceImpl() = default;
  virtual int bit(std::size_t j) const = 0;
  // Known length for finite sources, nullopt for infinite ones.
  virtual std::optional<std::size_t> length() const { return std::nullopt; }
  virtual json spec() const = 0;
};

class BitSource {
 public:
  BitSource() = default;
  explicit BitSource(std::shared_ptr<const BitSourceImpl> impl) : impl_(std::move(impl)) {}

  // Finite literal; reading past the end is an error.
  static BitSource literal(BitString bits);
  // Binary expansion of a rational in [0,1); 1 is read as 0.111...
  static BitSource rational(const Q& value);
  static BitSource periodic(BitString pattern);
  static BitSource constant(int bit);
  static BitSource hat(BitSource inner);
  // The real equal to `inner` except at position `at`, where it is flipped.
  static BitSource flip(BitSource inner, std::size_t at);

  int bit(std::size_t j) const { return impl_->bit(j); }
  int operator()(std::size_t j) const { return bit(j); }
  BitString prefix(std::size_t n) const;
  std::optional<std::size_t> length() const { return impl_->length(); }
  json spec() const { return impl_->spec(); }
  bool valid() const { return impl_ != nullptr; }

 private:
  std::shared_ptr<const BitSourceImpl> impl_;
};

// Parses {kind: literal|rational|periodic|constant|hat|flip}. Kinds that need
// a program table or a measure are resolved by the higher layers.
BitSource bitsource_from_json(const json& spec);

// A Π⁰₁ class given by a stage-indexed co-enumeration of forbidden prefixes.
// forbidden(τ, s) says whether τ itself is in forbid[s]; it must be monotone
// in s and forbid[s] must be finite.
class ClosedClass {
 public:
  using Forbidden = std::function<bool(const BitString&, Stage)>;
  ClosedClass(std::string name, Forbidden forbidden, std::size_t max_len)
      : name_(std::move(name)), forbidden_(std::move(forbidden)), max_len_(std::move(max_len)) {}

  // The whole space.
  static ClosedClass everything();
  // Image of hat_encode: strings whose complete blocks are 01 or 10. A bad
  // block ending at position 2k is enumerated at stage k-1.
  static ClosedClass hat_image();
  // Explicit list: each string is forbidden from its stage on.
  static ClosedClass from_list(std::string name, std::vector<std::pair<BitString, Stage>> items);

  bool alive(const BitString& tau, Stage s) const;
  bool forbidden(const BitString& tau, Stage s) const { return forbidden_(tau, s); }
  // forbid[s] restricted to strings of length <= max_len (for inspection).
  std::vector<BitString> forbid_set(Stage s, std::size_t max_len) const;
  const std::string& name() const { return name_; }

 private:
  std::string name_;
  Forbidden forbidden_;
  std::size_t max_len_;
};

bool class_alive(const ClosedClass& d, const BitString& tau, Stage s);

}  // namespace mlab
