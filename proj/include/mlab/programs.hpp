// The desk-scale program table: registered measures and reals, padding
// aliases, diverging stubs and the derived entries built by index transforms.
#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "mlab/balls.hpp"
#include "mlab/param_map.hpp"

namespace mlab {

using Index = std::uint64_t;

// Layout of the index space.
//   [0, N)                  manifest entries
//   N + π(i, j)             pad(i, j), i, j < 2^24, π the Cantor pairing
//   [2^56, 2^64)            derived entries, placed by hash of their key
inline constexpr Index kPadLimit = Index{1} << 24;
inline constexpr Index kDerivedBase = Index{1} << 56;

class Table;

class ProgramError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class EntryKind { Measure, Real, Stub, Alias };
const char* entry_kind_name(EntryKind k);

class Entry {
 public:
  virtual ~Entry() = default;
  virtual EntryKind kind() const = 0;
  // Ground-truth totality.
  virtual bool total() const = 0;
  virtual json describe() const = 0;

  // Measure side. Stage-s knowledge interval for μ(σ); width antitone in s.
  virtual Interval measure(const BitString& sigma, Stage s) const;
  // ceil(-log2 sup) of measure(σ, s); zeros = #0(σ). Overridden with
  // floating-point fast paths that fall back to exact arithmetic.
  virtual Ext neglog_sup(const BitString& sigma, std::size_t zeros, Stage s) const;
  // Knowledge depends only on (|σ|, #0(σ)).
  virtual bool exchangeable() const { return false; }
  // Stage-s enumeration restricted to σ.
  virtual std::vector<Interval> tuples(const BitString& sigma, Stage s) const;
  // Largest m <= s with width <= 2^-m on every string of length <= m.
  virtual std::size_t definedness(Stage s) const;
  // Set when the stage-s knowledge is the Bernoulli range over this interval.
  virtual std::optional<Interval> bernoulli_parameter(Stage) const { return std::nullopt; }
  // Exact measure when the entry is one (used for centers and sampling).
  virtual const Measure* exact_measure() const { return nullptr; }

  // Real side: bit j as known at stage s.
  virtual std::optional<int> bit(std::size_t j, Stage s) const;
  // Alias target.
  virtual Index target() const { throw ProgramError("not an alias"); }
};

using EntryPtr = std::shared_ptr<const Entry>;

struct FlipSchedule {
  enum class Mode { Invert, Alternate, List };
  std::vector<Index> entries;  // empty = every index
  Stage until = 0;             // ground truth from this stage on
  Mode mode = Mode::Invert;
  std::vector<int> values;     // Mode::List
};

std::uint64_t fnv1a(const std::string& s);

// Cantor pairing and its inverse.
Index cantor_pair(Index i, Index j);
std::pair<Index, Index> cantor_unpair(Index z);

class Table {
 public:
  Table() = default;
  Table(const Table&) = delete;
  Table& operator=(const Table&) = delete;

  static std::shared_ptr<Table> from_manifest(const json& manifest);
  static std::shared_ptr<Table> from_file(const std::filesystem::path& path);

  std::size_t base_size() const { return base_.size(); }
  const json& manifest() const { return manifest_; }
  // FNV-1a 64 of the canonical manifest dump, as 16 hex digits.
  std::string manifest_hash() const;

  bool contains(Index e) const;
  // Follows padding and alias links to a non-alias index.
  Index resolve(Index e) const;
  const Entry& entry(Index e) const;  // resolved
  EntryKind kind(Index e) const { return entry(e).kind(); }
  bool is_measure(Index e) const;  // measure or stub
  bool ground_truth_total(Index e) const { return entry(e).total(); }

  Index pad(Index i, Index j) const;
  bool is_pad(Index e) const;

  Interval eval_measure(Index e, const BitString& sigma, Stage s) const;
  std::optional<int> eval_real(Index e, std::size_t j, Stage s) const;
  Knowledge knowledge(Index e, Stage s) const;

  // Index transforms. Lifts first look for a manifest entry registered with
  // the same construction, so their outputs can be padded.
  Index bernoulli_lift(Index real) const;
  Index param_lift(const ParamMapPtr& f, Index real) const;
  Index inverse_lift(const ParamMapPtr& f, const ClosedClass& d, Index measure) const;

  // Memoized derived entry for `key`; `make` runs at most once per key.
  Index allocate(const std::string& key, const std::function<EntryPtr()>& make) const;
  std::optional<Index> lookup_key(const std::string& key) const;
  // Derived entries in allocation order (key, index).
  std::vector<std::pair<std::string, Index>> derived() const;

  void set_flips(std::vector<FlipSchedule> flips) { flips_ = std::move(flips); }
  const std::vector<FlipSchedule>& flips() const { return flips_; }
  int totality_oracle(Index e, Stage s) const;
  // Flip horizon of e: oracle equals ground truth from here on.
  Stage flip_horizon(Index e) const;

  Tri measures_equal(Index a, Index b, std::size_t depth, Stage s) const;

  // Registered maps and classes, by name ("bernoulli", "interleave"; "all", "hat").
  ParamMapPtr param_map(const std::string& name) const;
  ClosedClass closed_class(const std::string& name) const;
  // Real entries registered in the manifest, ascending.
  std::vector<Index> real_entries() const;
  // Bit source reading a total real entry at sufficient stage.
  BitSource real_source(Index e) const;

 private:
  void add_base(EntryPtr e, std::string key);
  EntryPtr build_entry(const json& spec, std::size_t position);

  json manifest_;
  std::vector<EntryPtr> base_;
  std::map<std::string, Index> base_keys_;
  std::vector<FlipSchedule> flips_;

  mutable std::shared_mutex derived_lock_;
  mutable std::unordered_map<Index, EntryPtr> derived_;
  mutable std::map<std::string, Index> derived_keys_;
  mutable std::vector<std::pair<std::string, Index>> derived_order_;
};

using TablePtr = std::shared_ptr<Table>;

// Construction keys shared by manifest registration and derived allocation.
std::string bernoulli_lift_key(Index real);
std::string param_lift_key(const std::string& map, Index real);

// Entry factories, exposed for tests and for other modules.
EntryPtr make_measure_entry(Measure m, bool total = true);
EntryPtr make_real_entry(BitSource src, std::optional<std::size_t> diverge_at = std::nullopt);
EntryPtr make_stub_entry();
EntryPtr make_alias_entry(Index of);

// Range of x^a (1-x)^b over x in [lo, hi], exact.
Interval bernoulli_range(const Q& lo, const Q& hi, std::size_t a, std::size_t b);
// ceil(-log2 max_{x∈[lo,hi]} x^a (1-x)^b), long double with exact fallback.
Ext bernoulli_neglog_sup(const Q& lo, const Q& hi, std::size_t a, std::size_t b);

}  // namespace mlab
