// Compressor-backed upper estimates K̂ of prefix-free complexity and the
// deficiencies built on them.
#pragma once

#include <string>
#include <vector>

#include "mlab/programs.hpp"

namespace mlab {

struct CodecInfo {
  int id;
  const char* name;
  const char* version;
};

// Registered codecs, by id: literal, runlength, period, enumerative, deflate.
const std::vector<CodecInfo>& codec_registry();
int codec_id(const std::string& name);  // throws std::invalid_argument

// Elias-gamma length of n+1; every codec pays it to delimit |σ|.
Ext length_header(std::size_t n);
// Payload bits of one codec for every prefix x↾j, j = 0..|x|.
std::vector<Ext> codec_profile(int id, const BitString& x);

class Estimator {
 public:
  Estimator();  // all codecs in id order
  explicit Estimator(std::vector<int> ids);
  static Estimator from_names(const std::vector<std::string>& names);

  // min over the first min(s, #codecs) codecs of header + payload + id.
  Ext complexity_upper(const BitString& sigma, Stage s) const;
  // complexity_upper(x↾j, s) for j = 0..|x|.
  std::vector<Ext> profile(const BitString& x, Stage s) const;
  const std::vector<int>& ids() const { return ids_; }
  json describe() const;

 private:
  std::vector<int> ids_;
};

// a - b with kInfinity absorbing.
inline Ext ext_sub(Ext a, Ext b) { return a == kInfinity ? kInfinity : a - b; }

Ext complexity_upper(const Estimator& e, const BitString& sigma, Stage s);
Ext deficiency(const Table& t, const Estimator& est, Index e, const BitString& sigma, Stage s);
Ext deficiency_ball(const MeasureBall& c, const Estimator& est, const BitString& sigma, Stage s);
// max_{σ ⪯ X} deficiency(e, σ, |X|) <= c.
bool random_verdict(const Table& t, const Estimator& est, Index e, const BitString& x, Ext c);
// The running maximum itself.
Ext max_deficiency(const Table& t, const Estimator& est, Index e, const BitString& x);

// ceil(-log2 sup μ_e(x↾j)[s]) for j = 0..|x|.
std::vector<Ext> neglog_profile(const Table& t, Index e, const BitString& x, Stage s);

}  // namespace mlab
