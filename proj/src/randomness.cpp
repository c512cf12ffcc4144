#include "mlab/randomness.hpp"

#include <zlib.h>

#include <algorithm>
#include <stdexcept>

namespace mlab {

const std::vector<CodecInfo>& codec_registry() {
  static const std::vector<CodecInfo> codecs{
      {0, "literal", "1"},
      {1, "runlength", "1"},
      {2, "period", "1"},
      {3, "enumerative", "1"},
      {4, "deflate", "zlib-raw-9"},
  };
  return codecs;
}

int codec_id(const std::string& name) {
  for (const auto& c : codec_registry())
    if (name == c.name) return c.id;
  throw std::invalid_argument("unknown codec: " + name);
}

namespace {

Ext floor_log2(std::uint64_t x) { return 63 - __builtin_clzll(x); }
Ext gamma_len(std::uint64_t x) { return 2 * floor_log2(x) + 1; }
Ext ceil_log2(std::uint64_t x) { return x <= 1 ? 0 : floor_log2(x - 1) + 1; }

std::vector<Ext> literal_profile(const BitString& x) {
  std::vector<Ext> out(x.size() + 1);
  for (std::size_t j = 0; j <= x.size(); ++j) out[j] = static_cast<Ext>(j);
  return out;
}

// First bit, then the gamma code of each run length.
std::vector<Ext> runlength_profile(const BitString& x) {
  std::vector<Ext> out(x.size() + 1);
  out[0] = 0;
  Ext closed = 0;
  std::uint64_t run = 0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (j > 0 && x[j] != x[j - 1]) {
      closed += gamma_len(run);
      run = 0;
    }
    ++run;
    out[j + 1] = 1 + closed + gamma_len(run);
  }
  return out;
}

// Smallest period p (from the prefix function), sent as gamma(p) + the first p bits.
std::vector<Ext> period_profile(const BitString& x) {
  std::vector<Ext> out(x.size() + 1);
  out[0] = 0;
  std::vector<std::size_t> pi(x.size(), 0);
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (j > 0) {
      std::size_t k = pi[j - 1];
      while (k > 0 && x[j] != x[k]) k = pi[k - 1];
      if (x[j] == x[k]) ++k;
      pi[j] = k;
    }
    std::uint64_t p = j + 1 - pi[j];
    out[j + 1] = gamma_len(p) + static_cast<Ext>(p);
  }
  return out;
}

// Count of zeros, then the rank among strings with that count.
std::vector<Ext> enumerative_profile(const BitString& x) {
  std::vector<Ext> out(x.size() + 1);
  out[0] = 0;
  mpz_class binom = 1, tmp;
  std::size_t zeros = 0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    std::size_t n = j + 1;
    if (x[j] == 0) {
      ++zeros;
      binom *= static_cast<unsigned long>(n);
      mpz_divexact_ui(binom.get_mpz_t(), binom.get_mpz_t(), zeros);
    } else {
      binom *= static_cast<unsigned long>(n);
      mpz_divexact_ui(binom.get_mpz_t(), binom.get_mpz_t(), n - zeros);
    }
    tmp = binom - 1;
    out[n] = ceil_log2(n + 1) + static_cast<Ext>(bit_length(tmp));
  }
  return out;
}

class Deflater {
 public:
  Deflater() {
    if (deflateInit2(&z_, 9, Z_DEFLATED, -15, 8, Z_DEFAULT_STRATEGY) != Z_OK)
      throw std::runtime_error("deflateInit2 failed");
  }
  ~Deflater() { deflateEnd(&z_); }
  Deflater(const Deflater&) = delete;
  Deflater& operator=(const Deflater&) = delete;

  std::size_t compressed_size(const unsigned char* data, std::size_t len) {
    deflateReset(&z_);
    buf_.resize(deflateBound(&z_, len) + 16);
    z_.next_in = const_cast<unsigned char*>(data);
    z_.avail_in = static_cast<uInt>(len);
    z_.next_out = buf_.data();
    z_.avail_out = static_cast<uInt>(buf_.size());
    if (deflate(&z_, Z_FINISH) != Z_STREAM_END) throw std::runtime_error("deflate failed");
    return z_.total_out;
  }

 private:
  z_stream z_{};
  std::vector<unsigned char> buf_;
};

// Full bytes through raw deflate, the trailing partial byte literally.
std::vector<Ext> deflate_profile(const BitString& x) {
  std::vector<unsigned char> bytes(x.size() / 8, 0);
  for (std::size_t i = 0; i < bytes.size() * 8; ++i)
    if (x[i]) bytes[i / 8] |= static_cast<unsigned char>(0x80u >> (i % 8));
  Deflater d;
  std::vector<Ext> out(x.size() + 1);
  Ext full = 0;
  for (std::size_t j = 0; j <= x.size(); ++j) {
    if (j % 8 == 0) full = 8 * static_cast<Ext>(d.compressed_size(bytes.data(), j / 8));
    out[j] = full + static_cast<Ext>(j % 8);
  }
  return out;
}

}  // namespace

Ext length_header(std::size_t n) { return gamma_len(n + 1); }

std::vector<Ext> codec_profile(int id, const BitString& x) {
  switch (id) {
    case 0:
      return literal_profile(x);
    case 1:
      return runlength_profile(x);
    case 2:
      return period_profile(x);
    case 3:
      return enumerative_profile(x);
    case 4:
      return deflate_profile(x);
  }
  throw std::invalid_argument("unknown codec id " + std::to_string(id));
}

Estimator::Estimator() : ids_{0, 1, 2, 3, 4} {}

Estimator::Estimator(std::vector<int> ids) : ids_(std::move(ids)) {
  if (ids_.empty()) throw std::invalid_argument("estimator needs at least one codec");
  for (int id : ids_)
    if (id < 0 || id >= static_cast<int>(codec_registry().size()))
      throw std::invalid_argument("unknown codec id " + std::to_string(id));
}

Estimator Estimator::from_names(const std::vector<std::string>& names) {
  std::vector<int> ids;
  for (const auto& n : names) ids.push_back(codec_id(n));
  return Estimator(std::move(ids));
}

std::vector<Ext> Estimator::profile(const BitString& x, Stage s) const {
  if (s < 1) throw std::invalid_argument("complexity_upper needs s >= 1");
  std::size_t use = std::min<std::size_t>(s, ids_.size());
  std::vector<Ext> best(x.size() + 1, kInfinity);
  for (std::size_t c = 0; c < use; ++c) {
    int id = ids_[c];
    std::vector<Ext> p = codec_profile(id, x);
    for (std::size_t j = 0; j <= x.size(); ++j) best[j] = std::min(best[j], length_header(j) + p[j] + id);
  }
  return best;
}

Ext Estimator::complexity_upper(const BitString& sigma, Stage s) const { return profile(sigma, s).back(); }

json Estimator::describe() const {
  json out = json::array();
  for (int id : ids_) {
    const CodecInfo& c = codec_registry()[id];
    out.push_back({{"id", c.id}, {"name", c.name}, {"version", c.version}});
  }
  return out;
}

Ext complexity_upper(const Estimator& e, const BitString& sigma, Stage s) { return e.complexity_upper(sigma, s); }

std::vector<Ext> neglog_profile(const Table& t, Index e, const BitString& x, Stage s) {
  const Entry& entry = t.entry(e);
  std::vector<Ext> out(x.size() + 1);
  BitString sigma;
  sigma.reserve(x.size());
  std::size_t zeros = 0;
  out[0] = entry.neglog_sup(sigma, 0, s);
  for (std::size_t j = 0; j < x.size(); ++j) {
    sigma.push_back(x[j]);
    if (x[j] == 0) ++zeros;
    // once the sup hits 0 it stays 0 on extensions
    out[j + 1] = out[j] == kInfinity ? kInfinity : entry.neglog_sup(sigma, zeros, s);
  }
  return out;
}

Ext deficiency(const Table& t, const Estimator& est, Index e, const BitString& sigma, Stage s) {
  Ext u = t.entry(e).neglog_sup(sigma, sigma.zeros_count(), s);
  return ext_sub(u, est.complexity_upper(sigma, s));
}

Ext deficiency_ball(const MeasureBall& c, const Estimator& est, const BitString& sigma, Stage s) {
  return ext_sub(ceil_neglog2(ball_sup(c, sigma)), est.complexity_upper(sigma, s));
}

Ext max_deficiency(const Table& t, const Estimator& est, Index e, const BitString& x) {
  Stage s = std::max<Stage>(x.size(), 1);
  std::vector<Ext> u = neglog_profile(t, e, x, s);
  std::vector<Ext> k = est.profile(x, s);
  Ext best = std::numeric_limits<Ext>::min();
  for (std::size_t j = 0; j <= x.size(); ++j) best = std::max(best, ext_sub(u[j], k[j]));
  return best;
}

bool random_verdict(const Table& t, const Estimator& est, Index e, const BitString& x, Ext c) {
  if (c == kInfinity) return true;
  return max_deficiency(t, est, e, x) <= c;
}

}  // namespace mlab
