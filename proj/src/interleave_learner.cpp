#include "mlab/interleave_learner.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <mutex>
#include <stdexcept>

namespace mlab {

namespace {

constexpr std::uint64_t kVoteSeed = 0x766f7465;

const std::vector<BitSource>& vote_sources() {
  static const std::vector<BitSource> sources = [] {
    std::vector<BitSource> out;
    for (std::size_t k = 0; k < kVoteSamples; ++k) out.push_back(sample_source(Measure::uniform(), kVoteSeed + k));
    return out;
  }();
  return sources;
}

std::string learner_key(const Learner& v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(v.describe().dump())));
  return buf;
}

class G0Entry final : public Entry {
 public:
  G0Entry(const Table* t, LearnerPtr v, BitString prefix) : t_(t), v_(std::move(v)), bits_(std::move(prefix)) {
    start_ = bits_.size();
  }
  EntryKind kind() const override { return EntryKind::Real; }
  // Totality depends on V's behaviour and is not decided here.
  bool total() const override { return false; }
  json describe() const override { return {{"kind", "g0"}, {"V", v_->describe()}, {"prefix", bits_.prefix(start_).str()}}; }

  std::optional<int> bit(std::size_t j, Stage s) const override {
    if (s <= j) return std::nullopt;
    std::lock_guard<std::mutex> lock(m_);
    for (std::size_t m = start_; m <= j; ++m) {
      if (m < bits_.size() && stages_[m - start_] <= s) continue;
      std::optional<int> b = interleave_decoder(*v_, *t_, bits_.prefix(m), s);
      if (!b) return std::nullopt;
      if (m == bits_.size()) {
        bits_.push_back(*b);
        stages_.push_back(s);
      } else {
        stages_[m - start_] = std::min(stages_[m - start_], s);
      }
    }
    return bits_[j];
  }

 private:
  const Table* t_;
  LearnerPtr v_;
  std::size_t start_ = 0;
  mutable std::mutex m_;
  mutable BitString bits_;            // prefix, then decoded bits
  mutable std::vector<Stage> stages_;  // least stage each decoded bit was seen at
};

}  // namespace

std::vector<BitString> vote_strings(std::size_t m) {
  if (m <= kVoteEnumerateBits) return all_strings(m);
  std::vector<BitString> out;
  for (const auto& src : vote_sources()) out.push_back(src.prefix(m));
  return out;
}

std::optional<int> interleave_decoder(const Learner& v, const Table& t, const BitString& partial, Stage s) {
  const std::size_t m = partial.size();
  const auto sigmas = vote_strings(m);
  std::size_t votes[2] = {0, 0};
  const Q half(1, 2);
  for (const auto& sigma : sigmas) {
    BitString base = interleave(partial, sigma);
    Index e = v.guess(base);
    if (!t.contains(e) || !t.is_measure(e)) continue;
    Interval den = t.eval_measure(e, base, s);
    for (int j = 0; j < 2; ++j) {
      Interval num = t.eval_measure(e, base.child(j), s);
      if (num.lo > den.hi * half) {
        ++votes[j];
        break;
      }
    }
  }
  for (int j = 0; j < 2; ++j)
    if (3 * votes[j] >= 2 * sigmas.size()) return j;
  return std::nullopt;
}

Index g0_index(const LearnerPtr& v, const Table& t, const BitString& prefix) {
  std::string key = "g0:" + learner_key(*v) + ":" + prefix.str();
  return t.allocate(key, [&] { return std::make_shared<G0Entry>(&t, v, prefix); });
}

InterleaveExLearner::InterleaveExLearner(LearnerPtr v, TablePtr t) : v_(std::move(v)), t_(std::move(t)) {
  if (!v_ || !t_) throw std::invalid_argument("interleave learner needs V and a table");
}

std::vector<InterleaveStep> InterleaveExLearner::steps(const BitString& z) const {
  const std::size_t h = z.size();
  // last_change[k][n]: largest i <= n with V(Z↾i⊕Y_k↾i) != V(Z↾(i-1)⊕Y_k↾(i-1)), 0 if none
  std::vector<std::vector<std::size_t>> last_change;
  if (h > kVoteEnumerateBits) {
    for (const auto& src : vote_sources()) {
      auto tr = v_->trajectory(interleave(z, src.prefix(h)));
      std::vector<std::size_t> lc(h + 1, 0);
      for (std::size_t i = 1; i <= h; ++i) lc[i] = tr[2 * i] != tr[2 * i - 2] ? i : lc[i - 1];
      last_change.push_back(std::move(lc));
    }
  }
  auto votes_n0 = [&](std::size_t n) {
    std::vector<std::size_t> changes;
    if (n <= kVoteEnumerateBits) {
      for (const auto& sigma : all_strings(n)) {
        std::size_t c = 0;
        Index prev = v_->guess(BitString());
        for (std::size_t i = 1; i <= n; ++i) {
          Index g = v_->guess(interleave(z.prefix(i), sigma.prefix(i)));
          if (g != prev) c = i;
          prev = g;
        }
        changes.push_back(c);
      }
    } else {
      for (const auto& lc : last_change) changes.push_back(lc[n]);
    }
    std::sort(changes.begin(), changes.end());
    // least n0 with at least 2/3 of the strings unchanged since n0
    std::size_t need = (2 * changes.size() + 2) / 3;
    return need == 0 ? 0 : changes[need - 1];
  };

  struct Tracked {
    std::size_t checked = 0;  // bits below this agree with Z
    bool bad = false;
    std::size_t last_i = 0;
  };
  std::map<Index, Tracked> tracked;
  std::vector<InterleaveStep> out;
  for (std::size_t n = 0; n <= h; ++n) {
    InterleaveStep st;
    st.n = n;
    st.n0_votes = votes_n0(n);
    for (auto& [g, tr] : tracked) {
      while (!tr.bad && tr.checked < n) {
        std::optional<int> b = t_->eval_real(g, tr.checked, n);
        if (!b) break;
        if (*b != z[tr.checked])
          tr.bad = true;
        else
          ++tr.checked;
      }
      if (tr.bad) st.n0_disagreement = std::max(st.n0_disagreement, tr.last_i);
    }
    st.n0 = std::max(st.n0_votes, st.n0_disagreement);
    st.output = g0_index(v_, *t_, z.prefix(st.n0));
    auto [it, fresh] = tracked.try_emplace(st.output);
    if (fresh) it->second.checked = st.n0;
    it->second.last_i = n;
    out.push_back(st);
  }
  return out;
}

Index InterleaveExLearner::guess(const BitString& z) const { return steps(z).back().output; }

std::vector<Index> InterleaveExLearner::trajectory(const BitString& z) const {
  std::vector<Index> out;
  for (const auto& st : steps(z)) out.push_back(st.output);
  return out;
}

json InterleaveExLearner::describe() const { return {{"interleave_ex", {{"V", v_->describe()}}}}; }

std::shared_ptr<const InterleaveExLearner> interleave_ex_learner(LearnerPtr v, TablePtr t) {
  return std::make_shared<InterleaveExLearner>(std::move(v), std::move(t));
}

namespace {

class InterleaveBcLearner final : public Learner {
 public:
  InterleaveBcLearner(LearnerPtr v, TablePtr t) : v_(std::move(v)), t_(std::move(t)) {}
  Index guess(const BitString& z) const override { return g0_index(v_, *t_, z); }
  json describe() const override { return {{"interleave_bc", {{"V", v_->describe()}}}}; }

 private:
  LearnerPtr v_;
  TablePtr t_;
};

}  // namespace

LearnerPtr interleave_bc_learner(LearnerPtr v, TablePtr t) {
  return std::make_shared<InterleaveBcLearner>(std::move(v), std::move(t));
}

}  // namespace mlab
