// Finite-horizon success evaluators for EX, BC, their weak variants and
// partial learning.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mlab/learners.hpp"

namespace mlab {

enum class Notion { EX, BC, WeakEX, WeakBC, Partial };
const char* notion_name(Notion n);
Notion notion_from_name(const std::string& name);  // throws std::invalid_argument

enum class Verdict { Correct, Wrong, Unknown };
const char* verdict_name(Verdict v);

struct EvalConfig {
  Notion notion = Notion::EX;
  std::size_t horizon = 4096;
  std::size_t depth = 8;
  std::optional<std::vector<Index>> class_members;
  Ext threshold = 48;  // random_verdict cutoff c
  Estimator estimator;
};

struct Stream {
  std::uint64_t seed = 0;
  BitString bits;
};

// Seeded samples of the exact measure behind `truth`, each of length horizon.
std::vector<Stream> sample_streams(const Table& t, Index truth, const std::vector<std::uint64_t>& seeds,
                                   std::size_t horizon);

struct StreamRecord {
  std::uint64_t seed = 0;
  std::vector<Index> trajectory;
  // Least n with L(X↾m) constant for n <= m <= horizon.
  std::size_t stabilized_at = 0;
  bool stabilized = false;  // stabilized_at lies before the final quarter
  Index final_guess = 0;
  Verdict verdict = Verdict::Unknown;
  bool success = false;
  std::string reason;
};

// 1, 2, 4, ... below h, then h.
std::vector<std::size_t> convergence_grid(std::size_t h);

struct SuccessReport {
  Notion notion = Notion::EX;
  std::optional<Index> truth;
  std::size_t horizon = 0;
  std::size_t depth = 0;
  std::vector<StreamRecord> records;
  double success_fraction = 0;

  // Streams carry their guesses on convergence_grid(horizon).
  json to_json(bool with_trajectories = false) const;
  // Rows (seed, n, guess, stabilized, verdict) for every n of the grid; the
  // verdict column is filled on the horizon row.
  std::string convergence_csv(const std::vector<std::size_t>& grid) const;
  std::string convergence_csv() const { return convergence_csv(convergence_grid(horizon)); }
};

// First position of the final quarter of a trajectory up to horizon h.
inline std::size_t final_quarter_start(std::size_t h) { return h - h / 4; }

// Whether index e denotes a measure that is correct for x under cfg: class
// member (unless weak), defined to cfg.depth (weak only), x random for it.
Verdict judge_index(const Table& t, const EvalConfig& cfg, Index e, const BitString& x);

StreamRecord judge_trajectory(const Table& t, const EvalConfig& cfg, const Stream& stream,
                              std::vector<Index> trajectory);

void validate(const EvalConfig& cfg, std::size_t streams);
SuccessReport evaluate(const Table& t, const Learner& l, const EvalConfig& cfg, const std::vector<Stream>& streams,
                       std::optional<Index> truth = std::nullopt);

// Real-valued targets: the guess stabilizes before the final quarter and the
// final real entry agrees with z on its first `bits` bits.
struct RealRecord {
  std::vector<Index> trajectory;
  std::size_t stabilized_at = 0;
  bool stabilized = false;
  Index final_guess = 0;
  bool agrees = false;
  bool success = false;
};
RealRecord evaluate_real(const Table& t, const Learner& l, const BitString& input, const BitSource& z,
                         std::size_t bits);
// First `bits` bits of a real entry, reading each bit at stages j+1, 2(j+1), ...
// up to 2^20; nullopt when some bit stays undefined.
std::optional<BitString> read_real(const Table& t, Index e, std::size_t bits);

}  // namespace mlab
