#include "mlab/evaluate.hpp"

#include <algorithm>
#include <map>
#include <sstream>
#include <stdexcept>

#include "mlab/kernels.hpp"

namespace mlab {

const char* notion_name(Notion n) {
  switch (n) {
    case Notion::EX:
      return "EX";
    case Notion::BC:
      return "BC";
    case Notion::WeakEX:
      return "weakEX";
    case Notion::WeakBC:
      return "weakBC";
    case Notion::Partial:
      return "partial";
  }
  return "?";
}

Notion notion_from_name(const std::string& name) {
  for (Notion n : {Notion::EX, Notion::BC, Notion::WeakEX, Notion::WeakBC, Notion::Partial})
    if (name == notion_name(n)) return n;
  throw std::invalid_argument("unknown notion: " + name);
}

const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Correct:
      return "correct";
    case Verdict::Wrong:
      return "wrong";
    case Verdict::Unknown:
      return "unknown";
  }
  return "?";
}

std::vector<Stream> sample_streams(const Table& t, Index truth, const std::vector<std::uint64_t>& seeds,
                                   std::size_t horizon) {
  const Measure* mu = t.entry(truth).exact_measure();
  if (!mu) throw std::invalid_argument("truth " + std::to_string(truth) + " is not an exact measure entry");
  std::vector<Stream> out;
  for (auto seed : seeds) out.push_back({seed, sample_stream(*mu, seed, horizon)});
  return out;
}

namespace {

bool weak(Notion n) { return n == Notion::WeakEX || n == Notion::WeakBC; }

Verdict combine(Verdict a, Verdict b) {
  if (a == Verdict::Wrong || b == Verdict::Wrong) return Verdict::Wrong;
  if (a == Verdict::Unknown || b == Verdict::Unknown) return Verdict::Unknown;
  return Verdict::Correct;
}

}  // namespace

Verdict judge_index(const Table& t, const EvalConfig& cfg, Index e, const BitString& x) {
  if (!t.contains(e) || t.kind(e) == EntryKind::Real) return Verdict::Wrong;
  Stage s = std::max<Stage>(x.size(), 1);
  Verdict v = Verdict::Correct;
  if (weak(cfg.notion)) {
    if (t.entry(e).definedness(s) < cfg.depth) return Verdict::Wrong;
  } else if (cfg.class_members) {
    Verdict member = Verdict::Wrong;
    for (Index c : *cfg.class_members) {
      Tri eq = t.measures_equal(e, c, cfg.depth, s);
      if (eq == Tri::Yes) {
        member = Verdict::Correct;
        break;
      }
      if (eq == Tri::Unknown) member = Verdict::Unknown;
    }
    v = combine(v, member);
    if (v == Verdict::Wrong) return v;
  }
  if (!random_verdict(t, cfg.estimator, e, x, cfg.threshold)) return Verdict::Wrong;
  return v;
}

StreamRecord judge_trajectory(const Table& t, const EvalConfig& cfg, const Stream& stream,
                              std::vector<Index> trajectory) {
  StreamRecord r;
  r.seed = stream.seed;
  const std::size_t h = stream.bits.size();
  if (trajectory.size() != h + 1) throw std::invalid_argument("trajectory length must be |X|+1");
  r.trajectory = std::move(trajectory);
  const auto& tr = r.trajectory;
  r.final_guess = tr.back();
  std::size_t n = h;
  while (n > 0 && tr[n - 1] == tr.back()) --n;
  r.stabilized_at = n;
  const std::size_t fq = final_quarter_start(h);
  r.stabilized = n <= fq;

  std::map<Index, Verdict> memo;
  auto judge = [&](Index e) {
    auto it = memo.find(e);
    if (it != memo.end()) return it->second;
    Verdict v = judge_index(t, cfg, e, stream.bits);
    memo.emplace(e, v);
    return v;
  };

  switch (cfg.notion) {
    case Notion::EX:
    case Notion::WeakEX:
      r.verdict = judge(r.final_guess);
      r.success = r.stabilized && r.verdict == Verdict::Correct;
      if (!r.stabilized) r.reason = "no stabilization before the final quarter";
      break;
    case Notion::BC:
    case Notion::WeakBC: {
      std::vector<Index> distinct(tr.begin() + fq, tr.end());
      std::sort(distinct.begin(), distinct.end());
      distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
      Verdict v = Verdict::Correct;
      for (Index e : distinct) {
        v = combine(v, judge(e));
        if (v == Verdict::Wrong) break;
        Tri eq = t.measures_equal(e, distinct.front(), cfg.depth, std::max<Stage>(h, 1));
        if (eq == Tri::No) v = Verdict::Wrong;
        if (eq == Tri::Unknown) v = combine(v, Verdict::Unknown);
      }
      r.verdict = v;
      r.success = v == Verdict::Correct;
      break;
    }
    case Notion::Partial: {
      std::map<Index, std::size_t> count;
      for (std::size_t i = fq; i <= h; ++i) ++count[tr[i]];
      Index modal = tr.back();
      std::size_t best = 0;
      for (auto& [e, c] : count)
        if (c > best) modal = e, best = c;
      std::size_t len = h + 1 - fq;
      bool dominant = 10 * best >= 9 * len;
      bool others_gone = true;
      for (std::size_t i = fq; i <= h; ++i) others_gone = others_gone && tr[i] == modal;
      r.final_guess = modal;
      r.verdict = judge(modal);
      r.success = dominant && others_gone && r.verdict == Verdict::Correct;
      if (!dominant) r.reason = "modal index below 90% of the final quarter";
      else if (!others_gone) r.reason = "another index recurs in the final quarter";
      break;
    }
  }
  if (r.reason.empty() && !r.success) r.reason = std::string("final hypothesis ") + verdict_name(r.verdict);
  return r;
}

void validate(const EvalConfig& cfg, std::size_t streams) {
  if (cfg.horizon == 0) throw std::invalid_argument("horizon must be positive");
  if (streams == 0) throw std::invalid_argument("no streams to evaluate");
}

SuccessReport evaluate(const Table& t, const Learner& l, const EvalConfig& cfg, const std::vector<Stream>& streams,
                       std::optional<Index> truth) {
  validate(cfg, streams.size());
  SuccessReport rep;
  rep.notion = cfg.notion;
  rep.truth = truth;
  rep.horizon = cfg.horizon;
  rep.depth = cfg.depth;
  rep.records = judge_streams(t, l, cfg, streams);
  std::size_t ok = 0;
  for (const auto& r : rep.records) ok += r.success;
  rep.success_fraction = static_cast<double>(ok) / static_cast<double>(rep.records.size());
  return rep;
}

json SuccessReport::to_json(bool with_trajectories) const {
  json out{{"notion", notion_name(notion)},
           {"horizon", horizon},
           {"depth", depth},
           {"success_fraction", success_fraction},
           {"streams", json::array()}};
  out["truth"] = truth ? json(*truth) : json(nullptr);
  json seeds = json::array();
  for (const auto& r : records) {
    seeds.push_back(r.seed);
    json rec{{"seed", r.seed},         {"stabilized_at", r.stabilized_at}, {"stabilized", r.stabilized},
             {"final_guess", r.final_guess}, {"verdict", verdict_name(r.verdict)}, {"success", r.success}};
    if (!r.reason.empty()) rec["reason"] = r.reason;
    json grid = json::array();
    for (std::size_t n : convergence_grid(r.trajectory.size() - 1)) grid.push_back({n, r.trajectory[n]});
    rec["grid"] = grid;
    if (with_trajectories) rec["trajectory"] = r.trajectory;
    out["streams"].push_back(std::move(rec));
  }
  out["seeds"] = seeds;
  return out;
}

std::vector<std::size_t> convergence_grid(std::size_t h) {
  std::vector<std::size_t> points;
  for (std::size_t n = 1; n < h; n *= 2) points.push_back(n);
  points.push_back(h);
  return points;
}

std::string SuccessReport::convergence_csv(const std::vector<std::size_t>& grid) const {
  std::ostringstream os;
  os << "seed,n,guess,stabilized,verdict\n";
  for (const auto& r : records) {
    std::size_t h = r.trajectory.size() - 1;
    for (std::size_t n : grid) {
      if (n > h) throw std::invalid_argument("grid point " + std::to_string(n) + " beyond the horizon");
      os << r.seed << ',' << n << ',' << r.trajectory[n] << ',' << (n >= r.stabilized_at ? 1 : 0) << ','
         << (n == h ? verdict_name(r.verdict) : "") << '\n';
    }
  }
  return os.str();
}

std::optional<BitString> read_real(const Table& t, Index e, std::size_t bits) {
  BitString out;
  for (std::size_t j = 0; j < bits; ++j) {
    std::optional<int> b;
    for (Stage s = j + 1; s < (Stage{1} << 20) && !b; s *= 2) b = t.eval_real(e, j, s);
    if (!b) return std::nullopt;
    out.push_back(*b);
  }
  return out;
}

RealRecord evaluate_real(const Table& t, const Learner& l, const BitString& input, const BitSource& z,
                         std::size_t bits) {
  RealRecord r;
  r.trajectory = l.trajectory(input);
  r.final_guess = r.trajectory.back();
  std::size_t n = input.size();
  while (n > 0 && r.trajectory[n - 1] == r.final_guess) --n;
  r.stabilized_at = n;
  r.stabilized = n <= final_quarter_start(input.size());
  if (t.contains(r.final_guess) && t.kind(r.final_guess) != EntryKind::Measure) {
    auto got = read_real(t, r.final_guess, bits);
    r.agrees = got && *got == z.prefix(bits);
  }
  r.success = r.stabilized && r.agrees;
  return r;
}

}  // namespace mlab
