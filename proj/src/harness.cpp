#include "mlab/harness.hpp"

#include <chrono>
#include <fstream>
#include <sstream>

#include "mlab/extractor.hpp"
#include "mlab/interleave_learner.hpp"
#include "mlab/majority.hpp"
#include "mlab/weights.hpp"

namespace mlab {

namespace {

std::string child(const std::string& path, const std::string& key) {
  return (path == "/" ? "" : path) + "/" + key;
}

const json& need(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object() || !obj.contains(key)) throw ConfigError(child(path, key), "missing");
  return obj.at(key);
}

template <class T>
T get(const json& v, const std::string& path) {
  try {
    return v.get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(path, std::string("wrong type (") + e.what() + ")");
  }
}

std::vector<Index> index_list(const json& v, const std::string& path) {
  if (!v.is_array() || v.empty()) throw ConfigError(path, "expected a nonempty list of indices");
  return get<std::vector<Index>>(v, path);
}

ParamMapPtr map_named(const Table& t, const json& v, const std::string& path) {
  std::string name = get<std::string>(v, path);
  if (name == "bernoulli_hat") name = "bernoulli";
  try {
    return t.param_map(name);
  } catch (const ProgramError& e) {
    throw ConfigError(path, e.what());
  }
}

ClosedClass class_named(const Table& t, const json& v, const std::string& path) {
  try {
    return t.closed_class(get<std::string>(v, path));
  } catch (const ProgramError& e) {
    throw ConfigError(path, e.what());
  }
}

Q parse_weight(const json& v, const std::string& path) {
  try {
    if (v.is_string()) return parse_rational(v.get<std::string>());
    if (v.is_number_integer()) return Q(v.get<long>());
  } catch (const std::exception& e) {
    throw ConfigError(path, e.what());
  }
  throw ConfigError(path, "weights are \"p/q\" strings");
}

}  // namespace

Estimator build_estimator(const std::vector<std::string>& codecs, const std::string& path) {
  std::vector<int> ids;
  for (std::size_t i = 0; i < codecs.size(); ++i) {
    try {
      ids.push_back(codec_id(codecs[i]));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(child(path, std::to_string(i)), e.what());
    }
  }
  if (ids.empty()) throw ConfigError(path, "needs at least one codec");
  return Estimator(std::move(ids));
}

ExperimentConfig parse_config(const json& raw, const std::filesystem::path& base_dir) {
  if (!raw.is_object()) throw ConfigError("/", "config must be an object");
  ExperimentConfig c;
  c.raw = raw;
  c.base_dir = base_dir;
  auto resolve = [&](const std::string& p) {
    std::filesystem::path path(p);
    return path.is_absolute() ? path : base_dir / path;
  };
  c.table_path = resolve(get<std::string>(need(raw, "table", "/"), "/table"));
  if (raw.contains("flips")) c.flips = raw.at("flips");
  if (raw.contains("codecs")) {
    c.codecs = get<std::vector<std::string>>(raw.at("codecs"), "/codecs");
  } else {
    for (const auto& info : codec_registry()) c.codecs.push_back(info.name);
  }
  c.eval.estimator = build_estimator(c.codecs);
  c.learner = need(raw, "learner", "/");
  c.truth = get<Index>(need(raw, "truth", "/"), "/truth");
  std::string input = get<std::string>(raw.value("input", json("samples")), "/input");
  if (input == "samples")
    c.input = InputMode::Samples;
  else if (input == "prefix")
    c.input = InputMode::Prefix;
  else
    throw ConfigError("/input", "expected \"samples\" or \"prefix\"");
  try {
    c.eval.notion = notion_from_name(get<std::string>(raw.value("notion", json("EX")), "/notion"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError("/notion", e.what());
  }
  c.eval.horizon = get<std::size_t>(raw.value("horizon", json(4096)), "/horizon");
  if (c.eval.horizon < 1) throw ConfigError("/horizon", "must be at least 1");
  c.eval.depth = get<std::size_t>(raw.value("depth", json(8)), "/depth");
  c.eval.threshold = get<Ext>(raw.value("threshold_c", json(48)), "/threshold_c");
  if (raw.contains("class")) c.eval.class_members = index_list(raw.at("class"), "/class");
  if (raw.contains("seeds")) {
    const json& s = raw.at("seeds");
    if (s.is_array()) {
      c.seeds = get<std::vector<std::uint64_t>>(s, "/seeds");
    } else if (s.is_object()) {
      auto from = get<std::uint64_t>(s.value("from", json(0)), "/seeds/from");
      auto count = get<std::uint64_t>(need(s, "count", "/seeds"), "/seeds/count");
      for (std::uint64_t i = 0; i < count; ++i) c.seeds.push_back(from + i);
    } else {
      throw ConfigError("/seeds", "expected a list or {\"from\", \"count\"}");
    }
  }
  if (c.input == InputMode::Samples && c.seeds.empty()) throw ConfigError("/seeds", "must be nonempty");
  c.agreement_bits = get<std::size_t>(raw.value("agreement_bits", json(32)), "/agreement_bits");
  if (raw.contains("success_threshold"))
    c.success_threshold = get<double>(raw.at("success_threshold"), "/success_threshold");
  if (raw.contains("output")) {
    const json& o = raw.at("output");
    if (o.contains("json")) c.json_out = resolve(get<std::string>(o.at("json"), "/output/json"));
    if (o.contains("csv")) c.csv_out = resolve(get<std::string>(o.at("csv"), "/output/csv"));
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("/", "cannot read " + path.string());
  json raw;
  try {
    raw = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("/", path.string() + ": " + e.what());
  }
  return parse_config(raw, path.parent_path());
}

TablePtr build_table(const ExperimentConfig& cfg) {
  std::ifstream in(cfg.table_path);
  if (!in) throw ConfigError("/table", "cannot read " + cfg.table_path.string());
  json manifest = json::parse(in);
  if (cfg.flips) manifest["flips"] = *cfg.flips;
  try {
    return Table::from_manifest(manifest);
  } catch (const std::exception& e) {
    throw ConfigError(cfg.flips ? "/flips" : "/table", e.what());
  }
}

LearnerPtr build_learner(const json& tree, const TablePtr& t, const Estimator& est, const std::string& path) {
  if (!tree.is_object() || tree.size() != 1) throw ConfigError(path, "a learner tree is a one-key object");
  const std::string kind = tree.begin().key();
  const json& arg = tree.begin().value();
  const std::string p = child(path, kind);
  try {
    if (kind == "constant") return constant_learner(get<Index>(arg, p));
    if (kind == "alternating") {
      auto ab = index_list(arg, p);
      if (ab.size() != 2) throw ConfigError(p, "expected [even, odd]");
      return alternating_learner(ab[0], ab[1]);
    }
    if (kind == "churn_alias")
      return churn_alias_learner(t, get<Index>(need(arg, "truth", p), child(p, "truth")),
                                 get<std::size_t>(arg.value("period", json(3)), child(p, "period")));
    if (kind == "hash_split") {
      std::vector<WeightedTarget> targets;
      const json& rows = need(arg, "targets", p);
      for (std::size_t i = 0; i < rows.size(); ++i) {
        std::string rp = child(child(p, "targets"), std::to_string(i));
        if (!rows[i].is_array() || rows[i].size() != 2) throw ConfigError(rp, "expected [index, \"p/q\"]");
        targets.push_back({get<Index>(rows[i][0], rp), parse_weight(rows[i][1], rp)});
      }
      return hash_split_learner(std::move(targets), get<std::uint64_t>(arg.value("salt", json(0)), child(p, "salt")));
    }
    if (kind == "ideal_real") return ideal_real_learner(t, index_list(arg, p));
    if (kind == "ideal_interleave") return ideal_interleave_learner(t, index_list(arg, p));
    if (kind == "frequency") return frequency_learner(t, index_list(arg, p));
    if (kind == "cost_oracle") {
      ParamMapPtr f;
      if (arg.is_object() && arg.contains("map")) f = map_named(*t, arg.at("map"), child(p, "map"));
      return cost_oracle_learner(t, est, f);
    }
    if (kind == "universal_partial") return universal_partial_learner(t, est);
    if (kind == "lift")
      return lift_real_learner(build_learner(need(arg, "learner", p), t, est, child(p, "learner")),
                               map_named(*t, need(arg, "map", p), child(p, "map")),
                               class_named(*t, need(arg, "class", p), child(p, "class")), t, est);
    if (kind == "ex_weight" || kind == "partialex_weight" || kind == "bc_majority") {
      LearnerPtr v = build_learner(need(arg, "V", p), t, est, child(p, "V"));
      ParamMapPtr f = map_named(*t, need(arg, "map", p), child(p, "map"));
      if (kind == "ex_weight") return ex_weight_learner(v, f, t);
      if (kind == "partialex_weight") return partialex_weight_learner(v, f, t);
      return bc_majority_learner(v, f, t);
    }
    if (kind == "inverse_lift")
      return inverse_lift_learner(build_learner(need(arg, "learner", p), t, est, child(p, "learner")),
                                  map_named(*t, need(arg, "map", p), child(p, "map")),
                                  class_named(*t, need(arg, "class", p), child(p, "class")), t);
    if (kind == "interleave_ex") return interleave_ex_learner(build_learner(need(arg, "V", p), t, est, child(p, "V")), t);
    if (kind == "interleave_bc") return interleave_bc_learner(build_learner(need(arg, "V", p), t, est, child(p, "V")), t);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(p, e.what());
  }
  throw ConfigError(p, "unknown learner");
}

Index materialize(const json& tree, const Table& t, const std::string& path) {
  if (tree.is_number_unsigned() || tree.is_number_integer()) {
    Index e = get<Index>(tree, path);
    if (!t.contains(e)) throw ConfigError(path, "no entry " + std::to_string(e));
    return e;
  }
  if (!tree.is_object() || tree.size() != 1) throw ConfigError(path, "expected an index or a one-key object");
  const std::string kind = tree.begin().key();
  const json& arg = tree.begin().value();
  const std::string p = child(path, kind);
  try {
    if (kind == "bernoulli_lift") return t.bernoulli_lift(materialize(arg, t, p));
    if (kind == "param_lift")
      return t.param_lift(map_named(t, need(arg, "map", p), child(p, "map")), materialize(need(arg, "of", p), t, child(p, "of")));
    if (kind == "inverse_lift")
      return t.inverse_lift(map_named(t, need(arg, "map", p), child(p, "map")),
                            class_named(t, need(arg, "class", p), child(p, "class")),
                            materialize(need(arg, "of", p), t, child(p, "of")));
    if (kind == "pad") {
      if (!arg.is_array() || arg.size() != 2) throw ConfigError(p, "expected [tree, j]");
      return t.pad(materialize(arg[0], t, child(p, "0")), get<Index>(arg[1], child(p, "1")));
    }
    if (kind == "majority") {
      WeightedSet a;
      for (std::size_t i = 0; i < arg.size(); ++i) {
        std::string rp = child(p, std::to_string(i));
        if (!arg[i].is_array() || arg[i].size() != 2) throw ConfigError(rp, "expected [tree, \"p/q\"]");
        a.members.push_back({materialize(arg[i][0], t, child(rp, "0")), parse_weight(arg[i][1], child(rp, "1"))});
      }
      return majority_measure(a, t);
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(p, e.what());
  }
  throw ConfigError(p, "unknown transform");
}

json Report::to_json() const {
  json out = body;
  out["wall_clock_seconds"] = wall_clock_seconds;
  return out;
}

Report run_experiment(const ExperimentConfig& cfg) {
  auto start = std::chrono::steady_clock::now();
  TablePtr t = build_table(cfg);
  if (!t->contains(cfg.truth)) throw ConfigError("/truth", "no entry " + std::to_string(cfg.truth));
  LearnerPtr l = build_learner(cfg.learner, t, cfg.eval.estimator);
  validate(cfg.eval, cfg.input == InputMode::Samples ? cfg.seeds.size() : 1);

  Report r;
  json events = json::array();
  const bool want_events = cfg.raw.value("events", false) || cfg.input == InputMode::Prefix;
  if (cfg.input == InputMode::Samples) {
    if (!t->entry(cfg.truth).exact_measure()) throw ConfigError("/truth", "sampling needs an exact measure entry");
    auto streams = sample_streams(*t, cfg.truth, cfg.seeds, cfg.eval.horizon);
    r.success = evaluate(*t, *l, cfg.eval, streams, cfg.truth);
    if (want_events)
      for (const auto& s : streams) events.push_back({{"seed", s.seed}, {"events", l->events(s.bits)}});
  } else {
    if (t->kind(cfg.truth) != EntryKind::Real) throw ConfigError("/truth", "prefix input needs a real entry");
    BitSource z = t->real_source(cfg.truth);
    BitString input = z.prefix(cfg.eval.horizon);
    RealRecord rr = evaluate_real(*t, *l, input, z, cfg.agreement_bits);
    StreamRecord sr;
    sr.trajectory = rr.trajectory;
    sr.stabilized_at = rr.stabilized_at;
    sr.stabilized = rr.stabilized;
    sr.final_guess = rr.final_guess;
    sr.verdict = rr.agrees ? Verdict::Correct : Verdict::Wrong;
    sr.success = rr.success;
    if (!rr.stabilized)
      sr.reason = "no stabilization before the final quarter";
    else if (!rr.agrees)
      sr.reason = "final real disagrees within " + std::to_string(cfg.agreement_bits) + " bits";
    r.success.notion = cfg.eval.notion;
    r.success.truth = cfg.truth;
    r.success.horizon = cfg.eval.horizon;
    r.success.depth = cfg.eval.depth;
    r.success.records.push_back(std::move(sr));
    r.success.success_fraction = r.success.records.back().success ? 1.0 : 0.0;
    events.push_back({{"seed", 0}, {"events", l->events(input)}});
  }
  r.passed = !cfg.success_threshold || r.success.success_fraction >= *cfg.success_threshold;
  json derived = json::array();
  for (const auto& [key, idx] : t->derived()) derived.push_back({key, idx});
  r.body = {{"config", cfg.raw},
            {"manifest_hash", t->manifest_hash()},
            {"codecs", cfg.eval.estimator.describe()},
            {"sampler", kSamplerName},
            {"learner", l->describe()},
            {"input", cfg.input == InputMode::Samples ? "samples" : "prefix"},
            {"result", r.success.to_json()},
            {"events", events},
            {"derived_entries", derived},
            {"passed", r.passed}};
  r.wall_clock_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

void write_outputs(const ExperimentConfig& cfg, const Report& r) {
  if (cfg.json_out) {
    std::ofstream out(*cfg.json_out);
    if (!out) throw std::runtime_error("cannot write " + cfg.json_out->string());
    out << r.to_json().dump(2) << '\n';
  }
  if (cfg.csv_out) {
    std::ofstream out(*cfg.csv_out);
    if (!out) throw std::runtime_error("cannot write " + cfg.csv_out->string());
    out << r.success.convergence_csv();
  }
}

std::string convergence_table(const json& report, const std::vector<std::size_t>& grid) {
  const json& result = report.contains("result") ? report.at("result") : report;
  std::size_t h = result.at("horizon").get<std::size_t>();
  std::ostringstream os;
  os << "seed,n,guess,stabilized,verdict\n";
  for (const auto& s : result.at("streams")) {
    std::map<std::size_t, Index> rows;
    for (const auto& row : s.at("grid")) rows[row.at(0).get<std::size_t>()] = row.at(1).get<Index>();
    std::size_t stab = s.at("stabilized_at").get<std::size_t>();
    for (std::size_t n : grid) {
      auto it = rows.find(n);
      if (it == rows.end()) throw std::invalid_argument("report has no guess at n = " + std::to_string(n));
      os << s.at("seed").get<std::uint64_t>() << ',' << n << ',' << it->second << ',' << (n >= stab ? 1 : 0) << ','
         << (n == h ? s.at("verdict").get<std::string>() : "") << '\n';
    }
  }
  return os.str();
}

void emit_convergence_table(const json& report, const std::vector<std::size_t>& grid,
                            const std::filesystem::path& path) {
  std::string csv = convergence_table(report, grid);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << csv;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace mlab
