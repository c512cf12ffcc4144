#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "mlab/harness.hpp"
#include "mlab/kernels.hpp"

using namespace mlab;

namespace {

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  return json::parse(in);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"measurelab: learning measures and reals in the limit, at desk scale"};
  app.require_subcommand(1);

  std::string table_path, config_path, tree_text, in_path, out_path, csv_path;
  Index index = 0;
  std::uint64_t seed = 0;
  std::size_t length = 64, count = 1;
  std::vector<std::size_t> grid;

  auto* sample = app.add_subcommand("sample", "Emit seeded samples of an exact measure entry");
  sample->add_option("--table", table_path, "Table manifest (JSON)")->required()->check(CLI::ExistingFile);
  sample->add_option("--index", index, "Measure entry to sample")->required();
  sample->add_option("--seed", seed, "First seed");
  sample->add_option("--length", length, "Bits per stream");
  sample->add_option("--count", count, "Number of consecutive seeds");

  auto* learn = app.add_subcommand("learn", "Run a config's learner on one stream and print its guesses");
  learn->add_option("--config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  learn->add_option("--seed", seed, "Sample seed (samples input)");

  auto* transform = app.add_subcommand("transform", "Materialize an index-transform tree and print its indices");
  transform->add_option("--table", table_path, "Table manifest (JSON)")->required()->check(CLI::ExistingFile);
  transform->add_option("--tree", tree_text, "Transform tree, e.g. '{\"bernoulli_lift\": 1}'")->required();

  auto* bench = app.add_subcommand("bench", "Run an experiment config and write its report");
  bench->add_option("--config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  bench->add_option("--out", out_path, "Report JSON (overrides the config)");
  bench->add_option("--csv", csv_path, "Convergence CSV (overrides the config)");

  auto* report = app.add_subcommand("report", "Re-render the convergence CSV of a JSON report");
  report->add_option("--in", in_path, "Report JSON")->required()->check(CLI::ExistingFile);
  report->add_option("--csv", csv_path, "Output CSV (stdout when absent)");
  report->add_option("--grid", grid, "Prefix lengths (default: the report's grid)")->delimiter(',');

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sample) {
      auto t = Table::from_file(table_path);
      std::vector<std::uint64_t> seeds;
      for (std::size_t k = 0; k < count; ++k) seeds.push_back(seed + k);
      for (const auto& s : sample_streams(*t, index, seeds, length)) std::cout << s.seed << ' ' << s.bits.str() << '\n';
      return 0;
    }
    if (*learn) {
      ExperimentConfig cfg = load_config(config_path);
      TablePtr t = build_table(cfg);
      LearnerPtr l = build_learner(cfg.learner, t, cfg.eval.estimator);
      BitString x;
      if (cfg.input == InputMode::Prefix)
        x = t->real_source(cfg.truth).prefix(cfg.eval.horizon);
      else
        x = sample_streams(*t, cfg.truth, {seed}, cfg.eval.horizon).front().bits;
      auto tr = l->trajectory(x);
      json changes = json::array();
      for (std::size_t n = 0; n < tr.size(); ++n)
        if (n == 0 || tr[n] != tr[n - 1]) changes.push_back({n, tr[n]});
      json out{{"learner", l->describe()}, {"length", x.size()}, {"changes", changes}, {"final", tr.back()}};
      if (cfg.input == InputMode::Samples) {
        Stream s{seed, x};
        StreamRecord r = judge_trajectory(*t, cfg.eval, s, tr);
        out["verdict"] = verdict_name(r.verdict);
        out["success"] = r.success;
      }
      out["events"] = l->events(x);
      std::cout << out.dump(2) << '\n';
      return 0;
    }
    if (*transform) {
      auto t = Table::from_file(table_path);
      Index e = materialize(json::parse(tree_text), *t);
      json derived = json::array();
      for (const auto& [key, idx] : t->derived()) derived.push_back({key, idx});
      std::cout << json{{"index", e}, {"resolved", t->resolve(e)}, {"derived", derived}}.dump(2) << '\n';
      return 0;
    }
    if (*bench) {
      ExperimentConfig cfg = load_config(config_path);
      if (!out_path.empty()) cfg.json_out = out_path;
      if (!csv_path.empty()) cfg.csv_out = csv_path;
      Report r = run_experiment(cfg);
      write_outputs(cfg, r);
      std::cout << notion_name(cfg.eval.notion) << " success " << r.success.success_fraction << " over "
                << r.success.records.size() << " stream(s), " << r.wall_clock_seconds << " s, " << kernel_threads()
                << " thread(s): " << (r.passed ? "PASS" : "FAIL") << '\n';
      return r.passed ? 0 : 1;
    }
    if (*report) {
      json rep = read_json(in_path);
      if (grid.empty()) grid = convergence_grid(rep.at("result").at("horizon").get<std::size_t>());
      std::string csv = convergence_table(rep, grid);
      if (csv_path.empty()) {
        std::cout << csv;
      } else {
        std::ofstream out(csv_path);
        if (!out) throw std::runtime_error("cannot write " + csv_path);
        out << csv;
      }
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error at " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
