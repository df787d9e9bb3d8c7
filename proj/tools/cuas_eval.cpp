// cuas-eval: simulate trials, evaluate them, rank DTI systems and run
// validation suites.
//
// Exit codes: 0 success, 2 usage / configuration / input error, 1 internal.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cuas/ingest.hpp"
#include "cuas/pipeline.hpp"
#include "cuas/scoring.hpp"
#include "cuas/simulator.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitInput = 2;

void write_text(const std::optional<std::string>& path, const std::string& text) {
  if (!path) {
    std::cout << text;
    return;
  }
  std::ofstream out(*path, std::ios::binary);
  if (!out) throw cuas::ConfigInvalid("cannot write " + *path);
  out << text;
}

struct SimulateArgs {
  std::string scenario;
  std::string model;
  std::optional<std::uint64_t> seed;
  std::string out;
};

int cmd_simulate(const SimulateArgs& a) {
  const auto scenario = cuas::sim::ScenarioConfig::from_json(cuas::ingest::read_json_file(a.scenario));
  const auto model = cuas::sim::DtiModelConfig::from_json(cuas::ingest::read_json_file(a.model));
  const std::uint64_t seed = a.seed.value_or(scenario.rng_seed);
  const cuas::ingest::TrialBundle bundle = cuas::sim::simulate_trial(scenario, model, seed);
  fs::create_directories(a.out);
  cuas::ingest::write_trial(bundle, cuas::ingest::TrialPaths::in_directory(a.out));
  std::cerr << "wrote trial " << bundle.config.trial_id << " to " << a.out << " (" << bundle.ground_truths.size()
            << " truths, " << bundle.detections.size() << " detections, " << bundle.tracks.size() << " tracks)\n";
  return kExitOk;
}

struct EvaluateArgs {
  std::string trial_dir;
  std::optional<std::string> context;
  std::optional<std::string> weights;
  std::optional<std::string> out;
  bool no_normalize = false;
  bool missing_as_zero = false;
};

int cmd_evaluate(const EvaluateArgs& a) {
  cuas::EvaluationOptions opts;
  if (a.context) opts.context = cuas::ingest::load_scoring_context(*a.context);
  if (a.weights) opts.weights = cuas::ingest::load_weights(*a.weights);
  opts.normalize = !a.no_normalize;
  opts.aggregate.treat_missing_as_zero = a.missing_as_zero;

  const auto bundle = cuas::ingest::load_trial(cuas::ingest::TrialPaths::in_directory(a.trial_dir));
  const cuas::Evaluation eval = cuas::evaluate_trial(bundle, opts);
  for (const std::string& w : eval.warnings) std::cerr << "warning: " << w << '\n';
  write_text(a.out, cuas::report_json(eval, opts).dump(2) + "\n");
  return kExitOk;
}

struct CompareArgs {
  std::vector<std::string> reports;
  std::optional<std::string> store;
  std::optional<std::string> out;
};

cuas::scoring::ScoreTree tree_from_report(const json& r, const std::string& path) {
  auto bad = [&](const std::string& why) { return cuas::ConfigInvalid(path + ": schema mismatch: " + why); };
  if (r.value("schema_version", std::string()) != cuas::kReportSchemaVersion) {
    throw bad("expected schema_version " + std::string(cuas::kReportSchemaVersion));
  }
  if (!r.contains("dti_id") || !r.contains("trial_id")) throw bad("missing dti_id or trial_id");
  if (!r.contains("scores")) throw bad("report has no scores (evaluated with --no-normalize?)");
  const json& s = r.at("scores");
  cuas::scoring::ScoreTree tree;
  try {
    if (!s.at("system").is_null()) tree.system = s.at("system").get<double>();
    for (cuas::scoring::Component c : cuas::scoring::kComponents) {
      const json& v = s.at("components").at(cuas::scoring::to_string(c));
      tree.components[c] = v.is_null() ? std::nullopt : std::optional<double>(v.get<double>());
    }
  } catch (const json::exception& e) {
    throw bad(e.what());
  }
  return tree;
}

int cmd_compare(const CompareArgs& a) {
  cuas::scoring::RatingStore store = a.store ? cuas::scoring::RatingStore(*a.store) : cuas::scoring::RatingStore();
  cuas::scoring::RatingTable table;
  for (const std::string& path : a.reports) {
    const json r = cuas::ingest::read_json_file(path);
    const auto tree = tree_from_report(r, path);
    table = cuas::scoring::update_rating(store, r.at("dti_id").get<std::string>(),
                                         r.at("trial_id").get<std::string>(), tree);
  }
  write_text(a.out, cuas::scoring::format_table(table));
  return kExitOk;
}

struct ValidateArgs {
  std::string suite;
  std::optional<int> iterations;
  std::optional<std::uint64_t> seed;
  int jobs = 1;
  std::optional<std::string> out;
};

int cmd_validate(const ValidateArgs& a) {
  const json j = cuas::ingest::read_json_file(a.suite);
  cuas::sim::SuiteConfig suite = cuas::sim::SuiteConfig::from_json(j, fs::path(a.suite).parent_path());
  if (a.iterations) {
    if (*a.iterations < 1) throw cuas::ConfigInvalid("--iterations must be >= 1");
    suite.iterations = *a.iterations;
  }
  if (a.seed) suite.seed = *a.seed;
  const cuas::sim::SuiteReport report = cuas::sim::run_validation_suite(suite, {}, a.jobs);
  std::cout << report.format_table();
  if (a.out) write_text(a.out, report.to_json().dump(2) + "\n");
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Counter-UAS DTI evaluation engine"};
  app.set_version_flag("--version", std::string(cuas::kToolVersion));
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Generate a simulated trial");
  simulate->add_option("--scenario", sim.scenario, "scenario.json")->required();
  simulate->add_option("--model", sim.model, "dti_model.json")->required();
  simulate->add_option("--seed", sim.seed, "RNG seed (default: scenario rng_seed)");
  simulate->add_option("--out", sim.out, "Output trial directory")->required();

  EvaluateArgs ev;
  auto* evaluate = app.add_subcommand("evaluate", "Evaluate a trial directory");
  evaluate->add_option("trial_dir", ev.trial_dir, "Directory with trial.json and the .jsonl files")->required();
  evaluate->add_option("--context", ev.context, "scoring_context.json");
  evaluate->add_option("--weights", ev.weights, "weights.json");
  evaluate->add_option("--out", ev.out, "report.json (default: stdout)");
  evaluate->add_flag("--no-normalize", ev.no_normalize, "Emit raw metrics only");
  evaluate->add_flag("--treat-missing-as-zero", ev.missing_as_zero, "Score undefined metrics as 0");

  CompareArgs cmp;
  auto* compare = app.add_subcommand("compare", "Rank DTI systems from report files");
  compare->add_option("reports", cmp.reports, "report.json files")->required();
  compare->add_option("--store", cmp.store, "ratings.jsonl history to append to");
  compare->add_option("--out", cmp.out, "Write the table here instead of stdout");

  ValidateArgs val;
  auto* validate = app.add_subcommand("validate", "Run a simulation validation suite");
  validate->add_option("suite", val.suite, "suite.json")->required();
  validate->add_option("--iterations", val.iterations, "Override iterations per cell");
  validate->add_option("--seed", val.seed, "Override suite seed");
  validate->add_option("--jobs", val.jobs, "Worker threads")->check(CLI::PositiveNumber);
  validate->add_option("--out", val.out, "Write the JSON suite report here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*simulate) return cmd_simulate(sim);
    if (*evaluate) return cmd_evaluate(ev);
    if (*compare) return cmd_compare(cmp);
    if (*validate) return cmd_validate(val);
  } catch (const cuas::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitInternal;
}
