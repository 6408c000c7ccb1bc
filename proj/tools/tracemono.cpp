// tracemono: run trace-inequality suites, classify functions and run
// Wegner experiments.
//
// Exit codes: 0 success, 1 inequality violation, 2 usage or config error,
// 3 I/O error.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "tracemono/io.hpp"
#include "tracemono/suite.hpp"

namespace fs = std::filesystem;
using namespace tracemono;
using io::Json;

namespace {

constexpr int kOk = 0;
constexpr int kViolation = 1;
constexpr int kUsage = 2;
constexpr int kIo = 3;

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::uint64_t seed = 0;
  std::string out = ".";
  std::string format = "csv";
  double tol = Tolerances{}.cmp;
  unsigned jobs = default_jobs();
};

fs::path prepare_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory '" + dir + "'");
  return fs::path(dir);
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open '" + path.string() + "' for writing");
  f << content;
  f.close();
  if (!f) throw IoError("write to '" + path.string() + "' failed");
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

/// Reads JSON from a file path or, if the argument starts with '{', inline.
Json read_json(const std::string& source) {
  std::string text;
  if (!source.empty() && source.front() == '{') {
    text = source;
  } else {
    std::ifstream f(source, std::ios::binary);
    if (!f) throw IoError("cannot read '" + source + "'");
    std::ostringstream ss;
    ss << f.rdbuf();
    text = ss.str();
  }
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what());
  }
}

int cmd_verify_traces(const Options& opt, int pairs, bool reverse_order) {
  suite::CorpusConfig cfg;
  cfg.pairs = pairs;
  cfg.tol = opt.tol;
  cfg.reverse_order = reverse_order;
  const std::vector<InequalityResult> rows = suite::run_corpus(cfg, opt.seed, opt.jobs);

  const fs::path dir = prepare_dir(opt.out);
  const InequalityResult* first_failure = nullptr;
  for (const InequalityResult& r : rows)
    if (!r.pass) {
      first_failure = &r;
      break;
    }
  if (opt.format == "json") {
    Json arr = Json::array();
    for (const InequalityResult& r : rows) arr.push_back(io::to_json(r));
    write_file(dir / "traces.json", dump(Json{{"seed", opt.seed}, {"rows", arr}}));
  } else {
    std::ostringstream csv;
    io::write_results_csv_header(csv);
    for (const InequalityResult& r : rows) io::write_result_csv(csv, r);
    write_file(dir / "traces.csv", csv.str());
  }
  const fs::path failure_path = dir / "failure.json";
  if (first_failure) {
    write_file(failure_path, dump(io::to_json(*first_failure)));
    std::cerr << "violation: " << first_failure->suite << " seed=" << first_failure->seed
              << " slack=" << io::num(first_failure->slack) << "\n";
    return kViolation;
  }
  std::error_code ec;
  fs::remove(failure_path, ec);
  std::cout << rows.size() << " checks passed\n";
  return kOk;
}

int cmd_classify(const Options& opt, const std::string& spec_source, const SearchBudget& budget) {
  const io::FunctionSpec spec = io::function_spec_from_json(read_json(spec_source));
  const ClassificationReport rep = classify(spec.function, spec.direction, spec.class_l, budget, opt.seed);
  const fs::path dir = prepare_dir(opt.out);
  write_file(dir / "classification.json", dump(io::to_json(rep)));
  std::cout << rep.label << ": " << to_string(rep.verdict) << "\n";
  return kOk;
}

int cmd_demo_inclusion(const Options& opt, const SearchBudget& budget) {
  const std::vector<ClassificationReport> reps = strict_inclusion_demo(budget, opt.seed);
  Json arr = Json::array();
  for (const ClassificationReport& r : reps) {
    arr.push_back(io::to_json(r));
    std::cout << r.label << ": " << to_string(r.verdict) << "\n";
  }
  write_file(prepare_dir(opt.out) / "demo_inclusion.json", dump(Json{{"seed", opt.seed}, {"reports", arr}}));
  return kOk;
}

int cmd_wegner(const Options& opt, const std::string& config_source, bool seed_given) {
  io::WegnerConfig cfg = io::wegner_config_from_json(read_json(config_source));
  if (seed_given) cfg.master_seed = opt.seed;
  std::vector<WegnerReport> parts;
  for (int L : cfg.box_sizes) {
    LatticeModel model;
    model.L = L;
    model.mesh_per_cell = cfg.mesh_per_cell;
    model.coupling = cfg.coupling;
    parts.push_back(wegner_mc(model, cfg.intervals, cfg.trials, cfg.master_seed, opt.jobs, opt.tol));
  }
  const WegnerReport rep = merge_reports(parts);
  const fs::path dir = prepare_dir(opt.out);
  write_file(dir / "wegner_report.json", dump(io::to_json(rep, cfg)));
  std::ostringstream csv;
  io::write_wegner_csv(csv, rep);
  write_file(dir / "wegner.csv", csv.str());
  std::cout << "chain checks: " << rep.chain_checks << ", failures: " << rep.chain_failures;
  if (rep.fit.valid()) std::cout << ", fit slope " << io::num(rep.fit.slope) << " r2 " << io::num(rep.fit.r_squared);
  std::cout << "\n";
  return rep.chain_failures == 0 ? kOk : kViolation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Trace inequalities for form-ordered operators"};
  app.require_subcommand(1);
  Options opt;
  int jobs_flag = 0;
  auto common = [&](CLI::App* sub) {
    sub->add_option("--seed", opt.seed, "Master seed");
    sub->add_option("--out", opt.out, "Output directory");
    sub->add_option("--tol", opt.tol, "Comparison tolerance")->check(CLI::PositiveNumber);
    sub->add_option("--jobs", jobs_flag, "Worker threads (default: TRACEMONO_JOBS or 1)")->check(CLI::PositiveNumber);
  };

  int pairs = 300;
  bool reverse_order = false;
  CLI::App* verify = app.add_subcommand("verify-traces", "Run every trace check over the seeded pair corpus");
  common(verify);
  verify->add_option("--format", opt.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  verify->add_option("--pairs", pairs, "Number of generated pairs")->check(CLI::PositiveNumber);
  verify->add_flag("--debug-reverse-order", reverse_order, "Swap A and B in every pair (negative control)");

  SearchBudget budget;
  auto budget_opts = [&](CLI::App* sub) {
    sub->add_option("--pair-trials", budget.pair_trials, "Random pair trials")->check(CLI::PositiveNumber);
    sub->add_option("--pair-dim", budget.pair_dim, "Pair dimension")->check(CLI::Range(2, 4));
    sub->add_option("--loewner-sets", budget.loewner_sets, "Loewner point sets")->check(CLI::PositiveNumber);
  };

  std::string spec_source;
  CLI::App* cls = app.add_subcommand("classify", "Search for refutations of operator monotonicity");
  common(cls);
  budget_opts(cls);
  cls->add_option("--spec", spec_source, "Function spec: JSON file or inline JSON")->required();

  CLI::App* demo = app.add_subcommand("demo-inclusion", "Separate the Laplace class from operator monotone functions");
  common(demo);
  budget_opts(demo);

  std::string config_source;
  CLI::App* weg = app.add_subcommand("wegner", "Monte Carlo Wegner experiment");
  common(weg);
  weg->add_option("--config", config_source, "Experiment config: JSON file or inline JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }
  if (jobs_flag > 0) opt.jobs = static_cast<unsigned>(jobs_flag);

  try {
    if (*verify) return cmd_verify_traces(opt, pairs, reverse_order);
    if (*cls) return cmd_classify(opt, spec_source, budget);
    if (*demo) return cmd_demo_inclusion(opt, budget);
    if (*weg) return cmd_wegner(opt, config_source, weg->count("--seed") > 0);
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kIo;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kUsage;
  } catch (const DomainError& e) {
    std::cerr << "domain error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}
