// opsel: command-line front end for selection, verification, metrics,
// ingestion and benchmark sweeps. Exit codes: 0 success, 1 usage error,
// 2 data error.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "opsel/bench.hpp"
#include "opsel/data_io.hpp"
#include "opsel/metrics.hpp"
#include "opsel/selectors.hpp"
#include "opsel/verify.hpp"

namespace {

using opsel::Json;

class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

int fail(const char* kind, const std::string& message, int code) {
  Json err{{"error", {{"kind", kind}, {"message", message}}}};
  std::cerr << err.dump() << '\n';
  return code;
}

std::vector<opsel::OpinionIndex> parse_slate(const std::string& text) {
  std::vector<opsel::OpinionIndex> slate;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t pos = 0;
    unsigned long long value = 0;
    try {
      value = std::stoull(item, &pos);
    } catch (const std::exception&) {
      throw UsageError("bad slate entry '" + item + "'");
    }
    if (pos != item.size()) throw UsageError("bad slate entry '" + item + "'");
    slate.push_back(static_cast<opsel::OpinionIndex>(value));
  }
  if (slate.empty()) throw UsageError("slate is empty");
  return slate;
}

std::vector<double> parse_doubles(const std::string& text, char sep = ',') {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) {
    if (item.empty()) continue;
    try {
      std::size_t pos = 0;
      out.push_back(std::stod(item, &pos));
      if (pos != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError("bad number '" + item + "'");
    }
  }
  return out;
}

// "n=60,m=30,groups=3,cohesion=0.9,noise=0.1,seed=1,k=3,weights=2:1:1"
opsel::SyntheticSpec parse_synthetic(const std::string& text) {
  opsel::SyntheticSpec spec;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw UsageError("synthetic spec entry '" + item + "' lacks '='");
    const std::string key = item.substr(0, eq);
    const std::string value = item.substr(eq + 1);
    try {
      if (key == "n") spec.n = std::stoul(value);
      else if (key == "m") spec.m = std::stoul(value);
      else if (key == "groups") spec.n_groups = std::stoul(value);
      else if (key == "cohesion") spec.cohesion = std::stod(value);
      else if (key == "noise") spec.noise = std::stod(value);
      else if (key == "seed") spec.seed = std::stoull(value);
      else if (key == "k") spec.k = std::stoul(value);
      else if (key == "weights") spec.group_weights = parse_doubles(value, ':');
      else throw UsageError("unknown synthetic key '" + key + "'");
    } catch (const UsageError&) {
      throw;
    } catch (const std::exception&) {
      throw UsageError("bad value for synthetic key '" + key + "'");
    }
  }
  return spec;
}

std::vector<opsel::Rule> parse_rules(const std::string& text) {
  std::vector<opsel::Rule> rules;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      rules.push_back(opsel::parse_rule(item));
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }
  return rules;
}

opsel::MissingVotes parse_missing(const std::string& text) {
  if (text == "error") return opsel::MissingVotes::error;
  if (text == "disapprove") return opsel::MissingVotes::disapprove;
  if (text == "approve") return opsel::MissingVotes::approve;
  throw UsageError("--missing must be error, disapprove or approve");
}

struct BenchFlags {
  std::vector<std::string> instances;
  std::vector<std::string> synthetic;
  std::string rules;
  std::string epsilons;
  opsel::BenchConfig config;
};

void add_bench_flags(CLI::App* cmd, BenchFlags& flags) {
  cmd->add_option("--instance", flags.instances, "Instance JSON files");
  cmd->add_option("--synthetic", flags.synthetic,
                  "Synthetic spec, e.g. n=60,m=30,groups=3,cohesion=0.9,noise=0.1,seed=1,weights=2:1:1");
  cmd->add_option("--rules", flags.rules, "Comma-separated rules (default: all)");
  cmd->add_option("--k-min", flags.config.k_min, "Smallest k")->capture_default_str();
  cmd->add_option("--k-max", flags.config.k_max, "Largest k (clipped to m)")->capture_default_str();
  cmd->add_option("--random-seeds", flags.config.random_seeds, "Seeds for the random rule")
      ->capture_default_str();
  cmd->add_option("--rule-seeds", flags.config.rule_seeds, "Seeds for the other rules")
      ->capture_default_str();
  cmd->add_option("--seed", flags.config.base_seed, "Base seed")->capture_default_str();
  cmd->add_option("--epsilon", flags.config.epsilon, "diverse_bjr selection epsilon")
      ->capture_default_str();
  cmd->add_option("--metric-epsilon", flags.config.metric_epsilon, "Redundancy epsilon")
      ->capture_default_str();
  cmd->add_option("--trials", flags.config.trials, "Feasibility checker trials")
      ->capture_default_str();
  cmd->add_option("--threads", flags.config.threads, "Worker threads (0: all cores)");
  cmd->add_option("--out", flags.config.output_dir,
                  "Output directory (OPSEL_OUTPUT_DIR overrides)")
      ->capture_default_str();
  cmd->add_flag("--timings", flags.config.record_timings, "Also write timings.csv");
}

opsel::BenchConfig finish_bench_config(BenchFlags& flags) {
  auto config = flags.config;
  for (const auto& p : flags.instances) config.instances.emplace_back(p);
  for (const auto& s : flags.synthetic) config.synthetic.push_back(parse_synthetic(s));
  if (!flags.rules.empty()) config.rules = parse_rules(flags.rules);
  if (!flags.epsilons.empty()) config.epsilon_sweep = parse_doubles(flags.epsilons);
  if (const char* env = std::getenv("OPSEL_OUTPUT_DIR"); env && *env) config.output_dir = env;
  if (config.instances.empty() && config.synthetic.empty()) {
    throw UsageError("give at least one --instance or --synthetic");
  }
  return config;
}

int report_bench(const opsel::BenchConfig& config, const opsel::BenchResult& result) {
  const auto files = opsel::write_results(config, result);
  Json doc;
  doc["mode"] = result.mode;
  doc["rows"] = result.rows.size();
  Json paths = Json::array();
  for (const auto& f : files) paths.push_back(f.generic_string());
  doc["files"] = std::move(paths);
  Json failures = Json::array();
  for (const auto& f : result.failures) {
    failures.push_back({{"question_id", f.question_id}, {"rule", f.rule}, {"message", f.message}});
  }
  doc["failures"] = std::move(failures);
  doc["warnings"] = result.warnings;
  std::cout << doc.dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"opsel: representative opinion selection from approval data"};
  app.require_subcommand(1);

  // select
  std::string instance_path;
  std::string rule_name = "diverse_bjr";
  std::size_t k = 0;
  std::uint64_t seed = 0;
  double epsilon = 0.8;
  std::size_t trials = 5;
  auto* select_cmd = app.add_subcommand("select", "Select k opinions and print the Selection as JSON");
  select_cmd->add_option("--instance", instance_path, "Instance JSON file")->required();
  select_cmd->add_option("--rule", rule_name, "random|engagement|bridging|diversity|jr|bjr|diverse-bjr")
      ->capture_default_str();
  select_cmd->add_option("--k", k, "Subset size (default: the instance's k_default)");
  select_cmd->add_option("--seed", seed, "Seed for random scoring")->capture_default_str();
  select_cmd->add_option("--epsilon", epsilon, "Neighbor threshold for diverse-bjr")
      ->capture_default_str();
  select_cmd->add_option("--trials", trials, "Feasibility checker trials")->capture_default_str();

  // verify
  std::string slate_text;
  std::string selection_path;
  std::size_t verify_k = 0;
  bool brute_force = false;
  auto* verify_cmd = app.add_subcommand("verify", "Check JR and a BJR certificate for a slate");
  verify_cmd->add_option("--instance", instance_path, "Instance JSON file")->required();
  auto* slate_opt = verify_cmd->add_option("--slate", slate_text, "Comma-separated opinion indices");
  verify_cmd->add_option("--selection", selection_path, "Selection JSON (from `select`)")
      ->excludes(slate_opt);
  verify_cmd->add_option("--k", verify_k, "Expected slate size");
  verify_cmd->add_flag("--brute-force", brute_force, "Also run the exhaustive BJR existence check");

  // metrics
  double metric_epsilon = 0.8;
  auto* metrics_cmd = app.add_subcommand("metrics", "Compute the five metrics for a slate");
  metrics_cmd->add_option("--instance", instance_path, "Instance JSON file")->required();
  auto* mslate = metrics_cmd->add_option("--slate", slate_text, "Comma-separated opinion indices");
  metrics_cmd->add_option("--selection", selection_path, "Selection JSON")->excludes(mslate);
  metrics_cmd->add_option("--epsilon", metric_epsilon, "Redundancy epsilon")->capture_default_str();

  // benchmark / sweep-epsilon
  BenchFlags bench_flags;
  auto* bench_cmd = app.add_subcommand("benchmark", "Run a selector x metric sweep over k and seeds");
  add_bench_flags(bench_cmd, bench_flags);
  BenchFlags sweep_flags;
  auto* sweep_cmd = app.add_subcommand("sweep-epsilon", "Run diverse_bjr over a list of epsilons");
  add_bench_flags(sweep_cmd, sweep_flags);
  sweep_cmd->add_option("--epsilons", sweep_flags.epsilons, "Comma-separated epsilons")
      ->capture_default_str();

  // ingest
  std::string format = "probability";
  std::string votes_path, opinions_path, users_path, columns_path, out_dir = "instances";
  std::string missing = "error";
  double threshold = 0.5;
  std::size_t ingest_k = 5;
  std::size_t classify_seeds = 100;
  auto* ingest_cmd = app.add_subcommand("ingest", "Convert raw vote CSVs to instance JSON files");
  ingest_cmd->add_option("--format", format, "probability|likert")->capture_default_str();
  ingest_cmd->add_option("--votes", votes_path, "Long-form votes CSV")->required();
  ingest_cmd->add_option("--opinions", opinions_path, "Opinion text CSV (probability format)");
  ingest_cmd->add_option("--users", users_path, "User leaning CSV (probability format)");
  ingest_cmd->add_option("--columns", columns_path, "JSON column-name map");
  ingest_cmd->add_option("--threshold", threshold, "Approval threshold")->capture_default_str();
  ingest_cmd->add_option("--missing", missing, "error|disapprove|approve")->capture_default_str();
  ingest_cmd->add_option("--k", ingest_k, "k_default written to each instance")->capture_default_str();
  ingest_cmd->add_option("--classify-seeds", classify_seeds, "Random selections per split check")
      ->capture_default_str();
  ingest_cmd->add_option("--out-dir", out_dir, "Output directory")->capture_default_str();

  // gen-synthetic
  opsel::SyntheticSpec spec;
  std::string synth_out;
  auto* gen_cmd = app.add_subcommand("gen-synthetic", "Write a planted-group instance");
  gen_cmd->add_option("--n", spec.n, "Users")->capture_default_str();
  gen_cmd->add_option("--m", spec.m, "Opinions")->capture_default_str();
  gen_cmd->add_option("--groups", spec.n_groups, "Planted groups")->capture_default_str();
  gen_cmd->add_option("--cohesion", spec.cohesion, "In-block approval probability")
      ->capture_default_str();
  gen_cmd->add_option("--noise", spec.noise, "Off-block approval probability")->capture_default_str();
  gen_cmd->add_option("--seed", spec.seed, "Seed")->capture_default_str();
  gen_cmd->add_option("--k", spec.k, "k_default (0: number of groups)")->capture_default_str();
  std::string weights_text;
  gen_cmd->add_option("--weights", weights_text, "Relative group sizes, e.g. 3,1,1,1");
  gen_cmd->add_option("--out", synth_out, "Output file (stdout when omitted)");

  // distances
  std::string dist_out;
  auto* dist_cmd = app.add_subcommand("distances", "Export the normalized Hamming matrix as CSV");
  dist_cmd->add_option("--instance", instance_path, "Instance JSON file")->required();
  dist_cmd->add_option("--out", dist_out, "Output CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("usage", e.what(), 1);
  }

  try {
    auto resolve_slate = [&](const opsel::Instance&) {
      if (!selection_path.empty()) {
        std::ifstream in(selection_path);
        if (!in) throw opsel::DataError("cannot open " + selection_path);
        return opsel::selection_from_json(Json::parse(in)).opinions;
      }
      if (slate_text.empty()) throw UsageError("give --slate or --selection");
      return parse_slate(slate_text);
    };

    if (*select_cmd) {
      const auto instance = opsel::load_instance(instance_path);
      opsel::require_valid(instance);
      opsel::SelectorConfig config;
      try {
        config.rule = opsel::parse_rule(rule_name);
      } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
      }
      config.k = k == 0 ? instance.k : k;
      config.seed = seed;
      config.epsilon = epsilon;
      config.trials = trials;
      const auto result = opsel::select(instance, config);
      Json doc = opsel::selection_to_json(result.selection);
      if (result.certificate) doc["certificate"] = opsel::certificate_to_json(*result.certificate);
      std::cout << doc.dump(2) << '\n';
      return 0;
    }

    if (*verify_cmd) {
      const auto instance = opsel::load_instance(instance_path);
      opsel::require_valid(instance);
      const auto slate = resolve_slate(instance);
      if (verify_k != 0 && verify_k != slate.size()) {
        throw UsageError("--k does not match the slate size");
      }
      const auto jr = opsel::check_jr(instance.matrix, slate);
      const auto certificate = opsel::greedy_certificate(instance.matrix, slate);
      const auto bjr = opsel::check_bjr_certificate(instance.matrix, slate, certificate);
      Json doc;
      doc["k"] = slate.size();
      doc["slate"] = slate;
      doc["jr"] = jr.satisfied;
      doc["jr_report"] = opsel::jr_report_to_json(jr);
      doc["bjr_certificate"] = bjr.ok();
      doc["bjr_report"] = opsel::bjr_report_to_json(bjr);
      doc["certificate"] = opsel::certificate_to_json(certificate);
      if (brute_force) doc["bjr_exists"] = opsel::brute_force_bjr_exists(instance.matrix, slate);
      std::cout << doc.dump(2) << '\n';
      return 0;
    }

    if (*metrics_cmd) {
      const auto instance = opsel::load_instance(instance_path);
      opsel::require_valid(instance);
      const auto slate = resolve_slate(instance);
      const opsel::DistanceIndex index(instance.matrix, metric_epsilon);
      Json doc = opsel::metrics_to_json(opsel::compute_metrics(instance, slate, index));
      std::cout << doc.dump(2) << '\n';
      return 0;
    }

    if (*bench_cmd) {
      const auto config = finish_bench_config(bench_flags);
      return report_bench(config, opsel::run_benchmark(config));
    }
    if (*sweep_cmd) {
      const auto config = finish_bench_config(sweep_flags);
      return report_bench(config, opsel::run_epsilon_sweep(config));
    }

    if (*ingest_cmd) {
      opsel::LoadOptions options;
      if (!columns_path.empty()) options.columns = opsel::ColumnMap::load(columns_path);
      options.threshold = threshold;
      options.k_default = ingest_k;
      options.missing = parse_missing(missing);
      std::vector<opsel::Instance> instances;
      if (format == "probability") {
        opsel::ProbabilitySources sources{votes_path, std::nullopt, std::nullopt};
        if (!opinions_path.empty()) sources.opinions = opinions_path;
        if (!users_path.empty()) sources.users = users_path;
        instances = opsel::load_probability_votes(sources, options);
      } else if (format == "likert") {
        instances = opsel::load_likert_votes(votes_path, options);
      } else {
        throw UsageError("--format must be probability or likert");
      }
      std::filesystem::create_directories(out_dir);
      std::ofstream manifest(std::filesystem::path(out_dir) / "manifest.csv", std::ios::binary);
      manifest << "question_id,file,n,m,split,mean_unrepresented_at_5\n";
      Json listing = Json::array();
      for (std::size_t q = 0; q < instances.size(); ++q) {
        const auto& inst = instances[q];
        const std::string file = "instance_" + std::to_string(q) + ".json";
        opsel::save_instance(inst, std::filesystem::path(out_dir) / file);
        std::string split;
        std::string mean;
        if (inst.n_opinions() >= 5) {
          const auto s = opsel::classify_question(inst, classify_seeds);
          split = std::string(opsel::to_string(s.label));
          mean = opsel::format_number(s.mean_unrepresented_at_5);
        }
        manifest << '"' << inst.question_id << "\"," << file << ',' << inst.n_users() << ','
                 << inst.n_opinions() << ',' << split << ',' << mean << '\n';
        listing.push_back({{"question_id", inst.question_id},
                           {"file", file},
                           {"n", inst.n_users()},
                           {"m", inst.n_opinions()},
                           {"split", split}});
      }
      std::cout << Json{{"instances", listing}}.dump(2) << '\n';
      return 0;
    }

    if (*gen_cmd) {
      if (!weights_text.empty()) spec.group_weights = parse_doubles(weights_text);
      const auto instance = opsel::generate_synthetic(spec);
      if (synth_out.empty()) {
        std::cout << opsel::instance_to_json(instance).dump(2) << '\n';
      } else {
        opsel::save_instance(instance, synth_out);
      }
      return 0;
    }

    if (*dist_cmd) {
      const auto instance = opsel::load_instance(instance_path);
      opsel::require_valid(instance);
      opsel::write_distance_csv(opsel::DistanceIndex(instance.matrix, 0.0), dist_out);
      return 0;
    }
  } catch (const UsageError& e) {
    return fail("usage", e.what(), 1);
  } catch (const opsel::DataError& e) {
    return fail("data", e.what(), 2);
  } catch (const opsel::MissingPartition& e) {
    return fail("data", e.what(), 2);
  } catch (const opsel::EnumerationTooLarge& e) {
    return fail("data", e.what(), 2);
  } catch (const Json::exception& e) {
    return fail("data", e.what(), 2);
  } catch (const std::invalid_argument& e) {
    return fail("usage", e.what(), 1);
  } catch (const std::out_of_range& e) {
    return fail("usage", e.what(), 1);
  } catch (const std::exception& e) {
    return fail("data", e.what(), 2);
  }
  return 1;
}
