#pragma once

// Benchmark harness: selector x metric sweeps over k, seeds and epsilon.
//
// Cells (question, rule, k, seed[, epsilon]) run in parallel and are merged
// in a fixed order, so outputs depend only on the config, never on thread
// count or timing. Wall times are kept in memory and written only when
// `record_timings` is set, to a separate file.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "opsel/data_io.hpp"
#include "opsel/metrics.hpp"
#include "opsel/model.hpp"

namespace opsel {

inline constexpr const char* kResultSchema = "opsel.results";
inline constexpr int kResultSchemaVersion = 1;

struct BenchConfig {
  std::vector<std::filesystem::path> instances;
  std::vector<SyntheticSpec> synthetic;
  std::vector<Rule> rules{std::begin(kAllRules), std::end(kAllRules)};
  std::size_t k_min = 1;
  std::size_t k_max = 20;
  std::size_t random_seeds = 100;  // seeds for the random rule
  std::size_t rule_seeds = 1;      // seeds for every other rule
  std::uint64_t base_seed = 0;     // seeds are base_seed, base_seed + 1, ...
  double epsilon = 0.8;            // diverse_bjr selection threshold
  double metric_epsilon = 0.8;     // redundancy threshold
  std::vector<double> epsilon_sweep{0.2, 0.4, 0.6, 0.8, 1.0};
  std::size_t trials = 5;
  std::size_t threads = 0;  // 0: hardware concurrency
  std::filesystem::path output_dir = "results";
  bool record_timings = false;

  // Everything that determines the results (not output_dir, threads or
  // record_timings).
  Json to_json() const;
};

struct ResultRow {
  std::string question_id;
  Rule rule = Rule::random;
  std::size_t k = 0;
  std::uint64_t seed = 0;
  std::optional<double> epsilon;  // selection epsilon, diverse_bjr only
  double metric_epsilon = 0.0;
  MetricsReport metrics;
  bool jr_satisfied = false;
  std::optional<bool> bjr_certificate_ok;  // bjr / diverse_bjr only
  std::optional<bool> bjr_balanced;
  std::vector<OpinionIndex> opinions;
  double wall_ms = 0.0;
};

struct SummaryRow {
  std::string question_id;
  Rule rule = Rule::random;
  std::size_t k = 0;
  std::optional<double> epsilon;
  std::size_t n_seeds = 0;
  std::string metric;
  double mean = 0.0;
};

struct BenchFailure {
  std::string question_id;
  std::string rule;  // empty for question-level failures
  std::string message;
};

struct BenchResult {
  std::string mode;  // "benchmark" or "sweep-epsilon"
  std::vector<ResultRow> rows;
  std::vector<SummaryRow> summary;
  std::vector<BenchFailure> failures;
  std::vector<std::string> warnings;
};

// Loads config.instances and generates config.synthetic; load failures are
// appended to `failures`.
std::vector<Instance> load_questions(const BenchConfig& config,
                                     std::vector<BenchFailure>& failures);

BenchResult run_benchmark(const BenchConfig& config);
BenchResult run_benchmark(const BenchConfig& config, const std::vector<Instance>& questions);

// diverse_bjr per epsilon in config.epsilon_sweep, with bjr and random as
// fixed comparators.
BenchResult run_epsilon_sweep(const BenchConfig& config);
BenchResult run_epsilon_sweep(const BenchConfig& config, const std::vector<Instance>& questions);

// results.csv, metrics_long.csv, summary.csv, results.json (and timings.csv
// when record_timings). Returns the written paths.
std::vector<std::filesystem::path> write_results(const BenchConfig& config,
                                                 const BenchResult& result);

// Shortest round-trip decimal form, identical on every platform.
std::string format_number(double value);

}  // namespace opsel
