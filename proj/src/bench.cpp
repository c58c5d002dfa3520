#include "opsel/bench.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <fstream>
#include <set>
#include <thread>

#include "csv.hpp"
#include "opsel/selectors.hpp"
#include "opsel/verify.hpp"

namespace opsel {
namespace {

struct PreparedQuestion {
  const Instance* instance;
  DistanceIndex selection_index;
  DistanceIndex metric_index;
  std::vector<DistanceIndex> sweep_indexes;  // aligned with epsilon_sweep
  std::size_t k_hi = 0;                      // clipped k_max
};

struct Cell {
  std::size_t question;
  Rule rule;
  std::size_t k;
  std::uint64_t seed;
  std::optional<std::size_t> sweep;  // position in epsilon_sweep
};

Json spec_to_json(const SyntheticSpec& s) {
  return {{"n", s.n},         {"m", s.m},         {"n_groups", s.n_groups},
          {"cohesion", s.cohesion}, {"noise", s.noise}, {"seed", s.seed},
          {"k", s.k}, {"group_weights", s.group_weights}};
}

std::size_t thread_count(const BenchConfig& config, std::size_t cells) {
  std::size_t t = config.threads;
  if (t == 0) t = std::max(1u, std::thread::hardware_concurrency());
  return std::max<std::size_t>(1, std::min(t, cells));
}

void check_bench_config(const BenchConfig& config) {
  if (config.k_min < 1 || config.k_min > config.k_max) {
    throw std::invalid_argument("k range must satisfy 1 <= k_min <= k_max");
  }
  if (config.random_seeds < 1 || config.rule_seeds < 1) {
    throw std::invalid_argument("seed counts must be at least 1");
  }
  for (double e : {config.epsilon, config.metric_epsilon}) {
    if (!(e >= 0.0 && e <= 1.0)) throw std::invalid_argument("epsilon must lie in [0, 1]");
  }
  for (double e : config.epsilon_sweep) {
    if (!(e >= 0.0 && e <= 1.0)) throw std::invalid_argument("sweep epsilon must lie in [0, 1]");
  }
  if (config.trials < 1) throw std::invalid_argument("trials must be at least 1");
}

std::vector<PreparedQuestion> prepare(const BenchConfig& config,
                                      const std::vector<Instance>& questions,
                                      bool with_sweep, BenchResult& result) {
  std::vector<PreparedQuestion> prepared;
  prepared.reserve(questions.size());
  for (const auto& q : questions) {
    DistanceIndex selection_index(q.matrix, config.epsilon);
    auto metric_index = selection_index.with_epsilon(config.metric_epsilon);
    std::vector<DistanceIndex> sweep;
    if (with_sweep) {
      for (double e : config.epsilon_sweep) sweep.push_back(selection_index.with_epsilon(e));
    }
    const std::size_t k_hi = std::min(config.k_max, q.n_opinions());
    if (k_hi < config.k_max) {
      result.warnings.push_back("question " + q.question_id + ": k range clipped to " +
                                std::to_string(k_hi) + " opinions");
    }
    prepared.push_back({&q, std::move(selection_index), std::move(metric_index),
                        std::move(sweep), k_hi});
  }
  return prepared;
}

std::vector<std::uint64_t> seeds_for(const BenchConfig& config, Rule rule) {
  const std::size_t count = rule == Rule::random ? config.random_seeds : config.rule_seeds;
  std::vector<std::uint64_t> seeds(count);
  for (std::size_t s = 0; s < count; ++s) seeds[s] = config.base_seed + s;
  return seeds;
}

ResultRow run_cell(const BenchConfig& config, const PreparedQuestion& pq, const Cell& cell) {
  const Instance& instance = *pq.instance;
  SelectorConfig sc;
  sc.rule = cell.rule;
  sc.k = cell.k;
  sc.seed = cell.seed;
  sc.trials = config.trials;
  const DistanceIndex* index = &pq.selection_index;
  if (cell.sweep) index = &pq.sweep_indexes[*cell.sweep];
  sc.epsilon = index->epsilon();

  const auto start = std::chrono::steady_clock::now();
  auto selected = select(instance, sc, index);
  const auto stop = std::chrono::steady_clock::now();

  ResultRow row;
  row.question_id = instance.question_id;
  row.rule = cell.rule;
  row.k = cell.k;
  row.seed = cell.seed;
  if (cell.rule == Rule::diverse_bjr) row.epsilon = sc.epsilon;
  row.metric_epsilon = config.metric_epsilon;
  row.metrics = compute_metrics(instance, selected.selection.opinions, pq.metric_index);
  row.jr_satisfied = check_jr(instance.matrix, selected.selection.opinions).satisfied;
  if (selected.certificate) {
    const auto report =
        check_bjr_certificate(instance.matrix, selected.selection.opinions, *selected.certificate);
    row.bjr_certificate_ok = report.ok();
    row.bjr_balanced = report.balanced();
  }
  row.opinions = std::move(selected.selection.opinions);
  row.wall_ms = std::chrono::duration<double, std::milli>(stop - start).count();
  return row;
}

void summarize(BenchResult& result) {
  std::size_t begin = 0;
  const auto& rows = result.rows;
  while (begin < rows.size()) {
    std::size_t end = begin + 1;
    auto same = [&](const ResultRow& a, const ResultRow& b) {
      return a.question_id == b.question_id && a.rule == b.rule && a.k == b.k &&
             a.epsilon == b.epsilon;
    };
    while (end < rows.size() && same(rows[begin], rows[end])) ++end;

    auto emit = [&](const std::string& metric, auto getter) {
      double total = 0.0;
      std::size_t count = 0;
      for (std::size_t r = begin; r < end; ++r) {
        if (auto v = getter(rows[r])) {
          total += *v;
          ++count;
        }
      }
      if (count == 0) return;
      result.summary.push_back({rows[begin].question_id, rows[begin].rule, rows[begin].k,
                                rows[begin].epsilon, count, metric,
                                total / static_cast<double>(count)});
    };
    using Opt = std::optional<double>;
    emit("u_all", [](const ResultRow& r) -> Opt { return r.metrics.u_all; });
    emit("median_u", [](const ResultRow& r) -> Opt { return r.metrics.median_u; });
    emit("consensus", [](const ResultRow& r) -> Opt { return r.metrics.consensus; });
    emit("coverage_gap", [](const ResultRow& r) -> Opt { return r.metrics.coverage_gap; });
    emit("redundancy", [](const ResultRow& r) -> Opt { return r.metrics.redundancy; });
    emit("jr_satisfied", [](const ResultRow& r) -> Opt { return r.jr_satisfied ? 1.0 : 0.0; });
    emit("bjr_certificate_ok", [](const ResultRow& r) -> Opt {
      if (!r.bjr_certificate_ok) return std::nullopt;
      return *r.bjr_certificate_ok ? 1.0 : 0.0;
    });
    begin = end;
  }
}

BenchResult run_cells(const BenchConfig& config, const std::vector<PreparedQuestion>& prepared,
                      std::vector<Cell> cells, BenchResult result) {
  std::vector<std::optional<ResultRow>> rows(cells.size());
  std::vector<std::string> errors(cells.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t c = next++; c < cells.size(); c = next++) {
      try {
        rows[c] = run_cell(config, prepared[cells[c].question], cells[c]);
      } catch (const std::exception& e) {
        errors[c] = e.what();
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    const std::size_t n_threads = thread_count(config, cells.size());
    for (std::size_t t = 1; t < n_threads; ++t) pool.emplace_back(worker);
    worker();
  }

  std::set<std::tuple<std::string, std::string, std::string>> reported;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    if (rows[c]) {
      result.rows.push_back(std::move(*rows[c]));
      continue;
    }
    const auto& qid = prepared[cells[c].question].instance->question_id;
    const std::string rule(to_string(cells[c].rule));
    if (reported.emplace(qid, rule, errors[c]).second) {
      result.failures.push_back({qid, rule, errors[c]});
    }
  }
  summarize(result);
  return result;
}

}  // namespace

Json BenchConfig::to_json() const {
  Json doc;
  Json paths = Json::array();
  for (const auto& p : instances) paths.push_back(p.generic_string());
  doc["instances"] = std::move(paths);
  Json specs = Json::array();
  for (const auto& s : synthetic) specs.push_back(spec_to_json(s));
  doc["synthetic"] = std::move(specs);
  Json rule_names = Json::array();
  for (Rule r : rules) rule_names.push_back(std::string(to_string(r)));
  doc["rules"] = std::move(rule_names);
  doc["k_min"] = k_min;
  doc["k_max"] = k_max;
  doc["random_seeds"] = random_seeds;
  doc["rule_seeds"] = rule_seeds;
  doc["base_seed"] = base_seed;
  doc["epsilon"] = epsilon;
  doc["metric_epsilon"] = metric_epsilon;
  doc["epsilon_sweep"] = epsilon_sweep;
  doc["trials"] = trials;
  return doc;
}

std::vector<Instance> load_questions(const BenchConfig& config,
                                     std::vector<BenchFailure>& failures) {
  std::vector<Instance> out;
  for (const auto& path : config.instances) {
    try {
      auto instance = load_instance(path);
      require_valid(instance);
      out.push_back(std::move(instance));
    } catch (const std::exception& e) {
      failures.push_back({path.generic_string(), "", e.what()});
    }
  }
  for (const auto& spec : config.synthetic) {
    try {
      out.push_back(generate_synthetic(spec));
    } catch (const std::exception& e) {
      failures.push_back({"synthetic", "", e.what()});
    }
  }
  return out;
}

BenchResult run_benchmark(const BenchConfig& config) {
  BenchResult seed_result;
  auto questions = load_questions(config, seed_result.failures);
  auto result = run_benchmark(config, questions);
  result.failures.insert(result.failures.begin(), seed_result.failures.begin(),
                         seed_result.failures.end());
  return result;
}

BenchResult run_benchmark(const BenchConfig& config, const std::vector<Instance>& questions) {
  check_bench_config(config);
  BenchResult result;
  result.mode = "benchmark";
  const auto prepared = prepare(config, questions, false, result);
  std::vector<Cell> cells;
  for (std::size_t q = 0; q < prepared.size(); ++q) {
    for (Rule rule : config.rules) {
      if (rule == Rule::bridging && !prepared[q].instance->groups) {
        result.failures.push_back({prepared[q].instance->question_id, "bridging",
                                   "bridging needs a group partition"});
        continue;
      }
      const auto seeds = seeds_for(config, rule);
      for (std::size_t k = config.k_min; k <= prepared[q].k_hi; ++k) {
        for (auto seed : seeds) cells.push_back({q, rule, k, seed, std::nullopt});
      }
    }
  }
  return run_cells(config, prepared, std::move(cells), std::move(result));
}

BenchResult run_epsilon_sweep(const BenchConfig& config) {
  BenchResult seed_result;
  auto questions = load_questions(config, seed_result.failures);
  auto result = run_epsilon_sweep(config, questions);
  result.failures.insert(result.failures.begin(), seed_result.failures.begin(),
                         seed_result.failures.end());
  return result;
}

BenchResult run_epsilon_sweep(const BenchConfig& config, const std::vector<Instance>& questions) {
  check_bench_config(config);
  if (config.epsilon_sweep.empty()) throw std::invalid_argument("epsilon sweep list is empty");
  BenchResult result;
  result.mode = "sweep-epsilon";
  const auto prepared = prepare(config, questions, true, result);
  std::vector<Cell> cells;
  for (std::size_t q = 0; q < prepared.size(); ++q) {
    for (Rule rule : {Rule::random, Rule::bjr}) {
      const auto seeds = seeds_for(config, rule);
      for (std::size_t k = config.k_min; k <= prepared[q].k_hi; ++k) {
        for (auto seed : seeds) cells.push_back({q, rule, k, seed, std::nullopt});
      }
    }
    const auto seeds = seeds_for(config, Rule::diverse_bjr);
    for (std::size_t e = 0; e < config.epsilon_sweep.size(); ++e) {
      for (std::size_t k = config.k_min; k <= prepared[q].k_hi; ++k) {
        for (auto seed : seeds) cells.push_back({q, Rule::diverse_bjr, k, seed, e});
      }
    }
  }
  return run_cells(config, prepared, std::move(cells), std::move(result));
}

std::string format_number(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) return "nan";
  return std::string(buf, ptr);
}

namespace {

std::string opt_number(const std::optional<double>& v) { return v ? format_number(*v) : ""; }
std::string opt_flag(const std::optional<bool>& v) {
  if (!v) return "";
  return *v ? "true" : "false";
}
Json opt_json(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }
Json opt_json(const std::optional<bool>& v) { return v ? Json(*v) : Json(nullptr); }

std::string join_indices(const std::vector<OpinionIndex>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ' ';
    out += std::to_string(v[i]);
  }
  return out;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

void write_preamble(std::ostream& out, const BenchConfig& config, const BenchResult& result) {
  out << "# schema=" << kResultSchema << " schema_version=" << kResultSchemaVersion
      << " mode=" << result.mode << " config=" << config.to_json().dump() << '\n';
}

}  // namespace

std::vector<std::filesystem::path> write_results(const BenchConfig& config,
                                                 const BenchResult& result) {
  const auto& dir = config.output_dir;
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;

  {
    const auto path = dir / "results.csv";
    auto out = open_output(path);
    write_preamble(out, config, result);
    out << "question_id,rule,k,seed,epsilon,metric_epsilon,u_all,median_u,consensus,"
           "coverage_gap,redundancy,jr_satisfied,bjr_certificate_ok,bjr_balanced,opinions\n";
    for (const auto& r : result.rows) {
      out << csv::escape(r.question_id) << ',' << to_string(r.rule) << ',' << r.k << ','
          << r.seed << ',' << opt_number(r.epsilon) << ',' << format_number(r.metric_epsilon)
          << ',' << format_number(r.metrics.u_all) << ',' << opt_number(r.metrics.median_u)
          << ',' << opt_number(r.metrics.consensus) << ','
          << format_number(r.metrics.coverage_gap) << ','
          << format_number(r.metrics.redundancy) << ',' << (r.jr_satisfied ? "true" : "false")
          << ',' << opt_flag(r.bjr_certificate_ok) << ',' << opt_flag(r.bjr_balanced) << ','
          << join_indices(r.opinions) << '\n';
    }
    written.push_back(path);
  }

  {
    const auto path = dir / "metrics_long.csv";
    auto out = open_output(path);
    write_preamble(out, config, result);
    out << "question_id,rule,k,seed,epsilon,metric,value\n";
    for (const auto& r : result.rows) {
      const std::string prefix = csv::escape(r.question_id) + ',' +
                                 std::string(to_string(r.rule)) + ',' + std::to_string(r.k) +
                                 ',' + std::to_string(r.seed) + ',' + opt_number(r.epsilon) +
                                 ',';
      auto line = [&](const char* metric, const std::optional<double>& v) {
        if (v) out << prefix << metric << ',' << format_number(*v) << '\n';
      };
      line("u_all", r.metrics.u_all);
      line("median_u", r.metrics.median_u);
      line("consensus", r.metrics.consensus);
      line("coverage_gap", r.metrics.coverage_gap);
      line("redundancy", r.metrics.redundancy);
    }
    written.push_back(path);
  }

  {
    const auto path = dir / "summary.csv";
    auto out = open_output(path);
    write_preamble(out, config, result);
    out << "question_id,rule,k,epsilon,n_seeds,metric,mean\n";
    for (const auto& s : result.summary) {
      out << csv::escape(s.question_id) << ',' << to_string(s.rule) << ',' << s.k << ','
          << opt_number(s.epsilon) << ',' << s.n_seeds << ',' << s.metric << ','
          << format_number(s.mean) << '\n';
    }
    written.push_back(path);
  }

  {
    const auto path = dir / "results.json";
    Json doc;
    doc["schema"] = kResultSchema;
    doc["schema_version"] = kResultSchemaVersion;
    doc["mode"] = result.mode;
    doc["config"] = config.to_json();
    Json rows = Json::array();
    for (const auto& r : result.rows) {
      Json row;
      row["question_id"] = r.question_id;
      row["rule"] = std::string(to_string(r.rule));
      row["k"] = r.k;
      row["seed"] = r.seed;
      row["epsilon"] = opt_json(r.epsilon);
      row["metric_epsilon"] = r.metric_epsilon;
      row["metrics"] = metrics_to_json(r.metrics);
      row["jr_satisfied"] = r.jr_satisfied;
      row["bjr_certificate_ok"] = opt_json(r.bjr_certificate_ok);
      row["bjr_balanced"] = opt_json(r.bjr_balanced);
      row["opinions"] = r.opinions;
      rows.push_back(std::move(row));
    }
    doc["rows"] = std::move(rows);
    Json summary = Json::array();
    for (const auto& s : result.summary) {
      summary.push_back({{"question_id", s.question_id},
                         {"rule", std::string(to_string(s.rule))},
                         {"k", s.k},
                         {"epsilon", opt_json(s.epsilon)},
                         {"n_seeds", s.n_seeds},
                         {"metric", s.metric},
                         {"mean", s.mean}});
    }
    doc["summary"] = std::move(summary);
    Json failures = Json::array();
    for (const auto& f : result.failures) {
      failures.push_back({{"question_id", f.question_id}, {"rule", f.rule}, {"message", f.message}});
    }
    doc["failures"] = std::move(failures);
    doc["warnings"] = result.warnings;
    auto out = open_output(path);
    out << doc.dump(2) << '\n';
    written.push_back(path);
  }

  if (config.record_timings) {
    const auto path = dir / "timings.csv";
    auto out = open_output(path);
    write_preamble(out, config, result);
    out << "question_id,rule,k,seed,epsilon,wall_ms\n";
    for (const auto& r : result.rows) {
      out << csv::escape(r.question_id) << ',' << to_string(r.rule) << ',' << r.k << ','
          << r.seed << ',' << opt_number(r.epsilon) << ',' << format_number(r.wall_ms) << '\n';
    }
    written.push_back(path);
  }
  return written;
}

}  // namespace opsel
