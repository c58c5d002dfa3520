#pragma once

// Dataset ingestion, question classification, synthetic instances and the
// canonical JSON documents. The formats are described in docs/formats.md.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "opsel/metrics.hpp"
#include "opsel/model.hpp"
#include "opsel/verify.hpp"

namespace opsel {

using Json = nlohmann::ordered_json;

inline constexpr int kInstanceSchemaVersion = 1;

// Maps a dataset's column names onto the loader's logical columns. Loaded
// from a JSON object whose keys override the defaults.
struct ColumnMap {
  std::string question = "question_id";
  std::string user = "user_id";
  std::string opinion = "opinion_id";
  std::string value = "value";
  std::string text = "text";
  std::string leaning = "leaning";
  std::string group = "group_id";

  static ColumnMap from_json(const Json& doc);
  static ColumnMap load(const std::filesystem::path& path);
};

enum class MissingVotes { error, disapprove, approve };

struct LoadOptions {
  ColumnMap columns;
  double threshold = 0.5;  // probability >= threshold is an approval
  std::size_t k_default = 5;
  MissingVotes missing = MissingVotes::error;
};

struct ProbabilitySources {
  std::filesystem::path votes;
  std::optional<std::filesystem::path> opinions;  // question, opinion, text
  std::optional<std::filesystem::path> users;     // user, leaning (question optional)
};

// The five self-reported leanings, in partition order.
const std::vector<std::string>& leaning_labels();

// One instance per question, in first-appearance order. Empty and duplicate
// opinion texts are dropped (first occurrence kept) when texts are given.
std::vector<Instance> load_probability_votes(const ProbabilitySources& sources,
                                             const LoadOptions& options = {});

// Maps a 7-point Likert label to 0/1. Throws DataError on unknown labels.
int likert_to_binary(std::string_view label);

// One instance per discussion group with exactly five participants.
std::vector<Instance> load_likert_votes(const std::filesystem::path& votes,
                                        const LoadOptions& options = {});

enum class QuestionLabel { consensual, controversial, neither };
std::string_view to_string(QuestionLabel label);

struct QuestionSplit {
  QuestionLabel label = QuestionLabel::neither;
  double mean_unrepresented_at_5 = 0.0;
};

// Mean U_all of random 5-opinion selections over seeds 0..n_seeds-1;
// consensual when <= 5, controversial when >= 20.
QuestionSplit classify_question(const Instance& instance, std::size_t n_seeds = 100);

struct SyntheticSpec {
  std::size_t n = 60;
  std::size_t m = 30;
  std::size_t n_groups = 3;
  double cohesion = 0.9;
  double noise = 0.1;
  std::uint64_t seed = 0;
  std::size_t k = 0;  // 0: use n_groups (clipped to m)
  // Relative user-block sizes, one per group; empty means equal blocks.
  std::vector<double> group_weights;
};

// Planted blocks: users and opinions are split into n_groups contiguous
// blocks (user blocks sized by group_weights when given); a user approves an opinion of its own block with probability
// `cohesion` and any other with probability `noise`. The planted user blocks
// form the group partition.
Instance generate_synthetic(const SyntheticSpec& spec);

// Canonical JSON documents.
Json instance_to_json(const Instance& instance);
Instance instance_from_json(const Json& doc);
Instance load_instance(const std::filesystem::path& path);
void save_instance(const Instance& instance, const std::filesystem::path& path);

Json selection_to_json(const Selection& selection);
Selection selection_from_json(const Json& doc);
Json certificate_to_json(const AssignmentCertificate& certificate);
Json metrics_to_json(const MetricsReport& report);
Json jr_report_to_json(const JrReport& report);
Json bjr_report_to_json(const BjrReport& report);

}  // namespace opsel
