#include "opsel/data_io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "csv.hpp"
#include "opsel/rng.hpp"
#include "opsel/selectors.hpp"

namespace opsel {
namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

double parse_probability(const std::string& raw, const std::string& where) {
  const std::string text = trim(raw);
  double value = 0.0;
  const auto* begin = text.data();
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (text.empty() || ec != std::errc() || ptr != end) {
    throw DataError(where + ": malformed probability '" + raw + "'");
  }
  if (!(value >= 0.0 && value <= 1.0)) {
    throw DataError(where + ": probability " + text + " outside [0, 1]");
  }
  return value;
}

// Insertion-ordered string -> dense index.
class Interner {
 public:
  std::size_t intern(const std::string& key) {
    auto [it, inserted] = index_.emplace(key, keys_.size());
    if (inserted) keys_.push_back(key);
    return it->second;
  }
  std::optional<std::size_t> find(const std::string& key) const {
    auto it = index_.find(key);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }
  const std::vector<std::string>& keys() const { return keys_; }
  std::size_t size() const { return keys_.size(); }

 private:
  std::map<std::string, std::size_t> index_;
  std::vector<std::string> keys_;
};

// Long-form votes of one question or discussion group.
struct VoteBlock {
  Interner users;
  Interner opinions;
  std::map<std::pair<std::size_t, std::size_t>, int> cells;
};

void add_vote(VoteBlock& block, const std::string& user, const std::string& opinion, int value,
              const std::string& where) {
  const auto u = block.users.intern(user);
  const auto i = block.opinions.intern(opinion);
  if (!block.cells.emplace(std::make_pair(u, i), value).second) {
    throw DataError(where + ": duplicate vote for user '" + user + "' on opinion '" + opinion +
                    "'");
  }
}

// Dense matrix over the kept opinions (in the given order).
ApprovalMatrix densify(const VoteBlock& block, const std::vector<std::size_t>& kept,
                       MissingVotes missing, const std::string& label) {
  const std::size_t n = block.users.size();
  const std::size_t m = kept.size();
  if (n == 0 || m == 0) throw DataError(label + ": no votes left after preprocessing");
  std::vector<std::uint8_t> cells(n * m, 0);
  std::size_t absent = 0;
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t c = 0; c < m; ++c) {
      auto it = block.cells.find({u, kept[c]});
      if (it != block.cells.end()) {
        cells[u * m + c] = static_cast<std::uint8_t>(it->second);
        continue;
      }
      ++absent;
      cells[u * m + c] = missing == MissingVotes::approve ? 1 : 0;
    }
  }
  if (absent > 0 && missing == MissingVotes::error) {
    throw DataError(label + ": " + std::to_string(absent) +
                    " (user, opinion) pairs have no vote; the matrix must be dense");
  }
  return ApprovalMatrix(n, m, std::move(cells));
}

std::vector<std::string> pick(const std::vector<std::string>& keys,
                              const std::vector<std::size_t>& positions) {
  std::vector<std::string> out;
  out.reserve(positions.size());
  for (auto p : positions) out.push_back(keys[p]);
  return out;
}

std::string file_label(const std::filesystem::path& p) { return p.filename().string(); }

}  // namespace

ColumnMap ColumnMap::from_json(const Json& doc) {
  ColumnMap map;
  if (!doc.is_object()) throw DataError("column map must be a JSON object");
  for (const auto& [key, value] : doc.items()) {
    if (!value.is_string()) throw DataError("column map value for '" + key + "' must be a string");
    const auto name = value.get<std::string>();
    if (key == "question") map.question = name;
    else if (key == "user") map.user = name;
    else if (key == "opinion") map.opinion = name;
    else if (key == "value") map.value = name;
    else if (key == "text") map.text = name;
    else if (key == "leaning") map.leaning = name;
    else if (key == "group") map.group = name;
    else throw DataError("unknown column map key '" + key + "'");
  }
  return map;
}

ColumnMap ColumnMap::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  try {
    return from_json(Json::parse(in));
  } catch (const Json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

const std::vector<std::string>& leaning_labels() {
  static const std::vector<std::string> labels = {
      "Moderate", "Slightly conservative", "Very conservative", "Slightly liberal",
      "Very liberal"};
  return labels;
}

std::vector<Instance> load_probability_votes(const ProbabilitySources& sources,
                                             const LoadOptions& options) {
  if (!(options.threshold > 0.0 && options.threshold < 1.0)) {
    throw std::invalid_argument("threshold must lie in (0, 1)");
  }
  const auto& cols = options.columns;
  const auto votes = csv::read(sources.votes);
  const std::string vname = file_label(sources.votes);
  const auto q_col = votes.require(cols.question, vname);
  const auto u_col = votes.require(cols.user, vname);
  const auto o_col = votes.require(cols.opinion, vname);
  const auto v_col = votes.require(cols.value, vname);

  Interner questions;
  std::vector<VoteBlock> blocks;
  for (std::size_t r = 0; r < votes.rows.size(); ++r) {
    const auto& row = votes.rows[r];
    const std::string where = vname + " row " + std::to_string(r + 2);
    if (row.size() != votes.header.size()) throw DataError(where + ": wrong field count");
    const auto q = questions.intern(trim(row[q_col]));
    if (q == blocks.size()) blocks.emplace_back();
    const double p = parse_probability(row[v_col], where);
    add_vote(blocks[q], trim(row[u_col]), trim(row[o_col]), p >= options.threshold ? 1 : 0,
             where);
  }

  // Texts keyed by (question, opinion); the question part is empty when the
  // sidecar has no question column.
  std::map<std::pair<std::string, std::string>, std::string> texts;
  bool texts_by_question = false;
  if (sources.opinions) {
    const auto table = csv::read(*sources.opinions);
    const std::string name = file_label(*sources.opinions);
    const auto tq = table.find(cols.question);
    const auto to = table.require(cols.opinion, name);
    const auto tt = table.require(cols.text, name);
    texts_by_question = tq.has_value();
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
      const auto& row = table.rows[r];
      if (row.size() != table.header.size()) {
        throw DataError(name + " row " + std::to_string(r + 2) + ": wrong field count");
      }
      texts[{tq ? trim(row[*tq]) : std::string(), trim(row[to])}] = row[tt];
    }
  }

  std::map<std::pair<std::string, std::string>, std::string> leanings;
  bool leanings_by_question = false;
  if (sources.users) {
    const auto table = csv::read(*sources.users);
    const std::string name = file_label(*sources.users);
    const auto tq = table.find(cols.question);
    const auto tu = table.require(cols.user, name);
    const auto tl = table.require(cols.leaning, name);
    leanings_by_question = tq.has_value();
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
      const auto& row = table.rows[r];
      if (row.size() != table.header.size()) {
        throw DataError(name + " row " + std::to_string(r + 2) + ": wrong field count");
      }
      leanings[{tq ? trim(row[*tq]) : std::string(), trim(row[tu])}] = trim(row[tl]);
    }
  }

  std::vector<Instance> out;
  for (std::size_t q = 0; q < blocks.size(); ++q) {
    const std::string& qid = questions.keys()[q];
    const auto& block = blocks[q];

    std::vector<std::size_t> kept;
    std::vector<std::string> kept_texts;
    std::set<std::string> seen_texts;
    for (std::size_t i = 0; i < block.opinions.size(); ++i) {
      if (!sources.opinions) {
        kept.push_back(i);
        continue;
      }
      auto it = texts.find({texts_by_question ? qid : std::string(), block.opinions.keys()[i]});
      const std::string text = it == texts.end() ? std::string() : it->second;
      const std::string key = trim(text);
      if (key.empty() || !seen_texts.insert(key).second) continue;
      kept.push_back(i);
      kept_texts.push_back(text);
    }

    Instance instance{densify(block, kept, options.missing, vname + " question " + qid),
                      0,
                      std::nullopt,
                      qid,
                      std::nullopt,
                      block.users.keys(),
                      pick(block.opinions.keys(), kept)};
    instance.k = std::min(options.k_default, instance.n_opinions());
    if (sources.opinions) instance.opinion_texts = std::move(kept_texts);

    if (sources.users) {
      std::vector<std::string> labels;
      for (const auto& uid : block.users.keys()) {
        auto it = leanings.find({leanings_by_question ? qid : std::string(), uid});
        if (it == leanings.end()) {
          throw DataError("question " + qid + ": no leaning for user '" + uid + "'");
        }
        const auto& canon = leaning_labels();
        auto match = std::find_if(canon.begin(), canon.end(), [&](const std::string& c) {
          return lower(c) == lower(it->second);
        });
        if (match == canon.end()) {
          throw DataError("question " + qid + ": unknown leaning label '" + it->second + "'");
        }
        labels.push_back(*match);
      }
      instance.groups = GroupPartition::from_labels(labels, leaning_labels());
    }
    require_valid(instance);
    out.push_back(std::move(instance));
  }
  return out;
}

int likert_to_binary(std::string_view label) {
  static const std::map<std::string, int, std::less<>> scale = {
      {"STRONGLY_DISAGREE", 0}, {"DISAGREE", 0},       {"SOMEWHAT_DISAGREE", 0},
      {"NEUTRAL", 0},           {"SOMEWHAT_AGREE", 1}, {"AGREE", 1},
      {"STRONGLY_AGREE", 1}};
  std::string key = trim(label);
  std::transform(key.begin(), key.end(), key.begin(), [](unsigned char c) {
    return c == ' ' ? '_' : static_cast<char>(std::toupper(c));
  });
  auto it = scale.find(key);
  if (it == scale.end()) throw DataError("unknown Likert label '" + std::string(label) + "'");
  return it->second;
}

std::vector<Instance> load_likert_votes(const std::filesystem::path& votes_path,
                                        const LoadOptions& options) {
  constexpr std::size_t kGroupSize = 5;
  const auto& cols = options.columns;
  const auto votes = csv::read(votes_path);
  const std::string vname = file_label(votes_path);
  const auto g_col = votes.require(cols.group, vname);
  const auto u_col = votes.require(cols.user, vname);
  const auto o_col = votes.require(cols.opinion, vname);
  const auto v_col = votes.require(cols.value, vname);

  Interner groups;
  std::vector<VoteBlock> blocks;
  for (std::size_t r = 0; r < votes.rows.size(); ++r) {
    const auto& row = votes.rows[r];
    const std::string where = vname + " row " + std::to_string(r + 2);
    if (row.size() != votes.header.size()) throw DataError(where + ": wrong field count");
    const auto g = groups.intern(trim(row[g_col]));
    if (g == blocks.size()) blocks.emplace_back();
    int value = 0;
    try {
      value = likert_to_binary(row[v_col]);
    } catch (const DataError& e) {
      throw DataError(where + ": " + e.what());
    }
    add_vote(blocks[g], trim(row[u_col]), trim(row[o_col]), value, where);
  }

  std::vector<Instance> out;
  for (std::size_t g = 0; g < blocks.size(); ++g) {
    const auto& block = blocks[g];
    if (block.users.size() != kGroupSize) continue;
    const std::string& gid = groups.keys()[g];
    std::vector<std::size_t> all(block.opinions.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    Instance instance{densify(block, all, options.missing, vname + " group " + gid),
                      0,
                      std::nullopt,
                      gid,
                      std::nullopt,
                      block.users.keys(),
                      block.opinions.keys()};
    instance.k = std::min(options.k_default, instance.n_opinions());
    if (instance.n_users() != kGroupSize) {
      throw DataError("group " + gid + " retained with " + std::to_string(instance.n_users()) +
                      " members");
    }
    require_valid(instance);
    out.push_back(std::move(instance));
  }
  return out;
}

std::string_view to_string(QuestionLabel label) {
  switch (label) {
    case QuestionLabel::consensual: return "consensual";
    case QuestionLabel::controversial: return "controversial";
    case QuestionLabel::neither: return "neither";
  }
  return "unknown";
}

QuestionSplit classify_question(const Instance& instance, std::size_t n_seeds) {
  constexpr std::size_t kProbeSize = 5;
  if (instance.n_opinions() < kProbeSize) {
    throw std::invalid_argument("classification needs at least 5 opinions");
  }
  if (n_seeds == 0) throw std::invalid_argument("classification needs at least one seed");
  SelectorConfig config;
  config.rule = Rule::random;
  config.k = kProbeSize;
  double total = 0.0;
  for (std::uint64_t seed = 0; seed < n_seeds; ++seed) {
    config.seed = seed;
    total += unrepresented_overall(instance.matrix, select_random(instance, config).opinions);
  }
  QuestionSplit split;
  split.mean_unrepresented_at_5 = total / static_cast<double>(n_seeds);
  if (split.mean_unrepresented_at_5 <= 5.0) {
    split.label = QuestionLabel::consensual;
  } else if (split.mean_unrepresented_at_5 >= 20.0) {
    split.label = QuestionLabel::controversial;
  }
  return split;
}

Instance generate_synthetic(const SyntheticSpec& spec) {
  if (spec.n == 0 || spec.m == 0 || spec.n_groups == 0) {
    throw std::invalid_argument("synthetic sizes must be positive");
  }
  if (spec.n_groups > std::min(spec.n, spec.m)) {
    throw std::invalid_argument("n_groups exceeds min(n, m)");
  }
  if (!(spec.cohesion >= 0.0 && spec.cohesion <= 1.0) || !(spec.noise >= 0.0 && spec.noise <= 1.0)) {
    throw std::invalid_argument("cohesion and noise must lie in [0, 1]");
  }
  auto block_of = [&](std::size_t index, std::size_t total) {
    return index * spec.n_groups / total;
  };
  // user_block[u]: planted group of user u.
  std::vector<std::size_t> user_block(spec.n);
  if (spec.group_weights.empty()) {
    for (UserIndex u = 0; u < spec.n; ++u) user_block[u] = block_of(u, spec.n);
  } else {
    if (spec.group_weights.size() != spec.n_groups) {
      throw std::invalid_argument("group_weights needs one weight per group");
    }
    double total = 0.0;
    for (double w : spec.group_weights) {
      if (!(w > 0.0)) throw std::invalid_argument("group weights must be positive");
      total += w;
    }
    double cumulative = 0.0;
    std::size_t begin = 0;
    for (std::size_t g = 0; g < spec.n_groups; ++g) {
      cumulative += spec.group_weights[g];
      const auto end = g + 1 == spec.n_groups
                           ? spec.n
                           : static_cast<std::size_t>(static_cast<double>(spec.n) * cumulative / total);
      if (end <= begin) throw std::invalid_argument("group weights leave a planted group empty");
      for (UserIndex u = begin; u < end; ++u) user_block[u] = g;
      begin = end;
    }
  }
  Rng rng(spec.seed);
  std::vector<std::uint8_t> cells(spec.n * spec.m);
  std::vector<std::string> labels(spec.n);
  for (UserIndex u = 0; u < spec.n; ++u) {
    const std::size_t gu = user_block[u];
    labels[u] = "g" + std::to_string(gu);
    for (OpinionIndex i = 0; i < spec.m; ++i) {
      const double p = block_of(i, spec.m) == gu ? spec.cohesion : spec.noise;
      cells[u * spec.m + i] = rng.uniform() < p ? 1 : 0;
    }
  }
  std::ostringstream id;
  id << "synthetic-n" << spec.n << "-m" << spec.m << "-g" << spec.n_groups;
  if (!spec.group_weights.empty()) {
    id << "-w";
    for (std::size_t g = 0; g < spec.group_weights.size(); ++g) {
      id << (g ? ":" : "") << spec.group_weights[g];
    }
  }
  id << "-s" << spec.seed;
  Instance instance{ApprovalMatrix(spec.n, spec.m, std::move(cells)),
                    std::min(spec.k == 0 ? spec.n_groups : spec.k, spec.m),
                    GroupPartition::from_labels(labels),
                    id.str(),
                    std::nullopt,
                    {},
                    {}};
  return instance;
}

Json instance_to_json(const Instance& instance) {
  Json doc;
  doc["schema"] = "opsel.instance";
  doc["schema_version"] = kInstanceSchemaVersion;
  doc["question_id"] = instance.question_id;
  doc["n"] = instance.n_users();
  doc["m"] = instance.n_opinions();
  doc["k_default"] = instance.k;
  Json rows = Json::array();
  for (UserIndex u = 0; u < instance.n_users(); ++u) {
    std::string bits;
    for (auto c : instance.matrix.row(u)) bits += static_cast<char>('0' + c);
    rows.push_back(std::move(bits));
  }
  doc["cells"] = std::move(rows);
  if (instance.groups) {
    Json groups = Json::array();
    for (std::size_t g = 0; g < instance.groups->size(); ++g) {
      groups.push_back({{"name", instance.groups->names.at(g)},
                        {"members", instance.groups->members[g]}});
    }
    doc["groups"] = std::move(groups);
  } else {
    doc["groups"] = nullptr;
  }
  doc["opinion_texts"] = instance.opinion_texts ? Json(*instance.opinion_texts) : Json(nullptr);
  if (!instance.user_ids.empty()) doc["user_ids"] = instance.user_ids;
  if (!instance.opinion_ids.empty()) doc["opinion_ids"] = instance.opinion_ids;
  return doc;
}

Instance instance_from_json(const Json& doc) {
  try {
    if (doc.value("schema", std::string("opsel.instance")) != "opsel.instance") {
      throw DataError("not an opsel.instance document");
    }
    if (doc.value("schema_version", kInstanceSchemaVersion) != kInstanceSchemaVersion) {
      throw DataError("unsupported instance schema_version");
    }
    const auto n = doc.at("n").get<std::size_t>();
    const auto m = doc.at("m").get<std::size_t>();
    if (n == 0 || m == 0) throw DataError("instance must have n >= 1 and m >= 1");
    std::vector<std::uint8_t> cells(n * m, 0);
    if (doc.contains("cells")) {
      const auto& rows = doc.at("cells");
      if (rows.size() != n) throw DataError("cells must have n rows");
      for (UserIndex u = 0; u < n; ++u) {
        const auto& row = rows[u];
        if (row.is_string()) {
          const auto bits = row.get<std::string>();
          if (bits.size() != m) throw DataError("cells row " + std::to_string(u) + " has wrong length");
          for (OpinionIndex i = 0; i < m; ++i) {
            if (!std::isdigit(static_cast<unsigned char>(bits[i]))) {
              throw DataError("cells row " + std::to_string(u) + " contains a non-digit");
            }
            cells[u * m + i] = static_cast<std::uint8_t>(bits[i] - '0');
          }
        } else {
          if (row.size() != m) throw DataError("cells row " + std::to_string(u) + " has wrong length");
          for (OpinionIndex i = 0; i < m; ++i) {
            cells[u * m + i] = static_cast<std::uint8_t>(row[i].get<int>());
          }
        }
      }
    } else if (doc.contains("approvers")) {
      const auto& cols = doc.at("approvers");
      if (cols.size() != m) throw DataError("approvers must have m lists");
      for (OpinionIndex i = 0; i < m; ++i) {
        for (const auto& u : cols[i]) {
          const auto user = u.get<std::size_t>();
          if (user >= n) throw DataError("approver index out of range");
          cells[user * m + i] = 1;
        }
      }
    } else {
      throw DataError("instance needs either 'cells' or 'approvers'");
    }

    Instance instance{ApprovalMatrix(n, m, std::move(cells)),
                      doc.value("k_default", std::min<std::size_t>(5, m)),
                      std::nullopt,
                      doc.value("question_id", std::string()),
                      std::nullopt,
                      {},
                      {}};
    if (doc.contains("groups") && !doc["groups"].is_null()) {
      GroupPartition groups;
      for (const auto& g : doc["groups"]) {
        groups.names.push_back(g.value("name", "g" + std::to_string(groups.names.size())));
        groups.members.push_back(g.at("members").get<std::vector<UserIndex>>());
      }
      instance.groups = std::move(groups);
    }
    if (doc.contains("opinion_texts") && !doc["opinion_texts"].is_null()) {
      instance.opinion_texts = doc["opinion_texts"].get<std::vector<std::string>>();
    }
    if (doc.contains("user_ids")) instance.user_ids = doc["user_ids"].get<std::vector<std::string>>();
    if (doc.contains("opinion_ids")) {
      instance.opinion_ids = doc["opinion_ids"].get<std::vector<std::string>>();
    }
    return instance;
  } catch (const Json::exception& e) {
    throw DataError(std::string("malformed instance document: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("malformed instance document: ") + e.what());
  }
}

Instance load_instance(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const Json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
  return instance_from_json(doc);
}

void save_instance(const Instance& instance, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << instance_to_json(instance).dump(2) << '\n';
}

Json selection_to_json(const Selection& selection) {
  Json doc;
  doc["rule"] = std::string(to_string(selection.rule));
  doc["k"] = selection.k();
  doc["opinions"] = selection.opinions;
  doc["seed"] = selection.seed ? Json(*selection.seed) : Json(nullptr);
  Json params = Json::object();
  for (const auto& [key, value] : selection.params) params[key] = value;
  doc["params"] = std::move(params);
  return doc;
}

Selection selection_from_json(const Json& doc) {
  try {
    Selection sel;
    sel.rule = parse_rule(doc.at("rule").get<std::string>());
    sel.opinions = doc.at("opinions").get<std::vector<OpinionIndex>>();
    if (doc.contains("seed") && !doc["seed"].is_null()) sel.seed = doc["seed"].get<std::uint64_t>();
    if (doc.contains("params")) {
      for (const auto& [key, value] : doc["params"].items()) sel.params[key] = value.get<double>();
    }
    return sel;
  } catch (const Json::exception& e) {
    throw DataError(std::string("malformed selection document: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("malformed selection document: ") + e.what());
  }
}

Json certificate_to_json(const AssignmentCertificate& certificate) {
  return {{"assignment", certificate.assignment}, {"budgets", certificate.budgets}};
}

Json metrics_to_json(const MetricsReport& report) {
  Json doc;
  doc["u_all"] = report.u_all;
  doc["median_u"] = report.median_u ? Json(*report.median_u) : Json(nullptr);
  doc["consensus"] = report.consensus ? Json(*report.consensus) : Json(nullptr);
  doc["coverage_gap"] = report.coverage_gap;
  doc["redundancy"] = report.redundancy;
  doc["redundancy_epsilon"] = report.redundancy_epsilon;
  return doc;
}

namespace {
Json witness_to_json(const std::optional<BlockingWitness>& w) {
  if (!w) return nullptr;
  return {{"opinion", w->opinion}, {"users", w->users}};
}
}  // namespace

Json jr_report_to_json(const JrReport& report) {
  return {{"satisfied", report.satisfied}, {"witness", witness_to_json(report.witness)}};
}

Json bjr_report_to_json(const BjrReport& report) {
  Json doc;
  doc["status"] = std::string(to_string(report.status));
  doc["satisfied"] = report.ok();
  doc["balanced"] = report.balanced();
  doc["witness"] = witness_to_json(report.witness);
  if (!report.reason.empty()) doc["reason"] = report.reason;
  return doc;
}

}  // namespace opsel
