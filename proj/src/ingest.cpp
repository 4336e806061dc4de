#include "bookimpact/ingest.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <limits>
#include <fstream>
#include <set>
#include <sstream>

namespace bookimpact {

using json = nlohmann::json;

namespace {

struct Where {
  const std::string& file;
  int line = 0;
};

[[noreturn]] void malformed(const Where& w, const std::string& reason) {
  fail(ErrorKind::MalformedRecord, w.file + ":" + std::to_string(w.line) + ": " + reason);
}

[[noreturn]] void duplicate(const Where& w, const std::string& what) {
  fail(ErrorKind::DuplicateKey, w.file + ":" + std::to_string(w.line) + ": duplicate " + what);
}

void warn(std::vector<std::string>* warnings, const Where& w, const std::string& msg) {
  if (warnings) warnings->push_back(w.file + ":" + std::to_string(w.line) + ": " + msg);
}

void check_fields(const json& obj, std::initializer_list<std::string_view> known, const Where& w,
                  std::vector<std::string>* warnings) {
  for (const auto& [key, value] : obj.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end())
      warn(warnings, w, "unknown field '" + key + "' ignored");
  }
}

const json* field(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return nullptr;
  return &*it;
}

std::string req_string(const json& obj, const char* key, const Where& w) {
  const json* v = field(obj, key);
  if (!v) malformed(w, std::string("missing field '") + key + "'");
  if (!v->is_string()) malformed(w, std::string("field '") + key + "' must be a string");
  return v->get<std::string>();
}

std::string opt_string(const json& obj, const char* key, const Where& w) {
  const json* v = field(obj, key);
  if (!v) return {};
  if (!v->is_string()) malformed(w, std::string("field '") + key + "' must be a string");
  return v->get<std::string>();
}

int as_int(const json& v, const std::string& what, const Where& w) {
  if (!v.is_number_integer()) malformed(w, what + " must be an integer");
  const auto x = v.get<long long>();
  if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max()) malformed(w, what + " out of range");
  return static_cast<int>(x);
}

int req_int(const json& obj, const char* key, const Where& w) {
  const json* v = field(obj, key);
  if (!v) malformed(w, std::string("missing field '") + key + "'");
  return as_int(*v, std::string("field '") + key + "'", w);
}

std::optional<int> opt_int(const json& obj, const char* key, const Where& w) {
  const json* v = field(obj, key);
  if (!v) return std::nullopt;
  return as_int(*v, std::string("field '") + key + "'", w);
}

const json& req_object_at(const json& v, const Where& w) {
  if (!v.is_object()) malformed(w, "record must be a JSON object");
  return v;
}

// Visits non-blank lines, parsing each as JSON.
template <typename F>
void for_each_json_line(std::string_view text, const std::string& file, F&& visit) {
  if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);
  int number = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    ++number;
    pos = end + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) {
      if (end == text.size()) break;
      continue;
    }
    Where w{file, number};
    json record;
    try {
      record = json::parse(line);
    } catch (const json::exception& e) {
      malformed(w, std::string("invalid JSON: ") + e.what());
    }
    visit(req_object_at(record, w), w);
    if (end == text.size()) break;
  }
}

// ---------------------------------------------------------------------------
// Record <-> JSON

BookRecord book_from_json(const json& o, const Where& w, std::vector<std::string>* warnings) {
  check_fields(o, {"isbn", "title", "discipline", "page_count", "toc_text", "publication_year"}, w, warnings);
  BookRecord b;
  b.isbn = req_string(o, "isbn", w);
  b.title = opt_string(o, "title", w);
  b.discipline = Discipline::parse(req_string(o, "discipline", w));
  b.page_count = req_int(o, "page_count", w);
  b.toc_text = opt_string(o, "toc_text", w);
  b.publication_year = opt_int(o, "publication_year", w);
  return b;
}

json to_json(const BookRecord& b) {
  json o{{"isbn", b.isbn}, {"title", b.title}, {"discipline", b.discipline.name()}, {"page_count", b.page_count},
         {"toc_text", b.toc_text}};
  if (b.publication_year) o["publication_year"] = *b.publication_year;
  return o;
}

int aspect_polarity(const json& v, const Where& w) {
  if (v.is_string()) {
    if (auto p = parse_polarity(v.get<std::string>())) return *p == Polarity::Positive ? 1 : -1;
    malformed(w, "aspect polarity '" + v.get<std::string>() + "' is not positive/negative");
  }
  const int p = as_int(v, "aspect polarity", w);
  if (p != 1 && p != -1) malformed(w, "aspect polarity must be +1 or -1");
  return p;
}

Review review_from_json(const json& o, const Where& w, std::vector<std::string>* warnings) {
  check_fields(o, {"isbn", "review_id", "star", "text", "polarity", "aspects"}, w, warnings);
  Review r;
  r.isbn = req_string(o, "isbn", w);
  r.review_id = req_string(o, "review_id", w);
  r.star = req_int(o, "star", w);
  r.text = opt_string(o, "text", w);
  if (const json* p = field(o, "polarity")) {
    if (!p->is_string()) malformed(w, "field 'polarity' must be a string");
    r.polarity_label = parse_polarity(p->get<std::string>());
    if (!r.polarity_label) malformed(w, "unknown polarity '" + p->get<std::string>() + "'");
  }
  if (const json* a = field(o, "aspects")) {
    if (!a->is_array()) malformed(w, "field 'aspects' must be an array");
    std::vector<AspectLabel> labels;
    for (const auto& item : *a) {
      if (!item.is_object()) malformed(w, "aspect label must be an object");
      labels.push_back({req_string(item, "aspect", w), aspect_polarity(item.value("polarity", json()), w)});
    }
    r.aspect_labels = std::move(labels);
  }
  return r;
}

json to_json(const Review& r) {
  json o{{"isbn", r.isbn}, {"review_id", r.review_id}, {"star", r.star}, {"text", r.text}};
  if (r.polarity_label) o["polarity"] = std::string(to_string(*r.polarity_label));
  if (r.aspect_labels) {
    json a = json::array();
    for (const auto& l : *r.aspect_labels) a.push_back({{"aspect", l.aspect}, {"polarity", l.polarity}});
    o["aspects"] = std::move(a);
  }
  return o;
}

CitingLiterature citation_from_json(const json& o, const Where& w, std::vector<std::string>* warnings) {
  check_fields(o, {"isbn", "lit_id", "title", "year", "body_text", "intensity", "contexts"}, w, warnings);
  CitingLiterature c;
  c.isbn = req_string(o, "isbn", w);
  c.lit_id = req_string(o, "lit_id", w);
  c.title = opt_string(o, "title", w);
  c.year = opt_int(o, "year", w).value_or(0);
  c.body_text = opt_string(o, "body_text", w);
  c.intensity = req_int(o, "intensity", w);
  if (const json* ctxs = field(o, "contexts")) {
    if (!ctxs->is_array()) malformed(w, "field 'contexts' must be an array");
    for (const auto& item : *ctxs) {
      if (!item.is_object()) malformed(w, "citation context must be an object");
      check_fields(item, {"window_text", "function_label"}, w, warnings);
      CitationContext ctx;
      ctx.isbn = c.isbn;
      ctx.lit_id = c.lit_id;
      ctx.window_text = req_string(item, "window_text", w);
      const std::string label = opt_string(item, "function_label", w);
      if (!label.empty()) {
        ctx.function_label = parse_citation_function(label);
        if (!ctx.function_label) malformed(w, "unknown citation function '" + label + "'");
      }
      c.contexts.push_back(std::move(ctx));
    }
  }
  return c;
}

json to_json(const CitingLiterature& c) {
  json ctxs = json::array();
  for (const auto& ctx : c.contexts) {
    json x{{"window_text", ctx.window_text}};
    if (ctx.function_label) x["function_label"] = std::string(to_string(*ctx.function_label));
    ctxs.push_back(std::move(x));
  }
  return {{"isbn", c.isbn},         {"lit_id", c.lit_id},       {"title", c.title}, {"year", c.year},
          {"body_text", c.body_text}, {"intensity", c.intensity}, {"contexts", std::move(ctxs)}};
}

HoldingsRecord holdings_from_json(const json& o, const Where& w, std::vector<std::string>* warnings) {
  check_fields(o, {"isbn", "regions"}, w, warnings);
  HoldingsRecord h;
  h.isbn = req_string(o, "isbn", w);
  const json* regions = field(o, "regions");
  if (!regions || !regions->is_object()) malformed(w, "field 'regions' must be an object");
  for (const auto& [code, count] : regions->items()) {
    const int n = as_int(count, "holding count for '" + code + "'", w);
    if (n == 0) {
      warn(warnings, w, "region '" + code + "' with zero holdings dropped");
      continue;
    }
    const std::string region = normalize_region(code);
    if (h.per_region.contains(region)) warn(warnings, w, "region '" + region + "' repeated, counts summed");
    h.per_region[region] += n;
  }
  return h;
}

json to_json(const HoldingsRecord& h) {
  json regions = json::object();
  for (const auto& [code, n] : h.per_region) regions[code] = n;
  return {{"isbn", h.isbn}, {"regions", std::move(regions)}};
}

SaleRecord sale_from_json(const json& o, const Where& w, std::vector<std::string>* warnings) {
  check_fields(o, {"isbn", "sale_rank"}, w, warnings);
  return {req_string(o, "isbn", w), req_int(o, "sale_rank", w)};
}

json to_json(const SaleRecord& s) { return {{"isbn", s.isbn}, {"sale_rank", s.sale_rank}}; }

ExpertMetricRating metric_rating_from_json(const json& o, const Where& w, std::vector<std::string>* warnings) {
  check_fields(o, {"respondent_id", "ratings"}, w, warnings);
  ExpertMetricRating r;
  r.respondent_id = req_string(o, "respondent_id", w);
  const json* ratings = field(o, "ratings");
  if (!ratings || !ratings->is_object()) malformed(w, "field 'ratings' must be an object");
  for (const auto& [item, value] : ratings->items()) r.ratings[item] = as_int(value, "rating for '" + item + "'", w);
  return r;
}

json to_json(const ExpertMetricRating& r) {
  json ratings = json::object();
  for (const auto& [item, v] : r.ratings) ratings[item] = v;
  return {{"respondent_id", r.respondent_id}, {"ratings", std::move(ratings)}};
}

ExpertBookScore book_score_from_json(const json& o, const Where& w, std::vector<std::string>* warnings) {
  check_fields(o, {"respondent_id", "isbn", "impact"}, w, warnings);
  return {req_string(o, "respondent_id", w), req_string(o, "isbn", w), req_int(o, "impact", w)};
}

json to_json(const ExpertBookScore& s) {
  return {{"respondent_id", s.respondent_id}, {"isbn", s.isbn}, {"impact", s.impact}};
}

template <typename T, typename Parse, typename Key>
std::vector<T> parse_lines(std::string_view text, const std::string& file, std::vector<std::string>* warnings,
                           Parse parse, Key key, const char* key_name) {
  std::vector<T> out;
  std::set<std::string> seen;
  for_each_json_line(text, file, [&](const json& o, const Where& w) {
    T record = parse(o, w, warnings);
    const std::string k = key(record);
    if (!seen.insert(k).second) duplicate(w, std::string(key_name) + " " + k);
    out.push_back(std::move(record));
  });
  return out;
}

// ---------------------------------------------------------------------------
// Delimited tables

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  s = s.substr(b, e - b + 1);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

std::vector<std::string> split_row(std::string_view line, char delim) {
  std::vector<std::string> cells;
  std::size_t pos = 0;
  while (true) {
    const auto end = line.find(delim, pos);
    cells.emplace_back(trim(line.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos)));
    if (end == std::string_view::npos) break;
    pos = end + 1;
  }
  return cells;
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::pair<int, std::vector<std::string>>> rows;  // line number, cells
};

Table read_table(std::string_view text, const std::string& file) {
  if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);
  Table t;
  std::istringstream in{std::string(text)};
  std::string line;
  int number = 0;
  char delim = ',';
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty() || line.starts_with('#')) continue;
    if (t.header.empty()) {
      delim = line.find('\t') != std::string::npos ? '\t' : ',';
      t.header = split_row(line, delim);
      if (t.header.size() < 2) malformed({file, number}, "table header needs respondent_id and at least one item");
      continue;
    }
    auto cells = split_row(line, delim);
    if (cells.size() != t.header.size())
      malformed({file, number}, "expected " + std::to_string(t.header.size()) + " cells, found " +
                                    std::to_string(cells.size()));
    t.rows.emplace_back(number, std::move(cells));
  }
  return t;
}

int parse_cell(const std::string& cell, const std::string& column, const Where& w) {
  int v = 0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || ptr != cell.data() + cell.size())
    malformed(w, "column '" + column + "': '" + cell + "' is not an integer");
  return v;
}

bool looks_like_json_lines(std::string_view text) {
  const auto p = text.find_first_not_of(" \t\r\n\xEF\xBB\xBF");
  return p != std::string_view::npos && text[p] == '{';
}

// ---------------------------------------------------------------------------
// Lexicon and models as JSON

json to_json(const AspectLexicon& lex) {
  json aspects = json::object();
  for (const auto& [id, terms] : lex.aspects) aspects[id] = terms;
  return {{"aspects", std::move(aspects)},
          {"positive", lex.positive},
          {"negative", lex.negative},
          {"negators", lex.negators}};
}

AspectLexicon lexicon_from_json(const json& o) {
  AspectLexicon lex;
  for (const auto& [id, terms] : o.at("aspects").items()) lex.aspects[id] = terms.get<std::set<std::string>>();
  lex.positive = o.at("positive").get<std::set<std::string>>();
  lex.negative = o.at("negative").get<std::set<std::string>>();
  lex.negators = o.at("negators").get<std::set<std::string>>();
  return lex;
}

json matrix_to_json(const MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

MatrixXd matrix_from_json(const json& rows, Eigen::Index cols_if_empty = 0) {
  const auto r = static_cast<Eigen::Index>(rows.size());
  const Eigen::Index c = r > 0 ? static_cast<Eigen::Index>(rows[0].size()) : cols_if_empty;
  MatrixXd m(r, c);
  for (Eigen::Index i = 0; i < r; ++i) {
    const auto& row = rows[static_cast<std::size_t>(i)];
    if (static_cast<Eigen::Index>(row.size()) != c) fail(ErrorKind::MalformedRecord, "ragged matrix in snapshot");
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = row[static_cast<std::size_t>(j)].get<double>();
  }
  return m;
}

json vector_to_json(const VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

VectorXd vector_from_json(const json& a) {
  const auto values = a.get<std::vector<double>>();
  return Eigen::Map<const VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

json to_json(const TopicModel& m) {
  return {{"topic_count", m.topic_count}, {"seed", m.seed},
          {"iterations", m.iterations},   {"alpha", m.alpha},
          {"beta", m.beta},               {"tau", m.tau},
          {"vocabulary", m.vocabulary},   {"topic_word", matrix_to_json(m.topic_word)},
          {"doc_ids", m.doc_ids},         {"doc_topic", matrix_to_json(m.doc_topic)}};
}

TopicModel topic_model_from_json(const json& o) {
  TopicModel m;
  m.topic_count = o.at("topic_count").get<int>();
  m.seed = o.at("seed").get<std::uint64_t>();
  m.iterations = o.at("iterations").get<int>();
  m.alpha = o.at("alpha").get<double>();
  m.beta = o.at("beta").get<double>();
  m.tau = o.at("tau").get<double>();
  m.vocabulary = o.at("vocabulary").get<std::vector<std::string>>();
  m.topic_word = matrix_from_json(o.at("topic_word"));
  m.doc_ids = o.at("doc_ids").get<std::vector<std::string>>();
  m.doc_topic = matrix_from_json(o.at("doc_topic"), m.topic_count);
  if (m.topic_word.rows() != m.topic_count || m.topic_word.cols() != static_cast<Eigen::Index>(m.vocabulary.size()) ||
      m.doc_topic.rows() != static_cast<Eigen::Index>(m.doc_ids.size()))
    fail(ErrorKind::MalformedRecord, "topic model dimensions disagree");
  return m;
}

template <typename Label, std::size_t N>
json to_json(const NaiveBayes<Label, N>& nb) {
  std::vector<std::string> terms(nb.vocabulary.size());
  for (const auto& [term, col] : nb.vocabulary) terms[static_cast<std::size_t>(col)] = term;
  json classes = json::array();
  for (const auto& c : nb.classes) classes.push_back(std::string(to_string(c)));
  return {{"classes", std::move(classes)},
          {"vocabulary", std::move(terms)},
          {"priors", vector_to_json(nb.priors)},
          {"likelihoods", matrix_to_json(nb.likelihoods)},
          {"smoothing", nb.smoothing}};
}

template <typename Label, std::size_t N, typename ParseLabel>
NaiveBayes<Label, N> naive_bayes_from_json(const json& o, ParseLabel parse_label) {
  NaiveBayes<Label, N> nb;
  const auto classes = o.at("classes").get<std::vector<std::string>>();
  if (classes.size() != N) fail(ErrorKind::MalformedRecord, "classifier snapshot has the wrong class count");
  for (std::size_t i = 0; i < N; ++i) {
    auto label = parse_label(classes[i]);
    if (!label) fail(ErrorKind::MalformedRecord, "unknown class '" + classes[i] + "' in classifier snapshot");
    nb.classes[i] = *label;
  }
  const auto terms = o.at("vocabulary").get<std::vector<std::string>>();
  for (std::size_t i = 0; i < terms.size(); ++i) nb.vocabulary[terms[i]] = static_cast<int>(i);
  nb.priors = vector_from_json(o.at("priors"));
  nb.likelihoods = matrix_from_json(o.at("likelihoods"), static_cast<Eigen::Index>(terms.size()));
  nb.smoothing = o.at("smoothing").get<double>();
  if (nb.priors.size() != static_cast<Eigen::Index>(N) || nb.likelihoods.rows() != static_cast<Eigen::Index>(N) ||
      nb.likelihoods.cols() != static_cast<Eigen::Index>(terms.size()))
    fail(ErrorKind::MalformedRecord, "classifier dimensions disagree");
  return nb;
}

json parse_snapshot(std::string_view text, std::string_view format) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorKind::MalformedRecord, std::string("snapshot is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || doc.value("format", std::string()) != format)
    fail(ErrorKind::MalformedRecord, "not a " + std::string(format) + " snapshot");
  const json* version = field(doc, "version");
  if (!version || !version->is_number_integer())
    fail(ErrorKind::MalformedRecord, "snapshot has no integer version");
  if (version->get<int>() != kSnapshotVersion)
    fail(ErrorKind::VersionMismatch, "snapshot version " + std::to_string(version->get<int>()) + ", expected " +
                                         std::to_string(kSnapshotVersion));
  return doc;
}

template <typename F>
auto guard_schema(F&& body) {
  try {
    return body();
  } catch (const json::exception& e) {
    fail(ErrorKind::MalformedRecord, std::string("snapshot schema error: ") + e.what());
  }
}

std::optional<fs::path> opt_path(const json& o, const char* key, const fs::path& base) {
  const json* v = field(o, key);
  if (!v) return std::nullopt;
  if (!v->is_string()) fail(ErrorKind::MalformedRecord, std::string("manifest field '") + key + "' must be a string");
  fs::path p = v->get<std::string>();
  return p.is_absolute() ? p : base / p;
}

}  // namespace

// ---------------------------------------------------------------------------

IngestManifest IngestManifest::parse(std::string_view json_text, const fs::path& base_dir) {
  json o;
  try {
    o = json::parse(json_text);
  } catch (const json::exception& e) {
    fail(ErrorKind::MalformedRecord, std::string("manifest is not valid JSON: ") + e.what());
  }
  if (!o.is_object()) fail(ErrorKind::MalformedRecord, "manifest must be a JSON object");
  IngestManifest m;
  auto books = opt_path(o, "books", base_dir);
  if (!books) fail(ErrorKind::MissingMandatoryFile, "manifest names no books file");
  m.books = *books;
  m.reviews = opt_path(o, "reviews", base_dir);
  m.citations = opt_path(o, "citations", base_dir);
  m.holdings = opt_path(o, "holdings", base_dir);
  m.sales = opt_path(o, "sales", base_dir);
  m.metric_questionnaire = opt_path(o, "metric_questionnaire", base_dir);
  m.book_questionnaire = opt_path(o, "book_questionnaire", base_dir);
  m.aspect_lexicon = opt_path(o, "aspect_lexicon", base_dir);
  if (const json* t = field(o, "tokenizer")) m.tokenizer_profile = t->get<std::string>();
  if (const json* e = field(o, "encoding")) {
    std::string enc = e->get<std::string>();
    std::transform(enc.begin(), enc.end(), enc.begin(), [](unsigned char c) { return std::toupper(c); });
    if (enc != "UTF-8" && enc != "UTF8") fail(ErrorKind::InvalidArgument, "only UTF-8 input is supported, got " + enc);
  }
  tokenize("", m.tokenizer_profile);  // rejects unknown profiles early
  return m;
}

IngestManifest IngestManifest::from_file(const fs::path& path) {
  return parse(read_text_file(path), path.parent_path());
}

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::IoFailure, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) fail(ErrorKind::IoFailure, "read failed for " + path.string());
  return buf.str();
}

void write_text_file(const fs::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::IoFailure, "cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.flush();
  if (!out) fail(ErrorKind::IoFailure, "write failed for " + path.string());
}

std::vector<BookRecord> parse_books(std::string_view text, const std::string& file,
                                    std::vector<std::string>* warnings) {
  return parse_lines<BookRecord>(text, file, warnings, book_from_json, [](const BookRecord& b) { return b.isbn; },
                                 "isbn");
}

std::vector<Review> parse_reviews(std::string_view text, const std::string& file, std::vector<std::string>* warnings) {
  return parse_lines<Review>(text, file, warnings, review_from_json, [](const Review& r) { return r.review_id; },
                             "review_id");
}

std::vector<CitingLiterature> parse_citations(std::string_view text, const std::string& file,
                                              std::vector<std::string>* warnings) {
  return parse_lines<CitingLiterature>(
      text, file, warnings, citation_from_json,
      [](const CitingLiterature& c) { return c.isbn + "/" + c.lit_id; }, "literature");
}

std::vector<HoldingsRecord> parse_holdings(std::string_view text, const std::string& file,
                                           std::vector<std::string>* warnings) {
  return parse_lines<HoldingsRecord>(text, file, warnings, holdings_from_json,
                                     [](const HoldingsRecord& h) { return h.isbn; }, "holdings isbn");
}

std::vector<SaleRecord> parse_sales(std::string_view text, const std::string& file,
                                    std::vector<std::string>* warnings) {
  return parse_lines<SaleRecord>(text, file, warnings, sale_from_json, [](const SaleRecord& s) { return s.isbn; },
                                 "sale isbn");
}

std::vector<ExpertMetricRating> parse_metric_questionnaire(std::string_view text, const std::string& file,
                                                           std::vector<std::string>* warnings) {
  if (looks_like_json_lines(text))
    return parse_lines<ExpertMetricRating>(text, file, warnings, metric_rating_from_json,
                                           [](const ExpertMetricRating& r) { return r.respondent_id; },
                                           "respondent_id");
  const Table t = read_table(text, file);
  std::vector<ExpertMetricRating> out;
  std::set<std::string> seen;
  for (const auto& [line, cells] : t.rows) {
    Where w{file, line};
    ExpertMetricRating r;
    r.respondent_id = cells[0];
    if (r.respondent_id.empty()) malformed(w, "empty respondent_id");
    if (!seen.insert(r.respondent_id).second) duplicate(w, "respondent_id " + r.respondent_id);
    for (std::size_t c = 1; c < cells.size(); ++c)
      if (!cells[c].empty()) r.ratings[t.header[c]] = parse_cell(cells[c], t.header[c], w);
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<ExpertBookScore> parse_book_questionnaire(std::string_view text, const std::string& file,
                                                      std::vector<std::string>* warnings) {
  if (looks_like_json_lines(text))
    return parse_lines<ExpertBookScore>(text, file, warnings, book_score_from_json,
                                        [](const ExpertBookScore& s) { return s.respondent_id + "/" + s.isbn; },
                                        "respondent/isbn pair");
  const Table t = read_table(text, file);
  std::vector<ExpertBookScore> out;
  std::set<std::string> seen;
  for (const auto& [line, cells] : t.rows) {
    Where w{file, line};
    if (cells[0].empty()) malformed(w, "empty respondent_id");
    if (!seen.insert(cells[0]).second) duplicate(w, "respondent_id " + cells[0]);
    for (std::size_t c = 1; c < cells.size(); ++c)
      if (!cells[c].empty()) out.push_back({cells[0], t.header[c], parse_cell(cells[c], t.header[c], w)});
  }
  return out;
}

Dataset load_dataset(const IngestManifest& manifest, std::vector<std::string>* warnings) {
  if (!fs::exists(manifest.books))
    fail(ErrorKind::MissingMandatoryFile, "books file " + manifest.books.string() + " does not exist");
  auto load = [&](const fs::path& p, auto parse) {
    return parse(read_text_file(p), p.filename().string(), warnings);
  };
  Dataset d;
  d.tokenizer_profile = manifest.tokenizer_profile;
  d.books = load(manifest.books, parse_books);
  if (manifest.reviews) d.reviews = load(*manifest.reviews, parse_reviews);
  if (manifest.citations) d.citing_literatures = load(*manifest.citations, parse_citations);
  if (manifest.holdings) d.holdings = load(*manifest.holdings, parse_holdings);
  if (manifest.sales) d.sales = load(*manifest.sales, parse_sales);
  if (manifest.metric_questionnaire) d.expert_metric_ratings = load(*manifest.metric_questionnaire, parse_metric_questionnaire);
  if (manifest.book_questionnaire) d.expert_book_scores = load(*manifest.book_questionnaire, parse_book_questionnaire);
  d.aspect_lexicon = manifest.aspect_lexicon
                         ? parse_aspect_lexicon(read_text_file(*manifest.aspect_lexicon),
                                                manifest.aspect_lexicon->filename().string())
                         : default_aspect_lexicon();
  d.canonicalize();
  return d;
}

// ---------------------------------------------------------------------------
// Snapshots

std::string dataset_to_json(const Dataset& d) {
  auto array_of = [](const auto& records) {
    json a = json::array();
    for (const auto& r : records) a.push_back(to_json(r));
    return a;
  };
  json doc{{"format", "bookimpact-dataset"},
           {"version", kSnapshotVersion},
           {"tokenizer_profile", d.tokenizer_profile},
           {"aspect_lexicon", to_json(d.aspect_lexicon)},
           {"books", array_of(d.books)},
           {"reviews", array_of(d.reviews)},
           {"citations", array_of(d.citing_literatures)},
           {"holdings", array_of(d.holdings)},
           {"sales", array_of(d.sales)},
           {"metric_questionnaire", array_of(d.expert_metric_ratings)},
           {"book_questionnaire", array_of(d.expert_book_scores)}};
  return doc.dump(1) + "\n";
}

Dataset dataset_from_json(std::string_view text) {
  const json doc = parse_snapshot(text, "bookimpact-dataset");
  return guard_schema([&] {
    const std::string file = "snapshot";
    auto read = [&](const char* key, auto parse, auto& out) {
      int index = 0;
      for (const auto& item : doc.at(key)) {
        Where w{file, ++index};
        out.push_back(parse(req_object_at(item, w), w, nullptr));
      }
    };
    Dataset d;
    d.tokenizer_profile = doc.at("tokenizer_profile").get<std::string>();
    d.aspect_lexicon = lexicon_from_json(doc.at("aspect_lexicon"));
    read("books", book_from_json, d.books);
    read("reviews", review_from_json, d.reviews);
    read("citations", citation_from_json, d.citing_literatures);
    read("holdings", holdings_from_json, d.holdings);
    read("sales", sale_from_json, d.sales);
    read("metric_questionnaire", metric_rating_from_json, d.expert_metric_ratings);
    read("book_questionnaire", book_score_from_json, d.expert_book_scores);
    d.canonicalize();
    return d;
  });
}

void save_snapshot(const Dataset& dataset, const fs::path& path) { write_text_file(path, dataset_to_json(dataset)); }

Dataset load_snapshot(const fs::path& path) { return dataset_from_json(read_text_file(path)); }

std::string models_to_json(const ModelBundle& m) {
  json toc = json::object();
  for (const auto& [name, model] : m.toc_models) toc[name] = to_json(model);
  json doc{{"format", "bookimpact-models"},
           {"version", kSnapshotVersion},
           {"tokenizer_profile", m.tokenizer_profile},
           {"toc_models", std::move(toc)},
           {"citation_model", m.citation_model ? to_json(*m.citation_model) : json()},
           {"sentiment", m.sentiment ? to_json(*m.sentiment) : json()},
           {"function_classifier", m.function_classifier ? to_json(*m.function_classifier) : json()}};
  return doc.dump() + "\n";
}

ModelBundle models_from_json(std::string_view text) {
  const json doc = parse_snapshot(text, "bookimpact-models");
  return guard_schema([&] {
    ModelBundle m;
    m.tokenizer_profile = doc.at("tokenizer_profile").get<std::string>();
    for (const auto& [name, model] : doc.at("toc_models").items()) m.toc_models[name] = topic_model_from_json(model);
    if (const json* c = field(doc, "citation_model")) m.citation_model = topic_model_from_json(*c);
    if (const json* s = field(doc, "sentiment"))
      m.sentiment = naive_bayes_from_json<Polarity, 2>(*s, [](const std::string& x) { return parse_polarity(x); });
    if (const json* f = field(doc, "function_classifier"))
      m.function_classifier = naive_bayes_from_json<CitationFunction, 3>(
          *f, [](const std::string& x) { return parse_citation_function(x); });
    return m;
  });
}

void save_models(const ModelBundle& models, const fs::path& path) { write_text_file(path, models_to_json(models)); }

ModelBundle load_models(const fs::path& path) { return models_from_json(read_text_file(path)); }

std::string weights_to_json(const WeightHierarchy& h) {
  json global = json::object();
  for (const auto& m : kMetrics) global[std::string(m.key)] = h.weight(m.id);
  json primary = json::object();
  json within = json::object();
  for (const auto& s : kSources) {
    primary[std::string(s.key)] = h.weight(s.source);
    json group = json::object();
    const auto& w = h.within_group[static_cast<std::size_t>(index_of(s.source))];
    for (int j = 0; j < s.metric_count && j < w.size(); ++j)
      group[std::string(kMetrics[static_cast<std::size_t>(s.first_metric + j)].key)] = w(j);
    within[std::string(s.key)] = std::move(group);
  }
  json consistency = json::array();
  for (const auto& d : h.consistency)
    consistency.push_back({{"level", d.level},       {"size", d.size}, {"respondents", d.respondents},
                           {"lambda_max", d.lambda_max}, {"ci", d.ci},     {"cr", d.cr},
                           {"inconsistent", d.inconsistent}});
  json doc{{"format", "bookimpact-weights"},
           {"version", kSnapshotVersion},
           {"provenance", std::string(to_string(h.provenance))},
           {"global", std::move(global)},
           {"primary", std::move(primary)},
           {"within_group", std::move(within)},
           {"consistency", std::move(consistency)},
           {"warnings", h.warnings}};
  return doc.dump(2) + "\n";
}

WeightHierarchy weights_from_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorKind::MalformedRecord, std::string("weights file is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("global")) fail(ErrorKind::MalformedRecord, "weights file has no 'global' entry");
  if (const json* v = field(doc, "version"); v && (!v->is_number_integer() || v->get<int>() != kSnapshotVersion))
    fail(ErrorKind::VersionMismatch, "unsupported weights file version");
  return guard_schema([&] {
    MetricValues global;
    const json& g = doc.at("global");
    if (g.is_array()) {
      if (g.size() != static_cast<std::size_t>(kMetricCount))
        fail(ErrorKind::InvalidWeights, "expected " + std::to_string(kMetricCount) + " weights, got " +
                                            std::to_string(g.size()));
      for (int j = 0; j < kMetricCount; ++j) global(j) = g[static_cast<std::size_t>(j)].get<double>();
    } else {
      for (const auto& m : kMetrics) {
        auto it = g.find(std::string(m.key));
        if (it == g.end()) fail(ErrorKind::InvalidWeights, "no weight for " + std::string(m.key));
        global(index_of(m.id)) = it->get<double>();
      }
    }
    if (!(global.array() > 0).all()) fail(ErrorKind::InvalidWeights, "every metric weight must be positive");
    const std::string prov = doc.value("provenance", std::string("custom"));
    WeightProvenance p = WeightProvenance::Custom;
    if (prov == "derived") p = WeightProvenance::Derived;
    else if (prov == "reference") p = WeightProvenance::Reference;
    WeightHierarchy h = WeightHierarchy::from_global(global / global.sum(), p);
    if (const json* c = field(doc, "consistency"))
      for (const auto& d : *c)
        h.consistency.push_back({d.at("level").get<std::string>(), d.at("size").get<int>(),
                                 d.at("respondents").get<int>(), d.at("lambda_max").get<double>(),
                                 d.at("ci").get<double>(), d.at("cr").get<double>(), d.at("inconsistent").get<bool>()});
    if (const json* w = field(doc, "warnings")) h.warnings = w->get<std::vector<std::string>>();
    return h;
  });
}

void save_weights(const WeightHierarchy& weights, const fs::path& path) {
  write_text_file(path, weights_to_json(weights));
}

WeightHierarchy load_weights(const fs::path& path) { return weights_from_json(read_text_file(path)); }

}  // namespace bookimpact
