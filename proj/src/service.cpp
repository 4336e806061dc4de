#include "bookimpact/service.hpp"

#include "bookimpact/ingest.hpp"

#include <httplib.h>
#include <json.hpp>

#include <algorithm>
#include <cmath>

namespace bookimpact {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Config

EngineConfig EngineConfig::parse(std::string_view json_text) {
  json o;
  try {
    o = json::parse(json_text);
  } catch (const json::exception& e) {
    fail(ErrorKind::MalformedRecord, std::string("config is not valid JSON: ") + e.what());
  }
  if (!o.is_object()) fail(ErrorKind::MalformedRecord, "config must be a JSON object");
  EngineConfig c;
  try {
    if (o.contains("topic_count")) c.train.toc.topic_count = c.train.citation.topic_count = o["topic_count"].get<int>();
    if (o.contains("toc_topic_count")) c.train.toc.topic_count = o["toc_topic_count"].get<int>();
    if (o.contains("citation_topic_count")) c.train.citation.topic_count = o["citation_topic_count"].get<int>();
    if (o.contains("tau")) c.train.toc.tau = c.train.citation.tau = o["tau"].get<double>();
    if (o.contains("seed")) c.train.toc.seed = c.train.citation.seed = o["seed"].get<std::uint64_t>();
    if (o.contains("iterations")) c.train.toc.iterations = c.train.citation.iterations = o["iterations"].get<int>();
    if (o.contains("alpha")) c.train.toc.alpha = c.train.citation.alpha = o["alpha"].get<double>();
    if (o.contains("beta")) c.train.toc.beta = c.train.citation.beta = o["beta"].get<double>();
    if (o.contains("per_discipline_toc")) c.train.per_discipline_toc = o["per_discipline_toc"].get<bool>();
    if (o.contains("policy")) c.policy = parse_missing_policy(o["policy"].get<std::string>());
    if (o.contains("intervals")) c.intervals = o["intervals"].get<std::vector<double>>();
    if (o.contains("random_index")) {
      c.consistency.random_index.clear();
      for (const auto& [n, ri] : o["random_index"].items()) c.consistency.random_index[std::stoi(n)] = ri.get<double>();
    }
    if (o.contains("consistency_threshold")) c.consistency.threshold = o["consistency_threshold"].get<double>();
    if (o.contains("prescale")) {
      for (const auto& [key, divisor] : o["prescale"].items()) {
        auto id = metric_from_key(key);
        if (!id) fail(ErrorKind::InvalidArgument, "unknown metric '" + key + "' in prescale");
        c.prescale(index_of(*id)) = divisor.get<double>();
      }
    }
    if (o.contains("aspect_window")) c.aspect_window = o["aspect_window"].get<int>();
  } catch (const json::exception& e) {
    fail(ErrorKind::MalformedRecord, std::string("config field has the wrong type: ") + e.what());
  } catch (const std::invalid_argument&) {
    fail(ErrorKind::MalformedRecord, "random_index keys must be integers");
  }
  if (!(c.prescale.array() > 0).all()) fail(ErrorKind::InvalidArgument, "prescale divisors must be positive");
  if (c.intervals.size() < 2 || !std::is_sorted(c.intervals.begin(), c.intervals.end()))
    fail(ErrorKind::InvalidArgument, "intervals must be sorted with at least two edges");
  return c;
}

EngineConfig EngineConfig::from_file(const std::string& path) { return parse(read_text_file(path)); }

std::string EngineConfig::to_json() const {
  json ri = json::object();
  for (const auto& [n, v] : consistency.random_index) ri[std::to_string(n)] = v;
  json prescale_obj = json::object();
  for (const auto& m : kMetrics) prescale_obj[std::string(m.key)] = prescale(index_of(m.id));
  json o{{"toc_topic_count", train.toc.topic_count},
         {"citation_topic_count", train.citation.topic_count},
         {"tau", train.toc.tau},
         {"seed", train.toc.seed},
         {"iterations", train.toc.iterations},
         {"alpha", train.toc.alpha},
         {"beta", train.toc.beta},
         {"per_discipline_toc", train.per_discipline_toc},
         {"policy", std::string(bookimpact::to_string(policy))},
         {"intervals", intervals},
         {"random_index", std::move(ri)},
         {"consistency_threshold", consistency.threshold},
         {"prescale", std::move(prescale_obj)},
         {"aspect_window", aspect_window}};
  return o.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// State

std::shared_ptr<const EngineState> EngineState::build(std::shared_ptr<const Dataset> dataset,
                                                      std::shared_ptr<const ModelBundle> models,
                                                      WeightHierarchy weights, EngineConfig config) {
  auto s = std::make_shared<EngineState>();
  s->dataset = std::move(dataset);
  s->models = std::move(models);
  s->config = std::move(config);
  s->weights = std::move(weights);
  s->analyses = analyze_dataset(*s->dataset, *s->models, MetricConfig{s->config.aspect_window});
  s->vectors.reserve(s->analyses.size());
  for (const auto& a : s->analyses) s->vectors.push_back(a.vector);
  s->scores = score_books(s->vectors, s->weights.global, s->config.scoring(), s->weights.provenance);
  return s;
}

std::shared_ptr<const EngineState> EngineState::with_weights(WeightHierarchy next) const {
  auto s = std::make_shared<EngineState>(*this);
  s->weights = std::move(next);
  s->scores = score_books(s->vectors, s->weights.global, s->config.scoring(), s->weights.provenance);
  return s;
}

std::vector<ImpactScore> EngineState::rescore(const MetricValues& w, const ScoringConfig& scoring) const {
  return score_books(vectors, w, scoring, WeightProvenance::Custom);
}

Engine::Engine(std::shared_ptr<const EngineState> state) : state_(std::move(state)) {}

std::shared_ptr<const EngineState> Engine::state() const {
  std::lock_guard lock(mutex_);
  return state_;
}

bool Engine::try_begin_replace() {
  std::lock_guard lock(mutex_);
  if (replacing_) return false;
  replacing_ = true;
  return true;
}

void Engine::publish(std::shared_ptr<const EngineState> next) {
  std::lock_guard lock(mutex_);
  state_ = std::move(next);
  replacing_ = false;
}

void Engine::abandon_replace() {
  std::lock_guard lock(mutex_);
  replacing_ = false;
}

// ---------------------------------------------------------------------------
// JSON renderings

namespace {

json subscores_json(const SourceValues& s) {
  return {{"content", s(0)}, {"review", s(1)}, {"citation", s(2)}, {"usage", s(3)}};
}

json score_json(const ImpactScore& s, const Dataset* dataset) {
  json o{{"isbn", s.isbn},
         {"total", s.total},
         {"rank", s.rank},
         {"subscores", subscores_json(s.subscores)},
         {"aspect_shifted", s.aspect_shifted}};
  if (dataset) {
    if (const BookRecord* b = dataset->find_book(s.isbn)) {
      o["title"] = b->title;
      o["discipline"] = b->discipline.name();
    }
  }
  return o;
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(); }

json error_body(std::string_view kind, const std::string& message) {
  return {{"error", std::string(kind)}, {"message", message}};
}

ApiResponse reply(int status, const json& body) { return {status, body.dump() + "\n"}; }

ApiResponse error_reply(int status, std::string_view kind, const std::string& message) {
  return reply(status, error_body(kind, message));
}

// Parses {"weights": [15] | {metric: value}} into a nonnegative vector rescaled to sum 1.
MetricValues parse_weight_payload(const json& body, bool require_positive) {
  if (!body.is_object() || !body.contains("weights"))
    fail(ErrorKind::InvalidWeights, "body must be an object with a 'weights' field");
  const json& w = body["weights"];
  MetricValues v;
  if (w.is_array()) {
    if (w.size() != static_cast<std::size_t>(kMetricCount))
      fail(ErrorKind::InvalidWeights,
           "expected " + std::to_string(kMetricCount) + " weights, got " + std::to_string(w.size()));
    for (int j = 0; j < kMetricCount; ++j) {
      const json& x = w[static_cast<std::size_t>(j)];
      if (!x.is_number()) fail(ErrorKind::InvalidWeights, "weight " + std::to_string(j) + " is not a number");
      v(j) = x.get<double>();
    }
  } else if (w.is_object()) {
    if (w.size() != static_cast<std::size_t>(kMetricCount))
      fail(ErrorKind::InvalidWeights,
           "expected " + std::to_string(kMetricCount) + " weights, got " + std::to_string(w.size()));
    for (const auto& m : kMetrics) {
      auto it = w.find(std::string(m.key));
      if (it == w.end() || !it->is_number()) fail(ErrorKind::InvalidWeights, "missing weight for " + std::string(m.key));
      v(index_of(m.id)) = it->get<double>();
    }
  } else {
    fail(ErrorKind::InvalidWeights, "'weights' must be an array or an object");
  }
  if (!v.allFinite()) fail(ErrorKind::InvalidWeights, "weights must be finite");
  if ((v.array() < 0).any()) fail(ErrorKind::InvalidWeights, "weights must be nonnegative");
  if (require_positive && !(v.array() > 0).all()) fail(ErrorKind::InvalidWeights, "weights must be positive");
  const double sum = v.sum();
  if (!(sum > 0)) fail(ErrorKind::InvalidWeights, "weights sum to zero");
  return v / sum;
}

json keyed_weights(const MetricValues& v) {
  json o = json::object();
  for (const auto& m : kMetrics) o[std::string(m.key)] = v(index_of(m.id));
  return o;
}

json parse_body(std::string_view body) {
  try {
    return json::parse(body);
  } catch (const json::exception& e) {
    fail(ErrorKind::InvalidWeights, std::string("body is not valid JSON: ") + e.what());
  }
}

int status_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::UnknownBook: return 404;
    case ErrorKind::InvalidWeights:
    case ErrorKind::InvalidArgument:
    case ErrorKind::NoPresentMetrics: return 400;
    default: return 500;
  }
}

std::string query_value(const std::map<std::string, std::string>& q, const std::string& key, std::string fallback) {
  auto it = q.find(key);
  return it == q.end() ? fallback : it->second;
}

int query_int(const std::map<std::string, std::string>& q, const std::string& key, int fallback) {
  auto it = q.find(key);
  if (it == q.end()) return fallback;
  try {
    std::size_t used = 0;
    const int v = std::stoi(it->second, &used);
    if (used != it->second.size()) throw std::invalid_argument(key);
    return v;
  } catch (const std::exception&) {
    fail(ErrorKind::InvalidArgument, "query parameter '" + key + "' must be an integer");
  }
}

ApiResponse list_books(const EngineState& s, const std::map<std::string, std::string>& q) {
  const int offset = query_int(q, "offset", 0);
  const int limit = query_int(q, "limit", 50);
  if (offset < 0 || limit < 1 || limit > 1000) fail(ErrorKind::InvalidArgument, "offset >= 0 and 1 <= limit <= 1000");
  std::optional<std::string> discipline;
  if (auto it = q.find("discipline"); it != q.end()) discipline = Discipline::parse(it->second).name();

  json books = json::array();
  int total = 0;
  for (const auto& score : s.scores) {
    if (discipline) {
      const BookRecord* b = s.dataset->find_book(score.isbn);
      if (!b || b->discipline.name() != *discipline) continue;
    }
    if (total >= offset && total < offset + limit) books.push_back(score_json(score, s.dataset.get()));
    ++total;
  }
  return reply(200, {{"total", total}, {"offset", offset}, {"limit", limit}, {"books", std::move(books)}});
}

}  // namespace

std::string report_to_json(const BookReport& r) {
  json ranks = json::object();
  json raw = json::object();
  for (const auto& m : kMetrics) {
    const auto i = static_cast<std::size_t>(index_of(m.id));
    ranks[std::string(m.key)] = r.metric_ranks[i] ? json(*r.metric_ranks[i]) : json();
    raw[std::string(m.key)] = r.raw.has(m.id) ? json(r.raw[m.id]) : json();
  }
  json o{{"isbn", r.isbn},
         {"title", r.title},
         {"discipline", r.discipline},
         {"overall_rank", r.overall_rank},
         {"total", r.total},
         {"subscores", subscores_json(r.subscores)},
         {"metric_ranks", std::move(ranks)},
         {"raw", std::move(raw)}};

  if (r.has_reviews) {
    json aspects = json::object();
    for (const auto& [a, t] : r.aspects)
      aspects[a] = {{"mentions", t.mentions}, {"net", t.net}, {"satisfaction", t.satisfaction()}};
    json extremes;
    if (r.aspect_extremes) {
      const auto& e = *r.aspect_extremes;
      extremes = {{"most_satisfied", e.most_satisfied},   {"most_satisfied_value", e.most_satisfied_value},
                  {"least_satisfied", e.least_satisfied}, {"least_satisfied_value", e.least_satisfied_value},
                  {"most_mentioned", e.most_mentioned},   {"most_mentioned_count", e.most_mentioned_count},
                  {"least_mentioned", e.least_mentioned}, {"least_mentioned_count", e.least_mentioned_count}};
    }
    o["reviews"] = {{"positive_share", r.positive_share}, {"negative_share", r.negative_share},
                    {"star_histogram", r.star_histogram}, {"star_shares", r.star_shares},
                    {"aspects", std::move(aspects)},      {"aspect_extremes", std::move(extremes)}};
  } else {
    o["reviews"] = nullptr;
  }

  if (r.has_citations) {
    json intensity = json::object();
    for (const auto& [k, share] : r.intensity_shares) intensity[std::to_string(k)] = share;
    json functions;
    if (r.has_functions)
      functions = {{"background", r.function_shares[0]}, {"comparison", r.function_shares[1]},
                   {"use", r.function_shares[2]}};
    o["citations"] = {{"intensity_shares", std::move(intensity)}, {"function_shares", std::move(functions)}};
  } else {
    o["citations"] = nullptr;
  }

  json regions = json::array();
  for (const auto& [region, n] : r.holdings_by_region) regions.push_back({{"region", region}, {"count", n}});
  o["usage"] = {{"holdings_by_region", r.has_holdings ? std::move(regions) : json()},
                {"sale_rank", r.sale_rank ? json(*r.sale_rank) : json()},
                {"sale_reordered", optional_number(r.sale_reordered)}};
  return o.dump(2) + "\n";
}

std::string ranking_to_json(std::span<const RankedEntry> ranking, const RankKey& key) {
  json entries = json::array();
  for (const auto& e : ranking) entries.push_back({{"isbn", e.isbn}, {"value", e.value}, {"rank", e.rank}});
  return json{{"key", rank_key_name(key)}, {"entries", std::move(entries)}}.dump() + "\n";
}

std::string summary_to_json(const DisciplineSummary& summary) {
  json rows = json::array();
  for (const auto& r : summary.rows)
    rows.push_back({{"discipline", r.discipline},
                    {"books", r.books},
                    {"counts", r.counts},
                    {"proportions", r.proportions},
                    {"no_data", r.books == 0}});
  return json{{"edges", summary.edges}, {"rows", std::move(rows)}, {"warnings", summary.warnings}}.dump() + "\n";
}

ApiResponse handle_request(Engine& engine, std::string_view method, std::string_view path,
                           const std::map<std::string, std::string>& query, std::string_view body) {
  try {
    const auto s = engine.state();
    if (method == "GET") {
      if (path == "/books") return list_books(*s, query);
      if (path.starts_with("/books/") && path.ends_with("/report")) {
        const std::string isbn(path.substr(7, path.size() - 7 - 7));
        const BookReport r = book_report(isbn, *s->dataset, s->scores, s->analyses);
        return {200, report_to_json(r)};
      }
      if (path == "/weights") {
        ApiResponse r;
        r.body = weights_to_json(s->weights);
        return r;
      }
      if (path == "/rankings") {
        const RankKey key = parse_rank_key(query_value(query, "key", "total"));
        return {200, ranking_to_json(rank_books(s->scores, key), key)};
      }
      if (path == "/disciplines/summary")
        return {200, summary_to_json(discipline_summary(s->scores, *s->dataset, s->config.intervals))};
      return error_reply(404, "NotFound", "no route for GET " + std::string(path));
    }
    if (method == "POST") {
      if (path == "/whatif") {
        const json payload = parse_body(body);
        const MetricValues w = parse_weight_payload(payload, false);
        ScoringConfig scoring = s->config.scoring();
        if (payload.contains("policy")) scoring.policy = parse_missing_policy(payload["policy"].get<std::string>());
        json ranking = json::array();
        for (const auto& score : s->rescore(w, scoring)) ranking.push_back(score_json(score, nullptr));
        return reply(200, {{"weights", keyed_weights(w)},
                           {"policy", std::string(to_string(scoring.policy))},
                           {"ranking", std::move(ranking)}});
      }
      if (path == "/weights") {
        const json payload = parse_body(body);
        const MetricValues w = parse_weight_payload(payload, true);
        if (!engine.try_begin_replace()) return error_reply(409, "Conflict", "published state is being replaced");
        try {
          auto next = engine.state()->with_weights(WeightHierarchy::from_global(w, WeightProvenance::Custom));
          engine.publish(next);
          return {200, weights_to_json(next->weights)};
        } catch (...) {
          engine.abandon_replace();
          throw;
        }
      }
      return error_reply(404, "NotFound", "no route for POST " + std::string(path));
    }
    return error_reply(405, "MethodNotAllowed", std::string(method) + " is not supported");
  } catch (const Error& e) {
    return error_reply(status_for(e.kind()), to_string(e.kind()), e.what());
  } catch (const json::exception& e) {
    return error_reply(400, "InvalidArgument", e.what());
  }
}

// ---------------------------------------------------------------------------
// HTTP

namespace {
std::mutex g_server_mutex;
httplib::Server* g_server = nullptr;
}  // namespace

bool serve_http(Engine& engine, const std::string& host, int port) {
  httplib::Server server;
  auto handler = [&engine](const httplib::Request& req, httplib::Response& res) {
    std::map<std::string, std::string> query;
    for (const auto& [k, v] : req.params) query.emplace(k, v);
    const ApiResponse r = handle_request(engine, req.method, req.path, query, req.body);
    res.status = r.status;
    res.set_content(r.body, r.content_type);
  };
  server.Get(".*", handler);
  server.Post(".*", handler);
  if (!server.bind_to_port(host, port)) return false;
  {
    std::lock_guard lock(g_server_mutex);
    g_server = &server;
  }
  server.listen_after_bind();
  std::lock_guard lock(g_server_mutex);
  g_server = nullptr;
  return true;
}

void stop_server() {
  std::lock_guard lock(g_server_mutex);
  if (g_server) g_server->stop();
}

}  // namespace bookimpact
