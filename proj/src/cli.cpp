#include "bookimpact/ingest.hpp"
#include "bookimpact/service.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>

namespace bookimpact {

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::MalformedRecord:
    case ErrorKind::DuplicateKey:
    case ErrorKind::MissingMandatoryFile:
    case ErrorKind::VersionMismatch:
    case ErrorKind::UnknownProfile:
      return 3;
    case ErrorKind::IoFailure:
      return 4;
    case ErrorKind::EmptyDocument:
    case ErrorKind::DegenerateCorpus:
    case ErrorKind::MissingClass:
    case ErrorKind::MissingRating:
    case ErrorKind::DimensionMismatch:
    case ErrorKind::NonConvergence:
    case ErrorKind::InvalidMatrix:
    case ErrorKind::InvalidWeights:
    case ErrorKind::NoPresentMetrics:
      return 5;
    case ErrorKind::NotADistribution:
    case ErrorKind::NegativeInput:
    case ErrorKind::LengthMismatch:
    case ErrorKind::ZeroVariance:
    case ErrorKind::InsufficientData:
    case ErrorKind::InsufficientOverlap:
      return 6;
    case ErrorKind::UnknownBook:
      return 7;
    case ErrorKind::InvalidArgument:
      return 1;
  }
  return 1;
}

namespace {

struct Common {
  std::string snapshot = "dataset.json";
  std::string models = "models.json";
  std::string weights = "reference";
  std::string policy;
  std::string config;
};

EngineConfig load_config(const Common& c) {
  EngineConfig cfg = c.config.empty() ? EngineConfig{} : EngineConfig::from_file(c.config);
  if (!c.policy.empty()) cfg.policy = parse_missing_policy(c.policy);
  return cfg;
}

WeightHierarchy resolve_weights(const std::string& spec, const Dataset& dataset, const EngineConfig& cfg) {
  if (spec == "reference") return reference_weights();
  if (spec == "derived") return derive_weights(dataset.expert_metric_ratings, cfg.consistency);
  return load_weights(spec);
}

std::shared_ptr<const EngineState> load_state(const Common& c) {
  const EngineConfig cfg = load_config(c);
  auto dataset = std::make_shared<const Dataset>(load_snapshot(c.snapshot));
  auto models = std::make_shared<const ModelBundle>(load_models(c.models));
  WeightHierarchy weights = resolve_weights(c.weights, *dataset, cfg);
  return EngineState::build(dataset, models, std::move(weights), cfg);
}

void emit(const std::string& path, const std::string& content, std::ostream& out) {
  if (path.empty() || path == "-") out << content;
  else write_text_file(path, content);
}

void add_common(CLI::App* cmd, Common& c, bool with_models, bool with_weights) {
  cmd->add_option("--snapshot", c.snapshot, "Dataset snapshot written by ingest");
  if (with_models) cmd->add_option("--models", c.models, "Model snapshot written by train");
  if (with_weights) {
    cmd->add_option("--weights", c.weights, "reference, derived, or a weights file");
    cmd->add_option("--policy", c.policy, "Missing-data policy: zero or renorm");
  }
  cmd->add_option("--config", c.config, "Engine config file");
}

std::string coverage_text(const CoverageProfile& p) {
  std::string s = "discipline,books,reviews,citations,contexts,holdings\n";
  auto row = [&](const CoverageRow& r) {
    s += r.discipline + "," + std::to_string(r.books) + "," + std::to_string(r.reviews) + "," +
         std::to_string(r.citations) + "," + std::to_string(r.contexts) + "," + std::to_string(r.holdings) + "\n";
  };
  for (const auto& r : p.rows) row(r);
  row(p.total);
  return s;
}

std::string correlation_cell(const std::function<CorrelationResult()>& compute) {
  try {
    const CorrelationResult r = compute();
    char buf[96];
    std::snprintf(buf, sizeof buf, "%.3f (n=%d, p=%.4f, %s)", r.coefficient, r.n, r.p_value,
                  std::string(to_string(r.significance)).c_str());
    return buf;
  } catch (const Error& e) {
    return "n/a (" + std::string(to_string(e.kind())) + ")";
  }
}

std::string validation_text(const EngineState& s, const CorrelationOptions& opts) {
  std::string out;
  const ValidationReport report = validate_dataset(*s.dataset);
  out += "dataset: " + std::to_string(report.errors.size()) + " errors, " + std::to_string(report.warnings.size()) +
         " warnings\n";
  for (const auto& e : report.errors) out += "  error " + e.locator + ": " + e.message + "\n";

  out += "\nSpearman correlation with expert impact scores\n";
  out += "  overall: " + correlation_cell([&] { return validate_against_experts(s.scores, *s.dataset, std::nullopt, opts); }) + "\n";
  for (const auto& src : kSources)
    out += "  " + std::string(src.key) + ": " +
           correlation_cell([&] { return per_source_validation(s.scores, *s.dataset, src.source, std::nullopt, opts); }) +
           "\n";

  out += "\nPer discipline\n";
  std::vector<std::string> names;
  for (auto k : kFixedDisciplines) names.push_back(Discipline{k, {}}.name());
  for (const auto& b : s.dataset->books)
    if (std::find(names.begin(), names.end(), b.discipline.name()) == names.end()) names.push_back(b.discipline.name());
  for (const auto& name : names) {
    out += "  " + name + "\n    overall: " +
           correlation_cell([&] { return validate_against_experts(s.scores, *s.dataset, name, opts); }) + "\n";
    for (const auto& src : kSources)
      out += "    " + std::string(src.key) + ": " +
             correlation_cell([&] { return per_source_validation(s.scores, *s.dataset, src.source, name, opts); }) +
             "\n";
  }
  return out;
}

std::string ranking_text(std::span<const RankedEntry> ranking, const RankKey& key, const Dataset& dataset) {
  std::string out = "rank,isbn," + rank_key_name(key) + ",title\n";
  char buf[64];
  for (const auto& e : ranking) {
    std::snprintf(buf, sizeof buf, "%.12f", e.value);
    const BookRecord* b = dataset.find_book(e.isbn);
    out += std::to_string(e.rank) + "," + e.isbn + "," + buf + "," + (b ? b->title : std::string()) + "\n";
  }
  return out;
}

std::string weights_text(const WeightHierarchy& h) {
  std::string out;
  char buf[128];
  for (const auto& src : kSources) {
    std::snprintf(buf, sizeof buf, "%-10s %.4f\n", std::string(src.key).c_str(), h.weight(src.source));
    out += buf;
    for (int j = 0; j < src.metric_count; ++j) {
      const auto& m = kMetrics[static_cast<std::size_t>(src.first_metric + j)];
      std::snprintf(buf, sizeof buf, "  %-22s %.4f\n", std::string(m.key).c_str(), h.weight(m.id));
      out += buf;
    }
  }
  for (const auto& d : h.consistency) {
    std::snprintf(buf, sizeof buf, "CR %-10s n=%d respondents=%d lambda=%.6f CR=%.4f%s\n", d.level.c_str(), d.size,
                  d.respondents, d.lambda_max, d.cr, d.inconsistent ? " (inconsistent)" : "");
    out += buf;
  }
  return out;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multi-source book impact scoring", "bookimpact"};
  app.require_subcommand(1);

  Common common;

  auto* ingest = app.add_subcommand("ingest", "Load record files into a dataset snapshot");
  std::string manifest, ingest_out = "dataset.json";
  ingest->add_option("--manifest", manifest, "Ingest manifest (JSON)")->required();
  ingest->add_option("--out", ingest_out, "Snapshot path");

  auto* train = app.add_subcommand("train", "Fit topic models and classifiers");
  std::string train_out = "models.json";
  std::optional<int> k, iters;
  std::optional<std::uint64_t> seed;
  std::optional<double> tau;
  bool per_discipline = false;
  add_common(train, common, false, false);
  train->add_option("--out", train_out, "Model snapshot path");
  train->add_option("--k", k, "Topic count");
  train->add_option("--seed", seed, "Random seed");
  train->add_option("--iters", iters, "Gibbs iterations");
  train->add_option("--tau", tau, "Topic activity threshold");
  train->add_flag("--per-discipline", per_discipline, "Fit one TOC topic model per discipline");

  auto* weights = app.add_subcommand("weights", "Derive weights from the questionnaire or emit the reference set");
  bool reference = false;
  std::string questionnaire, weights_out;
  add_common(weights, common, false, false);
  weights->add_flag("--reference", reference, "Emit the reference weights");
  weights->add_option("--questionnaire", questionnaire, "Metric questionnaire file (default: from snapshot)");
  weights->add_option("--out", weights_out, "Weights file (default: stdout)");

  auto* score = app.add_subcommand("score", "Score every book");
  std::string score_out, metrics_out;
  add_common(score, common, true, true);
  score->add_option("--out", score_out, "Score table path (default: stdout)");
  score->add_option("--metrics-out", metrics_out, "Raw metric table path");

  auto* rank = app.add_subcommand("rank", "Rank books by a key");
  std::string rank_key = "total", rank_out;
  add_common(rank, common, true, true);
  rank->add_option("--key", rank_key, "total, content, review, citation, usage or a metric id");
  rank->add_option("--out", rank_out, "Output path (default: stdout)");

  auto* report = app.add_subcommand("report", "Per-book report");
  std::string isbn, report_format = "text", report_out;
  add_common(report, common, true, true);
  report->add_option("--isbn", isbn, "Book isbn")->required();
  report->add_option("--format", report_format, "text or json")->check(CLI::IsMember({"text", "json"}));
  report->add_option("--out", report_out, "Output path (default: stdout)");

  auto* validate = app.add_subcommand("validate", "Dataset checks and correlation with expert scores");
  bool exact = false;
  add_common(validate, common, true, true);
  validate->add_flag("--exact", exact, "Exact permutation p-values (N <= 9)");

  auto* serve = app.add_subcommand("serve", "Start the HTTP service");
  int port = 8080;
  std::string host = "127.0.0.1";
  add_common(serve, common, true, true);
  serve->add_option("--port", port, "Port");
  serve->add_option("--host", host, "Bind address");

  std::vector<const char*> argv{"bookimpact"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    if (ingest->parsed()) {
      std::vector<std::string> warnings;
      const Dataset d = load_dataset(IngestManifest::from_file(manifest), &warnings);
      for (const auto& w : warnings) err << "warning: " << w << "\n";
      const ValidationReport v = validate_dataset(d);
      for (const auto& e : v.errors) err << "invalid " << e.locator << ": " << e.message << "\n";
      save_snapshot(d, ingest_out);
      out << coverage_text(coverage_profile(d));
      return v.ok() ? 0 : 3;
    }
    if (train->parsed()) {
      EngineConfig cfg = load_config(common);
      for (auto* p : {&cfg.train.toc, &cfg.train.citation}) {
        if (k) p->topic_count = *k;
        if (seed) p->seed = *seed;
        if (iters) p->iterations = *iters;
        if (tau) p->tau = *tau;
      }
      if (per_discipline) cfg.train.per_discipline_toc = true;
      const Dataset d = load_snapshot(common.snapshot);
      std::vector<std::string> warnings;
      const ModelBundle m = train_models(d, cfg.train, &warnings);
      for (const auto& w : warnings) err << "warning: " << w << "\n";
      save_models(m, train_out);
      return 0;
    }
    if (weights->parsed()) {
      const EngineConfig cfg = load_config(common);
      WeightHierarchy h;
      if (reference) {
        h = reference_weights();
      } else if (!questionnaire.empty()) {
        h = derive_weights(parse_metric_questionnaire(read_text_file(questionnaire), questionnaire), cfg.consistency);
      } else {
        h = derive_weights(load_snapshot(common.snapshot).expert_metric_ratings, cfg.consistency);
      }
      for (const auto& w : h.warnings) err << "warning: " << w << "\n";
      if (weights_out.empty()) {
        out << weights_to_json(h);
      } else {
        save_weights(h, weights_out);
        out << weights_text(h);
      }
      return 0;
    }
    if (score->parsed()) {
      const auto s = load_state(common);
      if (!metrics_out.empty()) write_text_file(metrics_out, metric_table_csv(s->vectors));
      emit(score_out, score_table_csv(s->scores), out);
      return 0;
    }
    if (rank->parsed()) {
      const auto s = load_state(common);
      const RankKey key = parse_rank_key(rank_key);
      emit(rank_out, ranking_text(rank_books(s->scores, key), key, *s->dataset), out);
      return 0;
    }
    if (report->parsed()) {
      const auto s = load_state(common);
      const BookReport r = book_report(isbn, *s->dataset, s->scores, s->analyses);
      emit(report_out, report_format == "json" ? report_to_json(r) : render_report_text(r), out);
      return 0;
    }
    if (validate->parsed()) {
      const auto s = load_state(common);
      out << validation_text(*s, CorrelationOptions{exact});
      return 0;
    }
    if (serve->parsed()) {
      Engine engine(load_state(common));
      err << "serving on http://" << host << ":" << port << "\n";
      if (!serve_http(engine, host, port)) {
        err << "error: cannot bind " << host << ":" << port << "\n";
        return 4;
      }
      return 0;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code(e.kind());
  }
  return 1;
}

}  // namespace bookimpact
