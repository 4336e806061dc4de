#pragma once

// Engine state shared by the command line and the HTTP API.

#include "bookimpact/ahp.hpp"
#include "bookimpact/analysis.hpp"
#include "bookimpact/datamodel.hpp"
#include "bookimpact/metrics.hpp"
#include "bookimpact/scoring.hpp"
#include "bookimpact/textmine.hpp"

#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

namespace bookimpact {

struct EngineConfig {
  TrainConfig train;
  MissingPolicy policy = MissingPolicy::ZeroFill;
  MetricValues prescale = MetricValues::Ones();
  std::vector<double> intervals{0.3, 0.4, 0.5, 0.6, 0.7};
  ConsistencyConfig consistency;
  int aspect_window = 3;

  ScoringConfig scoring() const { return {policy, prescale}; }

  // Missing keys keep their defaults. Keys: topic_count, toc_topic_count, citation_topic_count,
  // tau, seed, iterations, alpha, beta, per_discipline_toc, policy, intervals, random_index,
  // consistency_threshold, prescale, aspect_window.
  static EngineConfig parse(std::string_view json_text);
  static EngineConfig from_file(const std::string& path);
  std::string to_json() const;
};

// Immutable published state: every score is consistent with dataset, models and weights.
struct EngineState {
  std::shared_ptr<const Dataset> dataset;
  std::shared_ptr<const ModelBundle> models;
  EngineConfig config;
  WeightHierarchy weights;
  std::vector<BookAnalysis> analyses;  // isbn order
  std::vector<MetricVector> vectors;   // isbn order
  std::vector<ImpactScore> scores;     // rank order

  static std::shared_ptr<const EngineState> build(std::shared_ptr<const Dataset> dataset,
                                                  std::shared_ptr<const ModelBundle> models,
                                                  WeightHierarchy weights, EngineConfig config);

  // Same dataset and models, rescored under new weights.
  std::shared_ptr<const EngineState> with_weights(WeightHierarchy weights) const;

  // Pure rescoring used by what-if requests.
  std::vector<ImpactScore> rescore(const MetricValues& weights, const ScoringConfig& scoring) const;
};

// Holds the published state; readers take a shared snapshot, writers swap whole states.
class Engine {
 public:
  explicit Engine(std::shared_ptr<const EngineState> state);

  std::shared_ptr<const EngineState> state() const;

  // Returns false while another replacement is running.
  bool try_begin_replace();
  void publish(std::shared_ptr<const EngineState> next);
  void abandon_replace();

 private:
  mutable std::mutex mutex_;
  std::shared_ptr<const EngineState> state_;
  bool replacing_ = false;
};

struct ApiResponse {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

// Routes one request; the HTTP server delegates here.
ApiResponse handle_request(Engine& engine, std::string_view method, std::string_view path,
                           const std::map<std::string, std::string>& query, std::string_view body);

// JSON renderings shared by the CLI and the API.
std::string report_to_json(const BookReport& report);
std::string ranking_to_json(std::span<const RankedEntry> ranking, const RankKey& key);
std::string summary_to_json(const DisciplineSummary& summary);

// Blocks serving on host:port until stop_server is called from another thread.
// Returns false when the port cannot be bound.
bool serve_http(Engine& engine, const std::string& host, int port);
void stop_server();

// Exit status for an error class: 3 input data, 4 I/O, 5 model or weights, 6 analysis,
// 7 unknown book, 1 anything else. Usage errors exit 2.
int exit_code(ErrorKind kind);

// Command-line driver; args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace bookimpact
