#pragma once

// Line-oriented file ingestion and versioned JSON snapshots of datasets, models and weights.

#include "bookimpact/ahp.hpp"
#include "bookimpact/datamodel.hpp"
#include "bookimpact/textmine.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace bookimpact {

namespace fs = std::filesystem;

inline constexpr int kSnapshotVersion = 1;

struct IngestManifest {
  fs::path books;  // mandatory
  std::optional<fs::path> reviews;
  std::optional<fs::path> citations;
  std::optional<fs::path> holdings;
  std::optional<fs::path> sales;
  std::optional<fs::path> metric_questionnaire;
  std::optional<fs::path> book_questionnaire;
  std::optional<fs::path> aspect_lexicon;  // default lexicon when unset
  std::string tokenizer_profile{kWhitespacePunct};
  std::string encoding = "UTF-8";

  // JSON object; relative paths resolve against base_dir.
  static IngestManifest parse(std::string_view json_text, const fs::path& base_dir = {});
  static IngestManifest from_file(const fs::path& path);
};

std::string read_text_file(const fs::path& path);
void write_text_file(const fs::path& path, std::string_view content);

// Record parsers. `file` labels MalformedRecord messages as "<file>:<line>: ...";
// unknown fields are reported through warnings and otherwise ignored.
std::vector<BookRecord> parse_books(std::string_view text, const std::string& file,
                                    std::vector<std::string>* warnings = nullptr);
std::vector<Review> parse_reviews(std::string_view text, const std::string& file,
                                  std::vector<std::string>* warnings = nullptr);
std::vector<CitingLiterature> parse_citations(std::string_view text, const std::string& file,
                                              std::vector<std::string>* warnings = nullptr);
std::vector<HoldingsRecord> parse_holdings(std::string_view text, const std::string& file,
                                           std::vector<std::string>* warnings = nullptr);
std::vector<SaleRecord> parse_sales(std::string_view text, const std::string& file,
                                    std::vector<std::string>* warnings = nullptr);

// JSON lines when the first record starts with '{', otherwise a delimited table
// (comma or tab) whose header is respondent_id followed by item ids.
std::vector<ExpertMetricRating> parse_metric_questionnaire(std::string_view text, const std::string& file,
                                                           std::vector<std::string>* warnings = nullptr);
// Table layout: respondent_id then one column per isbn; empty cells are skipped.
std::vector<ExpertBookScore> parse_book_questionnaire(std::string_view text, const std::string& file,
                                                      std::vector<std::string>* warnings = nullptr);

// Loads and canonicalizes. Throws MissingMandatoryFile, IoFailure, MalformedRecord, DuplicateKey.
Dataset load_dataset(const IngestManifest& manifest, std::vector<std::string>* warnings = nullptr);

std::string dataset_to_json(const Dataset& dataset);
Dataset dataset_from_json(std::string_view text);
void save_snapshot(const Dataset& dataset, const fs::path& path);
Dataset load_snapshot(const fs::path& path);

std::string models_to_json(const ModelBundle& models);
ModelBundle models_from_json(std::string_view text);
void save_models(const ModelBundle& models, const fs::path& path);
ModelBundle load_models(const fs::path& path);

// Global weights keyed by metric id plus the hierarchy and diagnostics.
std::string weights_to_json(const WeightHierarchy& weights);
// Accepts the format above, or any object with "global" as a keyed object or a 15-array.
WeightHierarchy weights_from_json(std::string_view text);
void save_weights(const WeightHierarchy& weights, const fs::path& path);
WeightHierarchy load_weights(const fs::path& path);

}  // namespace bookimpact
