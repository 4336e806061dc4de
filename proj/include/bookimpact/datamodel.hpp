#pragma once

// Canonical domain records and dataset-level validation.

#include "bookimpact/core.hpp"
#include "bookimpact/lexicon.hpp"

#include <compare>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace bookimpact {

enum class DisciplineKind { ComputerScience, Literature, Law, Medicine, SportScience, Other };

struct Discipline {
  DisciplineKind kind = DisciplineKind::Other;
  std::string other_name;  // only meaningful for Other

  static Discipline parse(std::string_view name);
  std::string name() const;

  auto operator<=>(const Discipline&) const = default;
};

inline constexpr std::array<DisciplineKind, 5> kFixedDisciplines{
    DisciplineKind::ComputerScience, DisciplineKind::Literature, DisciplineKind::Law,
    DisciplineKind::Medicine, DisciplineKind::SportScience};

enum class Polarity { Positive, Negative };
enum class CitationFunction { Background, Comparison, Use };

std::string_view to_string(Polarity p);
std::string_view to_string(CitationFunction f);
std::optional<Polarity> parse_polarity(std::string_view s);
std::optional<CitationFunction> parse_citation_function(std::string_view s);

// Background -> 1, Comparison -> 2, Use -> 3.
constexpr int function_score(CitationFunction f) { return static_cast<int>(f) + 1; }

struct BookRecord {
  std::string isbn;
  std::string title;
  Discipline discipline;
  int page_count = 1;
  std::string toc_text;
  std::optional<int> publication_year;

  bool operator==(const BookRecord&) const = default;
};

struct AspectLabel {
  std::string aspect;
  int polarity = 1;  // +1 or -1

  bool operator==(const AspectLabel&) const = default;
};

struct Review {
  std::string isbn;
  std::string review_id;
  int star = 0;
  std::string text;
  std::optional<Polarity> polarity_label;
  std::optional<std::vector<AspectLabel>> aspect_labels;

  bool operator==(const Review&) const = default;
};

struct CitationContext {
  std::string lit_id;
  std::string isbn;
  std::string window_text;
  std::optional<CitationFunction> function_label;

  bool operator==(const CitationContext&) const = default;
};

struct CitingLiterature {
  std::string isbn;
  std::string lit_id;
  std::string title;
  int year = 0;
  std::string body_text;
  int intensity = 1;
  std::vector<CitationContext> contexts;

  bool operator==(const CitingLiterature&) const = default;
};

struct HoldingsRecord {
  std::string isbn;
  std::map<std::string, int> per_region;

  bool operator==(const HoldingsRecord&) const = default;
};

struct SaleRecord {
  std::string isbn;
  int sale_rank = 1;

  bool operator==(const SaleRecord&) const = default;
};

struct ExpertMetricRating {
  std::string respondent_id;
  std::map<std::string, int> ratings;  // metric or primary-group id -> 1..5

  bool operator==(const ExpertMetricRating&) const = default;
};

struct ExpertBookScore {
  std::string respondent_id;
  std::string isbn;
  int impact = 0;

  bool operator==(const ExpertBookScore&) const = default;
};

struct Dataset {
  std::vector<BookRecord> books;
  std::vector<Review> reviews;
  std::vector<CitingLiterature> citing_literatures;
  std::vector<HoldingsRecord> holdings;
  std::vector<SaleRecord> sales;
  std::vector<ExpertMetricRating> expert_metric_ratings;
  std::vector<ExpertBookScore> expert_book_scores;
  AspectLexicon aspect_lexicon;
  std::string tokenizer_profile = "whitespace-punct";

  const BookRecord* find_book(std::string_view isbn) const;

  // Sorts every collection by its key so equal content compares equal.
  void canonicalize();

  bool operator==(const Dataset&) const = default;
};

// Trims and upper-cases a region code.
std::string normalize_region(std::string_view code);

struct Issue {
  std::string locator;  // e.g. "review r12", "book 978..."
  std::string message;

  bool operator==(const Issue&) const = default;
};

struct ValidationReport {
  std::vector<Issue> errors;
  std::vector<Issue> warnings;

  bool ok() const { return errors.empty(); }
  bool operator==(const ValidationReport&) const = default;
};

ValidationReport validate_dataset(const Dataset& dataset);

struct CoverageRow {
  std::string discipline;
  int books = 0;
  int reviews = 0;
  int citations = 0;
  int contexts = 0;
  int holdings = 0;  // (book, region) holding entries

  bool operator==(const CoverageRow&) const = default;
};

struct CoverageProfile {
  std::vector<CoverageRow> rows;  // five fixed disciplines first, then Other(name) rows by name
  CoverageRow total;

  const CoverageRow* row(std::string_view discipline) const;
  bool operator==(const CoverageProfile&) const = default;
};

CoverageProfile coverage_profile(const Dataset& dataset);

}  // namespace bookimpact
