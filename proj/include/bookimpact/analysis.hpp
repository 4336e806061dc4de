#pragma once

// Validation against expert judgement and per-book / per-discipline reporting.

#include "bookimpact/core.hpp"
#include "bookimpact/datamodel.hpp"
#include "bookimpact/metrics.hpp"
#include "bookimpact/scoring.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace bookimpact {

enum class CorrelationMethod { Spearman, Pearson };
enum class Significance { None, P05, P01 };

std::string_view to_string(CorrelationMethod m);
std::string_view to_string(Significance s);

struct CorrelationResult {
  double coefficient = 0;
  int n = 0;
  CorrelationMethod method = CorrelationMethod::Pearson;
  double p_value = 1;
  Significance significance = Significance::None;
};

struct CorrelationOptions {
  // Exact two-sided permutation p-value instead of the t approximation (N <= 9 only).
  bool exact_permutation = false;
};

// Average ranks (1-based) with ties sharing the mean of their positions.
template <typename Derived>
VectorXd average_ranks(const Eigen::MatrixBase<Derived>& x) {
  const Eigen::Index n = x.size();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return x(a) < x(b); });
  VectorXd ranks(n);
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && x(order[j + 1]) == x(order[i])) ++j;
    const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks(order[k]) = avg;
    i = j + 1;
  }
  return ranks;
}

// Two-sided p-value of the t statistic for a correlation r with n - 2 degrees of freedom.
double correlation_p_value(double r, int n);

CorrelationResult pearson(std::span<const double> x, std::span<const double> y, const CorrelationOptions& opts = {});
CorrelationResult spearman(std::span<const double> x, std::span<const double> y, const CorrelationOptions& opts = {});

// Spearman between per-book expert means and total scores (or one source subscore).
// discipline filters by Discipline::name() when set. Throws InsufficientOverlap below 2 books.
CorrelationResult validate_against_experts(std::span<const ImpactScore> scores, const Dataset& dataset,
                                           const std::optional<std::string>& discipline = std::nullopt,
                                           const CorrelationOptions& opts = {});
CorrelationResult per_source_validation(std::span<const ImpactScore> scores, const Dataset& dataset, Source source,
                                        const std::optional<std::string>& discipline = std::nullopt,
                                        const CorrelationOptions& opts = {});

struct ConversionEstimate {
  double k = 0;  // breadth ~ -k * depth + c
  double pearson_r = 0;
  double spearman_rho = 0;
  int n = 0;
};

ConversionEstimate depth_breadth_conversion(std::span<const double> depth, std::span<const double> breadth);
// Uses normalized TOC depth / breadth of books with both present.
ConversionEstimate depth_breadth_conversion(std::span<const ImpactScore> scores);

struct DisciplineHistogram {
  std::string discipline;
  std::vector<int> counts;
  std::vector<double> proportions;
  int books = 0;
};

struct DisciplineSummary {
  std::vector<double> edges;  // bins [edges[i], edges[i+1])
  std::vector<DisciplineHistogram> rows;
  std::vector<std::string> warnings;
};

DisciplineSummary discipline_summary(std::span<const ImpactScore> scores, const Dataset& dataset,
                                     std::vector<double> edges = {0.3, 0.4, 0.5, 0.6, 0.7});

struct AspectExtremes {
  std::string most_satisfied;
  double most_satisfied_value = 0;
  std::string least_satisfied;
  double least_satisfied_value = 0;
  std::string most_mentioned;
  int most_mentioned_count = 0;
  std::string least_mentioned;
  int least_mentioned_count = 0;
};

struct BookReport {
  std::string isbn;
  std::string title;
  std::string discipline;
  int overall_rank = 0;
  double total = 0;
  SourceValues subscores = SourceValues::Zero();
  std::array<std::optional<int>, kMetricCount> metric_ranks{};  // nullopt: no data
  MetricVector raw;

  bool has_reviews = false;
  double positive_share = 0;
  double negative_share = 0;
  std::array<int, 5> star_histogram{};
  std::array<double, 5> star_shares{};
  std::map<std::string, AspectTally> aspects;
  std::optional<AspectExtremes> aspect_extremes;

  bool has_citations = false;
  std::map<int, double> intensity_shares;
  bool has_functions = false;
  std::array<double, 3> function_shares{};

  bool has_holdings = false;
  std::vector<std::pair<std::string, int>> holdings_by_region;
  std::optional<int> sale_rank;
  std::optional<double> sale_reordered;
};

// Extremes over aspects with at least one mention; ties go to the smaller aspect id.
std::optional<AspectExtremes> aspect_extremes(const std::map<std::string, AspectTally>& aspects);

// Throws UnknownBook when the isbn is not scored.
BookReport book_report(const std::string& isbn, const Dataset& dataset, std::span<const ImpactScore> scores,
                       std::span<const BookAnalysis> analyses);

std::string render_report_text(const BookReport& report);

}  // namespace bookimpact
