#pragma once

// The 15 raw book metrics, grouped by evaluation resource.

#include "bookimpact/core.hpp"
#include "bookimpact/datamodel.hpp"
#include "bookimpact/textmine.hpp"

#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace bookimpact {

// -(1 / ln n) * sum p ln p over the n positive entries of p. A distribution with a
// single positive entry scores 0. Throws NotADistribution for negative entries or
// a sum further than 1e-9 from 1.
template <typename Derived>
typename Derived::Scalar normalized_entropy(const Eigen::MatrixBase<Derived>& p) {
  using Scalar = typename Derived::Scalar;
  using std::abs;
  using std::log;
  if (p.size() == 0) fail(ErrorKind::NotADistribution, "empty distribution");
  if ((p.array() < Scalar(0)).any()) fail(ErrorKind::NotADistribution, "negative probability");
  if (abs(p.sum() - Scalar(1)) > Scalar(1e-9)) fail(ErrorKind::NotADistribution, "probabilities do not sum to 1");
  Scalar h(0);
  Eigen::Index support = 0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (p(i) > Scalar(0)) {
      h -= p(i) * log(p(i));
      ++support;
    }
  }
  if (support <= 1) return Scalar(0);
  return h / log(Scalar(support));
}

// pages per expressed topic
inline double toc_depth(int pages, int topic_count) {
  return static_cast<double>(pages) / static_cast<double>(topic_count);
}

template <typename Derived>
typename Derived::Scalar toc_breadth(const Eigen::MatrixBase<Derived>& restricted) {
  return normalized_entropy(restricted);
}

struct MetricVector {
  std::string isbn;
  MetricValues values = MetricValues::Zero();
  MetricFlags present = MetricFlags::Constant(false);

  bool has(MetricId id) const { return present(index_of(id)); }
  double operator[](MetricId id) const { return values(index_of(id)); }
  void set(MetricId id, double v) {
    values(index_of(id)) = v;
    present(index_of(id)) = true;
  }
  void set(MetricId id, const std::optional<double>& v) {
    if (v) set(id, *v);
  }
  int present_count() const { return static_cast<int>(present.count()); }

  bool operator==(const MetricVector& o) const {
    return isbn == o.isbn && values == o.values && (present == o.present).all();
  }
};

// ---------------------------------------------------------------------------
// Reviews

struct AspectTally {
  int mentions = 0;
  int net = 0;  // sum of +-1 mention polarities

  double satisfaction() const { return static_cast<double>(net) / mentions; }
  bool operator==(const AspectTally&) const = default;
};

struct ReviewMetrics {
  int review_count = 0;
  int positive = 0;
  int negative = 0;
  std::array<int, 5> star_histogram{};
  std::map<std::string, AspectTally> aspects;

  std::optional<double> spos, sneg, sstar, saspect;
};

struct ReviewOptions {
  std::string_view tokenizer_profile = kWhitespacePunct;
  int aspect_window = 3;
};

// Gold polarity labels win over the model; without a model unlabeled reviews stay
// unclassified. Gold aspect labels replace lexicon detection for that review.
ReviewMetrics review_metrics(std::span<const Review* const> reviews, const SentimentModel* model,
                             const AspectLexicon& lexicon, const ReviewOptions& options = {});
ReviewMetrics review_metrics(std::span<const Review> reviews, const SentimentModel* model,
                             const AspectLexicon& lexicon, const ReviewOptions& options = {});

// ---------------------------------------------------------------------------
// Citations

struct CitationMetrics {
  int literature_count = 0;
  std::map<int, int> intensity_histogram;  // intensity -> literatures
  std::array<int, 3> function_counts{};    // Background, Comparison, Use
  int unscored_contexts = 0;
  VectorXd restricted_topics;  // empty when no literature carries topic text
  int active_topics = 0;

  std::optional<double> scitation, scitdepth, scitbreadth, sint, sfun;
};

// Token-length weighted mean of per-literature topic distributions.
VectorXd book_topic_distribution(std::span<const VectorXd> distributions, std::span<const double> lengths);

struct CitationOptions {
  std::string_view tokenizer_profile = kWhitespacePunct;
  double tau = -1;  // <= 0: use the topic model's tau
};

// Literatures are looked up in the topic model by "<isbn>/<lit_id>" and inferred when
// absent. Contexts without a gold label use the classifier, or stay unscored without one.
CitationMetrics citation_metrics(std::span<const CitingLiterature* const> literatures, const TopicModel* topics,
                                 const FunctionClassifier* classifier, const CitationOptions& options = {});
CitationMetrics citation_metrics(std::span<const CitingLiterature> literatures, const TopicModel* topics,
                                 const FunctionClassifier* classifier, const CitationOptions& options = {});

// ---------------------------------------------------------------------------
// Usage

struct UsageMetrics {
  std::vector<std::pair<std::string, int>> regions;  // by count desc, then region
  std::optional<int> sale_rank;                      // platform rank as ingested
  std::optional<double> sreg, snum, sdis, ssale;
};

// Position of each book in ascending platform sale rank (1 = best seller among the
// books with sale data); equal platform ranks share the smaller position.
std::map<std::string, int> reorder_sale_ranks(std::span<const SaleRecord> sales);

// sale_position is the reordered position; books_with_sale is N.
UsageMetrics usage_metrics(const HoldingsRecord* holdings, std::optional<int> sale_position, int books_with_sale,
                           std::optional<int> sale_rank = std::nullopt);

// ---------------------------------------------------------------------------
// Assembly

struct ModelBundle;

struct MetricConfig {
  int aspect_window = 3;
};

struct BookAnalysis {
  MetricVector vector;
  std::optional<int> toc_active_topics;
  ReviewMetrics reviews;
  CitationMetrics citations;
  UsageMetrics usage;
  std::vector<std::string> warnings;
};

// Per-isbn evidence lookup built once per dataset.
class EvidenceIndex {
 public:
  explicit EvidenceIndex(const Dataset& dataset);

  std::span<const Review* const> reviews(const std::string& isbn) const;
  std::span<const CitingLiterature* const> literatures(const std::string& isbn) const;
  const HoldingsRecord* holdings(const std::string& isbn) const;
  const SaleRecord* sale(const std::string& isbn) const;
  std::optional<int> sale_position(const std::string& isbn) const;
  int books_with_sale() const { return static_cast<int>(sale_positions_.size()); }

 private:
  std::map<std::string, std::vector<const Review*>> reviews_;
  std::map<std::string, std::vector<const CitingLiterature*>> literatures_;
  std::map<std::string, const HoldingsRecord*> holdings_;
  std::map<std::string, const SaleRecord*> sales_;
  std::map<std::string, int> sale_positions_;
};

BookAnalysis analyze_book(const BookRecord& book, const Dataset& dataset, const EvidenceIndex& index,
                          const ModelBundle& models, const MetricConfig& config = {});

// All books in isbn order.
std::vector<BookAnalysis> analyze_dataset(const Dataset& dataset, const ModelBundle& models,
                                          const MetricConfig& config = {});

MetricVector metric_vector(const BookRecord& book, const Dataset& dataset, const ModelBundle& models,
                           const MetricConfig& config = {});

// Delimited export: isbn, 15 metric columns, 15 presence columns (0/1).
std::string metric_table_csv(std::span<const MetricVector> vectors);

}  // namespace bookimpact
