#pragma once

// Shared vocabulary: Eigen aliases, the 15-metric hierarchy and the error type.

#include <Eigen/Dense>

#include <array>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace bookimpact {

inline constexpr int kMetricCount = 15;
inline constexpr int kSourceCount = 4;

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using MetricArray = Eigen::Matrix<Scalar, kMetricCount, 1>;
template <typename Scalar>
using SourceArray = Eigen::Matrix<Scalar, kSourceCount, 1>;

using VectorXd = VectorX<double>;
using MatrixXd = MatrixX<double>;
using MetricValues = MetricArray<double>;
using MetricFlags = Eigen::Array<bool, kMetricCount, 1>;
using SourceValues = SourceArray<double>;

// Evaluation resources, in the order of the metric hierarchy.
enum class Source { Content = 0, Review = 1, Citation = 2, Usage = 3 };

// The 15 secondary metrics, top to bottom in the hierarchy.
enum class MetricId {
  TocDepth = 0,
  TocBreadth,
  PosReviews,
  NegReviews,
  StarRating,
  AspectSatisfaction,
  CitationFrequency,
  CitlitDepth,
  CitlitBreadth,
  CitationIntensity,
  CitationFunction,
  HoldingNumber,
  HoldingRegion,
  HoldingDistribution,
  Sale,
};

struct MetricInfo {
  MetricId id;
  std::string_view key;    // machine id used in files and payloads
  std::string_view label;  // human label used in reports
  Source source;
};

inline constexpr std::array<MetricInfo, kMetricCount> kMetrics{{
    {MetricId::TocDepth, "toc_depth", "TOC depth", Source::Content},
    {MetricId::TocBreadth, "toc_breadth", "TOC breadth", Source::Content},
    {MetricId::PosReviews, "pos_reviews", "#positive reviews", Source::Review},
    {MetricId::NegReviews, "neg_reviews", "#negative reviews", Source::Review},
    {MetricId::StarRating, "star_rating", "Star rating", Source::Review},
    {MetricId::AspectSatisfaction, "aspect_satisfaction", "Aspect satisfaction", Source::Review},
    {MetricId::CitationFrequency, "citation_frequency", "#citations", Source::Citation},
    {MetricId::CitlitDepth, "citlit_depth", "Citation literature depth", Source::Citation},
    {MetricId::CitlitBreadth, "citlit_breadth", "Citation literature breadth", Source::Citation},
    {MetricId::CitationIntensity, "citation_intensity", "Citation intensity", Source::Citation},
    {MetricId::CitationFunction, "citation_function", "Citation function", Source::Citation},
    {MetricId::HoldingNumber, "holding_number", "Library holding number", Source::Usage},
    {MetricId::HoldingRegion, "holding_region", "Library holding region", Source::Usage},
    {MetricId::HoldingDistribution, "holding_distribution", "Library holding distribution", Source::Usage},
    {MetricId::Sale, "sale", "Sale", Source::Usage},
}};

struct SourceInfo {
  Source source;
  std::string_view key;
  int first_metric;
  int metric_count;
};

inline constexpr std::array<SourceInfo, kSourceCount> kSources{{
    {Source::Content, "contents", 0, 2},
    {Source::Review, "reviews", 2, 4},
    {Source::Citation, "citations", 6, 5},
    {Source::Usage, "usages", 11, 4},
}};

constexpr int index_of(MetricId id) { return static_cast<int>(id); }
constexpr int index_of(Source s) { return static_cast<int>(s); }
constexpr const MetricInfo& info(MetricId id) { return kMetrics[static_cast<std::size_t>(id)]; }
constexpr const SourceInfo& info(Source s) { return kSources[static_cast<std::size_t>(s)]; }
constexpr Source source_of(MetricId id) { return info(id).source; }

std::optional<MetricId> metric_from_key(std::string_view key);
std::optional<Source> source_from_key(std::string_view key);

// Error classes. Each maps to a CLI exit code and an HTTP status.
enum class ErrorKind {
  InvalidArgument,
  MalformedRecord,
  DuplicateKey,
  MissingMandatoryFile,
  IoFailure,
  VersionMismatch,
  UnknownProfile,
  EmptyDocument,
  DegenerateCorpus,
  MissingClass,
  NotADistribution,
  NegativeInput,
  NoPresentMetrics,
  MissingRating,
  DimensionMismatch,
  NonConvergence,
  InvalidMatrix,
  LengthMismatch,
  ZeroVariance,
  InsufficientData,
  InsufficientOverlap,
  UnknownBook,
  InvalidWeights,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) { throw Error(kind, message); }

}  // namespace bookimpact
