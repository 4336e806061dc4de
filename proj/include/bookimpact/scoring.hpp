#pragma once

// Normalization, weighted fusion and ranking of metric vectors.

#include "bookimpact/ahp.hpp"
#include "bookimpact/core.hpp"
#include "bookimpact/metrics.hpp"

#include <cmath>
#include <concepts>
#include <numbers>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace bookimpact {

// 2 atan(x) / pi, mapping [0, inf) onto [0, 1). Throws NegativeInput for x < 0.
template <std::floating_point Scalar>
Scalar normalize(Scalar raw) {
  using std::atan;
  if (raw < Scalar(0)) fail(ErrorKind::NegativeInput, "normalize expects a nonnegative score");
  return Scalar(2) * atan(raw) / std::numbers::pi_v<Scalar>;
}

template <typename Derived>
auto normalize(const Eigen::ArrayBase<Derived>& raw) {
  using Scalar = typename Derived::Scalar;
  if ((raw < Scalar(0)).any()) fail(ErrorKind::NegativeInput, "normalize expects nonnegative scores");
  return (Scalar(2) / std::numbers::pi_v<Scalar>) * raw.atan();
}

enum class MissingPolicy { ZeroFill, Renormalize };
std::string_view to_string(MissingPolicy p);
MissingPolicy parse_missing_policy(std::string_view s);  // "zero" | "renorm" (and long names)

struct ScoringConfig {
  MissingPolicy policy = MissingPolicy::ZeroFill;
  MetricValues prescale = MetricValues::Ones();  // raw / divisor before normalization
};

struct ImpactScore {
  std::string isbn;
  MetricValues normalized = MetricValues::Zero();
  MetricFlags present = MetricFlags::Constant(false);
  MetricValues effective_weights = MetricValues::Zero();
  SourceValues subscores = SourceValues::Zero();
  double total = 0;
  int rank = 0;
  MissingPolicy policy = MissingPolicy::ZeroFill;
  WeightProvenance provenance = WeightProvenance::Custom;
  bool aspect_shifted = true;  // aspect satisfaction mapped (S + 1) / 2 before normalization
};

// Raw metric value as fed to the normalization (after the aspect shift and prescale).
double normalization_input(MetricId id, double raw, const ScoringConfig& config);

ImpactScore impact_score(const MetricVector& vector, const MetricValues& weights, const ScoringConfig& config = {},
                         WeightProvenance provenance = WeightProvenance::Custom);
ImpactScore impact_score(const MetricVector& vector, const WeightHierarchy& weights, const ScoringConfig& config = {});

double source_subscore(const ImpactScore& score, Source source);

// Ranking key: overall total, one source subscore, or one metric's normalized score.
using RankKey = std::variant<std::monostate, Source, MetricId>;
RankKey parse_rank_key(std::string_view s);  // total | content | review | citation | usage | <metric key>
std::string rank_key_name(const RankKey& key);
double key_value(const ImpactScore& score, const RankKey& key);

struct RankedEntry {
  std::string isbn;
  double value = 0;
  int rank = 0;

  bool operator==(const RankedEntry&) const = default;
};

// Descending by key with dense ranks; ties ordered by isbn. Metric keys rank only books
// where that metric is present.
std::vector<RankedEntry> rank_books(std::span<const ImpactScore> scores, const RankKey& key = {});

// Scores every vector and assigns overall ranks; result ordered by rank then isbn.
std::vector<ImpactScore> score_books(std::span<const MetricVector> vectors, const MetricValues& weights,
                                     const ScoringConfig& config = {},
                                     WeightProvenance provenance = WeightProvenance::Custom);

// isbn, 15 normalized columns, 4 subscores, total, rank.
std::string score_table_csv(std::span<const ImpactScore> scores);

}  // namespace bookimpact
