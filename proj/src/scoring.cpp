#include "bookimpact/scoring.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

namespace bookimpact {

std::string_view to_string(MissingPolicy p) { return p == MissingPolicy::ZeroFill ? "zero" : "renorm"; }

MissingPolicy parse_missing_policy(std::string_view s) {
  if (s == "zero" || s == "zerofill" || s == "ZeroFill") return MissingPolicy::ZeroFill;
  if (s == "renorm" || s == "renormalize" || s == "Renormalize") return MissingPolicy::Renormalize;
  fail(ErrorKind::InvalidArgument, "unknown missing-data policy '" + std::string(s) + "'");
}

double normalization_input(MetricId id, double raw, const ScoringConfig& config) {
  double x = raw;
  if (id == MetricId::AspectSatisfaction) x = (x + 1.0) / 2.0;
  return x / config.prescale(index_of(id));
}

ImpactScore impact_score(const MetricVector& vector, const MetricValues& weights, const ScoringConfig& config,
                         WeightProvenance provenance) {
  if ((weights.array() < 0).any() || !weights.allFinite())
    fail(ErrorKind::InvalidWeights, "weights must be nonnegative and finite");
  if (!(config.prescale.array() > 0).all()) fail(ErrorKind::InvalidArgument, "prescale divisors must be positive");

  ImpactScore s;
  s.isbn = vector.isbn;
  s.present = vector.present;
  s.policy = config.policy;
  s.provenance = provenance;

  for (int j = 0; j < kMetricCount; ++j)
    if (vector.present(j))
      s.normalized(j) = normalize(normalization_input(static_cast<MetricId>(j), vector.values(j), config));

  if (config.policy == MissingPolicy::ZeroFill) {
    s.effective_weights = weights;
  } else {
    const MetricValues kept = vector.present.select(weights, MetricValues::Zero());
    const double mass = kept.sum();
    if (!(mass > 0)) fail(ErrorKind::NoPresentMetrics, "book " + vector.isbn + " has no weighted evidence");
    s.effective_weights = kept / mass;
  }

  const MetricValues contributions = s.normalized.cwiseProduct(s.effective_weights);
  for (const auto& src : kSources)
    s.subscores(index_of(src.source)) = contributions.segment(src.first_metric, src.metric_count).sum();
  s.total = contributions.sum();
  return s;
}

ImpactScore impact_score(const MetricVector& vector, const WeightHierarchy& weights, const ScoringConfig& config) {
  return impact_score(vector, weights.global, config, weights.provenance);
}

double source_subscore(const ImpactScore& score, Source source) { return score.subscores(index_of(source)); }

RankKey parse_rank_key(std::string_view s) {
  if (s == "total") return std::monostate{};
  if (auto src = source_from_key(s)) return *src;
  if (auto m = metric_from_key(s)) return *m;
  fail(ErrorKind::InvalidArgument, "unknown ranking key '" + std::string(s) + "'");
}

std::string rank_key_name(const RankKey& key) {
  if (std::holds_alternative<Source>(key)) {
    switch (std::get<Source>(key)) {
      case Source::Content: return "content";
      case Source::Review: return "review";
      case Source::Citation: return "citation";
      case Source::Usage: return "usage";
    }
  }
  if (std::holds_alternative<MetricId>(key)) return std::string(info(std::get<MetricId>(key)).key);
  return "total";
}

double key_value(const ImpactScore& score, const RankKey& key) {
  if (std::holds_alternative<Source>(key)) return source_subscore(score, std::get<Source>(key));
  if (std::holds_alternative<MetricId>(key)) return score.normalized(index_of(std::get<MetricId>(key)));
  return score.total;
}

std::vector<RankedEntry> rank_books(std::span<const ImpactScore> scores, const RankKey& key) {
  std::vector<RankedEntry> out;
  for (const auto& s : scores) {
    if (std::holds_alternative<MetricId>(key) && !s.present(index_of(std::get<MetricId>(key)))) continue;
    out.push_back({s.isbn, key_value(s, key), 0});
  }
  std::sort(out.begin(), out.end(), [](const RankedEntry& a, const RankedEntry& b) {
    if (a.value != b.value) return a.value > b.value;
    return a.isbn < b.isbn;
  });
  int rank = 0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (i == 0 || out[i].value != out[i - 1].value) ++rank;
    out[i].rank = rank;
  }
  return out;
}

std::vector<ImpactScore> score_books(std::span<const MetricVector> vectors, const MetricValues& weights,
                                     const ScoringConfig& config, WeightProvenance provenance) {
  std::vector<ImpactScore> scores;
  scores.reserve(vectors.size());
  for (const auto& v : vectors) scores.push_back(impact_score(v, weights, config, provenance));
  const auto ranking = rank_books(scores);
  std::map<std::string, int> rank_of;
  for (const auto& e : ranking) rank_of[e.isbn] = e.rank;
  for (auto& s : scores) s.rank = rank_of[s.isbn];
  std::sort(scores.begin(), scores.end(), [](const ImpactScore& a, const ImpactScore& b) {
    return a.rank != b.rank ? a.rank < b.rank : a.isbn < b.isbn;
  });
  return scores;
}

std::string score_table_csv(std::span<const ImpactScore> scores) {
  std::ostringstream out;
  out << "isbn";
  for (const auto& m : kMetrics) out << ",nor_" << m.key;
  out << ",s_content,s_review,s_citation,s_usage,total,rank\n";
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.12f", v);
    out << ',' << buf;
  };
  for (const auto& s : scores) {
    out << s.isbn;
    for (int j = 0; j < kMetricCount; ++j) num(s.normalized(j));
    for (int k = 0; k < kSourceCount; ++k) num(s.subscores(k));
    num(s.total);
    out << ',' << s.rank << '\n';
  }
  return out.str();
}

}  // namespace bookimpact
