#include "bookimpact/ahp.hpp"

#include <algorithm>
#include <cmath>

namespace bookimpact {

namespace {
constexpr double kMinEntry = 1.0 / 9.0;
constexpr double kMaxEntry = 9.0;
}  // namespace

PairwiseMatrix::PairwiseMatrix(MatrixXd values, std::string level) : values_(std::move(values)), level_(std::move(level)) {
  const Eigen::Index n = values_.rows();
  if (n == 0 || values_.cols() != n) fail(ErrorKind::InvalidMatrix, "pairwise matrix must be square and non-empty");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::abs(values_(i, i) - 1.0) > 1e-9) fail(ErrorKind::InvalidMatrix, "diagonal entry is not 1");
    for (Eigen::Index j = 0; j < n; ++j) {
      const double a = values_(i, j);
      if (!(a >= kMinEntry - 1e-12 && a <= kMaxEntry + 1e-12))
        fail(ErrorKind::InvalidMatrix, "entry (" + std::to_string(i) + "," + std::to_string(j) + ") outside [1/9, 9]");
      if (std::abs(a * values_(j, i) - 1.0) > 1e-9) fail(ErrorKind::InvalidMatrix, "matrix is not reciprocal");
    }
  }
}

PairwiseMatrix rating_to_matrix(std::span<const int> ratings, std::string level) {
  const auto n = static_cast<Eigen::Index>(ratings.size());
  MatrixXd a(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      a(i, j) = saaty_scale(ratings[static_cast<std::size_t>(i)] - ratings[static_cast<std::size_t>(j)]);
  return PairwiseMatrix(std::move(a), std::move(level));
}

PairwiseMatrix rating_to_matrix(const std::map<std::string, int>& ratings, std::span<const std::string> items,
                                std::string level) {
  std::vector<int> values;
  for (const auto& item : items) {
    auto it = ratings.find(item);
    if (it == ratings.end()) fail(ErrorKind::MissingRating, "no rating for " + item);
    values.push_back(it->second);
  }
  return rating_to_matrix(values, std::move(level));
}

PairwiseMatrix aggregate_matrices(std::span<const PairwiseMatrix> matrices) {
  if (matrices.empty()) fail(ErrorKind::InvalidArgument, "no matrices to aggregate");
  const Eigen::Index n = matrices.front().size();
  const std::string& level = matrices.front().level();
  MatrixXd log_sum = MatrixXd::Zero(n, n);
  for (const auto& m : matrices) {
    if (m.size() != n || m.level() != level)
      fail(ErrorKind::DimensionMismatch, "matrices differ in dimension or level ('" + m.level() + "' vs '" + level + "')");
    log_sum += m.values().array().log().matrix();
  }
  const double count = static_cast<double>(matrices.size());
  MatrixXd out = MatrixXd::Ones(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double g = std::clamp(std::exp(log_sum(i, j) / count), kMinEntry, kMaxEntry);
      out(i, j) = g;
      out(j, i) = 1.0 / g;
    }
  return PairwiseMatrix(std::move(out), level);
}

Consistency consistency_ratio(double lambda_max, int n, const ConsistencyConfig& config) {
  if (n < 1) fail(ErrorKind::InvalidArgument, "matrix order must be >= 1");
  if (n <= 2) return {};
  auto it = config.random_index.find(n);
  if (it == config.random_index.end())
    fail(ErrorKind::InvalidArgument, "no random index configured for n = " + std::to_string(n));
  Consistency c;
  c.ci = (lambda_max - n) / (n - 1);
  c.cr = c.ci / it->second;
  return c;
}

std::string_view to_string(WeightProvenance p) {
  switch (p) {
    case WeightProvenance::Derived: return "derived";
    case WeightProvenance::Reference: return "reference";
    case WeightProvenance::Custom: return "custom";
  }
  return "custom";
}

WeightHierarchy WeightHierarchy::from_global(const MetricValues& global, WeightProvenance provenance) {
  if (!(global.array() > 0).all() || !global.allFinite())
    fail(ErrorKind::InvalidWeights, "every metric weight must be positive and finite");
  if (std::abs(global.sum() - 1.0) > 1e-6) fail(ErrorKind::InvalidWeights, "metric weights must sum to 1");
  WeightHierarchy h;
  h.global = global;
  h.provenance = provenance;
  for (const auto& s : kSources) {
    const auto i = index_of(s.source);
    const VectorXd group = global.segment(s.first_metric, s.metric_count);
    h.primary(i) = group.sum();
    h.within_group[static_cast<std::size_t>(i)] = group / h.primary(i);
  }
  return h;
}

std::vector<std::string> primary_items() {
  std::vector<std::string> out;
  for (const auto& s : kSources) out.emplace_back(s.key);
  return out;
}

std::vector<std::string> secondary_items(Source source) {
  std::vector<std::string> out;
  const auto& s = info(source);
  for (int j = 0; j < s.metric_count; ++j) out.emplace_back(kMetrics[static_cast<std::size_t>(s.first_metric + j)].key);
  return out;
}

namespace {

struct GroupResult {
  VectorXd weights;
  MatrixDiagnostic diagnostic;
};

GroupResult derive_group(std::span<const ExpertMetricRating> questionnaire, const std::vector<std::string>& items,
                         const std::string& level, const ConsistencyConfig& config) {
  std::vector<PairwiseMatrix> matrices;
  for (const auto& respondent : questionnaire) {
    const bool complete = std::all_of(items.begin(), items.end(),
                                      [&](const std::string& item) { return respondent.ratings.contains(item); });
    if (complete) matrices.push_back(rating_to_matrix(respondent.ratings, items, level));
  }
  if (matrices.empty()) fail(ErrorKind::MissingRating, "no complete respondent for level '" + level + "' (first item " + items.front() + ")");

  const PairwiseMatrix group = aggregate_matrices(matrices);
  const PrincipalEigen eig = principal_weights(group);
  const Consistency c = consistency_ratio(eig.lambda_max, static_cast<int>(items.size()), config);

  GroupResult out;
  out.weights = eig.weights;
  out.diagnostic = {level, static_cast<int>(items.size()), static_cast<int>(matrices.size()), eig.lambda_max,
                    c.ci, c.cr, c.cr > config.threshold};
  return out;
}

}  // namespace

WeightHierarchy derive_weights(std::span<const ExpertMetricRating> questionnaire, const ConsistencyConfig& config) {
  WeightHierarchy h;
  h.provenance = WeightProvenance::Derived;

  const GroupResult primary = derive_group(questionnaire, primary_items(), "primary", config);
  h.primary = primary.weights;
  h.consistency.push_back(primary.diagnostic);

  for (const auto& s : kSources) {
    const GroupResult group = derive_group(questionnaire, secondary_items(s.source), std::string(s.key), config);
    const auto gi = static_cast<std::size_t>(index_of(s.source));
    h.within_group[gi] = group.weights;
    h.global.segment(s.first_metric, s.metric_count) = h.primary(index_of(s.source)) * group.weights;
    h.consistency.push_back(group.diagnostic);
  }
  for (const auto& d : h.consistency)
    if (d.inconsistent)
      h.warnings.push_back("level '" + d.level + "' consistency ratio " + std::to_string(d.cr) + " exceeds " +
                           std::to_string(config.threshold));
  return h;
}

WeightHierarchy reference_weights() {
  MetricValues w;
  w << 0.1443, 0.1346,                  // contents
      0.0640, 0.0622, 0.0578, 0.0540,   // reviews
      0.0502, 0.0498, 0.0477, 0.0491, 0.0482,  // citations
      0.0598, 0.0569, 0.0578, 0.0636;   // usages
  return WeightHierarchy::from_global(w, WeightProvenance::Reference);
}

}  // namespace bookimpact
