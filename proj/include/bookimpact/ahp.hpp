#pragma once

// Analytic hierarchy process: questionnaire ratings -> pairwise matrices -> priority
// weights, plus the published reference weights.

#include "bookimpact/core.hpp"
#include "bookimpact/datamodel.hpp"

#include <array>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace bookimpact {

// Reciprocal comparison matrix with entries in [1/9, 9].
class PairwiseMatrix {
 public:
  PairwiseMatrix() = default;
  // Throws InvalidMatrix unless square, unit diagonal, reciprocal to 1e-9 and in range.
  PairwiseMatrix(MatrixXd values, std::string level);

  const MatrixXd& values() const { return values_; }
  const std::string& level() const { return level_; }
  Eigen::Index size() const { return values_.rows(); }
  double operator()(Eigen::Index i, Eigen::Index j) const { return values_(i, j); }

 private:
  MatrixXd values_;
  std::string level_;
};

// Rating difference d = r_i - r_j in 0..4 maps to 1, 3, 5, 7, 9; negative d to the reciprocal.
constexpr double saaty_scale(int difference) {
  const int d = difference < 0 ? -difference : difference;
  const double v = 1.0 + 2.0 * (d > 4 ? 4 : d);
  return difference < 0 ? 1.0 / v : v;
}

PairwiseMatrix rating_to_matrix(std::span<const int> ratings, std::string level = {});
// Throws MissingRating naming the first unrated item.
PairwiseMatrix rating_to_matrix(const std::map<std::string, int>& ratings, std::span<const std::string> items,
                                std::string level = {});

// Element-wise geometric mean, clipped to [1/9, 9]; the lower triangle is set to the
// exact reciprocal of the upper.
PairwiseMatrix aggregate_matrices(std::span<const PairwiseMatrix> matrices);

struct PrincipalEigen {
  VectorXd weights;  // sums to 1
  double lambda_max = 0;
  int iterations = 0;
};

// Power iteration from the uniform vector until successive eigenvalue estimates differ
// by less than tolerance; NonConvergence after max_iterations.
template <typename Derived>
PrincipalEigen principal_weights(const Eigen::MatrixBase<Derived>& a, double tolerance = 1e-12,
                                 int max_iterations = 10000) {
  const Eigen::Index n = a.rows();
  if (n == 0 || a.cols() != n) fail(ErrorKind::InvalidMatrix, "matrix must be square and non-empty");
  PrincipalEigen out;
  VectorXd v = VectorXd::Constant(n, 1.0 / static_cast<double>(n));
  double lambda = 0;
  for (int it = 1; it <= max_iterations; ++it) {
    const VectorXd av = a * v;
    const double next = av.sum();  // v sums to 1
    v = av / next;
    if (std::abs(next - lambda) < tolerance) {
      out.weights = v;
      out.iterations = it;
      // Rayleigh quotient at the converged eigenvector
      out.lambda_max = v.dot(a * v) / v.dot(v);
      return out;
    }
    lambda = next;
  }
  const VectorXd residual = a * v - lambda * v;
  fail(ErrorKind::NonConvergence, "power iteration did not converge, residual " + std::to_string(residual.norm()));
}

inline PrincipalEigen principal_weights(const PairwiseMatrix& m) { return principal_weights(m.values()); }

struct ConsistencyConfig {
  std::map<int, double> random_index{{3, 0.58}, {4, 0.90}, {5, 1.12}, {6, 1.24}, {7, 1.32}};
  double threshold = 0.1;
};

struct Consistency {
  double ci = 0;
  double cr = 0;
};

// n <= 2 gives zero; otherwise CI = (lambda - n)/(n - 1), CR = CI / RI(n).
// Throws InvalidArgument when RI(n) is not configured.
Consistency consistency_ratio(double lambda_max, int n, const ConsistencyConfig& config = {});

struct MatrixDiagnostic {
  std::string level;
  int size = 0;
  int respondents = 0;
  double lambda_max = 0;
  double ci = 0;
  double cr = 0;
  bool inconsistent = false;
};

enum class WeightProvenance { Derived, Reference, Custom };
std::string_view to_string(WeightProvenance p);

struct WeightHierarchy {
  SourceValues primary = SourceValues::Zero();
  std::array<VectorXd, kSourceCount> within_group;
  MetricValues global = MetricValues::Zero();
  std::vector<MatrixDiagnostic> consistency;
  std::vector<std::string> warnings;
  WeightProvenance provenance = WeightProvenance::Custom;

  // Group sums become primary weights and global / primary the within-group weights.
  // Throws InvalidWeights unless every value is positive and the total is 1 +- 1e-6.
  static WeightHierarchy from_global(const MetricValues& global, WeightProvenance provenance);

  double weight(MetricId id) const { return global(index_of(id)); }
  double weight(Source s) const { return primary(index_of(s)); }
};

// Metric ids of a level group: the four primary groups, or the secondary metrics of one source.
std::vector<std::string> primary_items();
std::vector<std::string> secondary_items(Source source);

WeightHierarchy derive_weights(std::span<const ExpertMetricRating> questionnaire,
                               const ConsistencyConfig& config = {});

WeightHierarchy reference_weights();

}  // namespace bookimpact
