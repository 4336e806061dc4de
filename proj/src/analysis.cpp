#include "bookimpact/analysis.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <sstream>

namespace bookimpact {

std::string_view to_string(CorrelationMethod m) { return m == CorrelationMethod::Spearman ? "spearman" : "pearson"; }

std::string_view to_string(Significance s) {
  switch (s) {
    case Significance::P01: return "p<0.01";
    case Significance::P05: return "p<0.05";
    case Significance::None: return "n.s.";
  }
  return "n.s.";
}

namespace {

// Continued fraction for the regularized incomplete beta (modified Lentz).
double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIter = 300;
  constexpr double kEps = 1e-15;
  constexpr double kTiny = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return h;
}

double incomplete_beta(double a, double b, double x) {
  if (x <= 0) return 0;
  if (x >= 1) return 1;
  const double front =
      std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x));
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

Significance flag(double p) {
  if (p < 0.01) return Significance::P01;
  if (p < 0.05) return Significance::P05;
  return Significance::None;
}

void check_pair(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size())
    fail(ErrorKind::LengthMismatch, "inputs differ in length (" + std::to_string(x.size()) + " vs " +
                                        std::to_string(y.size()) + ")");
  if (x.size() < 2) fail(ErrorKind::InsufficientData, "correlation needs at least 2 observations");
}

double product_moment(const VectorXd& x, const VectorXd& y) {
  const VectorXd dx = x.array() - x.mean();
  const VectorXd dy = y.array() - y.mean();
  const double sxx = dx.squaredNorm(), syy = dy.squaredNorm();
  if (sxx == 0 || syy == 0) fail(ErrorKind::ZeroVariance, "an input has zero variance");
  return std::clamp(dx.dot(dy) / std::sqrt(sxx * syy), -1.0, 1.0);
}

double permutation_p_value(const VectorXd& x, const VectorXd& y, double observed) {
  if (x.size() > 9) fail(ErrorKind::InvalidArgument, "exact permutation test limited to N <= 9");
  std::vector<int> perm(static_cast<std::size_t>(y.size()));
  std::iota(perm.begin(), perm.end(), 0);
  long extreme = 0, total = 0;
  VectorXd yp(y.size());
  do {
    for (std::size_t i = 0; i < perm.size(); ++i) yp(static_cast<Eigen::Index>(i)) = y(perm[i]);
    double r = 0;
    const VectorXd dx = x.array() - x.mean();
    const VectorXd dy = yp.array() - yp.mean();
    r = dx.dot(dy) / std::sqrt(dx.squaredNorm() * dy.squaredNorm());
    if (std::abs(r) >= std::abs(observed) - 1e-12) ++extreme;
    ++total;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return static_cast<double>(extreme) / static_cast<double>(total);
}

CorrelationResult finish(const VectorXd& x, const VectorXd& y, CorrelationMethod method,
                         const CorrelationOptions& opts) {
  CorrelationResult r;
  r.method = method;
  r.n = static_cast<int>(x.size());
  r.coefficient = product_moment(x, y);
  r.p_value = opts.exact_permutation ? permutation_p_value(x, y, r.coefficient) : correlation_p_value(r.coefficient, r.n);
  r.significance = flag(r.p_value);
  return r;
}

VectorXd as_vector(std::span<const double> v) {
  return Eigen::Map<const VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

double correlation_p_value(double r, int n) {
  const int df = n - 2;
  if (df < 1) return 1.0;
  if (std::abs(r) >= 1.0) return 0.0;
  const double t2 = r * r * df / (1.0 - r * r);
  return incomplete_beta(0.5 * df, 0.5, df / (df + t2));
}

CorrelationResult pearson(std::span<const double> x, std::span<const double> y, const CorrelationOptions& opts) {
  check_pair(x, y);
  return finish(as_vector(x), as_vector(y), CorrelationMethod::Pearson, opts);
}

CorrelationResult spearman(std::span<const double> x, std::span<const double> y, const CorrelationOptions& opts) {
  check_pair(x, y);
  return finish(average_ranks(as_vector(x)), average_ranks(as_vector(y)), CorrelationMethod::Spearman, opts);
}

namespace {

CorrelationResult correlate_with_experts(std::span<const ImpactScore> scores, const Dataset& dataset,
                                         const RankKey& key, const std::optional<std::string>& discipline,
                                         const CorrelationOptions& opts) {
  std::map<std::string, std::pair<double, int>> expert;
  for (const auto& e : dataset.expert_book_scores) {
    auto& acc = expert[e.isbn];
    acc.first += e.impact;
    ++acc.second;
  }
  std::vector<double> xs, ys;
  for (const auto& s : scores) {
    auto it = expert.find(s.isbn);
    if (it == expert.end()) continue;
    if (discipline) {
      const BookRecord* book = dataset.find_book(s.isbn);
      if (!book || book->discipline.name() != *discipline) continue;
    }
    xs.push_back(key_value(s, key));
    ys.push_back(it->second.first / it->second.second);
  }
  if (xs.size() < 2)
    fail(ErrorKind::InsufficientOverlap,
         "only " + std::to_string(xs.size()) + " books have both a score and an expert rating");
  return spearman(xs, ys, opts);
}

}  // namespace

CorrelationResult validate_against_experts(std::span<const ImpactScore> scores, const Dataset& dataset,
                                           const std::optional<std::string>& discipline,
                                           const CorrelationOptions& opts) {
  return correlate_with_experts(scores, dataset, std::monostate{}, discipline, opts);
}

CorrelationResult per_source_validation(std::span<const ImpactScore> scores, const Dataset& dataset, Source source,
                                        const std::optional<std::string>& discipline,
                                        const CorrelationOptions& opts) {
  return correlate_with_experts(scores, dataset, source, discipline, opts);
}

ConversionEstimate depth_breadth_conversion(std::span<const double> depth, std::span<const double> breadth) {
  check_pair(depth, breadth);
  const VectorXd d = as_vector(depth), b = as_vector(breadth);
  const VectorXd dd = d.array() - d.mean();
  const VectorXd db = b.array() - b.mean();
  if (dd.squaredNorm() == 0) fail(ErrorKind::ZeroVariance, "TOC depth has zero variance");
  ConversionEstimate out;
  out.n = static_cast<int>(d.size());
  out.k = -dd.dot(db) / dd.squaredNorm();
  out.pearson_r = product_moment(d, b);
  out.spearman_rho = product_moment(average_ranks(d), average_ranks(b));
  return out;
}

ConversionEstimate depth_breadth_conversion(std::span<const ImpactScore> scores) {
  std::vector<double> depth, breadth;
  for (const auto& s : scores) {
    if (!s.present(index_of(MetricId::TocDepth)) || !s.present(index_of(MetricId::TocBreadth))) continue;
    depth.push_back(s.normalized(index_of(MetricId::TocDepth)));
    breadth.push_back(s.normalized(index_of(MetricId::TocBreadth)));
  }
  if (depth.size() < 2) fail(ErrorKind::InsufficientData, "fewer than 2 books carry both TOC metrics");
  return depth_breadth_conversion(depth, breadth);
}

DisciplineSummary discipline_summary(std::span<const ImpactScore> scores, const Dataset& dataset,
                                     std::vector<double> edges) {
  if (edges.size() < 2 || !std::is_sorted(edges.begin(), edges.end()))
    fail(ErrorKind::InvalidArgument, "interval edges must be sorted with at least two entries");
  DisciplineSummary out;
  out.edges = edges;
  const std::size_t bins = edges.size() - 1;

  std::map<std::string, std::size_t> row_of;
  auto row = [&](const std::string& name) -> DisciplineHistogram& {
    auto [it, inserted] = row_of.try_emplace(name, out.rows.size());
    if (inserted) out.rows.push_back({name, std::vector<int>(bins, 0), std::vector<double>(bins, 0.0), 0});
    return out.rows[it->second];
  };
  for (auto k : kFixedDisciplines) row(Discipline{k, {}}.name());

  char buf[96];
  for (const auto& s : scores) {
    const BookRecord* book = dataset.find_book(s.isbn);
    auto& r = row(book ? book->discipline.name() : std::string("Other"));
    std::size_t bin = 0;
    if (s.total < edges.front()) {
      std::snprintf(buf, sizeof buf, "%.4f below first interval, counted in it", s.total);
      out.warnings.push_back("book " + s.isbn + ": score " + buf);
    } else if (s.total >= edges.back()) {
      bin = bins - 1;
      std::snprintf(buf, sizeof buf, "%.4f above last interval, counted in it", s.total);
      out.warnings.push_back("book " + s.isbn + ": score " + buf);
    } else {
      bin = static_cast<std::size_t>(std::upper_bound(edges.begin(), edges.end(), s.total) - edges.begin()) - 1;
    }
    ++r.counts[bin];
    ++r.books;
  }
  for (auto& r : out.rows)
    for (std::size_t b = 0; b < bins; ++b)
      r.proportions[b] = r.books > 0 ? static_cast<double>(r.counts[b]) / r.books : 0.0;
  return out;
}

std::optional<AspectExtremes> aspect_extremes(const std::map<std::string, AspectTally>& aspects) {
  AspectExtremes e;
  bool first = true;
  for (const auto& [aspect, tally] : aspects) {
    if (tally.mentions < 1) continue;
    const double sat = tally.satisfaction();
    if (first || sat > e.most_satisfied_value) e.most_satisfied = aspect, e.most_satisfied_value = sat;
    if (first || sat < e.least_satisfied_value) e.least_satisfied = aspect, e.least_satisfied_value = sat;
    if (first || tally.mentions > e.most_mentioned_count) e.most_mentioned = aspect, e.most_mentioned_count = tally.mentions;
    if (first || tally.mentions < e.least_mentioned_count)
      e.least_mentioned = aspect, e.least_mentioned_count = tally.mentions;
    first = false;
  }
  if (first) return std::nullopt;
  return e;
}

BookReport book_report(const std::string& isbn, const Dataset& dataset, std::span<const ImpactScore> scores,
                       std::span<const BookAnalysis> analyses) {
  auto score_it = std::find_if(scores.begin(), scores.end(), [&](const ImpactScore& s) { return s.isbn == isbn; });
  auto analysis_it =
      std::find_if(analyses.begin(), analyses.end(), [&](const BookAnalysis& a) { return a.vector.isbn == isbn; });
  const BookRecord* book = dataset.find_book(isbn);
  if (score_it == scores.end() || analysis_it == analyses.end() || !book)
    fail(ErrorKind::UnknownBook, "book " + isbn + " is not scored");

  const ImpactScore& score = *score_it;
  const BookAnalysis& a = *analysis_it;

  BookReport r;
  r.isbn = isbn;
  r.title = book->title;
  r.discipline = book->discipline.name();
  r.overall_rank = score.rank;
  r.total = score.total;
  r.subscores = score.subscores;
  r.raw = a.vector;
  for (const auto& m : kMetrics) {
    for (const auto& e : rank_books(scores, m.id))
      if (e.isbn == isbn) r.metric_ranks[static_cast<std::size_t>(index_of(m.id))] = e.rank;
  }

  const auto& rv = a.reviews;
  r.has_reviews = rv.review_count > 0;
  if (r.has_reviews) {
    const int classified = rv.positive + rv.negative;
    if (classified > 0) {
      r.positive_share = static_cast<double>(rv.positive) / classified;
      r.negative_share = static_cast<double>(rv.negative) / classified;
    }
    r.star_histogram = rv.star_histogram;
    for (std::size_t i = 0; i < 5; ++i)
      r.star_shares[i] = static_cast<double>(rv.star_histogram[i]) / rv.review_count;
    r.aspects = rv.aspects;
    r.aspect_extremes = aspect_extremes(rv.aspects);
  }

  const auto& cm = a.citations;
  r.has_citations = cm.literature_count > 0;
  if (r.has_citations) {
    for (const auto& [intensity, count] : cm.intensity_histogram)
      r.intensity_shares[intensity] = static_cast<double>(count) / cm.literature_count;
    const int scored = cm.function_counts[0] + cm.function_counts[1] + cm.function_counts[2];
    r.has_functions = scored > 0;
    if (r.has_functions)
      for (std::size_t f = 0; f < 3; ++f) r.function_shares[f] = static_cast<double>(cm.function_counts[f]) / scored;
  }

  r.has_holdings = !a.usage.regions.empty();
  r.holdings_by_region = a.usage.regions;
  r.sale_rank = a.usage.sale_rank;
  r.sale_reordered = a.usage.ssale;
  return r;
}

std::string render_report_text(const BookReport& r) {
  std::ostringstream out;
  char buf[160];
  auto pct = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.0f%%", v * 100.0);
    return std::string(buf);
  };
  auto rank_of = [&](MetricId id) {
    const auto& rk = r.metric_ranks[static_cast<std::size_t>(index_of(id))];
    return rk ? std::to_string(*rk) : std::string("no data");
  };

  out << "ISBN: " << r.isbn << "\nTitle: " << r.title << "\nDiscipline: " << r.discipline
      << "\nImpact rank: " << r.overall_rank;
  std::snprintf(buf, sizeof buf, "\nImpact score: %.6f (content %.6f, review %.6f, citation %.6f, usage %.6f)\n", r.total,
                r.subscores(0), r.subscores(1), r.subscores(2), r.subscores(3));
  out << buf;

  out << "\n[Book contents]\n";
  out << "  " << info(MetricId::TocDepth).label << " rank: " << rank_of(MetricId::TocDepth) << "\n";
  out << "  " << info(MetricId::TocBreadth).label << " rank: " << rank_of(MetricId::TocBreadth) << "\n";

  out << "\n[Book reviews]\n";
  for (auto id : {MetricId::PosReviews, MetricId::NegReviews, MetricId::StarRating, MetricId::AspectSatisfaction})
    out << "  " << info(id).label << " rank: " << rank_of(id) << "\n";
  if (!r.has_reviews) {
    out << "  reviews: no data\n";
  } else {
    out << "  positive vs negative: " << pct(r.positive_share) << " / " << pct(r.negative_share) << "\n";
    out << "  star ratings:";
    for (std::size_t i = 0; i < 5; ++i) out << ' ' << (i + 1) << "*=" << r.star_histogram[i];
    out << "\n";
    if (r.aspect_extremes) {
      const auto& e = *r.aspect_extremes;
      std::snprintf(buf, sizeof buf, "  most satisfied aspect: %s (%.3f)\n  least satisfied aspect: %s (%.3f)\n",
                    e.most_satisfied.c_str(), e.most_satisfied_value, e.least_satisfied.c_str(),
                    e.least_satisfied_value);
      out << buf;
      out << "  most mentioned aspect: " << e.most_mentioned << " (" << e.most_mentioned_count << ")\n";
      out << "  least mentioned aspect: " << e.least_mentioned << " (" << e.least_mentioned_count << ")\n";
      for (const auto& [aspect, tally] : r.aspects) {
        std::snprintf(buf, sizeof buf, "    %-14s %6.3f  (%d mentions)\n", aspect.c_str(), tally.satisfaction(),
                      tally.mentions);
        out << buf;
      }
    } else {
      out << "  aspects: no data\n";
    }
  }

  out << "\n[Book citations]\n";
  for (auto id : {MetricId::CitationFrequency, MetricId::CitlitDepth, MetricId::CitlitBreadth,
                  MetricId::CitationIntensity, MetricId::CitationFunction})
    out << "  " << info(id).label << " rank: " << rank_of(id) << "\n";
  if (!r.has_citations) {
    out << "  citations: no data\n";
  } else {
    out << "  citation intensity:";
    for (const auto& [intensity, share] : r.intensity_shares) out << ' ' << intensity << '=' << pct(share);
    out << "\n";
    if (r.has_functions)
      out << "  citation function: background " << pct(r.function_shares[0]) << ", comparison "
          << pct(r.function_shares[1]) << ", use " << pct(r.function_shares[2]) << "\n";
    else
      out << "  citation function: no data\n";
  }

  out << "\n[Book usages]\n";
  for (auto id : {MetricId::HoldingNumber, MetricId::HoldingRegion, MetricId::HoldingDistribution, MetricId::Sale})
    out << "  " << info(id).label << " rank: " << rank_of(id) << "\n";
  if (!r.has_holdings) {
    out << "  holdings: no data\n";
  } else {
    out << "  holdings by region:";
    for (const auto& [region, count] : r.holdings_by_region) out << ' ' << region << '=' << count;
    out << "\n";
  }
  if (r.sale_rank) out << "  sale rank: " << *r.sale_rank << "\n";
  else out << "  sale: no data\n";
  return out.str();
}

}  // namespace bookimpact
