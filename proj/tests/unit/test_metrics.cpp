#include "bookimpact/metrics.hpp"

#include "fixture.hpp"
#include "metric_oracle.hpp"

#include <doctest.h>

#include <random>

using namespace bookimpact;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error thrown");
  return ErrorKind::InvalidArgument;
}

Review review(int star, std::optional<Polarity> p, std::vector<AspectLabel> aspects) {
  Review r{"A", "r" + std::to_string(star), star, "", p, {}};
  if (!aspects.empty()) r.aspect_labels = std::move(aspects);
  return r;
}

// Topic model whose stored documents have the given distributions.
TopicModel stub_topics(const std::vector<std::pair<std::string, std::vector<double>>>& docs, double tau) {
  TopicModel m;
  m.topic_count = static_cast<int>(docs.front().second.size());
  m.tau = tau;
  m.vocabulary = {"w"};
  m.topic_word = MatrixXd::Constant(m.topic_count, 1, 1.0);
  m.doc_topic.resize(static_cast<Eigen::Index>(docs.size()), m.topic_count);
  for (std::size_t d = 0; d < docs.size(); ++d) {
    m.doc_ids.push_back(docs[d].first);
    for (int k = 0; k < m.topic_count; ++k)
      m.doc_topic(static_cast<Eigen::Index>(d), k) = docs[d].second[static_cast<std::size_t>(k)];
  }
  return m;
}

}  // namespace

TEST_CASE("normalized entropy") {
  CHECK(normalized_entropy(Eigen::Vector2d(0.5, 0.5)) == doctest::Approx(1.0));
  CHECK(normalized_entropy(VectorXd::Ones(1)) == 0.0);
  CHECK(normalized_entropy(Eigen::Vector3d(0.7, 0.2, 0.1)) == doctest::Approx(0.7299).epsilon(1e-4));
  CHECK(normalized_entropy(Eigen::Vector3d(1.0, 0.0, 0.0)) == 0.0);
  CHECK(kind_of([] { normalized_entropy(Eigen::Vector2d(0.5, 0.6)); }) == ErrorKind::NotADistribution);
  CHECK(kind_of([] { normalized_entropy(Eigen::Vector2d(1.5, -0.5)); }) == ErrorKind::NotADistribution);
  CHECK(normalized_entropy(Eigen::Vector2f(0.5f, 0.5f)) == doctest::Approx(1.0f));
}

TEST_CASE("entropy properties") {
  for (int n = 2; n <= 10; ++n) CHECK(std::abs(normalized_entropy(VectorXd::Constant(n, 1.0 / n)) - 1.0) < 1e-9);
  std::mt19937 rng(1);
  std::uniform_real_distribution<double> u(0.01, 1.0);
  for (int t = 0; t < 200; ++t) {
    VectorXd p(2 + t % 8);
    for (Eigen::Index i = 0; i < p.size(); ++i) p(i) = u(rng);
    p /= p.sum();
    const double h = normalized_entropy(p);
    CHECK(h >= 0.0);
    CHECK(h <= 1.0 + 1e-12);
    VectorXd q = p.reverse();
    CHECK(std::abs(normalized_entropy(q) - h) < 1e-12);
  }
}

TEST_CASE("toc depth and breadth") {
  CHECK(toc_depth(300, 3) == 100.0);
  CHECK(toc_depth(200, 1) == 200.0);
  CHECK(toc_depth(50, 50) == 1.0);
  CHECK(toc_breadth(Eigen::Vector2d(0.5, 0.5)) == doctest::Approx(1.0));
  CHECK(toc_breadth(VectorXd::Ones(1)) == 0.0);
  CHECK(toc_breadth(Eigen::Vector2d(2.0 / 3, 1.0 / 3)) == doctest::Approx(0.9183).epsilon(1e-4));
}

TEST_CASE("review metrics hand example") {
  std::vector<Review> rs{review(5, Polarity::Positive, {{"Price", 1}}), review(5, Polarity::Positive, {{"Price", 1}}),
                         review(4, Polarity::Positive, {{"Price", -1}}), review(2, Polarity::Negative, {{"Content", 1}}),
                         review(1, Polarity::Negative, {})};
  rs[4].aspect_labels = std::vector<AspectLabel>{};
  const auto m = review_metrics(rs, nullptr, default_aspect_lexicon());
  CHECK(*m.spos == 3);
  CHECK(*m.sneg == 2);
  CHECK(*m.sstar == doctest::Approx(3.4));
  CHECK(*m.saspect == doctest::Approx(0.6667).epsilon(1e-4));
  CHECK(m.star_histogram == std::array<int, 5>{1, 1, 0, 1, 2});
}

TEST_CASE("review metrics edge cases") {
  const auto none = review_metrics(std::vector<Review>{}, nullptr, default_aspect_lexicon());
  CHECK_FALSE(none.spos);
  CHECK_FALSE(none.sneg);
  CHECK_FALSE(none.sstar);
  CHECK_FALSE(none.saspect);

  std::vector<std::pair<TokenStream, Polarity>> ex{{tokenize("lovely"), Polarity::Positive},
                                                   {tokenize("dull"), Polarity::Negative}};
  const auto model = train_sentiment(ex);
  std::vector<Review> one{{"A", "r", 5, "lovely lovely", {}, {}}};
  const auto m = review_metrics(one, &model, default_aspect_lexicon());
  CHECK(*m.sstar == 5.0);
  CHECK_FALSE(m.saspect);
  CHECK(*m.spos == 1);
  CHECK(*m.sneg == 0);
}

TEST_CASE("review aspects from text") {
  std::vector<Review> rs{{"A", "1", 4, "price good and some other words here printing not good", {}, {}}};
  const auto m = review_metrics(rs, nullptr, default_aspect_lexicon());
  REQUIRE(m.saspect);
  CHECK(m.aspects.at("Price").net == 1);
  CHECK(m.aspects.at("Printing").net == -1);
}

TEST_CASE("citation metrics hand example") {
  std::vector<CitingLiterature> lits{
      {"A", "L1", "", 2020, "w", 1, {{"L1", "A", "x", CitationFunction::Use}}},
      {"A", "L2", "", 2020, "w", 2, {{"L2", "A", "x", CitationFunction::Use}}},
      {"A", "L3", "", 2020, "w", 6, {{"L3", "A", "x", CitationFunction::Background}}}};
  const TopicModel topics = stub_topics({{"A/L1", {0.5, 0.5, 0.0}}, {"A/L2", {0.5, 0.5, 0.0}}, {"A/L3", {0.5, 0.5, 0.0}}}, 0.2);
  const auto m = citation_metrics(lits, &topics, nullptr);
  CHECK(*m.scitation == 3);
  CHECK(m.active_topics == 2);
  CHECK(*m.scitdepth == doctest::Approx(1.5));
  CHECK(*m.sint == doctest::Approx(3.0));
  CHECK(*m.sfun == doctest::Approx(2.3333).epsilon(1e-4));
  CHECK(*m.scitbreadth == doctest::Approx(1.0));
}

TEST_CASE("citation metrics uniform four literatures") {
  std::vector<CitingLiterature> lits;
  std::vector<std::pair<std::string, std::vector<double>>> docs;
  for (int i = 0; i < 4; ++i) {
    lits.push_back({"A", "L" + std::to_string(i), "", 2020, "w", 1, {}});
    docs.push_back({"A/L" + std::to_string(i), i % 2 ? std::vector<double>{0.7, 0.3} : std::vector<double>{0.3, 0.7}});
  }
  const TopicModel topics = stub_topics(docs, 0.25);
  const auto m = citation_metrics(lits, &topics, nullptr);
  CHECK(*m.scitbreadth == doctest::Approx(1.0));
  CHECK(*m.scitdepth == doctest::Approx(2.0));
  CHECK_FALSE(m.sfun);
}

TEST_CASE("citation metrics absent without literatures or text") {
  const auto none = citation_metrics(std::vector<CitingLiterature>{}, nullptr, nullptr);
  CHECK_FALSE(none.scitation);
  CHECK_FALSE(none.scitdepth);
  CHECK_FALSE(none.scitbreadth);
  CHECK_FALSE(none.sint);
  CHECK_FALSE(none.sfun);

  std::vector<CitingLiterature> lits{{"A", "L1", "", 2020, "", 2, {{"L1", "A", "x", std::nullopt}}}};
  const TopicModel topics = stub_topics({{"other", {1.0, 0.0}}}, 0.5);
  const auto m = citation_metrics(lits, &topics, nullptr);
  CHECK(*m.scitation == 1);
  CHECK_FALSE(m.scitdepth);
  CHECK(m.unscored_contexts == 1);
}

TEST_CASE("book topic distribution weights by length") {
  std::vector<VectorXd> d{Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 1)};
  std::vector<double> len{3, 1};
  const VectorXd m = book_topic_distribution(d, len);
  CHECK(m(0) == doctest::Approx(0.75));
  CHECK(kind_of([&] { book_topic_distribution(d, std::vector<double>{1}); }) == ErrorKind::LengthMismatch);
}

TEST_CASE("usage metrics") {
  HoldingsRecord h{"A", {{"USA", 15}, {"CHINA", 5}}};
  const auto m = usage_metrics(&h, 1, 20);
  CHECK(*m.sreg == 2);
  CHECK(*m.snum == 20);
  CHECK(*m.sdis == doctest::Approx(0.8113).epsilon(1e-4));
  CHECK(*m.ssale == 20);
  CHECK(m.regions.front().first == "USA");

  HoldingsRecord single{"A", {{"USA", 7}}};
  const auto s = usage_metrics(&single, std::nullopt, 0);
  CHECK(*s.sreg == 1);
  CHECK(*s.snum == 7);
  CHECK(*s.sdis == 0.0);
  CHECK_FALSE(s.ssale);

  const auto none = usage_metrics(nullptr, std::nullopt, 0);
  CHECK_FALSE(none.sreg);
  CHECK_FALSE(none.snum);
  CHECK_FALSE(none.sdis);
  CHECK_FALSE(none.ssale);
}

TEST_CASE("sale reorder") {
  std::vector<SaleRecord> s{{"A", 500}, {"B", 3}, {"C", 500}, {"D", 9000}};
  const auto pos = reorder_sale_ranks(s);
  CHECK(pos.at("B") == 1);
  CHECK(pos.at("A") == 2);
  CHECK(pos.at("C") == 2);
  CHECK(pos.at("D") == 4);
}

TEST_CASE("book with TOC only, and empty TOC") {
  const auto& f = fixture::fitted();
  Dataset d;
  d.books.push_back({"T1", "t", Discipline::parse("Law"), 120, "contract statute court tort", {}});
  d.books.push_back({"T2", "t", Discipline::parse("Law"), 120, "", {}});
  const auto a = analyze_dataset(d, f.models);
  CHECK(a[0].vector.present_count() == 2);
  CHECK(a[0].vector.has(MetricId::TocDepth));
  CHECK(a[0].vector.has(MetricId::TocBreadth));
  CHECK(a[1].vector.present_count() == 0);
  CHECK(a[1].warnings.size() == 1);
}

TEST_CASE("fixture metrics equal the direct-summation oracle") {
  const auto& f = fixture::fitted();
  const auto expected = oracle::compute(f.dataset, f.models);
  const auto analyses = analyze_dataset(f.dataset, f.models);
  REQUIRE(analyses.size() == 24);
  int complete = 0;
  for (const auto& a : analyses) {
    const auto& row = expected.at(a.vector.isbn);
    for (int j = 0; j < kMetricCount; ++j) {
      INFO(a.vector.isbn << " " << kMetrics[static_cast<std::size_t>(j)].key);
      REQUIRE(a.vector.present(j) == row.value[static_cast<std::size_t>(j)].has_value());
      if (a.vector.present(j)) CHECK(std::abs(a.vector.values(j) - *row.value[static_cast<std::size_t>(j)]) <= 1e-9);
    }
    complete += a.vector.present_count() == kMetricCount ? 1 : 0;
  }
  CHECK(complete >= 8);
}

TEST_CASE("metric table export") {
  const auto& f = fixture::fitted();
  std::vector<MetricVector> v;
  for (const auto& a : analyze_dataset(f.dataset, f.models)) v.push_back(a.vector);
  const std::string csv = metric_table_csv(v);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 25);
  CHECK(csv.rfind("isbn,toc_depth,", 0) == 0);
}
