// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include "bookimpact/ingest.hpp"
#include "bookimpact/service.hpp"

#include "fixture.hpp"
#include "metric_oracle.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

using namespace bookimpact;

namespace {

using Clock = std::chrono::steady_clock;

struct Check {
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (!cond && ok) {
      ok = false;
      detail = what;
    }
  }
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double a, double b = 0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

Check reference_weights_check() {
  Check c;
  const auto t0 = Clock::now();
  const auto h = reference_weights();
  const double internal = h.weight(Source::Content);
  const double external = h.weight(Source::Review) + h.weight(Source::Citation) + h.weight(Source::Usage);
  c.require(std::abs(h.global.sum() - 1.0) <= 5e-4, fmt("sum %.6f", h.global.sum()));
  c.require(fmt("%.4f", internal) == "0.2789", fmt("internal %.6f", internal));
  c.require(fmt("%.4f", external) == "0.7211", fmt("external %.6f", external));
  c.require((h.global.array() > 0).all(), "non-positive weight");
  c.require(seconds_since(t0) < 1.0, "slower than 1 s");
  return c;
}

Check entropy_check() {
  Check c;
  for (int n = 2; n <= 10; ++n)
    c.require(std::abs(normalized_entropy(VectorXd::Constant(n, 1.0 / n)) - 1.0) <= 1e-9, fmt("uniform n=%.0f", n));
  c.require(normalized_entropy(VectorXd::Ones(1)) == 0.0, "single outcome");
  c.require(normalized_entropy(Eigen::Vector3d(0, 1, 0)) == 0.0, "point mass");
  std::mt19937 rng(101);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 1000; ++t) {
    VectorXd p(2 + t % 9);
    for (Eigen::Index i = 0; i < p.size(); ++i) p(i) = u(rng) + 1e-6;
    p /= p.sum();
    VectorXd q = p;
    std::shuffle(q.data(), q.data() + q.size(), rng);
    c.require(std::abs(normalized_entropy(p) - normalized_entropy(q)) <= 1e-12, "permutation changed entropy");
  }
  const double h = normalized_entropy(Eigen::Vector3d(0.7, 0.2, 0.1));
  c.require(std::abs(h - 0.7299) <= 1e-4, fmt("[0.7,0.2,0.1] -> %.6f", h));
  return c;
}

Check normalization_check() {
  Check c;
  c.require(normalize(0.0) == 0.0, "S=0");
  c.require(std::abs(normalize(1.0) - 0.5) <= 1e-12, "S=1");
  c.require(std::abs(normalize(100.0) - 0.99363) <= 1e-5, fmt("S=100 -> %.6f", normalize(100.0)));
  std::mt19937 rng(102);
  std::uniform_real_distribution<double> u(0.0, 1000.0);
  for (int t = 0; t < 1000; ++t) {
    double a = u(rng), b = u(rng);
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    c.require(normalize(a) < normalize(b), fmt("not increasing at %.6f, %.6f", a, b));
  }
  return c;
}

Check metric_oracle_check() {
  Check c;
  const auto t0 = Clock::now();
  const Dataset ds = fixture::dataset();
  const ModelBundle models = train_models(ds, fixture::train_config());
  const auto analyses = analyze_dataset(ds, models);
  const auto expected = oracle::compute(ds, models);
  const double elapsed = seconds_since(t0);

  std::set<std::string> disciplines;
  for (const auto& b : ds.books) disciplines.insert(b.discipline.name());
  c.require(ds.books.size() == 24 && disciplines.size() == 5, "fixture shape");
  c.require(!ds.reviews.empty() && !ds.citing_literatures.empty() && !ds.holdings.empty() && !ds.sales.empty(),
            "fixture lacks a source");
  for (const auto& a : analyses) {
    const auto& row = expected.at(a.vector.isbn);
    for (int j = 0; j < kMetricCount; ++j) {
      const auto& want = row.value[static_cast<std::size_t>(j)];
      const std::string where = a.vector.isbn + " " + std::string(kMetrics[static_cast<std::size_t>(j)].key);
      c.require(a.vector.present(j) == want.has_value(), where + " presence");
      if (!want || !a.vector.present(j)) continue;
      const bool count = j == index_of(MetricId::PosReviews) || j == index_of(MetricId::NegReviews) ||
                         j == index_of(MetricId::CitationFrequency) || j == index_of(MetricId::HoldingNumber) ||
                         j == index_of(MetricId::HoldingRegion) || j == index_of(MetricId::Sale);
      const double diff = std::abs(a.vector.values(j) - *want);
      c.require(count ? diff == 0.0 : diff <= 1e-9, where + fmt(" differs by %.3g", diff));
    }
  }
  c.require(elapsed < 10.0, fmt("took %.2f s", elapsed));
  return c;
}

Check ahp_check() {
  Check c;
  std::mt19937 rng(103);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  for (int n = 2; n <= 7; ++n)
    for (int t = 0; t < 20; ++t) {
      VectorXd w(n);
      for (int i = 0; i < n; ++i) w(i) = u(rng);
      w /= w.sum();
      const MatrixXd a = w * w.cwiseInverse().transpose();
      const auto r = principal_weights(a);
      c.require((r.weights - w).cwiseAbs().maxCoeff() <= 1e-6, fmt("n=%.0f weights", n));
      c.require(std::abs(r.lambda_max - n) <= 1e-6, fmt("n=%.0f lambda %.9f", n, r.lambda_max));
      c.require(std::abs(consistency_ratio(r.lambda_max, n).cr) <= 1e-9, fmt("n=%.0f CR", n));
    }

  MatrixXd m(3, 3);
  m << 1, 3, 5, 1.0 / 3, 1, 3, 0.2, 1.0 / 3, 1;
  const auto e = principal_weights(m);
  const Eigen::Vector3d oracle_w(0.63698557, 0.25828499, 0.10472943);
  c.require((e.weights - oracle_w).cwiseAbs().maxCoeff() <= 0.005, "3x3 weights");
  c.require(std::abs(e.lambda_max - 3.0385110906) <= 0.005, fmt("3x3 lambda %.6f", e.lambda_max));
  c.require(std::abs(consistency_ratio(e.lambda_max, 3).cr - 0.0331992) <= 0.005, "3x3 CR");

  for (int rating = 1; rating <= 5; ++rating) {
    ExpertMetricRating r{"E", {}};
    for (const auto& item : primary_items()) r.ratings[item] = rating;
    for (const auto& s : kSources)
      for (const auto& item : secondary_items(s.source)) r.ratings[item] = rating;
    const auto h = derive_weights(std::vector<ExpertMetricRating>{r, r});
    for (const auto& s : kSources) {
      c.require(std::abs(h.weight(s.source) - 0.25) <= 1e-9, "uniform primary");
      for (int j = 0; j < s.metric_count; ++j)
        c.require(std::abs(h.within_group[static_cast<std::size_t>(index_of(s.source))](j) - 1.0 / s.metric_count) <= 1e-9,
                  "uniform within group");
    }
  }
  return c;
}

MetricVector random_complete(std::mt19937& rng, const std::string& isbn) {
  std::uniform_real_distribution<double> u(0.0, 20.0);
  MetricVector v;
  v.isbn = isbn;
  for (int j = 0; j < kMetricCount; ++j) v.set(static_cast<MetricId>(j), u(rng));
  v.set(MetricId::AspectSatisfaction, u(rng) / 10.0 - 1.0);
  return v;
}

Check scoring_check() {
  Check c;
  const auto& f = fixture::fitted();
  std::vector<MetricVector> vectors;
  for (const auto& a : analyze_dataset(f.dataset, f.models)) vectors.push_back(a.vector);
  const MetricValues w = reference_weights().global;

  for (auto policy : {MissingPolicy::ZeroFill, MissingPolicy::Renormalize})
    for (const auto& s : score_books(vectors, w, {policy, MetricValues::Ones()}))
      c.require(std::abs(s.subscores.sum() - s.total) <= 1e-9, s.isbn + " additivity");

  int complete = 0;
  for (const auto& v : vectors) {
    if (v.present_count() != kMetricCount) continue;
    ++complete;
    const double z = impact_score(v, w, {MissingPolicy::ZeroFill, MetricValues::Ones()}).total;
    const double r = impact_score(v, w, {MissingPolicy::Renormalize, MetricValues::Ones()}).total;
    c.require(std::abs(z - r) <= 1e-9, v.isbn + " policies differ");
  }
  c.require(complete > 0, "no complete fixture book");

  for (auto policy : {MissingPolicy::ZeroFill, MissingPolicy::Renormalize}) {
    const auto base = rank_books(score_books(vectors, w, {policy, MetricValues::Ones()}));
    for (double k : {0.5, 2.0, 10.0}) {
      const auto scaled = rank_books(score_books(vectors, MetricValues(k * w), {policy, MetricValues::Ones()}));
      bool same = scaled.size() == base.size();
      for (std::size_t i = 0; same && i < base.size(); ++i)
        same = scaled[i].isbn == base[i].isbn && scaled[i].rank == base[i].rank;
      c.require(same, fmt("ranking changed under scaling by %.1f", k));
    }
  }

  std::mt19937 rng(104);
  std::uniform_int_distribution<int> pick(0, kMetricCount - 1);
  std::uniform_real_distribution<double> bump(0.01, 10.0);
  for (int t = 0; t < 100; ++t) {
    MetricVector v = random_complete(rng, "P");
    const int j = pick(rng);
    const double before = impact_score(v, w).total;
    v.values(j) += bump(rng);
    c.require(impact_score(v, w).total >= before, fmt("perturbing metric %.0f lowered the total", j));
  }
  return c;
}

Check correlation_check() {
  Check c;
  using V = std::vector<double>;
  c.require(std::abs(spearman(V{1, 2, 3}, V{10, 20, 30}).coefficient - 1.0) <= 1e-12, "spearman +1");
  c.require(std::abs(spearman(V{1, 2, 3}, V{30, 20, 10}).coefficient + 1.0) <= 1e-12, "spearman -1");
  const double tied = spearman(V{1, 2, 2, 4}, V{1, 3, 2, 4}).coefficient;
  c.require(std::abs(tied - 0.9486832980505139) <= 1e-9, fmt("tied spearman %.9f", tied));
  c.require(std::abs(pearson(V{1, 2, 3, 4}, V{2, 4, 6, 8}).coefficient - 1.0) <= 1e-12, "pearson +1");
  c.require(std::abs(pearson(V{1, 2, 3, 4}, V{4, 3, 2, 1}).coefficient + 1.0) <= 1e-12, "pearson -1");
  c.require(std::abs(pearson(V{1, 2, 3, 4, 5}, V{2, 1, 4, 3, 5}).coefficient - 0.8) <= 1e-12, "pearson 0.8");

  std::mt19937 rng(105);
  std::normal_distribution<double> g;
  for (int t = 0; t < 100; ++t) {
    V x(12), y(12), fx(12);
    for (std::size_t i = 0; i < x.size(); ++i) {
      x[i] = g(rng);
      y[i] = 0.5 * x[i] + g(rng);
      fx[i] = std::exp(x[i]) * 3 + 1;
    }
    c.require(std::abs(spearman(x, y).coefficient - spearman(fx, y).coefficient) <= 1e-12, "monotone transform");
  }

  for (bool agree : {true, false}) {
    Dataset ds;
    std::vector<ImpactScore> scores;
    for (int i = 0; i < 6; ++i) {
      const std::string isbn = "X" + std::to_string(i);
      ds.books.push_back({isbn, "t", Discipline::parse("Law"), 100, "x", {}});
      ImpactScore s;
      s.isbn = isbn;
      s.total = 0.1 * (i + 1);
      scores.push_back(s);
      ds.expert_book_scores.push_back({"E1", isbn, agree ? i + 1 : 6 - i});
      ds.expert_book_scores.push_back({"E2", isbn, agree ? i + 2 : 7 - i});
    }
    const double r = validate_against_experts(scores, ds).coefficient;
    c.require(std::abs(r - (agree ? 1.0 : -1.0)) <= 1e-12, fmt("expert validation %.6f", r));
  }
  return c;
}

Check determinism_check() {
  Check c;
  const auto t0 = Clock::now();
  auto run = [&](const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    c.require(code == 0, args.front() + " exited " + std::to_string(code) + ": " + err.str());
    return out.str();
  };
  std::vector<std::string> outputs[2];
  for (auto& o : outputs) {
    fixture::TempDir dir("e2e");
    run({"ingest", "--manifest", (fixture::dir() / "manifest.json").string(), "--out", dir / "dataset.json"});
    run({"train", "--snapshot", dir / "dataset.json", "--out", dir / "models.json", "--seed", "42"});
    const std::vector<std::string> common{"--snapshot", dir / "dataset.json", "--models", dir / "models.json"};
    auto with = [&](std::vector<std::string> a) {
      a.insert(a.end(), common.begin(), common.end());
      return a;
    };
    run(with({"score", "--out", dir / "scores.csv"}));
    o.push_back(read_text_file(dir / "scores.csv"));
    o.push_back(read_text_file(dir / "models.json"));
    o.push_back(run(with({"rank", "--key", "total"})));
    const std::string isbn = fixture::dataset().books.front().isbn;
    o.push_back(run(with({"report", "--isbn", isbn})));
    o.push_back(run(with({"report", "--isbn", isbn, "--format", "json"})));
  }
  c.require(outputs[0] == outputs[1], "outputs differ between runs");
  const double elapsed = seconds_since(t0);
  c.require(elapsed < 30.0, fmt("took %.2f s", elapsed));
  return c;
}

Check topic_check() {
  Check c;
  std::vector<int> classes;
  const auto corpus = fixture::two_topic_corpus(&classes);
  TopicModelParams p;
  p.topic_count = 2;
  p.seed = 7;
  const TopicModel m = fit_topic_model(corpus, p);
  int confident = 0;
  std::array<std::array<int, 2>, 2> table{};
  for (Eigen::Index d = 0; d < m.doc_topic.rows(); ++d) {
    Eigen::Index top = 0;
    const double v = m.doc_topic.row(d).maxCoeff(&top);
    confident += v > 0.8 ? 1 : 0;
    ++table[static_cast<std::size_t>(top)][static_cast<std::size_t>(classes[static_cast<std::size_t>(d)])];
  }
  const int agree = std::max(table[0][0], table[0][1]) + std::max(table[1][0], table[1][1]);
  const double purity = static_cast<double>(agree) / static_cast<double>(corpus.size());
  c.require(purity >= 0.9, fmt("purity %.3f", purity));
  c.require(confident >= 18, fmt("%.0f of 20 documents above 0.8", confident));
  return c;
}

Check classifier_check() {
  Check c;
  std::mt19937 rng(106);
  const std::vector<std::string> pos{"great", "excellent", "clear", "helpful", "love", "insightful", "superb", "useful"};
  const std::vector<std::string> neg{"boring", "confusing", "poor", "dull", "waste", "errors", "awful", "useless"};
  const std::vector<std::string> neutral{"book", "chapter", "author", "read", "the", "this", "pages", "edition"};
  auto doc = [&](const std::vector<std::string>& cue) {
    std::uniform_int_distribution<std::size_t> ci(0, cue.size() - 1), ni(0, neutral.size() - 1);
    std::string s;
    for (int i = 0; i < 4; ++i) s += cue[ci(rng)] + " ";
    for (int i = 0; i < 8; ++i) s += neutral[ni(rng)] + " ";
    return tokenize(s);
  };
  std::vector<std::pair<TokenStream, Polarity>> train, test;
  for (int i = 0; i < 200; ++i) train.emplace_back(doc(i % 2 ? neg : pos), i % 2 ? Polarity::Negative : Polarity::Positive);
  for (int i = 0; i < 200; ++i) test.emplace_back(doc(i % 2 ? neg : pos), i % 2 ? Polarity::Negative : Polarity::Positive);
  const auto sentiment = train_sentiment(train);
  int right = 0;
  for (const auto& [t, label] : test) right += sentiment.predict(t) == label ? 1 : 0;
  const double accuracy = static_cast<double>(right) / static_cast<double>(test.size());
  c.require(accuracy >= 0.95, fmt("sentiment accuracy %.3f", accuracy));

  const std::array<std::vector<std::string>, 3> vocab{
      std::vector<std::string>{"previously", "history", "overview", "survey", "established"},
      std::vector<std::string>{"whereas", "unlike", "contrast", "compared", "outperforms"},
      std::vector<std::string>{"adopt", "apply", "employ", "following", "implement"}};
  const std::array<CitationFunction, 3> labels{CitationFunction::Background, CitationFunction::Comparison,
                                               CitationFunction::Use};
  std::vector<std::pair<TokenStream, CitationFunction>> ftrain, ftest;
  for (int i = 0; i < 150; ++i) {
    const auto k = static_cast<std::size_t>(i % 3);
    std::uniform_int_distribution<std::size_t> vi(0, vocab[k].size() - 1);
    auto make = [&] {
      std::string s;
      for (int j = 0; j < 6; ++j) s += vocab[k][vi(rng)] + " ";
      return tokenize(s);
    };
    ftrain.emplace_back(make(), labels[k]);
    ftest.emplace_back(make(), labels[k]);
  }
  const auto fn = train_function_classifier(ftrain);
  int fright = 0;
  for (const auto& [t, label] : ftest) fright += fn.predict(t) == label ? 1 : 0;
  c.require(fright == static_cast<int>(ftest.size()), fmt("function accuracy %.3f", fright / double(ftest.size())));
  return c;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Check()>>> criteria{
      {"reference weights", reference_weights_check},
      {"entropy suite", entropy_check},
      {"normalization suite", normalization_check},
      {"metric oracle equivalence", metric_oracle_check},
      {"AHP suite", ahp_check},
      {"scoring suite", scoring_check},
      {"correlation suite", correlation_check},
      {"end-to-end determinism", determinism_check},
      {"topic recovery", topic_check},
      {"classifier sanity", classifier_check},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Check c;
    const auto t0 = Clock::now();
    try {
      c = run();
    } catch (const std::exception& e) {
      c.ok = false;
      c.detail = std::string("threw: ") + e.what();
    }
    const double s = seconds_since(t0);
    std::printf("%s %s (%.2f s)%s%s\n", c.ok ? "PASS" : "FAIL", name.c_str(), s, c.ok ? "" : ": ",
                c.detail.c_str());
    failed += c.ok ? 0 : 1;
  }
  std::fflush(stdout);
  return failed == 0 ? 0 : 1;
}
