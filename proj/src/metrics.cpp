#include "bookimpact/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

namespace bookimpact {

// ---------------------------------------------------------------------------
// Reviews

ReviewMetrics review_metrics(std::span<const Review* const> reviews, const SentimentModel* model,
                             const AspectLexicon& lexicon, const ReviewOptions& options) {
  ReviewMetrics out;
  out.review_count = static_cast<int>(reviews.size());
  if (reviews.empty()) return out;

  long star_sum = 0;
  for (const Review* r : reviews) {
    star_sum += r->star;
    if (r->star >= 1 && r->star <= 5) ++out.star_histogram[static_cast<std::size_t>(r->star - 1)];

    const bool need_tokens = !r->polarity_label.has_value() || !r->aspect_labels.has_value();
    const TokenStream tokens = need_tokens ? tokenize(r->text, options.tokenizer_profile) : TokenStream{};

    std::optional<Polarity> polarity = r->polarity_label;
    if (!polarity && model) polarity = classify_sentiment(*model, tokens);
    if (polarity) ++(*polarity == Polarity::Positive ? out.positive : out.negative);

    if (r->aspect_labels) {
      for (const auto& a : *r->aspect_labels) {
        auto& tally = out.aspects[a.aspect];
        ++tally.mentions;
        tally.net += a.polarity > 0 ? 1 : -1;
      }
    } else {
      for (const auto& m : detect_aspect_polarities(tokens, lexicon, options.aspect_window)) {
        auto& tally = out.aspects[m.aspect];
        ++tally.mentions;
        tally.net += m.polarity;
      }
    }
  }

  out.spos = out.positive;
  out.sneg = out.negative;
  out.sstar = static_cast<double>(star_sum) / static_cast<double>(reviews.size());
  if (!out.aspects.empty()) {
    double sum = 0;
    for (const auto& [aspect, tally] : out.aspects) sum += tally.satisfaction();
    out.saspect = sum / static_cast<double>(out.aspects.size());
  }
  return out;
}

ReviewMetrics review_metrics(std::span<const Review> reviews, const SentimentModel* model,
                             const AspectLexicon& lexicon, const ReviewOptions& options) {
  std::vector<const Review*> ptrs;
  for (const auto& r : reviews) ptrs.push_back(&r);
  return review_metrics(std::span<const Review* const>(ptrs), model, lexicon, options);
}

// ---------------------------------------------------------------------------
// Citations

VectorXd book_topic_distribution(std::span<const VectorXd> distributions, std::span<const double> lengths) {
  if (distributions.size() != lengths.size())
    fail(ErrorKind::LengthMismatch, "distributions and lengths differ in size");
  if (distributions.empty()) fail(ErrorKind::InsufficientData, "no literature topic distributions");
  VectorXd mean = VectorXd::Zero(distributions.front().size());
  double total = 0;
  for (std::size_t i = 0; i < distributions.size(); ++i) {
    if (distributions[i].size() != mean.size()) fail(ErrorKind::DimensionMismatch, "topic counts differ");
    mean += lengths[i] * distributions[i];
    total += lengths[i];
  }
  if (total <= 0) fail(ErrorKind::InsufficientData, "total literature length is zero");
  return mean / total;
}

CitationMetrics citation_metrics(std::span<const CitingLiterature* const> literatures, const TopicModel* topics,
                                 const FunctionClassifier* classifier, const CitationOptions& options) {
  CitationMetrics out;
  out.literature_count = static_cast<int>(literatures.size());
  if (literatures.empty()) return out;

  long intensity_sum = 0;
  std::vector<VectorXd> dists;
  std::vector<double> lengths;
  for (const CitingLiterature* lit : literatures) {
    intensity_sum += lit->intensity;
    ++out.intensity_histogram[lit->intensity];

    if (topics) {
      const TokenStream tokens = tokenize(lit->body_text, options.tokenizer_profile);
      if (!tokens.empty()) {
        if (auto row = topics->find_document(literature_doc_id(*lit)))
          dists.push_back(std::move(*row));
        else
          dists.push_back(topics->infer(tokens));
        lengths.push_back(static_cast<double>(tokens.size()));
      }
    }

    for (const auto& ctx : lit->contexts) {
      std::optional<CitationFunction> f = ctx.function_label;
      if (!f && classifier) f = classify_citation_function(*classifier, ctx, options.tokenizer_profile);
      if (f) ++out.function_counts[static_cast<std::size_t>(*f)];
      else ++out.unscored_contexts;
    }
  }

  const double n = static_cast<double>(literatures.size());
  out.scitation = n;
  out.sint = static_cast<double>(intensity_sum) / n;

  if (!dists.empty()) {
    const double tau = options.tau > 0 ? options.tau : topics->tau;
    const VectorXd book = book_topic_distribution(dists, lengths);
    out.active_topics = active_topic_count(book, tau);
    out.restricted_topics = restricted_distribution(book, tau);
    out.scitdepth = n / out.active_topics;
    out.scitbreadth = normalized_entropy(out.restricted_topics);
  }

  const int scored = out.function_counts[0] + out.function_counts[1] + out.function_counts[2];
  if (scored > 0) {
    double sum = 0;
    for (std::size_t f = 0; f < 3; ++f)
      sum += out.function_counts[f] * function_score(static_cast<CitationFunction>(f));
    out.sfun = sum / scored;
  }
  return out;
}

CitationMetrics citation_metrics(std::span<const CitingLiterature> literatures, const TopicModel* topics,
                                 const FunctionClassifier* classifier, const CitationOptions& options) {
  std::vector<const CitingLiterature*> ptrs;
  for (const auto& l : literatures) ptrs.push_back(&l);
  return citation_metrics(std::span<const CitingLiterature* const>(ptrs), topics, classifier, options);
}

// ---------------------------------------------------------------------------
// Usage

std::map<std::string, int> reorder_sale_ranks(std::span<const SaleRecord> sales) {
  std::vector<int> ranks;
  for (const auto& s : sales) ranks.push_back(s.sale_rank);
  std::sort(ranks.begin(), ranks.end());
  std::map<std::string, int> positions;
  for (const auto& s : sales) {
    const auto better = std::lower_bound(ranks.begin(), ranks.end(), s.sale_rank) - ranks.begin();
    positions[s.isbn] = static_cast<int>(better) + 1;
  }
  return positions;
}

UsageMetrics usage_metrics(const HoldingsRecord* holdings, std::optional<int> sale_position, int books_with_sale,
                           std::optional<int> sale_rank) {
  UsageMetrics out;
  out.sale_rank = sale_rank;
  if (holdings && !holdings->per_region.empty()) {
    out.regions.assign(holdings->per_region.begin(), holdings->per_region.end());
    std::stable_sort(out.regions.begin(), out.regions.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    long total = 0;
    for (const auto& [region, count] : out.regions) total += count;
    VectorXd shares(static_cast<Eigen::Index>(out.regions.size()));
    for (std::size_t j = 0; j < out.regions.size(); ++j)
      shares(static_cast<Eigen::Index>(j)) = static_cast<double>(out.regions[j].second) / static_cast<double>(total);
    out.sreg = static_cast<double>(out.regions.size());
    out.snum = static_cast<double>(total);
    out.sdis = normalized_entropy(shares / shares.sum());
  }
  if (sale_position) out.ssale = static_cast<double>(books_with_sale + 1 - *sale_position);
  return out;
}

// ---------------------------------------------------------------------------
// Assembly

EvidenceIndex::EvidenceIndex(const Dataset& ds) {
  for (const auto& r : ds.reviews) reviews_[r.isbn].push_back(&r);
  for (const auto& l : ds.citing_literatures) literatures_[l.isbn].push_back(&l);
  for (const auto& h : ds.holdings) holdings_.emplace(h.isbn, &h);
  for (const auto& s : ds.sales) sales_.emplace(s.isbn, &s);
  sale_positions_ = reorder_sale_ranks(ds.sales);
}

std::span<const Review* const> EvidenceIndex::reviews(const std::string& isbn) const {
  auto it = reviews_.find(isbn);
  if (it == reviews_.end()) return {};
  return it->second;
}

std::span<const CitingLiterature* const> EvidenceIndex::literatures(const std::string& isbn) const {
  auto it = literatures_.find(isbn);
  if (it == literatures_.end()) return {};
  return it->second;
}

const HoldingsRecord* EvidenceIndex::holdings(const std::string& isbn) const {
  auto it = holdings_.find(isbn);
  return it == holdings_.end() ? nullptr : it->second;
}

const SaleRecord* EvidenceIndex::sale(const std::string& isbn) const {
  auto it = sales_.find(isbn);
  return it == sales_.end() ? nullptr : it->second;
}

std::optional<int> EvidenceIndex::sale_position(const std::string& isbn) const {
  auto it = sale_positions_.find(isbn);
  if (it == sale_positions_.end()) return std::nullopt;
  return it->second;
}

BookAnalysis analyze_book(const BookRecord& book, const Dataset& dataset, const EvidenceIndex& index,
                          const ModelBundle& models, const MetricConfig& config) {
  BookAnalysis out;
  out.vector.isbn = book.isbn;
  const std::string_view profile = models.tokenizer_profile;

  // contents
  const TokenStream toc = tokenize(book.toc_text, profile);
  const TopicModel* toc_model = models.toc_model_for(book.discipline);
  if (toc.empty()) {
    out.warnings.push_back("book " + book.isbn + ": empty TOC text, content metrics absent");
  } else if (!toc_model) {
    out.warnings.push_back("book " + book.isbn + ": no TOC topic model, content metrics absent");
  } else {
    auto stored = toc_model->find_document(book.isbn);
    const VectorXd dist = stored ? std::move(*stored) : toc_model->infer(toc);
    const int active = active_topic_count(dist, toc_model->tau);
    out.toc_active_topics = active;
    out.vector.set(MetricId::TocDepth, toc_depth(book.page_count, active));
    out.vector.set(MetricId::TocBreadth, toc_breadth(restricted_distribution(dist, toc_model->tau)));
  }

  // reviews
  out.reviews = review_metrics(index.reviews(book.isbn), models.sentiment ? &*models.sentiment : nullptr,
                               dataset.aspect_lexicon, {profile, config.aspect_window});
  out.vector.set(MetricId::PosReviews, out.reviews.spos);
  out.vector.set(MetricId::NegReviews, out.reviews.sneg);
  out.vector.set(MetricId::StarRating, out.reviews.sstar);
  out.vector.set(MetricId::AspectSatisfaction, out.reviews.saspect);

  // citations
  const auto lits = index.literatures(book.isbn);
  out.citations = citation_metrics(lits, models.citation_model ? &*models.citation_model : nullptr,
                                   models.function_classifier ? &*models.function_classifier : nullptr,
                                   {profile, -1});
  out.vector.set(MetricId::CitationFrequency, out.citations.scitation);
  out.vector.set(MetricId::CitlitDepth, out.citations.scitdepth);
  out.vector.set(MetricId::CitlitBreadth, out.citations.scitbreadth);
  out.vector.set(MetricId::CitationIntensity, out.citations.sint);
  out.vector.set(MetricId::CitationFunction, out.citations.sfun);
  if (!lits.empty() && !out.citations.scitdepth)
    out.warnings.push_back("book " + book.isbn + ": citing literatures carry no topic text, depth/breadth absent");
  if (out.citations.unscored_contexts > 0)
    out.warnings.push_back("book " + book.isbn + ": " + std::to_string(out.citations.unscored_contexts) +
                           " citation contexts unscored (no label, no classifier)");

  // usage
  const SaleRecord* sale = index.sale(book.isbn);
  out.usage = usage_metrics(index.holdings(book.isbn), index.sale_position(book.isbn), index.books_with_sale(),
                            sale ? std::optional<int>(sale->sale_rank) : std::nullopt);
  out.vector.set(MetricId::HoldingNumber, out.usage.snum);
  out.vector.set(MetricId::HoldingRegion, out.usage.sreg);
  out.vector.set(MetricId::HoldingDistribution, out.usage.sdis);
  out.vector.set(MetricId::Sale, out.usage.ssale);
  return out;
}

std::vector<BookAnalysis> analyze_dataset(const Dataset& dataset, const ModelBundle& models,
                                          const MetricConfig& config) {
  const EvidenceIndex index(dataset);
  std::vector<const BookRecord*> books;
  for (const auto& b : dataset.books) books.push_back(&b);
  std::sort(books.begin(), books.end(), [](auto* a, auto* b) { return a->isbn < b->isbn; });
  std::vector<BookAnalysis> out;
  out.reserve(books.size());
  for (const BookRecord* b : books) out.push_back(analyze_book(*b, dataset, index, models, config));
  return out;
}

MetricVector metric_vector(const BookRecord& book, const Dataset& dataset, const ModelBundle& models,
                           const MetricConfig& config) {
  return analyze_book(book, dataset, EvidenceIndex(dataset), models, config).vector;
}

std::string metric_table_csv(std::span<const MetricVector> vectors) {
  std::ostringstream out;
  out << "isbn";
  for (const auto& m : kMetrics) out << ',' << m.key;
  for (const auto& m : kMetrics) out << ",has_" << m.key;
  out << '\n';
  char buf[64];
  for (const auto& v : vectors) {
    out << v.isbn;
    for (int j = 0; j < kMetricCount; ++j) {
      if (v.present(j)) {
        std::snprintf(buf, sizeof buf, "%.12g", v.values(j));
        out << ',' << buf;
      } else {
        out << ',';
      }
    }
    for (int j = 0; j < kMetricCount; ++j) out << ',' << (v.present(j) ? 1 : 0);
    out << '\n';
  }
  return out.str();
}

}  // namespace bookimpact
