#pragma once

// Text models feeding the metric formulas: tokenization, LDA topics, naive Bayes
// classifiers for review polarity and citation function, and lexicon aspect polarity.

#include "bookimpact/core.hpp"
#include "bookimpact/datamodel.hpp"
#include "bookimpact/lexicon.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace bookimpact {

struct Token {
  std::string text;
  std::size_t offset = 0;  // byte offset into the source text

  bool operator==(const Token&) const = default;
};

struct TokenStream {
  std::vector<Token> tokens;

  std::size_t size() const { return tokens.size(); }
  bool empty() const { return tokens.empty(); }
  std::vector<std::string> texts() const;
};

inline constexpr std::string_view kWhitespacePunct = "whitespace-punct";
inline constexpr std::string_view kCjkBigram = "cjk-bigram";

// "whitespace-punct": split on whitespace and ASCII punctuation, lowercase ASCII.
// "cjk-bigram": overlapping bigrams over runs of CJK ideographs (a lone ideograph is
// emitted as a unigram) plus lowercased ASCII alphanumeric runs; everything else separates.
TokenStream tokenize(std::string_view text, std::string_view profile = kWhitespacePunct);

// ---------------------------------------------------------------------------
// Topic model

struct TopicModelParams {
  int topic_count = 20;
  std::uint64_t seed = 1;
  int iterations = 500;
  double alpha = -1.0;  // <= 0 means 50 / K
  double beta = 0.01;
  double tau = -1.0;  // <= 0 means 1 / K

  double resolved_alpha() const { return alpha > 0 ? alpha : 50.0 / topic_count; }
  double resolved_tau() const { return tau > 0 ? tau : 1.0 / topic_count; }
};

struct TopicModel {
  int topic_count = 0;
  std::uint64_t seed = 0;
  int iterations = 0;
  double alpha = 0;
  double beta = 0;
  double tau = 0;
  std::vector<std::string> vocabulary;  // sorted
  MatrixXd topic_word;                  // K x V, rows sum to 1
  MatrixXd doc_topic;                   // D x K, rows sum to 1
  std::vector<std::string> doc_ids;     // row labels of doc_topic

  // Row of doc_topic for a training document.
  std::optional<VectorXd> find_document(std::string_view doc_id) const;

  // Fold-in Gibbs inference for an unseen document with topic_word held fixed.
  // Deterministic in (model, tokens). Tokens outside the vocabulary are ignored;
  // a document with no known tokens gets the uniform distribution.
  VectorXd infer(const TokenStream& doc) const;
};

// Collapsed Gibbs sampling LDA. Deterministic given identical inputs.
TopicModel fit_topic_model(std::span<const TokenStream> corpus, const TopicModelParams& params,
                           std::vector<std::string> doc_ids = {});

// Number of entries >= tau, at least 1.
template <typename Derived>
int active_topic_count(const Eigen::MatrixBase<Derived>& distribution, typename Derived::Scalar tau) {
  const auto n = (distribution.array() >= tau).count();
  return n < 1 ? 1 : static_cast<int>(n);
}

// Entries >= tau renormalized to sum 1; when none pass, the single largest entry with mass 1.
template <typename Derived>
VectorX<typename Derived::Scalar> restricted_distribution(const Eigen::MatrixBase<Derived>& distribution,
                                                          typename Derived::Scalar tau) {
  using Scalar = typename Derived::Scalar;
  std::vector<Scalar> kept;
  for (Eigen::Index i = 0; i < distribution.size(); ++i)
    if (distribution(i) >= tau) kept.push_back(distribution(i));
  if (kept.empty()) return VectorX<Scalar>::Ones(1);
  VectorX<Scalar> out = Eigen::Map<const VectorX<Scalar>>(kept.data(), static_cast<Eigen::Index>(kept.size()));
  return out / out.sum();
}

// ---------------------------------------------------------------------------
// Multinomial naive Bayes with add-one smoothing. Classes are ordered; an exact
// tie in log-posterior goes to the earliest class in that order.

template <typename Label, std::size_t N>
struct NaiveBayes {
  static constexpr std::size_t kClassCount = N;

  std::array<Label, N> classes{};
  std::map<std::string, int> vocabulary;  // term -> column
  VectorXd priors;                        // N
  MatrixXd likelihoods;                   // N x V
  double smoothing = 1.0;

  Label predict(const TokenStream& doc) const;
  VectorXd log_posterior(const TokenStream& doc) const;
};

using SentimentModel = NaiveBayes<Polarity, 2>;
using FunctionClassifier = NaiveBayes<CitationFunction, 3>;

struct LabeledText {
  TokenStream tokens;
  std::size_t label = 0;  // index into the class order
};

// Generic trainer; the caller supplies class order and names for error messages.
template <typename Label, std::size_t N>
NaiveBayes<Label, N> train_naive_bayes(std::span<const LabeledText> examples, const std::array<Label, N>& classes,
                                       const std::array<std::string_view, N>& class_names);

SentimentModel train_sentiment(std::span<const std::pair<TokenStream, Polarity>> examples);
Polarity classify_sentiment(const SentimentModel& model, const TokenStream& review);

FunctionClassifier train_function_classifier(
    std::span<const std::pair<TokenStream, CitationFunction>> examples);
// Gold labels bypass the classifier.
CitationFunction classify_citation_function(const FunctionClassifier& classifier, const CitationContext& context,
                                            std::string_view profile = kWhitespacePunct);

struct BootstrapLabel {
  std::size_t review_index = 0;
  Polarity polarity = Polarity::Positive;

  bool operator==(const BootstrapLabel&) const = default;
};

// Gold label wins; otherwise star 4-5 positive, 1-2 negative, 3 excluded.
std::vector<BootstrapLabel> bootstrap_polarity_labels(std::span<const Review> reviews);

// ---------------------------------------------------------------------------
// Aspects

struct AspectMention {
  std::string aspect;
  int polarity = 0;  // +1 / -1

  bool operator==(const AspectMention&) const = default;
};

// One entry per trigger occurrence with nonzero net cue count inside +-window tokens.
// A cue directly preceded by a negator counts with flipped sign.
std::vector<AspectMention> detect_aspect_polarities(const TokenStream& review, const AspectLexicon& lexicon,
                                                    int window = 3);

// ---------------------------------------------------------------------------
// Fitted model set used by metric assembly

struct TrainConfig {
  TopicModelParams toc{.topic_count = 20};
  TopicModelParams citation{.topic_count = 20};
  bool per_discipline_toc = false;
};

struct ModelBundle {
  std::string tokenizer_profile{kWhitespacePunct};
  std::map<std::string, TopicModel> toc_models;  // "" = global, else discipline name
  std::optional<TopicModel> citation_model;
  std::optional<SentimentModel> sentiment;
  std::optional<FunctionClassifier> function_classifier;

  // Per-discipline model when present, else the global one, else nullptr.
  const TopicModel* toc_model_for(const Discipline& discipline) const;
};

// Topic-model document ids: the isbn for TOCs, "<isbn>/<lit_id>" for citing literatures.
std::string literature_doc_id(const CitingLiterature& lit);

// Fits every model the dataset supports. Models that cannot be trained (no TOC text,
// a missing class) are skipped with a warning.
ModelBundle train_models(const Dataset& dataset, const TrainConfig& config,
                         std::vector<std::string>* warnings = nullptr);

}  // namespace bookimpact
