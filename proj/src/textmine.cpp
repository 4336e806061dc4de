#include "bookimpact/textmine.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <random>
#include <set>

namespace bookimpact {

std::vector<std::string> TokenStream::texts() const {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(t.text);
  return out;
}

namespace {

bool is_ascii_separator(unsigned char c) { return c < 0x80 && (std::isspace(c) || std::ispunct(c)); }

TokenStream tokenize_whitespace_punct(std::string_view text) {
  TokenStream out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_ascii_separator(static_cast<unsigned char>(text[i]))) ++i;
    if (i >= text.size()) break;
    const std::size_t start = i;
    std::string tok;
    while (i < text.size() && !is_ascii_separator(static_cast<unsigned char>(text[i]))) {
      tok.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(text[i]))));
      ++i;
    }
    out.tokens.push_back({std::move(tok), start});
  }
  return out;
}

struct CodePoint {
  char32_t value;
  std::size_t offset;
  std::size_t length;
};

// Lenient decoder: invalid bytes decode as U+FFFD of length 1.
std::vector<CodePoint> decode_utf8(std::string_view s) {
  std::vector<CodePoint> out;
  std::size_t i = 0;
  while (i < s.size()) {
    const auto c = static_cast<unsigned char>(s[i]);
    std::size_t len = 1;
    char32_t cp = c;
    if (c >= 0xF0 && c < 0xF8) { len = 4; cp = c & 0x07; }
    else if (c >= 0xE0) { len = 3; cp = c & 0x0F; }
    else if (c >= 0xC0) { len = 2; cp = c & 0x1F; }
    else if (c >= 0x80) { len = 0; }
    bool ok = len > 0 && i + len <= s.size();
    for (std::size_t k = 1; ok && k < len; ++k) {
      const auto cc = static_cast<unsigned char>(s[i + k]);
      if ((cc & 0xC0) != 0x80) ok = false;
      else cp = (cp << 6) | (cc & 0x3F);
    }
    if (!ok) { cp = 0xFFFD; len = 1; }
    out.push_back({cp, i, len});
    i += len;
  }
  return out;
}

bool is_cjk(char32_t cp) {
  return (cp >= 0x4E00 && cp <= 0x9FFF) || (cp >= 0x3400 && cp <= 0x4DBF) || (cp >= 0xF900 && cp <= 0xFAFF) ||
         (cp >= 0x20000 && cp <= 0x2A6DF);
}

bool is_ascii_alnum(char32_t cp) { return cp < 0x80 && std::isalnum(static_cast<int>(cp)); }

TokenStream tokenize_cjk_bigram(std::string_view text) {
  TokenStream out;
  const auto cps = decode_utf8(text);
  std::size_t i = 0;
  while (i < cps.size()) {
    if (is_cjk(cps[i].value)) {
      std::size_t j = i;
      while (j < cps.size() && is_cjk(cps[j].value)) ++j;
      if (j - i == 1) {
        out.tokens.push_back({std::string(text.substr(cps[i].offset, cps[i].length)), cps[i].offset});
      } else {
        for (std::size_t k = i; k + 1 < j; ++k) {
          const std::size_t len = cps[k].length + cps[k + 1].length;
          out.tokens.push_back({std::string(text.substr(cps[k].offset, len)), cps[k].offset});
        }
      }
      i = j;
    } else if (is_ascii_alnum(cps[i].value)) {
      std::size_t j = i;
      std::string tok;
      while (j < cps.size() && is_ascii_alnum(cps[j].value)) {
        tok.push_back(static_cast<char>(std::tolower(static_cast<int>(cps[j].value))));
        ++j;
      }
      out.tokens.push_back({std::move(tok), cps[i].offset});
      i = j;
    } else {
      ++i;
    }
  }
  return out;
}

// Uniform double in [0, 1) from the top 53 bits; independent of the standard library's
// distribution implementations so sampler output is portable.
double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

int sample_index(std::mt19937_64& rng, const std::vector<double>& cumulative) {
  const double u = uniform01(rng) * cumulative.back();
  auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
  if (it == cumulative.end()) --it;
  return static_cast<int>(it - cumulative.begin());
}

std::uint64_t fnv1a(const TokenStream& doc) {
  std::uint64_t h = 1469598103934665603ULL;
  for (const auto& t : doc.tokens) {
    for (unsigned char c : t.text) {
      h ^= c;
      h *= 1099511628211ULL;
    }
    h ^= 0xFF;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace

TokenStream tokenize(std::string_view text, std::string_view profile) {
  if (profile == kWhitespacePunct) return tokenize_whitespace_punct(text);
  if (profile == kCjkBigram) return tokenize_cjk_bigram(text);
  fail(ErrorKind::UnknownProfile, "unknown tokenizer profile '" + std::string(profile) + "'");
}

// ---------------------------------------------------------------------------

std::optional<VectorXd> TopicModel::find_document(std::string_view doc_id) const {
  for (std::size_t d = 0; d < doc_ids.size(); ++d)
    if (doc_ids[d] == doc_id) return VectorXd(doc_topic.row(static_cast<Eigen::Index>(d)).transpose());
  return std::nullopt;
}

TopicModel fit_topic_model(std::span<const TokenStream> corpus, const TopicModelParams& params,
                           std::vector<std::string> doc_ids) {
  const int K = params.topic_count;
  if (K < 2) fail(ErrorKind::InvalidArgument, "topic_count must be >= 2");
  if (params.iterations < 1) fail(ErrorKind::InvalidArgument, "iterations must be >= 1");
  if (params.beta <= 0) fail(ErrorKind::InvalidArgument, "beta must be positive");
  if (corpus.empty()) fail(ErrorKind::DegenerateCorpus, "empty corpus");
  for (std::size_t d = 0; d < corpus.size(); ++d)
    if (corpus[d].empty()) fail(ErrorKind::EmptyDocument, "document " + std::to_string(d) + " has no tokens");
  if (!doc_ids.empty() && doc_ids.size() != corpus.size())
    fail(ErrorKind::InvalidArgument, "doc_ids size does not match corpus");

  std::set<std::string> vocab_set;
  for (const auto& doc : corpus)
    for (const auto& t : doc.tokens) vocab_set.insert(t.text);
  if (vocab_set.size() < 2) fail(ErrorKind::DegenerateCorpus, "vocabulary smaller than 2");

  TopicModel model;
  model.topic_count = K;
  model.seed = params.seed;
  model.iterations = params.iterations;
  model.alpha = params.resolved_alpha();
  model.beta = params.beta;
  model.tau = params.resolved_tau();
  model.vocabulary.assign(vocab_set.begin(), vocab_set.end());
  std::map<std::string_view, int> word_id;
  for (std::size_t w = 0; w < model.vocabulary.size(); ++w) word_id[model.vocabulary[w]] = static_cast<int>(w);

  const int V = static_cast<int>(model.vocabulary.size());
  const int D = static_cast<int>(corpus.size());
  const double alpha = model.alpha, beta = model.beta, vbeta = V * beta;

  std::vector<std::vector<int>> words(D), z(D);
  Eigen::MatrixXi n_dk = Eigen::MatrixXi::Zero(D, K);
  Eigen::MatrixXi n_kw = Eigen::MatrixXi::Zero(K, V);
  Eigen::VectorXi n_k = Eigen::VectorXi::Zero(K);

  std::mt19937_64 rng(params.seed);
  for (int d = 0; d < D; ++d) {
    for (const auto& t : corpus[d].tokens) {
      const int w = word_id.at(t.text);
      const int k = std::min(K - 1, static_cast<int>(uniform01(rng) * K));
      words[d].push_back(w);
      z[d].push_back(k);
      ++n_dk(d, k);
      ++n_kw(k, w);
      ++n_k(k);
    }
  }

  std::vector<double> cumulative(K);
  for (int it = 0; it < params.iterations; ++it) {
    for (int d = 0; d < D; ++d) {
      for (std::size_t n = 0; n < words[d].size(); ++n) {
        const int w = words[d][n];
        int k = z[d][n];
        --n_dk(d, k);
        --n_kw(k, w);
        --n_k(k);
        double acc = 0;
        for (int t = 0; t < K; ++t) {
          acc += (n_dk(d, t) + alpha) * (n_kw(t, w) + beta) / (n_k(t) + vbeta);
          cumulative[t] = acc;
        }
        k = sample_index(rng, cumulative);
        z[d][n] = k;
        ++n_dk(d, k);
        ++n_kw(k, w);
        ++n_k(k);
      }
    }
  }

  model.doc_topic.resize(D, K);
  for (int d = 0; d < D; ++d) {
    const double len = static_cast<double>(words[d].size());
    for (int k = 0; k < K; ++k) model.doc_topic(d, k) = (n_dk(d, k) + alpha) / (len + K * alpha);
    model.doc_topic.row(d) /= model.doc_topic.row(d).sum();
  }
  model.topic_word.resize(K, V);
  for (int k = 0; k < K; ++k) {
    for (int w = 0; w < V; ++w) model.topic_word(k, w) = (n_kw(k, w) + beta) / (n_k(k) + vbeta);
    model.topic_word.row(k) /= model.topic_word.row(k).sum();
  }
  if (doc_ids.empty())
    for (int d = 0; d < D; ++d) doc_ids.push_back(std::to_string(d));
  model.doc_ids = std::move(doc_ids);
  return model;
}

VectorXd TopicModel::infer(const TokenStream& doc) const {
  const int K = topic_count;
  std::vector<int> words;
  for (const auto& t : doc.tokens) {
    auto it = std::lower_bound(vocabulary.begin(), vocabulary.end(), t.text);
    if (it != vocabulary.end() && *it == t.text) words.push_back(static_cast<int>(it - vocabulary.begin()));
  }
  if (words.empty()) return VectorXd::Constant(K, 1.0 / K);

  std::mt19937_64 rng(seed ^ fnv1a(doc));
  std::vector<int> z(words.size());
  Eigen::VectorXi n_k = Eigen::VectorXi::Zero(K);
  for (std::size_t n = 0; n < words.size(); ++n) {
    z[n] = std::min(K - 1, static_cast<int>(uniform01(rng) * K));
    ++n_k(z[n]);
  }
  std::vector<double> cumulative(K);
  for (int it = 0; it < iterations; ++it) {
    for (std::size_t n = 0; n < words.size(); ++n) {
      --n_k(z[n]);
      double acc = 0;
      for (int t = 0; t < K; ++t) {
        acc += (n_k(t) + alpha) * topic_word(t, words[n]);
        cumulative[t] = acc;
      }
      z[n] = sample_index(rng, cumulative);
      ++n_k(z[n]);
    }
  }
  VectorXd theta(K);
  for (int k = 0; k < K; ++k) theta(k) = (n_k(k) + alpha) / (words.size() + K * alpha);
  return theta / theta.sum();
}

// ---------------------------------------------------------------------------

template <typename Label, std::size_t N>
VectorXd NaiveBayes<Label, N>::log_posterior(const TokenStream& doc) const {
  VectorXd score = priors.array().log();
  for (const auto& t : doc.tokens) {
    auto it = vocabulary.find(t.text);
    if (it == vocabulary.end()) continue;
    for (std::size_t c = 0; c < N; ++c)
      score(static_cast<Eigen::Index>(c)) += std::log(likelihoods(static_cast<Eigen::Index>(c), it->second));
  }
  return score;
}

template <typename Label, std::size_t N>
Label NaiveBayes<Label, N>::predict(const TokenStream& doc) const {
  const VectorXd score = log_posterior(doc);
  std::size_t best = 0;
  for (std::size_t c = 1; c < N; ++c)
    if (score(static_cast<Eigen::Index>(c)) > score(static_cast<Eigen::Index>(best))) best = c;
  return classes[best];
}

template <typename Label, std::size_t N>
NaiveBayes<Label, N> train_naive_bayes(std::span<const LabeledText> examples, const std::array<Label, N>& classes,
                                       const std::array<std::string_view, N>& class_names) {
  std::array<int, N> doc_counts{};
  for (const auto& ex : examples) {
    if (ex.label >= N) fail(ErrorKind::InvalidArgument, "label index out of range");
    ++doc_counts[ex.label];
  }
  for (std::size_t c = 0; c < N; ++c)
    if (doc_counts[c] == 0) fail(ErrorKind::MissingClass, "no training example for class " + std::string(class_names[c]));

  NaiveBayes<Label, N> model;
  model.classes = classes;
  std::set<std::string> vocab;
  for (const auto& ex : examples)
    for (const auto& t : ex.tokens.tokens) vocab.insert(t.text);
  int col = 0;
  for (const auto& term : vocab) model.vocabulary[term] = col++;

  const auto V = static_cast<Eigen::Index>(vocab.size());
  MatrixXd counts = MatrixXd::Zero(N, V);
  for (const auto& ex : examples)
    for (const auto& t : ex.tokens.tokens) counts(static_cast<Eigen::Index>(ex.label), model.vocabulary[t.text]) += 1.0;

  model.priors.resize(N);
  model.likelihoods.resize(N, V);
  for (std::size_t c = 0; c < N; ++c) {
    const auto ci = static_cast<Eigen::Index>(c);
    model.priors(ci) = static_cast<double>(doc_counts[c]) / static_cast<double>(examples.size());
    const double denom = counts.row(ci).sum() + model.smoothing * static_cast<double>(V);
    model.likelihoods.row(ci) = (counts.row(ci).array() + model.smoothing) / denom;
  }
  return model;
}

template struct NaiveBayes<Polarity, 2>;
template struct NaiveBayes<CitationFunction, 3>;

namespace {
constexpr std::array<Polarity, 2> kPolarityOrder{Polarity::Positive, Polarity::Negative};
constexpr std::array<std::string_view, 2> kPolarityNames{"Positive", "Negative"};
constexpr std::array<CitationFunction, 3> kFunctionOrder{CitationFunction::Background, CitationFunction::Comparison,
                                                         CitationFunction::Use};
constexpr std::array<std::string_view, 3> kFunctionNames{"Background", "Comparison", "Use"};
}  // namespace

SentimentModel train_sentiment(std::span<const std::pair<TokenStream, Polarity>> examples) {
  std::vector<LabeledText> labeled;
  labeled.reserve(examples.size());
  for (const auto& [tokens, p] : examples) labeled.push_back({tokens, p == Polarity::Positive ? 0u : 1u});
  return train_naive_bayes<Polarity, 2>(labeled, kPolarityOrder, kPolarityNames);
}

Polarity classify_sentiment(const SentimentModel& model, const TokenStream& review) { return model.predict(review); }

FunctionClassifier train_function_classifier(std::span<const std::pair<TokenStream, CitationFunction>> examples) {
  std::vector<LabeledText> labeled;
  labeled.reserve(examples.size());
  for (const auto& [tokens, f] : examples) labeled.push_back({tokens, static_cast<std::size_t>(f)});
  return train_naive_bayes<CitationFunction, 3>(labeled, kFunctionOrder, kFunctionNames);
}

CitationFunction classify_citation_function(const FunctionClassifier& classifier, const CitationContext& context,
                                            std::string_view profile) {
  if (context.function_label) return *context.function_label;
  return classifier.predict(tokenize(context.window_text, profile));
}

std::vector<BootstrapLabel> bootstrap_polarity_labels(std::span<const Review> reviews) {
  std::vector<BootstrapLabel> out;
  for (std::size_t i = 0; i < reviews.size(); ++i) {
    const auto& r = reviews[i];
    if (r.polarity_label) out.push_back({i, *r.polarity_label});
    else if (r.star >= 4) out.push_back({i, Polarity::Positive});
    else if (r.star <= 2) out.push_back({i, Polarity::Negative});
  }
  return out;
}

// ---------------------------------------------------------------------------

std::vector<AspectMention> detect_aspect_polarities(const TokenStream& review, const AspectLexicon& lexicon,
                                                    int window) {
  if (window < 1) fail(ErrorKind::InvalidArgument, "aspect window must be >= 1");
  const auto triggers = lexicon.trigger_index();
  const auto& toks = review.tokens;
  const auto n = static_cast<std::ptrdiff_t>(toks.size());

  auto cue = [&](std::ptrdiff_t j) {
    int s = 0;
    if (lexicon.positive.contains(toks[j].text)) s = 1;
    else if (lexicon.negative.contains(toks[j].text)) s = -1;
    if (s != 0 && j > 0 && lexicon.negators.contains(toks[j - 1].text)) s = -s;
    return s;
  };

  std::vector<AspectMention> out;
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    auto hit = triggers.find(toks[i].text);
    if (hit == triggers.end()) continue;
    int net = 0;
    for (std::ptrdiff_t j = std::max<std::ptrdiff_t>(0, i - window); j <= std::min(n - 1, i + window); ++j)
      if (j != i) net += cue(j);
    if (net == 0) continue;
    for (const auto& aspect : hit->second) out.push_back({aspect, net > 0 ? 1 : -1});
  }
  return out;
}

}  // namespace bookimpact

namespace bookimpact {

std::string literature_doc_id(const CitingLiterature& lit) { return lit.isbn + "/" + lit.lit_id; }

const TopicModel* ModelBundle::toc_model_for(const Discipline& discipline) const {
  if (auto it = toc_models.find(discipline.name()); it != toc_models.end()) return &it->second;
  if (auto it = toc_models.find(""); it != toc_models.end()) return &it->second;
  return nullptr;
}

namespace {

void warn(std::vector<std::string>* warnings, std::string message) {
  if (warnings) warnings->push_back(std::move(message));
}

std::optional<TopicModel> try_fit(const std::vector<TokenStream>& docs, std::vector<std::string> ids,
                                  const TopicModelParams& params, const std::string& what,
                                  std::vector<std::string>* warnings) {
  if (docs.empty()) {
    warn(warnings, what + ": no documents with text, model skipped");
    return std::nullopt;
  }
  try {
    return fit_topic_model(docs, params, std::move(ids));
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::DegenerateCorpus) throw;
    warn(warnings, what + ": " + e.what() + ", model skipped");
    return std::nullopt;
  }
}

}  // namespace

ModelBundle train_models(const Dataset& dataset, const TrainConfig& config, std::vector<std::string>* warnings) {
  ModelBundle bundle;
  bundle.tokenizer_profile = dataset.tokenizer_profile;
  const std::string_view profile = bundle.tokenizer_profile;

  std::map<std::string, std::pair<std::vector<TokenStream>, std::vector<std::string>>> toc_groups;
  for (const auto& book : dataset.books) {
    auto tokens = tokenize(book.toc_text, profile);
    if (tokens.empty()) continue;
    if (config.per_discipline_toc) {
      auto& g = toc_groups[book.discipline.name()];
      g.first.push_back(tokens);
      g.second.push_back(book.isbn);
    }
    auto& g = toc_groups[""];
    g.first.push_back(std::move(tokens));
    g.second.push_back(book.isbn);
  }
  if (toc_groups.empty()) warn(warnings, "TOC topic model: no documents with text, model skipped");
  for (auto& [name, group] : toc_groups) {
    const std::string what = name.empty() ? "TOC topic model" : "TOC topic model [" + name + "]";
    if (auto m = try_fit(group.first, std::move(group.second), config.toc, what, warnings))
      bundle.toc_models.emplace(name, std::move(*m));
  }

  std::vector<TokenStream> lit_docs;
  std::vector<std::string> lit_ids;
  for (const auto& lit : dataset.citing_literatures) {
    auto tokens = tokenize(lit.body_text, profile);
    if (tokens.empty()) continue;
    lit_docs.push_back(std::move(tokens));
    lit_ids.push_back(literature_doc_id(lit));
  }
  if (!dataset.citing_literatures.empty())
    bundle.citation_model = try_fit(lit_docs, std::move(lit_ids), config.citation, "citation topic model", warnings);

  if (!dataset.reviews.empty()) {
    std::vector<std::pair<TokenStream, Polarity>> examples;
    for (const auto& label : bootstrap_polarity_labels(dataset.reviews))
      examples.emplace_back(tokenize(dataset.reviews[label.review_index].text, profile), label.polarity);
    try {
      bundle.sentiment = train_sentiment(examples);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::MissingClass) throw;
      warn(warnings, std::string("sentiment model: ") + e.what() + ", model skipped");
    }
  }

  std::vector<std::pair<TokenStream, CitationFunction>> contexts;
  bool any_context = false;
  for (const auto& lit : dataset.citing_literatures)
    for (const auto& ctx : lit.contexts) {
      any_context = true;
      if (ctx.function_label) contexts.emplace_back(tokenize(ctx.window_text, profile), *ctx.function_label);
    }
  if (any_context) {
    try {
      bundle.function_classifier = train_function_classifier(contexts);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::MissingClass) throw;
      warn(warnings, std::string("citation function classifier: ") + e.what() + ", model skipped");
    }
  }
  return bundle;
}

}  // namespace bookimpact
