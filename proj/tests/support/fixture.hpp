#pragma once

#include "bookimpact/ingest.hpp"
#include "bookimpact/service.hpp"

#include <filesystem>
#include <random>
#include <string>

namespace fixture {

inline std::filesystem::path dir() { return BOOKIMPACT_FIXTURE_DIR; }

inline bookimpact::Dataset dataset() {
  return bookimpact::load_dataset(bookimpact::IngestManifest::from_file(dir() / "manifest.json"));
}

// Small, fast training setup used across tests.
inline bookimpact::TrainConfig train_config() {
  bookimpact::TrainConfig c;
  for (auto* p : {&c.toc, &c.citation}) {
    p->topic_count = 8;
    p->iterations = 200;
    p->seed = 11;
  }
  return c;
}

struct Fitted {
  bookimpact::Dataset dataset;
  bookimpact::ModelBundle models;
};

inline const Fitted& fitted() {
  static const Fitted f = [] {
    Fitted x{dataset(), {}};
    x.models = bookimpact::train_models(x.dataset, train_config());
    return x;
  }();
  return f;
}

// Two disjoint vocabularies; documents of one class draw only from theirs.
inline std::vector<bookimpact::TokenStream> two_topic_corpus(std::vector<int>* classes, int docs = 20,
                                                              int length = 200, unsigned seed = 3) {
  const std::vector<std::string> a{"apple", "banana", "cherry", "grape", "lemon", "mango", "melon", "peach", "pear", "plum"};
  const std::vector<std::string> b{"anvil", "bolt", "chisel", "drill", "file", "hammer", "lathe", "nail", "saw", "wrench"};
  std::mt19937 rng(seed);
  std::uniform_int_distribution<int> pick(0, 9);
  std::vector<bookimpact::TokenStream> corpus;
  for (int d = 0; d < docs; ++d) {
    const auto& vocab = d % 2 == 0 ? a : b;
    std::string text;
    for (int i = 0; i < length; ++i) text += vocab[static_cast<std::size_t>(pick(rng))] + " ";
    corpus.push_back(bookimpact::tokenize(text));
    if (classes) classes->push_back(d % 2);
  }
  return corpus;
}

struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path = std::filesystem::temp_directory_path() / ("bookimpact-" + tag + "-" + std::to_string(rd()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

}  // namespace fixture
