#include "bookimpact/ingest.hpp"

#include "fixture.hpp"

#include <json.hpp>

#include <doctest.h>

#include <algorithm>
#include <random>
#include <sstream>
#include <unistd.h>

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

std::string message_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) out.push_back(line);
  return out;
}

std::string join(const std::vector<std::string>& lines) {
  std::string s;
  for (const auto& l : lines) s += l + "\n";
  return s;
}

}  // namespace

TEST_CASE("manifest with only a books file") {
  fixture::TempDir tmp("ingest");
  write_text_file(tmp / "books.jsonl",
                  "{\"isbn\":\"A\",\"title\":\"a\",\"discipline\":\"Law\",\"page_count\":10,\"toc_text\":\"x y\"}\n"
                  "{\"isbn\":\"B\",\"title\":\"b\",\"discipline\":\"Medicine\",\"page_count\":20,\"toc_text\":\"y z\"}\n");
  write_text_file(tmp / "manifest.json", "{\"books\": \"books.jsonl\"}");
  const Dataset d = load_dataset(IngestManifest::from_file(tmp / "manifest.json"));
  CHECK(d.books.size() == 2);
  CHECK(d.reviews.empty());
  CHECK(d.citing_literatures.empty());
  CHECK(d.holdings.empty());
  CHECK(d.sales.empty());
  CHECK(d.aspect_lexicon == default_aspect_lexicon());
}

TEST_CASE("missing books file") {
  CHECK(kind_of([] { IngestManifest::parse("{\"reviews\": \"r.jsonl\"}"); }) == ErrorKind::MissingMandatoryFile);
  IngestManifest m;
  m.books = "/nonexistent/books.jsonl";
  CHECK(kind_of([&] { load_dataset(m); }) == ErrorKind::MissingMandatoryFile);
}

TEST_CASE("type error reports file and line") {
  const std::string text =
      "{\"isbn\":\"A\",\"review_id\":\"r1\",\"star\":5,\"text\":\"ok\"}\n"
      "\n"
      "{\"isbn\":\"A\",\"review_id\":\"r2\",\"star\":\"five\",\"text\":\"ok\"}\n";
  CHECK(kind_of([&] { parse_reviews(text, "reviews.jsonl"); }) == ErrorKind::MalformedRecord);
  const auto msg = message_of([&] { parse_reviews(text, "reviews.jsonl"); });
  CHECK(msg.find("reviews.jsonl:3") != std::string::npos);
  CHECK(msg.find("star") != std::string::npos);
}

TEST_CASE("invalid JSON and non-object lines") {
  CHECK(kind_of([] { parse_sales("{\"isbn\": \"A\", ", "s"); }) == ErrorKind::MalformedRecord);
  CHECK(kind_of([] { parse_sales("[1,2]", "s"); }) == ErrorKind::MalformedRecord);
  CHECK(kind_of([] { parse_sales("{\"isbn\":\"A\"}", "s"); }) == ErrorKind::MalformedRecord);
}

TEST_CASE("duplicate keys") {
  const std::string books =
      "{\"isbn\":\"A\",\"discipline\":\"Law\",\"page_count\":1}\n{\"isbn\":\"A\",\"discipline\":\"Law\",\"page_count\":2}\n";
  CHECK(kind_of([&] { parse_books(books, "b"); }) == ErrorKind::DuplicateKey);
  CHECK(kind_of([] { parse_metric_questionnaire("respondent_id,toc_depth\nE1,3\nE1,4\n", "q"); }) ==
        ErrorKind::DuplicateKey);
}

TEST_CASE("unknown fields are ignored with a warning") {
  std::vector<std::string> warnings;
  const auto sales = parse_sales("{\"isbn\":\"A\",\"sale_rank\":3,\"category\":\"x\"}\n", "sales.jsonl", &warnings);
  REQUIRE(sales.size() == 1);
  CHECK(sales[0].sale_rank == 3);
  REQUIRE(warnings.size() == 1);
  CHECK(warnings[0].find("category") != std::string::npos);
  CHECK(warnings[0].find("sales.jsonl:1") != std::string::npos);
}

TEST_CASE("holdings regions are normalized and zeros dropped") {
  std::vector<std::string> warnings;
  const auto h = parse_holdings("{\"isbn\":\"A\",\"regions\":{\" u.s.a\":3,\"cn\":0,\"UK\":2}}", "h", &warnings);
  REQUIRE(h.size() == 1);
  CHECK(h[0].per_region == std::map<std::string, int>{{"U.S.A", 3}, {"UK", 2}});
  CHECK(warnings.size() == 1);
}

TEST_CASE("citation contexts inherit their literature keys") {
  const auto c = parse_citations(
      "{\"isbn\":\"A\",\"lit_id\":\"L1\",\"intensity\":2,\"body_text\":\"x\","
      "\"contexts\":[{\"window_text\":\"we use it\",\"function_label\":\"Use\"},{\"window_text\":\"w\"}]}",
      "c");
  REQUIRE(c.size() == 1);
  REQUIRE(c[0].contexts.size() == 2);
  CHECK(c[0].contexts[0].isbn == "A");
  CHECK(c[0].contexts[0].lit_id == "L1");
  CHECK(c[0].contexts[0].function_label == CitationFunction::Use);
  CHECK_FALSE(c[0].contexts[1].function_label);
  CHECK(kind_of([] {
          parse_citations("{\"isbn\":\"A\",\"lit_id\":\"L1\",\"intensity\":2,\"contexts\":[{\"window_text\":\"w\","
                          "\"function_label\":\"Praise\"}]}",
                          "c");
        }) == ErrorKind::MalformedRecord);
}

TEST_CASE("questionnaire tables and JSON lines agree") {
  const auto table = parse_metric_questionnaire("respondent_id\tcontents\treviews\nE1\t5\t\nE2\t3\t4\n", "q");
  const auto lines = parse_metric_questionnaire(
      "{\"respondent_id\":\"E1\",\"ratings\":{\"contents\":5}}\n"
      "{\"respondent_id\":\"E2\",\"ratings\":{\"contents\":3,\"reviews\":4}}\n",
      "q");
  CHECK(table == lines);
  CHECK(kind_of([] { parse_metric_questionnaire("respondent_id,contents\nE1,high\n", "q"); }) ==
        ErrorKind::MalformedRecord);
  CHECK(kind_of([] { parse_metric_questionnaire("respondent_id,contents\nE1,3,4\n", "q"); }) ==
        ErrorKind::MalformedRecord);

  const auto books = parse_book_questionnaire("respondent_id,A,B\nE1,4,\nE2,2,5\n", "b");
  CHECK(books.size() == 3);
  CHECK(books[0] == ExpertBookScore{"E1", "A", 4});
}

TEST_CASE("fixture coverage matches the documented counts") {
  const Dataset d = fixture::dataset();
  const auto expected = nlohmann::json::parse(read_text_file(fixture::dir() / "expected_coverage.json"));
  const auto p = coverage_profile(d);
  int books = 0;
  for (const auto& [name, counts] : expected.items()) {
    const CoverageRow* row = p.row(name);
    REQUIRE(row);
    CHECK(row->books == counts["books"].get<int>());
    CHECK(row->reviews == counts["reviews"].get<int>());
    CHECK(row->citations == counts["citations"].get<int>());
    CHECK(row->contexts == counts["contexts"].get<int>());
    CHECK(row->holdings == counts["holdings"].get<int>());
    books += row->books;
  }
  CHECK(books == 24);
  CHECK(validate_dataset(d).ok());
}

TEST_CASE("snapshot round-trip") {
  fixture::TempDir tmp("snap");
  const Dataset d = fixture::dataset();
  save_snapshot(d, tmp / "s.json");
  const Dataset back = load_snapshot(tmp / "s.json");
  CHECK(back == d);
  CHECK(coverage_profile(back) == coverage_profile(d));
  CHECK(validate_dataset(back) == validate_dataset(d));
  CHECK(dataset_to_json(back) == dataset_to_json(d));
}

TEST_CASE("snapshot version mismatch") {
  auto doc = nlohmann::json::parse(dataset_to_json(Dataset{}));
  doc["version"] = 0;
  CHECK(kind_of([&] { dataset_from_json(doc.dump()); }) == ErrorKind::VersionMismatch);
  CHECK(kind_of([] { dataset_from_json("{\"format\":\"other\",\"version\":1}"); }) == ErrorKind::MalformedRecord);
}

TEST_CASE("writing to a read-only location fails with IoFailure") {
  fixture::TempDir tmp("ro");
  std::filesystem::permissions(tmp.path, std::filesystem::perms::owner_read | std::filesystem::perms::owner_exec);
  const bool privileged = ::geteuid() == 0;
  if (!privileged) CHECK(kind_of([&] { save_snapshot(Dataset{}, tmp / "s.json"); }) == ErrorKind::IoFailure);
  std::filesystem::permissions(tmp.path, std::filesystem::perms::owner_all);
  CHECK(kind_of([] { save_snapshot(Dataset{}, "/proc/bookimpact/s.json"); }) == ErrorKind::IoFailure);
  CHECK(kind_of([] { load_snapshot("/nonexistent/s.json"); }) == ErrorKind::IoFailure);
}

TEST_CASE("ingestion is deterministic and order independent") {
  const Dataset a = fixture::dataset();
  CHECK(dataset_to_json(a) == dataset_to_json(fixture::dataset()));

  fixture::TempDir tmp("perm");
  std::mt19937 rng(5);
  for (const char* name : {"books.jsonl", "reviews.jsonl", "citations.jsonl", "holdings.jsonl", "sales.jsonl"}) {
    auto lines = lines_of(read_text_file(fixture::dir() / name));
    std::shuffle(lines.begin(), lines.end(), rng);
    write_text_file(tmp / name, join(lines));
  }
  for (const char* name : {"metric_questionnaire.csv", "book_questionnaire.csv"}) {
    auto lines = lines_of(read_text_file(fixture::dir() / name));
    std::shuffle(lines.begin() + 1, lines.end(), rng);
    write_text_file(tmp / name, join(lines));
  }
  std::filesystem::copy_file(fixture::dir() / "manifest.json", tmp.path / "manifest.json");
  const Dataset b = load_dataset(IngestManifest::from_file(tmp / "manifest.json"));
  CHECK(a == b);
  CHECK(dataset_to_json(a) == dataset_to_json(b));
}

TEST_CASE("custom aspect lexicon file") {
  fixture::TempDir tmp("lex");
  write_text_file(tmp / "books.jsonl", "{\"isbn\":\"A\",\"discipline\":\"Law\",\"page_count\":1}\n");
  write_text_file(tmp / "lex.tsv", "Price\tprice cost\n@positive good\n@negative bad\n@negator not\n");
  write_text_file(tmp / "manifest.json", "{\"books\":\"books.jsonl\",\"aspect_lexicon\":\"lex.tsv\"}");
  const Dataset d = load_dataset(IngestManifest::from_file(tmp / "manifest.json"));
  CHECK(d.aspect_lexicon.aspects.size() == 1);
  CHECK(d.aspect_lexicon.aspects.at("Price") == std::set<std::string>{"price", "cost"});
}

TEST_CASE("manifest rejects unknown tokenizer and encodings") {
  CHECK(kind_of([] { IngestManifest::parse("{\"books\":\"b\",\"tokenizer\":\"morph\"}"); }) == ErrorKind::UnknownProfile);
  CHECK(kind_of([] { IngestManifest::parse("{\"books\":\"b\",\"encoding\":\"GBK\"}"); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("weights file round-trip") {
  const WeightHierarchy ref = reference_weights();
  const WeightHierarchy back = weights_from_json(weights_to_json(ref));
  CHECK((back.global - ref.global).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(back.provenance == WeightProvenance::Reference);

  nlohmann::json arr{{"global", std::vector<double>(15, 2.0)}};
  const WeightHierarchy uniform = weights_from_json(arr.dump());
  CHECK(uniform.global(0) == doctest::Approx(1.0 / 15));
  nlohmann::json short_arr{{"global", std::vector<double>(14, 1.0)}};
  CHECK(kind_of([&] { weights_from_json(short_arr.dump()); }) == ErrorKind::InvalidWeights);
}
