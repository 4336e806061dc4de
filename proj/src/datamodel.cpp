#include "bookimpact/datamodel.hpp"

#include <algorithm>
#include <cctype>
#include <set>

namespace bookimpact {

namespace {

std::string squash(std::string_view s) {
  std::string out;
  for (unsigned char c : s)
    if (std::isalnum(c) || c >= 0x80) out.push_back(static_cast<char>(std::tolower(c)));
  return out;
}

constexpr std::string_view fixed_name(DisciplineKind k) {
  switch (k) {
    case DisciplineKind::ComputerScience: return "ComputerScience";
    case DisciplineKind::Literature: return "Literature";
    case DisciplineKind::Law: return "Law";
    case DisciplineKind::Medicine: return "Medicine";
    case DisciplineKind::SportScience: return "SportScience";
    case DisciplineKind::Other: return "Other";
  }
  return "Other";
}

}  // namespace

Discipline Discipline::parse(std::string_view name) {
  const std::string key = squash(name);
  for (auto k : kFixedDisciplines)
    if (key == squash(fixed_name(k))) return {k, {}};
  std::string trimmed(name);
  trimmed.erase(0, trimmed.find_first_not_of(" \t"));
  trimmed.erase(trimmed.find_last_not_of(" \t") + 1);
  return {DisciplineKind::Other, trimmed};
}

std::string Discipline::name() const {
  if (kind == DisciplineKind::Other) return other_name.empty() ? "Other" : other_name;
  return std::string(fixed_name(kind));
}

std::string_view to_string(Polarity p) { return p == Polarity::Positive ? "Positive" : "Negative"; }

std::string_view to_string(CitationFunction f) {
  switch (f) {
    case CitationFunction::Background: return "Background";
    case CitationFunction::Comparison: return "Comparison";
    case CitationFunction::Use: return "Use";
  }
  return "Background";
}

std::optional<Polarity> parse_polarity(std::string_view s) {
  const auto k = squash(s);
  if (k == "positive" || k == "pos") return Polarity::Positive;
  if (k == "negative" || k == "neg") return Polarity::Negative;
  return std::nullopt;
}

std::optional<CitationFunction> parse_citation_function(std::string_view s) {
  const auto k = squash(s);
  if (k == "background") return CitationFunction::Background;
  if (k == "comparison") return CitationFunction::Comparison;
  if (k == "use") return CitationFunction::Use;
  return std::nullopt;
}

const BookRecord* Dataset::find_book(std::string_view isbn) const {
  auto it = std::lower_bound(books.begin(), books.end(), isbn,
                             [](const BookRecord& b, std::string_view key) { return b.isbn < key; });
  if (it != books.end() && it->isbn == isbn) return &*it;
  // tolerate non-canonical order in hand-built datasets
  auto lin = std::find_if(books.begin(), books.end(), [&](const BookRecord& b) { return b.isbn == isbn; });
  return lin == books.end() ? nullptr : &*lin;
}

void Dataset::canonicalize() {
  auto by = [](auto... members) {
    return [=](const auto& a, const auto& b) { return std::tie(a.*members...) < std::tie(b.*members...); };
  };
  std::stable_sort(books.begin(), books.end(), by(&BookRecord::isbn));
  std::stable_sort(reviews.begin(), reviews.end(), by(&Review::isbn, &Review::review_id));
  std::stable_sort(citing_literatures.begin(), citing_literatures.end(),
                   by(&CitingLiterature::isbn, &CitingLiterature::lit_id));
  std::stable_sort(holdings.begin(), holdings.end(), by(&HoldingsRecord::isbn));
  std::stable_sort(sales.begin(), sales.end(), by(&SaleRecord::isbn));
  std::stable_sort(expert_metric_ratings.begin(), expert_metric_ratings.end(),
                   by(&ExpertMetricRating::respondent_id));
  std::stable_sort(expert_book_scores.begin(), expert_book_scores.end(),
                   by(&ExpertBookScore::respondent_id, &ExpertBookScore::isbn));
}

std::string normalize_region(std::string_view code) {
  std::string s(code);
  s.erase(0, s.find_first_not_of(" \t\r\n"));
  s.erase(s.find_last_not_of(" \t\r\n") + 1);
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  return s;
}

ValidationReport validate_dataset(const Dataset& ds) {
  ValidationReport report;
  auto error = [&](std::string locator, std::string message) {
    report.errors.push_back({std::move(locator), std::move(message)});
  };

  std::set<std::string> isbns;
  for (const auto& b : ds.books) {
    const std::string loc = "book " + b.isbn;
    if (b.isbn.empty()) error("book <empty>", "empty isbn (title '" + b.title + "')");
    else if (!isbns.insert(b.isbn).second) error(loc, "duplicate isbn " + b.isbn);
    if (b.page_count < 1) error(loc, "page_count must be >= 1, got " + std::to_string(b.page_count));
  }

  auto resolve = [&](const std::string& loc, const std::string& isbn) {
    if (!isbns.contains(isbn)) error(loc, "unresolved isbn " + isbn);
  };

  std::set<std::string> with_reviews, with_citations, with_holdings, with_sale;

  for (const auto& r : ds.reviews) {
    const std::string loc = "review " + r.review_id;
    resolve(loc, r.isbn);
    if (r.star < 1 || r.star > 5) error(loc, "star must be in 1..5, got " + std::to_string(r.star));
    if (r.aspect_labels)
      for (const auto& a : *r.aspect_labels)
        if (a.polarity != 1 && a.polarity != -1) error(loc, "aspect polarity must be +1 or -1 for " + a.aspect);
    with_reviews.insert(r.isbn);
  }

  for (const auto& lit : ds.citing_literatures) {
    const std::string loc = "literature " + lit.lit_id;
    resolve(loc, lit.isbn);
    if (lit.intensity < 1) error(loc, "intensity must be >= 1, got " + std::to_string(lit.intensity));
    for (std::size_t i = 0; i < lit.contexts.size(); ++i) {
      const auto& ctx = lit.contexts[i];
      const std::string cloc = loc + " context " + std::to_string(i);
      if (ctx.window_text.empty()) error(cloc, "empty window_text");
      if (ctx.isbn != lit.isbn || ctx.lit_id != lit.lit_id) error(cloc, "context does not belong to its literature");
    }
    with_citations.insert(lit.isbn);
  }

  for (const auto& h : ds.holdings) {
    const std::string loc = "holdings " + h.isbn;
    resolve(loc, h.isbn);
    if (!with_holdings.insert(h.isbn).second) error(loc, "more than one holdings record for isbn " + h.isbn);
    for (const auto& [region, count] : h.per_region)
      if (count < 1) error(loc, "holding count for region " + region + " must be >= 1");
  }

  for (const auto& s : ds.sales) {
    const std::string loc = "sale " + s.isbn;
    resolve(loc, s.isbn);
    if (!with_sale.insert(s.isbn).second) error(loc, "more than one sale record for isbn " + s.isbn);
    if (s.sale_rank < 1) error(loc, "sale_rank must be >= 1, got " + std::to_string(s.sale_rank));
  }

  std::set<std::string> respondents;
  for (const auto& q : ds.expert_metric_ratings) {
    const std::string loc = "metric questionnaire " + q.respondent_id;
    if (!respondents.insert(q.respondent_id).second) error(loc, "duplicate respondent_id");
    for (const auto& [item, value] : q.ratings)
      if (value < 1 || value > 5) error(loc, "rating for " + item + " must be in 1..5");
  }

  std::set<std::pair<std::string, std::string>> book_scores;
  for (const auto& e : ds.expert_book_scores) {
    const std::string loc = "book questionnaire " + e.respondent_id + "/" + e.isbn;
    resolve(loc, e.isbn);
    if (!book_scores.insert({e.respondent_id, e.isbn}).second) error(loc, "duplicate rating");
    if (e.impact < 1 || e.impact > 5) error(loc, "impact must be in 1..5, got " + std::to_string(e.impact));
  }

  for (const auto& b : ds.books) {
    const std::string loc = "book " + b.isbn;
    if (!with_reviews.contains(b.isbn)) report.warnings.push_back({loc, "no reviews"});
    if (!with_citations.contains(b.isbn)) report.warnings.push_back({loc, "no citations"});
    if (!with_holdings.contains(b.isbn)) report.warnings.push_back({loc, "no holdings"});
    if (!with_sale.contains(b.isbn)) report.warnings.push_back({loc, "no sale"});
  }
  return report;
}

const CoverageRow* CoverageProfile::row(std::string_view discipline) const {
  for (const auto& r : rows)
    if (r.discipline == discipline) return &r;
  return nullptr;
}

CoverageProfile coverage_profile(const Dataset& ds) {
  CoverageProfile profile;
  std::map<std::string, CoverageRow> others;
  for (auto k : kFixedDisciplines) profile.rows.push_back({Discipline{k, {}}.name()});

  std::map<std::string, std::string> discipline_of;
  for (const auto& b : ds.books) discipline_of[b.isbn] = b.discipline.name();

  auto row_for = [&](const std::string& isbn) -> CoverageRow* {
    auto it = discipline_of.find(isbn);
    if (it == discipline_of.end()) return nullptr;
    for (auto& r : profile.rows)
      if (r.discipline == it->second) return &r;
    auto& o = others[it->second];
    o.discipline = it->second;
    return &o;
  };

  for (const auto& b : ds.books) ++row_for(b.isbn)->books;
  for (const auto& r : ds.reviews)
    if (auto* row = row_for(r.isbn)) ++row->reviews;
  for (const auto& lit : ds.citing_literatures)
    if (auto* row = row_for(lit.isbn)) {
      ++row->citations;
      row->contexts += static_cast<int>(lit.contexts.size());
    }
  for (const auto& h : ds.holdings)
    if (auto* row = row_for(h.isbn)) row->holdings += static_cast<int>(h.per_region.size());

  for (auto& [name, r] : others) profile.rows.push_back(r);

  profile.total.discipline = "Total";
  for (const auto& r : profile.rows) {
    profile.total.books += r.books;
    profile.total.reviews += r.reviews;
    profile.total.citations += r.citations;
    profile.total.contexts += r.contexts;
    profile.total.holdings += r.holdings;
  }
  return profile;
}

}  // namespace bookimpact
