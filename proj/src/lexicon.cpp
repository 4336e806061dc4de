#include "bookimpact/lexicon.hpp"

#include "bookimpact/core.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace bookimpact {

namespace {

std::string ascii_lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::vector<std::string> split_terms(std::string_view text) {
  std::vector<std::string> out;
  std::istringstream in{std::string(text)};
  std::string term;
  while (in >> term) out.push_back(ascii_lower(term));
  return out;
}

}  // namespace

std::map<std::string, std::vector<std::string>> AspectLexicon::trigger_index() const {
  std::map<std::string, std::vector<std::string>> index;
  for (const auto& [aspect, terms] : aspects)
    for (const auto& t : terms) index[t].push_back(aspect);
  return index;
}

void AspectLexicon::check() const {
  for (const auto& [aspect, terms] : aspects)
    if (terms.empty()) fail(ErrorKind::InvalidArgument, "aspect '" + aspect + "' has no trigger terms");
}

AspectLexicon default_aspect_lexicon() {
  AspectLexicon lex;
  lex.aspects = {
      {"Content", {"content", "contents", "内容"}},
      {"Author", {"author", "writer", "作者"}},
      {"Paper", {"paper", "纸张", "纸质"}},
      {"Package", {"package", "packaging", "包装"}},
      {"Cover", {"cover", "封面"}},
      {"Price", {"price", "prices", "价格"}},
      {"Logistics", {"logistics", "delivery", "shipping", "物流", "快递"}},
      {"Illustration", {"illustration", "illustrations", "pictures", "插图"}},
      {"Printing", {"printing", "print", "印刷"}},
      {"Version", {"version", "edition", "版本"}},
      {"Font", {"font", "fonts", "typeface", "字体"}},
      {"Writing-style", {"style", "writing", "文笔"}},
  };
  lex.positive = {"good", "great", "excellent", "nice", "clear", "beautiful", "fine", "fast",
                  "reasonable", "wonderful", "love", "recommend", "好", "不错", "清晰", "精美", "喜欢"};
  lex.negative = {"bad", "poor", "terrible", "blurry", "slow", "expensive", "damaged", "boring",
                  "awful", "disappointing", "差", "模糊", "贵", "失望"};
  lex.negators = {"not", "no", "never", "hardly", "不", "没有"};
  return lex;
}

AspectLexicon parse_aspect_lexicon(std::string_view text, const std::string& file_name) {
  AspectLexicon lex;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    line = line.substr(first);

    auto split = line.find_first_of(" \t");
    std::string head = line.substr(0, split);
    auto terms = split_terms(split == std::string::npos ? std::string_view{} : std::string_view(line).substr(split));
    if (terms.empty())
      fail(ErrorKind::MalformedRecord, file_name + ":" + std::to_string(line_no) + ": no terms for '" + head + "'");

    std::set<std::string>* target = nullptr;
    if (head == "@positive") target = &lex.positive;
    else if (head == "@negative") target = &lex.negative;
    else if (head == "@negator") target = &lex.negators;
    else if (head.starts_with('@'))
      fail(ErrorKind::MalformedRecord, file_name + ":" + std::to_string(line_no) + ": unknown directive " + head);
    else {
      if (lex.aspects.contains(head))
        fail(ErrorKind::DuplicateKey, file_name + ":" + std::to_string(line_no) + ": aspect " + head);
      target = &lex.aspects[head];
    }
    target->insert(terms.begin(), terms.end());
  }
  return lex;
}

std::string format_aspect_lexicon(const AspectLexicon& lexicon) {
  std::ostringstream out;
  auto emit = [&out](std::string_view head, const std::set<std::string>& terms) {
    if (terms.empty()) return;
    out << head << '\t';
    bool first = true;
    for (const auto& t : terms) {
      out << (first ? "" : " ") << t;
      first = false;
    }
    out << '\n';
  };
  for (const auto& [aspect, terms] : lexicon.aspects) emit(aspect, terms);
  emit("@positive", lexicon.positive);
  emit("@negative", lexicon.negative);
  emit("@negator", lexicon.negators);
  return out.str();
}

}  // namespace bookimpact
