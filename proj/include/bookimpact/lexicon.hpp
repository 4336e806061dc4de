#pragma once

#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace bookimpact {

// Aspect trigger terms plus the polarity cue lexicon used to score aspect mentions.
struct AspectLexicon {
  std::map<std::string, std::set<std::string>> aspects;  // aspect id -> trigger terms
  std::set<std::string> positive;
  std::set<std::string> negative;
  std::set<std::string> negators;

  bool empty() const { return aspects.empty(); }

  // Reverse index: trigger term -> aspect ids it fires.
  std::map<std::string, std::vector<std::string>> trigger_index() const;

  // Throws InvalidArgument when an aspect has no triggers.
  void check() const;

  bool operator==(const AspectLexicon&) const = default;
};

// The twelve book aspects with English and Chinese trigger terms and a small cue lexicon.
AspectLexicon default_aspect_lexicon();

// Line format:
//   <aspect_id> <TAB> term term ...
//   @positive term ...   @negative term ...   @negator term ...
// Blank lines and lines starting with '#' are skipped. Terms are lowercased.
AspectLexicon parse_aspect_lexicon(std::string_view text, const std::string& file_name = "<lexicon>");
std::string format_aspect_lexicon(const AspectLexicon& lexicon);

}  // namespace bookimpact
