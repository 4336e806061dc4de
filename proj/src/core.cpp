#include "bookimpact/core.hpp"

namespace bookimpact {

std::optional<MetricId> metric_from_key(std::string_view key) {
  for (const auto& m : kMetrics)
    if (m.key == key) return m.id;
  return std::nullopt;
}

std::optional<Source> source_from_key(std::string_view key) {
  for (const auto& s : kSources)
    if (s.key == key) return s.source;
  // singular aliases used by the ranking key flag
  if (key == "content") return Source::Content;
  if (key == "review") return Source::Review;
  if (key == "citation") return Source::Citation;
  if (key == "usage") return Source::Usage;
  return std::nullopt;
}

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::MalformedRecord: return "MalformedRecord";
    case ErrorKind::DuplicateKey: return "DuplicateKey";
    case ErrorKind::MissingMandatoryFile: return "MissingMandatoryFile";
    case ErrorKind::IoFailure: return "IoFailure";
    case ErrorKind::VersionMismatch: return "VersionMismatch";
    case ErrorKind::UnknownProfile: return "UnknownProfile";
    case ErrorKind::EmptyDocument: return "EmptyDocument";
    case ErrorKind::DegenerateCorpus: return "DegenerateCorpus";
    case ErrorKind::MissingClass: return "MissingClass";
    case ErrorKind::NotADistribution: return "NotADistribution";
    case ErrorKind::NegativeInput: return "NegativeInput";
    case ErrorKind::NoPresentMetrics: return "NoPresentMetrics";
    case ErrorKind::MissingRating: return "MissingRating";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::NonConvergence: return "NonConvergence";
    case ErrorKind::InvalidMatrix: return "InvalidMatrix";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::ZeroVariance: return "ZeroVariance";
    case ErrorKind::InsufficientData: return "InsufficientData";
    case ErrorKind::InsufficientOverlap: return "InsufficientOverlap";
    case ErrorKind::UnknownBook: return "UnknownBook";
    case ErrorKind::InvalidWeights: return "InvalidWeights";
  }
  return "Error";
}

}  // namespace bookimpact
